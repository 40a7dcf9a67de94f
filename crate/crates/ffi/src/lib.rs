//! C ABI over the vecdock kernels.
//!
//! Grids and ligands cross the boundary as opaque handles. A handle comes
//! from one of the `vd_*_load`, `vd_*_build`, `vd_*_parse` or
//! `vd_*_synthetic` constructors and must be released with the matching
//! `vd_*_free`. Every fallible call returns a `VdStatus`. On failure a
//! message describing the error is stored for the calling thread and can be
//! read with `vd_last_error`.
//!
//! Handles are immutable after construction, so one handle may be shared by
//! several threads as long as nobody frees it while it is in use.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};

use vecdock::energy::TermWeights;
use vecdock::ga::{dock, GaConfig};
use vecdock::grid::{build_grid_maps, read_grid_set, write_grid_set, GridMapSet, GridSpec};
use vecdock::io::{generate_synthetic_ligand, parse_ligand_pdbqt, parse_protein_pdbqt, PdbqtOptions};
use vecdock::scoring::score_pose;
use vecdock::{BackendKind, Error, LigandTopology, ParameterTable, ScoreBreakdown};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Topology = 5,
    Grid = 6,
    Pose = 7,
    Config = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Scoring backend selectors accepted by the `backend` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VdBackend {
    Reference = 0,
    Scalar = 1,
    Simd = 2,
}

/// Energy components in kcal/mol.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VdScore {
    pub inter: f32,
    pub intra: f32,
    pub torsional: f32,
    pub total: f32,
}

/// Search settings for `vd_dock`. Start from `vd_dock_params_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdDockParams {
    pub population_size: usize,
    pub generations: usize,
    pub seed: u64,
}

/// A set of precomputed grid maps.
pub struct VdGrid {
    maps: GridMapSet,
}

/// A parsed or generated ligand.
pub struct VdLigand {
    topology: LigandTopology,
}

struct Failure {
    status: VdStatus,
    message: String,
}

impl Failure {
    fn new(status: VdStatus, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Topology(_) => VdStatus::Topology,
            Error::Parse(_) => VdStatus::Parse,
            Error::Grid(_) => VdStatus::Grid,
            Error::Pose(_) => VdStatus::Pose,
            Error::Config(_) => VdStatus::Config,
            Error::Io { .. } => VdStatus::Io,
        };
        Failure::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> VdStatus {
    let failure = match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => return VdStatus::Ok,
        Ok(Err(f)) => f,
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            Failure::new(VdStatus::Panic, format!("internal panic: {what}"))
        }
    };
    set_last_error(&failure.message);
    failure.status
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(VdStatus::NullPointer, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(VdStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn backend_of(code: c_int) -> Result<BackendKind, Failure> {
    match code {
        c if c == VdBackend::Reference as c_int => Ok(BackendKind::Reference),
        c if c == VdBackend::Scalar as c_int => Ok(BackendKind::Scalar),
        c if c == VdBackend::Simd as c_int => Ok(BackendKind::Simd),
        other => Err(Failure::new(VdStatus::InvalidArgument, format!("unknown backend {other}"))),
    }
}

fn to_score(b: ScoreBreakdown) -> VdScore {
    VdScore { inter: b.inter, intra: b.intra, torsional: b.torsional, total: b.total }
}

unsafe fn emit<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the most recent failure on this thread, or NULL if no call on
/// this thread has failed. The pointer stays valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn vd_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Settings matching the library defaults.
#[no_mangle]
pub extern "C" fn vd_dock_params_default() -> VdDockParams {
    let d = GaConfig::default();
    VdDockParams { population_size: d.population_size, generations: d.generations, seed: d.seed }
}

/// Reads a grid map file written by `vecdock grid` or `vd_grid_save`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vd_grid_load(path: *const c_char, out: *mut *mut VdGrid) -> VdStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = text(path, "path")?;
        let file = File::open(path).map_err(|e| Failure::new(VdStatus::Io, format!("{path}: {e}")))?;
        let maps = read_grid_set(BufReader::new(file)).map_err(Error::from)?;
        emit(out, VdGrid { maps });
        Ok(())
    })
}

/// Builds maps for every atom type of the default parameter table from a
/// receptor in PDBQT text, on a box of `dims[0] x dims[1] x dims[2]` points
/// centered at `center`.
///
/// # Safety
/// `receptor_pdbqt` must be a NUL-terminated string, `center` must point to
/// three floats, `dims` to three sizes and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn vd_grid_build(
    receptor_pdbqt: *const c_char,
    center: *const f32,
    dims: *const usize,
    spacing: f32,
    out: *mut *mut VdGrid,
) -> VdStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(center, "center")?;
        non_null(dims, "dims")?;
        let receptor = text(receptor_pdbqt, "receptor_pdbqt")?;
        let center: [f32; 3] = std::slice::from_raw_parts(center, 3).try_into().unwrap();
        let dims: [usize; 3] = std::slice::from_raw_parts(dims, 3).try_into().unwrap();
        let table = ParameterTable::default_table();
        let protein = parse_protein_pdbqt(receptor, &table, PdbqtOptions::default()).map_err(Error::from)?;
        let spec = GridSpec::centered(center, spacing, dims).map_err(Error::from)?;
        let labels: Vec<&str> = table.iter().map(|p| p.label.as_str()).collect();
        let maps = build_grid_maps(&protein, &table, spec, &labels, &TermWeights::default()).map_err(Error::from)?;
        emit(out, VdGrid { maps });
        Ok(())
    })
}

/// Writes `grid` to `path` in the binary map format.
///
/// # Safety
/// `grid` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vd_grid_save(grid: *const VdGrid, path: *const c_char) -> VdStatus {
    guard(|| {
        non_null(grid, "grid")?;
        let path = text(path, "path")?;
        let file = File::create(path).map_err(|e| Failure::new(VdStatus::Io, format!("{path}: {e}")))?;
        write_grid_set(&(*grid).maps, BufWriter::new(file)).map_err(Error::from)?;
        Ok(())
    })
}

/// Box geometry. Any output pointer may be NULL.
///
/// # Safety
/// `grid` must be a live handle. Non-NULL `origin` and `dims` must have room
/// for three values.
#[no_mangle]
pub unsafe extern "C" fn vd_grid_info(
    grid: *const VdGrid,
    origin: *mut f32,
    dims: *mut usize,
    spacing: *mut f32,
) -> VdStatus {
    guard(|| {
        non_null(grid, "grid")?;
        let spec = (*grid).maps.spec();
        if !origin.is_null() {
            std::slice::from_raw_parts_mut(origin, 3).copy_from_slice(&spec.origin);
        }
        if !dims.is_null() {
            std::slice::from_raw_parts_mut(dims, 3).copy_from_slice(&spec.dims);
        }
        if !spacing.is_null() {
            *spacing = spec.spacing;
        }
        Ok(())
    })
}

/// Releases a grid. NULL is ignored.
///
/// # Safety
/// `grid` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vd_grid_free(grid: *mut VdGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Parses a ligand from PDBQT text.
///
/// # Safety
/// `pdbqt` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vd_ligand_parse(pdbqt: *const c_char, out: *mut *mut VdLigand) -> VdStatus {
    guard(|| {
        non_null(out, "out")?;
        let src = text(pdbqt, "pdbqt")?;
        let table = ParameterTable::default_table();
        let parsed = parse_ligand_pdbqt(src, &table, PdbqtOptions::default()).map_err(Error::from)?;
        emit(out, VdLigand { topology: parsed.topology });
        Ok(())
    })
}

/// Generates a deterministic synthetic ligand.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vd_ligand_synthetic(
    seed: u64,
    n_atoms: usize,
    n_torsions: usize,
    out: *mut *mut VdLigand,
) -> VdStatus {
    guard(|| {
        non_null(out, "out")?;
        let topology = generate_synthetic_ligand(seed, n_atoms, n_torsions, &ParameterTable::default_table())?;
        emit(out, VdLigand { topology });
        Ok(())
    })
}

/// Number of atoms, or 0 for NULL.
///
/// # Safety
/// `ligand` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vd_ligand_n_atoms(ligand: *const VdLigand) -> usize {
    ligand.as_ref().map_or(0, |l| l.topology.n_atoms())
}

/// Genotype length: 3 translation, 4 quaternion, then one angle per torsion.
/// Returns 0 for NULL.
///
/// # Safety
/// `ligand` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vd_ligand_n_genes(ligand: *const VdLigand) -> usize {
    ligand.as_ref().map_or(0, |l| l.topology.n_genes())
}

/// Releases a ligand. NULL is ignored.
///
/// # Safety
/// `ligand` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vd_ligand_free(ligand: *mut VdLigand) {
    if !ligand.is_null() {
        drop(Box::from_raw(ligand));
    }
}

/// Scores one genotype of `n_genes` values.
///
/// # Safety
/// Handles must be live, `genes` must point to `n_genes` floats and `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn vd_score(
    ligand: *const VdLigand,
    grid: *const VdGrid,
    backend: c_int,
    genes: *const f32,
    n_genes: usize,
    out: *mut VdScore,
) -> VdStatus {
    guard(|| {
        non_null(ligand, "ligand")?;
        non_null(grid, "grid")?;
        non_null(genes, "genes")?;
        non_null(out, "out")?;
        let backend = backend_of(backend)?;
        let genes = std::slice::from_raw_parts(genes, n_genes);
        let table = ParameterTable::default_table();
        let b = score_pose(&(*ligand).topology, &table, genes, &(*grid).maps, &TermWeights::default(), backend)?;
        *out = to_score(b);
        Ok(())
    })
}

/// Runs a docking search. The best score goes to `out`. When `best_genes`
/// is not NULL the best genotype is copied there; it must have room for
/// `vd_ligand_n_genes` values, declared in `genes_capacity`.
///
/// # Safety
/// Handles must be live, `params` and `out` valid, and `best_genes` NULL or
/// pointing to `genes_capacity` writable floats.
#[no_mangle]
pub unsafe extern "C" fn vd_dock(
    ligand: *const VdLigand,
    grid: *const VdGrid,
    backend: c_int,
    params: *const VdDockParams,
    out: *mut VdScore,
    best_genes: *mut f32,
    genes_capacity: usize,
) -> VdStatus {
    guard(|| {
        non_null(ligand, "ligand")?;
        non_null(grid, "grid")?;
        non_null(params, "params")?;
        non_null(out, "out")?;
        let backend = backend_of(backend)?;
        let topology = &(*ligand).topology;
        if !best_genes.is_null() && genes_capacity < topology.n_genes() {
            return Err(Failure::new(
                VdStatus::BufferTooSmall,
                format!("best_genes holds {genes_capacity} values, need {}", topology.n_genes()),
            ));
        }
        let p = *params;
        let config =
            GaConfig { population_size: p.population_size, generations: p.generations, seed: p.seed, ..GaConfig::default() };
        let table = ParameterTable::default_table();
        let result = dock(topology, &table, &(*grid).maps, &TermWeights::default(), &config, backend)?;
        *out = to_score(result.breakdown);
        if !best_genes.is_null() {
            std::slice::from_raw_parts_mut(best_genes, result.genotype.len()).copy_from_slice(&result.genotype);
        }
        Ok(())
    })
}
