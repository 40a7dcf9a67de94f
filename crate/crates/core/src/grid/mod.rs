//! Precomputed receptor grid maps and trilinear lookup.
//!
//! One affinity map per probe type holds the weighted van der Waals (or
//! hydrogen-bond) sum plus the type-dependent desolvation part. The `e` map
//! holds electrostatic potential per unit probe charge (unweighted) and the
//! `d` map the receptor volume-weighted Gaussian, so scoring applies the
//! ligand-dependent factors at lookup time.

mod format;

pub use format::{read_grid_set, write_grid_set, MUGD_MAGIC, MUGD_VERSION};

use rayon::prelude::*;

use crate::energy::{self, TermWeights, QASP};
use crate::error::GridError;
use crate::model::{combine, ParameterTable, Protein};

/// Label of the electrostatic potential map.
pub const ELEC_LABEL: &str = "e";
/// Label of the charge-dependent desolvation map.
pub const DESOLV_LABEL: &str = "d";
/// Default node spacing, Å.
pub const DEFAULT_SPACING: f32 = 0.375;
/// Cutoff for van der Waals, hydrogen-bond and desolvation node sums, Å.
pub const NONBOND_CUTOFF: f64 = 8.0;
/// Receptor atoms further than this from the origin are rejected.
pub const MAX_COORDINATE: f32 = 1.0e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: [f32; 3],
    pub spacing: f32,
    pub dims: [usize; 3],
}

impl GridSpec {
    pub fn new(origin: [f32; 3], spacing: f32, dims: [usize; 3]) -> Result<Self, GridError> {
        let spec = Self { origin, spacing, dims };
        spec.check()?;
        Ok(spec)
    }

    /// Box of `dims` nodes centered on `center`.
    pub fn centered(center: [f32; 3], spacing: f32, dims: [usize; 3]) -> Result<Self, GridError> {
        let half = |k: usize| (dims[k].saturating_sub(1)) as f32 * spacing / 2.0;
        Self::new([center[0] - half(0), center[1] - half(1), center[2] - half(2)], spacing, dims)
    }

    pub fn check(&self) -> Result<(), GridError> {
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(GridError::InvalidSpec(format!("spacing must be positive, got {}", self.spacing)));
        }
        if self.dims.iter().any(|&d| d < 2) {
            return Err(GridError::InvalidSpec(format!("need at least 2 nodes per axis, got {:?}", self.dims)));
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(GridError::InvalidSpec("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Linear index, x fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> [f32; 3] {
        [
            self.origin[0] + i as f32 * self.spacing,
            self.origin[1] + j as f32 * self.spacing,
            self.origin[2] + k as f32 * self.spacing,
        ]
    }

    /// Upper corner of the box.
    pub fn max_corner(&self) -> [f32; 3] {
        let e = |k: usize| self.origin[k] + (self.dims[k] - 1) as f32 * self.spacing;
        [e(0), e(1), e(2)]
    }

    pub fn contains(&self, p: [f32; 3]) -> bool {
        let hi = self.max_corner();
        (0..3).all(|k| p[k] >= self.origin[k] && p[k] <= hi[k])
    }

    /// Euclidean distance from `p` to the box; zero inside.
    pub fn distance_outside(&self, p: [f32; 3]) -> f32 {
        let hi = self.max_corner();
        let mut d2 = 0.0f32;
        for k in 0..3 {
            let d = (self.origin[k] - p[k]).max(p[k] - hi[k]).max(0.0);
            d2 += d * d;
        }
        d2.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub label: String,
    /// `nx·ny·nz` values, x fastest.
    pub values: Vec<f32>,
}

/// Maps sharing one [`GridSpec`]. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMapSet {
    spec: GridSpec,
    maps: Vec<GridMap>,
}

impl GridMapSet {
    pub fn new(spec: GridSpec, maps: Vec<GridMap>) -> Result<Self, GridError> {
        spec.check()?;
        for m in &maps {
            if m.values.len() != spec.n_nodes() {
                return Err(GridError::SizeMismatch(format!(
                    "map {:?} has {} values, grid has {} nodes",
                    m.label,
                    m.values.len(),
                    spec.n_nodes()
                )));
            }
        }
        Ok(Self { spec, maps })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn maps(&self) -> &[GridMap] {
        &self.maps
    }

    pub fn slot(&self, label: &str) -> Option<usize> {
        self.maps.iter().position(|m| m.label == label)
    }

    pub fn get(&self, label: &str) -> Option<&GridMap> {
        self.maps.iter().find(|m| m.label == label)
    }

    pub fn values(&self, slot: usize) -> &[f32] {
        &self.maps[slot].values
    }
}

/// Cell index and fractional offsets of `p` along each axis. The cell is
/// clamped so that points on the upper faces use the last cell with t = 1.
#[inline]
pub fn cell_of(spec: &GridSpec, p: [f32; 3]) -> ([usize; 3], [f32; 3]) {
    let mut cell = [0usize; 3];
    let mut t = [0.0f32; 3];
    let inv = 1.0 / spec.spacing;
    for k in 0..3 {
        let g = (p[k] - spec.origin[k]) * inv;
        let c = (g.floor().max(0.0) as usize).min(spec.dims[k] - 2);
        cell[k] = c;
        t[k] = g - c as f32;
    }
    (cell, t)
}

/// Eight-corner trilinear interpolation. The caller guarantees `p` lies in
/// the box.
#[inline]
pub fn trilinear(spec: &GridSpec, values: &[f32], p: [f32; 3]) -> f32 {
    let ([i, j, k], [tx, ty, tz]) = cell_of(spec, p);
    let nx = spec.dims[0];
    let nxy = nx * spec.dims[1];
    let base = i + nx * j + nxy * k;
    let v = |off: usize| values[base + off];
    let c00 = v(0) * (1.0 - tx) + v(1) * tx;
    let c10 = v(nx) * (1.0 - tx) + v(nx + 1) * tx;
    let c01 = v(nxy) * (1.0 - tx) + v(nxy + 1) * tx;
    let c11 = v(nxy + nx) * (1.0 - tx) + v(nxy + nx + 1) * tx;
    let c0 = c00 * (1.0 - ty) + c10 * ty;
    let c1 = c01 * (1.0 - ty) + c11 * ty;
    c0 * (1.0 - tz) + c1 * tz
}

struct ProbeTerms {
    /// Per receptor type: (repulsive, attractive, hbond).
    pair: Vec<(f64, f64, bool)>,
    solpar: f64,
    volume: f64,
}

/// Precompute affinity maps for `probe_types` plus the `e` and `d` maps.
///
/// Sums for one node run over receptor atoms in index order in double
/// precision, so the result does not depend on how z-slabs are scheduled.
pub fn build_grid_maps(
    protein: &Protein,
    table: &ParameterTable,
    spec: GridSpec,
    probe_types: &[&str],
    weights: &TermWeights,
) -> Result<GridMapSet, GridError> {
    spec.check()?;
    if probe_types.is_empty() {
        return Err(GridError::NoProbes);
    }
    let coords = protein.coords();
    for a in 0..protein.n_atoms() {
        let p = coords.get(a);
        if p.iter().any(|v| v.abs() > MAX_COORDINATE) {
            return Err(GridError::AtomOutOfBounds { atom: a, x: p[0], y: p[1], z: p[2] });
        }
    }
    let atom_params = protein
        .type_index()
        .iter()
        .map(|&t| table.get(t).ok_or_else(|| GridError::UnknownProbe(format!("receptor type index {t}"))))
        .collect::<Result<Vec<_>, _>>()?;

    let mut probes = Vec::with_capacity(probe_types.len());
    for &label in probe_types {
        let probe = table.by_label(label).ok_or_else(|| GridError::UnknownProbe(label.to_string()))?;
        let pair = (0..table.len())
            .map(|t| {
                let c = combine(probe, &table[t]);
                (c.repulsive(), c.attractive(), c.hbond)
            })
            .collect();
        probes.push(ProbeTerms { pair, solpar: probe.solpar as f64, volume: probe.volume as f64 });
    }

    let n_probe = probes.len();
    let slab = spec.dims[0] * spec.dims[1];
    let cutoff2 = NONBOND_CUTOFF * NONBOND_CUTOFF;
    let (w_vdw, w_hb, w_desolv) = (weights.w_vdw as f64, weights.w_hbond as f64, weights.w_desolv as f64);
    let types = protein.type_index();
    let charges = protein.charge();

    // per z-slab: probe maps, then e, then d, each `slab` long
    let slabs: Vec<Vec<f32>> = (0..spec.dims[2])
        .into_par_iter()
        .map(|k| {
            let mut out = vec![0.0f32; slab * (n_probe + 2)];
            let mut acc = vec![0.0f64; n_probe];
            for j in 0..spec.dims[1] {
                for i in 0..spec.dims[0] {
                    let node = [
                        spec.origin[0] as f64 + i as f64 * spec.spacing as f64,
                        spec.origin[1] as f64 + j as f64 * spec.spacing as f64,
                        spec.origin[2] as f64 + k as f64 * spec.spacing as f64,
                    ];
                    acc.iter_mut().for_each(|a| *a = 0.0);
                    let mut elec = 0.0f64;
                    let mut desolv = 0.0f64;
                    for a in 0..coords.len() {
                        let dx = coords.x[a] as f64 - node[0];
                        let dy = coords.y[a] as f64 - node[1];
                        let dz = coords.z[a] as f64 - node[2];
                        let r2 = dx * dx + dy * dy + dz * dz;
                        let q = charges[a] as f64;
                        elec += energy::electrostatic_energy(r2.sqrt(), 1.0, q);
                        if r2 > cutoff2 {
                            continue;
                        }
                        let gauss = energy::desolvation_gaussian(r2);
                        let ap = atom_params[a];
                        let (vol, sol) = (ap.volume as f64, ap.solpar as f64);
                        desolv += vol * gauss;
                        for (acc_p, probe) in acc.iter_mut().zip(&probes) {
                            let (rep, att, hb) = probe.pair[types[a]];
                            let lj = if hb {
                                w_hb * energy::hbond_energy(r2, rep, att)
                            } else {
                                w_vdw * energy::vdw_energy(r2, rep, att)
                            };
                            let ds = probe.solpar * vol + probe.volume * (sol + QASP * q.abs());
                            *acc_p += lj + w_desolv * ds * gauss;
                        }
                    }
                    let idx = i + spec.dims[0] * j;
                    for (p, &a) in acc.iter().enumerate() {
                        out[p * slab + idx] = a as f32;
                    }
                    out[n_probe * slab + idx] = elec as f32;
                    out[(n_probe + 1) * slab + idx] = desolv as f32;
                }
            }
            out
        })
        .collect();

    let mut labels: Vec<String> = probe_types.iter().map(|s| s.to_string()).collect();
    labels.push(ELEC_LABEL.to_string());
    labels.push(DESOLV_LABEL.to_string());
    let maps = labels
        .into_iter()
        .enumerate()
        .map(|(m, label)| {
            let mut values = Vec::with_capacity(spec.n_nodes());
            for s in &slabs {
                values.extend_from_slice(&s[m * slab..(m + 1) * slab]);
            }
            GridMap { label, values }
        })
        .collect();
    GridMapSet::new(spec, maps)
}
