//! Pose scoring: inter-energy from grid lookups plus intra-energy over the
//! non-bonded pair list, evaluated by a run-time selectable compute backend.
//!
//! Backends share one mathematical contract and differ only in how the loops
//! are laid out:
//!
//! * `reference`: plain per-pair loop over an AoS view with branches on the
//!   pair kind; the no-vectorization baseline.
//! * `scalar`: SoA blocks with branch-free selects, shaped for compiler
//!   auto-vectorization.
//! * `simd`: explicit lane-parallel kernels on portable SIMD vectors with
//!   emulated gathers for grid corners.
//!
//! All kernel arithmetic is `f32`. Inter-energy agrees bitwise across
//! backends; intra-energy agrees to within exp rounding and summation order.

mod reference;
mod scalar;
pub mod simd;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::energy::{TermWeights, QASP};
use crate::error::{Error, GridError, Result};
use crate::grid::{GridMapSet, DESOLV_LABEL, ELEC_LABEL};
use crate::model::{build_nonbond_pairlist, Coords, LigandTopology, NonbondPairList, ParameterTable};
use crate::pose::apply_pose_into;

/// Per-atom penalty slope for atoms outside the grid box, kcal/(mol·Å).
pub const OUT_OF_BOX_PENALTY: f32 = 1.0e4;

/// Environment variable consulted when no backend is given explicitly.
pub const BACKEND_ENV: &str = "VECDOCK_BACKEND";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Reference,
    Scalar,
    Simd,
}

impl BackendKind {
    pub const ALL: [BackendKind; 3] = [BackendKind::Reference, BackendKind::Scalar, BackendKind::Simd];

    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Reference => "reference",
            BackendKind::Scalar => "scalar",
            BackendKind::Simd => "simd",
        }
    }

    /// Explicit choice wins; otherwise `VECDOCK_BACKEND`; otherwise `simd`.
    pub fn resolve(explicit: Option<BackendKind>) -> Result<BackendKind> {
        if let Some(k) = explicit {
            return Ok(k);
        }
        match std::env::var(BACKEND_ENV) {
            Ok(v) if !v.is_empty() => v.parse(),
            _ => Ok(BackendKind::Simd),
        }
    }

    pub fn backend(self) -> &'static dyn ComputeBackend {
        match self {
            BackendKind::Reference => &reference::ReferenceBackend,
            BackendKind::Scalar => &scalar::ScalarBackend,
            BackendKind::Simd => &simd::SimdBackend,
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reference" | "ref" => Ok(BackendKind::Reference),
            "scalar" => Ok(BackendKind::Scalar),
            "simd" => Ok(BackendKind::Simd),
            other => Err(Error::Config(format!("unknown backend {other:?} (expected reference, scalar or simd)"))),
        }
    }
}

/// Per-atom inputs to the inter-energy kernel, resolved against one grid set.
#[derive(Debug, Clone, PartialEq)]
pub struct InterTerms {
    /// Grid map slot of each atom's type.
    pub map_slot: Vec<u32>,
    pub elec_slot: usize,
    pub desolv_slot: usize,
    /// w_elec·q per atom.
    pub elec_factor: Vec<f32>,
    /// w_desolv·qasp·|q| per atom.
    pub desolv_factor: Vec<f32>,
}

impl InterTerms {
    pub fn bind(
        topology: &LigandTopology,
        table: &ParameterTable,
        grid: &GridMapSet,
        weights: &TermWeights,
    ) -> std::result::Result<Self, GridError> {
        let mut map_slot = Vec::with_capacity(topology.n_atoms());
        for &t in topology.type_index() {
            let label = table.get(t).map(|p| p.label.as_str()).unwrap_or("?");
            let slot = grid.slot(label).ok_or_else(|| GridError::MissingMap(label.to_string()))?;
            map_slot.push(slot as u32);
        }
        let elec_slot = grid.slot(ELEC_LABEL).ok_or_else(|| GridError::MissingMap(ELEC_LABEL.into()))?;
        let desolv_slot = grid.slot(DESOLV_LABEL).ok_or_else(|| GridError::MissingMap(DESOLV_LABEL.into()))?;
        let q = topology.charge();
        Ok(Self {
            map_slot,
            elec_slot,
            desolv_slot,
            elec_factor: q.iter().map(|&q| weights.w_elec * q).collect(),
            desolv_factor: q.iter().map(|&q| weights.w_desolv * (QASP as f32) * q.abs()).collect(),
        })
    }
}

/// The kernel contract every backend implements.
pub trait ComputeBackend: Send + Sync {
    fn kind(&self) -> BackendKind;

    /// Widest vector the backend issues explicitly (1 for scalar code).
    fn lane_width(&self) -> usize;

    fn inter_energy(&self, pose: &Coords, terms: &InterTerms, grid: &GridMapSet) -> f32;

    fn intra_energy(&self, pose: &Coords, pairs: &NonbondPairList, weights: &TermWeights) -> f32;
}

/// Energy components in kcal/mol.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub inter: f32,
    pub intra: f32,
    pub torsional: f32,
    pub total: f32,
}

impl ScoreBreakdown {
    pub fn new(inter: f32, intra: f32, torsional: f32) -> Self {
        Self { inter, intra, torsional, total: inter + intra + torsional }
    }
}

/// Everything needed to score many genotypes of one ligand: pair list, grid
/// binding, and a worker-owned pose buffer.
pub struct Scorer<'a> {
    topology: &'a LigandTopology,
    grid: &'a GridMapSet,
    weights: TermWeights,
    pairs: NonbondPairList,
    terms: InterTerms,
    backend: &'static dyn ComputeBackend,
    pose: Coords,
    evaluations: u64,
}

impl<'a> Scorer<'a> {
    pub fn new(
        topology: &'a LigandTopology,
        table: &ParameterTable,
        grid: &'a GridMapSet,
        weights: TermWeights,
        backend: BackendKind,
    ) -> Result<Self> {
        if !weights.is_valid() {
            return Err(Error::Config("term weights must be finite and non-negative".into()));
        }
        let pairs = build_nonbond_pairlist(topology, table)?;
        let terms = InterTerms::bind(topology, table, grid, &weights)?;
        Ok(Self {
            topology,
            grid,
            weights,
            pairs,
            terms,
            backend: backend.backend(),
            pose: Coords::zeros(topology.n_atoms()),
            evaluations: 0,
        })
    }

    pub fn topology(&self) -> &LigandTopology {
        self.topology
    }

    pub fn pairs(&self) -> &NonbondPairList {
        &self.pairs
    }

    pub fn backend(&self) -> BackendKind {
        self.backend.kind()
    }

    /// Number of `score` calls so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Coordinates of the most recently scored pose.
    pub fn last_pose(&self) -> &Coords {
        &self.pose
    }

    pub fn score(&mut self, genes: &[f32]) -> Result<ScoreBreakdown> {
        apply_pose_into(self.topology, genes, &mut self.pose)?;
        self.evaluations += 1;
        Ok(self.score_coords_unchecked())
    }

    fn score_coords_unchecked(&self) -> ScoreBreakdown {
        let inter = self.backend.inter_energy(&self.pose, &self.terms, self.grid);
        let intra = self.backend.intra_energy(&self.pose, &self.pairs, &self.weights);
        let torsional = self.weights.w_tors * self.topology.n_torsions() as f32;
        ScoreBreakdown::new(inter, intra, torsional)
    }
}

/// Inter-energy of explicit coordinates.
pub fn inter_energy(
    pose: &Coords,
    topology: &LigandTopology,
    table: &ParameterTable,
    grid: &GridMapSet,
    weights: &TermWeights,
    backend: BackendKind,
) -> Result<f32> {
    let terms = InterTerms::bind(topology, table, grid, weights)?;
    Ok(backend.backend().inter_energy(pose, &terms, grid))
}

pub fn intra_energy(pose: &Coords, pairs: &NonbondPairList, weights: &TermWeights, backend: BackendKind) -> f32 {
    backend.backend().intra_energy(pose, pairs, weights)
}

/// One-shot scoring of a genotype. Build a [`Scorer`] to score many.
pub fn score_pose(
    topology: &LigandTopology,
    table: &ParameterTable,
    genes: &[f32],
    grid: &GridMapSet,
    weights: &TermWeights,
    backend: BackendKind,
) -> Result<ScoreBreakdown> {
    Scorer::new(topology, table, grid, *weights, backend)?.score(genes)
}

/// Penalty for a point `d_out` Å outside the box.
#[inline(always)]
pub(crate) fn out_of_box_penalty(d_out: f32) -> f32 {
    OUT_OF_BOX_PENALTY * (d_out + 1.0)
}

/// Shared per-pair intra-energy formula in branch-free form. `w_lj` is
/// already selected between the van der Waals and hydrogen-bond weights.
#[inline(always)]
pub(crate) fn pair_energy(r2: f32, p: PairLanes, w_lj: f32, weights: &TermWeights) -> f32 {
    let r2 = r2.max(crate::energy::R2_CLAMP as f32);
    let inv2 = 1.0 / r2;
    let inv6 = inv2 * inv2 * inv2;
    let inv12 = inv6 * inv6;
    let inv10 = inv6 * inv2 * inv2;
    let lj = p.a12 * inv12 - p.b6 * inv6 - p.b10 * inv10;
    let r = r2.sqrt();
    let eps = consts::DIEL_A + consts::DIEL_B / (1.0 + consts::DIEL_K * (consts::NEG_LAMBDA_B * r).exp());
    let elec = consts::COULOMB * p.qq / (r * eps);
    let desolv = p.desolv * (r2 * consts::NEG_INV_2SIGMA2).exp();
    w_lj * lj + weights.w_elec * elec + weights.w_desolv * desolv
}

#[derive(Clone, Copy)]
pub(crate) struct PairLanes {
    pub a12: f32,
    pub b6: f32,
    pub b10: f32,
    pub qq: f32,
    pub desolv: f32,
}

/// `f32` forms of the energy constants used by the kernels.
pub(crate) mod consts {
    use crate::energy;

    pub const COULOMB: f32 = energy::COULOMB as f32;
    pub const DIEL_A: f32 = energy::DIEL_A as f32;
    pub const DIEL_B: f32 = energy::DIEL_B as f32;
    pub const DIEL_K: f32 = energy::DIEL_K as f32;
    pub const NEG_LAMBDA_B: f32 = (-energy::DIEL_LAMBDA * energy::DIEL_B) as f32;
    pub const NEG_INV_2SIGMA2: f32 = (-1.0 / (2.0 * energy::DESOLV_SIGMA * energy::DESOLV_SIGMA)) as f32;
    pub const R2_CLAMP: f32 = energy::R2_CLAMP as f32;
}
