//! Analytic flop and byte model for roofline placement.
//!
//! Counts are per kernel iteration of the vectorizable backends. `exp`,
//! `sqrt`, division, comparisons and min/max each count as one flop. Torsion
//! rotations during pose construction are not modeled.

use std::collections::BTreeMap;

use super::config_err;
use crate::error::Result;
use crate::ga::GaConfig;
use crate::model::{build_nonbond_pairlist, LigandTopology, ParameterTable};

/// Flops of one intra-energy pair iteration, by term.
pub const PAIR_TERMS: &[(&str, u64)] = &[
    ("distance: 3 sub, 3 mul, 2 add", 8),
    ("r2 clamp", 1),
    ("inverse powers: div, 5 mul", 6),
    ("lennard-jones: 3 mul, 2 sub", 5),
    ("sqrt", 1),
    ("dielectric: 2 mul, exp, 2 add, div", 6),
    ("coulomb: 2 mul, div", 3),
    ("desolvation gaussian: 2 mul, exp", 3),
    ("term weighting: 3 mul, 2 add", 5),
    ("accumulate", 1),
];

/// Flops of one inter-energy atom iteration, by term.
pub const ATOM_TERMS: &[(&str, u64)] = &[
    ("rigid transform: 3 sub, 9 mul, 9 add", 21),
    ("box test: 6 compares", 6),
    ("cell and fraction: 3 x (sub, mul, floor, max, min, sub)", 18),
    ("lerp weights: 3 sub", 3),
    ("trilinear: 3 maps x 7 lerps x 3 flops", 63),
    ("charge terms: 2 mul, 2 add", 4),
    ("accumulate", 1),
];

/// Bytes read per pair iteration: two indices, two coordinate triples, six
/// parameter lanes.
pub const PAIR_BYTES: u64 = 2 * 4 + 2 * 12 + 6 * 4;

/// Bytes read per atom iteration: one coordinate triple, map slot and two
/// charge factors, eight corners of three maps.
pub const ATOM_BYTES: u64 = 12 + 3 * 4 + 8 * 3 * 4;

pub fn pair_flops() -> u64 {
    PAIR_TERMS.iter().map(|t| t.1).sum()
}

pub fn atom_flops() -> u64 {
    ATOM_TERMS.iter().map(|t| t.1).sum()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlopModel {
    pub flops: u64,
    pub bytes: u64,
}

impl FlopModel {
    /// Arithmetic intensity in flop/byte.
    pub fn intensity(&self) -> f64 {
        if self.bytes == 0 { 0.0 } else { self.flops as f64 / self.bytes as f64 }
    }
}

/// Modeled work of one docking run of `topology` under `ga`.
pub fn estimate_flops(topology: &LigandTopology, table: &ParameterTable, ga: &GaConfig) -> Result<FlopModel> {
    let pairs = build_nonbond_pairlist(topology, table)?.len() as u64;
    let atoms = topology.n_atoms() as u64;
    let evaluations = (ga.population_size * (ga.generations + 1)) as u64;
    Ok(FlopModel {
        flops: evaluations * (pair_flops() * pairs + atom_flops() * atoms),
        bytes: evaluations * (PAIR_BYTES * pairs + ATOM_BYTES * atoms),
    })
}

/// User-supplied roofline peaks: `peak_gflops` and one or more
/// `peak_gbs_<level>` bandwidths, as `key = value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineSpec {
    pub peak_gflops: f64,
    /// Bandwidth in GB/s by memory level.
    pub peak_gbs: BTreeMap<String, f64>,
}

impl MachineSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut gflops = None;
        let mut gbs = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| config_err(format!("machine spec line {}: expected key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let value: f64 = v
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite() && *x > 0.0)
                .ok_or_else(|| config_err(format!("machine spec line {}: {k} needs a positive number, got {v:?}", n + 1)))?;
            if k == "peak_gflops" {
                gflops = Some(value);
            } else if let Some(level) = k.strip_prefix("peak_gbs") {
                let level = level.trim_start_matches('_');
                gbs.insert(if level.is_empty() { "mem".to_string() } else { level.to_string() }, value);
            } else {
                return Err(config_err(format!("machine spec line {}: unknown key {k:?}", n + 1)));
            }
        }
        let peak_gflops = gflops.ok_or_else(|| config_err("machine spec is missing peak_gflops"))?;
        if gbs.is_empty() {
            return Err(config_err("machine spec needs at least one peak_gbs entry"));
        }
        Ok(Self { peak_gflops, peak_gbs: gbs })
    }

    /// Arithmetic intensity where the bandwidth roof meets the compute roof.
    pub fn ridge_point(&self, level: &str) -> Option<f64> {
        self.peak_gbs.get(level).map(|bw| self.peak_gflops / bw)
    }

    /// Roofline bound in GFLOP/s at intensity `ai`.
    pub fn attainable_gflops(&self, ai: f64, level: &str) -> Option<f64> {
        self.peak_gbs.get(level).map(|bw| self.peak_gflops.min(ai * bw))
    }
}
