//! Batch virtual screening: one docking run per ligand, scheduled on a
//! work-stealing pool over shared read-only grid maps.

pub mod pool;

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use pool::{run_jobs, PoolOptions, PoolStats};

use crate::energy::TermWeights;
use crate::error::{Error, Result};
use crate::ga::{dock, DockingResult, GaConfig};
use crate::grid::GridMapSet;
use crate::io::LigandBatch;
use crate::model::ParameterTable;
use crate::scoring::BackendKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenConfig {
    pub workers: usize,
    pub pin_workers: bool,
    pub pin_map: Option<Vec<usize>>,
    pub ga: GaConfig,
    pub backend: BackendKind,
    pub seed: u64,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        Self {
            workers: 1,
            pin_workers: false,
            pin_map: None,
            ga: GaConfig::default(),
            backend: BackendKind::Simd,
            seed: 0,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// GA seed of ligand `index` in a screen seeded with `global`.
pub fn ligand_seed(global: u64, index: usize) -> u64 {
    splitmix64(global ^ splitmix64(index as u64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LigandOutcome {
    pub name: String,
    pub seed: u64,
    pub result: std::result::Result<DockingResult, String>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct ScreenReport {
    /// In batch order.
    pub outcomes: Vec<LigandOutcome>,
    pub pool: PoolStats,
    pub wall_ms: f64,
}

pub fn screen_batch(
    batch: &LigandBatch,
    table: &ParameterTable,
    grid: &GridMapSet,
    weights: &TermWeights,
    config: &ScreenConfig,
) -> Result<ScreenReport> {
    if config.workers == 0 {
        return Err(Error::Config("worker count must be at least 1".into()));
    }
    config.ga.validate()?;
    let opts = PoolOptions { workers: config.workers, pin: config.pin_workers, pin_map: config.pin_map.clone() };
    let started = Instant::now();
    let (outcomes, pool) = run_jobs(batch.len(), &opts, |i| {
        let t0 = Instant::now();
        let seed = ligand_seed(config.seed, i);
        let ga = GaConfig { seed, ..config.ga.clone() };
        let result = dock(batch.ligand(i), table, grid, weights, &ga, config.backend).map_err(|e| e.to_string());
        if let Err(e) = &result {
            log::warn!("ligand {}: {e}", batch.name(i));
        }
        LigandOutcome { name: batch.name(i).to_string(), seed, result, wall_ms: t0.elapsed().as_secs_f64() * 1e3 }
    });
    Ok(ScreenReport { outcomes, pool, wall_ms: started.elapsed().as_secs_f64() * 1e3 })
}

pub const SCREEN_CSV_HEADER: [&str; 9] =
    ["name", "best_total", "inter", "intra", "torsional", "generations", "wall_ms", "seed", "status"];

/// One row per ligand in batch order. Failed ligands keep their row with
/// empty score fields and the error in `status`.
pub fn write_screen_csv<W: Write>(outcomes: &[LigandOutcome], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| Error::Config(format!("writing screen CSV: {e}"));
    w.write_record(SCREEN_CSV_HEADER).map_err(csv_err)?;
    for o in outcomes {
        let row: Vec<String> = match &o.result {
            Ok(r) => vec![
                o.name.clone(),
                r.breakdown.total.to_string(),
                r.breakdown.inter.to_string(),
                r.breakdown.intra.to_string(),
                r.breakdown.torsional.to_string(),
                r.generations().to_string(),
                format!("{:.3}", o.wall_ms),
                o.seed.to_string(),
                "ok".into(),
            ],
            Err(e) => vec![
                o.name.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!("{:.3}", o.wall_ms),
                o.seed.to_string(),
                format!("error: {e}"),
            ],
        };
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("writing screen CSV", e))?;
    Ok(())
}
