//! Benchmark harness: repetition protocol with discarded warm-up runs,
//! kernel-scoped timing, backend speedups, modeled flop and byte counts for
//! roofline placement, and CSV output.

mod model;
mod record;
mod scenario;

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

pub use model::{estimate_flops, FlopModel, MachineSpec, ATOM_TERMS, PAIR_TERMS};
pub use record::{emit_csv, parse_csv, BenchRecord, BENCH_CSV_HEADER};
pub use scenario::{BenchScenario, GridSettings, LigandSource, ReceptorSource};

use crate::energy::TermWeights;
use crate::error::{Error, Result};
use crate::grid::{build_grid_maps, GridMapSet, GridSpec};
use crate::io::{
    generate_synthetic_protein, load_ligand_batch, make_replicated_batch, make_synthetic_batch, parse_protein_pdbqt,
    read_text, LigandBatch, PdbqtOptions,
};
use crate::model::{build_nonbond_pairlist, ParameterTable, Protein};
use crate::scoring::simd::LANES;
use crate::scoring::BackendKind;
use crate::screen::{screen_batch, ScreenConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    LoadInputs,
    BuildGrid,
    Kernel,
}

#[derive(Debug, Clone, Copy)]
pub struct Phase {
    pub kind: PhaseKind,
    pub start: Instant,
    pub end: Instant,
}

impl Phase {
    pub fn millis(&self) -> f64 {
        (self.end - self.start).as_secs_f64() * 1e3
    }
}

/// Timestamped phase markers. Only `Kernel` phases are timed samples.
#[derive(Debug, Clone, Default)]
pub struct PhaseLog {
    pub phases: Vec<Phase>,
}

impl PhaseLog {
    fn scope<T>(&mut self, kind: PhaseKind, f: impl FnOnce() -> T) -> (T, f64) {
        let start = Instant::now();
        let out = f();
        let end = Instant::now();
        let phase = Phase { kind, start, end };
        self.phases.push(phase);
        (out, phase.millis())
    }
}

#[derive(Debug, Clone)]
pub struct BenchRun {
    pub records: Vec<BenchRecord>,
    pub phases: PhaseLog,
}

/// Mean and sample standard deviation.
pub fn mean_stddev(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (0.0, 0.0);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// The samples kept for statistics: everything after the discarded warm-up runs.
pub fn kept_samples(samples: &[f64], warmup_discard: usize) -> &[f64] {
    &samples[warmup_discard.min(samples.len())..]
}

fn resolve(base: &Path, p: &Path) -> std::path::PathBuf {
    if p.is_absolute() { p.to_path_buf() } else { base.join(p) }
}

fn load_batch(s: &BenchScenario, table: &ParameterTable, base: &Path) -> Result<LigandBatch> {
    match &s.ligands {
        LigandSource::Synthetic { count, atoms, torsions, seed } => {
            make_synthetic_batch(*seed, *count, *atoms, *torsions, table)
        }
        LigandSource::File { path } => load_ligand_batch(&resolve(base, path), table, PdbqtOptions::default()),
        LigandSource::Replicated { count, path, atoms, torsions, seed } => {
            let lig = match path {
                Some(p) => load_ligand_batch(&resolve(base, p), table, PdbqtOptions::default())?.entries()[0].1.clone(),
                None => Arc::new(crate::io::generate_synthetic_ligand(*seed, *atoms, *torsions, table)?),
            };
            make_replicated_batch("ligand", lig, *count)
        }
    }
}

fn load_receptor(s: &BenchScenario, table: &ParameterTable, base: &Path) -> Result<Protein> {
    match &s.receptor {
        ReceptorSource::Synthetic { atoms, radius, pocket_radius, seed } => {
            generate_synthetic_protein(*seed, *atoms, s.grid.center, *radius, *pocket_radius, table)
        }
        ReceptorSource::File { path } => {
            let path = resolve(base, path);
            Ok(parse_protein_pdbqt(&read_text(&path)?, table, PdbqtOptions::default())?)
        }
    }
}

fn build_grid(s: &BenchScenario, table: &ParameterTable, protein: &Protein) -> Result<GridMapSet> {
    let spec = GridSpec::centered(s.grid.center, s.grid.spacing, s.grid.points)?;
    let labels: Vec<&str> = table.iter().map(|p| p.label.as_str()).collect();
    Ok(build_grid_maps(protein, table, spec, &labels, &TermWeights::default())?)
}

/// Run every (backend, threads) combination of `scenario`. Relative paths in
/// the scenario resolve against `base_dir`.
pub fn run_benchmark(scenario: &BenchScenario, base_dir: &Path) -> Result<BenchRun> {
    scenario.validate()?;
    let table = ParameterTable::default_table();
    let weights = TermWeights::default();
    let mut log = PhaseLog::default();
    let (inputs, _) = log.scope(PhaseKind::LoadInputs, || -> Result<_> {
        Ok((load_batch(scenario, &table, base_dir)?, load_receptor(scenario, &table, base_dir)?))
    });
    let (batch, protein) = inputs?;
    let (grid, _) = log.scope(PhaseKind::BuildGrid, || build_grid(scenario, &table, &protein));
    let grid = grid?;

    let mut model = FlopModel::default();
    let (mut used, mut issued) = (0usize, 0usize);
    for (_, lig) in batch.entries() {
        let m = estimate_flops(lig, &table, &scenario.ga)?;
        model.flops += m.flops;
        model.bytes += m.bytes;
        for n in [build_nonbond_pairlist(lig, &table)?.len(), lig.n_atoms()] {
            used += n;
            issued += n.div_ceil(LANES) * LANES;
        }
    }
    let simd_util = if issued > 0 { used as f64 / issued as f64 } else { 0.0 };

    let mut records = Vec::new();
    for &threads in &scenario.threads {
        let mut reference_mean = None;
        let row_start = records.len();
        for &backend in &scenario.backends {
            let config = ScreenConfig {
                workers: threads,
                pin_workers: scenario.pin,
                pin_map: None,
                ga: scenario.ga.clone(),
                backend,
                seed: scenario.seed,
            };
            let mut samples = Vec::with_capacity(scenario.repetitions);
            let mut status = String::from("ok");
            for _ in 0..scenario.repetitions {
                let (report, ms) = log.scope(PhaseKind::Kernel, || screen_batch(&batch, &table, &grid, &weights, &config));
                match report {
                    Ok(r) => match r.outcomes.iter().find_map(|o| o.result.as_ref().err()) {
                        Some(e) => {
                            status = format!("skipped: {e}");
                            break;
                        }
                        None => samples.push(ms),
                    },
                    Err(e) => {
                        status = format!("skipped: {e}");
                        break;
                    }
                }
            }
            if status != "ok" {
                log::warn!("{}: backend {backend} with {threads} threads {status}", scenario.name);
                samples.clear();
            }
            let kept = kept_samples(&samples, scenario.warmup_discard);
            let (mean_ms, stddev_ms) = mean_stddev(kept);
            if backend == BackendKind::Reference && status == "ok" {
                reference_mean = Some(mean_ms);
            }
            let lane_util = if backend == BackendKind::Simd { simd_util } else { 1.0 };
            records.push(BenchRecord {
                scenario: scenario.name.clone(),
                backend,
                threads,
                mean_ms,
                stddev_ms,
                cv: if mean_ms > 0.0 { stddev_ms / mean_ms } else { 0.0 },
                ligands_per_s: if mean_ms > 0.0 { batch.len() as f64 / (mean_ms / 1e3) } else { 0.0 },
                modeled_flops: model.flops,
                modeled_bytes: model.bytes,
                modeled_ai: model.intensity(),
                speedup_vs_reference: None,
                samples,
                modeled_lane_util: lane_util,
                status,
            });
        }
        if let Some(reference) = reference_mean {
            for r in &mut records[row_start..] {
                if r.status == "ok" {
                    r.speedup_vs_reference =
                        Some(if r.backend == BackendKind::Reference { 1.0 } else { reference / r.mean_ms });
                }
            }
        }
    }
    record::sort_records(&mut records);
    Ok(BenchRun { records, phases: log })
}

/// Parse a scenario file and run it relative to the file's directory.
pub fn run_scenario_file(path: &Path) -> Result<BenchRun> {
    let scenario = BenchScenario::from_toml(&read_text(path)?)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    run_benchmark(&scenario, base)
}

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
