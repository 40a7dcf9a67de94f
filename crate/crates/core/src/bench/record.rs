use std::io::Write;

use super::config_err;
use crate::error::{Error, Result};
use crate::scoring::BackendKind;

/// One (scenario, backend, threads) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub scenario: String,
    pub backend: BackendKind,
    pub threads: usize,
    pub mean_ms: f64,
    pub stddev_ms: f64,
    pub cv: f64,
    pub ligands_per_s: f64,
    pub modeled_flops: u64,
    pub modeled_bytes: u64,
    pub modeled_ai: f64,
    /// Empty when the reference backend did not run for these threads.
    pub speedup_vs_reference: Option<f64>,
    /// Every repetition in run order, warm-up runs included.
    pub samples: Vec<f64>,
    /// Lanes doing useful work over lanes issued, from pair and atom counts.
    pub modeled_lane_util: f64,
    pub status: String,
}

pub const BENCH_CSV_HEADER: [&str; 14] = [
    "scenario",
    "backend",
    "threads",
    "mean_ms",
    "stddev_ms",
    "cv",
    "ligands_per_s",
    "modeled_flops",
    "modeled_bytes",
    "modeled_ai",
    "speedup_vs_reference",
    "samples",
    "modeled_lane_util",
    "status",
];

pub(crate) fn sort_records(records: &mut [BenchRecord]) {
    records.sort_by(|a, b| {
        a.scenario.cmp(&b.scenario).then(a.backend.cmp(&b.backend)).then(a.threads.cmp(&b.threads))
    });
}

/// Header plus one row per record, sorted by (scenario, backend, threads).
/// Floats use Rust's shortest round-trip decimal form.
pub fn emit_csv<W: Write>(records: &[BenchRecord], sink: W) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::Writer::from_writer(sink);
    let err = |e: csv::Error| config_err(format!("writing bench CSV: {e}"));
    w.write_record(BENCH_CSV_HEADER).map_err(err)?;
    for r in &sorted {
        let samples: Vec<String> = r.samples.iter().map(f64::to_string).collect();
        w.write_record([
            r.scenario.clone(),
            r.backend.to_string(),
            r.threads.to_string(),
            r.mean_ms.to_string(),
            r.stddev_ms.to_string(),
            r.cv.to_string(),
            r.ligands_per_s.to_string(),
            r.modeled_flops.to_string(),
            r.modeled_bytes.to_string(),
            r.modeled_ai.to_string(),
            r.speedup_vs_reference.map(|s| s.to_string()).unwrap_or_default(),
            samples.join(";"),
            r.modeled_lane_util.to_string(),
            r.status.clone(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("writing bench CSV", e))
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| config_err(format!("bench CSV: {e}")))?.clone();
    if header.iter().ne(BENCH_CSV_HEADER) {
        return Err(config_err("bench CSV header does not match"));
    }
    let mut out = Vec::new();
    for (n, row) in rd.records().enumerate() {
        let row = row.map_err(|e| config_err(format!("bench CSV: {e}")))?;
        let line = n + 2;
        let field = |i: usize| row.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i).parse().map_err(|_| config_err(format!("bench CSV line {line}: bad {}", BENCH_CSV_HEADER[i])))
        };
        let int = |i: usize| -> Result<u64> {
            field(i).parse().map_err(|_| config_err(format!("bench CSV line {line}: bad {}", BENCH_CSV_HEADER[i])))
        };
        let samples = if field(11).is_empty() {
            Vec::new()
        } else {
            field(11)
                .split(';')
                .map(|s| s.parse().map_err(|_| config_err(format!("bench CSV line {line}: bad samples"))))
                .collect::<Result<_>>()?
        };
        out.push(BenchRecord {
            scenario: field(0).to_string(),
            backend: field(1).parse()?,
            threads: int(2)? as usize,
            mean_ms: num(3)?,
            stddev_ms: num(4)?,
            cv: num(5)?,
            ligands_per_s: num(6)?,
            modeled_flops: int(7)?,
            modeled_bytes: int(8)?,
            modeled_ai: num(9)?,
            speedup_vs_reference: if field(10).is_empty() { None } else { Some(num(10)?) },
            samples,
            modeled_lane_util: num(12)?,
            status: field(13).to_string(),
        });
    }
    Ok(out)
}
