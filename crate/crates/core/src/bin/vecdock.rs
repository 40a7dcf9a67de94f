use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vecdock::bench::{emit_csv, run_scenario_file, MachineSpec};
use vecdock::energy::TermWeights;
use vecdock::ga::{dock, GaConfig};
use vecdock::grid::{build_grid_maps, read_grid_set, write_grid_set, GridMapSet, GridSpec, DEFAULT_SPACING};
use vecdock::io::{
    generate_synthetic_ligand, generate_synthetic_protein, load_ligand_batch, load_parameter_table, make_synthetic_batch,
    parse_ligand_pdbqt, parse_protein_pdbqt, read_text, write_ligand_pdbqt, write_protein_pdbqt, PdbqtOptions,
};
use vecdock::pose::apply_pose;
use vecdock::screen::{screen_batch, write_screen_csv, ScreenConfig};
use vecdock::{BackendKind, Coords, LigandTopology};

#[derive(Parser)]
#[command(name = "vecdock", version, about = "Grid-map molecular docking with selectable SIMD backends")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Precompute affinity, electrostatic and desolvation maps for a receptor.
    Grid(GridArgs),
    /// Dock one ligand against precomputed maps.
    Dock(DockArgs),
    /// Dock a batch of ligands on a work-stealing pool.
    Screen(ScreenArgs),
    /// Run a benchmark scenario and write the result table.
    Bench(BenchArgs),
    /// Write a synthetic ligand or receptor as PDBQT.
    Synth(SynthArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Atom parameter table; the built-in table is used when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Read PDBQT coordinates, charge and type from fixed columns.
    #[arg(long)]
    strict_columns: bool,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    receptor: PathBuf,
    /// Box center as x,y,z in Å.
    #[arg(long, value_parser = parse_f32x3)]
    center: [f32; 3],
    /// Grid points per axis as nx,ny,nz.
    #[arg(long, value_parser = parse_usizex3)]
    size: [usize; 3],
    #[arg(long, default_value_t = DEFAULT_SPACING)]
    spacing: f32,
    /// Probe types, comma separated; every table type when omitted.
    #[arg(long, value_delimiter = ',')]
    types: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GaArgs {
    #[arg(long, default_value_t = 1000)]
    generations: usize,
    #[arg(long, default_value_t = 100)]
    population: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// reference, scalar or simd. Falls back to VECDOCK_BACKEND, then simd.
    #[arg(long)]
    backend: Option<BackendKind>,
}

impl GaArgs {
    fn config(&self, seed: u64) -> GaConfig {
        GaConfig { population_size: self.population, generations: self.generations, seed, ..GaConfig::default() }
    }
}

#[derive(Args)]
struct DockArgs {
    #[arg(long)]
    ligand: PathBuf,
    #[arg(long)]
    maps: PathBuf,
    #[command(flatten)]
    ga: GaArgs,
    /// Result JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the best pose as PDBQT.
    #[arg(long)]
    pose_out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ScreenArgs {
    /// A PDBQT file or a directory of them.
    #[arg(long)]
    ligands: PathBuf,
    #[arg(long)]
    maps: PathBuf,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Pin workers to CPUs (best effort).
    #[arg(long)]
    pin: bool,
    /// CPU ids for pinned workers, comma separated; implies --pin.
    #[arg(long, value_delimiter = ',')]
    pin_map: Vec<usize>,
    #[command(flatten)]
    ga: GaArgs,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// key=value roofline peaks; prints ridge points and attainable rates.
    #[arg(long)]
    machine: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(subcommand)]
    what: SynthKind,
}

#[derive(Subcommand)]
enum SynthKind {
    Ligand {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        atoms: usize,
        #[arg(long, default_value_t = 4)]
        torsions: usize,
        /// Number of ligands; more than one writes `<out>/synthetic_<i>.pdbqt`.
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    Receptor {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 800)]
        atoms: usize,
        #[arg(long, value_parser = parse_f32x3, default_value = "0,0,0")]
        center: [f32; 3],
        #[arg(long, default_value_t = 16.0)]
        radius: f32,
        #[arg(long, default_value_t = 8.0)]
        pocket_radius: f32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_triple<T: std::str::FromStr>(s: &str) -> std::result::Result<[T; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got {s:?}"));
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| format!("invalid number {p:?}"))?);
    }
    out.try_into().map_err(|_| unreachable!())
}

fn parse_f32x3(s: &str) -> std::result::Result<[f32; 3], String> {
    parse_triple(s)
}

fn parse_usizex3(s: &str) -> std::result::Result<[usize; 3], String> {
    parse_triple(s)
}

fn pdbqt_opts(c: &CommonArgs) -> PdbqtOptions {
    PdbqtOptions { strict_columns: c.strict_columns }
}

fn load_maps(path: &Path) -> Result<GridMapSet> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_grid_set(BufReader::new(f)).with_context(|| format!("reading maps from {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn run_grid(a: GridArgs) -> Result<()> {
    let table = load_parameter_table(a.common.params.as_deref())?;
    let protein = parse_protein_pdbqt(&read_text(&a.receptor)?, &table, pdbqt_opts(&a.common))
        .with_context(|| format!("parsing {}", a.receptor.display()))?;
    let spec = GridSpec::centered(a.center, a.spacing, a.size)?;
    let labels: Vec<String> =
        if a.types.is_empty() { table.iter().map(|p| p.label.clone()).collect() } else { a.types.clone() };
    let probes: Vec<&str> = labels.iter().map(String::as_str).collect();
    let set = build_grid_maps(&protein, &table, spec, &probes, &TermWeights::default())?;
    let mut w = create(&a.out)?;
    write_grid_set(&set, &mut w)?;
    w.flush()?;
    log::info!("wrote {} maps of {} nodes to {}", set.maps().len(), spec.n_nodes(), a.out.display());
    Ok(())
}

fn run_dock(a: DockArgs) -> Result<()> {
    let table = load_parameter_table(a.common.params.as_deref())?;
    let parsed = parse_ligand_pdbqt(&read_text(&a.ligand)?, &table, pdbqt_opts(&a.common))
        .with_context(|| format!("parsing {}", a.ligand.display()))?;
    for w in &parsed.warnings {
        log::warn!("{}: {w}", a.ligand.display());
    }
    let grid = load_maps(&a.maps)?;
    let backend = BackendKind::resolve(a.ga.backend)?;
    let result = dock(&parsed.topology, &table, &grid, &TermWeights::default(), &a.ga.config(a.ga.seed), backend)?;
    let json = serde_json::to_string_pretty(&result)?;
    match &a.out {
        Some(p) => std::fs::write(p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => match writeln!(std::io::stdout().lock(), "{json}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
            _ => {}
        },
    }
    if let Some(p) = &a.pose_out {
        let names: Vec<String> = parsed.atoms.iter().map(|at| at.name.clone()).collect();
        let posed = posed_topology(&parsed.topology, &result.genotype)?;
        std::fs::write(p, write_ligand_pdbqt(&posed, &table, Some(&names)))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn posed_topology(lig: &LigandTopology, genes: &[f32]) -> Result<LigandTopology> {
    let coords: Coords = apply_pose(lig, genes)?;
    let mut draft = lig.to_draft();
    draft.coords = coords;
    Ok(LigandTopology::new(draft)?)
}

fn run_screen(a: ScreenArgs) -> Result<()> {
    let table = load_parameter_table(a.common.params.as_deref())?;
    let batch = load_ligand_batch(&a.ligands, &table, pdbqt_opts(&a.common))?;
    let grid = load_maps(&a.maps)?;
    let config = ScreenConfig {
        workers: a.threads,
        pin_workers: a.pin || !a.pin_map.is_empty(),
        pin_map: (!a.pin_map.is_empty()).then(|| a.pin_map.clone()),
        ga: a.ga.config(0),
        backend: BackendKind::resolve(a.ga.backend)?,
        seed: a.ga.seed,
    };
    let report = screen_batch(&batch, &table, &grid, &TermWeights::default(), &config)?;
    let mut w = create(&a.out)?;
    write_screen_csv(&report.outcomes, &mut w)?;
    w.flush()?;
    let failed = report.outcomes.iter().filter(|o| o.result.is_err()).count();
    log::info!(
        "screened {} ligands in {:.1} ms on {} workers ({} failed, {} steals)",
        batch.len(),
        report.wall_ms,
        config.workers,
        failed,
        report.pool.steals
    );
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let run = run_scenario_file(&a.scenario)?;
    let mut w = create(&a.out)?;
    emit_csv(&run.records, &mut w)?;
    w.flush()?;
    for r in &run.records {
        let speedup = r.speedup_vs_reference.map_or("-".to_string(), |s| format!("{s:.2}x"));
        eprintln!(
            "{:<12} {:<9} threads={:<3} mean={:>10.3} ms  cv={:.4}  speedup={speedup}  {}",
            r.scenario, r.backend, r.threads, r.mean_ms, r.cv, r.status
        );
    }
    if let Some(m) = &a.machine {
        let spec = MachineSpec::parse(&read_text(m)?)?;
        for (level, bw) in &spec.peak_gbs {
            eprintln!("ridge {level}: {:.3} flop/byte ({bw} GB/s)", spec.peak_gflops / bw);
        }
        for r in &run.records {
            let achieved = r.modeled_flops as f64 / (r.mean_ms * 1e6);
            for level in spec.peak_gbs.keys() {
                let roof = spec.attainable_gflops(r.modeled_ai, level).unwrap_or(0.0);
                eprintln!(
                    "{} {} threads={}: {achieved:.3} GFLOP/s modeled, roof({level}) {roof:.3} at AI {:.3}",
                    r.scenario, r.backend, r.threads, r.modeled_ai
                );
            }
        }
    }
    Ok(())
}

fn run_synth(a: SynthArgs) -> Result<()> {
    let table = load_parameter_table(None)?;
    match a.what {
        SynthKind::Ligand { seed, atoms, torsions, count, out } => {
            if count == 0 {
                bail!("--count must be at least 1");
            }
            if count == 1 {
                let lig = generate_synthetic_ligand(seed, atoms, torsions, &table)?;
                std::fs::write(&out, write_ligand_pdbqt(&lig, &table, None))?;
            } else {
                std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
                let batch = make_synthetic_batch(seed, count, atoms, torsions, &table)?;
                for (name, lig) in batch.entries() {
                    let lig: &Arc<LigandTopology> = lig;
                    std::fs::write(out.join(format!("{name}.pdbqt")), write_ligand_pdbqt(lig, &table, None))?;
                }
            }
        }
        SynthKind::Receptor { seed, atoms, center, radius, pocket_radius, out } => {
            let p = generate_synthetic_protein(seed, atoms, center, radius, pocket_radius, &table)?;
            std::fs::write(&out, write_protein_pdbqt(&p, &table))?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Grid(a) => run_grid(a),
        Command::Dock(a) => run_dock(a),
        Command::Screen(a) => run_screen(a),
        Command::Bench(a) => run_bench(a),
        Command::Synth(a) => run_synth(a),
    }
}
