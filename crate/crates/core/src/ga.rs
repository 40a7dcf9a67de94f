//! Genetic-algorithm docking driver.
//!
//! Each generation scores every individual, copies the elite unchanged, and
//! fills the rest by tournament selection, two-point crossover and per-gene
//! Gaussian mutation. There is no local search. All randomness comes from a
//! single ChaCha8 stream seeded from [`GaConfig::seed`], so a run is a pure
//! function of its inputs.

use std::f32::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::energy::TermWeights;
use crate::error::{Error, Result};
use crate::grid::{GridMapSet, GridSpec};
use crate::model::{LigandTopology, ParameterTable};
use crate::pose::{normalize_rotation, RIGID_GENES, ROTATION_GENES, TRANSLATION_GENES};
use crate::scoring::{BackendKind, ScoreBreakdown, Scorer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Å.
    pub sigma_translation: f32,
    /// Added to each quaternion component before renormalizing.
    pub sigma_rotation: f32,
    /// Radians.
    pub sigma_torsion: f32,
    pub elitism_count: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 1000,
            tournament_size: 2,
            crossover_rate: 0.8,
            mutation_rate: 0.02,
            sigma_translation: 0.5,
            sigma_rotation: 0.1,
            sigma_torsion: 0.2,
            elitism_count: 1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.population_size < 2 {
            return fail(format!("population_size must be at least 2, got {}", self.population_size));
        }
        if self.elitism_count >= self.population_size {
            return fail(format!(
                "elitism_count ({}) must be smaller than population_size ({})",
                self.elitism_count, self.population_size
            ));
        }
        if self.tournament_size == 0 {
            return fail("tournament_size must be at least 1".into());
        }
        for (name, r) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return fail(format!("{name} must lie in [0, 1], got {r}"));
            }
        }
        for (name, s) in [
            ("sigma_translation", self.sigma_translation),
            ("sigma_rotation", self.sigma_rotation),
            ("sigma_torsion", self.sigma_torsion),
        ] {
            if !(s.is_finite() && s >= 0.0) {
                return fail(format!("{name} must be finite and non-negative, got {s}"));
            }
        }
        Ok(())
    }
}

/// Operator counters for one generation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerationStats {
    pub offspring: u64,
    pub crossovers: u64,
    pub mutation_trials: u64,
    pub mutations: u64,
}

impl std::ops::AddAssign for GenerationStats {
    fn add_assign(&mut self, o: Self) {
        self.offspring += o.offspring;
        self.crossovers += o.crossovers;
        self.mutation_trials += o.mutation_trials;
        self.mutations += o.mutations;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DockingResult {
    pub genotype: Vec<f32>,
    pub breakdown: ScoreBreakdown,
    /// Best total of the initial population followed by one entry per generation.
    pub trace: Vec<f32>,
    pub evaluations: u64,
}

impl DockingResult {
    pub fn generations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }
}

fn wrap_angle(a: f32) -> f32 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI { -PI } else { w }
}

/// Random initial population inside `box_spec`.
pub fn init_population<R: Rng>(
    config: &GaConfig,
    topology: &LigandTopology,
    box_spec: &GridSpec,
    rng: &mut R,
) -> Result<Vec<Vec<f32>>> {
    let lo = box_spec.origin;
    let hi = box_spec.max_corner();
    if (0..3).any(|k| !(hi[k] > lo[k])) {
        return Err(Error::Config("grid box has zero volume".into()));
    }
    let n_genes = topology.n_genes();
    let mut pop = Vec::with_capacity(config.population_size);
    for _ in 0..config.population_size {
        let mut g = Vec::with_capacity(n_genes);
        for k in 0..3 {
            g.push(rng.random_range(lo[k]..=hi[k]));
        }
        loop {
            let q: [f32; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
            let n2: f32 = q.iter().map(|v| v * v).sum();
            if n2 > 1e-12 {
                g.extend_from_slice(&q);
                break;
            }
        }
        normalize_rotation(&mut g).expect("nonzero quaternion");
        for _ in 0..topology.n_torsions() {
            g.push(rng.random_range(-PI..PI));
        }
        pop.push(g);
    }
    Ok(pop)
}

/// Indices of `fitness` sorted best first, ties broken by index.
fn ranking(fitness: &[f32]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
    order
}

fn tournament<R: Rng>(fitness: &[f32], k: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..k {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] < fitness[best] {
            best = c;
        }
    }
    best
}

/// Breed the next population from `population` and its `fitness` (lower is
/// better). The first `elitism_count` entries of the result are the elite.
pub fn next_generation<R: Rng>(
    population: &[Vec<f32>],
    fitness: &[f32],
    rng: &mut R,
    config: &GaConfig,
) -> (Vec<Vec<f32>>, GenerationStats) {
    assert_eq!(population.len(), fitness.len(), "fitness length must match population");
    let n = population.len();
    let mut stats = GenerationStats::default();
    let mut next: Vec<Vec<f32>> = ranking(fitness)
        .into_iter()
        .take(config.elitism_count.min(n))
        .map(|i| population[i].clone())
        .collect();

    let n_genes = population.first().map_or(0, Vec::len);
    let t_noise = Normal::new(0.0, config.sigma_translation).unwrap();
    let r_noise = Normal::new(0.0, config.sigma_rotation).unwrap();
    let a_noise = Normal::new(0.0, config.sigma_torsion).unwrap();
    while next.len() < n {
        let p1 = tournament(fitness, config.tournament_size, rng);
        let p2 = tournament(fitness, config.tournament_size, rng);
        let mut child = population[p1].clone();
        if rng.random_bool(config.crossover_rate) {
            stats.crossovers += 1;
            let mut a = rng.random_range(0..=n_genes);
            let mut b = rng.random_range(0..=n_genes);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            child[a..b].copy_from_slice(&population[p2][a..b]);
        }
        let mut rotated = false;
        for (g, v) in child.iter_mut().enumerate() {
            stats.mutation_trials += 1;
            if !rng.random_bool(config.mutation_rate) {
                continue;
            }
            stats.mutations += 1;
            if g < TRANSLATION_GENES {
                *v += t_noise.sample(rng);
            } else if g < RIGID_GENES {
                *v += r_noise.sample(rng);
                rotated = true;
            } else {
                *v = wrap_angle(*v + a_noise.sample(rng));
            }
        }
        if (rotated || crossed_rotation(&child)) && normalize_rotation(&mut child).is_err() {
            child[TRANSLATION_GENES..RIGID_GENES].copy_from_slice(&[1.0, 0.0, 0.0, 0.0]);
        }
        stats.offspring += 1;
        next.push(child);
    }
    (next, stats)
}

/// A crossover cut inside the rotation block leaves a non-unit quaternion.
fn crossed_rotation(genes: &[f32]) -> bool {
    let q = &genes[TRANSLATION_GENES..TRANSLATION_GENES + ROTATION_GENES];
    let n2: f32 = q.iter().map(|v| v * v).sum();
    (n2 - 1.0).abs() > 1e-6
}

/// Run one docking search. Fitness is the total score.
pub fn dock(
    topology: &LigandTopology,
    table: &ParameterTable,
    grid: &GridMapSet,
    weights: &TermWeights,
    config: &GaConfig,
    backend: BackendKind,
) -> Result<DockingResult> {
    let mut scorer = Scorer::new(topology, table, grid, *weights, backend)?;
    dock_with(&mut scorer, grid.spec(), config).map(|(r, _)| r)
}

/// [`dock`] on a prepared scorer, also returning summed operator counters.
pub fn dock_with(
    scorer: &mut Scorer<'_>,
    box_spec: &GridSpec,
    config: &GaConfig,
) -> Result<(DockingResult, GenerationStats)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start_evals = scorer.evaluations();
    let mut population = init_population(config, scorer.topology(), box_spec, &mut rng)?;
    let mut scores = score_all(scorer, &population)?;
    let mut trace = Vec::with_capacity(config.generations + 1);
    let (mut best_i, mut best) = best_of(&scores);
    let mut best_genes = population[best_i].clone();
    trace.push(best.total);
    let mut totals = GenerationStats::default();
    for _ in 0..config.generations {
        let fitness: Vec<f32> = scores.iter().map(|s| s.total).collect();
        let (next, stats) = next_generation(&population, &fitness, &mut rng, config);
        totals += stats;
        population = next;
        scores = score_all(scorer, &population)?;
        let (i, gen_best) = best_of(&scores);
        if gen_best.total < best.total {
            best = gen_best;
            best_i = i;
            best_genes = population[best_i].clone();
        }
        trace.push(gen_best.total);
    }
    let result = DockingResult {
        genotype: best_genes,
        breakdown: best,
        trace,
        evaluations: scorer.evaluations() - start_evals,
    };
    Ok((result, totals))
}

fn score_all(scorer: &mut Scorer<'_>, population: &[Vec<f32>]) -> Result<Vec<ScoreBreakdown>> {
    population.iter().map(|g| scorer.score(g)).collect()
}

fn best_of(scores: &[ScoreBreakdown]) -> (usize, ScoreBreakdown) {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.total < scores[best].total {
            best = i;
        }
    }
    (best, scores[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;
    use crate::io::generate_synthetic_ligand;
    use crate::model::{Coords, LigandDraft};

    fn table() -> ParameterTable {
        ParameterTable::default_table()
    }

    fn constant_grid(table: &ParameterTable, spec: GridSpec, f: impl Fn([usize; 3]) -> f32) -> GridMapSet {
        let mut node_values = vec![0.0f32; spec.n_nodes()];
        for k in 0..spec.dims[2] {
            for j in 0..spec.dims[1] {
                for i in 0..spec.dims[0] {
                    node_values[spec.index(i, j, k)] = f([i, j, k]);
                }
            }
        }
        let mut maps: Vec<GridMap> =
            table.iter().map(|p| GridMap { label: p.label.clone(), values: node_values.clone() }).collect();
        maps.push(GridMap { label: "e".into(), values: vec![0.0; spec.n_nodes()] });
        maps.push(GridMap { label: "d".into(), values: vec![0.0; spec.n_nodes()] });
        GridMapSet::new(spec, maps).unwrap()
    }

    fn small_config(seed: u64) -> GaConfig {
        GaConfig { population_size: 30, generations: 40, seed, ..GaConfig::default() }
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        let bad = [
            GaConfig { population_size: 1, ..GaConfig::default() },
            GaConfig { elitism_count: 100, ..GaConfig::default() },
            GaConfig { mutation_rate: 1.5, ..GaConfig::default() },
            GaConfig { tournament_size: 0, ..GaConfig::default() },
            GaConfig { sigma_torsion: f32::NAN, ..GaConfig::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn init_population_postconditions() {
        let table = table();
        let lig = generate_synthetic_ligand(3, 12, 3, &table).unwrap();
        let spec = GridSpec::centered([1.0, 2.0, 3.0], 0.375, [20, 30, 40]).unwrap();
        let cfg = GaConfig::default();
        let a = init_population(&cfg, &lig, &spec, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = init_population(&cfg, &lig, &spec, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        let hi = spec.max_corner();
        for g in &a {
            assert_eq!(g.len(), lig.n_genes());
            assert!((0..3).all(|k| g[k] >= spec.origin[k] && g[k] <= hi[k]));
            let n: f32 = g[3..7].iter().map(|v| v * v).sum::<f32>().sqrt();
            assert!((n - 1.0).abs() <= 1e-6);
            assert!(g[7..].iter().all(|t| (-PI..PI).contains(t)));
        }
    }

    #[test]
    fn degenerate_operators_resample_parents() {
        let cfg = GaConfig {
            population_size: 6,
            tournament_size: 1,
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            elitism_count: 1,
            ..GaConfig::default()
        };
        let pop: Vec<Vec<f32>> = (0..6).map(|i| vec![i as f32, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).collect();
        let fitness = [3.0, 1.0, 4.0, -2.0, 5.0, 9.0];
        let (next, stats) = next_generation(&pop, &fitness, &mut ChaCha8Rng::seed_from_u64(1), &cfg);
        assert_eq!(next[0], pop[3]);
        assert!(next.iter().all(|g| pop.contains(g)));
        assert_eq!(stats.crossovers + stats.mutations, 0);
        assert_eq!(stats.offspring, 5);
    }

    #[test]
    fn operator_counts_within_binomial_bounds() {
        let cfg = GaConfig { population_size: 20, ..GaConfig::default() };
        let pop: Vec<Vec<f32>> = (0..20).map(|i| vec![i as f32, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.1]).collect();
        let fitness: Vec<f32> = (0..20).map(|i| i as f32).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut total = GenerationStats::default();
        for _ in 0..10_000 {
            total += next_generation(&pop, &fitness, &mut rng, &cfg).1;
        }
        let check = |hits: u64, trials: u64, p: f64| {
            let mean = trials as f64 * p;
            let sd = (trials as f64 * p * (1.0 - p)).sqrt();
            assert!((hits as f64 - mean).abs() <= 3.0 * sd, "{hits} of {trials} at p={p}");
        };
        check(total.crossovers, total.offspring, cfg.crossover_rate);
        check(total.mutations, total.mutation_trials, cfg.mutation_rate);
        assert_eq!(total.mutation_trials, total.offspring * 8);
    }

    #[test]
    fn dock_is_deterministic_and_monotone() {
        let table = table();
        let lig = generate_synthetic_ligand(4, 10, 2, &table).unwrap();
        let spec = GridSpec::centered([0.0; 3], 0.5, [21, 21, 21]).unwrap();
        let grid = constant_grid(&table, spec, |[i, j, k]| {
            let d = |v: usize| (v as f32 - 10.0).powi(2);
            0.01 * (d(i) + d(j) + d(k))
        });
        let w = TermWeights::default();
        let cfg = small_config(17);
        let a = dock(&lig, &table, &grid, &w, &cfg, BackendKind::Simd).unwrap();
        let b = dock(&lig, &table, &grid, &w, &cfg, BackendKind::Simd).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.len(), cfg.generations + 1);
        assert!(a.trace.windows(2).all(|p| p[1] <= p[0]));
        assert_eq!(a.evaluations, (cfg.population_size * (cfg.generations + 1)) as u64);
        assert_eq!(a.breakdown.total, *a.trace.last().unwrap());
    }

    #[test]
    fn flat_landscape_scores_torsion_penalty_only() {
        let table = table();
        let lig = generate_synthetic_ligand(8, 3, 1, &table).unwrap();
        let spec = GridSpec::centered([0.0; 3], 0.5, [21, 21, 21]).unwrap();
        let grid = constant_grid(&table, spec, |_| 0.0);
        let w = TermWeights { w_vdw: 0.0, w_hbond: 0.0, w_elec: 0.0, w_desolv: 0.0, ..TermWeights::default() };
        let r = dock(&lig, &table, &grid, &w, &small_config(1), BackendKind::Reference).unwrap();
        assert!(r.trace.iter().all(|&t| t == w.w_tors));
    }

    #[test]
    fn single_atom_finds_deep_minimum() {
        let table = table();
        let c = table.index_of("C").unwrap();
        let lig = LigandTopology::new(LigandDraft {
            coords: Coords::from_points(&[[0.0; 3]]),
            type_index: vec![c],
            charge: vec![0.0],
            bonds: vec![],
            rotatable: vec![],
        })
        .unwrap();
        let spec = GridSpec::new([0.0; 3], 0.5, [17, 17, 17]).unwrap();
        let target = [12usize, 4, 9];
        // funnel toward one deep node
        let grid = constant_grid(&table, spec, |n| {
            let d2: f32 = (0..3).map(|k| (n[k] as f32 - target[k] as f32).powi(2)).sum();
            if d2 == 0.0 { -10.0 } else { 0.05 * d2.sqrt() }
        });
        let node = spec.node(target[0], target[1], target[2]);
        for seed in 0..20 {
            let cfg = GaConfig { generations: 200, seed, ..GaConfig::default() };
            let r = dock(&lig, &table, &grid, &TermWeights::default(), &cfg, BackendKind::Simd).unwrap();
            let d: f32 = (0..3).map(|k| (r.genotype[k] - node[k]).powi(2)).sum::<f32>().sqrt();
            assert!(d <= 2.0 * spec.spacing, "seed {seed}: {d}");
        }
    }

    #[test]
    fn angles_wrap_into_range() {
        for a in [-7.0f32, -PI, 0.0, 3.2, PI, 12.0] {
            let w = wrap_angle(a);
            assert!((-PI..PI).contains(&w), "{a} -> {w}");
        }
    }
}
