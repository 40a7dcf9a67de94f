//! Deterministic synthetic ligands and receptors for benchmarks and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Coords, LigandDraft, LigandTopology, ParameterTable, Protein};

const BOND_LENGTH: f32 = 1.5;
const MIN_NONBONDED: f32 = 2.2;

fn random_unit(rng: &mut ChaCha8Rng) -> [f32; 3] {
    loop {
        let v = [rng.random_range(-1.0f32..1.0), rng.random_range(-1.0f32..1.0), rng.random_range(-1.0f32..1.0)];
        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn ligand_types(table: &ParameterTable) -> Vec<usize> {
    // heavy-atom-ish types; hydrogens and sulfur would skew the mix
    ["C", "A", "N", "NA", "OA", "HD", "SA"].iter().filter_map(|l| table.index_of(l)).collect()
}

/// Chain-with-branches ligand: a spine of bonded atoms with side atoms hung
/// off random spine atoms. Rotatable bonds are spine bonds with atoms beyond
/// them, declared root (atom 0) outward. Pure function of its arguments.
pub fn generate_synthetic_ligand(
    seed: u64,
    n_atoms: usize,
    n_torsions: usize,
    table: &ParameterTable,
) -> Result<LigandTopology> {
    if n_atoms == 0 || (n_torsions > 0 && n_atoms < n_torsions + 2) {
        return Err(Error::Config(format!("need n_atoms >= n_torsions + 2, got {n_atoms} atoms and {n_torsions} torsions")));
    }
    let types = ligand_types(table);
    if types.is_empty() {
        return Err(Error::Config("parameter table has no usable ligand types".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spine = (n_torsions + 2).max((n_atoms * 3).div_ceil(5)).min(n_atoms);
    let mut coords = Coords::with_capacity(n_atoms);
    let mut bonds = Vec::with_capacity(n_atoms);
    coords.push([0.0, 0.0, 0.0]);
    for i in 1..n_atoms {
        let parent = if i < spine { i - 1 } else { rng.random_range(1..spine.max(2)).min(spine - 1) };
        let origin = coords.get(parent);
        let mut best = None;
        let mut best_clearance = f32::NEG_INFINITY;
        for _ in 0..64 {
            let d = random_unit(&mut rng);
            let p = [origin[0] + BOND_LENGTH * d[0], origin[1] + BOND_LENGTH * d[1], origin[2] + BOND_LENGTH * d[2]];
            let clearance = (0..coords.len())
                .filter(|&k| k != parent)
                .map(|k| {
                    let q = coords.get(k);
                    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
                })
                .fold(f32::INFINITY, f32::min);
            if clearance > best_clearance {
                best_clearance = clearance;
                best = Some(p);
            }
            if clearance >= MIN_NONBONDED {
                break;
            }
        }
        coords.push(best.unwrap());
        bonds.push((parent, i));
    }
    let type_index = (0..n_atoms).map(|_| types[rng.random_range(0..types.len())]).collect();
    let charge = (0..n_atoms).map(|_| rng.random_range(-0.5f32..=0.5)).collect();
    // spine bonds (k, k+1) with k+2 < spine have atoms beyond them
    let candidates = spine.saturating_sub(2);
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, candidates, n_torsions).into_vec();
    picked.sort_unstable();
    let rotatable = picked.into_iter().map(|k| (k, k + 1)).collect();
    Ok(LigandTopology::new(LigandDraft { coords, type_index, charge, bonds, rotatable })?)
}

/// Receptor atoms scattered in a sphere around `center` with a minimum
/// separation, leaving an empty pocket of `pocket_radius` at the center.
pub fn generate_synthetic_protein(
    seed: u64,
    n_atoms: usize,
    center: [f32; 3],
    radius: f32,
    pocket_radius: f32,
    table: &ParameterTable,
) -> Result<Protein> {
    if n_atoms == 0 || !(radius > pocket_radius) {
        return Err(Error::Config("synthetic receptor needs atoms and radius > pocket radius".into()));
    }
    let types: Vec<usize> = ["C", "N", "OA", "NA", "HD", "SA", "A"].iter().filter_map(|l| table.index_of(l)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Coords::with_capacity(n_atoms);
    let min_sep2 = 1.2f32 * 1.2;
    let mut attempts = 0usize;
    while coords.len() < n_atoms {
        attempts += 1;
        let d = random_unit(&mut rng);
        let r = rng.random_range(pocket_radius..radius);
        let p = [center[0] + r * d[0], center[1] + r * d[1], center[2] + r * d[2]];
        let clear = (0..coords.len()).all(|k| {
            let q = coords.get(k);
            (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2) >= min_sep2
        });
        if clear || attempts > 200 * n_atoms {
            coords.push(p);
        }
    }
    let type_index = (0..n_atoms).map(|_| types[rng.random_range(0..types.len())]).collect();
    let charge = (0..n_atoms).map(|_| rng.random_range(-0.5f32..=0.5)).collect();
    Ok(Protein::new(coords, type_index, charge)?)
}
