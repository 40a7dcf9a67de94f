use std::f32::consts::PI;
use std::sync::OnceLock;

use proptest::prelude::*;
use vecdock::bench::{emit_csv, parse_csv, BenchRecord};
use vecdock::energy::{self, SolvationAtom, TermWeights};
use vecdock::ga::{dock, GaConfig};
use vecdock::grid::{
    build_grid_maps, read_grid_set, trilinear, write_grid_set, GridMap, GridMapSet, GridSpec, DESOLV_LABEL,
    ELEC_LABEL,
};
use vecdock::io::{
    generate_synthetic_ligand, generate_synthetic_protein, parse_ligand_pdbqt, write_ligand_pdbqt, PdbqtOptions,
};
use vecdock::model::{build_fragment_masks, build_nonbond_pairlist, Coords};
use vecdock::pose::{apply_pose, decode_genotype, rotate_selection};
use vecdock::scoring::{intra_energy, score_pose, InterTerms};
use vecdock::screen::ligand_seed;
use vecdock::{BackendKind, LigandTopology, ParameterTable};

fn ligand(seed: u64, atoms: usize, torsions: usize) -> LigandTopology {
    let torsions = if atoms < 3 { 0 } else { torsions.min(atoms - 2) };
    generate_synthetic_ligand(seed, atoms, torsions, &ParameterTable::default_table()).unwrap()
}

fn genotype(lig: &LigandTopology, t: [f32; 3], q: [f32; 4], torsions: &[f32]) -> Vec<f32> {
    let mut g = t.to_vec();
    g.extend_from_slice(&q);
    g.extend(torsions.iter().take(lig.n_torsions()));
    g.resize(lig.n_genes(), 0.0);
    g
}

fn receptor() -> &'static GridMapSet {
    static GRID: OnceLock<GridMapSet> = OnceLock::new();
    GRID.get_or_init(|| {
        let table = ParameterTable::default_table();
        let protein = generate_synthetic_protein(5, 150, [0.0; 3], 10.0, 5.0, &table).unwrap();
        let spec = GridSpec::centered([0.0; 3], 0.5, [24; 3]).unwrap();
        let labels: Vec<&str> = table.iter().map(|p| p.label.as_str()).collect();
        build_grid_maps(&protein, &table, spec, &labels, &TermWeights::default()).unwrap()
    })
}

fn quaternion() -> impl Strategy<Value = [f32; 4]> {
    prop::array::uniform4(-1.0f32..1.0).prop_filter("non-zero", |q| q.iter().map(|v| v * v).sum::<f32>() > 1e-3)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decoded_quaternion_is_unit(q in quaternion(), t in prop::array::uniform3(-20.0f32..20.0)) {
        let lig = ligand(1, 5, 0);
        let g = genotype(&lig, t, q, &[]);
        let d = decode_genotype(&g, &lig).unwrap();
        prop_assert!((d.rotation.norm() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn rigid_motion_preserves_distances(
        seed in any::<u64>(), atoms in 2usize..40, q in quaternion(), t in prop::array::uniform3(-15.0f32..15.0),
    ) {
        let lig = ligand(seed, atoms, 0);
        let moved = apply_pose(&lig, &genotype(&lig, t, q, &[])).unwrap();
        let c0 = lig.coords0();
        for i in 0..atoms {
            for j in (i + 1)..atoms {
                prop_assert!(rel(moved.distance(i, j) as f64, c0.distance(i, j) as f64) <= 1e-5);
            }
        }
    }

    #[test]
    fn torsions_preserve_bond_lengths(
        seed in any::<u64>(), atoms in 3usize..40, n_tors in 0usize..8,
        q in quaternion(), tors in prop::collection::vec(-PI..PI, 8),
    ) {
        let lig = ligand(seed, atoms, n_tors);
        let moved = apply_pose(&lig, &genotype(&lig, [1.0, -2.0, 0.5], q, &tors)).unwrap();
        for &(a, b) in lig.bonds() {
            let (a, b) = (a as usize, b as usize);
            prop_assert!(rel(moved.distance(a, b) as f64, lig.coords0().distance(a, b) as f64) <= 1e-5);
        }
    }

    #[test]
    fn pose_is_pure(seed in any::<u64>(), atoms in 3usize..30, q in quaternion(), tors in prop::collection::vec(-3.0f32..3.0, 4)) {
        let lig = ligand(seed, atoms, 4);
        let g = genotype(&lig, [0.0; 3], q, &tors);
        let a = apply_pose(&lig, &g).unwrap();
        let b = apply_pose(&lig, &g).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn torsion_then_inverse_restores(
        seed in any::<u64>(), atoms in 3usize..30, angle in -3.1f32..3.1, pick in 0usize..8,
    ) {
        let lig = ligand(seed, atoms, 8);
        prop_assume!(lig.n_torsions() > 0);
        let bond = &lig.rotatable()[pick % lig.n_torsions()];
        let mut c = lig.coords0().clone();
        let (a, b) = (c.get(bond.a as usize), c.get(bond.b as usize));
        let axis = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        rotate_selection(&mut c, b, axis, angle, &bond.moving).unwrap();
        rotate_selection(&mut c, b, axis, -angle, &bond.moving).unwrap();
        for i in 0..atoms {
            let (p, o) = (c.get(i), lig.coords0().get(i));
            for d in 0..3 {
                prop_assert!((p[d] - o[d]).abs() <= 1e-5, "atom {i}: {p:?} vs {o:?}");
            }
        }
    }

    #[test]
    fn torsion_keeps_distances_to_axis(seed in any::<u64>(), atoms in 3usize..30, angle in -3.1f32..3.1) {
        let lig = ligand(seed, atoms, 3);
        prop_assume!(lig.n_torsions() > 0);
        let bond = &lig.rotatable()[0];
        let mut c = lig.coords0().clone();
        let (a, b) = (c.get(bond.a as usize), c.get(bond.b as usize));
        rotate_selection(&mut c, b, [b[0] - a[0], b[1] - a[1], b[2] - a[2]], angle, &bond.moving).unwrap();
        for &m in &bond.moving {
            for end in [bond.a as usize, bond.b as usize] {
                let (d0, d1) = (lig.coords0().distance(m as usize, end), c.distance(m as usize, end));
                prop_assert!((d0 - d1).abs() <= 1e-5 * d0.max(1.0));
            }
        }
    }

    #[test]
    fn torsion_moves_only_masked_atoms(seed in any::<u64>(), atoms in 3usize..30, angle in 0.1f32..3.0) {
        let lig = ligand(seed, atoms, 1);
        prop_assume!(lig.n_torsions() == 1);
        let rigid = genotype(&lig, lig.centroid0(), [1.0, 0.0, 0.0, 0.0], &[]);
        let twisted = genotype(&lig, lig.centroid0(), [1.0, 0.0, 0.0, 0.0], &[angle]);
        let (a, b) = (apply_pose(&lig, &rigid).unwrap(), apply_pose(&lig, &twisted).unwrap());
        let moving = &lig.rotatable()[0].moving;
        for i in 0..atoms {
            if !moving.contains(&(i as u32)) {
                prop_assert_eq!(a.get(i), b.get(i));
            }
        }
    }

    #[test]
    fn mask_and_complement_cover_atoms(seed in any::<u64>(), atoms in 3usize..20, n_tors in 1usize..6) {
        let lig = ligand(seed, atoms, n_tors);
        let bonds: Vec<(usize, usize)> = lig.bonds().iter().map(|&(a, b)| (a as usize, b as usize)).collect();
        let rot: Vec<(usize, usize)> = lig.rotatable().iter().map(|r| (r.a as usize, r.b as usize)).collect();
        for (mask, &(a, b)) in build_fragment_masks(atoms, &bonds, &rot).unwrap().iter().zip(&rot) {
            prop_assert!(!mask.contains(&(a as u32)) && !mask.contains(&(b as u32)));
            let mut covered: Vec<u32> = mask.clone();
            covered.extend([a as u32, b as u32]);
            covered.extend((0..atoms as u32).filter(|i| !mask.contains(i) && *i != a as u32 && *i != b as u32));
            covered.sort_unstable();
            prop_assert_eq!(covered, (0..atoms as u32).collect::<Vec<_>>());
        }
    }

    #[test]
    fn pairlist_has_unique_ordered_pairs(seed in any::<u64>(), atoms in 1usize..40, n_tors in 0usize..6) {
        let lig = ligand(seed, atoms, n_tors);
        let pairs: Vec<(u32, u32)> = build_nonbond_pairlist(&lig, &ParameterTable::default_table()).unwrap().pairs().collect();
        let mut sorted = pairs.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), pairs.len());
        prop_assert!(pairs.iter().all(|(i, j)| i < j));
    }

    #[test]
    fn intra_invariant_under_rigid_motion(
        seed in any::<u64>(), atoms in 5usize..40, q1 in quaternion(), q2 in quaternion(),
        t in prop::array::uniform3(-8.0f32..8.0), tors in prop::collection::vec(-3.0f32..3.0, 6),
    ) {
        let lig = ligand(seed, atoms, 6);
        let pairs = build_nonbond_pairlist(&lig, &ParameterTable::default_table()).unwrap();
        let w = TermWeights::default();
        let e1 = intra_energy(&apply_pose(&lig, &genotype(&lig, [0.0; 3], q1, &tors)).unwrap(), &pairs, &w, BackendKind::Simd);
        let e2 = intra_energy(&apply_pose(&lig, &genotype(&lig, t, q2, &tors)).unwrap(), &pairs, &w, BackendKind::Simd);
        prop_assert!(((e1 - e2).abs() as f64) <= 1e-4 * (e1.abs() as f64).max(1.0), "{e1} vs {e2}");
    }

    #[test]
    fn trilinear_exact_at_nodes_and_bounded(
        values in prop::collection::vec(-100.0f32..100.0, 64), f in prop::array::uniform3(0.0f32..=1.0),
        cell in prop::array::uniform3(0usize..3),
    ) {
        let spec = GridSpec::new([1.0, -2.0, 0.5], 0.5, [4, 4, 4]).unwrap();
        for k in 0..4 {
            for j in 0..4 {
                for i in 0..4 {
                    prop_assert_eq!(trilinear(&spec, &values, spec.node(i, j, k)), values[spec.index(i, j, k)]);
                }
            }
        }
        let p: [f32; 3] = std::array::from_fn(|d| spec.origin[d] + (cell[d] as f32 + f[d]) * spec.spacing);
        let corners: Vec<f32> = (0..8)
            .map(|c| values[spec.index(cell[0] + (c & 1), cell[1] + ((c >> 1) & 1), cell[2] + ((c >> 2) & 1))])
            .collect();
        let lo = corners.iter().cloned().fold(f32::INFINITY, f32::min);
        let hi = corners.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
        let v = trilinear(&spec, &values, p);
        prop_assert!(v >= lo - 1e-4 && v <= hi + 1e-4, "{v} outside [{lo}, {hi}]");
    }

    #[test]
    fn mugd_round_trip_is_bitwise(values in prop::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), 27), label in "[A-Z]{1,2}") {
        let spec = GridSpec::new([-1.0, 2.0, 3.5], 0.375, [3, 3, 3]).unwrap();
        let set = GridMapSet::new(spec, vec![GridMap { label, values }]).unwrap();
        let mut bytes = Vec::new();
        write_grid_set(&set, &mut bytes).unwrap();
        let back = read_grid_set(bytes.as_slice()).unwrap();
        let mut again = Vec::new();
        write_grid_set(&back, &mut again).unwrap();
        prop_assert_eq!(bytes, again);
    }

    #[test]
    fn synthetic_ligands_round_trip_through_pdbqt(seed in any::<u64>(), atoms in 1usize..40, n_tors in 0usize..6) {
        let table = ParameterTable::default_table();
        let lig = ligand(seed, atoms, n_tors);
        let text = write_ligand_pdbqt(&lig, &table, None);
        let back = parse_ligand_pdbqt(&text, &table, PdbqtOptions::default()).unwrap();
        prop_assert_eq!(back.topology.n_atoms(), lig.n_atoms());
        prop_assert_eq!(back.topology.n_torsions(), lig.n_torsions());
        let names: Vec<String> = back.atoms.iter().map(|a| a.name.clone()).collect();
        let normal = write_ligand_pdbqt(&back.topology, &table, Some(&names));
        let again = parse_ligand_pdbqt(&normal, &table, PdbqtOptions::default()).unwrap();
        let names: Vec<String> = again.atoms.iter().map(|a| a.name.clone()).collect();
        prop_assert_eq!(write_ligand_pdbqt(&again.topology, &table, Some(&names)), normal);
        for (k, atom) in back.atoms.iter().enumerate() {
            let digits: String = atom.name.chars().filter(|c| c.is_ascii_digit()).collect();
            let original = digits.parse::<usize>().unwrap() - 1;
            let (p, q) = (lig.coords0().get(original), back.topology.coords0().get(k));
            for d in 0..3 {
                prop_assert!((p[d] - q[d]).abs() <= 5e-4 + 1e-5, "atom {original}: {p:?} vs {q:?}");
            }
        }
    }

    #[test]
    fn synthetic_generation_is_pure(seed in any::<u64>(), atoms in 1usize..40, n_tors in 0usize..6) {
        prop_assert_eq!(ligand(seed, atoms, n_tors), ligand(seed, atoms, n_tors));
    }

    #[test]
    fn terms_in_f32_match_f64(r in 0.1f64..1000.0, q1 in -1.0f64..1.0, q2 in -1.0f64..1.0) {
        let r2 = r * r;
        let close = |a: f32, b: f64| (a as f64 - b).abs() <= 1e-6 || rel(a as f64, b) <= 1e-5;
        let (a12, b6) = (5_000.0f64, 40.0f64);
        prop_assert!(close(energy::vdw_energy(r2 as f32, a12 as f32, b6 as f32), energy::vdw_energy(r2, a12, b6)));
        prop_assert!(close(energy::hbond_energy(r2 as f32, a12 as f32, b6 as f32), energy::hbond_energy(r2, a12, b6)));
        prop_assert!(close(energy::electrostatic_energy(r as f32, q1 as f32, q2 as f32), energy::electrostatic_energy(r, q1, q2)));
        let sa = |q: f64| SolvationAtom { solpar: -0.0011, volume: 22.449, charge: q };
        let sa32 = |q: f64| SolvationAtom { solpar: -0.0011f32, volume: 22.449f32, charge: q as f32 };
        prop_assert!(close(energy::desolvation_energy(r2 as f32, sa32(q1), sa32(q2)), energy::desolvation_energy(r2, sa(q1), sa(q2))));
    }

    #[test]
    fn backends_agree_per_pose(
        seed in any::<u64>(), atoms in 1usize..30, n_tors in 0usize..6, q in quaternion(),
        t in prop::array::uniform3(-4.0f32..4.0), tors in prop::collection::vec(-3.1f32..3.1, 6),
    ) {
        let table = ParameterTable::default_table();
        let lig = ligand(seed, atoms, n_tors);
        let g = genotype(&lig, t, q, &tors);
        let w = TermWeights::default();
        let r = score_pose(&lig, &table, &g, receptor(), &w, BackendKind::Reference).unwrap();
        for kind in [BackendKind::Scalar, BackendKind::Simd] {
            let s = score_pose(&lig, &table, &g, receptor(), &w, kind).unwrap();
            let err = (s.total as f64 - r.total as f64).abs() / (r.total as f64).abs().max(1.0);
            prop_assert!(err <= 1e-5, "{kind:?}: {} vs {}", s.total, r.total);
        }
    }

    #[test]
    fn single_atom_on_node_reads_grid(seed in any::<u64>(), node in prop::array::uniform3(1usize..23)) {
        let table = ParameterTable::default_table();
        let grid = receptor();
        let lig = ligand(seed, 1, 0);
        let p = grid.spec().node(node[0], node[1], node[2]);
        let w = TermWeights::default();
        let s = score_pose(&lig, &table, &genotype(&lig, p, [1.0, 0.0, 0.0, 0.0], &[]), grid, &w, BackendKind::Reference).unwrap();
        let terms = InterTerms::bind(&lig, &table, grid, &w).unwrap();
        let at = |label: &str| grid.get(label).unwrap().values[grid.spec().index(node[0], node[1], node[2])] as f64;
        let label = table.get(lig.type_index()[0]).unwrap().label.as_str();
        let want = at(label) + terms.elec_factor[0] as f64 * at(ELEC_LABEL) + terms.desolv_factor[0] as f64 * at(DESOLV_LABEL);
        prop_assert!((s.inter as f64 - want).abs() <= 1e-5 * want.abs().max(1.0), "{} vs {want}", s.inter);
        prop_assert_eq!(s.intra, 0.0);
    }

    #[test]
    fn ligand_seeds_are_distinct(global in any::<u64>(), i in 0usize..10_000, j in 0usize..10_000) {
        prop_assume!(i != j);
        prop_assert_ne!(ligand_seed(global, i), ligand_seed(global, j));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ga_evaluation_count_is_exact(seed in any::<u64>(), pop in 2usize..20, gens in 0usize..8) {
        let lig = ligand(seed, 8, 2);
        let config = GaConfig { population_size: pop, generations: gens, seed, ..GaConfig::default() };
        let r = dock(&lig, &ParameterTable::default_table(), receptor(), &TermWeights::default(), &config, BackendKind::Scalar).unwrap();
        prop_assert_eq!(r.evaluations, (pop * (gens + 1)) as u64);
        prop_assert_eq!(r.generations(), gens);
        prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

fn record(seed: u64, mean: f64, samples: Vec<f64>) -> BenchRecord {
    BenchRecord {
        scenario: format!("s{}", seed % 3),
        backend: BackendKind::ALL[(seed % 3) as usize],
        threads: 1 + (seed % 4) as usize,
        mean_ms: mean,
        stddev_ms: mean / 7.0,
        cv: 1.0 / 7.0,
        ligands_per_s: 1e3 / mean,
        modeled_flops: seed,
        modeled_bytes: seed / 3 + 1,
        modeled_ai: seed as f64 / (seed / 3 + 1) as f64,
        speedup_vs_reference: seed.is_multiple_of(2).then_some(mean.sqrt()),
        samples,
        modeled_lane_util: 0.5,
        status: "ok".into(),
    }
}

proptest! {
    #[test]
    fn bench_csv_is_byte_stable(
        rows in prop::collection::vec((any::<u64>(), 1e-3f64..1e6, prop::collection::vec(0.0f64..1e4, 0..12)), 0..8),
    ) {
        let records: Vec<BenchRecord> = rows.into_iter().map(|(s, m, v)| record(s, m, v)).collect();
        let mut first = Vec::new();
        emit_csv(&records, &mut first).unwrap();
        let back = parse_csv(std::str::from_utf8(&first).unwrap()).unwrap();
        let mut second = Vec::new();
        emit_csv(&back, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }
}

#[test]
fn coords_distance_helper_agrees() {
    let c = Coords::from_points(&[[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]]);
    assert_eq!(c.distance(0, 1), 5.0);
}

/// Timing noise depends on the host, so this only runs on request:
/// `cargo test --release -p vecdock --test properties -- --ignored`.
#[test]
#[ignore]
fn benchmark_samples_are_stable() {
    let scenario = vecdock::bench::BenchScenario::from_toml(
        r#"
        name = "stability"
        backends = ["scalar", "simd"]
        [ligands]
        source = "synthetic"
        count = 4
        atoms = 30
        torsions = 5
        [grid]
        points = [32, 32, 32]
        [ga]
        population_size = 60
        generations = 300
        "#,
    )
    .unwrap();
    let run = vecdock::bench::run_benchmark(&scenario, std::path::Path::new(".")).unwrap();
    for r in &run.records {
        assert!(r.cv <= 0.05, "{} {:?}: cv {:.3}", r.scenario, r.backend, r.cv);
    }
}
