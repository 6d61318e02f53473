use ectmol::ect::{compute_ecc, compute_ect, ect_batch, sample_directions, sublevel_counts, ThresholdGrid};
use ectmol::pipeline::{build_graphs, prepare_inputs, GraphOptions};
use ectmol::synthetic::{random_smiles_set, SyntheticConfig};
use ectmol::dataset::MoleculeRecord;
use ectmol::FeatureMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Counts the closed sublevel subgraph at each threshold directly.
fn naive_ecc(features: &[Vec<f64>], edges: &[(usize, usize)], dir: &[f64], grid: &[f64]) -> Vec<i32> {
    let h: Vec<f64> = features
        .iter()
        .map(|x| x.iter().zip(dir).fold(0.0, |acc, (a, b)| acc + a * b))
        .collect();
    grid.iter()
        .map(|&t| {
            let v = h.iter().filter(|&&hv| hv <= t).count() as i32;
            let e = edges.iter().filter(|&&(a, b)| h[a] <= t && h[b] <= t).count() as i32;
            v - e
        })
        .collect()
}

fn random_graph(rng: &mut ChaCha20Rng) -> (Vec<Vec<f64>>, Vec<(usize, usize)>) {
    let n = rng.gen_range(1..=20);
    let dim = rng.gen_range(1..=9);
    let coarse = rng.gen_bool(0.5);
    let features: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    if coarse {
                        // quarter steps make heights land on grid points
                        f64::from(rng.gen_range(-4..=4)) / 4.0
                    } else {
                        rng.gen_range(-1.0..=1.0)
                    }
                })
                .collect()
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let m = rng.gen_range(0..=pairs.len().min(40));
    (features, pairs[..m].to_vec())
}

fn as_matrix(features: &[Vec<f64>]) -> FeatureMatrix {
    let dim = features[0].len();
    FeatureMatrix::new("g", dim, features.concat())
}

#[test]
fn ecc_matches_naive_count_on_random_graphs() {
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    for case in 0..1500 {
        let (features, edges) = random_graph(&mut rng);
        let dim = features[0].len();
        let dirs = sample_directions(dim, 1, case).unwrap();
        let direction = dirs.direction(0);
        let grid = if case % 2 == 0 {
            ThresholdGrid::uniform(rng.gen_range(1..=24)).unwrap()
        } else {
            let mut v: Vec<f64> = (0..rng.gen_range(1..=12)).map(|_| rng.gen_range(-3.0..3.0)).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            ThresholdGrid::new(v).unwrap()
        };
        let got = compute_ecc(&as_matrix(&features), &edges, direction, &grid).unwrap();
        let want = naive_ecc(&features, &edges, direction, grid.values());
        assert_eq!(got, want, "case {case}");
    }
}

#[test]
fn vertex_counts_never_decrease() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for case in 0..300 {
        let (features, edges) = random_graph(&mut rng);
        let dirs = sample_directions(features[0].len(), 1, case).unwrap();
        let grid = ThresholdGrid::uniform(33).unwrap();
        let (v, e) = sublevel_counts(&as_matrix(&features), &edges, dirs.direction(0), &grid).unwrap();
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
    }
}

fn corpus(n: usize, seed: u64) -> Vec<MoleculeRecord> {
    random_smiles_set(n, seed, &SyntheticConfig::default())
        .into_iter()
        .enumerate()
        .map(|(i, smiles)| MoleculeRecord {
            mol_id: format!("m{i}"),
            smiles,
            target: 1.0,
            row_origin: i + 2,
        })
        .collect()
}

#[test]
fn last_grid_point_gives_global_euler_characteristic() {
    let records = corpus(200, 5);
    let (graphs, _) = build_graphs(&records, GraphOptions::default(), false).unwrap();
    let ids: Vec<String> = records.iter().map(|r| r.mol_id.clone()).collect();
    let (inputs, _) = prepare_inputs(&graphs, &ids).unwrap();
    let dirs = sample_directions(9, 40, 3).unwrap();
    let grid = ThresholdGrid::uniform(7).unwrap();
    for (g, input) in graphs.iter().zip(&inputs) {
        let ect = compute_ect(&input.features, &input.edges, &dirs, &grid).unwrap();
        for d in 0..40 {
            assert_eq!(i64::from(ect.get(d, 6)), g.euler_characteristic());
        }
    }
}

#[test]
fn relabeling_atoms_leaves_descriptor_unchanged() {
    let records = corpus(60, 8);
    let (graphs, _) = build_graphs(&records, GraphOptions::default(), false).unwrap();
    let ids: Vec<String> = records.iter().map(|r| r.mol_id.clone()).collect();
    let (inputs, stats) = prepare_inputs(&graphs, &ids).unwrap();
    let dirs = sample_directions(9, 30, 42).unwrap();
    let grid = ThresholdGrid::uniform(16).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    for (g, input) in graphs.iter().zip(&inputs) {
        let mut atom_perm: Vec<usize> = (0..g.atom_count()).collect();
        let mut bond_perm: Vec<usize> = (0..g.bond_count()).collect();
        atom_perm.shuffle(&mut rng);
        bond_perm.shuffle(&mut rng);
        let h = g.relabeled(&atom_perm, &bond_perm);
        let features = stats.apply(&ectmol::featurize(&h, "p")).unwrap();
        let a = compute_ect(&input.features, &input.edges, &dirs, &grid).unwrap();
        let b = compute_ect(&features, &h.edge_list(), &dirs, &grid).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn batch_is_identical_across_worker_counts() {
    let records = corpus(100, 21);
    let (graphs, _) = build_graphs(&records, GraphOptions::default(), false).unwrap();
    let ids: Vec<String> = records.iter().map(|r| r.mol_id.clone()).collect();
    let (inputs, _) = prepare_inputs(&graphs, &ids).unwrap();
    let dirs = sample_directions(9, 158, 42).unwrap();
    let grid = ThresholdGrid::uniform(16).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ect_batch(&inputs, &dirs, &grid).unwrap())
    };
    assert_eq!(run(1), run(8));
}

#[test]
fn batch_of_duplicates_and_singletons() {
    let records = corpus(3, 1);
    let (graphs, _) = build_graphs(&records, GraphOptions::default(), false).unwrap();
    let ids = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let (inputs, _) = prepare_inputs(&graphs, &ids).unwrap();
    let dirs = sample_directions(9, 12, 42).unwrap();
    let grid = ThresholdGrid::uniform(5).unwrap();
    let twice = vec![inputs[0].clone(), inputs[0].clone()];
    let table = ect_batch(&twice, &dirs, &grid).unwrap();
    assert_eq!(table.row(0), table.row(1));
    let single = compute_ect(&inputs[0].features, &inputs[0].edges, &dirs, &grid).unwrap();
    assert_eq!(table.row(0), single.flattened());
}
