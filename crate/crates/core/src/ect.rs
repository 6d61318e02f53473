//! Euler characteristic curves and the Euler Characteristic Transform of
//! vertex-embedded graphs.
//!
//! Each vertex carries a feature row `x_v`. For a unit direction `ξ` the
//! vertex height is `⟨x_v, ξ⟩` and an edge enters the filtration at the
//! larger of its endpoint heights, so every sublevel set is a subgraph.
//! The curve samples `χ(t) = #{v : h_v ≤ t} − #{e : h_e ≤ t}` on a fixed
//! threshold grid; the transform stacks one curve per direction.
//!
//! Flattened layout is direction-major: entry `(d, t)` lives at
//! `d * T + t`.

use crate::features::FeatureMatrix;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DIRECTIONS: usize = 158;
pub const DEFAULT_THRESHOLDS: usize = 16;

/// Identifies the direction sampler: ChaCha20 (`rand_chacha` 0.3, seeded
/// with `seed_from_u64`), 53-bit uniforms, Box–Muller pairs, then
/// normalization. Changing any step must change this string.
pub const GENERATOR_ID: &str = "chacha20/box-muller/v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EctError {
    #[error("InvalidDimension: direction dimension must be at least 1")]
    InvalidDimension,
    #[error("InvalidCount: number of directions must be at least 1")]
    InvalidCount,
    #[error("InvalidGrid: {0}")]
    InvalidGrid(String),
    #[error("DimensionMismatch: feature width {found}, direction dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("edge ({0}, {1}) references a missing vertex")]
    InvalidEdge(usize, usize),
    #[error("molecule {index}: {source}")]
    Molecule {
        index: usize,
        #[source]
        source: Box<EctError>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub dimension: usize,
    pub seed: u64,
    pub generator_id: String,
    /// Row-major, `count × dimension`.
    pub vectors: Vec<f64>,
}

impl DirectionSet {
    pub fn count(&self) -> usize {
        self.vectors.len() / self.dimension
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.dimension)
    }
}

struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    fn new(seed: u64) -> Self {
        GaussianStream {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in (0, 1].
    fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let r = (-2.0 * self.open_unit().ln()).sqrt();
        let theta = std::f64::consts::TAU * self.open_unit();
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Draws `count` directions uniformly on the unit sphere in `dimension`
/// dimensions by normalizing standard-Gaussian vectors. Zero vectors are
/// redrawn.
pub fn sample_directions(
    dimension: usize,
    count: usize,
    seed: u64,
) -> Result<DirectionSet, EctError> {
    if dimension == 0 {
        return Err(EctError::InvalidDimension);
    }
    if count == 0 {
        return Err(EctError::InvalidCount);
    }
    let mut gauss = GaussianStream::new(seed);
    let mut vectors = Vec::with_capacity(dimension * count);
    let mut v = vec![0.0; dimension];
    for _ in 0..count {
        let norm = loop {
            for x in v.iter_mut() {
                *x = gauss.next();
            }
            let norm = crate::features::euclidean_norm(&v);
            if norm > 0.0 && norm.is_finite() {
                break norm;
            }
        };
        vectors.extend(v.iter().map(|x| x / norm));
    }
    Ok(DirectionSet {
        dimension,
        seed,
        generator_id: GENERATOR_ID.to_string(),
        vectors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    values: Vec<f64>,
}

impl ThresholdGrid {
    /// `count` equally spaced points on `[-1, 1]`, endpoints included.
    /// A single-point grid is `[1.0]`.
    pub fn uniform(count: usize) -> Result<Self, EctError> {
        match count {
            0 => Err(EctError::InvalidGrid("at least one threshold required".into())),
            1 => Ok(ThresholdGrid { values: vec![1.0] }),
            _ => {
                let step = (count - 1) as f64;
                let mut values: Vec<f64> = (0..count)
                    .map(|i| -1.0 + 2.0 * i as f64 / step)
                    .collect();
                values[count - 1] = 1.0;
                Ok(ThresholdGrid { values })
            }
        }
    }

    pub fn new(values: Vec<f64>) -> Result<Self, EctError> {
        if values.is_empty() {
            return Err(EctError::InvalidGrid("at least one threshold required".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EctError::InvalidGrid("thresholds must be finite".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EctError::InvalidGrid(
                "thresholds must be strictly increasing".into(),
            ));
        }
        Ok(ThresholdGrid { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Inner product with a fixed left-to-right accumulation order.
#[inline]
pub fn project(row: &[f64], direction: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, d) in row.iter().zip(direction) {
        acc += x * d;
    }
    acc
}

fn check_inputs(
    features: &FeatureMatrix,
    edges: &[(usize, usize)],
    dimension: usize,
) -> Result<(), EctError> {
    if features.width != dimension {
        return Err(EctError::DimensionMismatch {
            expected: dimension,
            found: features.width,
        });
    }
    let n = features.rows();
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(EctError::InvalidEdge(a, b));
    }
    Ok(())
}

/// Reusable buffers for sweeping many directions over one graph.
#[derive(Default)]
struct Sweep {
    nodes: Vec<f64>,
    edges: Vec<f64>,
}

impl Sweep {
    fn heights(&mut self, features: &FeatureMatrix, edges: &[(usize, usize)], direction: &[f64]) {
        self.nodes.clear();
        self.nodes
            .extend(features.iter_rows().map(|row| project(row, direction)));
        self.edges.clear();
        let nodes = &self.nodes;
        self.edges
            .extend(edges.iter().map(|&(a, b)| nodes[a].max(nodes[b])));
        self.nodes.sort_unstable_by(f64::total_cmp);
        self.edges.sort_unstable_by(f64::total_cmp);
    }

    /// Visits `(t_index, vertices ≤ t, edges ≤ t)` for every grid point.
    fn counts(&self, grid: &ThresholdGrid, mut visit: impl FnMut(usize, usize, usize)) {
        let (mut nv, mut ne) = (0, 0);
        for (i, &t) in grid.values.iter().enumerate() {
            while nv < self.nodes.len() && self.nodes[nv] <= t {
                nv += 1;
            }
            while ne < self.edges.len() && self.edges[ne] <= t {
                ne += 1;
            }
            visit(i, nv, ne);
        }
    }
}

/// Vertex and edge counts of each closed sublevel set along `direction`.
pub fn sublevel_counts(
    features: &FeatureMatrix,
    edges: &[(usize, usize)],
    direction: &[f64],
    grid: &ThresholdGrid,
) -> Result<(Vec<usize>, Vec<usize>), EctError> {
    check_inputs(features, edges, direction.len())?;
    let mut sweep = Sweep::default();
    sweep.heights(features, edges, direction);
    let mut vs = Vec::with_capacity(grid.len());
    let mut es = Vec::with_capacity(grid.len());
    sweep.counts(grid, |_, v, e| {
        vs.push(v);
        es.push(e);
    });
    Ok((vs, es))
}

/// Euler characteristic curve along one direction.
pub fn compute_ecc(
    features: &FeatureMatrix,
    edges: &[(usize, usize)],
    direction: &[f64],
    grid: &ThresholdGrid,
) -> Result<Vec<i32>, EctError> {
    let (vs, es) = sublevel_counts(features, edges, direction, grid)?;
    Ok(vs
        .iter()
        .zip(&es)
        .map(|(&v, &e)| v as i32 - e as i32)
        .collect())
}

/// `D × T` grid of Euler characteristics, stored direction-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EctDescriptor {
    pub directions: usize,
    pub thresholds: usize,
    pub values: Vec<i32>,
}

impl EctDescriptor {
    pub fn get(&self, direction: usize, threshold: usize) -> i32 {
        self.values[direction * self.thresholds + threshold]
    }

    pub fn curve(&self, direction: usize) -> &[i32] {
        &self.values[direction * self.thresholds..(direction + 1) * self.thresholds]
    }

    pub fn flattened(&self) -> &[i32] {
        &self.values
    }
}

pub fn compute_ect(
    features: &FeatureMatrix,
    edges: &[(usize, usize)],
    dirs: &DirectionSet,
    grid: &ThresholdGrid,
) -> Result<EctDescriptor, EctError> {
    check_inputs(features, edges, dirs.dimension)?;
    let t = grid.len();
    let mut values = vec![0i32; dirs.count() * t];
    let mut sweep = Sweep::default();
    for (direction, out) in dirs.iter().zip(values.chunks_exact_mut(t)) {
        sweep.heights(features, edges, direction);
        sweep.counts(grid, |i, v, e| out[i] = v as i32 - e as i32);
    }
    Ok(EctDescriptor {
        directions: dirs.count(),
        thresholds: t,
        values,
    })
}

/// One molecule as seen by the transform: normalized features plus bonds.
#[derive(Debug, Clone, PartialEq)]
pub struct EctInput {
    pub features: FeatureMatrix,
    pub edges: Vec<(usize, usize)>,
}

/// ECT features for a whole dataset, `N × (D·T)` row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EctTable {
    pub mol_ids: Vec<String>,
    pub directions: usize,
    pub thresholds: usize,
    pub values: Vec<i32>,
}

impl EctTable {
    pub fn rows(&self) -> usize {
        self.mol_ids.len()
    }

    pub fn width(&self) -> usize {
        self.directions * self.thresholds
    }

    pub fn row(&self, i: usize) -> &[i32] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }
}

/// Computes the transform of every molecule. Work fans out over the current
/// rayon pool; rows are assembled in input order so the table does not
/// depend on the number of workers.
pub fn ect_batch(
    dataset: &[EctInput],
    dirs: &DirectionSet,
    grid: &ThresholdGrid,
) -> Result<EctTable, EctError> {
    let rows: Vec<EctDescriptor> = dataset
        .par_iter()
        .enumerate()
        .map(|(index, m)| {
            compute_ect(&m.features, &m.edges, dirs, grid).map_err(|e| EctError::Molecule {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;
    let mut values = Vec::with_capacity(rows.len() * dirs.count() * grid.len());
    for r in &rows {
        values.extend_from_slice(&r.values);
    }
    Ok(EctTable {
        mol_ids: dataset
            .iter()
            .map(|m| m.features.molecule_id.clone())
            .collect(),
        directions: dirs.count(),
        thresholds: grid.len(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(heights: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new("m", 1, heights.to_vec())
    }

    #[test]
    fn two_node_curve() {
        let grid = ThresholdGrid::new(vec![-1.0, 0.0, 1.0]).unwrap();
        let ecc = compute_ecc(&line(&[0.0, 1.0]), &[(0, 1)], &[1.0], &grid).unwrap();
        assert_eq!(ecc, vec![0, 1, 1]);
    }

    #[test]
    fn triangle_at_single_threshold() {
        let grid = ThresholdGrid::new(vec![0.0]).unwrap();
        let ecc = compute_ecc(&line(&[0.0; 3]), &[(0, 1), (1, 2), (2, 0)], &[1.0], &grid).unwrap();
        assert_eq!(ecc, vec![0]);
    }

    #[test]
    fn opposite_directions_differ() {
        let dirs = DirectionSet {
            dimension: 1,
            seed: 0,
            generator_id: GENERATOR_ID.into(),
            vectors: vec![1.0, -1.0],
        };
        let grid = ThresholdGrid::uniform(5).unwrap();
        let ect = compute_ect(&line(&[-0.5, 0.25]), &[(0, 1)], &dirs, &grid).unwrap();
        assert_ne!(ect.curve(0), ect.curve(1));
        assert_eq!(ect.curve(0), &[0, 1, 1, 1, 1]);
        assert_eq!(ect.curve(1), &[0, 0, 1, 1, 1]);
    }

    #[test]
    fn isolated_point_ends_at_one() {
        let dirs = sample_directions(3, 7, 1).unwrap();
        let grid = ThresholdGrid::uniform(4).unwrap();
        let f = FeatureMatrix::new("p", 3, vec![0.2, -0.1, 0.3]);
        let ect = compute_ect(&f, &[], &dirs, &grid).unwrap();
        for d in 0..7 {
            assert_eq!(ect.get(d, 3), 1);
        }
    }

    #[test]
    fn uniform_grid_endpoints() {
        let g = ThresholdGrid::uniform(16).unwrap();
        assert_eq!(g.values()[0], -1.0);
        assert_eq!(g.values()[15], 1.0);
        assert!(g.values().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(ThresholdGrid::uniform(1).unwrap().values(), &[1.0]);
        assert!(ThresholdGrid::uniform(0).is_err());
        assert!(ThresholdGrid::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn directions_on_zero_sphere() {
        let d = sample_directions(1, 4, 99).unwrap();
        assert!(d.vectors.iter().all(|&x| x == 1.0 || x == -1.0));
    }

    #[test]
    fn default_direction_set_is_unit() {
        let d = sample_directions(9, 158, 42).unwrap();
        assert_eq!(d.count(), 158);
        for v in d.iter() {
            assert!((crate::features::euclidean_norm(v) - 1.0).abs() <= 1e-12);
        }
        assert_eq!(d, sample_directions(9, 158, 42).unwrap());
        assert_ne!(d.vectors, sample_directions(9, 158, 43).unwrap().vectors);
    }

    #[test]
    fn sphere_samples_are_centered() {
        let d = sample_directions(3, 100_000, 7).unwrap();
        for k in 0..3 {
            let mean: f64 = d.iter().map(|v| v[k]).sum::<f64>() / 100_000.0;
            assert!(mean.abs() < 0.02, "coordinate {k} mean {mean}");
        }
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(sample_directions(0, 1, 0), Err(EctError::InvalidDimension));
        assert_eq!(sample_directions(2, 0, 0), Err(EctError::InvalidCount));
        let grid = ThresholdGrid::uniform(2).unwrap();
        assert!(matches!(
            compute_ecc(&line(&[0.0]), &[], &[1.0, 0.0], &grid),
            Err(EctError::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert_eq!(
            compute_ecc(&line(&[0.0]), &[(0, 3)], &[1.0], &grid),
            Err(EctError::InvalidEdge(0, 3))
        );
    }

    #[test]
    fn batch_reports_molecule_index() {
        let dirs = sample_directions(2, 3, 0).unwrap();
        let grid = ThresholdGrid::uniform(3).unwrap();
        let good = EctInput {
            features: FeatureMatrix::new("a", 2, vec![0.1, 0.2]),
            edges: vec![],
        };
        let bad = EctInput {
            features: FeatureMatrix::new("b", 1, vec![0.1]),
            edges: vec![],
        };
        let err = ect_batch(&[good.clone(), bad], &dirs, &grid).unwrap_err();
        assert!(matches!(err, EctError::Molecule { index: 1, .. }));
        let table = ect_batch(&[good.clone(), good.clone()], &dirs, &grid).unwrap();
        assert_eq!(table.row(0), table.row(1));
        let single = compute_ect(&good.features, &good.edges, &dirs, &grid).unwrap();
        assert_eq!(table.row(0), single.flattened());
    }
}
