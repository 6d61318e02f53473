//! Nine-dimensional handcrafted atom features and dataset-wide scaling.
//!
//! Column order (schema version 1):
//!
//! | col | name                   | values                                      |
//! |-----|------------------------|---------------------------------------------|
//! | 0   | atomic_number          | Z                                           |
//! | 1   | chirality_code         | 0 none, 1 `@`, 2 `@@`                       |
//! | 2   | total_degree           | graph degree, hydrogens included            |
//! | 3   | formal_charge          | signed                                      |
//! | 4   | num_hydrogen_neighbors | adjacent hydrogen vertices                  |
//! | 5   | num_radical_electrons  | bracket atoms only, valence deficit         |
//! | 6   | hybridization_code     | C/N/O/P/S: 1 sp, 2 sp2, 3 sp3; otherwise 0  |
//! | 7   | is_aromatic            | 0/1                                         |
//! | 8   | is_in_ring             | 0/1 (endpoint of a non-bridge bond)         |
//!
//! Hybridization is a bond-pattern heuristic: a triple bond or two double
//! bonds give sp, one double bond or aromaticity gives sp2, anything else
//! sp3.

use crate::elements;
use crate::molecule::{valence_deficit, BondOrder, MolecularGraph};
use crate::rings::ring_membership;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FEATURE_DIM: usize = 9;
pub const SCHEMA_VERSION: u32 = 1;
pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "atomic_number",
    "chirality_code",
    "total_degree",
    "formal_charge",
    "num_hydrogen_neighbors",
    "num_radical_electrons",
    "hybridization_code",
    "is_aromatic",
    "is_in_ring",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("EmptyDataset: no atoms to normalize")]
    EmptyDataset,
    #[error("feature width {found} does not match normalization stats width {expected}")]
    WidthMismatch { expected: usize, found: usize },
}

/// Row-major per-atom feature rows for one molecule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub molecule_id: String,
    pub width: usize,
    pub values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(molecule_id: impl Into<String>, width: usize, values: Vec<f64>) -> Self {
        assert!(width > 0 && values.len().is_multiple_of(width));
        FeatureMatrix {
            molecule_id: molecule_id.into(),
            width,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.width
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.width)
    }
}

/// Raw integer-valued features, one row per atom in graph order. The graph
/// is expected to be hydrogen-expanded.
pub fn featurize(graph: &MolecularGraph, molecule_id: impl Into<String>) -> FeatureMatrix {
    let adj = graph.adjacency();
    let half_sums = graph.bond_order_half_sums();
    let rings = ring_membership(graph);
    let mut values = Vec::with_capacity(graph.atom_count() * FEATURE_DIM);

    for (i, atom) in graph.atoms.iter().enumerate() {
        let neighbors = &adj[i];
        let h_neighbors = neighbors
            .iter()
            .filter(|(w, _)| graph.atoms[*w].is_hydrogen())
            .count();

        let radicals = match (atom.explicit_h_count, elements::default_valence(atom.element)) {
            (Some(_), Some(dv)) if !atom.is_hydrogen() => {
                valence_deficit(dv, half_sums[i], atom.formal_charge)
            }
            _ => 0,
        };

        let hybridization = if elements::has_hybridization_code(atom.element) {
            let mut doubles = 0;
            let mut triples = 0;
            let mut aromatic_bond = false;
            for &(_, b) in neighbors {
                match graph.bonds[b].order {
                    BondOrder::Double => doubles += 1,
                    BondOrder::Triple => triples += 1,
                    BondOrder::Aromatic => aromatic_bond = true,
                    BondOrder::Single => {}
                }
            }
            if triples > 0 || doubles >= 2 {
                1
            } else if doubles == 1 || atom.aromatic || aromatic_bond {
                2
            } else {
                3
            }
        } else {
            0
        };

        values.extend_from_slice(&[
            f64::from(atom.element),
            f64::from(atom.chirality.code()),
            neighbors.len() as f64,
            f64::from(atom.formal_charge),
            h_neighbors as f64,
            f64::from(radicals),
            f64::from(hybridization),
            f64::from(u8::from(atom.aromatic)),
            f64::from(u8::from(rings.atom_in_ring[i])),
        ]);
    }
    FeatureMatrix::new(molecule_id, FEATURE_DIM, values)
}

/// Column statistics and the ball radius used to map raw features into the
/// closed unit ball. Persist these to transform new molecules identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub max_norm: f64,
}

impl NormalizationStats {
    pub fn width(&self) -> usize {
        self.means.len()
    }

    fn standardize_row(&self, row: &[f64], out: &mut [f64]) {
        for (k, (&x, o)) in row.iter().zip(out.iter_mut()).enumerate() {
            *o = if self.stds[k] > 0.0 {
                (x - self.means[k]) / self.stds[k]
            } else {
                0.0
            };
        }
    }

    /// Applies z-scoring and ball scaling. Any row that still ends up
    /// outside the unit ball (rounding, or a molecule unseen when the stats
    /// were fitted) is projected radially onto the unit sphere.
    pub fn apply(&self, features: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
        if features.width != self.width() {
            return Err(FeatureError::WidthMismatch {
                expected: self.width(),
                found: features.width,
            });
        }
        let mut values = vec![0.0; features.values.len()];
        for (row, out) in features
            .iter_rows()
            .zip(values.chunks_exact_mut(features.width))
        {
            self.standardize_row(row, out);
            if self.max_norm > 0.0 {
                for v in out.iter_mut() {
                    *v /= self.max_norm;
                }
            }
            clamp_to_unit_ball(out);
        }
        Ok(FeatureMatrix::new(
            features.molecule_id.clone(),
            features.width,
            values,
        ))
    }
}

pub fn euclidean_norm(row: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &v in row {
        acc += v * v;
    }
    acc.sqrt()
}

fn clamp_to_unit_ball(row: &mut [f64]) {
    let norm = euclidean_norm(row);
    if norm <= 1.0 {
        return;
    }
    for v in row.iter_mut() {
        *v /= norm;
    }
    while euclidean_norm(row) > 1.0 {
        for v in row.iter_mut() {
            *v *= 1.0 - f64::EPSILON;
        }
    }
}

/// Fits z-score statistics over every atom of every molecule (population
/// standard deviation, zero-variance columns map to 0), then scales all rows
/// by the largest resulting row norm. Sums run in dataset order so the
/// result does not depend on how featurization was scheduled.
pub fn fit_normalization(all: &[FeatureMatrix]) -> Result<NormalizationStats, FeatureError> {
    let width = all.first().map_or(FEATURE_DIM, |m| m.width);
    if let Some(bad) = all.iter().find(|m| m.width != width) {
        return Err(FeatureError::WidthMismatch {
            expected: width,
            found: bad.width,
        });
    }
    let count: usize = all.iter().map(FeatureMatrix::rows).sum();
    if count == 0 {
        return Err(FeatureError::EmptyDataset);
    }
    let n = count as f64;
    let mut sums = vec![0.0; width];
    for row in all.iter().flat_map(FeatureMatrix::iter_rows) {
        for (s, &x) in sums.iter_mut().zip(row) {
            *s += x;
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / n).collect();
    let mut sq = vec![0.0; width];
    for row in all.iter().flat_map(FeatureMatrix::iter_rows) {
        for k in 0..width {
            let d = row[k] - means[k];
            sq[k] += d * d;
        }
    }
    let stds: Vec<f64> = sq
        .iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            // exact-constant columns can leave rounding residue
            if sd > 1e-12 {
                sd
            } else {
                0.0
            }
        })
        .collect();

    let mut stats = NormalizationStats {
        schema_version: SCHEMA_VERSION,
        feature_names: if width == FEATURE_DIM {
            FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
        } else {
            (0..width).map(|k| format!("f{k}")).collect()
        },
        means,
        stds,
        max_norm: 0.0,
    };
    let mut buf = vec![0.0; width];
    let mut max_norm: f64 = 0.0;
    for row in all.iter().flat_map(FeatureMatrix::iter_rows) {
        stats.standardize_row(row, &mut buf);
        max_norm = max_norm.max(euclidean_norm(&buf));
    }
    stats.max_norm = max_norm;
    Ok(stats)
}

/// Fits [`NormalizationStats`] on `all` and applies them.
pub fn normalize_dataset(
    all: &[FeatureMatrix],
) -> Result<(Vec<FeatureMatrix>, NormalizationStats), FeatureError> {
    let stats = fit_normalization(all)?;
    let out = all
        .iter()
        .map(|m| stats.apply(m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_with_hydrogens;

    fn feats(smiles: &str) -> FeatureMatrix {
        featurize(&parse_with_hydrogens(smiles).unwrap(), smiles)
    }

    #[test]
    fn methane() {
        let f = feats("C");
        assert_eq!(f.rows(), 5);
        assert_eq!(f.row(0), &[6., 0., 4., 0., 4., 0., 3., 0., 0.]);
        for i in 1..5 {
            assert_eq!(f.row(i), &[1., 0., 1., 0., 0., 0., 0., 0., 0.]);
        }
    }

    #[test]
    fn benzene_carbon() {
        let f = feats("c1ccccc1");
        for i in 0..6 {
            assert_eq!(f.row(i), &[6., 0., 3., 0., 1., 0., 2., 1., 1.]);
        }
        for i in 6..12 {
            assert_eq!(f.row(i), &[1., 0., 1., 0., 0., 0., 0., 0., 0.]);
        }
    }

    #[test]
    fn hybridization_heuristic() {
        let f = feats("C#N");
        assert_eq!(f.row(0)[6], 1.0);
        assert_eq!(f.row(1)[6], 1.0);
        let f = feats("C=C=O");
        assert_eq!(f.row(1)[6], 1.0);
        assert_eq!(f.row(2)[6], 2.0);
        let f = feats("CCl");
        assert_eq!(f.row(1)[6], 0.0);
    }

    #[test]
    fn radicals_charge_and_chirality() {
        let f = feats("[CH3]");
        assert_eq!(f.row(0)[5], 1.0);
        let f = feats("C[O-]");
        assert_eq!(f.row(1)[3], -1.0);
        assert_eq!(f.row(1)[5], 0.0);
        let f = feats("[NH4+]");
        assert_eq!(f.row(0)[5], 0.0);
        assert_eq!(f.row(0)[4], 4.0);
        let f = feats("N[C@@H](C)C(=O)O");
        assert_eq!(f.row(1)[1], 2.0);
        assert_eq!(f.row(1)[5], 0.0);
    }

    #[test]
    fn width_is_nine_and_rows_match_atoms() {
        let g = parse_with_hydrogens("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        let f = featurize(&g, "aspirin");
        assert_eq!(f.width, 9);
        assert_eq!(f.rows(), g.atom_count());
    }

    #[test]
    fn identical_atoms_normalize_to_zero() {
        let m = FeatureMatrix::new("a", 9, [1.0, 2.0, 3.0, 0., 0., 0., 0., 0., 0.].repeat(4));
        let (out, stats) = normalize_dataset(&[m.clone(), m]).unwrap();
        assert!(out.iter().all(|m| m.values.iter().all(|&v| v == 0.0)));
        assert_eq!(stats.max_norm, 0.0);
    }

    #[test]
    fn single_atom_is_zero_after_centering() {
        // a lone row has zero variance in every column
        let m = FeatureMatrix::new("a", 3, vec![4.0, -1.0, 2.0]);
        let (out, _) = normalize_dataset(&[m]).unwrap();
        assert_eq!(out[0].values, vec![0.0; 3]);
    }

    #[test]
    fn two_molecules_reach_unit_ball() {
        let (out, stats) = normalize_dataset(&[feats("CC(O)=O"), feats("c1ccncc1")]).unwrap();
        let norms: Vec<f64> = out
            .iter()
            .flat_map(|m| m.iter_rows().map(euclidean_norm).collect::<Vec<_>>())
            .collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        assert!((max - 1.0).abs() <= 1e-12, "max norm {max}");
        assert!(norms.iter().all(|&n| n <= 1.0));
        assert!(stats.max_norm > 0.0);
        assert_eq!(stats.feature_names.len(), 9);
    }

    #[test]
    fn empty_dataset_errors() {
        assert_eq!(normalize_dataset(&[]).unwrap_err(), FeatureError::EmptyDataset);
        let empty = FeatureMatrix::new("e", 9, vec![]);
        assert_eq!(
            normalize_dataset(&[empty]).unwrap_err(),
            FeatureError::EmptyDataset
        );
    }

    #[test]
    fn stats_round_trip_json() {
        let (_, stats) = normalize_dataset(&[feats("CCO")]).unwrap();
        let text = serde_json::to_string(&stats).unwrap();
        let back: NormalizationStats = serde_json::from_str(&text).unwrap();
        assert_eq!(back, stats);
    }
}
