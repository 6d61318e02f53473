//! Euler Characteristic Transform descriptors for molecules.
//!
//! The pipeline runs SMILES → hydrogen-explicit [`MolecularGraph`] →
//! 9-dimensional atom features → dataset-wide unit-ball scaling → ECT over
//! random feature-space directions, and evaluates the resulting feature
//! tables with a cross-validated ridge regressor.

pub mod dataset;
pub mod ect;
pub mod elements;
pub mod features;
pub mod formats;
pub mod molecule;
pub mod pipeline;
pub mod regression;
pub mod rings;
pub mod smiles;
pub mod synthetic;

pub use ect::{
    compute_ecc, compute_ect, ect_batch, sample_directions, DirectionSet, EctDescriptor, EctError,
    EctInput, EctTable, ThresholdGrid,
};
pub use features::{featurize, normalize_dataset, FeatureMatrix, NormalizationStats};
pub use molecule::{add_implicit_hydrogens, Atom, Bond, BondOrder, MolecularGraph};
pub use smiles::{parse_smiles, SmilesError};
