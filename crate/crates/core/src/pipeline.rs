//! Dataset-level glue: SMILES records to normalized ECT inputs and tables.

use crate::dataset::MoleculeRecord;
use crate::ect::{ect_batch, sample_directions, DirectionSet, EctError, EctInput, EctTable, ThresholdGrid};
use crate::features::{featurize, fit_normalization, FeatureError, NormalizationStats};
use crate::molecule::{add_implicit_hydrogens, MolecularGraph};
use crate::smiles::{parse_smiles, SmilesError};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("line {line} ({mol_id}): {source}")]
    Smiles {
        line: usize,
        mol_id: String,
        #[source]
        source: SmilesError,
    },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Ect(#[from] EctError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GraphOptions {
    /// Keep only the largest `.`-separated fragment.
    pub largest_component: bool,
}

/// Parses every record into a hydrogen-expanded graph. With `skip_invalid`
/// unparsable records are returned separately instead of failing the run.
pub fn build_graphs(
    records: &[MoleculeRecord],
    opts: GraphOptions,
    skip_invalid: bool,
) -> Result<(Vec<MolecularGraph>, Vec<usize>), PipelineError> {
    let parsed: Vec<Result<MolecularGraph, SmilesError>> = records
        .par_iter()
        .map(|r| {
            parse_smiles(&r.smiles).map(|g| {
                let g = if opts.largest_component {
                    g.largest_component()
                } else {
                    g
                };
                add_implicit_hydrogens(&g)
            })
        })
        .collect();
    let mut graphs = Vec::with_capacity(parsed.len());
    let mut rejected = Vec::new();
    for (i, p) in parsed.into_iter().enumerate() {
        match p {
            Ok(g) => graphs.push(g),
            Err(_) if skip_invalid => rejected.push(i),
            Err(source) => {
                return Err(PipelineError::Smiles {
                    line: records[i].row_origin,
                    mol_id: records[i].mol_id.clone(),
                    source,
                })
            }
        }
    }
    Ok((graphs, rejected))
}

/// Featurizes graphs (in parallel), fits dataset-wide scaling, and returns
/// the transform-ready inputs with the fitted statistics.
pub fn prepare_inputs(
    graphs: &[MolecularGraph],
    ids: &[String],
) -> Result<(Vec<EctInput>, NormalizationStats), PipelineError> {
    let raw: Vec<_> = graphs
        .par_iter()
        .zip(ids.par_iter())
        .map(|(g, id)| featurize(g, id.clone()))
        .collect();
    let stats = fit_normalization(&raw)?;
    let inputs = raw
        .par_iter()
        .zip(graphs.par_iter())
        .map(|(f, g)| {
            Ok(EctInput {
                features: stats.apply(f)?,
                edges: g.edge_list(),
            })
        })
        .collect::<Result<Vec<_>, FeatureError>>()?;
    Ok((inputs, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EctConfig {
    pub directions: usize,
    pub thresholds: usize,
    pub seed: u64,
}

impl Default for EctConfig {
    fn default() -> Self {
        EctConfig {
            directions: crate::ect::DEFAULT_DIRECTIONS,
            thresholds: crate::ect::DEFAULT_THRESHOLDS,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EctRun {
    pub table: EctTable,
    pub stats: NormalizationStats,
    pub directions: DirectionSet,
    pub grid: ThresholdGrid,
}

/// Full featurize → normalize → transform run over prepared graphs.
pub fn run_ect(
    graphs: &[MolecularGraph],
    ids: &[String],
    cfg: &EctConfig,
) -> Result<EctRun, PipelineError> {
    let (inputs, stats) = prepare_inputs(graphs, ids)?;
    let directions = sample_directions(stats.width(), cfg.directions, cfg.seed)?;
    let grid = ThresholdGrid::uniform(cfg.thresholds)?;
    let table = ect_batch(&inputs, &directions, &grid)?;
    Ok(EctRun {
        table,
        stats,
        directions,
        grid,
    })
}
