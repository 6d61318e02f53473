use crate::error::CliError;
use crate::manifest::{manifest_path, sibling, RunManifest, StagedOutputs};
use crate::{ColumnArgs, CvArgs, EctArgs, OutputFormat, ParseArgs, PlotArgs, SweepArgs, SynthArgs};
use ectmol::dataset::{
    apply_target_transform, concat_features, load_csv, Block, CsvColumns, Dataset, IngestReport,
    TargetTransform,
};
use ectmol::ect::GENERATOR_ID;
use ectmol::features::fit_normalization;
use ectmol::formats::{load_fingerprint_matrix, read_feature_file, write_ect_binary, write_ect_csv};
use ectmol::pipeline::{build_graphs, prepare_inputs, run_ect, EctConfig, GraphOptions};
use ectmol::regression::{cross_validate, format_reports, sensitivity_sweep, CvConfig, CvReport, SweepRow};
use ectmol::synthetic::{topology_csv, topology_dataset};
use ectmol::{
    add_implicit_hydrogens, compute_ect, featurize, parse_smiles, sample_directions, MolecularGraph,
    NormalizationStats, ThresholdGrid,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

fn columns(c: &ColumnArgs) -> CsvColumns {
    CsvColumns {
        smiles: c.smiles_column.clone(),
        target: c.target_column.clone(),
        id: c.id_column.clone(),
    }
}

fn json_bytes(value: &impl Serialize) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    text.into_bytes()
}

fn check_cv_flags(folds: usize, lambda: f64) -> Result<(), CliError> {
    if folds < 2 {
        return Err(CliError::Usage(format!("--folds must be at least 2, got {folds}")));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(CliError::Usage(format!("--lambda must be a finite value >= 0, got {lambda}")));
    }
    Ok(())
}

fn graph_line(g: &MolecularGraph) -> String {
    format!(
        "atoms={} bonds={} chi={} components={}",
        g.atom_count(),
        g.bond_count(),
        g.euler_characteristic(),
        g.connected_components()
    )
}

pub fn parse(a: &ParseArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("parse", a, jobs);
    let mut out = String::new();
    if let Some(path) = &a.file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        manifest.input(path)?;
        for (i, line) in text.lines().enumerate() {
            let s = line.trim();
            if s.is_empty() {
                continue;
            }
            let g = parse_smiles(s).map_err(|e| CliError::Input(format!("line {}: {e}", i + 1)))?;
            out.push_str(&graph_line(&add_implicit_hydrogens(&g)));
            out.push('\n');
        }
    } else {
        let s = a.smiles.as_deref().unwrap_or_default();
        let g = parse_smiles(s)?;
        out.push_str(&graph_line(&add_implicit_hydrogens(&g)));
        out.push('\n');
    }
    if let Some(path) = &a.manifest {
        StagedOutputs::default().commit(manifest, path)?;
    }
    print!("{out}");
    Ok(())
}

#[derive(Serialize)]
struct Rejected {
    line: usize,
    mol_id: String,
    error: String,
}

#[derive(Serialize)]
struct IngestSidecar {
    #[serde(flatten)]
    report: IngestReport,
    molecules: usize,
    rejected_smiles: Vec<Rejected>,
}

#[derive(Serialize)]
struct DirectionInfo<'a> {
    count: usize,
    dimension: usize,
    seed: u64,
    generator_id: &'a str,
}

#[derive(Serialize)]
struct NormSidecar<'a> {
    #[serde(flatten)]
    stats: &'a NormalizationStats,
    directions: DirectionInfo<'a>,
    thresholds: &'a [f64],
}

pub fn ect(a: &EctArgs, jobs: Option<usize>) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("ect", a, jobs).seed("directions", a.seed);
    manifest.input(&a.input)?;
    let (dataset, report) = load_csv(&a.input, &columns(&a.columns))?;
    let opts = GraphOptions {
        largest_component: a.largest_component,
    };
    let (graphs, rejected) = build_graphs(&dataset.records, opts, a.skip_invalid)?;
    let mut skip = vec![false; dataset.len()];
    let rejected_smiles = rejected
        .iter()
        .map(|&i| {
            skip[i] = true;
            let r = &dataset.records[i];
            Rejected {
                line: r.row_origin,
                mol_id: r.mol_id.clone(),
                error: parse_smiles(&r.smiles).err().map(|e| e.to_string()).unwrap_or_default(),
            }
        })
        .collect();
    let ids: Vec<String> = dataset
        .records
        .iter()
        .zip(&skip)
        .filter(|(_, &s)| !s)
        .map(|(r, _)| r.mol_id.clone())
        .collect();
    if ids.is_empty() {
        return Err(ectmol::dataset::DatasetError::EmptyAfterFiltering.into());
    }
    let cfg = EctConfig {
        directions: a.dirs,
        thresholds: a.thresholds,
        seed: a.seed,
    };
    let run = run_ect(&graphs, &ids, &cfg)?;

    let mut table = Vec::new();
    match a.format {
        OutputFormat::Csv => write_ect_csv(&run.table, &mut table)?,
        OutputFormat::Bin => write_ect_binary(&run.table, &mut table).map_err(|e| CliError::io(&a.out, e))?,
    }
    let norm = NormSidecar {
        stats: &run.stats,
        directions: DirectionInfo {
            count: run.directions.count(),
            dimension: run.directions.dimension,
            seed: run.directions.seed,
            generator_id: GENERATOR_ID,
        },
        thresholds: run.grid.values(),
    };
    let ingest = IngestSidecar {
        report,
        molecules: ids.len(),
        rejected_smiles,
    };
    let mut staged = StagedOutputs::default();
    staged.write(&a.out, &table)?;
    staged.write(&sibling(&a.out, "norm.json"), &json_bytes(&norm))?;
    staged.write(&sibling(&a.out, "ingest.json"), &json_bytes(&ingest))?;
    staged.commit(manifest, &manifest_path(&a.out))?;
    eprintln!(
        "wrote {} molecules x {} columns to {}",
        run.table.rows(),
        run.table.width(),
        a.out.display()
    );
    Ok(())
}

fn load_targets(path: &Path, cols: &ColumnArgs, transform: TargetTransform) -> Result<Dataset, CliError> {
    let (dataset, _) = load_csv(path, &columns(cols))?;
    Ok(apply_target_transform(&dataset, transform)?)
}

#[derive(Serialize)]
struct CvOutput {
    #[serde(flatten)]
    report: CvReport,
    target_transform: TargetTransform,
    blocks: Vec<Block>,
}

pub fn cv(a: &CvArgs, jobs: Option<usize>) -> Result<(), CliError> {
    check_cv_flags(a.folds, a.lambda)?;
    let mut manifest = RunManifest::new("cv", a, jobs).seed("shuffle", a.seed);
    manifest.input(&a.features)?;
    if let Some(fp) = &a.fingerprint {
        manifest.input(fp)?;
    }
    manifest.input(&a.targets)?;
    let transform = a.target.transform();
    let dataset = load_targets(&a.targets, &a.columns, transform)?;
    let ids = dataset.mol_ids();
    let mut table = read_feature_file(&a.features)?;
    table.check_alignment(&ids)?;
    if let Some(fp) = &a.fingerprint {
        let block = load_fingerprint_matrix(fp, &ids)?;
        table = concat_features(&table, &block, "fingerprint")?;
    }
    let cfg = CvConfig {
        folds: a.folds,
        shuffle_seed: a.seed,
        lambda: a.lambda,
    };
    let report = cross_validate(table.rows.view(), &dataset.targets(), &cfg)?
        .labeled(&dataset.name, &table.label());
    let text = format_reports(std::slice::from_ref(&report));
    let out = CvOutput {
        report,
        target_transform: transform,
        blocks: table.blocks.clone(),
    };
    let mut staged = StagedOutputs::default();
    staged.write(&a.out, &json_bytes(&out))?;
    staged.write(&a.out.with_extension("txt"), text.as_bytes())?;
    staged.commit(manifest, &manifest_path(&a.out))?;
    print!("{text}");
    Ok(())
}

pub fn plot(a: &PlotArgs, jobs: Option<usize>) -> Result<(), CliError> {
    if let Some(k) = a.direction_index {
        if k >= a.dirs {
            return Err(CliError::Usage(format!(
                "--direction-index {k} is out of range for {} directions",
                a.dirs
            )));
        }
    }
    let mut manifest = RunManifest::new("plot", a, jobs).seed("directions", a.seed);
    let graph = add_implicit_hydrogens(&parse_smiles(&a.smiles)?);
    let raw = featurize(&graph, "query");
    let stats: NormalizationStats = match &a.stats {
        Some(path) => {
            manifest.input(path)?;
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("MalformedFile: {}: {e}", path.display())))?
        }
        None => fit_normalization(std::slice::from_ref(&raw))?,
    };
    let features = stats.apply(&raw)?;
    let dirs = sample_directions(features.width, a.dirs, a.seed)?;
    let grid = ThresholdGrid::uniform(a.thresholds)?;
    let ect = compute_ect(&features, &graph.edge_list(), &dirs, &grid)?;
    let svg = match a.direction_index {
        Some(k) => crate::plot::ecc_svg(grid.values(), ect.curve(k), &format!("{} direction {k}", a.smiles)),
        None => crate::plot::heatmap_svg(&ect, &a.smiles),
    };
    let mut staged = StagedOutputs::default();
    staged.write(&a.out, svg.as_bytes())?;
    staged.commit(manifest, &manifest_path(&a.out))
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("directions,thresholds,width,rmse_mean,rmse_std,r2_mean,r2_std\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.directions, r.thresholds, r.width, r.rmse_mean, r.rmse_std, r.r2_mean, r.r2_std
        );
    }
    out
}

pub fn sweep(a: &SweepArgs, jobs: Option<usize>) -> Result<(), CliError> {
    check_cv_flags(a.folds, a.lambda)?;
    let mut manifest = RunManifest::new("sweep", a, jobs)
        .seed("directions", a.seed)
        .seed("shuffle", a.cv_seed);
    manifest.input(&a.input)?;
    let dataset = load_targets(&a.input, &a.columns, a.target.transform())?;
    let opts = GraphOptions {
        largest_component: a.largest_component,
    };
    let (graphs, _) = build_graphs(&dataset.records, opts, false)?;
    let (inputs, _) = prepare_inputs(&graphs, &dataset.mol_ids())?;
    let cfg = CvConfig {
        folds: a.folds,
        shuffle_seed: a.cv_seed,
        lambda: a.lambda,
    };
    let rows = sensitivity_sweep(&inputs, &dataset.targets(), &a.dirs_list.0, &a.thresholds_list.0, a.seed, &cfg)?;
    let mut staged = StagedOutputs::default();
    staged.write(&a.out, sweep_csv(&rows).as_bytes())?;
    staged.commit(manifest, &manifest_path(&a.out))?;
    println!("{:>10} {:>10} {:>6} {:>17} {:>17}", "directions", "thresholds", "width", "RMSE", "R2");
    for r in &rows {
        println!(
            "{:>10} {:>10} {:>6} {:>17} {:>17}",
            r.directions,
            r.thresholds,
            r.width,
            format!("{:.3} ± {:.3}", r.rmse_mean, r.rmse_std),
            format!("{:.3} ± {:.3}", r.r2_mean, r.r2_std)
        );
    }
    Ok(())
}

pub fn synth(a: &SynthArgs, jobs: Option<usize>) -> Result<(), CliError> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    if !a.noise.is_finite() || a.noise < 0.0 {
        return Err(CliError::Usage(format!("--noise must be a finite value >= 0, got {}", a.noise)));
    }
    let manifest = RunManifest::new("synth", a, jobs).seed("generator", a.seed);
    let csv = topology_csv(&topology_dataset(a.n, a.seed, a.noise));
    let mut staged = StagedOutputs::default();
    staged.write(&a.out, csv.as_bytes())?;
    staged.commit(manifest, &manifest_path(&a.out))
}
