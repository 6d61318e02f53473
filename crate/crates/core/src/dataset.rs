//! Dataset ingestion, target transforms and feature-block assembly.

use ndarray::{concatenate, Array2, Axis};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::Read;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("IoFailure: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("MissingColumn: no column named {0:?}")]
    MissingColumn(String),
    #[error("EmptyAfterFiltering: no usable rows remain")]
    EmptyAfterFiltering,
    #[error("NonPositiveTarget: record {mol_id} has target {value}, log10 needs > 0")]
    NonPositiveTarget { mol_id: String, value: f64 },
    #[error("targets already carry the {0:?} transform")]
    AlreadyTransformed(TargetTransform),
    #[error("RowCountMismatch: expected {expected} rows, found {found}")]
    RowCountMismatch { expected: usize, found: usize },
    #[error("UnknownMolId: {0:?} is not present on both sides")]
    UnknownMolId(String),
    #[error("DuplicateMolId: {0:?} appears more than once")]
    DuplicateMolId(String),
    #[error("MalformedFile: {0}")]
    MalformedFile(String),
}

impl DatasetError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DatasetError::Io { .. } => "IoFailure",
            DatasetError::MissingColumn(_) => "MissingColumn",
            DatasetError::EmptyAfterFiltering => "EmptyAfterFiltering",
            DatasetError::NonPositiveTarget { .. } => "NonPositiveTarget",
            DatasetError::AlreadyTransformed(_) => "AlreadyTransformed",
            DatasetError::RowCountMismatch { .. } => "RowCountMismatch",
            DatasetError::UnknownMolId(_) => "UnknownMolId",
            DatasetError::DuplicateMolId(_) => "DuplicateMolId",
            DatasetError::MalformedFile(_) => "MalformedFile",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetTransform {
    #[default]
    Identity,
    Log10,
}

impl std::fmt::Display for TargetTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TargetTransform::Identity => "identity",
            TargetTransform::Log10 => "log10",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeRecord {
    pub mol_id: String,
    pub smiles: String,
    pub target: f64,
    /// 1-based line in the source file (the header is line 1).
    pub row_origin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub records: Vec<MoleculeRecord>,
    pub transform: TargetTransform,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.target).collect()
    }

    pub fn mol_ids(&self) -> Vec<String> {
        self.records.iter().map(|r| r.mol_id.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub source_rows: usize,
    pub kept: usize,
    pub dropped: usize,
    pub deduplicated: usize,
    /// Source lines dropped for a missing SMILES or target.
    pub dropped_lines: Vec<usize>,
    /// Source lines whose SMILES repeated an earlier kept row.
    pub duplicate_lines: Vec<usize>,
}

/// Column names to read. With no id column the `mol_id` header is used if
/// present, otherwise the 0-based data-row index becomes the id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvColumns {
    pub smiles: String,
    pub target: String,
    pub id: Option<String>,
}

impl Default for CsvColumns {
    fn default() -> Self {
        CsvColumns {
            smiles: "smiles".into(),
            target: "target".into(),
            id: None,
        }
    }
}

pub fn load_csv(path: &Path, columns: &CsvColumns) -> Result<(Dataset, IngestReport), DatasetError> {
    let file = std::fs::File::open(path).map_err(|e| DatasetError::io(path, e))?;
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned());
    read_csv(file, &name, columns)
}

fn csv_error(e: csv::Error) -> DatasetError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => DatasetError::Io {
            path: PathBuf::new(),
            source: io,
        },
        other => DatasetError::MalformedFile(format!("{other:?}")),
    }
}

/// Reads a dataset from any CSV source. Rows with an empty SMILES or an
/// empty, unparsable or non-finite target are dropped; repeated SMILES
/// (exact string match) keep their first occurrence.
pub fn read_csv<R: Read>(
    reader: R,
    name: &str,
    columns: &CsvColumns,
) -> Result<(Dataset, IngestReport), DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let find = |col: &str| {
        headers
            .iter()
            .position(|h| h.trim() == col)
            .ok_or_else(|| DatasetError::MissingColumn(col.to_string()))
    };
    let smiles_col = find(&columns.smiles)?;
    let target_col = find(&columns.target)?;
    let id_col = match &columns.id {
        Some(c) => Some(find(c)?),
        None => find("mol_id").ok(),
    };

    let mut report = IngestReport::default();
    let mut records = Vec::new();
    let mut seen_smiles = HashSet::new();
    let mut seen_ids = HashSet::new();
    for (index, row) in rdr.records().enumerate() {
        let row = row.map_err(csv_error)?;
        let line = index + 2;
        report.source_rows += 1;
        let smiles = row.get(smiles_col).unwrap_or("").trim();
        let target = row
            .get(target_col)
            .and_then(|t| t.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite());
        let Some(target) = target.filter(|_| !smiles.is_empty()) else {
            report.dropped += 1;
            report.dropped_lines.push(line);
            continue;
        };
        if !seen_smiles.insert(smiles.to_string()) {
            report.deduplicated += 1;
            report.duplicate_lines.push(line);
            continue;
        }
        let mol_id = match id_col {
            Some(c) => row.get(c).unwrap_or("").trim().to_string(),
            None => index.to_string(),
        };
        if !seen_ids.insert(mol_id.clone()) {
            return Err(DatasetError::DuplicateMolId(mol_id));
        }
        records.push(MoleculeRecord {
            mol_id,
            smiles: smiles.to_string(),
            target,
            row_origin: line,
        });
    }
    report.kept = records.len();
    if records.is_empty() {
        return Err(DatasetError::EmptyAfterFiltering);
    }
    Ok((
        Dataset {
            name: name.to_string(),
            records,
            transform: TargetTransform::Identity,
        },
        report,
    ))
}

/// Writes `mol_id,smiles,target`; targets use the shortest round-trip
/// decimal form, so reloading reproduces them exactly.
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(["mol_id", "smiles", "target"])
        .map_err(csv_error)?;
    for r in &dataset.records {
        w.write_record([r.mol_id.as_str(), r.smiles.as_str(), &r.target.to_string()])
            .map_err(csv_error)?;
    }
    w.flush().map_err(|e| DatasetError::io(path, e))
}

pub fn apply_target_transform(
    dataset: &Dataset,
    transform: TargetTransform,
) -> Result<Dataset, DatasetError> {
    if transform == TargetTransform::Identity {
        return Ok(dataset.clone());
    }
    if dataset.transform != TargetTransform::Identity {
        return Err(DatasetError::AlreadyTransformed(dataset.transform));
    }
    let records = dataset
        .records
        .iter()
        .map(|r| {
            if r.target <= 0.0 {
                return Err(DatasetError::NonPositiveTarget {
                    mol_id: r.mol_id.clone(),
                    value: r.target,
                });
            }
            Ok(MoleculeRecord {
                target: r.target.log10(),
                ..r.clone()
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(Dataset {
        name: dataset.name.clone(),
        records,
        transform,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub label: String,
    pub width: usize,
}

/// Model-ready feature rows with named column blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    /// Absent when the source format carries no identifiers.
    pub mol_ids: Option<Vec<String>>,
    pub rows: Array2<f64>,
    pub blocks: Vec<Block>,
}

impl FeatureTable {
    pub fn new(mol_ids: Option<Vec<String>>, rows: Array2<f64>, label: &str) -> Self {
        let width = rows.ncols();
        FeatureTable {
            mol_ids,
            rows,
            blocks: vec![Block {
                label: label.to_string(),
                width,
            }],
        }
    }

    pub fn from_ect(table: &crate::ect::EctTable) -> Self {
        let rows = Array2::from_shape_vec(
            (table.rows(), table.width()),
            table.values.iter().map(|&v| f64::from(v)).collect(),
        )
        .expect("ECT table shape");
        FeatureTable::new(Some(table.mol_ids.clone()), rows, "ect")
    }

    pub fn nrows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn width(&self) -> usize {
        self.rows.ncols()
    }

    /// `"ect+fingerprint"` style label naming every block in order.
    pub fn label(&self) -> String {
        self.blocks
            .iter()
            .map(|b| b.label.as_str())
            .collect::<Vec<_>>()
            .join("+")
    }

    /// Checks that rows line up with `ids` (order included). Tables without
    /// ids only need the right row count.
    pub fn check_alignment(&self, ids: &[String]) -> Result<(), DatasetError> {
        if self.nrows() != ids.len() {
            return Err(DatasetError::RowCountMismatch {
                expected: ids.len(),
                found: self.nrows(),
            });
        }
        if let Some(own) = &self.mol_ids {
            if let Some((a, _)) = own.iter().zip(ids).find(|(a, b)| a != b) {
                return Err(DatasetError::UnknownMolId(a.clone()));
            }
        }
        Ok(())
    }
}

/// Horizontal concatenation, `table` block(s) first. The appended block is
/// copied unchanged.
pub fn concat_features(
    table: &FeatureTable,
    block: &Array2<f64>,
    label: &str,
) -> Result<FeatureTable, DatasetError> {
    if block.nrows() != table.nrows() {
        return Err(DatasetError::RowCountMismatch {
            expected: table.nrows(),
            found: block.nrows(),
        });
    }
    let rows = concatenate(Axis(1), &[table.rows.view(), block.view()])
        .expect("row counts checked");
    let mut blocks = table.blocks.clone();
    if block.ncols() > 0 {
        blocks.push(Block {
            label: label.to_string(),
            width: block.ncols(),
        });
    }
    Ok(FeatureTable {
        mol_ids: table.mol_ids.clone(),
        rows,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<(Dataset, IngestReport), DatasetError> {
        read_csv(text.as_bytes(), "t", &CsvColumns::default())
    }

    #[test]
    fn duplicates_keep_first() {
        let (ds, rep) = read("smiles,target\nC,1\nCC,2\nC,3\nCCO,4\nCCC,5\n").unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(rep.deduplicated, 1);
        assert_eq!(rep.duplicate_lines, vec![4]);
        assert_eq!(ds.records[0].target, 1.0);
        assert_eq!(ds.mol_ids(), vec!["0", "1", "3", "4"]);
        assert_eq!(rep.kept + rep.dropped + rep.deduplicated, rep.source_rows);
    }

    #[test]
    fn blank_target_alone_is_empty() {
        let err = read("smiles,target\nC,\n").unwrap_err();
        assert_eq!(err.name(), "EmptyAfterFiltering");
    }

    #[test]
    fn unparsable_and_missing_values_dropped() {
        let (ds, rep) = read("smiles,target\nC,abc\n,3\nCC,nan\nCCC,inf\nCCCC,2.5\nN\n").unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(rep.dropped, 5);
        assert_eq!(rep.dropped_lines, vec![2, 3, 4, 5, 7]);
    }

    #[test]
    fn missing_column() {
        let err = read("smi,target\nC,1\n").unwrap_err();
        assert!(matches!(err, DatasetError::MissingColumn(c) if c == "smiles"));
        let cols = CsvColumns {
            id: Some("name".into()),
            ..CsvColumns::default()
        };
        let err = read_csv("smiles,target\nC,1\n".as_bytes(), "t", &cols).unwrap_err();
        assert_eq!(err.name(), "MissingColumn");
    }

    #[test]
    fn id_column_used_when_present() {
        let (ds, _) = read("mol_id,smiles,target\nA,C,1\nB,CC,2\n").unwrap();
        assert_eq!(ds.mol_ids(), vec!["A", "B"]);
        let err = read("mol_id,smiles,target\nA,C,1\nA,CC,2\n").unwrap_err();
        assert_eq!(err.name(), "DuplicateMolId");
    }

    #[test]
    fn log10_transform() {
        let (ds, _) = read("smiles,target\nC,1\nCC,10\nCCC,100\n").unwrap();
        let t = apply_target_transform(&ds, TargetTransform::Log10).unwrap();
        assert_eq!(t.targets(), vec![0.0, 1.0, 2.0]);
        assert_eq!(t.transform, TargetTransform::Log10);
        assert_eq!(apply_target_transform(&ds, TargetTransform::Identity).unwrap(), ds);
        assert_eq!(
            apply_target_transform(&t, TargetTransform::Log10).unwrap_err().name(),
            "AlreadyTransformed"
        );
        let (zero, _) = read("smiles,target\nC,0\n").unwrap();
        assert_eq!(
            apply_target_transform(&zero, TargetTransform::Log10).unwrap_err().name(),
            "NonPositiveTarget"
        );
    }

    #[test]
    fn concat_places_blocks_in_order() {
        let a = Array2::from_shape_fn((10, 3), |(i, j)| (i * 7 + j) as f64 * 0.37);
        let b = Array2::from_shape_fn((10, 2), |(i, j)| -((i * 3 + j) as f64) / 11.0);
        let t = FeatureTable::new(None, a.clone(), "ect");
        let c = concat_features(&t, &b, "fingerprint").unwrap();
        assert_eq!(c.width(), 5);
        for i in 0..10 {
            for j in 0..3 {
                assert_eq!(c.rows[[i, j]], a[[i, j]]);
            }
            for j in 0..2 {
                assert_eq!(c.rows[[i, 3 + j]], b[[i, j]]);
            }
        }
        assert_eq!(c.label(), "ect+fingerprint");
        let same = concat_features(&t, &Array2::zeros((10, 0)), "fingerprint").unwrap();
        assert_eq!(same, t);
        let err = concat_features(&t, &Array2::zeros((9, 2)), "fingerprint").unwrap_err();
        assert_eq!(err.name(), "RowCountMismatch");
    }

    #[test]
    fn default_widths_concatenate() {
        let t = FeatureTable::new(None, Array2::zeros((2, 2528)), "ect");
        let c = concat_features(&t, &Array2::ones((2, 1024)), "fingerprint").unwrap();
        assert_eq!(c.width(), 3552);
    }
}
