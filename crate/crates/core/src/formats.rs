//! On-disk feature formats.
//!
//! ECT tables:
//! - CSV with header `mol_id,f0,…,f{DT−1}`, integer cells.
//! - Binary: magic `ECT1`, then little-endian `u32 N`, `u32 D`, `u32 T`,
//!   then `N·D·T` `i32` values, one row after another, direction-major
//!   within a row.
//!
//! Fingerprint matrices:
//! - CSV with header `mol_id,b0,…,b{F−1}`, numeric cells, rows in any
//!   order (aligned by `mol_id`).
//! - Binary: magic `FPM1`, `u32 N`, `u32 F`, then `N·F` `f64` values in
//!   dataset record order (no ids).

use crate::dataset::{DatasetError, FeatureTable};
use crate::ect::EctTable;
use ndarray::Array2;
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

pub const ECT_MAGIC: &[u8; 4] = b"ECT1";
pub const FINGERPRINT_MAGIC: &[u8; 4] = b"FPM1";

fn malformed(msg: impl Into<String>) -> DatasetError {
    DatasetError::MalformedFile(msg.into())
}

fn csv_err(e: csv::Error) -> DatasetError {
    malformed(e.to_string())
}

pub fn write_ect_csv<W: Write>(table: &EctTable, out: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = Vec::with_capacity(table.width() + 1);
    header.push("mol_id".to_string());
    header.extend((0..table.width()).map(|j| format!("f{j}")));
    w.write_record(&header).map_err(csv_err)?;
    let mut record = Vec::with_capacity(table.width() + 1);
    for (i, id) in table.mol_ids.iter().enumerate() {
        record.clear();
        record.push(id.clone());
        record.extend(table.row(i).iter().map(i32::to_string));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| malformed(e.to_string()))
}

pub fn write_ect_binary<W: Write>(table: &EctTable, mut out: W) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(16 + 4 * table.values.len());
    buf.extend_from_slice(ECT_MAGIC);
    for n in [table.rows(), table.directions, table.thresholds] {
        buf.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in &table.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()
}

/// Header and payload of an `ECT1` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EctBinary {
    pub rows: usize,
    pub directions: usize,
    pub thresholds: usize,
    pub values: Vec<i32>,
}

fn u32_at(bytes: &[u8], at: usize) -> usize {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize
}

pub fn decode_ect_binary(bytes: &[u8]) -> Result<EctBinary, DatasetError> {
    if bytes.len() < 16 || &bytes[..4] != ECT_MAGIC {
        return Err(malformed("missing ECT1 header"));
    }
    let (rows, directions, thresholds) = (u32_at(bytes, 4), u32_at(bytes, 8), u32_at(bytes, 12));
    let count = rows
        .checked_mul(directions)
        .and_then(|x| x.checked_mul(thresholds))
        .ok_or_else(|| malformed("ECT1 dimensions overflow"))?;
    let payload = &bytes[16..];
    if payload.len() != count * 4 {
        return Err(malformed(format!(
            "ECT1 payload holds {} bytes, header implies {}",
            payload.len(),
            count * 4
        )));
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(EctBinary {
        rows,
        directions,
        thresholds,
        values,
    })
}

fn read_all(path: &Path) -> Result<Vec<u8>, DatasetError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| DatasetError::io(path, e))?;
    Ok(bytes)
}

/// Parses `mol_id,<prefix>0,…` CSV into ids and a dense matrix.
fn read_id_matrix_csv(bytes: &[u8], prefix: char) -> Result<(Vec<String>, Array2<f64>), DatasetError> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.get(0) != Some("mol_id") {
        return Err(malformed("first column must be mol_id"));
    }
    for (j, h) in headers.iter().skip(1).enumerate() {
        if h != format!("{prefix}{j}") {
            return Err(malformed(format!("column {} is {h:?}, expected {prefix}{j}", j + 1)));
        }
    }
    let width = headers.len() - 1;
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != width + 1 {
            return Err(malformed(format!("row {} has {} cells", i + 1, rec.len())));
        }
        ids.push(rec[0].to_string());
        for cell in rec.iter().skip(1) {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| malformed(format!("row {}: {cell:?} is not a number", i + 1)))?;
            values.push(v);
        }
    }
    let rows = Array2::from_shape_vec((ids.len(), width), values).expect("cell count checked");
    Ok((ids, rows))
}

/// Loads an ECT feature file in either format (detected by magic bytes).
pub fn read_feature_file(path: &Path) -> Result<FeatureTable, DatasetError> {
    let bytes = read_all(path)?;
    if bytes.starts_with(ECT_MAGIC) {
        let b = decode_ect_binary(&bytes)?;
        let rows = Array2::from_shape_vec(
            (b.rows, b.directions * b.thresholds),
            b.values.iter().map(|&v| f64::from(v)).collect(),
        )
        .expect("payload size checked");
        return Ok(FeatureTable::new(None, rows, "ect"));
    }
    let (ids, rows) = read_id_matrix_csv(&bytes, 'f')?;
    Ok(FeatureTable::new(Some(ids), rows, "ect"))
}

/// Loads a fingerprint matrix and returns its rows in the order of
/// `dataset_ids`. CSV rows are matched by id; a binary file must already be
/// in dataset order.
pub fn load_fingerprint_matrix(
    path: &Path,
    dataset_ids: &[String],
) -> Result<Array2<f64>, DatasetError> {
    let bytes = read_all(path)?;
    if bytes.starts_with(FINGERPRINT_MAGIC) {
        return decode_fingerprint_binary(&bytes, dataset_ids.len());
    }
    let (ids, rows) = read_id_matrix_csv(&bytes, 'b')?;
    align_rows(&ids, &rows, dataset_ids)
}

fn decode_fingerprint_binary(bytes: &[u8], expected_rows: usize) -> Result<Array2<f64>, DatasetError> {
    if bytes.len() < 12 {
        return Err(malformed("truncated FPM1 header"));
    }
    let (rows, width) = (u32_at(bytes, 4), u32_at(bytes, 8));
    let payload = &bytes[12..];
    if Some(payload.len()) != rows.checked_mul(width).and_then(|c| c.checked_mul(8)) {
        return Err(malformed("FPM1 payload size does not match header"));
    }
    if rows != expected_rows {
        return Err(DatasetError::RowCountMismatch {
            expected: expected_rows,
            found: rows,
        });
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Array2::from_shape_vec((rows, width), values).expect("payload size checked"))
}

fn align_rows(
    ids: &[String],
    rows: &Array2<f64>,
    dataset_ids: &[String],
) -> Result<Array2<f64>, DatasetError> {
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.as_str(), i).is_some() {
            return Err(DatasetError::DuplicateMolId(id.clone()));
        }
    }
    let mut order = Vec::with_capacity(dataset_ids.len());
    for id in dataset_ids {
        let i = index
            .get(id.as_str())
            .ok_or_else(|| DatasetError::UnknownMolId(id.clone()))?;
        order.push(*i);
    }
    if ids.len() != dataset_ids.len() {
        let known: std::collections::HashSet<&str> =
            dataset_ids.iter().map(String::as_str).collect();
        if let Some(extra) = ids.iter().find(|id| !known.contains(id.as_str())) {
            return Err(DatasetError::UnknownMolId(extra.clone()));
        }
    }
    Ok(rows.select(ndarray::Axis(0), &order))
}

pub fn write_fingerprint_csv<W: Write>(
    ids: &[String],
    rows: &Array2<f64>,
    out: W,
) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["mol_id".to_string()];
    header.extend((0..rows.ncols()).map(|j| format!("b{j}")));
    w.write_record(&header).map_err(csv_err)?;
    for (id, row) in ids.iter().zip(rows.rows()) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| malformed(e.to_string()))
}

pub fn write_fingerprint_binary<W: Write>(rows: &Array2<f64>, mut out: W) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(12 + 8 * rows.len());
    buf.extend_from_slice(FINGERPRINT_MAGIC);
    buf.extend_from_slice(&(rows.nrows() as u32).to_le_bytes());
    buf.extend_from_slice(&(rows.ncols() as u32).to_le_bytes());
    for v in rows.iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()
}
