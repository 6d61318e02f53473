use ectmol::dataset::{load_csv, CsvColumns, DatasetError};
use ectmol::formats::{load_fingerprint_matrix, write_fingerprint_csv};
use ndarray::Array2;
use std::fmt::Write as _;

/// 100 data rows: 90 distinct SMILES, 7 repeats of earlier rows and 3 rows
/// with a blank SMILES or target.
fn fixture() -> String {
    let mut out = String::from("mol_id,smiles,target\n");
    let mut row = 0;
    for i in 0..90 {
        let _ = writeln!(out, "r{row},{},{}", "C".repeat(i + 1), i + 1);
        row += 1;
        if i % 13 == 0 && i < 90 && row < 100 {
            let _ = writeln!(out, "r{row},{},{}", "C".repeat(i + 1), 0.5);
            row += 1;
        }
    }
    let _ = writeln!(out, "r{row},,1.0");
    let _ = writeln!(out, "r{},CCO,", row + 1);
    let _ = writeln!(out, "r{},  ,3", row + 2);
    out
}

#[test]
fn duplicates_and_blanks_are_accounted_for() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.csv");
    let text = fixture();
    assert_eq!(text.lines().count(), 101);
    std::fs::write(&path, text).unwrap();
    let (dataset, report) = load_csv(&path, &CsvColumns::default()).unwrap();
    assert_eq!(report.source_rows, 100);
    assert_eq!(report.deduplicated, 7);
    assert_eq!(report.dropped, 3);
    assert_eq!(report.kept, 90);
    assert_eq!(dataset.len(), 90);
    assert_eq!(report.dropped_lines, vec![99, 100, 101]);
    assert_eq!(dataset.records[0].row_origin, 2);
    assert_eq!(dataset.name, "fixture");
}

#[test]
fn missing_column_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    std::fs::write(&path, "smiles,y\nC,1\n").unwrap();
    let err = load_csv(&path, &CsvColumns::default()).unwrap_err();
    assert_eq!(err.name(), "MissingColumn");
    let err = load_csv(&dir.path().join("absent.csv"), &CsvColumns::default()).unwrap_err();
    assert!(matches!(err, DatasetError::Io { .. }));
}

#[test]
fn fingerprint_rows_follow_dataset_order() {
    let dir = tempfile::tempdir().unwrap();
    let ids: Vec<String> = (0..5).map(|i| format!("m{i}")).collect();
    let rows = Array2::from_shape_fn((5, 3), |(i, j)| (i * 3 + j) as f64);
    let permuted: Vec<usize> = vec![3, 0, 4, 1, 2];
    let p_ids: Vec<String> = permuted.iter().map(|&i| ids[i].clone()).collect();
    let p_rows = rows.select(ndarray::Axis(0), &permuted);
    let path = dir.path().join("fp.csv");
    write_fingerprint_csv(&p_ids, &p_rows, std::fs::File::create(&path).unwrap()).unwrap();
    assert_eq!(load_fingerprint_matrix(&path, &ids).unwrap(), rows);

    let err = load_fingerprint_matrix(&path, &ids[..4]).unwrap_err();
    assert_eq!(err.name(), "UnknownMolId");
}
