//! Ridge regression, RMSE/R² metrics and shuffled k-fold cross-validation.
//!
//! The ridge problem is solved on centered data:
//! `(XcᵀXc + λ·N·I) w = Xcᵀ yc`, intercept `ȳ − x̄ᵀw`. When there are more
//! columns than rows the equivalent kernel system
//! `(XcXcᵀ + λ·N·I) α = yc`, `w = Xcᵀα` is factored instead; both are
//! symmetric positive definite for λ > 0 and go through the same Cholesky
//! routine.

use crate::ect::{compute_ect, sample_directions, EctError, EctInput, ThresholdGrid};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegressionError {
    #[error("ShapeMismatch: {0}")]
    ShapeMismatch(String),
    #[error("lambda must be a finite non-negative number, got {0}")]
    InvalidLambda(f64),
    #[error("SingularSystem: normal equations are not positive definite (pivot {pivot})")]
    SingularSystem { pivot: usize },
    #[error("ZeroVariance: R² is undefined for constant truth")]
    ZeroVariance,
    #[error("TooFewRows: {rows} rows cannot fill {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("at least 2 folds are required, got {0}")]
    InvalidFolds(usize),
    #[error("sweep point D={directions} T={thresholds}: {message}")]
    Sweep {
        directions: usize,
        thresholds: usize,
        message: String,
    },
}

impl RegressionError {
    pub fn name(&self) -> &'static str {
        match self {
            RegressionError::ShapeMismatch(_) => "ShapeMismatch",
            RegressionError::InvalidLambda(_) => "InvalidLambda",
            RegressionError::SingularSystem { .. } => "SingularSystem",
            RegressionError::ZeroVariance => "ZeroVariance",
            RegressionError::TooFewRows { .. } => "TooFewRows",
            RegressionError::InvalidFolds(_) => "InvalidFolds",
            RegressionError::Sweep { .. } => "SweepFailed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
}

impl RidgeModel {
    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<f64> {
        let w = Array1::from(self.weights.clone());
        x.dot(&w).iter().map(|v| v + self.intercept).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// In-place lower Cholesky factor of a symmetric matrix (row-major, only
/// the lower triangle is read). A pivot at or below `min_pivot[j]` is
/// reported as singular.
fn cholesky_in_place(a: &mut Array2<f64>, min_pivot: impl Fn(usize) -> f64) -> Result<(), RegressionError> {
    let n = a.nrows();
    let data = a.as_slice_mut().expect("standard layout");
    for i in 0..n {
        for j in 0..=i {
            let (head, tail) = data.split_at_mut(i * n);
            let row_i = &mut tail[..n];
            let s = if i == j {
                dot(&row_i[..j], &row_i[..j])
            } else {
                dot(&row_i[..j], &head[j * n..j * n + j])
            };
            if i == j {
                let d = row_i[i] - s;
                if d.is_nan() || d <= min_pivot(i) {
                    return Err(RegressionError::SingularSystem { pivot: i });
                }
                row_i[i] = d.sqrt();
            } else {
                row_i[j] = (row_i[j] - s) / head[j * n + j];
            }
        }
    }
    Ok(())
}

/// Solves `L Lᵀ x = b` given the factor from [`cholesky_in_place`].
fn cholesky_solve(l: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let n = l.nrows();
    let data = l.as_slice().expect("standard layout");
    let mut z = b.to_vec();
    for i in 0..n {
        let s = dot(&data[i * n..i * n + i], &z[..i]);
        z[i] = (z[i] - s) / data[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= data[k * n + i] * z[k];
        }
        z[i] = s / data[i * n + i];
    }
    z
}

/// Factors `gram + shift·I` and solves against `rhs`.
fn solve_spd(mut gram: Array2<f64>, shift: f64, rhs: &[f64]) -> Result<Vec<f64>, RegressionError> {
    let n = gram.nrows();
    let diag: Vec<f64> = (0..n).map(|i| gram[[i, i]]).collect();
    let scale = diag.iter().cloned().fold(0.0, f64::max);
    for i in 0..n {
        gram[[i, i]] += shift;
    }
    if shift > 0.0 {
        cholesky_in_place(&mut gram, |_| 0.0)?;
    } else {
        let floor = 1e-10 * scale.max(f64::MIN_POSITIVE);
        cholesky_in_place(&mut gram, |i| floor.max(1e-10 * diag[i]))?;
    }
    Ok(cholesky_solve(&gram, rhs))
}

pub fn fit_ridge(x: ArrayView2<f64>, y: &[f64], lambda: f64) -> Result<RidgeModel, RegressionError> {
    let (n, w) = x.dim();
    if n == 0 {
        return Err(RegressionError::ShapeMismatch("no rows".into()));
    }
    if y.len() != n {
        return Err(RegressionError::ShapeMismatch(format!(
            "{n} feature rows but {} targets",
            y.len()
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(RegressionError::InvalidLambda(lambda));
    }
    let means = x.mean_axis(Axis(0)).expect("n > 0");
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let xc = (&x - &means).as_standard_layout().into_owned();
    let yc = Array1::from_iter(y.iter().map(|v| v - y_mean));
    let shift = lambda * n as f64;

    let weights = if w == 0 {
        Vec::new()
    } else if w <= n {
        let gram = xc.t().dot(&xc).as_standard_layout().into_owned();
        let rhs = xc.t().dot(&yc);
        solve_spd(gram, shift, rhs.as_slice().unwrap())?
    } else {
        let gram = xc.dot(&xc.t());
        let alpha = solve_spd(gram, shift, yc.as_slice().unwrap())?;
        xc.t().dot(&Array1::from(alpha)).to_vec()
    };
    let intercept = y_mean - dot(means.as_slice().unwrap(), &weights);
    Ok(RidgeModel {
        weights,
        intercept,
        lambda,
    })
}

fn check_pair(pred: &[f64], truth: &[f64]) -> Result<(), RegressionError> {
    if pred.len() != truth.len() || truth.is_empty() {
        return Err(RegressionError::ShapeMismatch(format!(
            "{} predictions for {} truth values",
            pred.len(),
            truth.len()
        )));
    }
    Ok(())
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64, RegressionError> {
    check_pair(pred, truth)?;
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / truth.len() as f64).sqrt())
}

/// `1 − SS_res / SS_tot`, with `SS_tot` taken about the mean of `truth`.
pub fn r_squared(pred: &[f64], truth: &[f64]) -> Result<f64, RegressionError> {
    check_pair(pred, truth)?;
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(RegressionError::ZeroVariance);
    }
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub shuffle_seed: u64,
    pub lambda: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: DEFAULT_FOLDS,
            shuffle_seed: 42,
            lambda: DEFAULT_LAMBDA,
        }
    }
}

/// Test-index sets: one shuffle of `0..n`, cut into contiguous blocks whose
/// sizes differ by at most one (larger blocks first).
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>, RegressionError> {
    if folds < 2 {
        return Err(RegressionError::InvalidFolds(folds));
    }
    if n < folds {
        return Err(RegressionError::TooFewRows { rows: n, folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_rows: usize,
    pub rmse: f64,
    pub r2: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub dataset: String,
    pub representation: String,
    pub width: usize,
    pub rows: usize,
    pub config: CvConfig,
    pub folds: Vec<FoldResult>,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub r2_mean: f64,
    pub r2_std: f64,
}

impl CvReport {
    pub fn labeled(mut self, dataset: &str, representation: &str) -> Self {
        self.dataset = dataset.to_string();
        self.representation = representation.to_string();
        self
    }
}

/// Shuffled k-fold CV of ridge regression. Folds run on the current rayon
/// pool; results are gathered in fold order, so the report equals a serial
/// run.
pub fn cross_validate(x: ArrayView2<f64>, y: &[f64], cfg: &CvConfig) -> Result<CvReport, RegressionError> {
    let n = x.nrows();
    if y.len() != n {
        return Err(RegressionError::ShapeMismatch(format!(
            "{n} feature rows but {} targets",
            y.len()
        )));
    }
    let test_sets = fold_assignment(n, cfg.folds, cfg.shuffle_seed)?;
    let folds: Vec<FoldResult> = test_sets
        .par_iter()
        .enumerate()
        .map(|(fold, test)| {
            let mut in_test = vec![false; n];
            for &i in test {
                in_test[i] = true;
            }
            let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
            let x_train = x.select(Axis(0), &train);
            let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let model = fit_ridge(x_train.view(), &y_train, cfg.lambda)?;
            let pred = model.predict(x.select(Axis(0), test).view());
            let truth: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            Ok(FoldResult {
                fold,
                test_rows: test.len(),
                rmse: rmse(&pred, &truth)?,
                r2: r_squared(&pred, &truth)?,
            })
        })
        .collect::<Result<_, RegressionError>>()?;
    let (rmse_mean, rmse_std) = mean_std(&folds.iter().map(|f| f.rmse).collect::<Vec<_>>());
    let (r2_mean, r2_std) = mean_std(&folds.iter().map(|f| f.r2).collect::<Vec<_>>());
    Ok(CvReport {
        dataset: String::new(),
        representation: String::new(),
        width: x.ncols(),
        rows: n,
        config: *cfg,
        folds,
        rmse_mean,
        rmse_std,
        r2_mean,
        r2_std,
    })
}

/// Aligned text table of `mean ± std` metrics, one line per report.
pub fn format_reports(reports: &[CvReport]) -> String {
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|r| {
            [
                r.dataset.clone(),
                r.representation.clone(),
                r.width.to_string(),
                format!("{:.3} ± {:.3}", r.rmse_mean, r.rmse_std),
                format!("{:.3} ± {:.3}", r.r2_mean, r.r2_std),
            ]
        })
        .collect();
    let header = ["dataset", "representation", "width", "RMSE", "R2"];
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&mut out, &header);
    for r in &rows {
        line(&mut out, &r.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub directions: usize,
    pub thresholds: usize,
    pub width: usize,
    pub rmse_mean: f64,
    pub r2_mean: f64,
    pub rmse_std: f64,
    pub r2_std: f64,
}

/// Builds the ECT feature matrix of `molecules` for one configuration.
pub fn ect_feature_matrix(
    molecules: &[EctInput],
    directions: usize,
    thresholds: usize,
    seed: u64,
) -> Result<Array2<f64>, EctError> {
    let dim = molecules.first().map_or(1, |m| m.features.width);
    let dirs = sample_directions(dim, directions, seed)?;
    let grid = ThresholdGrid::uniform(thresholds)?;
    let rows: Vec<Vec<i32>> = molecules
        .par_iter()
        .enumerate()
        .map(|(index, m)| {
            compute_ect(&m.features, &m.edges, &dirs, &grid)
                .map(|d| d.values)
                .map_err(|e| EctError::Molecule {
                    index,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_, _>>()?;
    let width = directions * thresholds;
    let flat: Vec<f64> = rows.iter().flatten().map(|&v| f64::from(v)).collect();
    Ok(Array2::from_shape_vec((molecules.len(), width), flat).expect("row widths"))
}

/// Cross-validates ECT features for every `(D, T)` pair, `D` outermost.
/// Directions are regenerated from the same seed at each point.
pub fn sensitivity_sweep(
    molecules: &[EctInput],
    targets: &[f64],
    direction_counts: &[usize],
    threshold_counts: &[usize],
    direction_seed: u64,
    cfg: &CvConfig,
) -> Result<Vec<SweepRow>, RegressionError> {
    let mut rows = Vec::new();
    for &d in direction_counts {
        for &t in threshold_counts {
            let wrap = |message: String| RegressionError::Sweep {
                directions: d,
                thresholds: t,
                message,
            };
            let x = ect_feature_matrix(molecules, d, t, direction_seed)
                .map_err(|e| wrap(e.to_string()))?;
            let report = cross_validate(x.view(), targets, cfg).map_err(|e| wrap(e.to_string()))?;
            rows.push(SweepRow {
                directions: d,
                thresholds: t,
                width: d * t,
                rmse_mean: report.rmse_mean,
                r2_mean: report.r2_mean,
                rmse_std: report.rmse_std,
                r2_std: report.r2_std,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn exact_line_through_origin() {
        let m = fit_ridge(array![[1.0], [2.0]].view(), &[2.0, 4.0], 0.0).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-12);
        assert!(m.intercept.abs() < 1e-12);
    }

    #[test]
    fn heavy_shrinkage_predicts_mean() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((30, 4), |_| rng.gen_range(-1.0..1.0));
        let m = fit_ridge(x.view(), &[2.5; 30], 1e6).unwrap();
        for p in m.predict(x.view()) {
            assert!((p - 2.5).abs() < 1e-9);
        }
    }

    #[test]
    fn singular_without_regularization() {
        let x = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        let err = fit_ridge(x.view(), &[1.0, 2.0, 3.0], 0.0).unwrap_err();
        assert_eq!(err.name(), "SingularSystem");
        assert!(fit_ridge(x.view(), &[1.0, 2.0, 3.0], 0.1).is_ok());
        // wide system, kernel route
        let wide = array![[1.0, 0.0, 2.0], [0.0, 1.0, 1.0]];
        assert_eq!(fit_ridge(wide.view(), &[1.0, 2.0], 0.0).unwrap_err().name(), "SingularSystem");
    }

    #[test]
    fn shape_errors() {
        let x = array![[1.0], [2.0]];
        assert_eq!(fit_ridge(x.view(), &[1.0], 0.1).unwrap_err().name(), "ShapeMismatch");
        assert_eq!(fit_ridge(x.view(), &[1.0, 2.0], -1.0).unwrap_err().name(), "InvalidLambda");
        assert_eq!(rmse(&[1.0], &[]).unwrap_err().name(), "ShapeMismatch");
    }

    #[test]
    fn kernel_and_primal_routes_agree() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let x = Array2::from_shape_fn((12, 30), |_| rng.gen_range(-1.0..1.0));
        let y: Vec<f64> = (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let wide = fit_ridge(x.view(), &y, 0.3).unwrap();
        // same problem through the 30x30 primal system
        let means = x.mean_axis(Axis(0)).unwrap();
        let xc = &x - &means;
        let ym = y.iter().sum::<f64>() / 12.0;
        let yc = Array1::from_iter(y.iter().map(|v| v - ym));
        let w = solve_spd(xc.t().dot(&xc), 0.3 * 12.0, xc.t().dot(&yc).as_slice().unwrap()).unwrap();
        for (a, b) in wide.weights.iter().zip(&w) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn metric_examples() {
        assert_eq!(rmse(&[1., 2., 3.], &[1., 2., 3.]).unwrap(), 0.0);
        assert_eq!(r_squared(&[1., 2., 3.], &[1., 2., 3.]).unwrap(), 1.0);
        assert_eq!(rmse(&[0., 0.], &[3., 4.]).unwrap(), 12.5f64.sqrt());
        assert_eq!(r_squared(&[2., 2., 2.], &[1., 2., 3.]).unwrap(), 0.0);
        assert_eq!(r_squared(&[1., 2.], &[5., 5.]).unwrap_err(), RegressionError::ZeroVariance);
    }

    #[test]
    fn folds_partition_rows() {
        let folds = fold_assignment(23, 10, 5).unwrap();
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert_eq!(fold_assignment(5, 10, 0).unwrap_err().name(), "TooFewRows");
        assert_eq!(fold_assignment(5, 1, 0).unwrap_err().name(), "InvalidFolds");
    }

    #[test]
    fn linear_target_is_recovered() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let x = Array2::from_shape_fn((100, 3), |_| rng.gen_range(-1.0..1.0));
        let y: Vec<f64> = x.rows().into_iter().map(|r| 1.0 + 2.0 * r[0] - r[1] + 0.5 * r[2]).collect();
        let cfg = CvConfig { lambda: 1e-12, ..CvConfig::default() };
        let rep = cross_validate(x.view(), &y, &cfg).unwrap();
        assert_eq!(rep.folds.len(), 10);
        assert!(rep.rmse_mean < 1e-6);
        assert!(rep.r2_mean > 0.999);
        assert_eq!(rep, cross_validate(x.view(), &y, &cfg).unwrap());
        let (m, s) = mean_std(&rep.folds.iter().map(|f| f.r2).collect::<Vec<_>>());
        assert!((m - rep.r2_mean).abs() <= 1e-12 && (s - rep.r2_std).abs() <= 1e-12);
    }

    #[test]
    fn noise_target_explains_nothing() {
        let mut total = 0.0;
        for rep in 0..20u64 {
            let mut rng = ChaCha20Rng::seed_from_u64(100 + rep);
            let x = Array2::from_shape_fn((80, 5), |_| rng.gen_range(-1.0..1.0));
            let y: Vec<f64> = (0..80).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cfg = CvConfig { shuffle_seed: rep, ..CvConfig::default() };
            total += cross_validate(x.view(), &y, &cfg).unwrap().r2_mean;
        }
        assert!(total / 20.0 <= 0.1);
    }

    #[test]
    fn table_formatting() {
        let rep = CvReport {
            dataset: "d".into(),
            representation: "ect".into(),
            width: 2528,
            rows: 10,
            config: CvConfig::default(),
            folds: vec![],
            rmse_mean: 1.23456,
            rmse_std: 0.1,
            r2_mean: 0.5,
            r2_std: 0.01,
        };
        let text = format_reports(&[rep]);
        assert!(text.contains("1.235 ± 0.100"));
        assert!(text.lines().next().unwrap().starts_with("dataset"));
    }
}
