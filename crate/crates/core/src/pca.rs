//! Principal component analysis over the benchmark×metric matrix.
//!
//! The pipeline is: drop rows with missing metrics, standardize each column
//! to mean 0 and sample standard deviation 1 (dropping zero-variance
//! columns), eigendecompose the sample correlation matrix with cyclic Jacobi
//! rotations, and project the standardized rows onto the loading basis to
//! obtain scores. Sample statistics use the N−1 denominator throughout, so
//! the variance of score column j equals eigenvalue j.
//!
//! Eigenvector sign is arbitrary; the fixed convention here makes the
//! largest-magnitude entry of each loading column positive.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::csvutil;

/// Off-diagonal magnitude at which the Jacobi iteration stops.
const JACOBI_TOLERANCE: f64 = 1e-12;
/// Maximum number of full Jacobi sweeps.
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error)]
pub enum PcaError {
    #[error("need at least 2 complete rows, found {0}")]
    TooFewRows(usize),
    #[error("no metric column with nonzero variance remains")]
    NoVaryingColumns,
    #[error("Jacobi iteration did not converge: residual {residual:e} after {JACOBI_MAX_SWEEPS} sweeps")]
    NoConvergence { residual: f64 },
    #[error("component index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("row {label} has {found} values, expected {expected}")]
    RaggedRow {
        label: String,
        found: usize,
        expected: usize,
    },
    #[error("non-finite value in row {label}, column {column}")]
    NonFinite { label: String, column: String },
    #[error("malformed metrics csv: {0}")]
    MalformedCsv(String),
}

/// Identity of one matrix row: a benchmark and the group it belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowLabel {
    pub benchmark_id: String,
    pub group: String,
}

impl std::fmt::Display for RowLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.group, self.benchmark_id)
    }
}

/// Dense N×K matrix of finite metric values.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    pub row_labels: Vec<RowLabel>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl DataMatrix {
    /// Validate shape and finiteness.
    pub fn new(
        row_labels: Vec<RowLabel>,
        col_labels: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, PcaError> {
        if row_labels.len() < 2 {
            return Err(PcaError::TooFewRows(row_labels.len()));
        }
        for (label, row) in row_labels.iter().zip(&values) {
            if row.len() != col_labels.len() {
                return Err(PcaError::RaggedRow {
                    label: label.to_string(),
                    found: row.len(),
                    expected: col_labels.len(),
                });
            }
            for (v, col) in row.iter().zip(&col_labels) {
                if !v.is_finite() {
                    return Err(PcaError::NonFinite {
                        label: label.to_string(),
                        column: col.clone(),
                    });
                }
            }
        }
        Ok(DataMatrix {
            row_labels,
            col_labels,
            values,
        })
    }

    /// Build from rows that may have gaps, dropping incomplete rows. Returns
    /// the matrix and the labels of the dropped rows.
    pub fn from_incomplete(
        row_labels: Vec<RowLabel>,
        col_labels: Vec<String>,
        values: Vec<Vec<Option<f64>>>,
    ) -> Result<(Self, Vec<String>), PcaError> {
        let mut kept_labels = Vec::new();
        let mut kept_values = Vec::new();
        let mut dropped = Vec::new();
        for (label, row) in row_labels.into_iter().zip(values) {
            if row.len() == col_labels.len()
                && row.iter().all(|v| matches!(v, Some(x) if x.is_finite()))
            {
                kept_values.push(row.into_iter().map(Option::unwrap).collect());
                kept_labels.push(label);
            } else {
                dropped.push(label.to_string());
            }
        }
        let matrix = DataMatrix::new(kept_labels, col_labels, kept_values)?;
        Ok((matrix, dropped))
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |row| row[j])
    }
}

/// Result of standardizing a [`DataMatrix`]: each retained column of `matrix`
/// has mean 0 and sample standard deviation 1.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub matrix: DataMatrix,
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
    pub dropped_cols: Vec<String>,
}

/// Center and scale each column; zero-variance columns are dropped and
/// reported. Sample standard deviation uses the N−1 denominator.
pub fn standardize(x: &DataMatrix) -> Result<Standardized, PcaError> {
    let n = x.n_rows();
    if n < 2 {
        return Err(PcaError::TooFewRows(n));
    }

    let mut keep = Vec::new();
    let mut dropped_cols = Vec::new();
    let mut means = Vec::new();
    let mut stddevs = Vec::new();
    for j in 0..x.n_cols() {
        let mean = x.column(j).sum::<f64>() / n as f64;
        let ss: f64 = x.column(j).map(|v| (v - mean) * (v - mean)).sum();
        let stddev = (ss / (n as f64 - 1.0)).sqrt();
        if stddev == 0.0 {
            dropped_cols.push(x.col_labels[j].clone());
        } else {
            keep.push(j);
            means.push(mean);
            stddevs.push(stddev);
        }
    }
    if keep.is_empty() {
        return Err(PcaError::NoVaryingColumns);
    }

    let col_labels: Vec<String> = keep.iter().map(|&j| x.col_labels[j].clone()).collect();
    let values: Vec<Vec<f64>> = x
        .values
        .iter()
        .map(|row| {
            keep.iter()
                .enumerate()
                .map(|(idx, &j)| (row[j] - means[idx]) / stddevs[idx])
                .collect()
        })
        .collect();

    Ok(Standardized {
        matrix: DataMatrix {
            row_labels: x.row_labels.clone(),
            col_labels,
            values,
        },
        means,
        stddevs,
        dropped_cols,
    })
}

/// A fitted PCA model.
#[derive(Debug, Clone)]
pub struct PcaModel {
    /// Metric names of the retained (varying) columns.
    pub col_labels: Vec<String>,
    pub row_labels: Vec<RowLabel>,
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
    /// K×K; column j is the loading vector of PC j+1. Columns orthonormal.
    pub loadings: Vec<Vec<f64>>,
    /// Nonincreasing, nonnegative.
    pub eigenvalues: Vec<f64>,
    /// `eigenvalues[j] / Σ eigenvalues`.
    pub explained_ratio: Vec<f64>,
    /// N×K; row i is benchmark i's projection onto the loading basis.
    pub scores: Vec<Vec<f64>>,
    pub dropped_cols: Vec<String>,
    pub dropped_rows: Vec<String>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Fit a PCA on standardized data: eigendecompose the K×K sample correlation
/// matrix `C = YᵀY/(N−1)` with cyclic Jacobi rotations, sort eigenpairs by
/// eigenvalue descending, fix signs, and project scores `S = Y·L`.
pub fn fit_pca(std: &Standardized) -> Result<PcaModel, PcaError> {
    let y = &std.matrix;
    let n = y.n_rows();
    let k = y.n_cols();

    // Sample correlation matrix.
    let mut c = vec![vec![0.0f64; k]; k];
    for row in &y.values {
        for i in 0..k {
            for j in i..k {
                c[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..k {
        for j in i..k {
            c[i][j] /= n as f64 - 1.0;
            c[j][i] = c[i][j];
        }
    }

    let (mut eigenvalues, mut vectors) = jacobi_eigen(c)?;

    // Sort descending; tiny negative eigenvalues are rounding noise on a
    // Gram matrix, clamp them to zero.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eigenvalues[b].partial_cmp(&eigenvalues[a]).unwrap());
    eigenvalues = order.iter().map(|&i| eigenvalues[i].max(0.0)).collect();
    vectors = (0..k)
        .map(|r| order.iter().map(|&i| vectors[r][i]).collect())
        .collect::<Vec<Vec<f64>>>();

    // Sign convention: largest-magnitude entry of each column positive; ties
    // resolved by the lowest metric index.
    for j in 0..k {
        let mut arg = 0;
        for i in 1..k {
            if vectors[i][j].abs() > vectors[arg][j].abs() {
                arg = i;
            }
        }
        if vectors[arg][j] < 0.0 {
            for i in 0..k {
                vectors[i][j] = -vectors[i][j];
            }
        }
    }

    let total: f64 = eigenvalues.iter().sum();
    let explained_ratio: Vec<f64> = if total > 0.0 {
        eigenvalues.iter().map(|l| l / total).collect()
    } else {
        vec![0.0; k]
    };

    let scores: Vec<Vec<f64>> = y
        .values
        .iter()
        .map(|row| {
            (0..k)
                .map(|j| (0..k).map(|i| row[i] * vectors[i][j]).sum())
                .collect()
        })
        .collect();

    Ok(PcaModel {
        col_labels: y.col_labels.clone(),
        row_labels: y.row_labels.clone(),
        means: std.means.clone(),
        stddevs: std.stddevs.clone(),
        loadings: vectors,
        eigenvalues,
        explained_ratio,
        scores,
        dropped_cols: std.dropped_cols.clone(),
        dropped_rows: Vec::new(),
    })
}

/// Standardize then fit; `dropped_rows` records labels removed before matrix
/// construction.
pub fn fit_model(x: &DataMatrix, dropped_rows: Vec<String>) -> Result<PcaModel, PcaError> {
    let std = standardize(x)?;
    let mut model = fit_pca(&std)?;
    model.dropped_rows = dropped_rows;
    Ok(model)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// (eigenvalues, eigenvectors-as-columns), unsorted.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> Result<(Vec<f64>, Vec<Vec<f64>>), PcaError> {
    let k = a.len();
    let mut v = vec![vec![0.0f64; k]; k];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if k == 1 {
        return Ok((vec![a[0][0]], v));
    }

    let off_diag_max = |a: &Vec<Vec<f64>>| {
        let mut m: f64 = 0.0;
        for p in 0..k - 1 {
            for q in p + 1..k {
                m = m.max(a[p][q].abs());
            }
        }
        m
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diag_max(&a) <= JACOBI_TOLERANCE {
            return Ok((diag(&a), v));
        }
        for p in 0..k - 1 {
            for q in p + 1..k {
                let apq = a[p][q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = {
                    let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;

                for i in 0..k {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = cos * aip - sin * aiq;
                    a[i][q] = sin * aip + cos * aiq;
                }
                for j in 0..k {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = cos * apj - sin * aqj;
                    a[q][j] = sin * apj + cos * aqj;
                }
                for i in 0..k {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = cos * vip - sin * viq;
                    v[i][q] = sin * vip + cos * viq;
                }
            }
        }
    }

    let residual = off_diag_max(&a);
    if residual <= JACOBI_TOLERANCE {
        Ok((diag(&a), v))
    } else {
        Err(PcaError::NoConvergence { residual })
    }
}

fn diag(a: &[Vec<f64>]) -> Vec<f64> {
    (0..a.len()).map(|i| a[i][i]).collect()
}

// ---------------------------------------------------------------------------
// Presentation.

#[derive(Debug, Clone, PartialEq)]
pub struct LoadingEntry {
    pub metric: String,
    pub loading: f64,
}

/// Loadings of one principal component, every retained metric listed, sorted
/// by absolute loading descending.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentLoadings {
    /// 1-based component index.
    pub component: usize,
    pub entries: Vec<LoadingEntry>,
}

pub fn loading_table(
    model: &PcaModel,
    n_components: usize,
) -> Result<Vec<ComponentLoadings>, PcaError> {
    let k = model.n_components();
    if n_components > k {
        return Err(PcaError::IndexOutOfRange {
            index: n_components,
            max: k,
        });
    }
    let mut out = Vec::with_capacity(n_components);
    for j in 0..n_components {
        let mut entries: Vec<LoadingEntry> = model
            .col_labels
            .iter()
            .enumerate()
            .map(|(i, metric)| LoadingEntry {
                metric: metric.clone(),
                loading: model.loadings[i][j],
            })
            .collect();
        // Stable sort keeps ties in metric-index order.
        entries.sort_by(|a, b| b.loading.abs().partial_cmp(&a.loading.abs()).unwrap());
        out.push(ComponentLoadings {
            component: j + 1,
            entries,
        });
    }
    Ok(out)
}

/// Text rendering of a loading table, signed three-decimal loadings.
pub fn render_loading_table(table: &[ComponentLoadings]) -> String {
    let mut out = String::new();
    for comp in table {
        out.push_str(&format!("PC{}\n", comp.component));
        let width = comp.entries.iter().map(|e| e.metric.len()).max().unwrap_or(0);
        for e in &comp.entries {
            out.push_str(&format!("  {:<width$}  {:+.3}\n", e.metric, e.loading));
        }
    }
    out
}

/// One benchmark's coordinates on a pair of components.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub label: String,
    pub group: String,
    pub x: f64,
    pub y: f64,
}

/// Score coordinates of every retained benchmark on components `pc_a`/`pc_b`
/// (1-based).
pub fn scatter_data(
    model: &PcaModel,
    pc_a: usize,
    pc_b: usize,
) -> Result<Vec<ScatterPoint>, PcaError> {
    let k = model.n_components();
    for idx in [pc_a, pc_b] {
        if idx == 0 || idx > k {
            return Err(PcaError::IndexOutOfRange { index: idx, max: k });
        }
    }
    Ok(model
        .row_labels
        .iter()
        .zip(&model.scores)
        .map(|(label, row)| ScatterPoint {
            label: label.benchmark_id.clone(),
            group: label.group.clone(),
            x: row[pc_a - 1],
            y: row[pc_b - 1],
        })
        .collect())
}

/// Fraction of variance captured by the first `n` components.
pub fn cumulative_variance(model: &PcaModel, n: usize) -> f64 {
    model.explained_ratio.iter().take(n).sum()
}

// ---------------------------------------------------------------------------
// Metrics CSV ingestion and model export.

/// Parse the metrics CSV (benchmark_id, group, metric columns) into a data
/// matrix, dropping rows with any missing or non-numeric metric value.
pub fn load_metrics_csv(text: &str) -> Result<(DataMatrix, Vec<String>), PcaError> {
    let records = csvutil::parse(text).map_err(|e| PcaError::MalformedCsv(e.to_string()))?;
    let mut rows = records.into_iter();
    let header = rows.next().ok_or_else(|| PcaError::MalformedCsv("empty file".into()))?;
    if header.len() < 3 || header[0] != "benchmark_id" || header[1] != "group" {
        return Err(PcaError::MalformedCsv(
            "expected header starting with benchmark_id,group".into(),
        ));
    }
    let col_labels: Vec<String> = header[2..].to_vec();
    let mut seen = BTreeSet::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (i, record) in rows.enumerate() {
        if record.len() != header.len() {
            return Err(PcaError::MalformedCsv(format!(
                "row {} has {} fields, expected {}",
                i + 2,
                record.len(),
                header.len()
            )));
        }
        let label = RowLabel {
            benchmark_id: record[0].clone(),
            group: record[1].clone(),
        };
        if !seen.insert(label.to_string()) {
            return Err(PcaError::MalformedCsv(format!("duplicate row label {label}")));
        }
        let row: Vec<Option<f64>> = record[2..]
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    None
                } else {
                    cell.parse::<f64>().ok().filter(|v| v.is_finite())
                }
            })
            .collect();
        labels.push(label);
        values.push(row);
    }
    DataMatrix::from_incomplete(labels, col_labels, values)
}

/// `component,metric,loading` for every component and metric.
pub fn loadings_csv(model: &PcaModel) -> String {
    let mut out = String::new();
    out.push_str("component,metric,loading\n");
    for j in 0..model.n_components() {
        for (i, metric) in model.col_labels.iter().enumerate() {
            csvutil::push_record(
                &mut out,
                &[
                    format!("PC{}", j + 1),
                    metric.clone(),
                    model.loadings[i][j].to_string(),
                ],
            );
        }
    }
    out
}

/// `benchmark,group,pc1..pcK` rows of the score matrix.
pub fn scores_csv(model: &PcaModel) -> String {
    let mut out = String::new();
    let mut header = vec!["benchmark".to_string(), "group".to_string()];
    header.extend((1..=model.n_components()).map(|j| format!("pc{j}")));
    csvutil::push_record(&mut out, &header);
    for (label, row) in model.row_labels.iter().zip(&model.scores) {
        let mut fields = vec![label.benchmark_id.clone(), label.group.clone()];
        fields.extend(row.iter().map(|v| v.to_string()));
        csvutil::push_record(&mut out, &fields);
    }
    out
}

/// `component,eigenvalue,explained_ratio,cumulative_ratio` per component.
pub fn variance_csv(model: &PcaModel) -> String {
    let mut out = String::new();
    out.push_str("component,eigenvalue,explained_ratio,cumulative_ratio\n");
    let mut cum = 0.0;
    for j in 0..model.n_components() {
        cum += model.explained_ratio[j];
        csvutil::push_record(
            &mut out,
            &[
                format!("PC{}", j + 1),
                model.eigenvalues[j].to_string(),
                model.explained_ratio[j].to_string(),
                cum.to_string(),
            ],
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(id: &str) -> RowLabel {
        RowLabel {
            benchmark_id: id.into(),
            group: "g".into(),
        }
    }

    fn matrix(cols: &[&str], values: Vec<Vec<f64>>) -> DataMatrix {
        let labels = (0..values.len()).map(|i| label(&format!("b{i}"))).collect();
        DataMatrix::new(labels, cols.iter().map(|s| s.to_string()).collect(), values).unwrap()
    }

    const EPS: f64 = 1e-9;

    #[test]
    fn standardize_unit_column() {
        // [1,2,3]: mean 2, sample stddev 1 → [-1,0,1]
        let x = matrix(&["m"], vec![vec![1.0], vec![2.0], vec![3.0]]);
        let s = standardize(&x).unwrap();
        assert_eq!(s.means, vec![2.0]);
        assert!((s.stddevs[0] - 1.0).abs() < EPS);
        let col: Vec<f64> = s.matrix.values.iter().map(|r| r[0]).collect();
        assert!((col[0] + 1.0).abs() < EPS && col[1].abs() < EPS && (col[2] - 1.0).abs() < EPS);
    }

    #[test]
    fn standardize_scaled_column() {
        // [2,4,6]: mean 4, sample stddev 2 → [-1,0,1]
        let x = matrix(&["m"], vec![vec![2.0], vec![4.0], vec![6.0]]);
        let s = standardize(&x).unwrap();
        assert!((s.stddevs[0] - 2.0).abs() < EPS);
        let col: Vec<f64> = s.matrix.values.iter().map(|r| r[0]).collect();
        assert!((col[0] + 1.0).abs() < EPS && (col[2] - 1.0).abs() < EPS);
    }

    #[test]
    fn standardize_drops_constant_column() {
        let x = matrix(
            &["c", "m"],
            vec![vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 3.0]],
        );
        let s = standardize(&x).unwrap();
        assert_eq!(s.dropped_cols, vec!["c"]);
        assert_eq!(s.matrix.col_labels, vec!["m"]);
    }

    #[test]
    fn standardize_post_conditions() {
        let x = matrix(
            &["a", "b"],
            vec![vec![1.0, 9.0], vec![4.0, 2.0], vec![2.0, 7.0], vec![8.0, 1.0]],
        );
        let s = standardize(&x).unwrap();
        for j in 0..2 {
            let col: Vec<f64> = s.matrix.values.iter().map(|r| r[j]).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (col.len() as f64 - 1.0);
            assert!(mean.abs() <= 1e-12);
            assert!((var.sqrt() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn too_few_rows_rejected() {
        let labels = vec![label("only")];
        assert!(matches!(
            DataMatrix::new(labels, vec!["m".into()], vec![vec![1.0]]),
            Err(PcaError::TooFewRows(1))
        ));
    }

    #[test]
    fn identical_columns_closed_form() {
        // Correlation matrix [[1,1],[1,1]]: eigenvalues [2,0], PC1 ∝ (1,1)/√2.
        let x = matrix(
            &["m1", "m2"],
            vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]],
        );
        let model = fit_model(&x, vec![]).unwrap();
        assert!((model.eigenvalues[0] - 2.0).abs() < EPS);
        assert!(model.eigenvalues[1].abs() < EPS);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((model.loadings[0][0] - inv_sqrt2).abs() < EPS);
        assert!((model.loadings[1][0] - inv_sqrt2).abs() < EPS);
        let pc1: Vec<f64> = model.scores.iter().map(|r| r[0]).collect();
        let sqrt2 = std::f64::consts::SQRT_2;
        assert!((pc1[0] + sqrt2).abs() < EPS);
        assert!(pc1[1].abs() < EPS);
        assert!((pc1[2] - sqrt2).abs() < EPS);
        assert!((model.explained_ratio[0] - 1.0).abs() < EPS);
        assert!(model.explained_ratio[1].abs() < EPS);
    }

    #[test]
    fn uncorrelated_columns_split_variance() {
        // Sample correlation exactly zero by symmetry → identity matrix.
        let x = matrix(
            &["m1", "m2"],
            vec![
                vec![1.0, 1.0],
                vec![1.0, -1.0],
                vec![-1.0, 1.0],
                vec![-1.0, -1.0],
            ],
        );
        let model = fit_model(&x, vec![]).unwrap();
        assert!((model.eigenvalues[0] - 1.0).abs() < EPS);
        assert!((model.eigenvalues[1] - 1.0).abs() < EPS);
        assert!((model.explained_ratio[0] - 0.5).abs() < EPS);
        assert!((cumulative_variance(&model, 1) - 0.5).abs() < EPS);
    }

    #[test]
    fn single_column_is_identity_model() {
        let x = matrix(&["m"], vec![vec![1.0], vec![2.0], vec![3.0]]);
        let model = fit_model(&x, vec![]).unwrap();
        assert_eq!(model.loadings, vec![vec![1.0]]);
        assert!((model.eigenvalues[0] - 1.0).abs() < EPS);
        let std = standardize(&x).unwrap();
        for (score_row, y_row) in model.scores.iter().zip(&std.matrix.values) {
            assert!((score_row[0] - y_row[0]).abs() < EPS);
        }
    }

    #[test]
    fn sign_convention_flips_column() {
        // Build a model then verify each loading column's largest-magnitude
        // entry is positive.
        let x = matrix(
            &["a", "b", "c"],
            vec![
                vec![1.0, -9.0, 2.0],
                vec![2.0, -7.0, 1.5],
                vec![3.0, -2.0, 4.0],
                vec![4.0, -1.0, 0.5],
                vec![5.0, -5.0, 2.5],
            ],
        );
        let model = fit_model(&x, vec![]).unwrap();
        for j in 0..model.n_components() {
            let col: Vec<f64> = (0..model.n_components()).map(|i| model.loadings[i][j]).collect();
            let max = col.iter().cloned().fold(f64::MIN, f64::max);
            let max_abs = col.iter().map(|v| v.abs()).fold(f64::MIN, f64::max);
            assert!((max - max_abs).abs() < 1e-12, "column {j} not sign-fixed: {col:?}");
        }
    }

    #[test]
    fn loading_table_sorted_by_magnitude() {
        let x = matrix(
            &["m1", "m2"],
            vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]],
        );
        let model = fit_model(&x, vec![]).unwrap();
        let table = loading_table(&model, 1).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].component, 1);
        assert_eq!(table[0].entries.len(), 2);
        assert_eq!(table[0].entries[0].metric, "m1");
        assert!((table[0].entries[0].loading - std::f64::consts::FRAC_1_SQRT_2).abs() < EPS);
        let text = render_loading_table(&table);
        assert!(text.contains("+0.707"));
    }

    #[test]
    fn loading_render_uses_three_decimals() {
        let table = vec![ComponentLoadings {
            component: 1,
            entries: vec![
                LoadingEntry { metric: "hot".into(), loading: 0.9 },
                LoadingEntry { metric: "cold".into(), loading: -0.1 },
            ],
        }];
        let text = render_loading_table(&table);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "PC1");
        assert!(lines[1].contains("+0.900"));
        assert!(lines[2].contains("-0.100"));
    }

    #[test]
    fn scatter_points_from_scores() {
        let x = matrix(
            &["m1", "m2"],
            vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]],
        );
        let model = fit_model(&x, vec![]).unwrap();
        let points = scatter_data(&model, 1, 2).unwrap();
        let sqrt2 = std::f64::consts::SQRT_2;
        assert_eq!(points.len(), 3);
        assert!((points[0].x + sqrt2).abs() < EPS && points[0].y.abs() < EPS);
        assert!(points[1].x.abs() < EPS);
        assert!((points[2].x - sqrt2).abs() < EPS);

        let diag = scatter_data(&model, 1, 1).unwrap();
        for p in diag {
            assert_eq!(p.x, p.y);
        }

        assert!(matches!(
            scatter_data(&model, 1, 3),
            Err(PcaError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn cumulative_variance_total_is_one() {
        let x = matrix(
            &["a", "b", "c"],
            vec![
                vec![1.0, 5.0, 2.0],
                vec![2.0, 3.0, 8.0],
                vec![3.0, 8.0, 1.0],
                vec![4.0, 1.0, 9.0],
            ],
        );
        let model = fit_model(&x, vec![]).unwrap();
        assert!((cumulative_variance(&model, model.n_components()) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn metrics_csv_roundtrip_with_gaps() {
        let text = "benchmark_id,group,a,b\nx,g,1,2\ny,g,3,\nz,h,5,6\n";
        let (matrix, dropped) = load_metrics_csv(text).unwrap();
        assert_eq!(dropped, vec!["g/y"]);
        assert_eq!(matrix.n_rows(), 2);
        assert_eq!(matrix.col_labels, vec!["a", "b"]);
        assert_eq!(matrix.values[0], vec![1.0, 2.0]);
    }

    #[test]
    fn metrics_csv_bad_header_rejected() {
        assert!(load_metrics_csv("id,grp,a\nx,g,1\n").is_err());
    }

    #[test]
    fn csv_exports_have_expected_shapes() {
        let x = matrix(
            &["m1", "m2"],
            vec![vec![1.0, 1.0], vec![2.0, 2.5], vec![3.0, 2.0]],
        );
        let model = fit_model(&x, vec![]).unwrap();
        assert_eq!(loadings_csv(&model).lines().count(), 1 + 4);
        assert_eq!(scores_csv(&model).lines().count(), 1 + 3);
        assert_eq!(variance_csv(&model).lines().count(), 1 + 2);
        assert!(scores_csv(&model).starts_with("benchmark,group,pc1,pc2\n"));
    }
}
