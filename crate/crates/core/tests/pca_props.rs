//! Property tests for the PCA implementation, checked against independent
//! oracles (closed-form characteristic-polynomial eigenvalues for K ≤ 3).

use proptest::prelude::*;

use wasubench_core::pca::{fit_model, standardize, DataMatrix, RowLabel};

fn labels(n: usize) -> Vec<RowLabel> {
    (0..n)
        .map(|i| RowLabel {
            benchmark_id: format!("b{i}"),
            group: "g".into(),
        })
        .collect()
}

fn cols(k: usize) -> Vec<String> {
    (0..k).map(|j| format!("m{j}")).collect()
}

fn matrix_strategy() -> impl Strategy<Value = DataMatrix> {
    (5usize..=20, 2usize..=8).prop_flat_map(|(n, k)| {
        proptest::collection::vec(
            proptest::collection::vec(-100.0f64..100.0, k..=k),
            n..=n,
        )
        .prop_filter_map("degenerate columns", move |values| {
            DataMatrix::new(labels(values.len()), cols(k), values).ok()
        })
    })
}

/// Sample correlation matrix computed independently of the implementation.
fn correlation(y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = y.len();
    let k = y[0].len();
    let mut c = vec![vec![0.0; k]; k];
    for row in y {
        for i in 0..k {
            for j in 0..k {
                c[i][j] += row[i] * row[j];
            }
        }
    }
    for row in &mut c {
        for v in row.iter_mut() {
            *v /= n as f64 - 1.0;
        }
    }
    c
}

/// Closed-form eigenvalues of a symmetric 2×2 or 3×3 matrix via the
/// characteristic polynomial.
fn charpoly_eigenvalues(c: &[Vec<f64>]) -> Vec<f64> {
    match c.len() {
        1 => vec![c[0][0]],
        2 => {
            let (a, b, d) = (c[0][0], c[0][1], c[1][1]);
            let mid = (a + d) / 2.0;
            let disc = ((a - d) / 2.0).powi(2) + b * b;
            let r = disc.sqrt();
            vec![mid + r, mid - r]
        }
        3 => {
            // Trigonometric solution for symmetric 3×3 (Smith's method).
            let p1 = c[0][1].powi(2) + c[0][2].powi(2) + c[1][2].powi(2);
            if p1 == 0.0 {
                let mut d = vec![c[0][0], c[1][1], c[2][2]];
                d.sort_by(|a, b| b.partial_cmp(a).unwrap());
                return d;
            }
            let q = (c[0][0] + c[1][1] + c[2][2]) / 3.0;
            let p2 = (c[0][0] - q).powi(2) + (c[1][1] - q).powi(2) + (c[2][2] - q).powi(2) + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            let b: Vec<Vec<f64>> = (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| (c[i][j] - if i == j { q } else { 0.0 }) / p)
                        .collect()
                })
                .collect();
            let detb = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
                - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
                + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
            let r = (detb / 2.0).clamp(-1.0, 1.0);
            let phi = r.acos() / 3.0;
            let e1 = q + 2.0 * p * phi.cos();
            let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
            let e2 = 3.0 * q - e1 - e3;
            vec![e1, e2, e3]
        }
        _ => panic!("oracle only covers K<=3"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loadings_are_orthonormal(x in matrix_strategy()) {
        let model = fit_model(&x, vec![]).unwrap();
        let k = model.n_components();
        for a in 0..k {
            for b in 0..k {
                let dot: f64 = (0..k).map(|i| model.loadings[i][a] * model.loadings[i][b]).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - expected).abs() <= 1e-8, "L^T L [{a}][{b}] = {dot}");
            }
        }
    }

    #[test]
    fn eigenvalues_nonincreasing_and_nonnegative(x in matrix_strategy()) {
        let model = fit_model(&x, vec![]).unwrap();
        for w in model.eigenvalues.windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-12);
        }
        for &l in &model.eigenvalues {
            prop_assert!(l >= 0.0);
        }
        let sum: f64 = model.explained_ratio.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn score_variance_equals_eigenvalue(x in matrix_strategy()) {
        let model = fit_model(&x, vec![]).unwrap();
        let n = model.scores.len();
        for j in 0..model.n_components() {
            let mean: f64 = model.scores.iter().map(|r| r[j]).sum::<f64>() / n as f64;
            let var: f64 = model.scores.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>()
                / (n as f64 - 1.0);
            prop_assert!((var - model.eigenvalues[j]).abs() <= 1e-8,
                "var(S_{j}) = {var}, λ = {}", model.eigenvalues[j]);
        }
    }

    #[test]
    fn reconstruction_from_scores(x in matrix_strategy()) {
        // Y = S Lᵀ since L is orthogonal.
        let std = standardize(&x).unwrap();
        let model = fit_model(&x, vec![]).unwrap();
        let k = model.n_components();
        for (row_y, row_s) in std.matrix.values.iter().zip(&model.scores) {
            for i in 0..k {
                let rebuilt: f64 = (0..k).map(|j| row_s[j] * model.loadings[i][j]).sum();
                prop_assert!((rebuilt - row_y[i]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn pc1_captures_maximum_variance(x in matrix_strategy()) {
        let std = standardize(&x).unwrap();
        let model = fit_model(&x, vec![]).unwrap();
        let y = &std.matrix.values;
        let n = y.len();
        let k = model.n_components();
        // Deterministic pseudo-random unit directions.
        let mut seed = 0x9E37_79B9_7F4A_7C15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        for _ in 0..50 {
            let mut u: Vec<f64> = (0..k).map(|_| next()).collect();
            let norm: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 { continue; }
            for v in u.iter_mut() { *v /= norm; }
            let proj: Vec<f64> = y.iter().map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum()).collect();
            let mean: f64 = proj.iter().sum::<f64>() / n as f64;
            let var: f64 = proj.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            prop_assert!(var <= model.eigenvalues[0] + 1e-8);
        }
    }

    #[test]
    fn eigenvalues_match_charpoly_oracle(
        values in proptest::collection::vec(proptest::collection::vec(-50.0f64..50.0, 3), 6..=12)
    ) {
        let k = 3;
        let Ok(x) = DataMatrix::new(labels(values.len()), cols(k), values) else { return Ok(()); };
        let Ok(std) = standardize(&x) else { return Ok(()); };
        if std.matrix.n_cols() != k { return Ok(()); } // dropped a constant column
        let model = fit_model(&x, vec![]).unwrap();
        let mut oracle = charpoly_eigenvalues(&correlation(&std.matrix.values));
        oracle.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (got, want) in model.eigenvalues.iter().zip(&oracle) {
            prop_assert!((got - want).abs() <= 1e-6, "eig {got} vs oracle {want}");
        }
    }

    #[test]
    fn column_scaling_is_absorbed(
        values in proptest::collection::vec(proptest::collection::vec(0.5f64..50.0, 4), 6..=10),
        col in 0usize..4,
    ) {
        let k = 4;
        let Ok(x) = DataMatrix::new(labels(values.len()), cols(k), values.clone()) else { return Ok(()); };
        let mut scaled_values = values;
        for row in scaled_values.iter_mut() {
            row[col] *= 1000.0;
        }
        let Ok(x2) = DataMatrix::new(labels(scaled_values.len()), cols(k), scaled_values) else { return Ok(()); };
        let (Ok(m1), Ok(m2)) = (fit_model(&x, vec![]), fit_model(&x2, vec![])) else { return Ok(()); };
        if m1.n_components() != m2.n_components() { return Ok(()); }
        for (a, b) in m1.eigenvalues.iter().zip(&m2.eigenvalues) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        for (ra, rb) in m1.loadings.iter().zip(&m2.loadings) {
            for (a, b) in ra.iter().zip(rb) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }
        for (ra, rb) in m1.scores.iter().zip(&m2.scores) {
            for (a, b) in ra.iter().zip(rb) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }
    }
}
