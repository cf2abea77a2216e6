//! Polynomial chaos expansion response surfaces.
//!
//! Uniform inputs on `[-1, 1]^P` pair with the orthonormal Legendre family,
//! so expansion coefficients are directly comparable and the constant
//! coefficient equals the output mean. Bases are truncated by total degree
//! or a hyperbolic quasi-norm; coefficients come from ordinary least squares
//! or from the sparse adaptive path in [`lar`].

pub mod lar;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RomError};
use crate::linalg::qr_factor;

const DOMAIN_TOL: f64 = 1e-12;

/// Orthonormal Legendre polynomial `sqrt(2d + 1) P_d(x)` on `[-1, 1]`.
///
/// With this scaling `E[psi_d^2] = 1` under the uniform density `1/2`.
pub fn legendre_eval(degree: usize, x: f64) -> Result<f64> {
    if x.abs() > 1.0 + DOMAIN_TOL {
        return Err(RomError::Validation(format!(
            "Legendre argument {x} outside [-1, 1]"
        )));
    }
    Ok(legendre_unchecked(degree, x))
}

#[inline]
fn legendre_unchecked(degree: usize, x: f64) -> f64 {
    // Three-term recurrence on the unnormalized P_d.
    let mut prev = 1.0;
    if degree == 0 {
        return 1.0;
    }
    let mut cur = x;
    for k in 1..degree {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    ((2 * degree + 1) as f64).sqrt() * cur
}

/// Per-dimension polynomial degrees of one tensor basis function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    degrees: Vec<u32>,
}

impl MultiIndex {
    pub fn new(degrees: Vec<u32>) -> Self {
        Self { degrees }
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn total_degree(&self) -> u32 {
        self.degrees.iter().sum()
    }

    /// `(sum_i d_i^q)^(1/q)` for `q` in `(0, 1]`.
    pub fn quasi_norm(&self, q: f64) -> f64 {
        self.degrees
            .iter()
            .map(|&d| (d as f64).powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }

    pub fn is_constant(&self) -> bool {
        self.degrees.iter().all(|&d| d == 0)
    }
}

/// All multi-indices over `p` dimensions with `q`-quasi-norm at most
/// `max_total_degree`, sorted by (total degree, descending lexicographic).
///
/// `q = 1` reproduces the total-degree basis with `K = C(p + d, d)`.
/// Fails if the basis would exceed `cap` entries.
pub fn build_basis(
    p: usize,
    max_total_degree: usize,
    q: f64,
    cap: usize,
) -> Result<Vec<MultiIndex>> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(RomError::Config(format!("q-norm {q} outside (0, 1]")));
    }
    let budget = (max_total_degree as f64).powf(q) + 1e-9;
    let mut out = Vec::new();
    let mut current = vec![0u32; p];
    enumerate(0, budget, q, max_total_degree as u32, &mut current, &mut out, cap)?;
    out.sort_by(|a, b| {
        a.total_degree()
            .cmp(&b.total_degree())
            .then_with(|| b.degrees.cmp(&a.degrees))
    });
    Ok(out)
}

fn enumerate(
    dim: usize,
    budget: f64,
    q: f64,
    max_deg: u32,
    current: &mut Vec<u32>,
    out: &mut Vec<MultiIndex>,
    cap: usize,
) -> Result<()> {
    if dim == current.len() {
        if out.len() >= cap {
            return Err(RomError::Resource(format!(
                "basis size exceeds the configured cap of {cap} terms"
            )));
        }
        out.push(MultiIndex::new(current.clone()));
        return Ok(());
    }
    let mut d = 0u32;
    while d <= max_deg {
        let cost = (d as f64).powf(q);
        if cost > budget {
            break;
        }
        current[dim] = d;
        enumerate(dim + 1, budget - cost, q, max_deg, current, out, cap)?;
        d += 1;
    }
    current[dim] = 0;
    Ok(())
}

/// Evaluates the tensor basis at `points` (`M x P`, normalized), giving the
/// regression matrix with entry `(m, k) = prod_i psi_{a_ki}(x_mi)`.
pub fn evaluate_basis_matrix(points: &Array2<f64>, basis: &[MultiIndex]) -> Result<Array2<f64>> {
    let (m, p) = points.dim();
    if basis.is_empty() {
        return Err(RomError::Config("basis must be non-empty".into()));
    }
    if basis.iter().any(|mi| mi.degrees.len() != p) {
        return Err(RomError::Config(
            "multi-index dimension does not match point dimension".into(),
        ));
    }
    let max_deg = basis
        .iter()
        .flat_map(|mi| mi.degrees.iter().copied())
        .max()
        .unwrap_or(0) as usize;
    let mut psi = Array2::zeros((m, basis.len()));
    let mut table = vec![0.0f64; p * (max_deg + 1)];
    for (row, x) in points.rows().into_iter().enumerate() {
        for (i, &xi) in x.iter().enumerate() {
            if xi.abs() > 1.0 + DOMAIN_TOL {
                return Err(RomError::Validation(format!(
                    "point {row} coordinate {i} = {xi} outside [-1, 1]; inputs must be normalized"
                )));
            }
            for d in 0..=max_deg {
                table[i * (max_deg + 1) + d] = legendre_unchecked(d, xi);
            }
        }
        for (k, mi) in basis.iter().enumerate() {
            let mut prod = 1.0;
            for (i, &d) in mi.degrees.iter().enumerate() {
                if d > 0 {
                    prod *= table[i * (max_deg + 1) + d as usize];
                }
            }
            psi[[row, k]] = prod;
        }
    }
    Ok(psi)
}

/// Ordinary least squares fit with the corrected leave-one-out estimate.
pub struct LeastSquaresFit {
    /// `K x D` coefficients.
    pub coefficients: Array2<f64>,
    /// Relative corrected leave-one-out error per output column.
    pub loo: Vec<f64>,
}

/// Solves `min (1/M) sum_m || y_m - Psi_m a ||^2` by Householder QR.
///
/// The returned leave-one-out estimate uses the closed-form hat-matrix
/// identity with the empirical correction factor
/// `T = (1 + tr(C^-1)/M) / (1 - K/M)`, `C = Psi^T Psi / M`, normalized by
/// the sample variance of each output.
pub fn fit_least_squares(psi: &Array2<f64>, y: &Array2<f64>) -> Result<LeastSquaresFit> {
    let (m, k) = psi.dim();
    if y.nrows() != m {
        return Err(RomError::Data(format!(
            "{} rows of outputs for {} rows of basis values",
            y.nrows(),
            m
        )));
    }
    if m < k {
        return Err(RomError::Numerical(format!(
            "least squares needs M >= K (got M = {m}, K = {k})"
        )));
    }
    let qr = qr_factor(psi)?;
    let cond = qr.diagonal_condition();
    if !cond.is_finite() || cond > 1e12 {
        return Err(RomError::Numerical(format!(
            "regression matrix is rank deficient (condition estimate {cond:.2e}); \
             use the sparse adaptive fit or more samples"
        )));
    }
    let d = y.ncols();
    let mut coefficients = Array2::zeros((k, d));
    let h = qr.hat_diagonal();
    let trace_cinv = m as f64 * qr.normal_inverse_trace();
    let correction = if m > k {
        (1.0 + trace_cinv / m as f64) / (1.0 - k as f64 / m as f64)
    } else {
        f64::INFINITY
    };
    let mut loo = Vec::with_capacity(d);
    for col in 0..d {
        let yc = y.column(col).to_owned();
        let a = qr.solve(&yc.view());
        for (row, v) in a.iter().enumerate() {
            coefficients[[row, col]] = *v;
        }
        let fitted = psi.dot(&a);
        let mut raw = 0.0f64;
        let mut degenerate = false;
        for i in 0..m {
            let denom = 1.0 - h[i];
            if denom <= 1e-12 {
                degenerate = true;
                break;
            }
            let e = (yc[i] - fitted[i]) / denom;
            raw += e * e;
        }
        let mean = yc.sum() / m as f64;
        let var =
            yc.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m as f64 - 1.0).max(1.0);
        let value = if degenerate {
            f64::INFINITY
        } else {
            let raw = raw / m as f64 * correction;
            if var < 1e-28 {
                if raw < 1e-24 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                raw / var
            }
        };
        loo.push(value);
    }
    Ok(LeastSquaresFit { coefficients, loo })
}

/// Metadata recorded with a fitted expansion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PceMeta {
    pub truncation: String,
    pub q: f64,
    /// Highest candidate degree each output settled on.
    pub degrees: Vec<usize>,
    /// Relative corrected leave-one-out error per output.
    pub loo: Vec<f64>,
}

/// A fitted polynomial chaos expansion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PceModel {
    input_dim: usize,
    basis: Vec<MultiIndex>,
    /// `K x D`.
    coefficients: Vec<Vec<f64>>,
    meta: PceMeta,
}

impl PceModel {
    pub fn new(
        input_dim: usize,
        basis: Vec<MultiIndex>,
        coefficients: Array2<f64>,
        meta: PceMeta,
    ) -> Result<Self> {
        if coefficients.nrows() != basis.len() {
            return Err(RomError::Data(format!(
                "{} coefficient rows for {} basis terms",
                coefficients.nrows(),
                basis.len()
            )));
        }
        let mut unique = basis.clone();
        unique.sort_by(|a, b| a.degrees.cmp(&b.degrees));
        unique.dedup();
        if unique.len() != basis.len() {
            return Err(RomError::Data("basis entries must be unique".into()));
        }
        Ok(Self {
            input_dim,
            basis,
            coefficients: coefficients.rows().into_iter().map(|r| r.to_vec()).collect(),
            meta,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.coefficients.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn meta(&self) -> &PceMeta {
        &self.meta
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "p": self.input_dim,
            "basis": self.basis.iter().map(|b| b.degrees.clone()).collect::<Vec<_>>(),
            "coeffs": self.coefficients,
            "meta": self.meta,
        }))
        .expect("PCE model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            p: usize,
            basis: Vec<Vec<u32>>,
            coeffs: Vec<Vec<f64>>,
            meta: PceMeta,
        }
        let raw: Raw = serde_json::from_str(text)?;
        let k = raw.basis.len();
        if raw.coeffs.len() != k {
            return Err(RomError::Data("coefficient/basis size mismatch".into()));
        }
        let d = raw.coeffs.first().map(|r| r.len()).unwrap_or(0);
        let flat: Vec<f64> = raw.coeffs.iter().flatten().copied().collect();
        let coefficients = Array2::from_shape_vec((k, d), flat)
            .map_err(|e| RomError::Data(format!("coefficient shape: {e}")))?;
        Self::new(
            raw.p,
            raw.basis.into_iter().map(MultiIndex::new).collect(),
            coefficients,
            raw.meta,
        )
    }
}

/// Evaluates the expansion at one normalized point.
pub fn pce_predict(model: &PceModel, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != model.input_dim {
        return Err(RomError::Validation(format!(
            "input has {} coordinates, model expects {}",
            x.len(),
            model.input_dim
        )));
    }
    for (i, &xi) in x.iter().enumerate() {
        if xi.abs() > 1.0 + DOMAIN_TOL {
            return Err(RomError::Validation(format!(
                "coordinate {i} = {xi} outside [-1, 1]"
            )));
        }
    }
    let max_deg = model
        .basis
        .iter()
        .flat_map(|mi| mi.degrees.iter().copied())
        .max()
        .unwrap_or(0) as usize;
    let p = model.input_dim;
    let mut table = vec![0.0f64; p * (max_deg + 1)];
    for (i, &xi) in x.iter().enumerate() {
        for d in 0..=max_deg {
            table[i * (max_deg + 1) + d] = legendre_unchecked(d, xi);
        }
    }
    let d_out = model.output_dim();
    let mut out = vec![0.0f64; d_out];
    for (k, mi) in model.basis.iter().enumerate() {
        let mut prod = 1.0;
        for (i, &d) in mi.degrees.iter().enumerate() {
            if d > 0 {
                prod *= table[i * (max_deg + 1) + d as usize];
            }
        }
        for (o, c) in out.iter_mut().zip(&model.coefficients[k]) {
            *o += prod * c;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::Array1;
    use rand::Rng;

    use crate::seeding::stream_rng;

    /// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (pn, dpn) = legendre_with_derivative(n, x);
                let dx = pn / dpn;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dpn) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dpn * dpn);
            out.push((x, w));
        }
        out
    }

    fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
        let mut p0 = 1.0;
        let mut p1 = x;
        if n == 0 {
            return (1.0, 0.0);
        }
        for k in 1..n {
            let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    }

    #[test]
    fn legendre_base_cases() {
        for &x in &[-1.0, -0.3, 0.0, 0.9, 1.0] {
            assert_eq!(legendre_eval(0, x).unwrap(), 1.0);
        }
        assert_relative_eq!(
            legendre_eval(1, 0.5).unwrap(),
            3f64.sqrt() * 0.5,
            max_relative = 1e-15
        );
        assert!(legendre_eval(2, 1.0 + 1e-6).is_err());
    }

    #[test]
    fn legendre_orthonormal_under_quadrature() {
        // Gauss-Legendre with 8 nodes is exact for degree <= 15.
        let rule = gauss_legendre(8);
        for d1 in 0..=5usize {
            for d2 in 0..=5usize {
                let integral: f64 = rule
                    .iter()
                    .map(|&(x, w)| {
                        0.5 * w * legendre_eval(d1, x).unwrap() * legendre_eval(d2, x).unwrap()
                    })
                    .sum();
                let expect = if d1 == d2 { 1.0 } else { 0.0 };
                assert!(
                    (integral - expect).abs() < 1e-12,
                    "({d1},{d2}) -> {integral}"
                );
            }
        }
    }

    #[test]
    fn total_degree_basis_matches_reference_order() {
        let basis = build_basis(2, 2, 1.0, 1000).unwrap();
        let degrees: Vec<Vec<u32>> = basis.iter().map(|b| b.degrees().to_vec()).collect();
        assert_eq!(
            degrees,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2],
            ]
        );
    }

    #[test]
    fn basis_count_for_twenty_dims() {
        // C(22, 2) = 231.
        let basis = build_basis(20, 2, 1.0, 20_000).unwrap();
        assert_eq!(basis.len(), 231);
    }

    #[test]
    fn hyperbolic_basis_is_subset_of_total_degree() {
        let full = build_basis(5, 4, 1.0, 20_000).unwrap();
        let hyper = build_basis(5, 4, 0.5, 20_000).unwrap();
        assert!(hyper.len() < full.len());
        for mi in &hyper {
            assert!(full.contains(mi));
        }
    }

    #[test]
    fn basis_cap_is_enforced() {
        let err = build_basis(10, 4, 1.0, 50).unwrap_err();
        assert!(err.to_string().contains("50"), "{err}");
    }

    #[test]
    fn basis_matrix_constant_column_and_odd_degrees_at_origin() {
        let basis = build_basis(3, 2, 1.0, 1000).unwrap();
        let points = Array2::zeros((1, 3));
        let psi = evaluate_basis_matrix(&points, &basis).unwrap();
        for (k, mi) in basis.iter().enumerate() {
            if mi.is_constant() {
                assert_eq!(psi[[0, k]], 1.0);
            }
            if mi.degrees().iter().any(|&d| d % 2 == 1) {
                assert_eq!(psi[[0, k]], 0.0, "odd-degree term {k} at origin");
            }
        }
    }

    #[test]
    fn basis_matrix_rejects_unnormalized_points() {
        let basis = build_basis(2, 1, 1.0, 100).unwrap();
        let mut pts = Array2::zeros((1, 2));
        pts[[0, 1]] = 1.5;
        assert!(evaluate_basis_matrix(&pts, &basis).is_err());
    }

    #[test]
    fn monte_carlo_gram_is_near_identity() {
        let basis = build_basis(3, 2, 1.0, 1000).unwrap();
        let m = 100_000;
        let mut rng = stream_rng(2, 0);
        let pts = Array2::from_shape_fn((m, 3), |_| rng.gen_range(-1.0..1.0));
        let psi = evaluate_basis_matrix(&pts, &basis).unwrap();
        let gram = psi.t().dot(&psi) / m as f64;
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[[i, j]] - expect).abs() < 0.05,
                    "gram[{i},{j}] = {}",
                    gram[[i, j]]
                );
            }
        }
    }

    #[test]
    fn ols_recovers_realizable_target() {
        let p = 4;
        let basis = build_basis(p, 2, 1.0, 1000).unwrap();
        let k = basis.len();
        let m = 3 * k;
        let mut rng = stream_rng(3, 0);
        let pts = Array2::from_shape_fn((m, p), |_| rng.gen_range(-1.0..1.0));
        let psi = evaluate_basis_matrix(&pts, &basis).unwrap();
        let truth = Array1::from_shape_fn(k, |i| ((i * 7 % 13) as f64 - 6.0) / 3.0);
        let y = psi.dot(&truth).insert_axis(ndarray::Axis(1));
        let fit = fit_least_squares(&psi, &y).unwrap();
        for (a, b) in fit.coefficients.column(0).iter().zip(truth.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-8, epsilon = 1e-10);
        }
        assert!(fit.loo[0] < 1e-12);
    }

    #[test]
    fn ols_zero_target_gives_zero_coefficients() {
        let basis = build_basis(2, 2, 1.0, 100).unwrap();
        let mut rng = stream_rng(4, 0);
        let pts = Array2::from_shape_fn((40, 2), |_| rng.gen_range(-1.0..1.0));
        let psi = evaluate_basis_matrix(&pts, &basis).unwrap();
        let y = Array2::zeros((40, 2));
        let fit = fit_least_squares(&psi, &y).unwrap();
        for v in fit.coefficients.iter() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn ols_two_point_hand_solution() {
        // P = 1, basis {1, psi1}, data {(-1, -sqrt(3)), (1, sqrt(3))}:
        // psi1(x) = sqrt(3) x, so a = (0, 1).
        let basis = build_basis(1, 1, 1.0, 10).unwrap();
        let pts = Array2::from_shape_vec((2, 1), vec![-1.0, 1.0]).unwrap();
        let psi = evaluate_basis_matrix(&pts, &basis).unwrap();
        let y = Array2::from_shape_vec((2, 1), vec![-(3f64.sqrt()), 3f64.sqrt()]).unwrap();
        let fit = fit_least_squares(&psi, &y).unwrap();
        assert!(fit.coefficients[[0, 0]].abs() < 1e-12);
        assert_relative_eq!(fit.coefficients[[1, 0]], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn ols_rejects_rank_deficiency() {
        let basis = build_basis(2, 2, 1.0, 100).unwrap();
        // All points identical: columns collinear.
        let pts = Array2::from_shape_fn((40, 2), |_| 0.25);
        let psi = evaluate_basis_matrix(&pts, &basis).unwrap();
        let y = Array2::zeros((40, 1));
        assert!(fit_least_squares(&psi, &y).is_err());
    }

    #[test]
    fn interpolatory_fit_reproduces_training_values() {
        let p = 2;
        let basis = build_basis(p, 2, 1.0, 100).unwrap();
        let k = basis.len();
        let mut rng = stream_rng(5, 0);
        let pts = Array2::from_shape_fn((k, p), |_| rng.gen_range(-1.0..1.0));
        let psi = evaluate_basis_matrix(&pts, &basis).unwrap();
        let y = Array2::from_shape_fn((k, 1), |_| rng.gen_range(-2.0..2.0));
        let fit = fit_least_squares(&psi, &y).unwrap();
        let model = PceModel::new(
            p,
            basis,
            fit.coefficients,
            PceMeta {
                truncation: "total-degree".into(),
                q: 1.0,
                degrees: vec![2],
                loo: fit.loo,
            },
        )
        .unwrap();
        for i in 0..k {
            let pred = pce_predict(&model, &pts.row(i).to_vec()).unwrap();
            assert_relative_eq!(pred[0], y[[i, 0]], max_relative = 1e-8, epsilon = 1e-8);
        }
    }

    #[test]
    fn constant_model_predicts_constant_and_mean_identity() {
        let basis = build_basis(3, 2, 1.0, 100).unwrap();
        let k = basis.len();
        let mut coeffs = Array2::zeros((k, 1));
        coeffs[[0, 0]] = 4.2;
        coeffs[[3, 0]] = 0.7;
        let model = PceModel::new(
            3,
            basis,
            coeffs,
            PceMeta {
                truncation: "total-degree".into(),
                q: 1.0,
                degrees: vec![2],
                loo: vec![0.0],
            },
        )
        .unwrap();
        // Mean of predictions over uniform draws approaches the constant
        // coefficient; tolerance is 3 standard errors.
        let n = 100_000;
        let mut rng = stream_rng(6, 0);
        let preds: Vec<f64> = (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                pce_predict(&model, &x).unwrap()[0]
            })
            .collect();
        let mean = preds.iter().sum::<f64>() / n as f64;
        let var = preds.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - 4.2).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn permutation_equivariance() {
        let p = 3;
        let basis = build_basis(p, 2, 1.0, 100).unwrap();
        let k = basis.len();
        let mut rng = stream_rng(8, 0);
        let coeffs = Array2::from_shape_fn((k, 1), |_| rng.gen_range(-1.0..1.0));
        let meta = PceMeta {
            truncation: "total-degree".into(),
            q: 1.0,
            degrees: vec![2],
            loo: vec![0.0],
        };
        let model = PceModel::new(p, basis.clone(), coeffs.clone(), meta.clone()).unwrap();
        // Permute dimensions (rotate left) in both indices and inputs.
        let permuted_basis: Vec<MultiIndex> = basis
            .iter()
            .map(|mi| {
                let d = mi.degrees();
                MultiIndex::new(vec![d[1], d[2], d[0]])
            })
            .collect();
        let permuted = PceModel::new(p, permuted_basis, coeffs, meta).unwrap();
        let x = [0.3, -0.8, 0.5];
        let x_perm = [x[1], x[2], x[0]];
        let a = pce_predict(&model, &x).unwrap();
        let b = pce_predict(&permuted, &x_perm).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-12);
    }

    #[test]
    fn model_json_roundtrip() {
        let basis = build_basis(2, 1, 1.0, 100).unwrap();
        let coeffs = Array2::from_shape_vec((3, 2), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let model = PceModel::new(
            2,
            basis,
            coeffs,
            PceMeta {
                truncation: "total-degree".into(),
                q: 1.0,
                degrees: vec![1, 1],
                loo: vec![0.1, 0.2],
            },
        )
        .unwrap();
        let back = PceModel::from_json(&model.to_json()).unwrap();
        assert_eq!(back.basis(), model.basis());
        assert_eq!(back.coefficients(), model.coefficients());
    }
}
