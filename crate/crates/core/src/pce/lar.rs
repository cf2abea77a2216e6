//! Sparse adaptive expansion fitting based on least angle regression.
//!
//! For each candidate degree, LAR ranks basis terms by how early they enter
//! the equiangular path; every prefix of the path is refit by ordinary
//! least squares and scored with the corrected leave-one-out error. The
//! model with the smallest error across prefixes and degrees wins, per
//! output, with early stopping once a target error is reached.

use ndarray::{Array1, Array2};

use crate::error::{Result, RomError};
use crate::linalg::cholesky;

use super::{
    build_basis, evaluate_basis_matrix, fit_least_squares, MultiIndex, PceMeta, PceModel,
};

/// Settings for the sparse adaptive fit.
#[derive(Debug, Clone)]
pub struct PceTrainConfig {
    /// Candidate total degrees, ascending.
    pub degree_range: Vec<usize>,
    /// Hyperbolic truncation exponent in `(0, 1]`.
    pub q: f64,
    /// Stop scanning degrees once every output reaches this relative
    /// leave-one-out error.
    pub target_loo: f64,
    /// Hard cap on candidate basis size.
    pub basis_cap: usize,
    /// Cap on the number of LAR steps (active terms) per output.
    pub max_path_terms: usize,
}

impl Default for PceTrainConfig {
    fn default() -> Self {
        Self {
            degree_range: (1..=5).collect(),
            q: 0.75,
            target_loo: 1e-10,
            basis_cap: 20_000,
            max_path_terms: 60,
        }
    }
}

/// One output's winning sparse fit.
struct SelectedFit {
    terms: Vec<MultiIndex>,
    coefficients: Vec<f64>,
    loo: f64,
    degree: usize,
}

/// Least angle regression entry order over standardized columns.
///
/// `x` must have zero-mean, unit-norm columns; `y` zero mean. Returns the
/// column indices in the order they join the active set; prefixes of the
/// returned vector are the nested LAR active sets.
pub(crate) fn lar_path(x: &Array2<f64>, y: &Array1<f64>, max_terms: usize) -> Vec<usize> {
    let (m, j_total) = x.dim();
    let max_terms = max_terms.min(j_total).min(m.saturating_sub(2));
    let mut residual = y.clone();
    let mut active: Vec<usize> = Vec::new();
    let mut is_active = vec![false; j_total];
    let scale = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);

    while active.len() < max_terms {
        // Correlations with the residual.
        let c = x.t().dot(&residual);
        let mut best = None;
        let mut cmax = 0.0f64;
        for j in 0..j_total {
            if !is_active[j] && c[j].abs() > cmax {
                cmax = c[j].abs();
                best = Some(j);
            }
        }
        let Some(j_new) = best else { break };
        if cmax < 1e-12 * scale {
            break;
        }
        active.push(j_new);
        is_active[j_new] = true;

        // Equiangular direction over the signed active columns.
        let a_len = active.len();
        let mut gram = Array2::zeros((a_len, a_len));
        for (ai, &ja) in active.iter().enumerate() {
            for (bi, &jb) in active.iter().enumerate() {
                gram[[ai, bi]] = x.column(ja).dot(&x.column(jb));
            }
        }
        let signs: Vec<f64> = active.iter().map(|&j| c[j].signum()).collect();
        let Ok(l) = cholesky(&gram) else {
            // New column numerically collinear with the active set; the
            // path cannot continue.
            active.pop();
            break;
        };
        let s = Array1::from_vec(signs.clone());
        let w0 = crate::linalg::solve_lower(&l.view(), &s.view());
        let w = crate::linalg::solve_lower_transpose(&l.view(), &w0.view());
        let denom = s.dot(&w);
        if denom <= 0.0 {
            break;
        }
        let aa = 1.0 / denom.sqrt();
        let mut u = Array1::<f64>::zeros(m);
        for (ai, &ja) in active.iter().enumerate() {
            let wa = aa * w[ai];
            for i in 0..m {
                u[i] += wa * x[[i, ja]];
            }
        }
        let a_corr = x.t().dot(&u);

        // Step length to the next equi-correlation event.
        let cmax_now = active
            .iter()
            .map(|&j| c[j].abs())
            .fold(0.0f64, f64::max);
        let mut gamma = cmax_now / aa;
        for j in 0..j_total {
            if is_active[j] {
                continue;
            }
            for cand in [
                (cmax_now - c[j]) / (aa - a_corr[j]),
                (cmax_now + c[j]) / (aa + a_corr[j]),
            ] {
                if cand > 1e-14 && cand < gamma {
                    gamma = cand;
                }
            }
        }
        residual = &residual - &(gamma * &u);
    }
    active
}

/// Fits one output by scanning the LAR path of one degree's basis.
///
/// Returns the best `(terms, coefficients, loo)` over path prefixes,
/// always including the constant-only candidate when present.
fn fit_output_at_degree(
    basis: &[MultiIndex],
    psi: &Array2<f64>,
    x_std: &Array2<f64>,
    candidate_cols: &[usize],
    y: &Array1<f64>,
    degree: usize,
    max_path_terms: usize,
) -> Result<SelectedFit> {
    let m = psi.nrows();
    let constant_idx = basis
        .iter()
        .position(|mi| mi.is_constant())
        .ok_or_else(|| RomError::Config("candidate basis lacks a constant term".into()))?;

    let y_mean = y.sum() / m as f64;
    let y_centered = y.mapv(|v| v - y_mean);

    let mut best: Option<SelectedFit> = None;
    let mut consider = |terms: Vec<usize>| -> Result<()> {
        let mut cols = vec![constant_idx];
        cols.extend(terms);
        let mut sub = Array2::zeros((m, cols.len()));
        for (ci, &col) in cols.iter().enumerate() {
            for i in 0..m {
                sub[[i, ci]] = psi[[i, col]];
            }
        }
        let ym = y.view().insert_axis(ndarray::Axis(1)).to_owned();
        let fit = match fit_least_squares(&sub, &ym) {
            Ok(f) => f,
            // A degenerate prefix (ill-conditioned subset) is skipped, not fatal.
            Err(RomError::Numerical(_)) => return Ok(()),
            Err(e) => return Err(e),
        };
        let loo = fit.loo[0];
        if best.as_ref().is_none_or(|b| loo < b.loo) {
            best = Some(SelectedFit {
                terms: cols.iter().map(|&c| basis[c].clone()).collect(),
                coefficients: fit.coefficients.column(0).to_vec(),
                loo,
                degree,
            });
        }
        Ok(())
    };

    consider(vec![])?;
    let path = lar_path(x_std, &y_centered, max_path_terms);
    for t in 1..=path.len() {
        let terms: Vec<usize> = path[..t].iter().map(|&j| candidate_cols[j]).collect();
        consider(terms)?;
    }
    best.filter(|b| b.loo.is_finite()).ok_or_else(|| {
        RomError::Numerical("no candidate model achieved a finite leave-one-out error".into())
    })
}

/// Sparse adaptive fit of all outputs, sharing the candidate basis.
///
/// `points` are normalized inputs (`M x P`), `y` the outputs (`M x D`).
pub fn fit_lar_adaptive(
    points: &Array2<f64>,
    y: &Array2<f64>,
    config: &PceTrainConfig,
) -> Result<PceModel> {
    let (m, p) = points.dim();
    if y.nrows() != m {
        return Err(RomError::Data(format!(
            "{} output rows for {} input rows",
            y.nrows(),
            m
        )));
    }
    if config.degree_range.is_empty()
        || config.degree_range.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(RomError::Config(
            "degree range must be non-empty and ascending".into(),
        ));
    }
    let d_out = y.ncols();
    let mut selected: Vec<Option<SelectedFit>> = (0..d_out).map(|_| None).collect();

    for &degree in &config.degree_range {
        let basis = build_basis(p, degree, config.q, config.basis_cap)?;
        let psi = evaluate_basis_matrix(points, &basis)?;

        // Standardize the non-constant candidate columns for the LAR walk.
        let mut candidate_cols = Vec::new();
        let mut std_cols: Vec<Vec<f64>> = Vec::new();
        for (j, mi) in basis.iter().enumerate() {
            if mi.is_constant() {
                continue;
            }
            let col = psi.column(j);
            let mean = col.sum() / m as f64;
            let centered: Vec<f64> = col.iter().map(|v| v - mean).collect();
            let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            candidate_cols.push(j);
            std_cols.push(centered.into_iter().map(|v| v / norm).collect());
        }
        let mut x_std = Array2::zeros((m, std_cols.len()));
        for (cj, col) in std_cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                x_std[[i, cj]] = *v;
            }
        }

        for out in 0..d_out {
            let yo = y.column(out).to_owned();
            let fit = fit_output_at_degree(
                &basis,
                &psi,
                &x_std,
                &candidate_cols,
                &yo,
                degree,
                config.max_path_terms,
            )?;
            if selected[out].as_ref().is_none_or(|b| fit.loo < b.loo) {
                selected[out] = Some(fit);
            }
        }

        let all_done = selected
            .iter()
            .all(|s| s.as_ref().is_some_and(|f| f.loo <= config.target_loo));
        if all_done {
            break;
        }
    }

    let selected: Vec<SelectedFit> = selected
        .into_iter()
        .map(|s| {
            s.ok_or_else(|| {
                RomError::Numerical("no candidate model achieved a finite error".into())
            })
        })
        .collect::<Result<_>>()?;

    // Union of selected terms across outputs, constant first, then by
    // (total degree, descending lexicographic) like build_basis.
    let mut union: Vec<MultiIndex> = Vec::new();
    for fit in &selected {
        for term in &fit.terms {
            if !union.contains(term) {
                union.push(term.clone());
            }
        }
    }
    union.sort_by(|a, b| {
        a.total_degree()
            .cmp(&b.total_degree())
            .then_with(|| b.degrees().cmp(a.degrees()))
    });

    let mut coefficients = Array2::zeros((union.len(), d_out));
    for (out, fit) in selected.iter().enumerate() {
        for (term, &coef) in fit.terms.iter().zip(&fit.coefficients) {
            let row = union.iter().position(|u| u == term).unwrap();
            coefficients[[row, out]] = coef;
        }
    }
    let meta = PceMeta {
        truncation: "lar-adaptive".into(),
        q: config.q,
        degrees: selected.iter().map(|f| f.degree).collect(),
        loo: selected.iter().map(|f| f.loo).collect(),
    };
    PceModel::new(p, union, coefficients, meta)
}
