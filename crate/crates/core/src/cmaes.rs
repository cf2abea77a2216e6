//! Covariance matrix adaptation evolution strategy, (mu/mu_w, lambda).
//!
//! Standard weighted-recombination CMA-ES with cumulative step-size
//! adaptation and rank-one plus rank-mu covariance updates (Hansen's
//! reference parameterization). Box constraints are enforced by
//! coordinate-wise reflection. Fully deterministic for a given seed.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Result, RomError};
use crate::linalg::jacobi_eigh;
use crate::seeding::stream_rng;

/// Run settings; population size defaults to `4 + floor(3 ln d)`.
#[derive(Debug, Clone)]
pub struct CmaesConfig {
    pub sigma0: f64,
    pub budget: usize,
    pub seed: u64,
    pub population: Option<usize>,
}

impl CmaesConfig {
    pub fn new(sigma0: f64, budget: usize, seed: u64) -> Self {
        Self {
            sigma0,
            budget,
            seed,
            population: None,
        }
    }
}

/// Incumbent best returned by a run.
#[derive(Debug, Clone)]
pub struct CmaesResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
}

/// Folds `x` into `[lo, hi]` by reflection at the walls.
fn reflect(x: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    if width <= 0.0 {
        return lo;
    }
    let mut t = (x - lo) % (2.0 * width);
    if t < 0.0 {
        t += 2.0 * width;
    }
    lo + t.min(2.0 * width - t)
}

/// Minimizes `objective` over the box, starting from `init` with step size
/// `sigma0`, spending at most `budget` objective evaluations.
pub fn cmaes_minimize<F>(
    mut objective: F,
    init: &[f64],
    bounds: &[(f64, f64)],
    config: &CmaesConfig,
) -> Result<CmaesResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let d = init.len();
    if d == 0 {
        return Err(RomError::Config("dimension must be at least 1".into()));
    }
    if bounds.len() != d {
        return Err(RomError::Config(format!(
            "{} bounds for {} dimensions",
            bounds.len(),
            d
        )));
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(RomError::Config(format!(
                "bound {i} = [{lo}, {hi}] is invalid"
            )));
        }
    }
    if !(config.sigma0.is_finite() && config.sigma0 > 0.0) {
        return Err(RomError::Config("sigma0 must be positive".into()));
    }
    let init_clamped: Vec<f64> = init
        .iter()
        .zip(bounds)
        .map(|(&x, &(lo, hi))| reflect(x, lo, hi))
        .collect();
    let f0 = objective(&init_clamped);
    if !f0.is_finite() {
        return Err(RomError::Validation(
            "objective is non-finite at the initial point".into(),
        ));
    }
    let mut evaluations = 1usize;
    let mut best_point = init_clamped.clone();
    let mut best_value = f0;

    let df = d as f64;
    let lambda = config
        .population
        .unwrap_or(4 + (3.0 * df.ln()).floor() as usize)
        .max(2);
    if config.budget < lambda {
        return Err(RomError::Config(format!(
            "budget {} below one population of {lambda}",
            config.budget
        )));
    }
    let mu = lambda / 2;
    let raw: Vec<f64> = (0..mu)
        .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - ((i + 1) as f64).ln())
        .collect();
    let wsum: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / wsum).collect();
    let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

    let c_sigma = (mu_eff + 2.0) / (df + mu_eff + 5.0);
    let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (df + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
    let c_c = (4.0 + mu_eff / df) / (df + 4.0 + 2.0 * mu_eff / df);
    let c_1 = 2.0 / ((df + 1.3) * (df + 1.3) + mu_eff);
    let c_mu =
        (2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((df + 2.0) * (df + 2.0) + mu_eff)).min(1.0 - c_1);
    let chi_n = df.sqrt() * (1.0 - 1.0 / (4.0 * df) + 1.0 / (21.0 * df * df));

    let mut mean = Array1::from_vec(init_clamped);
    let mut sigma = config.sigma0;
    let mut cov: Array2<f64> = Array2::eye(d);
    let mut p_sigma = Array1::<f64>::zeros(d);
    let mut p_c = Array1::<f64>::zeros(d);
    let mut rng = stream_rng(config.seed, 0xC3A);
    let mut generation = 0usize;

    // Box-Muller pairs from the seeded stream.
    let mut spare: Option<f64> = None;
    let mut normal = move |rng: &mut rand_chacha::ChaCha8Rng| -> f64 {
        if let Some(z) = spare.take() {
            return z;
        }
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        spare = Some(r * theta.sin());
        r * theta.cos()
    };

    while evaluations + lambda <= config.budget {
        let (eigvals, eigvecs) = jacobi_eigh(&cov);
        let sqrt_vals: Vec<f64> = eigvals.iter().map(|&v| v.max(1e-30).sqrt()).collect();

        let mut ys: Vec<Array1<f64>> = Vec::with_capacity(lambda);
        let mut scored: Vec<(f64, usize)> = Vec::with_capacity(lambda);
        for k in 0..lambda {
            let z = Array1::from_shape_fn(d, |_| normal(&mut rng));
            // y = B D z
            let mut y = Array1::<f64>::zeros(d);
            for j in 0..d {
                let zj = sqrt_vals[j] * z[j];
                for i in 0..d {
                    y[i] += eigvecs[[i, j]] * zj;
                }
            }
            let mut x: Vec<f64> = (0..d).map(|i| mean[i] + sigma * y[i]).collect();
            for (i, v) in x.iter_mut().enumerate() {
                *v = reflect(*v, bounds[i].0, bounds[i].1);
            }
            // Keep distribution updates consistent with the reflected points.
            let y_used = Array1::from_shape_fn(d, |i| (x[i] - mean[i]) / sigma);
            let mut f = objective(&x);
            evaluations += 1;
            if !f.is_finite() {
                f = f64::INFINITY;
            }
            if f < best_value {
                best_value = f;
                best_point = x.clone();
            }
            ys.push(y_used);
            scored.push((f, k));
        }
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

        let mut y_w = Array1::<f64>::zeros(d);
        for (i, &w) in weights.iter().enumerate() {
            let idx = scored[i].1;
            y_w = &y_w + &(w * &ys[idx]);
        }
        mean = &mean + &(sigma * &y_w);

        // C^{-1/2} y_w via the eigenbasis.
        let mut c_inv_half_yw = Array1::<f64>::zeros(d);
        for j in 0..d {
            let mut dot = 0.0;
            for i in 0..d {
                dot += eigvecs[[i, j]] * y_w[i];
            }
            let scaled = dot / sqrt_vals[j].max(1e-30);
            for i in 0..d {
                c_inv_half_yw[i] += eigvecs[[i, j]] * scaled;
            }
        }
        p_sigma = &p_sigma * (1.0 - c_sigma)
            + &(c_inv_half_yw * (c_sigma * (2.0 - c_sigma) * mu_eff).sqrt());
        let ps_norm = p_sigma.iter().map(|v| v * v).sum::<f64>().sqrt();
        let expected = (1.0 - (1.0 - c_sigma).powi(2 * (generation as i32 + 1))).sqrt();
        let h_sigma = if ps_norm / expected < (1.4 + 2.0 / (df + 1.0)) * chi_n {
            1.0
        } else {
            0.0
        };
        p_c = &p_c * (1.0 - c_c) + &(&y_w * (h_sigma * (c_c * (2.0 - c_c) * mu_eff).sqrt()));

        let delta_h = (1.0 - h_sigma) * c_c * (2.0 - c_c);
        let mut new_cov = &cov * (1.0 - c_1 - c_mu + c_1 * delta_h);
        for i in 0..d {
            for j in 0..d {
                new_cov[[i, j]] += c_1 * p_c[i] * p_c[j];
            }
        }
        for (rank, &w) in weights.iter().enumerate() {
            let y = &ys[scored[rank].1];
            for i in 0..d {
                for j in 0..d {
                    new_cov[[i, j]] += c_mu * w * y[i] * y[j];
                }
            }
        }
        // Symmetrize against drift.
        for i in 0..d {
            for j in 0..i {
                let v = 0.5 * (new_cov[[i, j]] + new_cov[[j, i]]);
                new_cov[[i, j]] = v;
                new_cov[[j, i]] = v;
            }
        }
        cov = new_cov;
        sigma *= ((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0)).exp();
        sigma = sigma.clamp(1e-300, 1e12);
        generation += 1;
    }

    Ok(CmaesResult {
        best_point,
        best_value,
        evaluations,
    })
}
