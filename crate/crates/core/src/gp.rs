//! Gaussian-process regression with an ellipsoidal Gaussian kernel.
//!
//! Exact inference through a Cholesky factorization, zero prior mean on
//! standardized targets, and per-output-independent hyperparameter tuning
//! by maximizing the log marginal likelihood with CMA-ES in log space.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmaes::{cmaes_minimize, CmaesConfig};
use crate::error::{Result, RomError};
use crate::linalg::{cholesky, solve_lower, solve_lower_transpose};
use crate::seeding::derive_seed;

/// Kernel hyperparameters: per-dimension lengthscales, an overall variance
/// scale, and a diagonal jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpHyperparams {
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub jitter: f64,
}

impl GpHyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.lengthscales.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
            return Err(RomError::Config("lengthscales must be positive".into()));
        }
        if !(self.signal_variance.is_finite() && self.signal_variance > 0.0) {
            return Err(RomError::Config("signal variance must be positive".into()));
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return Err(RomError::Config("jitter must be non-negative".into()));
        }
        Ok(())
    }
}

/// `sv * exp(-1/2 sum_i ((x_i - x'_i) / theta_i)^2)`
pub fn kernel(x: &[f64], y: &[f64], hp: &GpHyperparams) -> f64 {
    let mut sum = 0.0;
    for ((a, b), t) in x.iter().zip(y).zip(&hp.lengthscales) {
        let d = (a - b) / t;
        sum += d * d;
    }
    hp.signal_variance * (-0.5 * sum).exp()
}

/// Kernel matrix of the rows of `x`, with `jitter` added on the diagonal.
fn kernel_matrix(x: &Array2<f64>, hp: &GpHyperparams) -> Array2<f64> {
    let (m, p) = x.dim();
    // Scale rows by the lengthscales, then use the Gram trick.
    let mut u = x.clone();
    for j in 0..p {
        let t = hp.lengthscales[j];
        u.column_mut(j).mapv_inplace(|v| v / t);
    }
    let gram = u.dot(&u.t());
    let mut k = Array2::zeros((m, m));
    for i in 0..m {
        k[[i, i]] = hp.signal_variance + hp.jitter;
        for j in 0..i {
            let d2 = (gram[[i, i]] + gram[[j, j]] - 2.0 * gram[[i, j]]).max(0.0);
            let v = hp.signal_variance * (-0.5 * d2).exp();
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    k
}

/// Per-output standardization applied to targets before fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub std: f64,
}

impl Standardization {
    pub fn identity() -> Self {
        Self { mean: 0.0, std: 1.0 }
    }

    fn fit(y: &Array1<f64>) -> Self {
        let m = y.len() as f64;
        let mean = y.sum() / m;
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0).max(1.0);
        let std = var.sqrt();
        Self {
            mean,
            // Constant targets degenerate to std 0; fitting proceeds on the
            // centered zeros and predictions return the mean.
            std: if std < 1e-12 { 1.0 } else { std },
        }
    }
}

/// A fitted scalar-output Gaussian process.
#[derive(Debug, Clone)]
pub struct GpModel {
    x_train: Array2<f64>,
    /// Lower Cholesky factor; dropped by multi-output training to bound
    /// memory (predictive means never touch it) and recomputed on demand
    /// for variance queries.
    chol: Option<Array2<f64>>,
    alpha: Array1<f64>,
    hp: GpHyperparams,
    standardize: Standardization,
    // Query-time caches, rebuilt on load.
    x_scaled: Array2<f64>,
    x_scaled_sq: Vec<f64>,
}

impl GpModel {
    pub fn hyperparams(&self) -> &GpHyperparams {
        &self.hp
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardize
    }

    pub fn training_size(&self) -> usize {
        self.x_train.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.x_train.ncols()
    }

    pub fn alpha(&self) -> &Array1<f64> {
        &self.alpha
    }

    fn build_caches(x: &Array2<f64>, hp: &GpHyperparams) -> (Array2<f64>, Vec<f64>) {
        let mut u = x.clone();
        for j in 0..x.ncols() {
            let t = hp.lengthscales[j];
            u.column_mut(j).mapv_inplace(|v| v / t);
        }
        let sq = u.rows().into_iter().map(|r| r.dot(&r)).collect();
        (u, sq)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<f64>> = self.x_train.rows().into_iter().map(|r| r.to_vec()).collect();
        serde_json::to_string(&serde_json::json!({
            "x": rows,
            "alpha": self.alpha.to_vec(),
            "theta": self.hp.lengthscales,
            "sv": self.hp.signal_variance,
            "jitter": self.hp.jitter,
            "standardize": self.standardize,
        }))
        .expect("GP model serializes")
    }

    /// Rebuilds a model from its JSON form; the Cholesky factor is
    /// recomputed and verified against the stored hyperparameters.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            x: Vec<Vec<f64>>,
            alpha: Vec<f64>,
            theta: Vec<f64>,
            sv: f64,
            jitter: f64,
            standardize: Standardization,
        }
        let raw: Raw = serde_json::from_str(text)?;
        let m = raw.x.len();
        if m == 0 || raw.alpha.len() != m {
            return Err(RomError::Data("GP model fields are inconsistent".into()));
        }
        let p = raw.x[0].len();
        if raw.x.iter().any(|r| r.len() != p) || raw.theta.len() != p {
            return Err(RomError::Data("GP model dimensions are inconsistent".into()));
        }
        let flat: Vec<f64> = raw.x.iter().flatten().copied().collect();
        let x_train = Array2::from_shape_vec((m, p), flat)
            .map_err(|e| RomError::Data(format!("training input shape: {e}")))?;
        let hp = GpHyperparams {
            lengthscales: raw.theta,
            signal_variance: raw.sv,
            jitter: raw.jitter,
        };
        hp.validate()?;
        let chol = cholesky(&kernel_matrix(&x_train, &hp))?;
        let (x_scaled, x_scaled_sq) = Self::build_caches(&x_train, &hp);
        Ok(Self {
            x_train,
            chol: Some(chol),
            alpha: Array1::from_vec(raw.alpha),
            hp,
            standardize: raw.standardize,
            x_scaled,
            x_scaled_sq,
        })
    }
}

/// Conditions a zero-mean GP on `(x, y)` with fixed hyperparameters.
///
/// `y` is used as-is (no standardization); fails if the kernel matrix with
/// the given jitter is not positive definite.
pub fn gp_fit(x: &Array2<f64>, y: &Array1<f64>, hp: &GpHyperparams) -> Result<GpModel> {
    hp.validate()?;
    let m = x.nrows();
    if m == 0 {
        return Err(RomError::Data("GP fit needs at least one point".into()));
    }
    if y.len() != m {
        return Err(RomError::Data(format!(
            "{} targets for {} inputs",
            y.len(),
            m
        )));
    }
    if x.ncols() != hp.lengthscales.len() {
        return Err(RomError::Config(format!(
            "{} lengthscales for {} input dimensions",
            hp.lengthscales.len(),
            x.ncols()
        )));
    }
    let k = kernel_matrix(x, hp);
    let chol = cholesky(&k)?;
    let tmp = solve_lower(&chol.view(), &y.view());
    let alpha = solve_lower_transpose(&chol.view(), &tmp.view());
    let (x_scaled, x_scaled_sq) = GpModel::build_caches(x, hp);
    Ok(GpModel {
        x_train: x.clone(),
        chol: Some(chol),
        alpha,
        hp: hp.clone(),
        standardize: Standardization::identity(),
        x_scaled,
        x_scaled_sq,
    })
}

/// Like [`gp_fit`] but escalates the jitter through `1e-10, 1e-8, 1e-6`
/// when the factorization fails, logging each escalation.
pub fn gp_fit_auto(x: &Array2<f64>, y: &Array1<f64>, hp: &GpHyperparams) -> Result<GpModel> {
    let mut ladder = vec![hp.jitter];
    for j in [1e-10, 1e-8, 1e-6] {
        if j > hp.jitter {
            ladder.push(j);
        }
    }
    let mut last_err = None;
    for (step, &jitter) in ladder.iter().enumerate() {
        let attempt = GpHyperparams {
            jitter,
            ..hp.clone()
        };
        match gp_fit(x, y, &attempt) {
            Ok(model) => {
                if step > 0 {
                    log::warn!("GP Cholesky required jitter escalation to {jitter:e}");
                }
                return Ok(model);
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap())
}

fn kernel_vector(model: &GpModel, x_star: &[f64]) -> Array1<f64> {
    let p = model.input_dim();
    let mut u = vec![0.0f64; p];
    let mut u_sq = 0.0;
    for j in 0..p {
        let v = x_star[j] / model.hp.lengthscales[j];
        u[j] = v;
        u_sq += v * v;
    }
    let m = model.training_size();
    let mut k = Array1::zeros(m);
    for i in 0..m {
        let dot: f64 = model
            .x_scaled
            .row(i)
            .iter()
            .zip(&u)
            .map(|(a, b)| a * b)
            .sum();
        let d2 = (model.x_scaled_sq[i] + u_sq - 2.0 * dot).max(0.0);
        k[i] = model.hp.signal_variance * (-0.5 * d2).exp();
    }
    k
}

/// Predictive mean at `x_star` (de-standardized).
pub fn gp_predict_mean(model: &GpModel, x_star: &[f64]) -> Result<f64> {
    if x_star.len() != model.input_dim() {
        return Err(RomError::Validation(format!(
            "query has {} coordinates, model expects {}",
            x_star.len(),
            model.input_dim()
        )));
    }
    let k = kernel_vector(model, x_star);
    let value = k.dot(&model.alpha);
    Ok(model.standardize.mean + model.standardize.std * value)
}

/// Predictive variance at `x_star` in original output units, clamped at 0.
pub fn gp_predict_var(model: &GpModel, x_star: &[f64]) -> Result<f64> {
    if x_star.len() != model.input_dim() {
        return Err(RomError::Validation(format!(
            "query has {} coordinates, model expects {}",
            x_star.len(),
            model.input_dim()
        )));
    }
    let k = kernel_vector(model, x_star);
    let recomputed;
    let chol = match &model.chol {
        Some(l) => l,
        None => {
            recomputed = cholesky(&kernel_matrix(&model.x_train, &model.hp))?;
            &recomputed
        }
    };
    let v = solve_lower(&chol.view(), &k.view());
    let var = model.hp.signal_variance - v.dot(&v);
    if var < -1e-9 {
        log::warn!("predictive variance {var:e} clamped to 0");
    }
    Ok(var.max(0.0) * model.standardize.std * model.standardize.std)
}

/// `-1/2 y^T alpha - sum_i log L_ii - (M/2) log 2 pi`
pub fn log_marginal_likelihood(
    x: &Array2<f64>,
    y: &Array1<f64>,
    hp: &GpHyperparams,
) -> Result<f64> {
    let model = gp_fit(x, y, hp)?;
    let m = x.nrows() as f64;
    let chol = model.chol.as_ref().expect("gp_fit keeps the factor");
    let log_det_half: f64 = (0..x.nrows()).map(|i| chol[[i, i]].ln()).sum();
    Ok(-0.5 * y.dot(&model.alpha) - log_det_half - 0.5 * m * (2.0 * std::f64::consts::PI).ln())
}

/// Settings for per-output hyperparameter optimization.
#[derive(Debug, Clone)]
pub struct GpTrainConfig {
    /// CMA-ES objective evaluations per output.
    pub budget: usize,
    /// Initial CMA-ES step in log10 space.
    pub sigma0: f64,
    pub seed: u64,
    /// log10 bounds per lengthscale (and the variance scale).
    pub log10_bounds: (f64, f64),
    pub init_lengthscale: f64,
    pub jitter: f64,
    /// Evaluate the search objective on this many leading rows only;
    /// the final model is always refit on the full data.
    pub search_subsample: Option<usize>,
    /// Keep each output's Cholesky factor after the refit. Off by default:
    /// a factor per output dominates memory at large M, and only variance
    /// queries need it.
    pub keep_cholesky: bool,
}

impl Default for GpTrainConfig {
    fn default() -> Self {
        Self {
            budget: 3000,
            sigma0: 0.5,
            seed: 0,
            log10_bounds: (-2.0, 2.0),
            init_lengthscale: 2.0,
            jitter: 1e-8,
            search_subsample: None,
            keep_cholesky: false,
        }
    }
}

/// Trains one GP per output column of `y`, independently and in parallel.
///
/// Hyperparameters (lengthscales and variance scale) are optimized in
/// log10 space against the marginal likelihood of the standardized
/// targets; every output uses the same seeded CMA-ES stream, so identical
/// columns produce identical models.
pub fn gp_train(x: &Array2<f64>, y: &Array2<f64>, config: &GpTrainConfig) -> Result<Vec<GpModel>> {
    let (m, p) = x.dim();
    if y.nrows() != m {
        return Err(RomError::Data(format!(
            "{} output rows for {} input rows",
            y.nrows(),
            m
        )));
    }
    if y.ncols() == 0 {
        return Err(RomError::Data("need at least one output".into()));
    }
    let m_search = config.search_subsample.unwrap_or(m).min(m).max(2.min(m));
    let x_search = x.slice(ndarray::s![..m_search, ..]).to_owned();

    (0..y.ncols())
        .into_par_iter()
        .map(|out| {
            let yo = y.column(out).to_owned();
            let stats = Standardization::fit(&yo);
            let ys = yo.mapv(|v| (v - stats.mean) / stats.std);
            let ys_search = ys.slice(ndarray::s![..m_search]).to_owned();

            let d = p + 1;
            let init: Vec<f64> = (0..d)
                .map(|i| {
                    if i < p {
                        config.init_lengthscale.log10()
                    } else {
                        0.0
                    }
                })
                .collect();
            let bounds = vec![config.log10_bounds; d];
            let objective = |z: &[f64]| -> f64 {
                let hp = GpHyperparams {
                    lengthscales: z[..p].iter().map(|v| 10f64.powf(*v)).collect(),
                    signal_variance: 10f64.powf(z[p]),
                    jitter: config.jitter,
                };
                match log_marginal_likelihood(&x_search, &ys_search, &hp) {
                    Ok(l) => -l,
                    Err(_) => f64::INFINITY,
                }
            };
            let cma = CmaesConfig::new(
                config.sigma0,
                config.budget,
                derive_seed(config.seed, 0x6A11),
            );
            let result = cmaes_minimize(objective, &init, &bounds, &cma)?;
            if !result.best_value.is_finite() {
                return Err(RomError::Numerical(format!(
                    "hyperparameter search for output {out} found no finite likelihood"
                )));
            }
            let hp = GpHyperparams {
                lengthscales: result.best_point[..p].iter().map(|v| 10f64.powf(*v)).collect(),
                signal_variance: 10f64.powf(result.best_point[p]),
                jitter: config.jitter,
            };
            let mut model = gp_fit_auto(x, &ys, &hp)?;
            model.standardize = stats;
            if !config.keep_cholesky {
                model.chol = None;
            }
            Ok(model)
        })
        .collect()
}
