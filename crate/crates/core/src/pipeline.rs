//! Surrogate pipeline: reduction map + response surface, composed.
//!
//! Training ranks frequency components (or fits PCA) on the training split
//! only, maps signals to reduced real vectors, and fits the chosen
//! regression model from normalized parameters to those vectors. Inference
//! runs the regression and inverts the reduction. Evaluation aggregates
//! per-angle absolute percentage errors over a validation set.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{fmt_f64, Dataset};
use crate::error::{Result, RomError};
use crate::fnn::{fnn_predict, fnn_train, FnnArchitecture, FnnModel, TrainingConfig};
use crate::gp::{gp_predict_mean, gp_train, GpModel, GpTrainConfig};
use crate::param_space::{DesignPoint, ParameterSpace};
use crate::pca::{fit_pca, pca_reconstruct, project, PcaModel};
use crate::pce::lar::{fit_lar_adaptive, PceTrainConfig};
use crate::pce::{pce_predict, PceModel};
use crate::signal::TorqueSignal;
use crate::spectral::{
    build_reduction, dft_forward, rank_components, reconstruct, reduce_spectrum, ReducedVector,
    ReductionMap,
};

/// Which dimension reduction to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReductionChoice {
    /// Keep the `r` strongest frequency components.
    Dft { r: usize },
    /// Keep `c` principal components.
    Pca { c: usize },
    /// Regress on the full signal.
    None,
}

/// Which response surface to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RsmChoice {
    Pce,
    Fnn,
    Gp,
}

impl RsmChoice {
    pub fn name(&self) -> &'static str {
        match self {
            RsmChoice::Pce => "pce",
            RsmChoice::Fnn => "fnn",
            RsmChoice::Gp => "gp",
        }
    }
}

impl ReductionChoice {
    pub fn name(&self) -> &'static str {
        match self {
            ReductionChoice::Dft { .. } => "dft",
            ReductionChoice::Pca { .. } => "pca",
            ReductionChoice::None => "none",
        }
    }
}

/// The trained reduction stage.
#[derive(Debug, Clone)]
pub enum ReductionModel {
    Dft(ReductionMap),
    Pca(PcaModel),
    None { n: usize },
}

impl ReductionModel {
    /// Real dimension of the reduced representation.
    pub fn reduced_dim(&self) -> usize {
        match self {
            ReductionModel::Dft(map) => map.real_dimension(),
            ReductionModel::Pca(model) => model.retained(),
            ReductionModel::None { n } => *n,
        }
    }

    pub fn signal_len(&self) -> usize {
        match self {
            ReductionModel::Dft(map) => map.n(),
            ReductionModel::Pca(model) => model.signal_len(),
            ReductionModel::None { n } => *n,
        }
    }

    /// Signal to reduced real coordinates.
    pub fn reduce_signal(&self, signal: &TorqueSignal) -> Result<Vec<f64>> {
        match self {
            ReductionModel::Dft(map) => {
                let spectrum = dft_forward(signal)?;
                Ok(reduce_spectrum(map, &spectrum)?.flatten(map))
            }
            ReductionModel::Pca(model) => project(model, signal.values()),
            ReductionModel::None { n } => {
                if signal.len() != *n {
                    return Err(RomError::Data(format!(
                        "signal length {} does not match configured length {n}",
                        signal.len()
                    )));
                }
                Ok(signal.values().to_vec())
            }
        }
    }

    /// Reduced real coordinates back to a signal.
    pub fn reconstruct_signal(&self, coords: &[f64]) -> Result<TorqueSignal> {
        match self {
            ReductionModel::Dft(map) => {
                let reduced = ReducedVector::unflatten(map, coords)?;
                reconstruct(map, &reduced)
            }
            ReductionModel::Pca(model) => TorqueSignal::new(pca_reconstruct(model, coords)?),
            ReductionModel::None { n } => {
                if coords.len() != *n {
                    return Err(RomError::Data(format!(
                        "{} coordinates for signal length {n}",
                        coords.len()
                    )));
                }
                TorqueSignal::new(coords.to_vec())
            }
        }
    }

    fn to_json(&self) -> String {
        match self {
            ReductionModel::Dft(map) => map.to_json(),
            ReductionModel::Pca(model) => model.to_json(),
            ReductionModel::None { n } => {
                serde_json::to_string_pretty(&serde_json::json!({ "n": n })).unwrap()
            }
        }
    }
}

/// The trained regression stage.
pub enum RsmModel {
    Pce(PceModel),
    Fnn(FnnModel),
    Gp(Vec<GpModel>),
}

impl RsmModel {
    pub fn output_dim(&self) -> usize {
        match self {
            RsmModel::Pce(m) => m.output_dim(),
            RsmModel::Fnn(m) => m.output_dim(),
            RsmModel::Gp(models) => models.len(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            RsmModel::Pce(m) => pce_predict(m, x),
            RsmModel::Fnn(m) => fnn_predict(m, x),
            RsmModel::Gp(models) => models.iter().map(|m| gp_predict_mean(m, x)).collect(),
        }
    }

    fn kind(&self) -> RsmChoice {
        match self {
            RsmModel::Pce(_) => RsmChoice::Pce,
            RsmModel::Fnn(_) => RsmChoice::Fnn,
            RsmModel::Gp(_) => RsmChoice::Gp,
        }
    }

    fn to_json(&self) -> String {
        match self {
            RsmModel::Pce(m) => m.to_json(),
            RsmModel::Fnn(m) => m.to_json(),
            RsmModel::Gp(models) => {
                let parts: Vec<serde_json::Value> = models
                    .iter()
                    .map(|m| serde_json::from_str(&m.to_json()).unwrap())
                    .collect();
                serde_json::to_string(&parts).unwrap()
            }
        }
    }
}

/// Hyperparameter settings for all three regression families.
#[derive(Debug, Clone)]
pub struct TrainSettings {
    pub pce: PceTrainConfig,
    pub fnn_hidden: Vec<usize>,
    pub fnn: TrainingConfig,
    pub gp: GpTrainConfig,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            pce: PceTrainConfig::default(),
            fnn_hidden: vec![45, 60, 80, 25],
            fnn: TrainingConfig::default(),
            gp: GpTrainConfig::default(),
        }
    }
}

/// Provenance recorded when a surrogate is trained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurrogateMetadata {
    pub m_train: usize,
    pub seed: u64,
    pub dataset_config_digest: Option<String>,
}

/// A trained reduction + regression pair over a parameter space.
pub struct Surrogate {
    space: ParameterSpace,
    n: usize,
    reduction: ReductionModel,
    rsm: RsmModel,
    metadata: SurrogateMetadata,
}

impl Surrogate {
    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn signal_len(&self) -> usize {
        self.n
    }

    pub fn reduction(&self) -> &ReductionModel {
        &self.reduction
    }

    pub fn rsm(&self) -> &RsmModel {
        &self.rsm
    }

    pub fn metadata(&self) -> &SurrogateMetadata {
        &self.metadata
    }
}

/// Trains a surrogate on a (training) dataset.
///
/// Component ranking and PCA both see only this dataset; keep validation
/// rows out of it.
pub fn train_surrogate(
    training: &Dataset,
    reduction_choice: ReductionChoice,
    rsm_choice: RsmChoice,
    settings: &TrainSettings,
) -> Result<Surrogate> {
    let n = training.signal_len();
    let reduction = match reduction_choice {
        ReductionChoice::Dft { r } => {
            let spectra: Vec<_> = (0..training.len())
                .map(|m| dft_forward(&training.signal(m)))
                .collect::<Result<_>>()?;
            let ranking = rank_components(&spectra)?;
            ReductionModel::Dft(build_reduction(&ranking, r)?)
        }
        ReductionChoice::Pca { c } => ReductionModel::Pca(fit_pca(training.signals(), c)?),
        ReductionChoice::None => ReductionModel::None { n },
    };

    let x = training.normalized_inputs()?;
    let reduced_dim = reduction.reduced_dim();
    let mut y = Array2::zeros((training.len(), reduced_dim));
    for m in 0..training.len() {
        let coords = reduction.reduce_signal(&training.signal(m))?;
        for (j, v) in coords.into_iter().enumerate() {
            y[[m, j]] = v;
        }
    }

    let rsm = match rsm_choice {
        RsmChoice::Pce => RsmModel::Pce(
            fit_lar_adaptive(&x, &y, &settings.pce)
                .map_err(|e| RomError::Numerical(format!("PCE fit failed: {e}")))?,
        ),
        RsmChoice::Fnn => {
            let arch = FnnArchitecture {
                input_dim: x.ncols(),
                hidden: settings.fnn_hidden.clone(),
                output_dim: reduced_dim,
            };
            RsmModel::Fnn(
                fnn_train(&x, &y, &arch, &settings.fnn)
                    .map_err(|e| RomError::Numerical(format!("FNN fit failed: {e}")))?
                    .model,
            )
        }
        RsmChoice::Gp => RsmModel::Gp(
            gp_train(&x, &y, &settings.gp)
                .map_err(|e| RomError::Numerical(format!("GP fit failed: {e}")))?,
        ),
    };
    debug_assert_eq!(rsm.output_dim(), reduced_dim);

    Ok(Surrogate {
        space: training.space().clone(),
        n,
        reduction,
        rsm,
        metadata: SurrogateMetadata {
            m_train: training.len(),
            seed: training.seed().unwrap_or(0),
            dataset_config_digest: training.config_digest().map(|s| s.to_string()),
        },
    })
}

/// Predicts the torque signal at a new design point.
pub fn infer_torque(surrogate: &Surrogate, p: &DesignPoint) -> Result<TorqueSignal> {
    let x = surrogate.space.normalize(p)?;
    let coords = surrogate.rsm.predict(&x)?;
    surrogate.reduction.reconstruct_signal(&coords)
}

/// Per-angle and aggregate validation errors of a surrogate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Mean absolute percentage error per rotation angle.
    pub mape: Vec<f64>,
    /// Sample standard deviation (divisor `M_v - 1`) of the APE per angle.
    pub sdape: Vec<f64>,
    /// Mean of the per-angle MAPE over the whole signal.
    pub signal_averaged_mape: f64,
    /// Validation row with the largest per-sample mean APE.
    pub worst_index: usize,
    pub worst_true: Vec<f64>,
    pub worst_predicted: Vec<f64>,
    pub period_degrees: f64,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Plot-ready CSV: `angle_deg, mape, sdape`.
    pub fn to_csv(&self) -> String {
        let n = self.mape.len();
        let mut out = String::from("angle_deg,mape,sdape\n");
        for i in 0..n {
            let angle = self.period_degrees * i as f64 / n as f64;
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(angle),
                fmt_f64(self.mape[i]),
                fmt_f64(self.sdape[i])
            ));
        }
        out
    }
}

/// Evaluates per-angle APE statistics against a validation dataset.
///
/// The APE denominator is the signed true value; with `strict_denominator`
/// the absolute value is used instead. True values with magnitude below
/// `1e-12` make the metric undefined and raise an error.
pub fn evaluate_surrogate(
    surrogate: &Surrogate,
    validation: &Dataset,
    strict_denominator: bool,
) -> Result<EvaluationReport> {
    evaluate_predictions(
        validation,
        strict_denominator,
        |p| infer_torque(surrogate, p),
    )
}

/// Shared evaluation driver: runs `predict` over the validation set.
pub fn evaluate_predictions<F>(
    validation: &Dataset,
    strict_denominator: bool,
    mut predict: F,
) -> Result<EvaluationReport>
where
    F: FnMut(&DesignPoint) -> Result<TorqueSignal>,
{
    let m = validation.len();
    let n = validation.signal_len();
    if m < 2 {
        return Err(RomError::Data(
            "validation set needs at least 2 samples for APE statistics".into(),
        ));
    }
    let mut ape = Array2::zeros((m, n));
    let mut per_sample_mean = vec![0.0f64; m];
    let mut predictions: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        let truth = validation.signal(i);
        let pred = predict(&validation.points()[i])?;
        if pred.len() != n {
            return Err(RomError::Data(format!(
                "prediction length {} does not match validation length {n}",
                pred.len()
            )));
        }
        for (j, (&t, &e)) in truth.values().iter().zip(pred.values()).enumerate() {
            if t.abs() < 1e-12 {
                return Err(RomError::Metric(format!(
                    "true torque at sample {i}, angle index {j} is {t:e}; relative error undefined"
                )));
            }
            let denom = if strict_denominator { t.abs() } else { t };
            ape[[i, j]] = (t - e).abs() / denom;
        }
        per_sample_mean[i] = ape.row(i).sum() / n as f64;
        predictions.push(pred.values().to_vec());
    }
    let mut mape = vec![0.0f64; n];
    let mut sdape = vec![0.0f64; n];
    for j in 0..n {
        let col = ape.column(j);
        let mean = col.sum() / m as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m as f64 - 1.0);
        mape[j] = mean;
        sdape[j] = var.sqrt();
    }
    let signal_averaged_mape = mape.iter().sum::<f64>() / n as f64;
    let worst_index = per_sample_mean
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    Ok(EvaluationReport {
        mape,
        sdape,
        signal_averaged_mape,
        worst_index,
        worst_true: validation.signal(worst_index).values().to_vec(),
        worst_predicted: predictions[worst_index].clone(),
        period_degrees: validation.signal(worst_index).period_degrees(),
    })
}

/// Evaluation of the reduction stage alone (regression replaced by the true
/// reduced coefficients): the achievable error floor of any surrogate that
/// shares the reduction.
pub fn reduction_floor_report(
    reduction: &ReductionModel,
    validation: &Dataset,
    strict_denominator: bool,
) -> Result<EvaluationReport> {
    let by_index: std::cell::RefCell<usize> = std::cell::RefCell::new(0);
    evaluate_predictions(validation, strict_denominator, |_p| {
        let mut idx = by_index.borrow_mut();
        let signal = validation.signal(*idx);
        *idx += 1;
        let coords = reduction.reduce_signal(&signal)?;
        reduction.reconstruct_signal(&coords)
    })
}

/// Serialized bundle layout: `manifest.json`, `reduction.json`, `model.json`.
#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    reduction_kind: String,
    rsm_kind: String,
    n: usize,
    output_dim: usize,
    retained: Option<usize>,
    space: ParameterSpace,
    metadata: SurrogateMetadata,
    reduction_digest: String,
    model_digest: String,
}

fn digest_str(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Writes the surrogate bundle into `dir` (created if missing).
pub fn save_bundle(surrogate: &Surrogate, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let reduction_json = surrogate.reduction.to_json();
    let model_json = surrogate.rsm.to_json();
    let manifest = Manifest {
        reduction_kind: match &surrogate.reduction {
            ReductionModel::Dft(_) => "dft".into(),
            ReductionModel::Pca(_) => "pca".into(),
            ReductionModel::None { .. } => "none".into(),
        },
        rsm_kind: surrogate.rsm.kind().name().into(),
        n: surrogate.n,
        output_dim: surrogate.rsm.output_dim(),
        retained: match &surrogate.reduction {
            ReductionModel::Dft(map) => Some(map.retained()),
            ReductionModel::Pca(model) => Some(model.retained()),
            ReductionModel::None { .. } => None,
        },
        space: surrogate.space.clone(),
        metadata: surrogate.metadata.clone(),
        reduction_digest: digest_str(&reduction_json),
        model_digest: digest_str(&model_json),
    };
    std::fs::write(dir.join("reduction.json"), reduction_json)?;
    std::fs::write(dir.join("model.json"), model_json)?;
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

/// Reads a surrogate bundle written by [`save_bundle`].
pub fn load_bundle(dir: &Path) -> Result<Surrogate> {
    let manifest: Manifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    let reduction_json = std::fs::read_to_string(dir.join("reduction.json"))?;
    let model_json = std::fs::read_to_string(dir.join("model.json"))?;
    if digest_str(&reduction_json) != manifest.reduction_digest {
        return Err(RomError::Data("reduction.json digest mismatch".into()));
    }
    if digest_str(&model_json) != manifest.model_digest {
        return Err(RomError::Data("model.json digest mismatch".into()));
    }
    let reduction = match manifest.reduction_kind.as_str() {
        "dft" => ReductionModel::Dft(ReductionMap::from_json(&reduction_json)?),
        "pca" => ReductionModel::Pca(PcaModel::from_json(&reduction_json)?),
        "none" => ReductionModel::None { n: manifest.n },
        other => {
            return Err(RomError::Data(format!("unknown reduction kind {other:?}")));
        }
    };
    let rsm = match manifest.rsm_kind.as_str() {
        "pce" => RsmModel::Pce(PceModel::from_json(&model_json)?),
        "fnn" => RsmModel::Fnn(FnnModel::from_json(&model_json)?),
        "gp" => {
            let parts: Vec<serde_json::Value> = serde_json::from_str(&model_json)?;
            let models = parts
                .iter()
                .map(|v| GpModel::from_json(&v.to_string()))
                .collect::<Result<Vec<_>>>()?;
            RsmModel::Gp(models)
        }
        other => {
            return Err(RomError::Data(format!("unknown RSM kind {other:?}")));
        }
    };
    if rsm.output_dim() != reduction.reduced_dim() {
        return Err(RomError::Data(format!(
            "RSM output dimension {} does not match reduction dimension {}",
            rsm.output_dim(),
            reduction.reduced_dim()
        )));
    }
    Ok(Surrogate {
        space: manifest.space,
        n: manifest.n,
        reduction,
        rsm,
        metadata: manifest.metadata,
    })
}
