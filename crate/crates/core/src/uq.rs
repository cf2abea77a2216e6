//! Monte Carlo estimation of per-angle torque statistics.
//!
//! Streams uniform design samples through any evaluator, accumulating
//! per-angle mean and variance with Welford updates merged associatively
//! across fixed-size chunks, so the result is bitwise identical for any
//! thread count. Comparison reports express candidate-vs-reference errors
//! as absolute percentage errors per angle.

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::fmt_f64;
use crate::error::{Result, RomError};
use crate::param_space::{DesignPoint, ParameterSpace};
use crate::pipeline::{infer_torque, Surrogate};
use crate::seeding::stream_rng;
use crate::signal::TorqueSignal;
use crate::synthetic::{evaluate_torque_normalized, SyntheticModelConfig};

/// Monte Carlo sample count used throughout the statistics studies.
pub const DEFAULT_MC_SAMPLES: usize = 11_000;

const CHUNK: usize = 256;

/// Anything that maps a design point to a torque signal.
pub trait TorqueEvaluator: Sync {
    fn signal_len(&self) -> usize;
    fn evaluate(&self, p: &DesignPoint) -> Result<TorqueSignal>;
}

impl TorqueEvaluator for Surrogate {
    fn signal_len(&self) -> usize {
        Surrogate::signal_len(self)
    }

    fn evaluate(&self, p: &DesignPoint) -> Result<TorqueSignal> {
        infer_torque(self, p)
    }
}

/// The synthetic truth model as an evaluator.
pub struct SyntheticEvaluator {
    config: SyntheticModelConfig,
    space: ParameterSpace,
    n: usize,
}

impl SyntheticEvaluator {
    pub fn new(config: SyntheticModelConfig, space: ParameterSpace, n: usize) -> Result<Self> {
        config.validate(&space)?;
        let max_order = config.max_active_order();
        if !n.is_multiple_of(2) || n < 2 * max_order + 2 {
            return Err(RomError::Config(format!(
                "signal length {n} too small: need even N >= {}",
                2 * max_order + 2
            )));
        }
        Ok(Self { config, space, n })
    }
}

impl TorqueEvaluator for SyntheticEvaluator {
    fn signal_len(&self) -> usize {
        self.n
    }

    fn evaluate(&self, p: &DesignPoint) -> Result<TorqueSignal> {
        let x = self.space.normalize(p)?;
        evaluate_torque_normalized(&self.config, &x, self.n)
    }
}

/// Per-angle sample mean and standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStatistics {
    pub mean: Vec<f64>,
    /// Sample standard deviation with divisor `n - 1`.
    pub std: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

impl McStatistics {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("statistics serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV form `angle_deg, mean, std` over one 30-degree period.
    pub fn to_csv(&self, period_degrees: f64) -> String {
        let n = self.mean.len();
        let mut out = String::from("angle_deg,mean,std\n");
        for i in 0..n {
            let angle = period_degrees * i as f64 / n as f64;
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(angle),
                fmt_f64(self.mean[i]),
                fmt_f64(self.std[i])
            ));
        }
        out
    }
}

/// Per-chunk accumulator: count, running mean, and M2 per angle.
struct Accumulator {
    count: usize,
    mean: Array1<f64>,
    m2: Array1<f64>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self {
            count: 0,
            mean: Array1::zeros(n),
            m2: Array1::zeros(n),
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.count += 1;
        let c = self.count as f64;
        for (j, &v) in values.iter().enumerate() {
            let delta = v - self.mean[j];
            self.mean[j] += delta / c;
            self.m2[j] += delta * (v - self.mean[j]);
        }
    }

    /// Chan's parallel merge of two Welford accumulators.
    fn merge(mut self, other: Accumulator) -> Accumulator {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let total = na + nb;
        for j in 0..self.mean.len() {
            let delta = other.mean[j] - self.mean[j];
            self.mean[j] += delta * nb / total;
            self.m2[j] += other.m2[j] + delta * delta * na * nb / total;
        }
        self.count += other.count;
        self
    }
}

/// Runs `n_samples` uniform draws through the evaluator.
///
/// Sample `i` uses sub-stream `i` of `seed` (the same streams as
/// [`ParameterSpace::sample_uniform`]), so two runs with equal seeds see
/// identical design points regardless of evaluator or thread count.
pub fn monte_carlo<E: TorqueEvaluator>(
    evaluator: &E,
    space: &ParameterSpace,
    n_samples: usize,
    seed: u64,
) -> Result<McStatistics> {
    if n_samples < 2 {
        return Err(RomError::Config(
            "Monte Carlo needs at least 2 samples".into(),
        ));
    }
    let n = evaluator.signal_len();
    let n_chunks = n_samples.div_ceil(CHUNK);
    let chunks: Vec<Accumulator> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| -> Result<Accumulator> {
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(n_samples);
            let mut acc = Accumulator::new(n);
            for i in lo..hi {
                let mut rng = stream_rng(seed, i as u64);
                let p = space.sample_one(&mut rng);
                let signal = evaluator.evaluate(&p).map_err(|e| {
                    RomError::Data(format!(
                        "evaluator failed at sample {i} (design {:?}): {e}",
                        p.values()
                    ))
                })?;
                if signal.len() != n {
                    return Err(RomError::Data(format!(
                        "evaluator returned length {} at sample {i}, expected {n}",
                        signal.len()
                    )));
                }
                acc.push(signal.values());
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let total = chunks
        .into_iter()
        .fold(Accumulator::new(n), |a, b| a.merge(b));
    let denom = (total.count as f64 - 1.0).max(1.0);
    Ok(McStatistics {
        mean: total.mean.to_vec(),
        std: total.m2.iter().map(|v| (v / denom).sqrt()).collect(),
        n_samples,
        seed,
    })
}

/// Per-angle absolute percentage errors of candidate statistics against a
/// reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UqComparison {
    pub ape_mean: Vec<f64>,
    pub ape_std: Vec<f64>,
    pub signal_averaged_ape_mean: f64,
    pub signal_averaged_ape_std: f64,
}

impl UqComparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes")
    }

    /// CSV form `angle_deg, ape_mean, ape_std`.
    pub fn to_csv(&self, period_degrees: f64) -> String {
        let n = self.ape_mean.len();
        let mut out = String::from("angle_deg,ape_mean,ape_std\n");
        for i in 0..n {
            let angle = period_degrees * i as f64 / n as f64;
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(angle),
                fmt_f64(self.ape_mean[i]),
                fmt_f64(self.ape_std[i])
            ));
        }
        out
    }
}

/// `|candidate - reference| / reference`, per angle, for mean and std.
pub fn compare_stats(candidate: &McStatistics, reference: &McStatistics) -> Result<UqComparison> {
    let n = reference.mean.len();
    if candidate.mean.len() != n {
        return Err(RomError::Data(format!(
            "candidate has {} angles, reference {}",
            candidate.mean.len(),
            n
        )));
    }
    let mut ape_mean = Vec::with_capacity(n);
    let mut ape_std = Vec::with_capacity(n);
    for j in 0..n {
        if reference.mean[j].abs() < 1e-12 || reference.std[j].abs() < 1e-12 {
            return Err(RomError::Metric(format!(
                "reference statistic at angle index {j} is zero; relative error undefined"
            )));
        }
        ape_mean.push((candidate.mean[j] - reference.mean[j]).abs() / reference.mean[j]);
        ape_std.push((candidate.std[j] - reference.std[j]).abs() / reference.std[j]);
    }
    Ok(UqComparison {
        signal_averaged_ape_mean: ape_mean.iter().sum::<f64>() / n as f64,
        signal_averaged_ape_std: ape_std.iter().sum::<f64>() / n as f64,
        ape_mean,
        ape_std,
    })
}
