//! Run configuration: a JSON file overlaid by command-line flags.

use serde::{Deserialize, Serialize};

use rom_surrogate::error::{Result, RomError};
use rom_surrogate::fnn::TrainingConfig;
use rom_surrogate::gp::GpTrainConfig;
use rom_surrogate::pce::lar::PceTrainConfig;
use rom_surrogate::pipeline::TrainSettings;

/// Every knob of the experiment protocol. All fields optional; a JSON
/// config file fills what the flags do not, flags win on conflict.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Total dataset size for generation / report runs.
    pub m: Option<usize>,
    /// Signal length.
    pub n: Option<usize>,
    /// Master seed.
    pub seed: Option<u64>,
    /// Out-of-band amplitude of the synthetic model (0 = band-limited).
    pub noise_floor: Option<f64>,
    /// Training sizes (report) or the single training size (train).
    pub mt: Option<Vec<usize>>,
    /// Validation size taken from the dataset tail.
    pub mv: Option<usize>,
    /// Retained frequency components for the DFT reduction.
    pub r: Option<usize>,
    /// Retained principal components for the PCA reduction.
    pub c: Option<usize>,
    // Regression hyperparameters.
    pub gp_budget: Option<usize>,
    pub gp_subsample: Option<usize>,
    pub gp_jitter: Option<f64>,
    pub fnn_epochs: Option<usize>,
    pub fnn_hidden: Option<Vec<usize>>,
    pub fnn_batch: Option<usize>,
    pub fnn_learning_rate: Option<f64>,
    pub pce_degrees: Option<Vec<usize>>,
    pub pce_q: Option<f64>,
    pub pce_max_terms: Option<usize>,
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| RomError::Config(format!("config file {}: {e}", path.display())))
    }

    /// Overlays `flags` (winning) on top of `self`.
    pub fn overlaid(mut self, flags: RunConfig) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if flags.$field.is_some() { self.$field = flags.$field; })*
            };
        }
        take!(
            m, n, seed, noise_floor, mt, mv, r, c, gp_budget, gp_subsample, gp_jitter,
            fnn_epochs, fnn_hidden, fnn_batch, fnn_learning_rate, pce_degrees, pce_q,
            pce_max_terms
        );
        self
    }

    pub fn m(&self) -> usize {
        self.m.unwrap_or(2000)
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(120)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(42)
    }

    pub fn mv(&self) -> usize {
        self.mv.unwrap_or(200)
    }

    pub fn training_sizes(&self) -> Vec<usize> {
        self.mt.clone().unwrap_or_else(|| vec![600, 1200, 1800])
    }

    pub fn r(&self) -> usize {
        self.r.unwrap_or(11)
    }

    /// PCA component count; defaults to the real dimension of the DFT
    /// reduction at the configured `r` (2r - 1).
    pub fn c(&self) -> usize {
        self.c.unwrap_or(2 * self.r() - 1)
    }

    /// Materializes the per-family training settings, seeded by `seed`.
    pub fn train_settings(&self, seed: u64) -> TrainSettings {
        let defaults = TrainSettings::default();
        TrainSettings {
            pce: PceTrainConfig {
                degree_range: self.pce_degrees.clone().unwrap_or_else(|| vec![1, 2, 3]),
                q: self.pce_q.unwrap_or(0.75),
                max_path_terms: self.pce_max_terms.unwrap_or(60),
                ..PceTrainConfig::default()
            },
            fnn_hidden: self.fnn_hidden.clone().unwrap_or(defaults.fnn_hidden),
            fnn: TrainingConfig {
                epochs: self.fnn_epochs.unwrap_or(600),
                batch_size: self.fnn_batch.unwrap_or(32),
                initial_learning_rate: self.fnn_learning_rate.unwrap_or(0.01),
                seed,
                ..TrainingConfig::default()
            },
            gp: GpTrainConfig {
                budget: self.gp_budget.unwrap_or(400),
                seed,
                search_subsample: Some(self.gp_subsample.unwrap_or(160)),
                jitter: self.gp_jitter.unwrap_or(1e-8),
                ..GpTrainConfig::default()
            },
        }
    }
}
