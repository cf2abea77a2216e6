//! Command-line driver for the torque surrogate toolkit.
//!
//! Subcommands cover the whole experiment protocol: dataset generation,
//! reduction analysis, surrogate training, prediction, validation-set
//! evaluation, Monte Carlo statistics, and the full comparison matrix.
//! Exit codes: 0 ok, 2 usage, 3 data, 4 numerical, 5 I/O.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use config::RunConfig;
use rom_surrogate::error::RomError;

#[derive(Parser)]
#[command(
    name = "rom-surrogate",
    about = "Reduced-order surrogate modeling of periodic torque signals",
    version
)]
struct Cli {
    /// Worker threads (0 = logical cores). ROM_SURROGATE_THREADS overrides.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

/// Flags shared by commands that take protocol knobs.
#[derive(Args, Clone, Default)]
struct ConfigFlags {
    /// JSON run-config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter-space JSON overriding the built-in 20-parameter space.
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Out-of-band amplitude of the synthetic model (0 = band-limited).
    #[arg(long)]
    noise_floor: Option<f64>,
    /// Training size(s); repeat for the report matrix.
    #[arg(long = "mt")]
    mt: Vec<usize>,
    /// Validation size (taken from the dataset tail).
    #[arg(long)]
    mv: Option<usize>,
    /// Retained frequency components (DFT reduction).
    #[arg(long)]
    r: Option<usize>,
    /// Retained principal components (PCA reduction).
    #[arg(long)]
    c: Option<usize>,
    #[arg(long)]
    gp_budget: Option<usize>,
    #[arg(long)]
    gp_subsample: Option<usize>,
    #[arg(long)]
    fnn_epochs: Option<usize>,
    #[arg(long)]
    pce_max_terms: Option<usize>,
}

impl ConfigFlags {
    fn resolve(&self) -> Result<RunConfig, RomError> {
        let base = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            m: self.m,
            n: self.n,
            seed: self.seed,
            noise_floor: self.noise_floor,
            mt: if self.mt.is_empty() {
                None
            } else {
                Some(self.mt.clone())
            },
            mv: self.mv,
            r: self.r,
            c: self.c,
            gp_budget: self.gp_budget,
            gp_subsample: self.gp_subsample,
            fnn_epochs: self.fnn_epochs,
            pce_max_terms: self.pce_max_terms,
            ..RunConfig::default()
        };
        Ok(base.overlaid(flags))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV (plus a sidecar manifest).
    Generate {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Synthetic model JSON overriding the built-in configuration.
        #[arg(long)]
        model_config: Option<PathBuf>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep reconstruction error over retained component counts.
    ReduceAnalyze {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Dataset CSV to analyze.
        #[arg(long)]
        dataset: PathBuf,
        /// Largest retained count to sweep (default N/2 + 1).
        #[arg(long)]
        r_max: Option<usize>,
        /// Emit worst-case reconstruction CSVs at these retained counts.
        #[arg(long = "worst-at")]
        worst_at: Vec<usize>,
        /// Also write the reduced dataset CSV at this retained count.
        #[arg(long)]
        emit_reduced: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train a surrogate bundle from a dataset.
    Train {
        #[command(flatten)]
        flags: ConfigFlags,
        #[arg(long)]
        dataset: PathBuf,
        /// Reduction kind: dft, pca, or none.
        #[arg(long)]
        reduction: String,
        /// Response surface kind: pce, fnn, or gp.
        #[arg(long)]
        rsm: String,
        /// Output bundle directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict torque signals for a CSV of design points.
    Predict {
        /// Surrogate bundle directory.
        #[arg(long)]
        bundle: PathBuf,
        /// CSV with columns p1..pP (extra columns ignored).
        #[arg(long)]
        designs: PathBuf,
        /// Output CSV (dataset layout: p1..pP, tau_0..tau_{N-1}).
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a bundle against a validation dataset.
    Evaluate {
        #[command(flatten)]
        flags: ConfigFlags,
        #[arg(long)]
        bundle: PathBuf,
        /// Validation dataset CSV (the --mv tail rows are used when set).
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Monte Carlo torque statistics through a bundle or the synthetic truth.
    Uq {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Surrogate bundle; omit to sample the synthetic truth directly.
        #[arg(long)]
        bundle: Option<PathBuf>,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = rom_surrogate::uq::DEFAULT_MC_SAMPLES)]
        samples: usize,
        /// Also sample the synthetic truth and emit a comparison report.
        #[arg(long)]
        reference_synthetic: bool,
        /// Reuse the candidate's sample stream for the reference run.
        #[arg(long)]
        common_rng: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the full (reduction x RSM x training size) comparison matrix.
    Report {
        #[command(flatten)]
        flags: ConfigFlags,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    init_threads(cli.threads);
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = match cli.command {
        Command::Generate {
            flags,
            model_config,
            out,
        } => commands::generate(&flags, model_config.as_deref(), &out),
        Command::ReduceAnalyze {
            flags,
            dataset,
            r_max,
            worst_at,
            emit_reduced,
            out_dir,
        } => commands::reduce_analyze(&flags, &dataset, r_max, &worst_at, emit_reduced, &out_dir),
        Command::Train {
            flags,
            dataset,
            reduction,
            rsm,
            out,
        } => commands::train(&flags, &dataset, &reduction, &rsm, &out),
        Command::Predict {
            bundle,
            designs,
            out,
        } => commands::predict(&bundle, &designs, &out),
        Command::Evaluate {
            flags,
            bundle,
            dataset,
            out_dir,
        } => commands::evaluate(&flags, &bundle, &dataset, &out_dir),
        Command::Uq {
            flags,
            bundle,
            samples,
            reference_synthetic,
            common_rng,
            out_dir,
        } => commands::uq(
            &flags,
            bundle.as_deref(),
            samples,
            reference_synthetic,
            common_rng,
            &out_dir,
        ),
        Command::Report { flags, out_dir } => commands::report(&flags, &out_dir),
    };
    if let Err(err) = result {
        let payload = serde_json::json!({
            "error": err.to_string(),
            "kind": err.kind(),
            "code": err.exit_code(),
        });
        eprintln!("{payload}");
        std::process::exit(err.exit_code());
    }
}

fn init_threads(flag: usize) {
    let from_env = std::env::var("ROM_SURROGATE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let threads = from_env.unwrap_or(flag);
    if threads > 0 {
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}
