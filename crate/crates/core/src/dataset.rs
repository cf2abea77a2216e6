//! Datasets of design points and torque signals, with CSV round-tripping.
//!
//! CSV layout: header `p1,...,pP,tau_0,...,tau_{N-1}`, one row per sample.
//! Values are written in scientific notation with 17 significant digits so
//! files round-trip bit-exactly through the loader.

use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Result, RomError};
use crate::param_space::{DesignPoint, ParameterSpace};
use crate::signal::TorqueSignal;
use crate::synthetic::{evaluate_torque_normalized, SyntheticModelConfig};

/// Formats a float with full round-trip precision (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A batch of `M` design points with their `N`-sample torque signals.
#[derive(Debug, Clone)]
pub struct Dataset {
    space: ParameterSpace,
    points: Vec<DesignPoint>,
    signals: Array2<f64>,
    seed: Option<u64>,
    config_digest: Option<String>,
}

impl Dataset {
    pub fn new(
        space: ParameterSpace,
        points: Vec<DesignPoint>,
        signals: Array2<f64>,
    ) -> Result<Self> {
        if points.len() != signals.nrows() {
            return Err(RomError::Data(format!(
                "{} design points but {} signal rows",
                points.len(),
                signals.nrows()
            )));
        }
        if points.is_empty() {
            return Err(RomError::Data("dataset must be non-empty".into()));
        }
        if signals.ncols() < 2 {
            return Err(RomError::Data("signals need at least 2 samples".into()));
        }
        if signals.iter().any(|v| !v.is_finite()) {
            return Err(RomError::Data("signals contain non-finite values".into()));
        }
        Ok(Self {
            space,
            points,
            signals,
            seed: None,
            config_digest: None,
        })
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn signal_len(&self) -> usize {
        self.signals.ncols()
    }

    pub fn points(&self) -> &[DesignPoint] {
        &self.points
    }

    pub fn signals(&self) -> &Array2<f64> {
        &self.signals
    }

    pub fn signal(&self, m: usize) -> TorqueSignal {
        TorqueSignal::new(self.signals.row(m).to_vec()).expect("stored signals are valid")
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn config_digest(&self) -> Option<&str> {
        self.config_digest.as_deref()
    }

    /// Design points as an `M x P` matrix of normalized coordinates.
    pub fn normalized_inputs(&self) -> Result<Array2<f64>> {
        let p = self.space.dimension();
        let mut out = Array2::zeros((self.len(), p));
        for (m, point) in self.points.iter().enumerate() {
            let x = self.space.normalize(point)?;
            for (j, v) in x.into_iter().enumerate() {
                out[[m, j]] = v;
            }
        }
        Ok(out)
    }

    /// Splits into a training prefix of `m_train` rows and a validation
    /// suffix of `m_val` rows taken from the end, so the validation set
    /// stays fixed while the training size varies.
    pub fn split(&self, m_train: usize, m_val: usize) -> Result<(Dataset, Dataset)> {
        if m_train == 0 || m_val == 0 || m_train + m_val > self.len() {
            return Err(RomError::Config(format!(
                "split {m_train}+{m_val} exceeds dataset size {}",
                self.len()
            )));
        }
        let take = |range: std::ops::Range<usize>| -> Dataset {
            Dataset {
                space: self.space.clone(),
                points: self.points[range.clone()].to_vec(),
                signals: self.signals.slice(ndarray::s![range, ..]).to_owned(),
                seed: self.seed,
                config_digest: self.config_digest.clone(),
            }
        };
        let start_val = self.len() - m_val;
        Ok((take(0..m_train), take(start_val..self.len())))
    }

    /// Writes the CSV form; deterministic byte output.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let p = self.space.dimension();
        let n = self.signal_len();
        let mut header = Vec::with_capacity(p + n);
        for i in 1..=p {
            header.push(format!("p{i}"));
        }
        for i in 0..n {
            header.push(format!("tau_{i}"));
        }
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for (m, point) in self.points.iter().enumerate() {
            line.clear();
            for (i, v) in point.values().iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&fmt_f64(*v));
            }
            for v in self.signals.row(m) {
                line.push(',');
                line.push_str(&fmt_f64(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut buf = std::io::BufWriter::new(file);
        self.write_csv(&mut buf)?;
        buf.flush()?;
        Ok(())
    }

    /// Parses the CSV form, validating each design point against `space`.
    pub fn read_csv(text: &str, space: &ParameterSpace) -> Result<Self> {
        let p = space.dimension();
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| RomError::Data("dataset CSV is empty".into()))?;
        let cols = header.split(',').count();
        if cols <= p {
            return Err(RomError::Data(format!(
                "dataset CSV has {cols} columns; need more than {p}"
            )));
        }
        let n = cols - p;
        let mut points = Vec::new();
        let mut values = Vec::new();
        for (row, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(RomError::Data(format!(
                    "row {} has {} fields, expected {cols}",
                    row + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|_| {
                    RomError::Data(format!("row {}: unparseable value {s:?}", row + 1))
                })
            };
            let coords: Vec<f64> = fields[..p].iter().map(|s| parse(s)).collect::<Result<_>>()?;
            points.push(space.point(coords).map_err(|e| {
                RomError::Data(format!("row {}: {e}", row + 1))
            })?);
            for s in &fields[p..] {
                values.push(parse(s)?);
            }
        }
        if points.is_empty() {
            return Err(RomError::Data("dataset CSV has no rows".into()));
        }
        let signals = Array2::from_shape_vec((points.len(), n), values)
            .map_err(|e| RomError::Data(format!("signal matrix shape: {e}")))?;
        Self::new(space.clone(), points, signals)
    }

    pub fn read_csv_file(path: &Path, space: &ParameterSpace) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::read_csv(&text, space)
    }

    /// SHA-256 of the CSV byte stream, hex-encoded.
    pub fn digest(&self) -> Result<String> {
        let mut bytes = Vec::new();
        self.write_csv(&mut bytes)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }
}

/// Samples `m` uniform design points (seeded) and evaluates the synthetic
/// model at each; sample `i` uses sub-stream `i`, so the result is
/// independent of the parallel chunking.
pub fn batch_generate(
    config: &SyntheticModelConfig,
    space: &ParameterSpace,
    m: usize,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    if m == 0 {
        return Err(RomError::Config("batch size must be at least 1".into()));
    }
    config.validate(space)?;
    let max_order = config.max_active_order();
    if !n.is_multiple_of(2) || n < 2 * max_order + 2 {
        return Err(RomError::Config(format!(
            "signal length {n} too small: need even N >= {}",
            2 * max_order + 2
        )));
    }
    let points = space.sample_uniform(m, seed);
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|p| {
            let x = space.normalize(p)?;
            Ok(evaluate_torque_normalized(config, &x, n)?.values().to_vec())
        })
        .collect::<Result<_>>()?;
    let mut signals = Array2::zeros((m, n));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            signals[[i, j]] = *v;
        }
    }
    let mut ds = Dataset::new(space.clone(), points, signals)?;
    ds.seed = Some(seed);
    ds.config_digest = Some(config.digest());
    Ok(ds)
}
