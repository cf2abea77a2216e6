//! Deterministic synthetic torque model.
//!
//! Stands in for the expensive field simulation: maps a design point to a
//! periodic torque signal with controlled harmonic content. Each retained
//! harmonic order carries an amplitude and a phase that are fixed sparse
//! polynomials of the normalized design coordinates, so ground truth for
//! every downstream stage (reduction, regression, UQ) is known by
//! construction. An optional out-of-band term (scaled by `noise_floor`)
//! adds content outside the main harmonic set to exercise truncation error.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, RomError};
use crate::param_space::{DesignPoint, ParameterSpace};
use crate::signal::TorqueSignal;

/// One term `coefficient * prod_i x_{v_i}^{e_i}` of a sparse polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coefficient: f64,
    /// `(variable index, exponent)` pairs; empty means a constant term.
    pub powers: Vec<(usize, u32)>,
}

/// Sparse multivariate polynomial over normalized coordinates in `[-1, 1]^P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsePoly {
    pub terms: Vec<PolyTerm>,
}

impl SparsePoly {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: vec![PolyTerm {
                coefficient: c,
                powers: vec![],
            }],
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.powers
                    .iter()
                    .fold(t.coefficient, |acc, &(v, e)| acc * x[v].powi(e as i32))
            })
            .sum()
    }

    /// Lower bound of the polynomial over the unit box: the constant part
    /// minus the absolute sum of all non-constant coefficients.
    pub fn lower_bound_on_box(&self) -> f64 {
        self.terms.iter().fold(0.0, |acc, t| {
            if t.powers.is_empty() {
                acc + t.coefficient
            } else {
                acc - t.coefficient.abs()
            }
        })
    }

    fn max_variable(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|t| t.powers.iter().map(|&(v, _)| v))
            .max()
    }
}

/// Builds a [`SparsePoly`] from `(coefficient, [(var, exp), ...])` tuples.
fn poly(terms: &[(f64, &[(usize, u32)])]) -> SparsePoly {
    SparsePoly {
        terms: terms
            .iter()
            .map(|(c, p)| PolyTerm {
                coefficient: *c,
                powers: p.to_vec(),
            })
            .collect(),
    }
}

/// A single harmonic: `amplitude(x) * cos(2 pi order n / N + phase(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicComponent {
    pub order: usize,
    pub amplitude: SparsePoly,
    pub phase: SparsePoly,
}

/// Bounded ridge sinusoid `gain * sin(frequency * w.x + offset)`.
///
/// Used for the out-of-band content: smooth and deterministic, but its
/// effective frequency across the design box is far too high for any
/// regression model at realistic training sizes, so dropping it by
/// truncation genuinely filters otherwise-unexplainable variation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryTerm {
    pub gain: f64,
    pub frequency: f64,
    /// `(variable index, weight)` pairs of the ridge direction.
    pub weights: Vec<(usize, f64)>,
    pub offset: f64,
}

impl OscillatoryTerm {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let ridge: f64 = self.weights.iter().map(|&(i, w)| w * x[i]).sum();
        self.gain * (self.frequency * ridge + self.offset).sin()
    }

    fn max_variable(&self) -> Option<usize> {
        self.weights.iter().map(|&(i, _)| i).max()
    }
}

/// One out-of-band component of the torque signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseComponent {
    pub order: usize,
    pub amplitude: OscillatoryTerm,
    pub phase: OscillatoryTerm,
}

/// Fixed description of the synthetic torque model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticModelConfig {
    /// Main harmonic content; orders ascending and distinct, order 0 first.
    pub harmonics: Vec<HarmonicComponent>,
    /// Out-of-band content, active when `noise_floor > 0`. Orders must be
    /// disjoint from the main set.
    pub noise_harmonics: Vec<NoiseComponent>,
    /// Amplitude scale of the out-of-band term.
    pub noise_floor: f64,
    /// Identity tag recorded in digests; the polynomials themselves are
    /// fixed tables, not derived from this value.
    pub seed: u64,
}

impl SyntheticModelConfig {
    /// Validates structural invariants against a parameter space.
    pub fn validate(&self, space: &ParameterSpace) -> Result<()> {
        if self.harmonics.is_empty() {
            return Err(RomError::Config("config needs at least one harmonic".into()));
        }
        if self.harmonics[0].order != 0 {
            return Err(RomError::Config(
                "harmonic order 0 (mean torque) must be present and listed first".into(),
            ));
        }
        for w in self.harmonics.windows(2) {
            if w[0].order >= w[1].order {
                return Err(RomError::Config(
                    "harmonic orders must be ascending and distinct".into(),
                ));
            }
        }
        if self.harmonics[0].amplitude.lower_bound_on_box() <= 0.0 {
            return Err(RomError::Config(
                "mean torque amplitude must be strictly positive over the design box".into(),
            ));
        }
        let p = space.dimension();
        for h in &self.harmonics {
            for poly in [&h.amplitude, &h.phase] {
                if let Some(v) = poly.max_variable() {
                    if v >= p {
                        return Err(RomError::Config(format!(
                            "harmonic {} references variable {} but the space has {} parameters",
                            h.order, v, p
                        )));
                    }
                }
            }
        }
        for nh in &self.noise_harmonics {
            for term in [&nh.amplitude, &nh.phase] {
                if let Some(v) = term.max_variable() {
                    if v >= p {
                        return Err(RomError::Config(format!(
                            "noise order {} references variable {} but the space has {} parameters",
                            nh.order, v, p
                        )));
                    }
                }
            }
        }
        for nh in &self.noise_harmonics {
            if self.harmonics.iter().any(|h| h.order == nh.order) {
                return Err(RomError::Config(format!(
                    "noise order {} collides with a main harmonic",
                    nh.order
                )));
            }
        }
        if !self.noise_floor.is_finite() || self.noise_floor < 0.0 {
            return Err(RomError::Config("noise_floor must be non-negative".into()));
        }
        Ok(())
    }

    /// Main harmonic orders (the band of the noise-free model).
    pub fn harmonic_orders(&self) -> Vec<usize> {
        self.harmonics.iter().map(|h| h.order).collect()
    }

    /// Highest order that contributes content at the current settings.
    pub fn max_active_order(&self) -> usize {
        let main = self.harmonics.last().map(|h| h.order).unwrap_or(0);
        if self.noise_floor > 0.0 {
            self.noise_harmonics
                .iter()
                .map(|h| h.order)
                .fold(main, usize::max)
        } else {
            main
        }
    }

    /// Returns a copy with the out-of-band term switched on.
    pub fn with_noise_floor(mut self, noise_floor: f64) -> Self {
        self.noise_floor = noise_floor;
        self
    }

    /// Returns a copy restricted to harmonics representable at signal
    /// length `n` (orders `<= n/2 - 1`), for generating short signals.
    pub fn restricted_to(&self, n: usize) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(RomError::Config(format!(
                "signal length {n} too short for any harmonic content"
            )));
        }
        let cap = n / 2 - 1;
        let mut out = self.clone();
        out.harmonics.retain(|h| h.order <= cap);
        out.noise_harmonics.retain(|h| h.order <= cap);
        out.validate(&crate::param_space::default_space())?;
        Ok(out)
    }

    /// SHA-256 of the canonical JSON form, hex-encoded.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// The built-in synthetic model: 11 main harmonic orders
/// `{0, 1, 2, 3, 4, 6, 8, 12, 18, 24, 36}` with band-limited output
/// (`noise_floor = 0`). Mean torque stays within roughly 3.4..8.6 N*m over
/// the design box and every one of the 20 parameters influences at least
/// one harmonic. Use [`default_noisy_config`] for the variant with
/// out-of-band content.
pub fn default_config() -> SyntheticModelConfig {
    let harmonics = vec![
        HarmonicComponent {
            order: 0,
            amplitude: poly(&[
                (6.0, &[]),
                (0.9, &[(4, 1)]),
                (0.55, &[(7, 1)]),
                (0.35, &[(0, 1)]),
                (0.30, &[(4, 1), (7, 1)]),
                (0.22, &[(15, 2)]),
                (0.18, &[(1, 1), (2, 1)]),
                (0.12, &[(9, 3)]),
            ]),
            phase: SparsePoly { terms: vec![] },
        },
        HarmonicComponent {
            order: 1,
            amplitude: poly(&[
                (0.60, &[]),
                (0.18, &[(0, 1)]),
                (0.12, &[(5, 1)]),
                (0.09, &[(0, 1), (5, 1)]),
            ]),
            phase: poly(&[(0.40, &[(3, 1)]), (0.30, &[(6, 1)])]),
        },
        HarmonicComponent {
            order: 2,
            amplitude: poly(&[
                (0.45, &[]),
                (0.11, &[(1, 1)]),
                (-0.09, &[(8, 1)]),
                (0.05, &[(8, 2)]),
            ]),
            phase: poly(&[(0.50, &[(2, 1)]), (-0.25, &[(10, 1)])]),
        },
        HarmonicComponent {
            order: 3,
            amplitude: poly(&[
                (0.32, &[]),
                (-0.10, &[(2, 1)]),
                (0.06, &[(11, 1)]),
                (0.04, &[(2, 1), (11, 1)]),
            ]),
            phase: poly(&[(0.35, &[(12, 1)]), (0.20, &[(0, 1)])]),
        },
        HarmonicComponent {
            order: 4,
            amplitude: poly(&[(0.26, &[]), (0.06, &[(13, 1)]), (0.04, &[(3, 2)])]),
            phase: poly(&[(-0.30, &[(14, 1)]), (0.15, &[(1, 1)])]),
        },
        HarmonicComponent {
            order: 6,
            amplitude: poly(&[
                (0.40, &[]),
                (0.14, &[(5, 1)]),
                (0.08, &[(14, 1)]),
                (0.05, &[(5, 1), (14, 1)]),
            ]),
            phase: poly(&[(0.45, &[(15, 1)]), (-0.20, &[(2, 1)])]),
        },
        HarmonicComponent {
            order: 8,
            amplitude: poly(&[(0.18, &[]), (0.05, &[(16, 1)]), (-0.04, &[(6, 1)])]),
            phase: poly(&[(0.25, &[(17, 1)]), (0.18, &[(4, 1)])]),
        },
        HarmonicComponent {
            order: 12,
            amplitude: poly(&[
                (0.30, &[]),
                (0.08, &[(6, 1)]),
                (0.06, &[(16, 1)]),
                (0.03, &[(6, 1), (16, 1)]),
            ]),
            phase: poly(&[(-0.35, &[(18, 1)]), (0.10, &[(5, 1)])]),
        },
        HarmonicComponent {
            order: 18,
            amplitude: poly(&[(0.12, &[]), (0.035, &[(17, 1)]), (0.025, &[(9, 1)])]),
            phase: poly(&[(0.30, &[(19, 1)]), (-0.15, &[(7, 1)])]),
        },
        HarmonicComponent {
            order: 24,
            amplitude: poly(&[(0.08, &[]), (0.02, &[(18, 1)]), (0.015, &[(10, 2)])]),
            phase: poly(&[(0.20, &[(8, 1)]), (0.12, &[(11, 1)])]),
        },
        HarmonicComponent {
            order: 36,
            amplitude: poly(&[(0.05, &[]), (0.015, &[(19, 1)]), (-0.01, &[(12, 1)])]),
            phase: poly(&[(0.18, &[(13, 1)]), (0.10, &[(3, 1)])]),
        },
    ];
    let osc = |gain: f64, frequency: f64, weights: &[(usize, f64)], offset: f64| OscillatoryTerm {
        gain,
        frequency,
        weights: weights.to_vec(),
        offset,
    };
    let noise_harmonics = vec![
        NoiseComponent {
            order: 5,
            amplitude: osc(0.9, 5.0, &[(1, 1.0), (4, 0.8), (9, 0.6), (16, 0.9)], 0.3),
            phase: osc(1.5, 4.0, &[(2, 1.0), (16, 0.7), (6, 0.5)], 1.1),
        },
        NoiseComponent {
            order: 7,
            amplitude: osc(0.8, 6.0, &[(3, 0.9), (11, 1.0), (17, 0.7)], 2.0),
            phase: osc(1.4, 5.0, &[(5, 0.8), (13, 0.9), (0, 0.4)], 0.4),
        },
        NoiseComponent {
            order: 9,
            amplitude: osc(0.7, 7.0, &[(0, 0.7), (6, 0.9), (18, 0.8), (12, 0.5)], 1.7),
            phase: osc(1.3, 6.0, &[(7, 1.0), (19, 0.6)], 2.2),
        },
        NoiseComponent {
            order: 13,
            amplitude: osc(0.6, 5.5, &[(8, 0.8), (15, 0.9), (2, 0.7)], 0.9),
            phase: osc(1.2, 4.5, &[(10, 0.9), (0, 0.5), (14, 0.6)], 2.9),
        },
        NoiseComponent {
            order: 17,
            amplitude: osc(0.55, 6.5, &[(12, 1.0), (19, 0.8), (4, 0.6)], 2.5),
            phase: osc(1.1, 5.5, &[(6, 0.7), (11, 0.8), (3, 0.5)], 0.8),
        },
        NoiseComponent {
            order: 26,
            amplitude: osc(0.5, 7.5, &[(13, 0.9), (18, 0.7), (1, 0.8), (7, 0.4)], 1.3),
            phase: osc(1.0, 6.5, &[(3, 0.9), (9, 0.7)], 1.9),
        },
        NoiseComponent {
            order: 41,
            amplitude: osc(0.45, 8.0, &[(10, 0.8), (17, 0.9), (5, 0.6), (14, 0.7)], 0.6),
            phase: osc(0.9, 7.0, &[(15, 0.8), (8, 0.9), (1, 0.5)], 2.6),
        },
    ];
    SyntheticModelConfig {
        harmonics,
        noise_harmonics,
        noise_floor: 0.0,
        seed: 0,
    }
}

/// Amplitude scale of the out-of-band term in the noisy variant.
pub const DEFAULT_NOISE_FLOOR: f64 = 0.02;

/// The built-in model with the out-of-band term switched on.
pub fn default_noisy_config() -> SyntheticModelConfig {
    default_config().with_noise_floor(DEFAULT_NOISE_FLOOR)
}

/// Evaluates the synthetic torque signal of length `n` at a design point.
///
/// Fully deterministic in `(config, p, n)`.
pub fn evaluate_torque(
    config: &SyntheticModelConfig,
    space: &ParameterSpace,
    p: &DesignPoint,
    n: usize,
) -> Result<TorqueSignal> {
    config.validate(space)?;
    let max_order = config.max_active_order();
    if !n.is_multiple_of(2) || n < 2 * max_order + 2 {
        return Err(RomError::Config(format!(
            "signal length {n} too small: need even N >= {}",
            2 * max_order + 2
        )));
    }
    let x = space.normalize(p)?;
    evaluate_torque_normalized(config, &x, n)
}

/// Same as [`evaluate_torque`] but over already-normalized coordinates.
/// Skips validation; callers must uphold the preconditions.
pub(crate) fn evaluate_torque_normalized(
    config: &SyntheticModelConfig,
    x: &[f64],
    n: usize,
) -> Result<TorqueSignal> {
    let mut active: Vec<(usize, f64, f64)> = config
        .harmonics
        .iter()
        .map(|h| (h.order, h.amplitude.evaluate(x), h.phase.evaluate(x)))
        .collect();
    if config.noise_floor > 0.0 {
        active.extend(config.noise_harmonics.iter().map(|h| {
            (
                h.order,
                config.noise_floor * h.amplitude.evaluate(x),
                h.phase.evaluate(x),
            )
        }));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let values = (0..n)
        .map(|idx| {
            active
                .iter()
                .map(|&(order, amp, phase)| {
                    if order == 0 {
                        amp
                    } else {
                        amp * (two_pi * (order * idx % n) as f64 / n as f64 + phase).cos()
                    }
                })
                .sum()
        })
        .collect();
    TorqueSignal::new(values)
}
