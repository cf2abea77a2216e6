//! Bounded design-parameter space: validation, normalization, uniform sampling.
//!
//! The built-in space has 20 geometric machine parameters with bounds in mm.
//! All regression models operate on coordinates normalized to `[-1, 1]`,
//! which is also the domain on which the Legendre basis is orthonormal.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RomError};
use crate::seeding::stream_rng;

/// The 20 built-in parameter names and their (lower, upper) bounds in mm.
const DEFAULT_PARAMETERS: [(&str, f64, f64); 20] = [
    ("LSLIT1", 6.1, 6.7),
    ("LSLIT2", 4.1, 4.5),
    ("DSLIT5", 0.9, 1.1),
    ("DSLIT6", 1.9, 2.1),
    ("MA", 142.5, 157.5),
    ("MT1", 3.8, 4.2),
    ("MW1", 20.9, 23.1),
    ("RA1", 136.8, 151.2),
    ("RA2", 157.7, 174.3),
    ("RS", 0.9, 1.1),
    ("RW2", 0.9, 1.1),
    ("RW3", 0.9, 1.1),
    ("RW4", 0.9, 1.1),
    ("RW5", 0.9, 1.1),
    ("WMAG", 3.8, 4.2),
    ("DMAG", 28.5, 31.5),
    ("ST", 1.5, 1.7),
    ("SW1", 5.7, 6.3),
    ("SW2", 3.4, 3.8),
    ("SW4", 24.2, 26.8),
];

/// A box-bounded design space with named coordinates.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    names: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParameterSpace {
    /// Builds a space from explicit names and bounds.
    pub fn new(names: Vec<String>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if names.len() != lower.len() || names.len() != upper.len() {
            return Err(RomError::Config(format!(
                "parameter space fields must have equal length (names {}, lower {}, upper {})",
                names.len(),
                lower.len(),
                upper.len()
            )));
        }
        if names.is_empty() {
            return Err(RomError::Config("parameter space must be non-empty".into()));
        }
        for i in 0..names.len() {
            if !(lower[i].is_finite() && upper[i].is_finite()) || lower[i] >= upper[i] {
                return Err(RomError::Config(format!(
                    "parameter {} has invalid bounds [{}, {}]",
                    names[i], lower[i], upper[i]
                )));
            }
        }
        for i in 0..names.len() {
            for j in (i + 1)..names.len() {
                if names[i] == names[j] {
                    return Err(RomError::Config(format!(
                        "duplicate parameter name {}",
                        names[i]
                    )));
                }
            }
        }
        Ok(Self { names, lower, upper })
    }

    /// Loads a space from its JSON form `{"names": [...], "lower": [...], "upper": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            names: Vec<String>,
            lower: Vec<f64>,
            upper: Vec<f64>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        Self::new(raw.names, raw.lower, raw.upper)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter space serializes")
    }

    pub fn dimension(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Validates raw coordinate values against the box, returning a design point.
    pub fn point(&self, values: Vec<f64>) -> Result<DesignPoint> {
        if values.len() != self.dimension() {
            return Err(RomError::Validation(format!(
                "design point has {} coordinates, space has {}",
                values.len(),
                self.dimension()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < self.lower[i] || v > self.upper[i] {
                return Err(RomError::Validation(format!(
                    "parameter {} = {} outside bounds [{}, {}]",
                    self.names[i], v, self.lower[i], self.upper[i]
                )));
            }
        }
        Ok(DesignPoint { values })
    }

    /// Maps a design point affinely onto `[-1, 1]^P`.
    ///
    /// `x_i = 2 (p_i - lower_i) / (upper_i - lower_i) - 1`
    pub fn normalize(&self, p: &DesignPoint) -> Result<Vec<f64>> {
        if p.values.len() != self.dimension() {
            return Err(RomError::Validation(format!(
                "design point has {} coordinates, space has {}",
                p.values.len(),
                self.dimension()
            )));
        }
        let mut out = Vec::with_capacity(self.dimension());
        for (i, &v) in p.values.iter().enumerate() {
            if v < self.lower[i] || v > self.upper[i] {
                return Err(RomError::Validation(format!(
                    "parameter {} = {} outside bounds [{}, {}]",
                    self.names[i], v, self.lower[i], self.upper[i]
                )));
            }
            out.push(2.0 * (v - self.lower[i]) / (self.upper[i] - self.lower[i]) - 1.0);
        }
        Ok(out)
    }

    /// Inverse of [`normalize`](Self::normalize); the result is clamped onto
    /// the box to absorb roundoff at the endpoints.
    pub fn denormalize(&self, x: &[f64]) -> Result<DesignPoint> {
        if x.len() != self.dimension() {
            return Err(RomError::Validation(format!(
                "normalized point has {} coordinates, space has {}",
                x.len(),
                self.dimension()
            )));
        }
        let mut values = Vec::with_capacity(self.dimension());
        for (i, &xi) in x.iter().enumerate() {
            if !xi.is_finite() || !(-1.0..=1.0).contains(&xi) {
                return Err(RomError::Validation(format!(
                    "normalized coordinate {} = {} outside [-1, 1]",
                    self.names[i], xi
                )));
            }
            let v = self.lower[i] + 0.5 * (xi + 1.0) * (self.upper[i] - self.lower[i]);
            values.push(v.clamp(self.lower[i], self.upper[i]));
        }
        Ok(DesignPoint { values })
    }

    /// Draws one uniform point using the given generator.
    pub fn sample_one<R: Rng>(&self, rng: &mut R) -> DesignPoint {
        let values = (0..self.dimension())
            .map(|i| {
                let u: f64 = rng.gen();
                (self.lower[i] + u * (self.upper[i] - self.lower[i]))
                    .clamp(self.lower[i], self.upper[i])
            })
            .collect();
        DesignPoint { values }
    }

    /// `count` independent uniform draws; coordinate `i` is uniform on
    /// `[lower_i, upper_i]`. Sample `m` uses sub-stream `m` of `seed`, so the
    /// result does not depend on how the index range is chunked.
    pub fn sample_uniform(&self, count: usize, seed: u64) -> Vec<DesignPoint> {
        (0..count)
            .map(|m| {
                let mut rng = stream_rng(seed, m as u64);
                self.sample_one(&mut rng)
            })
            .collect()
    }
}

/// The built-in 20-parameter design space.
pub fn default_space() -> ParameterSpace {
    let names = DEFAULT_PARAMETERS.iter().map(|p| p.0.to_string()).collect();
    let lower = DEFAULT_PARAMETERS.iter().map(|p| p.1).collect();
    let upper = DEFAULT_PARAMETERS.iter().map(|p| p.2).collect();
    ParameterSpace::new(names, lower, upper).expect("built-in space is valid")
}

/// A validated point inside a [`ParameterSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    values: Vec<f64>,
}

impl DesignPoint {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_space_matches_published_bounds() {
        let s = default_space();
        assert_eq!(s.dimension(), 20);
        assert_eq!(s.lower()[0], 6.1);
        assert_eq!(s.upper()[0], 6.7);
        assert_eq!(s.names()[0], "LSLIT1");
        assert_eq!(s.lower()[4], 142.5);
        assert_eq!(s.upper()[4], 157.5);
        assert_eq!(s.names()[4], "MA");
        assert_eq!(s.names()[19], "SW4");
        assert_eq!(s.upper()[19], 26.8);
    }

    #[test]
    fn normalize_endpoints_and_midpoint() {
        let s = default_space();
        let lo = s.point(s.lower().to_vec()).unwrap();
        let hi = s.point(s.upper().to_vec()).unwrap();
        let mid: Vec<f64> = s
            .lower()
            .iter()
            .zip(s.upper())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let mid = s.point(mid).unwrap();

        for &x in &s.normalize(&lo).unwrap() {
            assert_relative_eq!(x, -1.0, max_relative = 1e-15);
        }
        for &x in &s.normalize(&hi).unwrap() {
            assert_relative_eq!(x, 1.0, max_relative = 1e-15);
        }
        for &x in &s.normalize(&mid).unwrap() {
            assert!(x.abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_first_parameter_center() {
        // LSLIT1 = 6.4 sits exactly at the center of [6.1, 6.7].
        let s = default_space();
        let mut vals = s.lower().to_vec();
        vals[0] = 6.4;
        let p = s.point(vals).unwrap();
        let x = s.normalize(&p).unwrap();
        assert!(x[0].abs() < 1e-12, "x0 = {}", x[0]);
    }

    #[test]
    fn denormalize_upper_endpoint() {
        let s = default_space();
        let mut x = vec![0.0; 20];
        x[0] = 1.0;
        let p = s.denormalize(&x).unwrap();
        assert_relative_eq!(p.values()[0], 6.7, max_relative = 1e-12);
    }

    #[test]
    fn roundtrip_identity() {
        let s = default_space();
        for m in 0..50 {
            let p = {
                let mut rng = stream_rng(11, m);
                s.sample_one(&mut rng)
            };
            let x = s.normalize(&p).unwrap();
            let q = s.denormalize(&x).unwrap();
            for (a, b) in p.values().iter().zip(q.values()) {
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn validation_rejects_out_of_range() {
        let s = default_space();
        let mut vals = s.lower().to_vec();
        vals[3] = s.upper()[3] + 1e-9;
        let err = s.point(vals).unwrap_err();
        assert!(err.to_string().contains("DSLIT6"), "{err}");

        let mut x = vec![0.0; 20];
        x[7] = 1.0 + 1e-9;
        assert!(s.denormalize(&x).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_in_bounds() {
        let s = default_space();
        let a = s.sample_uniform(64, 99);
        let b = s.sample_uniform(64, 99);
        assert_eq!(a, b);
        for p in &a {
            assert!(s.point(p.values().to_vec()).is_ok());
        }
    }

    #[test]
    fn sample_mean_near_box_center() {
        // 1e5 draws of LSLIT1: mean within 3 standard errors of 6.4,
        // SE = (0.6 / sqrt(12)) / sqrt(1e5).
        let s = default_space();
        let n = 100_000;
        let mean: f64 = s
            .sample_uniform(n, 2024)
            .iter()
            .map(|p| p.values()[0])
            .sum::<f64>()
            / n as f64;
        let se = (0.6 / 12f64.sqrt()) / (n as f64).sqrt();
        assert!((mean - 6.4).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn marginal_passes_ks_test() {
        // Kolmogorov-Smirnov against the uniform CDF at significance 0.01.
        let s = default_space();
        let n = 10_000;
        let mut u: Vec<f64> = s
            .sample_uniform(n, 7)
            .iter()
            .map(|p| (p.values()[4] - 142.5) / 15.0)
            .collect();
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let nf = n as f64;
        let mut d: f64 = 0.0;
        for (i, &ui) in u.iter().enumerate() {
            let hi = (i + 1) as f64 / nf - ui;
            let lo = ui - i as f64 / nf;
            d = d.max(hi).max(lo);
        }
        let critical = 1.628 / nf.sqrt();
        assert!(d < critical, "KS statistic {d} >= {critical}");
    }

    #[test]
    fn rejects_inverted_bounds_and_duplicate_names() {
        assert!(ParameterSpace::new(
            vec!["a".into(), "b".into()],
            vec![0.0, 1.0],
            vec![1.0, 1.0]
        )
        .is_err());
        assert!(ParameterSpace::new(
            vec!["a".into(), "a".into()],
            vec![0.0, 0.0],
            vec![1.0, 1.0]
        )
        .is_err());
    }
}
