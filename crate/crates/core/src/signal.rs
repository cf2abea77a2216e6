//! Periodic torque signal sampled on an equidistant rotation-angle grid.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RomError};

/// One period of the torque signal repeats every 30 degrees of rotation.
pub const PERIOD_DEGREES: f64 = 30.0;

/// `N` torque samples over one rotation period.
///
/// Sample `n` sits at angle `beta_n = n * period / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorqueSignal {
    values: Vec<f64>,
    period_degrees: f64,
}

impl TorqueSignal {
    /// Wraps sample values with the default 30-degree period.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_period(values, PERIOD_DEGREES)
    }

    pub fn with_period(values: Vec<f64>, period_degrees: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(RomError::Data(
                "torque signal needs at least 2 samples".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RomError::Data(
                "torque signal contains non-finite values".into(),
            ));
        }
        if !(period_degrees.is_finite() && period_degrees > 0.0) {
            return Err(RomError::Data("period must be positive".into()));
        }
        Ok(Self {
            values,
            period_degrees,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period_degrees(&self) -> f64 {
        self.period_degrees
    }

    /// Rotation angle of sample `n` in degrees.
    pub fn angle_degrees(&self, n: usize) -> f64 {
        self.period_degrees * n as f64 / self.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_input() {
        assert!(TorqueSignal::new(vec![1.0]).is_err());
        assert!(TorqueSignal::new(vec![1.0, f64::NAN]).is_err());
        assert!(TorqueSignal::with_period(vec![1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn angle_grid() {
        let s = TorqueSignal::new(vec![0.0; 120]).unwrap();
        assert_eq!(s.angle_degrees(0), 0.0);
        assert_eq!(s.angle_degrees(60), 15.0);
        assert!(s.angle_degrees(119) < 30.0);
    }
}
