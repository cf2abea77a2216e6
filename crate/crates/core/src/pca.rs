//! Principal component analysis baseline for signal dimension reduction.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RomError};
use crate::linalg::jacobi_svd;

/// Mean and top-`C` orthonormal components of a signal batch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// `C x N`, orthonormal rows ordered by descending singular value;
    /// each row's largest-magnitude entry is positive.
    components: Vec<Vec<f64>>,
    c: usize,
}

impl PcaModel {
    pub fn retained(&self) -> usize {
        self.c
    }

    pub fn signal_len(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "mean": self.mean,
            "components": self.components,
            "c": self.c,
        }))
        .expect("PCA model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            mean: Vec<f64>,
            components: Vec<Vec<f64>>,
            c: usize,
        }
        let raw: Raw = serde_json::from_str(text)?;
        if raw.components.len() != raw.c
            || raw.components.iter().any(|r| r.len() != raw.mean.len())
        {
            return Err(RomError::Data("PCA model fields are inconsistent".into()));
        }
        Ok(Self {
            mean: raw.mean,
            components: raw.components,
            c: raw.c,
        })
    }
}

/// Fits a PCA of `c` components to an `M x N` signal matrix.
///
/// Components are the top right singular vectors of the centered matrix.
/// Fails if the centered data has rank below `c`.
pub fn fit_pca(signals: &Array2<f64>, c: usize) -> Result<PcaModel> {
    let (m, n) = signals.dim();
    if m < 2 {
        return Err(RomError::Data("PCA needs at least 2 signals".into()));
    }
    if c == 0 || c > m.min(n) {
        return Err(RomError::Config(format!(
            "retained components {c} outside [1, {}]",
            m.min(n)
        )));
    }
    let mean: Array1<f64> = signals.mean_axis(ndarray::Axis(0)).unwrap();
    let centered = signals - &mean.view().insert_axis(ndarray::Axis(0));
    let (singular, vt) = jacobi_svd(&centered);
    // Rank check: relative to the largest singular value.
    let tol = singular[0].max(f64::MIN_POSITIVE) * 1e-12 * m.max(n) as f64;
    let rank = singular.iter().filter(|&&s| s > tol).count();
    if rank < c {
        return Err(RomError::Numerical(format!(
            "centered data has rank {rank} < requested components {c}"
        )));
    }
    let mut components = Vec::with_capacity(c);
    for r in 0..c {
        let mut row: Vec<f64> = vt.row(r).to_vec();
        // Deterministic sign: the largest-magnitude entry is positive.
        let lead = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if row[lead] < 0.0 {
            for v in &mut row {
                *v = -*v;
            }
        }
        components.push(row);
    }
    Ok(PcaModel {
        mean: mean.to_vec(),
        components,
        c,
    })
}

/// Projects a signal onto the component scores: `components (s - mean)`.
pub fn project(model: &PcaModel, signal: &[f64]) -> Result<Vec<f64>> {
    if signal.len() != model.signal_len() {
        return Err(RomError::Data(format!(
            "signal length {} does not match PCA model length {}",
            signal.len(),
            model.signal_len()
        )));
    }
    Ok(model
        .components
        .iter()
        .map(|row| {
            row.iter()
                .zip(signal)
                .zip(&model.mean)
                .map(|((w, s), m)| w * (s - m))
                .sum()
        })
        .collect())
}

/// Reconstructs a signal from scores: `mean + components^T scores`.
pub fn pca_reconstruct(model: &PcaModel, scores: &[f64]) -> Result<Vec<f64>> {
    if scores.len() != model.retained() {
        return Err(RomError::Data(format!(
            "{} scores but model retains {}",
            scores.len(),
            model.retained()
        )));
    }
    let mut out = model.mean.clone();
    for (row, &score) in model.components.iter().zip(scores) {
        for (o, w) in out.iter_mut().zip(row) {
            *o += score * w;
        }
    }
    Ok(out)
}

/// Batch mean absolute reconstruction error, divided by the batch size
/// (and additionally by the signal length in per-element mode).
pub fn pca_reconstruction_mae(
    signals: &Array2<f64>,
    model: &PcaModel,
    per_element: bool,
) -> Result<f64> {
    let m = signals.nrows();
    if m == 0 {
        return Err(RomError::Data("cannot evaluate MAE of an empty batch".into()));
    }
    let mut total = 0.0;
    for row in signals.rows() {
        let s = row.to_vec();
        let rec = pca_reconstruct(model, &project(model, &s)?)?;
        total += s.iter().zip(&rec).map(|(a, b)| (a - b).abs()).sum::<f64>();
    }
    let mae = total / m as f64;
    Ok(if per_element {
        mae / signals.ncols() as f64
    } else {
        mae
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use rand::Rng;

    use crate::seeding::stream_rng;

    fn random_signals(m: usize, n: usize, stream: u64) -> Array2<f64> {
        let mut rng = stream_rng(91, stream);
        Array2::from_shape_fn((m, n), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn toy_matrix_first_component_on_dominant_axis() {
        let a = array![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];
        let model = fit_pca(&a, 1).unwrap();
        let comp = &model.components()[0];
        assert_relative_eq!(comp[0].abs(), 1.0, epsilon = 1e-10);
        assert!(comp[1].abs() < 1e-10);
        assert!(comp[0] > 0.0, "sign convention");
    }

    #[test]
    fn rank_one_data_reconstructs_exactly() {
        let direction = [3.0, -1.0, 2.0, 0.5];
        let mut a = Array2::zeros((10, 4));
        for i in 0..10 {
            let t = i as f64 * 0.3 - 1.0;
            for j in 0..4 {
                a[[i, j]] = 5.0 + t * direction[j];
            }
        }
        let model = fit_pca(&a, 1).unwrap();
        for row in a.rows() {
            let s = row.to_vec();
            let rec = pca_reconstruct(&model, &project(&model, &s).unwrap()).unwrap();
            for (x, y) in s.iter().zip(&rec) {
                assert_relative_eq!(x, y, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn full_basis_reconstructs_exactly() {
        let a = random_signals(12, 6, 0);
        let model = fit_pca(&a, 6).unwrap();
        let mae = pca_reconstruction_mae(&a, &model, false).unwrap();
        assert!(mae < 1e-8, "{mae}");
    }

    #[test]
    fn projection_of_mean_is_zero() {
        let a = random_signals(15, 5, 1);
        let model = fit_pca(&a, 3).unwrap();
        let scores = project(&model, model.mean()).unwrap();
        for s in scores {
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn rows_are_orthonormal() {
        let a = random_signals(20, 8, 2);
        let model = fit_pca(&a, 5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let dot: f64 = model.components()[i]
                    .iter()
                    .zip(&model.components()[j])
                    .map(|(x, y)| x * y)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(dot, expect, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn project_then_reconstruct_is_identity_on_scores() {
        let a = random_signals(20, 8, 3);
        let model = fit_pca(&a, 4).unwrap();
        let scores = vec![0.3, -1.2, 0.8, 2.0];
        let rec = pca_reconstruct(&model, &scores).unwrap();
        let back = project(&model, &rec).unwrap();
        for (x, y) in scores.iter().zip(&back) {
            assert_relative_eq!(x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn error_non_increasing_and_matches_tail_energy() {
        let a = random_signals(30, 10, 4);
        let mean: Array1<f64> = a.mean_axis(ndarray::Axis(0)).unwrap();
        let centered = &a - &mean.view().insert_axis(ndarray::Axis(0));
        let (singular, _) = jacobi_svd(&centered);
        let mut last = f64::INFINITY;
        for c in 1..=10 {
            let model = fit_pca(&a, c).unwrap();
            // Frobenius reconstruction error equals tail singular energy.
            let mut fro = 0.0;
            for row in a.rows() {
                let s = row.to_vec();
                let rec = pca_reconstruct(&model, &project(&model, &s).unwrap()).unwrap();
                fro += s.iter().zip(&rec).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
            }
            let tail: f64 = singular[c..].iter().map(|v| v * v).sum();
            assert!(fro <= last + 1e-10);
            if tail > 1e-12 {
                assert_relative_eq!(fro, tail, max_relative = 1e-8);
            } else {
                assert!(fro < 1e-8);
            }
            last = fro;
        }
    }

    #[test]
    fn degenerate_rank_is_rejected() {
        let mut a = Array2::zeros((6, 4));
        for i in 0..6 {
            for j in 0..4 {
                a[[i, j]] = 2.0 * j as f64;
            }
        }
        // All rows identical: centered rank 0.
        assert!(fit_pca(&a, 1).is_err());
    }

    #[test]
    fn length_mismatches_are_rejected() {
        let a = random_signals(10, 5, 6);
        let model = fit_pca(&a, 2).unwrap();
        assert!(project(&model, &[0.0; 4]).is_err());
        assert!(pca_reconstruct(&model, &[0.0; 3]).is_err());
    }
}
