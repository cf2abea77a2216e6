//! DFT-based dimension reduction of periodic signals.
//!
//! A real signal of length `N` is transformed to `N` complex coefficients,
//! frequency bins are ranked by their averaged power-spectrum contribution
//! over a batch, and a reduction map keeps the `R` strongest bins (conjugate
//! pairs merged, represented by the bin with `k <= N/2`). Reconstruction
//! zero-fills the dropped bins, restores conjugates, and inverts the DFT.
//!
//! The transform is a direct `O(N^2)` summation over a precomputed twiddle
//! table, with a radix-2 path when `N` is a power of two. At the signal
//! lengths this crate targets the direct sum is fast and easy to compare
//! bit-for-bit against other implementations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RomError};
use crate::signal::TorqueSignal;

/// Relative tolerance on the imaginary residue of an inverse transform.
const IMAG_RESIDUE_REL_TOL: f64 = 1e-9;

/// Complex DFT coefficients of one signal.
#[derive(Debug, Clone)]
pub struct Spectrum {
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    /// Wraps raw coefficients; `n >= 2` required.
    pub fn from_coefficients(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(RomError::Data("spectrum needs at least 2 bins".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn n(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }
}

fn twiddle_table(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            let angle = -2.0 * std::f64::consts::PI * j as f64 / n as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// Direct DFT with sign `sign` (-1 forward, +1 inverse, no scaling).
fn dft_direct(input: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = input.len();
    let table = twiddle_table(n);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // Neumaier-compensated accumulation keeps the O(N^2) sum accurate
        // enough for the 1e-10 roundtrip contract up to N = 4096.
        let mut sum_re = 0.0f64;
        let mut c_re = 0.0f64;
        let mut sum_im = 0.0f64;
        let mut c_im = 0.0f64;
        for (idx, v) in input.iter().enumerate() {
            let mut w = table[(k * idx) % n];
            if sign > 0.0 {
                w = w.conj();
            }
            let term = v * w;
            let t = sum_re + term.re;
            c_re += if sum_re.abs() >= term.re.abs() {
                (sum_re - t) + term.re
            } else {
                (term.re - t) + sum_re
            };
            sum_re = t;
            let t = sum_im + term.im;
            c_im += if sum_im.abs() >= term.im.abs() {
                (sum_im - t) + term.im
            } else {
                (term.im - t) + sum_im
            };
            sum_im = t;
        }
        out.push(Complex64::new(sum_re + c_re, sum_im + c_im));
    }
    out
}

/// Iterative radix-2 Cooley-Tukey, `n` a power of two.
fn dft_radix2(input: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = input.len();
    debug_assert!(n.is_power_of_two());
    let mut a = input.to_vec();
    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i as u32).reverse_bits() >> (32 - bits);
        let j = j as usize;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let angle = sign * 2.0 * std::f64::consts::PI / len as f64;
        let wlen = Complex64::new(angle.cos(), angle.sin());
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for j in 0..len / 2 {
                let u = a[start + j];
                let v = a[start + j + len / 2] * w;
                a[start + j] = u + v;
                a[start + j + len / 2] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
    a
}

fn transform(input: &[Complex64], sign: f64) -> Vec<Complex64> {
    if input.len().is_power_of_two() {
        dft_radix2(input, sign)
    } else {
        dft_direct(input, sign)
    }
}

/// Forward DFT: `c_k = sum_n tau_n exp(-i 2 pi k n / N)`.
///
/// `c_0` equals `N` times the signal mean.
pub fn dft_forward(signal: &TorqueSignal) -> Result<Spectrum> {
    dft_forward_slice(signal.values())
}

/// Forward DFT of a raw sample slice.
pub fn dft_forward_slice(values: &[f64]) -> Result<Spectrum> {
    if values.len() < 2 {
        return Err(RomError::Data("signal needs at least 2 samples".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(RomError::Data("signal contains non-finite values".into()));
    }
    let input: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Spectrum::from_coefficients(transform(&input, -1.0))
}

/// Inverse DFT: `tau_n = (1/N) sum_k c_k exp(+i 2 pi k n / N)`.
///
/// Fails if the imaginary residue exceeds `1e-9` relative to the signal
/// magnitude, which indicates a spectrum without Hermitian symmetry.
pub fn dft_inverse(spectrum: &Spectrum) -> Result<TorqueSignal> {
    let n = spectrum.n();
    let out = transform(&spectrum.coefficients, 1.0);
    let scale = 1.0 / n as f64;
    let mut max_abs = 0.0f64;
    let mut max_imag = 0.0f64;
    let mut values = Vec::with_capacity(n);
    for v in &out {
        let re = v.re * scale;
        let im = v.im * scale;
        max_abs = max_abs.max(re.abs());
        max_imag = max_imag.max(im.abs());
        values.push(re);
    }
    let floor = max_abs.max(1e-30);
    if max_imag > IMAG_RESIDUE_REL_TOL * floor {
        return Err(RomError::Numerical(format!(
            "inverse DFT imaginary residue {max_imag:e} exceeds {IMAG_RESIDUE_REL_TOL:e} relative; spectrum is not Hermitian"
        )));
    }
    TorqueSignal::new(values)
}

/// Per-bin power spectrum `PS_k = |c_k|^2 / N`.
pub fn power_spectrum(spectrum: &Spectrum) -> Vec<f64> {
    let n = spectrum.n() as f64;
    spectrum
        .coefficients
        .iter()
        .map(|c| c.norm_sqr() / n)
        .collect()
}

/// Frequency bins ranked by averaged power-spectrum contribution.
///
/// `avg_contribution[k]` is the mean of `|c_k|^2` over the batch for every
/// raw bin `k`. For ranking, conjugate pairs `(k, N-k)` are merged and
/// represented by `k <= N/2`; `order` lists those representatives sorted by
/// descending contribution, ties broken by ascending bin index.
#[derive(Debug, Clone)]
pub struct ComponentRanking {
    n: usize,
    avg_contribution: Vec<f64>,
    order: Vec<usize>,
}

impl ComponentRanking {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn avg_contribution(&self) -> &[f64] {
        &self.avg_contribution
    }

    /// Merged-bin representatives (`0..=N/2`) in ranking order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// Averages `|c_k|^2` over a batch of spectra and ranks merged bins.
pub fn rank_components(spectra: &[Spectrum]) -> Result<ComponentRanking> {
    let first = spectra
        .first()
        .ok_or_else(|| RomError::Data("cannot rank components of an empty batch".into()))?;
    let n = first.n();
    if spectra.iter().any(|s| s.n() != n) {
        return Err(RomError::Data(
            "spectra in a batch must share the same length".into(),
        ));
    }
    let m = spectra.len() as f64;
    let mut avg = vec![0.0f64; n];
    for s in spectra {
        for (k, c) in s.coefficients.iter().enumerate() {
            avg[k] += c.norm_sqr();
        }
    }
    for v in &mut avg {
        *v /= m;
    }
    let mut order: Vec<usize> = (0..=n / 2).collect();
    order.sort_by(|&a, &b| {
        avg[b]
            .partial_cmp(&avg[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(ComponentRanking {
        n,
        avg_contribution: avg,
        order,
    })
}

/// The retained-bin index set defining the reduction `R: tau -> r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionMap {
    n: usize,
    indices: Vec<usize>,
}

impl ReductionMap {
    /// Builds a map from an explicit ascending index set.
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self> {
        if n < 2 {
            return Err(RomError::Config("signal length must be at least 2".into()));
        }
        if indices.is_empty() || indices.len() > n / 2 + 1 {
            return Err(RomError::Config(format!(
                "retained count {} outside [1, {}]",
                indices.len(),
                n / 2 + 1
            )));
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != indices.len() {
            return Err(RomError::Config("retained indices must be distinct".into()));
        }
        if *sorted.last().unwrap() > n / 2 {
            return Err(RomError::Config(format!(
                "retained indices must lie in [0, {}]",
                n / 2
            )));
        }
        Ok(Self { n, indices: sorted })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Ascending retained bin indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Number of retained complex components `R`.
    pub fn retained(&self) -> usize {
        self.indices.len()
    }

    /// Dimension of the flattened real coefficient vector.
    ///
    /// Bin 0 and the Nyquist bin (`N/2` for even `N`) contribute one real
    /// value each; every other bin contributes a real and an imaginary part.
    /// With bin 0 retained and no Nyquist bin this is `2R - 1`.
    pub fn real_dimension(&self) -> usize {
        self.indices.iter().map(|&k| if self.bin_is_real(k) { 1 } else { 2 }).sum()
    }

    fn bin_is_real(&self, k: usize) -> bool {
        k == 0 || (self.n.is_multiple_of(2) && k == self.n / 2)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "n": self.n,
            "indices": self.indices,
        }))
        .expect("reduction map serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            indices: Vec<usize>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        Self::new(raw.n, raw.indices)
    }
}

/// Keeps the `R` top-ranked merged bins, sorted ascending.
pub fn build_reduction(ranking: &ComponentRanking, r: usize) -> Result<ReductionMap> {
    if r == 0 || r > ranking.n / 2 + 1 {
        return Err(RomError::Config(format!(
            "retained count {} outside [1, {}]",
            r,
            ranking.n / 2 + 1
        )));
    }
    let mut indices: Vec<usize> = ranking.order[..r].to_vec();
    indices.sort_unstable();
    ReductionMap::new(ranking.n, indices)
}

/// Retained complex coefficients of one signal.
#[derive(Debug, Clone)]
pub struct ReducedVector {
    entries: Vec<Complex64>,
}

impl ReducedVector {
    /// Wraps entries for the given map; the bin-0 entry (and Nyquist entry
    /// for even `N`) must be real within `1e-12` of the entry magnitude.
    pub fn new(map: &ReductionMap, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != map.retained() {
            return Err(RomError::Data(format!(
                "reduced vector has {} entries, map retains {}",
                entries.len(),
                map.retained()
            )));
        }
        for (&k, e) in map.indices.iter().zip(&entries) {
            if map.bin_is_real(k) && e.im.abs() > 1e-12 * e.norm().max(1.0) {
                return Err(RomError::Data(format!(
                    "bin {k} entry must be real, imaginary part {:e}",
                    e.im
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Flattens to the stable real layout: bins ascending; real-valued bins
    /// contribute `re` only, others `re, im`.
    pub fn flatten(&self, map: &ReductionMap) -> Vec<f64> {
        let mut out = Vec::with_capacity(map.real_dimension());
        for (&k, e) in map.indices.iter().zip(&self.entries) {
            out.push(e.re);
            if !map.bin_is_real(k) {
                out.push(e.im);
            }
        }
        out
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn unflatten(map: &ReductionMap, coords: &[f64]) -> Result<Self> {
        if coords.len() != map.real_dimension() {
            return Err(RomError::Data(format!(
                "flattened vector has {} coordinates, map needs {}",
                coords.len(),
                map.real_dimension()
            )));
        }
        let mut entries = Vec::with_capacity(map.retained());
        let mut i = 0;
        for &k in &map.indices {
            if map.bin_is_real(k) {
                entries.push(Complex64::new(coords[i], 0.0));
                i += 1;
            } else {
                entries.push(Complex64::new(coords[i], coords[i + 1]));
                i += 2;
            }
        }
        Ok(Self { entries })
    }
}

/// Applies the reduction map: forward DFT, keep retained bins.
pub fn reduce(map: &ReductionMap, signal: &TorqueSignal) -> Result<ReducedVector> {
    if signal.len() != map.n {
        return Err(RomError::Data(format!(
            "signal length {} does not match reduction map length {}",
            signal.len(),
            map.n
        )));
    }
    let spectrum = dft_forward(signal)?;
    reduce_spectrum(map, &spectrum)
}

/// Keeps the retained bins of an already-computed spectrum.
pub fn reduce_spectrum(map: &ReductionMap, spectrum: &Spectrum) -> Result<ReducedVector> {
    if spectrum.n() != map.n {
        return Err(RomError::Data(format!(
            "spectrum length {} does not match reduction map length {}",
            spectrum.n(),
            map.n
        )));
    }
    let entries = map
        .indices
        .iter()
        .map(|&k| {
            let c = spectrum.coefficients[k];
            if map.bin_is_real(k) {
                Complex64::new(c.re, 0.0)
            } else {
                c
            }
        })
        .collect();
    ReducedVector::new(map, entries)
}

/// Inverts the reduction: zero-fill, restore conjugates, inverse DFT.
pub fn reconstruct(map: &ReductionMap, reduced: &ReducedVector) -> Result<TorqueSignal> {
    if reduced.entries.len() != map.retained() {
        return Err(RomError::Data(format!(
            "reduced vector has {} entries, map retains {}",
            reduced.entries.len(),
            map.retained()
        )));
    }
    let n = map.n;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for (&k, e) in map.indices.iter().zip(&reduced.entries) {
        if map.bin_is_real(k) {
            coeffs[k] = Complex64::new(e.re, 0.0);
        } else {
            coeffs[k] = *e;
            coeffs[n - k] = e.conj();
        }
    }
    dft_inverse(&Spectrum { coefficients: coeffs })
}

/// How the batch-mean absolute reconstruction error is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaeNormalization {
    /// `(1/M) sum_m || tau_m - reconstruct(reduce(tau_m)) ||_1`
    Batch,
    /// Additionally divided by the signal length `N`.
    PerElement,
}

/// Mean absolute reconstruction error over a batch of signal rows.
pub fn reconstruction_mae(
    signals: &ndarray::Array2<f64>,
    map: &ReductionMap,
    normalization: MaeNormalization,
) -> Result<f64> {
    let m = signals.nrows();
    if m == 0 {
        return Err(RomError::Data("cannot evaluate MAE of an empty batch".into()));
    }
    let n = signals.ncols();
    if n != map.n {
        return Err(RomError::Data(format!(
            "signals have {} samples, reduction map expects {}",
            n,
            map.n
        )));
    }
    let mut total = 0.0;
    for row in signals.rows() {
        let signal = TorqueSignal::new(row.to_vec())?;
        let rec = reconstruct(map, &reduce(map, &signal)?)?;
        total += signal
            .values()
            .iter()
            .zip(rec.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    }
    let mae = total / m as f64;
    Ok(match normalization {
        MaeNormalization::Batch => mae,
        MaeNormalization::PerElement => mae / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    use crate::seeding::stream_rng;

    fn random_signal(n: usize, stream: u64) -> TorqueSignal {
        let mut rng = stream_rng(31, stream);
        TorqueSignal::new((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
    }

    #[test]
    fn dc_only_constant_signal() {
        let s = TorqueSignal::new(vec![3.25; 120]).unwrap();
        let spec = dft_forward(&s).unwrap();
        assert_relative_eq!(spec.coefficients()[0].re, 120.0 * 3.25, max_relative = 1e-12);
        let c0 = spec.coefficients()[0].norm();
        for c in &spec.coefficients()[1..] {
            assert!(c.norm() <= 1e-9 * c0);
        }
    }

    #[test]
    fn cosine_has_two_conjugate_bins() {
        let n = 8;
        let values: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
            .collect();
        let spec = dft_forward(&TorqueSignal::new(values).unwrap()).unwrap();
        assert_relative_eq!(spec.coefficients()[1].re, 4.0, epsilon = 1e-12);
        assert_relative_eq!(spec.coefficients()[7].re, 4.0, epsilon = 1e-12);
        for (k, c) in spec.coefficients().iter().enumerate() {
            if k != 1 && k != 7 {
                assert!(c.norm() < 1e-12, "bin {k} = {c}");
            } else {
                assert!(c.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hermitian_symmetry_for_real_input() {
        let s = random_signal(120, 0);
        let spec = dft_forward(&s).unwrap();
        let scale = spec
            .coefficients()
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        for k in 1..120 {
            let diff = (spec.coefficients()[120 - k] - spec.coefficients()[k].conj()).norm();
            assert!(diff <= 1e-9 * scale);
        }
    }

    #[test]
    fn roundtrip_direct_and_radix2() {
        for &n in &[2usize, 8, 120, 256, 255] {
            let s = random_signal(n, n as u64);
            let rec = dft_inverse(&dft_forward(&s).unwrap()).unwrap();
            for (a, b) in s.values().iter().zip(rec.values()) {
                assert!((a - b).abs() < 1e-10, "n={n}");
            }
        }
    }

    #[test]
    fn inverse_of_hand_built_spectrum() {
        // c = [4, 1-i, 0, 1+i]; the 4-point inverse sum evaluates to
        // tau = [1.5, 1.5, 0.5, 0.5] (checked against the forward transform:
        // dft_forward([1.5, 1.5, 0.5, 0.5]) reproduces c exactly).
        let spec = Spectrum::from_coefficients(vec![
            Complex64::new(4.0, 0.0),
            Complex64::new(1.0, -1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 1.0),
        ])
        .unwrap();
        let tau = dft_inverse(&spec).unwrap();
        let expected = [1.5, 1.5, 0.5, 0.5];
        for (a, b) in tau.values().iter().zip(expected) {
            assert_relative_eq!(a, &b, epsilon = 1e-12);
        }
        let spec2 = dft_forward(&tau).unwrap();
        for (a, b) in spec2.coefficients().iter().zip(spec.coefficients()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_rejects_non_hermitian_spectrum() {
        let spec = Spectrum::from_coefficients(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(5.0, 3.0),
        ])
        .unwrap();
        assert!(dft_inverse(&spec).is_err());
    }

    #[test]
    fn power_spectrum_values_and_parseval() {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 8];
        coeffs[1] = Complex64::new(4.0, 0.0);
        let spec = Spectrum::from_coefficients(coeffs).unwrap();
        assert_relative_eq!(power_spectrum(&spec)[1], 2.0, max_relative = 1e-15);

        let s = random_signal(120, 5);
        let ps = power_spectrum(&dft_forward(&s).unwrap());
        let lhs: f64 = ps.iter().sum();
        let rhs: f64 = s.values().iter().map(|v| v * v).sum();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-9);
    }

    #[test]
    fn ranking_prefers_strong_bins_and_averages() {
        let mut c1 = vec![Complex64::new(0.0, 0.0); 8];
        c1[3] = Complex64::new(2.0, 0.0);
        c1[5] = c1[3].conj();
        let s1 = Spectrum::from_coefficients(c1).unwrap();
        let ranking = rank_components(std::slice::from_ref(&s1)).unwrap();
        assert_eq!(ranking.order()[0], 3);

        let mut c2 = vec![Complex64::new(0.0, 0.0); 8];
        c2[1] = Complex64::new(2.0, 0.0); // |c|^2 = 4
        let mut c3 = vec![Complex64::new(0.0, 0.0); 8];
        c3[1] = Complex64::new(2.0f64.sqrt(), 0.0); // |c|^2 = 2
        let ranking = rank_components(&[
            Spectrum::from_coefficients(c2).unwrap(),
            Spectrum::from_coefficients(c3).unwrap(),
        ])
        .unwrap();
        assert_relative_eq!(ranking.avg_contribution()[1], 3.0, max_relative = 1e-15);
    }

    #[test]
    fn ranking_rejects_mixed_lengths() {
        let a = dft_forward(&random_signal(8, 1)).unwrap();
        let b = dft_forward(&random_signal(16, 2)).unwrap();
        assert!(rank_components(&[a, b]).is_err());
    }

    #[test]
    fn lossless_map_roundtrips() {
        let s = random_signal(120, 9);
        let ranking = rank_components(&[dft_forward(&s).unwrap()]).unwrap();
        let map = build_reduction(&ranking, 61).unwrap();
        assert_eq!(map.retained(), 61);
        let rec = reconstruct(&map, &reduce(&map, &s).unwrap()).unwrap();
        for (a, b) in s.values().iter().zip(rec.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn dc_only_map_keeps_mean() {
        let s = random_signal(120, 10);
        let mean = s.values().iter().sum::<f64>() / 120.0;
        let map = ReductionMap::new(120, vec![0]).unwrap();
        let r = reduce(&map, &s).unwrap();
        assert_relative_eq!(r.entries()[0].re, 120.0 * mean, max_relative = 1e-9);
        let rec = reconstruct(&map, &r).unwrap();
        for v in rec.values() {
            assert_relative_eq!(v, &mean, max_relative = 1e-9);
        }
    }

    #[test]
    fn flatten_layout_and_roundtrip() {
        let map = ReductionMap::new(8, vec![0, 2, 4]).unwrap();
        // Bin 0 and the Nyquist bin 4 are real, bin 2 complex: 1 + 2 + 1 = 4.
        assert_eq!(map.real_dimension(), 4);
        let r = ReducedVector::new(
            &map,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, -3.0),
                Complex64::new(4.0, 0.0),
            ],
        )
        .unwrap();
        let flat = r.flatten(&map);
        assert_eq!(flat, vec![1.0, 2.0, -3.0, 4.0]);
        let back = ReducedVector::unflatten(&map, &flat).unwrap();
        for (a, b) in back.entries().iter().zip(r.entries()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn reduce_is_linear() {
        let map = ReductionMap::new(64, vec![0, 1, 5, 9]).unwrap();
        let s1 = random_signal(64, 21);
        let s2 = random_signal(64, 22);
        let (a, b) = (0.7, -1.3);
        let combo = TorqueSignal::new(
            s1.values()
                .iter()
                .zip(s2.values())
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
        .unwrap();
        let r1 = reduce(&map, &s1).unwrap();
        let r2 = reduce(&map, &s2).unwrap();
        let rc = reduce(&map, &combo).unwrap();
        for i in 0..map.retained() {
            let expect = a * r1.entries()[i] + b * r2.entries()[i];
            assert!((rc.entries()[i] - expect).norm() <= 1e-9 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn mae_normalizations_and_lossless_zero() {
        let mut signals = ndarray::Array2::zeros((4, 16));
        for (i, mut row) in signals.rows_mut().into_iter().enumerate() {
            let s = random_signal(16, 100 + i as u64);
            for (j, v) in s.values().iter().enumerate() {
                row[j] = *v;
            }
        }
        let lossless = ReductionMap::new(16, (0..=8).collect()).unwrap();
        let mae = reconstruction_mae(&signals, &lossless, MaeNormalization::Batch).unwrap();
        assert!(mae < 1e-10);

        let partial = ReductionMap::new(16, vec![0, 1, 2]).unwrap();
        let batch = reconstruction_mae(&signals, &partial, MaeNormalization::Batch).unwrap();
        let per = reconstruction_mae(&signals, &partial, MaeNormalization::PerElement).unwrap();
        assert_relative_eq!(per, batch / 16.0, max_relative = 1e-15);
        assert!(batch > 0.0);
    }

    #[test]
    fn build_reduction_range_checks() {
        let s = random_signal(16, 40);
        let ranking = rank_components(&[dft_forward(&s).unwrap()]).unwrap();
        assert!(build_reduction(&ranking, 0).is_err());
        assert!(build_reduction(&ranking, 10).is_err());
        assert!(build_reduction(&ranking, 9).is_ok());
    }
}
