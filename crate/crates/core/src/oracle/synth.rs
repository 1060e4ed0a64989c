//! Stationary Gaussian series with a prescribed spectrum, and the Welch
//! estimator used to check them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Angular frequency of DFT bin `k` for a record of `len` samples at step `dt`,
/// folded into `(-pi/dt, pi/dt]`.
pub fn bin_frequency(k: usize, len: usize, dt: f64) -> f64 {
    let signed = if 2 * k > len { k as f64 - len as f64 } else { k as f64 };
    2.0 * PI * signed / (len as f64 * dt)
}

/// Real zero-mean Gaussian series of `len` samples whose rectangular-window
/// periodogram `|sum_t x_t e^{-i Omega_k t dt} dt|^2 / (len dt)` has expectation
/// exactly `psd(Omega_k)` at every bin. The record is circular.
///
/// `psd` is a two-sided density: white noise of unit density has variance `1 / dt`.
pub fn synthesize_quadrature_series<R, F>(psd: F, len: usize, dt: f64, rng: &mut R) -> Result<Vec<f64>>
where
    R: Rng + ?Sized,
    F: Fn(f64) -> f64,
{
    if len == 0 || !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: format!("need dt > 0 and a non-empty record (len = {len})"),
        });
    }
    let scale = len as f64 * dt;
    let mut spec = vec![Complex64::new(0.0, 0.0); len];
    for k in 0..=len / 2 {
        let omega = bin_frequency(k, len, dt);
        let p = psd(omega);
        if !(p >= 0.0) {
            return Err(Error::NegativePsd {
                what: "target PSD",
                value: p,
                omega,
            });
        }
        let self_conjugate = k == 0 || 2 * k == len;
        if self_conjugate {
            let g: f64 = rng.sample(StandardNormal);
            spec[k] = Complex64::new((scale * p).sqrt() * g, 0.0);
        } else {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let c = Complex64::new(a, b) * (0.5 * scale * p).sqrt();
            spec[k] = c;
            spec[len - k] = c.conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut spec);
    Ok(spec.into_iter().map(|c| c.re / scale).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Rectangular,
    Hann,
}

impl Window {
    fn weights(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hann => (0..len)
                .map(|t| 0.5 - 0.5 * (2.0 * PI * t as f64 / len as f64).cos())
                .collect(),
        }
    }
}

/// Welch-averaged two-sided PSD of a real series.
#[derive(Debug, Clone, PartialEq)]
pub struct WelchEstimate {
    /// Non-negative bin frequencies `0 ..= pi / dt`.
    pub omega: Vec<f64>,
    pub psd: Vec<f64>,
    pub segments: usize,
}

/// Averages windowed periodograms over segments of `seg_len` samples that
/// advance by `seg_len - overlap`.
pub fn welch(series: &[f64], dt: f64, seg_len: usize, overlap: usize, window: Window) -> Result<WelchEstimate> {
    if seg_len < 2 || overlap >= seg_len {
        return Err(Error::InvalidParameter {
            name: "seg_len",
            value: seg_len as f64,
            reason: format!("need seg_len >= 2 and overlap < seg_len (overlap = {overlap})"),
        });
    }
    if series.len() < seg_len {
        return Err(Error::InsufficientDuration(format!(
            "{} samples cannot fill one segment of {seg_len}",
            series.len()
        )));
    }
    let step = seg_len - overlap;
    let w = window.weights(seg_len);
    let norm = w.iter().map(|x| x * x).sum::<f64>() * dt;
    let fft = FftPlanner::new().plan_fft_forward(seg_len);
    let nbins = seg_len / 2 + 1;
    let mut acc = vec![0.0; nbins];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg_len];
    let mut segments = 0;
    let mut start = 0;
    while start + seg_len <= series.len() {
        for (b, (&x, &wt)) in buf.iter_mut().zip(series[start..start + seg_len].iter().zip(&w)) {
            *b = Complex64::new(x * wt * dt, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr() / norm;
        }
        segments += 1;
        start += step;
    }
    Ok(WelchEstimate {
        omega: (0..nbins).map(|k| bin_frequency(k, seg_len, dt).abs()).collect(),
        psd: acc.into_iter().map(|a| a / segments as f64).collect(),
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_psd_gives_zero_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = synthesize_quadrature_series(|_| 0.0, 128, 0.1, &mut rng).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn negative_psd_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = synthesize_quadrature_series(|w| 1.0 - w.abs(), 64, 0.1, &mut rng);
        assert!(matches!(r, Err(Error::NegativePsd { .. })));
    }

    #[test]
    fn white_variance_matches_band_integral() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dt = 0.2;
        let x = synthesize_quadrature_series(|_| 1.0, 1 << 16, dt, &mut rng).unwrap();
        let m = x.len() as f64;
        let mean = x.iter().sum::<f64>() / m;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let expect = 1.0 / dt;
        assert!((var - expect).abs() <= 3.0 * expect * (2.0 / m).sqrt());
    }

    #[test]
    fn welch_recovers_squeezed_lorentzian() {
        let kappa = 1.0;
        let psd = |w: f64| 1.0 - kappa * kappa / (kappa * kappa + w * w);
        let dt = 0.05 / kappa;
        let seg = 256;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = synthesize_quadrature_series(psd, 800 * seg / 2 + seg / 2, dt, &mut rng).unwrap();
        let est = welch(&x, dt, seg, seg / 2, Window::Hann).unwrap();
        assert!(est.segments >= 800);
        let pairs: Vec<(f64, f64)> = est
            .omega
            .iter()
            .zip(&est.psd)
            .filter(|(w, _)| **w <= 5.0 * kappa)
            .map(|(&w, &p)| (p, psd(w)))
            .collect();
        let rms = (pairs.iter().map(|(a, b)| (a - b).powi(2)).sum::<f64>() / pairs.len() as f64).sqrt();
        assert!(rms <= 0.05, "rms {rms}");
    }
}
