//! Spatial structure factors: the Gaussian pixel mode, the lattice factor and
//! the noise envelopes that multiply the temporal Lorentzians.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::geometry::{effective_waist, OpticalGeometry, PixelLattice, Vec2};
use crate::sources::SignBranch;

/// Largest `N` accepted by [`lattice_factor_direct`].
pub const DIRECT_SUM_MAX_N: usize = 201;

/// Gaussian terms whose exponent falls below `-PRUNE_EXPONENT` underflow and are skipped.
pub const PRUNE_EXPONENT: f64 = 700.0;

const SINGULAR_SIN: f64 = 1e-12;

/// Normalised Gaussian pixel mode `f(rho) = (pi w0^2 / 2)^(-1/2) exp(-rho^2 / w0^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMode {
    waist_w0: f64,
}

impl GaussianMode {
    pub fn new(waist_w0: f64) -> Result<Self> {
        Ok(Self {
            waist_w0: check_positive("waist", waist_w0)?,
        })
    }

    pub fn waist(&self) -> f64 {
        self.waist_w0
    }

    pub fn profile(&self, rho: Vec2) -> f64 {
        let w2 = self.waist_w0 * self.waist_w0;
        (2.0 / (PI * w2)).sqrt() * (-rho.norm_sq() / w2).exp()
    }
}

/// `f_Q = sqrt(w0^2 / 2 pi) exp(-w0^2 |Q|^2 / 4)`, the transform of the mode
/// under `(2 pi)^-1 \int d^2 rho f(rho) e^{-i Q rho}`.
pub fn mode_fourier(m: &GaussianMode, q: Vec2) -> f64 {
    let w2 = m.waist_w0 * m.waist_w0;
    (w2 / (2.0 * PI)).sqrt() * (-0.25 * w2 * q.norm_sq()).exp()
}

/// Dirichlet kernel `sin(N x / 2) / sin(x / 2)` with its removable singularities filled in.
fn dirichlet(x: f64, n: usize) -> f64 {
    let nf = n as f64;
    let s = (0.5 * x).sin();
    if s.abs() < SINGULAR_SIN {
        nf * (0.5 * nf * x).cos() / (0.5 * x).cos()
    } else {
        (0.5 * nf * x).sin() / s
    }
}

/// Closed-form array factor `Lambda_Q`, separable over the two axes.
pub fn lattice_factor(lat: &PixelLattice, q: Vec2) -> f64 {
    let l = lat.pitch();
    let n = lat.side_count();
    dirichlet(q.x * l, n) * dirichlet(q.y * l, n)
}

/// Literal phasor sum `sum_m exp(-i Q rho_m)` over all `N^2` pixels.
pub fn lattice_phasor_sum(lat: &PixelLattice, q: Vec2) -> Result<Complex64> {
    if lat.side_count() > DIRECT_SUM_MAX_N {
        return Err(Error::LatticeTooLarge(lat.side_count()));
    }
    Ok(lat
        .positions()
        .into_iter()
        .map(|rho| Complex64::from_polar(1.0, -q.dot(rho)))
        .sum())
}

/// Real part of [`lattice_phasor_sum`]; the imaginary part cancels on the symmetric lattice.
pub fn lattice_factor_direct(lat: &PixelLattice, q: Vec2) -> Result<f64> {
    let sum = lattice_phasor_sum(lat, q)?;
    let n2 = lat.pixel_count() as f64;
    debug_assert!(
        sum.im.abs() <= 1e-10 * n2 * (1.0 + sum.re.abs()),
        "phasor sum has imaginary part {}",
        sum.im
    );
    Ok(sum.re)
}

/// Which substitution for `exp(-w~0^2 q^2)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvelopeKind {
    /// One isolated pixel observed with two beams.
    SinglePointlike,
    /// Two pixellised sources with plus-minus detection.
    TwoBeamPixellised,
    /// Even/odd currents of a single pixellised beam.
    SingleBeamPixellised(SignBranch),
}

/// Multiplicity-weighted Gaussian sum along one axis,
/// `sum_{k=-(N-1)}^{N-1} (N - |k|) exp(-w^2 (q + k step)^2)`.
///
/// Every lattice difference `Q_m - Q_n` is `d (k_x, k_y)` and appears
/// `(N - |k_x|)(N - |k_y|)` times, so the `N^4` double sum over pixel pairs
/// factorises into two of these axis sums. Only the window of `k` whose
/// exponent stays above `-PRUNE_EXPONENT` is visited.
fn axis_sum(q: f64, step: f64, n: usize, w: f64) -> f64 {
    let kmax = n as i64 - 1;
    let reach = PRUNE_EXPONENT.sqrt() / w;
    let lo = (((-q - reach) / step).ceil() as i64).max(-kmax);
    let hi = (((-q + reach) / step).floor() as i64).min(kmax);
    let mut acc = 0.0;
    for k in lo..=hi {
        let u = w * (q + k as f64 * step);
        let e = u * u;
        if e <= PRUNE_EXPONENT {
            acc += (n as i64 - k.abs()) as f64 * (-e).exp();
        }
    }
    acc
}

/// Spatial envelope replacing `exp(-w~0^2 q^2)` in the pointlike spectra.
///
/// `lat` is ignored for [`EnvelopeKind::SinglePointlike`] and required otherwise.
pub fn envelope(kind: EnvelopeKind, q: Vec2, lat: Option<&PixelLattice>, g: &OpticalGeometry) -> Result<f64> {
    let w = effective_waist(g);
    let lattice = || {
        lat.ok_or_else(|| Error::InvalidQuery(format!("{kind:?} envelope needs a pixel lattice")))
    };
    match kind {
        EnvelopeKind::SinglePointlike => Ok((-w * w * q.norm_sq()).exp()),
        EnvelopeKind::TwoBeamPixellised => {
            let lat = lattice()?;
            let n = lat.side_count();
            let d = g.frequency_scale() * lat.pitch();
            let n2 = (n * n) as f64;
            Ok(axis_sum(q.x, d, n, w) * axis_sum(q.y, d, n, w) / n2)
        }
        EnvelopeKind::SingleBeamPixellised(branch) => {
            let lat = lattice()?;
            let n = lat.side_count();
            let d = g.frequency_scale() * lat.pitch();
            let n2 = (n * n) as f64;
            let half = axis_sum(q.x, 0.5 * d, n, w) * axis_sum(q.y, 0.5 * d, n, w);
            let full = axis_sum(q.x, d, n, w) * axis_sum(q.y, d, n, w);
            let combined = match branch {
                SignBranch::Plus => half + full,
                SignBranch::Minus => half - full,
            };
            Ok(combined / (2.0 * n2))
        }
    }
}
