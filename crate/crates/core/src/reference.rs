//! Slow brute-force references for the closed forms in [`crate::spatial`] and
//! [`crate::sources`]. They share no code with the fast paths and exist so the
//! validation suite can cross-check them at runtime.

use std::f64::consts::PI;

use crate::geometry::{effective_waist, lattice_far_frequencies, OpticalGeometry, PixelLattice, Vec2};
use crate::sources::{normally_ordered_correlator, Quadrature, SourceParams};
use crate::spatial::{EnvelopeKind, GaussianMode};
use crate::sources::SignBranch;

fn pair_terms(kind: EnvelopeKind, q: Vec2, lat: &PixelLattice, g: &OpticalGeometry) -> (Vec<f64>, Vec<f64>, f64) {
    let w2 = effective_waist(g).powi(2);
    let qs = lattice_far_frequencies(lat, g);
    let n2 = qs.len() as f64;
    let mut half = Vec::with_capacity(qs.len() * qs.len());
    let mut full = Vec::with_capacity(qs.len() * qs.len());
    for qm in &qs {
        for qn in &qs {
            let diff = *qm - *qn;
            full.push((-w2 * (q + diff).norm_sq()).exp());
            if matches!(kind, EnvelopeKind::SingleBeamPixellised(_)) {
                half.push((-w2 * (q + diff * 0.5).norm_sq()).exp());
            }
        }
    }
    let norm = match kind {
        EnvelopeKind::SingleBeamPixellised(_) => 2.0 * n2,
        _ => n2,
    };
    (half, full, norm)
}

/// Literal `N^4` double sum over pixel pairs for a pixellised envelope.
/// [`EnvelopeKind::SinglePointlike`] is evaluated directly.
pub fn envelope_double_sum(kind: EnvelopeKind, q: Vec2, lat: &PixelLattice, g: &OpticalGeometry) -> f64 {
    if kind == EnvelopeKind::SinglePointlike {
        return (-effective_waist(g).powi(2) * q.norm_sq()).exp();
    }
    let (half, full, norm) = pair_terms(kind, q, lat, g);
    let full_sum: f64 = full.iter().sum();
    let half_sum: f64 = half.iter().sum();
    match kind {
        EnvelopeKind::SingleBeamPixellised(SignBranch::Minus) => (half_sum - full_sum) / norm,
        _ => (half_sum + full_sum) / norm,
    }
}

/// Same double sum with every term taken in absolute value: the natural scale
/// for judging the rounding error of a signed envelope.
pub fn envelope_term_magnitude(kind: EnvelopeKind, q: Vec2, lat: &PixelLattice, g: &OpticalGeometry) -> f64 {
    if kind == EnvelopeKind::SinglePointlike {
        return envelope_double_sum(kind, q, lat, g);
    }
    let (half, full, norm) = pair_terms(kind, q, lat, g);
    (half.iter().sum::<f64>() + full.iter().sum::<f64>()) / norm
}

/// `(2 pi)^-1 \int d^2 rho f(rho) e^{-i Q rho}` by the 2-D trapezoid rule on
/// `[-8 w0, 8 w0]^2` with `2 * per_half_axis + 1` nodes per axis.
pub fn mode_fourier_quadrature(mode: &GaussianMode, q: Vec2, per_half_axis: usize) -> f64 {
    let w0 = mode.waist();
    let h = 8.0 * w0 / per_half_axis as f64;
    let n = per_half_axis as i64;
    let mut re = 0.0;
    for i in -n..=n {
        for j in -n..=n {
            let rho = Vec2::new(i as f64 * h, j as f64 * h);
            // the imaginary part cancels between rho and -rho
            re += mode.profile(rho) * q.dot(rho).cos();
        }
    }
    re * h * h / (2.0 * PI)
}

/// `\int 4 kappa C(tau) e^{i Omega tau} d tau` for the normally ordered
/// correlator `C`, by composite Simpson over `[0, 60 / gamma]`.
pub fn correlator_spectrum(s: &SourceParams, quad: Quadrature, omega: f64) -> f64 {
    let (_, gamma) = s.lorentzian_shape(quad);
    let t_max = 60.0 / gamma;
    let oscillations = omega.abs() * t_max / (2.0 * PI);
    let intervals = (2.0 * ((4000.0 + 400.0 * oscillations) / 2.0).ceil()) as usize;
    let h = t_max / intervals as f64;
    let f = |tau: f64| normally_ordered_correlator(s, quad, tau) * (omega * tau).cos();
    let mut acc = f(0.0) + f(t_max);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    // even integrand: twice the half-line integral
    2.0 * 4.0 * s.kappa() * acc * h / 3.0
}

/// Closed form of what the simulated single-beam measurement yields: the
/// spatial transform over the whole detector plane of `i(rho) +- i(-rho)`,
/// normalised by the single-beam vacuum floor `8 sum |<S_F>|^2 dA`.
///
/// With `K(k) = exp(-w~0^2 k^2 / 2)`, `A_m = sum_n K(q - Q_n + Q_m)` and
/// `B_m = sum_n K(q + Q_n - Q_m)`, the result is
/// `1 +- g(2q) + sign L (sum_m (A_m +- B_m)^2) / (2 sum_nn' K(Q_n - Q_n'))`,
/// where `g(2q) = sum_nn' K(2q - Q_n + Q_n') / sum_nn' K(Q_n - Q_n')` is the
/// mirror-image correlation of the vacuum. It is a diagnostic for the
/// single-beam closed form, not a replacement for it.
pub fn single_beam_mirror_spectrum(
    s: &SourceParams,
    lat: &PixelLattice,
    g: &OpticalGeometry,
    branch: SignBranch,
    q: Vec2,
    omega: f64,
) -> f64 {
    let (vacuum, weight) = mirror_terms(lat, g, branch, q);
    let (sign, quad) = crate::sources::detection_sign(s, branch);
    vacuum + sign.value() * crate::sources::temporal_lorentzian(s, quad, omega) * weight
}

/// Vacuum-only part `1 +- g(2q)` of [`single_beam_mirror_spectrum`].
pub fn single_beam_mirror_vacuum(lat: &PixelLattice, g: &OpticalGeometry, branch: SignBranch, q: Vec2) -> f64 {
    mirror_terms(lat, g, branch, q).0
}

fn mirror_terms(lat: &PixelLattice, g: &OpticalGeometry, branch: SignBranch, q: Vec2) -> (f64, f64) {
    let w2 = effective_waist(g).powi(2);
    let k = |v: Vec2| (-0.5 * w2 * v.norm_sq()).exp();
    let qs = lattice_far_frequencies(lat, g);
    let pm = match branch {
        SignBranch::Plus => 1.0,
        SignBranch::Minus => -1.0,
    };
    let mut norm = 0.0;
    let mut mirror = 0.0;
    for a in &qs {
        for b in &qs {
            norm += k(*a - *b);
            mirror += k(q * 2.0 - (*a - *b));
        }
    }
    let mut excess = 0.0;
    for m in &qs {
        let a: f64 = qs.iter().map(|n| k(q - (*n - *m))).sum();
        let b: f64 = qs.iter().map(|n| k(q + (*n - *m))).sum();
        excess += (a + pm * b).powi(2);
    }
    (1.0 + pm * mirror / norm, excess / (2.0 * norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{temporal_lorentzian, SignTable};

    #[test]
    fn correlator_reproduces_signed_lorentzian() {
        let sources = [
            SourceParams::spl(1.0, 1.0).unwrap(),
            SourceParams::spl(2.5e6, 1.0).unwrap(),
            SourceParams::dopo(1.0, 1.0, 2.0).unwrap(),
            SourceParams::dopo(3.0, 1.0, 1.3).unwrap(),
        ];
        let table = SignTable::default();
        for s in &sources {
            for quad in [Quadrature::X, Quadrature::Y] {
                let sign = table.sign_of(s.kind(), quad).value();
                for i in 0..=40 {
                    let omega = i as f64 * 0.25 * s.kappa();
                    let target = sign * temporal_lorentzian(s, quad, omega);
                    let num = correlator_spectrum(s, quad, omega);
                    assert!(
                        (num - target).abs() <= 1e-6 * target.abs(),
                        "{:?} {quad:?} omega={omega}: {num} vs {target}",
                        s.kind()
                    );
                }
            }
        }
    }

    #[test]
    fn mirror_spectrum_single_pixel() {
        let g = OpticalGeometry::new(2.0 * PI, 1.0, 1.0).unwrap();
        let lat = PixelLattice::new(1.0, 1, 1.0).unwrap();
        let s = SourceParams::spl(1.0, 1.0).unwrap();
        for qx in [0.0, 0.4, 1.3] {
            let q = Vec2::new(qx, 0.0);
            let a = qx * qx;
            let plus = single_beam_mirror_spectrum(&s, &lat, &g, SignBranch::Plus, q, 0.0);
            let minus = single_beam_mirror_spectrum(&s, &lat, &g, SignBranch::Minus, q, 0.0);
            assert!((plus - (1.0 + (-2.0 * a).exp() - 2.0 * (-a).exp())).abs() < 1e-14);
            assert!((minus - (1.0 - (-2.0 * a).exp())).abs() < 1e-14);
        }
    }
}
