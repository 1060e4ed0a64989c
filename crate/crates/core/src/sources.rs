//! Coherent source models: the sub-Poissonian laser (SPL) and the degenerate
//! optical parametric oscillator above threshold (DOPO).
//!
//! Each source quadrature carries a Lorentzian excess-noise factor `L(Omega)`.
//! Together with the detection sign it fixes the shot-normalised spectrum
//! `1 + sign * envelope * L(Omega)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};

/// DOPO pump ratios closer to threshold than this are rejected; the X-quadrature
/// Lorentzian collapses to a zero-width divergence at `mu_th = 1`.
pub const MIN_PUMP_EXCESS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Spl,
    Dopo,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::Spl => "spl",
            SourceKind::Dopo => "dopo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrature {
    X,
    Y,
}

/// Selects the summed (`Plus`) or differential (`Minus`) photocurrent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignBranch {
    Plus,
    Minus,
}

impl fmt::Display for SignBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignBranch::Plus => "plus",
            SignBranch::Minus => "minus",
        })
    }
}

/// Sign of the excess-noise term: positive means noise above shot level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    kind: SourceKind,
    kappa: f64,
    mean_photons: f64,
    mu_th: Option<f64>,
}

impl SourceParams {
    pub fn spl(kappa: f64, mean_photons: f64) -> Result<Self> {
        Self::new(SourceKind::Spl, kappa, mean_photons, None)
    }

    pub fn dopo(kappa: f64, mean_photons: f64, mu_th: f64) -> Result<Self> {
        Self::new(SourceKind::Dopo, kappa, mean_photons, Some(mu_th))
    }

    /// `mu_th` is required for a DOPO and ignored for an SPL.
    pub fn new(kind: SourceKind, kappa: f64, mean_photons: f64, mu_th: Option<f64>) -> Result<Self> {
        check_positive("kappa", kappa)?;
        if !(mean_photons.is_finite() && mean_photons >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "mean_photons",
                value: mean_photons,
                reason: "must be finite and >= 0".into(),
            });
        }
        let mu_th = match kind {
            SourceKind::Spl => None,
            SourceKind::Dopo => {
                let mu = mu_th.ok_or_else(|| Error::InvalidParameter {
                    name: "mu_th",
                    value: f64::NAN,
                    reason: "a DOPO needs its pump-to-threshold ratio".into(),
                })?;
                if !(mu.is_finite() && mu >= 1.0 + MIN_PUMP_EXCESS) {
                    return Err(Error::InvalidParameter {
                        name: "mu_th",
                        value: mu,
                        reason: format!("must exceed threshold by at least {MIN_PUMP_EXCESS:e}"),
                    });
                }
                Some(mu)
            }
        };
        Ok(Self {
            kind,
            kappa,
            mean_photons,
            mu_th,
        })
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mean_photons(&self) -> f64 {
        self.mean_photons
    }

    pub fn mu_th(&self) -> Option<f64> {
        self.mu_th
    }

    pub fn with_mean_photons(&self, mean_photons: f64) -> Result<Self> {
        Self::new(self.kind, self.kappa, mean_photons, self.mu_th)
    }

    /// Amplitude `A` and width `gamma` with `L(Omega) = A gamma^2 / (gamma^2 + Omega^2)`.
    pub fn lorentzian_shape(&self, quad: Quadrature) -> (f64, f64) {
        let k = self.kappa;
        match (self.kind, quad) {
            (SourceKind::Dopo, Quadrature::X) => {
                let m = self.dopo_mu() - 1.0;
                (1.0 / (m * m), k * m)
            }
            (SourceKind::Dopo, Quadrature::Y) => {
                let m = self.dopo_mu();
                (1.0 / (m * m), k * m)
            }
            (SourceKind::Spl, Quadrature::X) => (1.0, k),
            (SourceKind::Spl, Quadrature::Y) => (8.0, 0.5 * k),
        }
    }

    /// Narrowest and widest Lorentzian widths across both quadratures.
    pub fn width_range(&self) -> (f64, f64) {
        let (_, gx) = self.lorentzian_shape(Quadrature::X);
        let (_, gy) = self.lorentzian_shape(Quadrature::Y);
        (gx.min(gy), gx.max(gy))
    }

    fn dopo_mu(&self) -> f64 {
        self.mu_th.expect("DOPO parameters always carry mu_th")
    }
}

/// Signed Lorentzian excess factor `L(Omega)` of one source quadrature.
pub fn temporal_lorentzian(s: &SourceParams, quad: Quadrature, omega: f64) -> f64 {
    let (amp, gamma) = s.lorentzian_shape(quad);
    amp * gamma * gamma / (gamma * gamma + omega * omega)
}

/// Maps `(source kind, branch)` to the excess sign and the quadrature the
/// branch selects. Kept as a value so a corrupted table can be injected when
/// mutation-testing the validation suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignTable {
    pub dopo_plus: (Sign, Quadrature),
    pub dopo_minus: (Sign, Quadrature),
    pub spl_plus: (Sign, Quadrature),
    pub spl_minus: (Sign, Quadrature),
}

impl Default for SignTable {
    fn default() -> Self {
        Self {
            dopo_plus: (Sign::Positive, Quadrature::X),
            dopo_minus: (Sign::Negative, Quadrature::Y),
            spl_plus: (Sign::Negative, Quadrature::X),
            spl_minus: (Sign::Positive, Quadrature::Y),
        }
    }
}

impl SignTable {
    pub fn lookup(&self, kind: SourceKind, branch: SignBranch) -> (Sign, Quadrature) {
        match (kind, branch) {
            (SourceKind::Dopo, SignBranch::Plus) => self.dopo_plus,
            (SourceKind::Dopo, SignBranch::Minus) => self.dopo_minus,
            (SourceKind::Spl, SignBranch::Plus) => self.spl_plus,
            (SourceKind::Spl, SignBranch::Minus) => self.spl_minus,
        }
    }

    /// Sign attached to a quadrature, i.e. that of the branch which selects it.
    pub fn sign_of(&self, kind: SourceKind, quad: Quadrature) -> Sign {
        [SignBranch::Plus, SignBranch::Minus]
            .into_iter()
            .map(|b| self.lookup(kind, b))
            .find(|&(_, q)| q == quad)
            .map(|(s, _)| s)
            .unwrap_or(Sign::Positive)
    }
}

pub fn detection_sign(s: &SourceParams, branch: SignBranch) -> (Sign, Quadrature) {
    SignTable::default().lookup(s.kind(), branch)
}

/// Output-field quadrature PSD `1 + sign L(Omega)` in vacuum units.
pub fn output_quadrature_psd(s: &SourceParams, quad: Quadrature, sign: Sign, omega: f64) -> Result<f64> {
    let psd = 1.0 + sign.value() * temporal_lorentzian(s, quad, omega);
    if psd < 0.0 {
        return Err(Error::NegativePsd {
            what: "output quadrature PSD",
            value: psd,
            omega,
        });
    }
    Ok(psd)
}

/// Normally ordered intracavity correlator `<:dq(t) dq(t + tau):>`, whose
/// Fourier transform times `4 kappa` is `sign L(Omega)`.
pub fn normally_ordered_correlator(s: &SourceParams, quad: Quadrature, tau: f64) -> f64 {
    let (amp, gamma) = s.lorentzian_shape(quad);
    let sign = SignTable::default().sign_of(s.kind(), quad).value();
    sign * amp * gamma / (8.0 * s.kappa()) * (-gamma * tau.abs()).exp()
}
