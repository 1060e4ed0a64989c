//! Analytic far-field photocurrent noise spectra.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hole_geometry, OpticalGeometry, PixelLattice, Vec2};
use crate::sources::{temporal_lorentzian, SignBranch, SignTable, SourceParams};
use crate::spatial::{envelope, EnvelopeKind, GaussianMode};

/// Negative shot-normalised values above this are rounding noise and are clamped to zero.
pub const NEGATIVE_ROUNDING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Two sources, a beamsplitter and two detectors read at `rho` and `-rho`.
    TwoBeam,
    /// One beam, even and odd combinations of symmetric detector points.
    SingleBeam,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::TwoBeam => "two_beam",
            Scheme::SingleBeam => "single_beam",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumQuery {
    pub source: SourceParams,
    pub mode: GaussianMode,
    pub lattice: Option<PixelLattice>,
    pub geometry: OpticalGeometry,
    pub scheme: Scheme,
    pub branch: SignBranch,
    /// Far-field frequencies `q` (rad/m).
    pub q_grid: Vec<Vec2>,
    /// Temporal frequencies `Omega` (rad/s).
    pub omega_grid: Vec<f64>,
}

impl SpectrumQuery {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.mode.waist(), self.geometry.waist_w0());
        if (a - b).abs() > 1e-12 * a.max(b) {
            return Err(Error::InvalidQuery(format!(
                "mode waist {a} differs from geometry waist {b}"
            )));
        }
        if let Some(p) = self.q_grid.iter().find(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidQuery(format!("non-finite q point ({}, {})", p.x, p.y)));
        }
        if let Some(w) = self.omega_grid.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidQuery(format!("non-finite omega {w}")));
        }
        Ok(())
    }

    /// Envelope substituted for the pointlike Gaussian, together with the
    /// lattice it needs. A SingleBeam query without a lattice is treated as a
    /// one-pixel lattice.
    pub fn envelope_kind(&self) -> (EnvelopeKind, Option<PixelLattice>) {
        match (self.scheme, &self.lattice) {
            (Scheme::TwoBeam, None) => (EnvelopeKind::SinglePointlike, None),
            (Scheme::TwoBeam, Some(lat)) => (EnvelopeKind::TwoBeamPixellised, Some(lat.clone())),
            (Scheme::SingleBeam, lat) => {
                let lat = lat.clone().unwrap_or_else(|| single_pixel(&self.geometry));
                (EnvelopeKind::SingleBeamPixellised(self.branch), Some(lat))
            }
        }
    }
}

fn single_pixel(g: &OpticalGeometry) -> PixelLattice {
    // the pitch of a one-pixel lattice never enters any formula
    PixelLattice::new(g.waist_w0(), 1, g.waist_w0()).expect("one-pixel lattice is always valid")
}

/// Spectra on the `(q, Omega)` grid, indexed `[q, omega]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Absolute spectral density in units where the shot level is `4 kappa n`.
    pub values: Array2<f64>,
    pub shot_normalized: Array2<f64>,
    /// Standard error of `shot_normalized`; only Monte-Carlo estimates carry one.
    pub stderr: Option<Array2<f64>>,
    pub query: SpectrumQuery,
}

/// Shot-noise level `4 kappa n`.
pub fn shot_level(source: &SourceParams) -> f64 {
    4.0 * source.kappa() * source.mean_photons()
}

pub fn analytic_spectrum(query: &SpectrumQuery) -> Result<SpectrumResult> {
    analytic_spectrum_with_signs(query, &SignTable::default())
}

/// [`analytic_spectrum`] with an explicit sign table.
pub fn analytic_spectrum_with_signs(query: &SpectrumQuery, signs: &SignTable) -> Result<SpectrumResult> {
    query.validate()?;
    let (kind, lat) = query.envelope_kind();
    let (sign, quad) = signs.lookup(query.source.kind(), query.branch);
    let sigma = sign.value();
    let lorentz: Vec<f64> = query
        .omega_grid
        .iter()
        .map(|&w| temporal_lorentzian(&query.source, quad, w))
        .collect();

    let rows: Vec<Vec<f64>> = query
        .q_grid
        .par_iter()
        .map(|&q| -> Result<Vec<f64>> {
            let env = envelope(kind, q, lat.as_ref(), &query.geometry)?;
            lorentz
                .iter()
                .zip(&query.omega_grid)
                .map(|(&l, &omega)| {
                    let v = 1.0 + sigma * env * l;
                    if v >= 0.0 {
                        Ok(v)
                    } else if v >= -NEGATIVE_ROUNDING_TOLERANCE {
                        Ok(0.0)
                    } else {
                        Err(Error::NegativeSpectrum {
                            value: v,
                            qx: q.x,
                            qy: q.y,
                            omega,
                        })
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let (nq, nw) = (query.q_grid.len(), query.omega_grid.len());
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let shot_normalized = Array2::from_shape_vec((nq, nw), flat).expect("row lengths match the omega grid");
    let values = shot_normalized.mapv(|v| shot_level(&query.source) * v);
    Ok(SpectrumResult {
        values,
        shot_normalized,
        stderr: None,
        query: query.clone(),
    })
}

/// Default figure axis: `q_x` over `[-1.2 D, 1.2 D]` at `points_per_dq` samples
/// per hole width, with `q_y = 0`. The grid is symmetric and contains `q_x = 0`.
pub fn default_qx_grid(lat: &PixelLattice, g: &OpticalGeometry, points_per_dq: usize) -> Vec<Vec2> {
    let h = hole_geometry(lat, g);
    let step = h.delta_q / points_per_dq.max(1) as f64;
    let half = (1.2 * h.range_d / step).ceil() as i64;
    (-half..=half).map(|i| Vec2::new(i as f64 * step, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{Quadrature, SourceKind};
    use approx::assert_relative_eq;

    fn dimensionless() -> OpticalGeometry {
        // lambda f = 2 pi and w0 = 1 give w~0 = 1 and Q = rho
        OpticalGeometry::new(2.0 * std::f64::consts::PI, 1.0, 1.0).unwrap()
    }

    fn query(source: SourceParams, lattice: Option<PixelLattice>, scheme: Scheme, branch: SignBranch) -> SpectrumQuery {
        let geometry = dimensionless();
        SpectrumQuery {
            source,
            mode: GaussianMode::new(1.0).unwrap(),
            lattice,
            geometry,
            scheme,
            branch,
            q_grid: vec![Vec2::ZERO],
            omega_grid: vec![0.0],
        }
    }

    fn at_origin(q: &SpectrumQuery) -> f64 {
        analytic_spectrum(q).unwrap().shot_normalized[[0, 0]]
    }

    #[test]
    fn exact_points() {
        let spl = SourceParams::spl(1.0, 1.0).unwrap();
        let dopo = SourceParams::dopo(1.0, 1.0, 2.0).unwrap();
        let tb = Scheme::TwoBeam;
        assert_eq!(at_origin(&query(spl, None, tb, SignBranch::Plus)), 0.0);
        assert_relative_eq!(at_origin(&query(spl, None, tb, SignBranch::Minus)), 9.0, max_relative = 1e-12);
        assert_relative_eq!(at_origin(&query(dopo, None, tb, SignBranch::Minus)), 0.75, max_relative = 1e-12);
        assert_relative_eq!(at_origin(&query(dopo, None, tb, SignBranch::Plus)), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn shot_level_examples() {
        assert_eq!(shot_level(&SourceParams::spl(1.0, 1.0).unwrap()), 4.0);
        assert_eq!(shot_level(&SourceParams::spl(1.0, 0.0).unwrap()), 0.0);
        let a = shot_level(&SourceParams::dopo(3.0, 2.0, 1.5).unwrap());
        let b = shot_level(&SourceParams::dopo(3.0, 4.0, 1.5).unwrap());
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn absolute_is_shot_times_normalised() {
        let s = SourceParams::spl(2.0, 3.0).unwrap();
        let mut q = query(s, None, Scheme::TwoBeam, SignBranch::Minus);
        q.omega_grid = vec![0.0, 1.0, 5.0];
        let r = analytic_spectrum(&q).unwrap();
        for (v, n) in r.values.iter().zip(r.shot_normalized.iter()) {
            assert_eq!(*v, 24.0 * n);
        }
        assert!(r.stderr.is_none());
    }

    #[test]
    fn dark_source_still_has_normalised_spectrum() {
        let s = SourceParams::spl(1.0, 0.0).unwrap();
        let r = analytic_spectrum(&query(s, None, Scheme::TwoBeam, SignBranch::Minus)).unwrap();
        assert_eq!(r.values[[0, 0]], 0.0);
        assert_relative_eq!(r.shot_normalized[[0, 0]], 9.0, max_relative = 1e-12);
    }

    #[test]
    fn one_pixel_lattice_matches_pointlike() {
        let lat = PixelLattice::new(10.0, 1, 1.0).unwrap();
        for s in [SourceParams::spl(1.0, 1.0).unwrap(), SourceParams::dopo(1.0, 1.0, 2.0).unwrap()] {
            for branch in [SignBranch::Plus, SignBranch::Minus] {
                let mut a = query(s, None, Scheme::TwoBeam, branch);
                a.q_grid = (0..30).map(|i| Vec2::new(0.1 * i as f64, -0.05 * i as f64)).collect();
                a.omega_grid = vec![0.0, 0.3, 2.0];
                let mut b = a.clone();
                b.lattice = Some(lat.clone());
                let pa = analytic_spectrum(&a).unwrap().shot_normalized;
                let pb = analytic_spectrum(&b).unwrap().shot_normalized;
                for (x, y) in pa.iter().zip(pb.iter()) {
                    assert!((x - y).abs() <= 1e-14);
                }
                // SingleBeam, N = 1: Plus carries the pointlike envelope, Minus no excess
                let mut c = a.clone();
                c.scheme = Scheme::SingleBeam;
                let single = analytic_spectrum(&c).unwrap().shot_normalized;
                match branch {
                    SignBranch::Plus => {
                        let pointlike = analytic_spectrum(&a).unwrap().shot_normalized;
                        for (x, y) in single.iter().zip(pointlike.iter()) {
                            assert_relative_eq!(*x, *y, max_relative = 1e-14);
                        }
                    }
                    SignBranch::Minus => assert!(single.iter().all(|&v| v == 1.0)),
                }
            }
        }
    }

    #[test]
    fn spl_single_beam_holes_and_half_holes() {
        let g = dimensionless();
        let lat = PixelLattice::new(10.0, 99, 1.0).unwrap();
        let d = hole_geometry(&lat, &g).spacing_d;
        let mut q = query(SourceParams::spl(1.0, 1.0).unwrap(), Some(lat), Scheme::SingleBeam, SignBranch::Plus);
        q.q_grid = vec![Vec2::ZERO, Vec2::new(0.5 * d, 0.0), Vec2::new(d, 0.0), Vec2::new(1.5 * d, 0.0)];
        let r = analytic_spectrum(&q).unwrap();
        let v: Vec<f64> = r.shot_normalized.column(0).to_vec();
        assert!(v[0] < 0.02 && v[2] < 0.03);
        assert!((v[1] - 0.5).abs() < 0.02 && (v[3] - 0.5).abs() < 0.02);
    }

    #[test]
    fn dopo_single_beam_minus_floor() {
        let g = dimensionless();
        let lat = PixelLattice::new(10.0, 7, 1.0).unwrap();
        let mut q = query(SourceParams::dopo(1.0, 1.0, 2.0).unwrap(), Some(lat.clone()), Scheme::SingleBeam, SignBranch::Minus);
        q.q_grid = default_qx_grid(&lat, &g, 40);
        let r = analytic_spectrum(&q).unwrap();
        assert!(r.shot_normalized.iter().all(|&v| v >= 0.5));
    }

    #[test]
    fn default_grid_shape() {
        let g = dimensionless();
        let lat = PixelLattice::new(10.0, 7, 1.0).unwrap();
        let grid = default_qx_grid(&lat, &g, 40);
        let h = hole_geometry(&lat, &g);
        assert_eq!(grid.len() % 2, 1);
        assert_eq!(grid[grid.len() / 2], Vec2::ZERO);
        assert!(grid[0].x <= -1.2 * h.range_d && grid.last().unwrap().x >= 1.2 * h.range_d);
        assert_relative_eq!(grid[1].x - grid[0].x, h.delta_q / 40.0, max_relative = 1e-12);
    }

    #[test]
    fn mismatched_mode_rejected() {
        let mut q = query(SourceParams::spl(1.0, 1.0).unwrap(), None, Scheme::TwoBeam, SignBranch::Plus);
        q.mode = GaussianMode::new(2.0).unwrap();
        assert!(matches!(analytic_spectrum(&q), Err(Error::InvalidQuery(_))));
    }

    #[test]
    fn corrupted_signs_break_the_zero() {
        let mut table = SignTable::default();
        table.spl_plus = (crate::sources::Sign::Positive, Quadrature::X);
        let q = query(SourceParams::spl(1.0, 1.0).unwrap(), None, Scheme::TwoBeam, SignBranch::Plus);
        let r = analytic_spectrum_with_signs(&q, &table).unwrap();
        assert_eq!(r.shot_normalized[[0, 0]], 2.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn source() -> impl Strategy<Value = SourceParams> {
            prop_oneof![
                (0.1..10.0f64).prop_map(|k| SourceParams::spl(k, 1.0).unwrap()),
                (0.1..10.0f64, 1.05..5.0f64).prop_map(|(k, mu)| SourceParams::dopo(k, 1.0, mu).unwrap()),
            ]
        }

        fn setup() -> impl Strategy<Value = SpectrumQuery> {
            (
                source(),
                prop_oneof![Just(Scheme::TwoBeam), Just(Scheme::SingleBeam)],
                prop_oneof![Just(SignBranch::Plus), Just(SignBranch::Minus)],
                prop::option::of((0usize..6, 5.0..15.0f64)),
                prop::collection::vec((-80.0..80.0f64, -80.0..80.0f64), 1..6),
                prop::collection::vec(-20.0..20.0f64, 1..4),
            )
                .prop_map(|(s, scheme, branch, lat, qs, ws)| {
                    let lattice = lat.map(|(h, l)| PixelLattice::new(l, 2 * h + 1, 1.0).unwrap());
                    let mut q = query(s, lattice, scheme, branch);
                    q.q_grid = qs.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
                    q.omega_grid = ws.into_iter().map(|w| w * s.kappa()).collect();
                    q
                })
        }

        proptest! {
            #[test]
            fn even_in_q(q in setup()) {
                let a = analytic_spectrum(&q).unwrap();
                let mut neg = q.clone();
                neg.q_grid = q.q_grid.iter().map(|&p| -p).collect();
                let b = analytic_spectrum(&neg).unwrap();
                for (x, y) in a.shot_normalized.iter().zip(b.shot_normalized.iter()) {
                    prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
                }
            }

            #[test]
            fn non_negative(q in setup()) {
                let r = analytic_spectrum(&q).unwrap();
                prop_assert!(r.shot_normalized.iter().all(|&v| v >= 0.0));
            }

            #[test]
            fn shot_limit_at_high_frequency(mut q in setup()) {
                q.omega_grid = vec![100.0 * q.source.kappa(), -100.0 * q.source.kappa()];
                let r = analytic_spectrum(&q).unwrap();
                prop_assert!(r.shot_normalized.iter().all(|&v| (v - 1.0).abs() <= 1e-3));
            }

            #[test]
            fn squeezing_reaches_zero_only_for_spl_plus(q in setup()) {
                let r = analytic_spectrum(&q).unwrap();
                let spl_plus = q.source.kind() == SourceKind::Spl && q.branch == SignBranch::Plus;
                if !spl_plus {
                    prop_assert!(r.shot_normalized.iter().all(|&v| v > 0.0));
                }
            }
        }
    }
}
