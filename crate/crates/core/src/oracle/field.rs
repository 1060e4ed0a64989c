//! Near-field source fields: mean amplitude, per-pixel quadrature noise and
//! the vacuum that fills every other spatial mode.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::SimulationConfig;
use super::fft2::Grid;
use super::synth::synthesize_quadrature_series;
use crate::error::Result;
use crate::geometry::Vec2;
use crate::sources::{temporal_lorentzian, Quadrature, SignTable, SourceParams};
use crate::spatial::GaussianMode;
use crate::spectra::Scheme;

/// Quadrature noise density of the vacuum, the unit of every PSD here.
pub const VACUUM_PSD: f64 = 1.0;

/// Profiles below this fraction of the peak are dropped from the sparse mode tables.
const PROFILE_CUTOFF: f64 = 1e-18;

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

#[derive(Debug, Clone)]
struct SparseProfile {
    index: Vec<usize>,
    value: Vec<f64>,
}

/// Pixel modes sampled on the near-field grid, normalised so that
/// `sum f^2 h^2 = 1` holds on the grid itself.
#[derive(Debug, Clone)]
pub struct ModeSet {
    grid: Grid,
    profiles: Vec<SparseProfile>,
}

impl ModeSet {
    pub fn new(grid: Grid, centres: &[Vec2], mode: &GaussianMode) -> Self {
        let n = grid.points;
        let peak = mode.profile(Vec2::ZERO);
        let profiles = centres
            .iter()
            .map(|&c| {
                let mut index = Vec::new();
                let mut value = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        let rho = Vec2::new(grid.coordinate(i), grid.coordinate(j));
                        let v = mode.profile(rho - c);
                        if v > PROFILE_CUTOFF * peak {
                            index.push(i * n + j);
                            value.push(v);
                        }
                    }
                }
                let norm = (value.iter().map(|v| v * v).sum::<f64>() * grid.cell_area()).sqrt();
                value.iter_mut().for_each(|v| *v /= norm);
                SparseProfile { index, value }
            })
            .collect();
        Self { grid, profiles }
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Dense `sum_m f_m`.
    pub fn superposition(&self) -> Array2<f64> {
        let n = self.grid.points;
        let mut out = Array2::zeros((n, n));
        let flat = out.as_slice_mut().expect("standard layout");
        for p in &self.profiles {
            for (&i, &v) in p.index.iter().zip(&p.value) {
                flat[i] += v;
            }
        }
        out
    }

    /// Overlap `<f_m, a> = sum f_m a h^2`.
    pub fn project(&self, m: usize, a: &[Complex64]) -> Complex64 {
        let p = &self.profiles[m];
        let s: Complex64 = p.index.iter().zip(&p.value).map(|(&i, &v)| a[i] * v).sum();
        s * self.grid.cell_area()
    }

    fn add_scaled(&self, m: usize, a: &mut [Complex64], c: Complex64) {
        let p = &self.profiles[m];
        for (&i, &v) in p.index.iter().zip(&p.value) {
            a[i] += c * v;
        }
    }
}

/// One source beam over one trajectory. Time slices are generated on demand
/// and are a pure function of the seed and the slice index.
#[derive(Debug, Clone)]
pub struct FieldEnsemble {
    grid: Grid,
    modes: Arc<ModeSet>,
    mean: Array2<Complex64>,
    phase: Complex64,
    quadratures: Vec<[Vec<f64>; 2]>,
    vacuum_seed: u64,
    vacuum_sigma: f64,
    dt: f64,
    steps: usize,
}

impl FieldEnsemble {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `<S(rho)>` on the grid, `sqrt(kappa n)` times the phased mode sum.
    pub fn mean_field(&self) -> &Array2<Complex64> {
        &self.mean
    }

    /// Output-mode quadrature series `(x_m, y_m)` of pixel `m`, vacuum units.
    pub fn pixel_quadratures(&self, m: usize) -> (&[f64], &[f64]) {
        let [x, y] = &self.quadratures[m];
        (x, y)
    }

    pub fn pixel_count(&self) -> usize {
        self.quadratures.len()
    }

    /// Fluctuation `dS(rho, t)`: complex white vacuum with the pixel modes
    /// projected out, plus `phase * sum_m f_m (x_m + i y_m)`.
    pub fn slice(&self, t: usize) -> Array2<Complex64> {
        let n = self.grid.points;
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.vacuum_seed, t as u64));
        let s = self.vacuum_sigma;
        let mut a = Array2::from_shape_simple_fn((n, n), || {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        });
        let flat = a.as_slice_mut().expect("standard layout");
        for m in 0..self.modes.len() {
            let c = self.modes.project(m, flat);
            let [x, y] = &self.quadratures[m];
            let amp = self.phase * Complex64::new(x[t], y[t]);
            self.modes.add_scaled(m, flat, amp - c);
        }
        a
    }
}

/// Shared per-configuration state for building trajectories.
#[derive(Debug, Clone)]
pub struct NearFieldBuilder {
    config: SimulationConfig,
    grid: Grid,
    modes: Arc<ModeSet>,
}

impl NearFieldBuilder {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        let grid = Grid {
            points: config.grid_points,
            pitch: config.grid_pitch,
        };
        let mode = GaussianMode::new(config.geometry.waist_w0())?;
        let lattice = config.effective_lattice();
        let modes = Arc::new(ModeSet::new(grid, &lattice.positions(), &mode));
        Ok(Self {
            config: config.clone(),
            grid,
            modes,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn beam_count(&self) -> usize {
        match self.config.scheme {
            Scheme::TwoBeam => 2,
            Scheme::SingleBeam => 1,
        }
    }

    /// Beams of trajectory `index`. Beam 0 has a real mean amplitude, beam 1
    /// (two-beam scheme only) the quarter-period shifted `i sqrt(n)`.
    pub fn trajectory(&self, index: u64) -> Result<Vec<FieldEnsemble>> {
        let cfg = &self.config;
        let amplitude = (cfg.source.kappa() * cfg.source.mean_photons()).sqrt();
        let superposition = self.modes.superposition();
        let traj_seed = mix(cfg.seed, index);
        (0..self.beam_count())
            .map(|beam| {
                let phase = if beam == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
                let beam_seed = mix(traj_seed, beam as u64);
                let quadratures = (0..self.modes.len())
                    .map(|m| {
                        let series = |quad: Quadrature, tag: u64| {
                            let mut rng = ChaCha8Rng::seed_from_u64(mix(beam_seed, 2 * m as u64 + tag));
                            let psd = |w: f64| quadrature_psd(&cfg.source, quad, cfg.excess_noise, w);
                            synthesize_quadrature_series(psd, cfg.segment_len, cfg.dt, &mut rng)
                        };
                        Ok([series(Quadrature::X, 0)?, series(Quadrature::Y, 1)?])
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(FieldEnsemble {
                    grid: self.grid,
                    modes: Arc::clone(&self.modes),
                    mean: superposition.mapv(|f| phase * (amplitude * f)),
                    phase,
                    quadratures,
                    vacuum_seed: mix(beam_seed, u64::MAX),
                    vacuum_sigma: (VACUUM_PSD / (self.grid.cell_area() * cfg.dt)).sqrt(),
                    dt: cfg.dt,
                    steps: cfg.segment_len,
                })
            })
            .collect()
    }
}

/// PSD of one output-mode quadrature: `1 + sign L` with excess noise, `1` without.
/// Negative values are left for the synthesiser to reject.
pub fn quadrature_psd(source: &SourceParams, quad: Quadrature, excess: bool, omega: f64) -> f64 {
    if !excess {
        return VACUUM_PSD;
    }
    let sign = SignTable::default().sign_of(source.kind(), quad);
    VACUUM_PSD * (1.0 + sign.value() * temporal_lorentzian(source, quad, omega))
}

/// Near-field beams for one trajectory of `config`.
pub fn build_near_field(config: &SimulationConfig, trajectory: u64) -> Result<Vec<FieldEnsemble>> {
    NearFieldBuilder::new(config)?.trajectory(trajectory)
}
