//! Monte-Carlo counterpart of [`crate::spectra`]: stochastic source fields are
//! propagated through the lens, detected, combined and spectrally estimated,
//! sharing no formulas with the closed forms.

mod config;
mod detect;
mod estimate;
mod fft2;
mod field;
mod lens;
mod synth;

pub use config::{
    SimulationConfig, EDGE_MARGIN_WAISTS, MAX_DT_GAMMA, MAX_PITCH_OVER_WAIST, MIN_DURATION_GAMMA, MIN_SEGMENTS,
};
pub use detect::{beamsplitter, combine_currents, detect_and_combine, linear_current, mirror_combine, Photocurrent};
pub use estimate::{estimate_spectrum, estimate_with, SpectrumEstimate};
pub use fft2::{Fft2, Grid};
pub use field::{build_near_field, quadrature_psd, FieldEnsemble, ModeSet, NearFieldBuilder, VACUUM_PSD};
pub use lens::{
    edge_energy_fraction, far_grid, lens_transform, lens_transform_slice, FarFieldEnsemble, EDGE_CELLS,
    EDGE_ENERGY_LIMIT,
};
pub use synth::{bin_frequency, synthesize_quadrature_series, welch, WelchEstimate, Window};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::spatial::GaussianMode;
use crate::spectra::{shot_level, SpectrumQuery, SpectrumResult};

/// Outcome of [`run_oracle`]: the shot-normalised result and the raw estimate behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRun {
    /// `shot_normalized` is the raw estimate over the vacuum floor, `values`
    /// rescales it to the analytic `4 kappa n`, and `stderr` is in
    /// shot-normalised units. The grids are the snapped ones.
    pub result: SpectrumResult,
    pub estimate: SpectrumEstimate,
}

/// Photocurrent of trajectory `index`.
pub fn simulate_trajectory(builder: &NearFieldBuilder, index: u64) -> Result<Photocurrent> {
    let cfg = builder.config();
    let far = builder
        .trajectory(index)?
        .into_iter()
        .map(|beam| lens_transform(beam, &cfg.geometry))
        .collect();
    detect_and_combine(far, cfg.scheme, cfg.branch)
}

/// Full pipeline: near field, lens, detection, estimation, shot normalisation.
pub fn run_oracle(config: &SimulationConfig, q_grid: &[Vec2], omega_grid: &[f64]) -> Result<OracleRun> {
    let limit = config.q_limit();
    if let Some(q) = q_grid.iter().find(|q| q.x.abs().max(q.y.abs()) > limit) {
        return Err(Error::SimulationConfig {
            constraint: "|q| within the alias-free range of the grid",
            detail: format!("q = ({:e}, {:e}) rad/m, limit {limit:e} rad/m", q.x, q.y),
        });
    }
    let builder = NearFieldBuilder::new(config)?;
    let estimate = estimate_with(
        config.segments,
        |j| simulate_trajectory(&builder, j as u64),
        q_grid,
        omega_grid,
    )?;
    if !(estimate.floor > 0.0) {
        return Err(Error::DegenerateShotFloor);
    }
    let shot_normalized = &estimate.mean / estimate.floor;
    let stderr = &estimate.stderr / estimate.floor;
    let values = &shot_normalized * shot_level(&config.source);
    let query = SpectrumQuery {
        source: config.source,
        mode: GaussianMode::new(config.geometry.waist_w0())?,
        lattice: config.lattice.clone(),
        geometry: config.geometry,
        scheme: config.scheme,
        branch: config.branch,
        q_grid: estimate.q_grid.clone(),
        omega_grid: estimate.omega_grid.clone(),
    };
    Ok(OracleRun {
        result: SpectrumResult {
            values,
            shot_normalized,
            stderr: Some(stderr),
            query,
        },
        estimate,
    })
}
