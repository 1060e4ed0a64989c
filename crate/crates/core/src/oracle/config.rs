use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{OpticalGeometry, PixelLattice};
use crate::sources::{SignBranch, SourceParams};
use crate::spectra::Scheme;

/// Finest admissible near-field grid pitch, in waists.
pub const MAX_PITCH_OVER_WAIST: f64 = 0.25;
/// Clear margin around the lattice, in waists.
pub const EDGE_MARGIN_WAISTS: f64 = 6.0;
pub const MAX_DT_GAMMA: f64 = 0.05;
pub const MIN_DURATION_GAMMA: f64 = 200.0;
pub const MIN_SEGMENTS: usize = 50;

const DEFAULT_SEGMENT_LEN: usize = 512;
const REL_SLACK: f64 = 1e-12;

/// Everything one Monte-Carlo run needs. Each of the `segments`
/// trajectories is an independent circular record of `segment_len` samples,
/// so the total simulated time is `segments * segment_len * dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub source: SourceParams,
    /// `None` means a single pixel on the axis.
    pub lattice: Option<PixelLattice>,
    pub geometry: OpticalGeometry,
    pub scheme: Scheme,
    pub branch: SignBranch,
    /// Near-field samples per axis; even.
    pub grid_points: usize,
    /// Near-field sample spacing (m).
    pub grid_pitch: f64,
    /// Time step (s).
    pub dt: f64,
    pub segment_len: usize,
    pub segments: usize,
    pub seed: u64,
    /// When false every source quadrature carries plain vacuum noise.
    pub excess_noise: bool,
}

impl SimulationConfig {
    /// Grid and timing that satisfy every invariant with little waste:
    /// pitch `w0 / 4`, a window twice the lattice extent (at least `16 w0`;
    /// single-beam runs use `3 extent + 6 w0` so every hole stays inside
    /// [`Self::q_limit`]),
    /// `dt = 0.05 / gamma_max`, 512-sample segments and at least 50 of them.
    pub fn recommended(
        source: SourceParams,
        lattice: Option<PixelLattice>,
        geometry: OpticalGeometry,
        scheme: Scheme,
        branch: SignBranch,
        seed: u64,
    ) -> Result<Self> {
        let w0 = geometry.waist_w0();
        let h = MAX_PITCH_OVER_WAIST * w0;
        let lattice_extent = lattice.as_ref().map_or(0.0, |l| l.extent());
        let mut window = (2.0 * lattice_extent).max(16.0 * w0).max(lattice_extent + EDGE_MARGIN_WAISTS * w0);
        if scheme == Scheme::SingleBeam {
            window = window.max(3.0 * lattice_extent + EDGE_MARGIN_WAISTS * w0);
        }
        let mut n = (window / h - 1e-9).ceil() as usize;
        n += n % 2;
        let (gamma_min, gamma_max) = source.width_range();
        let dt = MAX_DT_GAMMA / gamma_max;
        let segment_len = DEFAULT_SEGMENT_LEN;
        let needed = (MIN_DURATION_GAMMA / gamma_min / (segment_len as f64 * dt)).ceil() as usize;
        let cfg = Self {
            source,
            lattice,
            geometry,
            scheme,
            branch,
            grid_points: n,
            grid_pitch: h,
            dt,
            segment_len,
            segments: needed.max(MIN_SEGMENTS),
            seed,
            excess_noise: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn extent(&self) -> f64 {
        self.grid_points as f64 * self.grid_pitch
    }

    pub fn duration(&self) -> f64 {
        (self.segments * self.segment_len) as f64 * self.dt
    }

    /// Largest `|q_x|`, `|q_y|` (rad/m) the periodic grid resolves without
    /// wrap-around. The spectrum is periodic in `q` with the period set by
    /// the window; the two-beam terms reach `q + (Q_m - Q_n)`, the single-beam
    /// mirror terms `2q + (Q_m - Q_n)`.
    pub fn q_limit(&self) -> f64 {
        let scale = self.geometry.frequency_scale();
        let period = scale * self.extent();
        let lattice_extent = self.lattice.as_ref().map_or(0.0, |l| l.extent());
        let reach = period - scale * (lattice_extent + EDGE_MARGIN_WAISTS * self.geometry.waist_w0());
        match self.scheme {
            Scheme::TwoBeam => reach.min(0.5 * period),
            Scheme::SingleBeam => 0.5 * reach,
        }
    }

    /// The lattice actually simulated; a missing one becomes a single pixel.
    pub fn effective_lattice(&self) -> PixelLattice {
        self.lattice.clone().unwrap_or_else(|| {
            let w0 = self.geometry.waist_w0();
            PixelLattice::new(w0, 1, w0).expect("one-pixel lattice is always valid")
        })
    }

    pub fn validate(&self) -> Result<()> {
        let w0 = self.geometry.waist_w0();
        let fail = |constraint, detail: String| Err(Error::SimulationConfig { constraint, detail });
        if self.grid_points < 8 || self.grid_points % 2 != 0 {
            return fail("grid_points even and >= 8", format!("got {}", self.grid_points));
        }
        if !(self.grid_pitch > 0.0) || self.grid_pitch > MAX_PITCH_OVER_WAIST * w0 * (1.0 + REL_SLACK) {
            return fail("grid_pitch <= w0/4", format!("pitch {:e} m, w0 {:e} m", self.grid_pitch, w0));
        }
        let lattice_extent = self.lattice.as_ref().map_or(0.0, |l| l.extent());
        let need = lattice_extent + EDGE_MARGIN_WAISTS * w0;
        if self.extent() < need * (1.0 - REL_SLACK) {
            return fail(
                "grid extent >= lattice extent + 6 w0",
                format!("extent {:e} m, need {:e} m", self.extent(), need),
            );
        }
        let (gamma_min, gamma_max) = self.source.width_range();
        if !(self.dt > 0.0) || self.dt > MAX_DT_GAMMA / gamma_max * (1.0 + REL_SLACK) {
            return fail("dt <= 0.05/gamma_max", format!("dt {:e} s, gamma_max {:e} 1/s", self.dt, gamma_max));
        }
        if self.segment_len < 2 || self.segment_len % 2 != 0 {
            return fail("segment_len even and >= 2", format!("got {}", self.segment_len));
        }
        if self.duration() < MIN_DURATION_GAMMA / gamma_min * (1.0 - REL_SLACK) {
            return fail(
                "T >= 200/gamma_min",
                format!("T {:e} s, gamma_min {:e} 1/s", self.duration(), gamma_min),
            );
        }
        Ok(())
    }
}
