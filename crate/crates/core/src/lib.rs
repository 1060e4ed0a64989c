//! Far-field photocurrent noise spectra of pixellised squeezed-light sources
//! read out by plus-minus detection, with a Monte-Carlo pipeline that
//! simulates the same measurement from the field up.

pub mod error;
pub mod geometry;
pub mod oracle;
pub mod reference;
pub mod sources;
pub mod spatial;
pub mod spectra;

pub use error::{Error, Result};
pub use geometry::{
    effective_waist, far_frequency_of_position, hole_geometry, lattice_far_frequencies, HoleGeometry,
    OpticalGeometry, PixelLattice, Vec2,
};
pub use sources::{
    detection_sign, normally_ordered_correlator, output_quadrature_psd, temporal_lorentzian, Quadrature, Sign,
    SignBranch, SignTable, SourceKind, SourceParams,
};
pub use spatial::{envelope, lattice_factor, lattice_factor_direct, mode_fourier, EnvelopeKind, GaussianMode};
pub use spectra::{analytic_spectrum, analytic_spectrum_with_signs, shot_level, Scheme, SpectrumQuery, SpectrumResult};
pub use oracle::{run_oracle, OracleRun, SimulationConfig};
