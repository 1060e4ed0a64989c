//! Figure tables: fixed configs for the hole-comb figures.

use clap::ValueEnum;
use serde::Serialize;

use pmnoise_core::{Scheme, SignBranch, SourceKind};

use crate::config::{
    ConfigError, ConfigFile, DetectionSection, GeometrySection, GridSection, LatticeSection, RunConfig, RunSection,
    SourceSection, DEFAULT_POINTS_PER_DQ,
};

pub const PITCH_OVER_WAIST: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    /// Two-beam plus-minus detection: SPL summed and DOPO differential.
    Fig3,
    /// Single-beam SPL, summed current.
    Fig4,
    /// Single-beam DOPO, differential current.
    Fig5,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
        }
    }
}

/// One curve of a figure.
#[derive(Debug, Clone)]
pub struct Curve {
    /// File stem, e.g. `fig3_spl_plus_n7`.
    pub stem: String,
    pub kind: SourceKind,
    pub scheme: Scheme,
    pub branch: SignBranch,
    pub side_count: usize,
    pub config: RunConfig,
}

fn curve(id: FigureId, kind: SourceKind, scheme: Scheme, branch: SignBranch, n: usize, seed: u64) -> Result<Curve, ConfigError> {
    let file = ConfigFile {
        source: SourceSection {
            kind,
            kappa: 1.0,
            mean_photons: 1.0,
            mu_th: None,
        },
        geometry: GeometrySection::default(),
        lattice: Some(LatticeSection {
            side_count: n,
            pitch_over_waist: Some(PITCH_OVER_WAIST),
            pitch: None,
        }),
        detection: DetectionSection { scheme, branch },
        grid: GridSection {
            points_per_dq: Some(DEFAULT_POINTS_PER_DQ),
            ..GridSection::default()
        },
        run: RunSection { seed, workers: 0 },
        oracle: None,
    };
    Ok(Curve {
        stem: format!("{}_{kind}_{branch}_n{n}", id.name()),
        kind,
        scheme,
        branch,
        side_count: n,
        config: RunConfig::from_config_file(file)?,
    })
}

pub fn figure_curves(id: FigureId, seed: u64) -> Result<Vec<Curve>, ConfigError> {
    use SignBranch::*;
    use SourceKind::*;
    let specs: &[(SourceKind, Scheme, SignBranch, usize)] = match id {
        FigureId::Fig3 => &[
            (Spl, Scheme::TwoBeam, Plus, 7),
            (Spl, Scheme::TwoBeam, Plus, 99),
            (Dopo, Scheme::TwoBeam, Minus, 7),
            (Dopo, Scheme::TwoBeam, Minus, 99),
        ],
        FigureId::Fig4 => &[(Spl, Scheme::SingleBeam, Plus, 7), (Spl, Scheme::SingleBeam, Plus, 99)],
        FigureId::Fig5 => &[(Dopo, Scheme::SingleBeam, Minus, 7)],
    };
    specs
        .iter()
        .map(|&(k, s, b, n)| curve(id, k, s, b, n, seed))
        .collect()
}
