//! TOML run configuration.
//!
//! A config names one source, one detection scheme and the `(q, Omega)` grid.
//! Parsing fills every default explicitly, so [`RunConfig::to_toml`] is a
//! complete, self-contained description of a run.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use pmnoise_core::oracle::SimulationConfig;
use pmnoise_core::spectra::default_qx_grid;
use pmnoise_core::{
    Error as CoreError, GaussianMode, OpticalGeometry, PixelLattice, Scheme, SignBranch, SourceKind, SourceParams,
    SpectrumQuery, Vec2,
};

/// Pump ratio used for a DOPO when the config leaves `mu_th` out.
pub const DEFAULT_MU_TH: f64 = 2.0;
pub const DEFAULT_POINTS_PER_DQ: usize = 40;

const SI_WAVELENGTH: f64 = 1.064e-6;
const SI_FOCAL_LENGTH: f64 = 0.1;
const SI_WAIST: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// `lambda = 2 pi`, `f = 1`, `w0 = 1`, hence `w~0 = 1` and `Q = rho`.
    #[default]
    Dimensionless,
    /// `lambda = 1.064 um`, `f = 10 cm`, `w0 = 100 um`.
    Si,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub kind: SourceKind,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub mean_photons: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_th: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(default)]
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waist_w0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub side_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch_over_waist: Option<f64>,
    /// Absolute pitch (m); give this or `pitch_over_waist`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub scheme: Scheme,
    pub branch: SignBranch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Explicit `q_x` values (rad/m).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qx: Option<Vec<f64>>,
    /// Evenly spaced `q_x` values, both ends included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qx_span: Option<Span>,
    /// Figure axis over `[-1.2 D, 1.2 D]`; needs a lattice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_per_dq: Option<usize>,
    #[serde(default = "zero_list")]
    pub qy: Vec<f64>,
    /// Temporal frequencies (rad/s).
    #[serde(default = "zero_list")]
    pub omega: Vec<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            qx: None,
            qx_span: None,
            points_per_dq: None,
            qy: zero_list(),
            omega: zero_list(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Left out of rendered configs
    /// because results do not depend on it.
    #[serde(default, skip_serializing)]
    pub workers: usize,
}

/// Overrides of the recommended Monte-Carlo settings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_pitch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excess_noise: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub source: SourceSection,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSection>,
    pub detection: DetectionSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

fn one() -> f64 {
    1.0
}

fn zero_list() -> Vec<f64> {
    vec![0.0]
}

/// A parsed and resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Normalised file: every default written out.
    pub file: ConfigFile,
    pub query: SpectrumQuery,
    /// Defaults that were filled in, for the output header.
    pub notes: Vec<String>,
    text: String,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(text, s.start));
            ConfigError::new(line, e.message().trim().to_string())
        })?;
        Self::from_file(file, text)
    }

    /// Resolves a file built in code; diagnostics refer to its TOML rendering.
    pub fn from_config_file(file: ConfigFile) -> Result<Self, ConfigError> {
        let text = toml::to_string(&file).map_err(|e| ConfigError::new(None, e.to_string()))?;
        Self::from_file(file, &text)
    }

    fn from_file(mut file: ConfigFile, text: &str) -> Result<Self, ConfigError> {
        let at = |section: &str, key: &str| locate(text, section, key);
        let mut notes = Vec::new();

        if file.run.seed > i64::MAX as u64 {
            return Err(ConfigError::new(at("run", "seed"), "seed must fit in a signed 64-bit integer"));
        }

        let s = &mut file.source;
        if s.kind == SourceKind::Dopo && s.mu_th.is_none() {
            s.mu_th = Some(DEFAULT_MU_TH);
            notes.push(format!("mu_th = {DEFAULT_MU_TH} (default)"));
        }
        if s.kind == SourceKind::Spl && s.mu_th.is_some() {
            return Err(ConfigError::new(at("source", "mu_th"), "mu_th applies to a dopo source only"));
        }
        let source = SourceParams::new(s.kind, s.kappa, s.mean_photons, s.mu_th)
            .map_err(|e| core_error(e, text, "source"))?;

        let g = &mut file.geometry;
        let (wl, fl, w0) = match g.units {
            Units::Dimensionless => (2.0 * PI, 1.0, 1.0),
            Units::Si => (SI_WAVELENGTH, SI_FOCAL_LENGTH, SI_WAIST),
        };
        g.wavelength.get_or_insert(wl);
        g.focal_length.get_or_insert(fl);
        g.waist_w0.get_or_insert(w0);
        let geometry = OpticalGeometry::new(
            g.wavelength.unwrap_or(wl),
            g.focal_length.unwrap_or(fl),
            g.waist_w0.unwrap_or(w0),
        )
        .map_err(|e| core_error(e, text, "geometry"))?;
        let mode = GaussianMode::new(geometry.waist_w0()).map_err(|e| core_error(e, text, "geometry"))?;

        let lattice = match &file.lattice {
            None => None,
            Some(l) => {
                let pitch = match (l.pitch_over_waist, l.pitch) {
                    (Some(r), None) => r * geometry.waist_w0(),
                    (None, Some(p)) => p,
                    _ => {
                        return Err(ConfigError::new(
                            at("lattice", ""),
                            "give exactly one of `pitch_over_waist` and `pitch`",
                        ))
                    }
                };
                Some(
                    PixelLattice::new(pitch, l.side_count, geometry.waist_w0())
                        .map_err(|e| core_error(e, text, "lattice"))?,
                )
            }
        };

        let grid = &mut file.grid;
        let given = [grid.qx.is_some(), grid.qx_span.is_some(), grid.points_per_dq.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if given > 1 {
            return Err(ConfigError::new(
                at("grid", ""),
                "give at most one of `qx`, `qx_span` and `points_per_dq`",
            ));
        }
        if given == 0 {
            if lattice.is_none() {
                return Err(ConfigError::new(
                    at("grid", ""),
                    "without a lattice the grid needs `qx` or `qx_span`",
                ));
            }
            grid.points_per_dq = Some(DEFAULT_POINTS_PER_DQ);
            notes.push(format!("points_per_dq = {DEFAULT_POINTS_PER_DQ} (default)"));
        }
        let qx: Vec<f64> = if let Some(v) = &grid.qx {
            v.clone()
        } else if let Some(span) = grid.qx_span {
            if span.points < 2 {
                return Err(ConfigError::new(at("grid", "qx_span"), "qx_span needs at least 2 points"));
            }
            let step = (span.stop - span.start) / (span.points - 1) as f64;
            (0..span.points).map(|i| span.start + i as f64 * step).collect()
        } else {
            let ppd = grid.points_per_dq.unwrap_or(DEFAULT_POINTS_PER_DQ);
            if ppd == 0 {
                return Err(ConfigError::new(at("grid", "points_per_dq"), "points_per_dq must be positive"));
            }
            let Some(lat) = &lattice else {
                return Err(ConfigError::new(at("grid", "points_per_dq"), "points_per_dq needs a [lattice]"));
            };
            default_qx_grid(lat, &geometry, ppd).into_iter().map(|q| q.x).collect()
        };
        for (key, values) in [("qx", &qx), ("qy", &grid.qy), ("omega", &grid.omega)] {
            if values.is_empty() {
                return Err(ConfigError::new(at("grid", key), format!("`{key}` is empty")));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(ConfigError::new(at("grid", key), format!("`{key}` holds a non-finite value")));
            }
        }
        let q_grid = grid
            .qy
            .iter()
            .flat_map(|&y| qx.iter().map(move |&x| Vec2::new(x, y)))
            .collect();

        let query = SpectrumQuery {
            source,
            mode,
            lattice,
            geometry,
            scheme: file.detection.scheme,
            branch: file.detection.branch,
            q_grid,
            omega_grid: grid.omega.clone(),
        };
        query.validate().map_err(|e| core_error(e, text, "geometry"))?;
        Ok(Self {
            file,
            query,
            notes,
            text: text.to_string(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.file.run.seed
    }

    pub fn workers(&self) -> usize {
        self.file.run.workers
    }

    /// Applies a command-line seed; the rendered config then records it.
    pub fn set_seed(&mut self, seed: u64) -> Result<(), ConfigError> {
        if seed > i64::MAX as u64 {
            return Err(ConfigError::new(None, "seed must fit in a signed 64-bit integer"));
        }
        self.file.run.seed = seed;
        Ok(())
    }

    pub fn set_workers(&mut self, workers: usize) {
        self.file.run.workers = workers;
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.file).expect("a resolved config always serialises")
    }

    /// Monte-Carlo settings: the recommended ones with any `[oracle]` overrides.
    pub fn simulation(&self) -> Result<SimulationConfig, ConfigError> {
        let q = &self.query;
        let mut cfg = SimulationConfig::recommended(
            q.source,
            q.lattice.clone(),
            q.geometry,
            q.scheme,
            q.branch,
            self.seed(),
        )
        .map_err(|e| core_error(e, &self.text, "oracle"))?;
        if let Some(o) = &self.file.oracle {
            if let Some(v) = o.grid_points {
                cfg.grid_points = v;
            }
            if let Some(v) = o.grid_pitch {
                cfg.grid_pitch = v;
            }
            if let Some(v) = o.dt {
                cfg.dt = v;
            }
            if let Some(v) = o.segment_len {
                cfg.segment_len = v;
            }
            if let Some(v) = o.segments {
                cfg.segments = v;
            }
            if let Some(v) = o.excess_noise {
                cfg.excess_noise = v;
            }
        }
        cfg.validate().map_err(|e| core_error(e, &self.text, "oracle"))?;
        Ok(cfg)
    }
}

/// Points a core validation error at the config key it came from.
fn core_error(e: CoreError, text: &str, section: &str) -> ConfigError {
    let key = match &e {
        CoreError::InvalidParameter { name, .. } => match *name {
            "waist" => "waist_w0",
            "pitch" => "pitch",
            other => other,
        },
        CoreError::EvenSideCount(_) => "side_count",
        CoreError::PixelsOverlap { .. } => "pitch_over_waist",
        CoreError::SimulationConfig { constraint, .. } => match constraint.split_whitespace().next().unwrap_or("") {
            "grid_points" | "grid" => "grid_points",
            "grid_pitch" => "grid_pitch",
            "dt" => "dt",
            "segment_len" => "segment_len",
            _ => "segments",
        },
        _ => "",
    };
    let mut line = locate(text, section, key);
    if line.is_none() && key == "pitch_over_waist" {
        line = locate(text, section, "pitch");
    }
    ConfigError::new(line.or_else(|| locate(text, section, "")), e.to_string())
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// 1-based line of `key` inside `[section]`, or of the header itself when
/// `key` is empty.
pub fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if key.is_empty() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if key.is_empty() || current != section {
            continue;
        }
        if let Some((k, _)) = line.split_once('=') {
            if k.trim() == key {
                return Some(i + 1);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[source]
kind = "dopo"

[lattice]
side_count = 7
pitch_over_waist = 10.0

[detection]
scheme = "two_beam"
branch = "minus"
"#;

    #[test]
    fn defaults_are_filled_and_recorded() {
        let cfg = RunConfig::parse(BASIC).unwrap();
        assert_eq!(cfg.file.source.mu_th, Some(DEFAULT_MU_TH));
        assert_eq!(cfg.file.grid.points_per_dq, Some(DEFAULT_POINTS_PER_DQ));
        assert_eq!(cfg.file.geometry.wavelength, Some(2.0 * PI));
        assert_eq!(cfg.notes.len(), 2);
        assert_eq!(cfg.query.omega_grid, vec![0.0]);
    }

    #[test]
    fn rendering_round_trips() {
        let cfg = RunConfig::parse(BASIC).unwrap();
        let again = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg.file, again.file);
        assert_eq!(cfg.query, again.query);
    }

    #[test]
    fn unknown_key_is_rejected_with_its_line() {
        let text = BASIC.replace("side_count = 7", "side_count = 7\nspacing = 3");
        let err = RunConfig::parse(&text).unwrap_err();
        assert_eq!(err.line, Some(7), "{err}");
        assert!(err.message.contains("spacing"), "{err}");
    }

    #[test]
    fn semantic_errors_point_at_the_key() {
        let err = RunConfig::parse(&BASIC.replace("side_count = 7", "side_count = 6")).unwrap_err();
        assert_eq!(err.line, Some(6), "{err}");
        let err = RunConfig::parse(&BASIC.replace("pitch_over_waist = 10.0", "pitch_over_waist = 2.0")).unwrap_err();
        assert_eq!(err.line, Some(7), "{err}");
        let text = BASIC.replace("kind = \"dopo\"", "kind = \"dopo\"\nmu_th = 0.5");
        assert_eq!(RunConfig::parse(&text).unwrap_err().line, Some(4));
    }

    #[test]
    fn oracle_overrides_are_checked() {
        let text = format!("{BASIC}\n[oracle]\ngrid_pitch = 0.5\n");
        let cfg = RunConfig::parse(&text).unwrap();
        let err = cfg.simulation().unwrap_err();
        assert_eq!(err.line, Some(14), "{err}");
    }

    #[test]
    fn pointlike_config_needs_explicit_axis() {
        let text = "[source]\nkind = \"spl\"\n[detection]\nscheme = \"two_beam\"\nbranch = \"plus\"\n";
        assert!(RunConfig::parse(text).is_err());
        let cfg = RunConfig::parse(&format!("{text}[grid]\nqx_span = {{ start = -1.0, stop = 1.0, points = 5 }}\n")).unwrap();
        assert_eq!(cfg.query.q_grid.len(), 5);
        assert_eq!(cfg.query.q_grid[2], Vec2::ZERO);
    }
}
