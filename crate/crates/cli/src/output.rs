//! CSV and JSON tables.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use pmnoise_core::oracle::SimulationConfig;
use pmnoise_core::{shot_level, SpectrumResult};

use crate::config::{RunConfig, DEFAULT_MU_TH};

pub const CONFIG_BEGIN: &str = "# --- config ---";
pub const CONFIG_END: &str = "# --- end config ---";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Oracle,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Oracle => "oracle",
        }
    }
}

/// Everything a table is rendered from.
pub struct Table<'a> {
    pub config: &'a RunConfig,
    pub result: &'a SpectrumResult,
    pub mode: Mode,
    /// Present in oracle mode.
    pub simulation: Option<&'a SimulationConfig>,
}

impl Table<'_> {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn meta_pairs(&self) -> Vec<(&'static str, String)> {
        let q = &self.result.query;
        let s = &q.source;
        let mut meta = vec![
            ("tool", format!("pmnoise {}", env!("CARGO_PKG_VERSION"))),
            ("mode", self.mode.name().to_string()),
            ("source", s.kind().to_string()),
            ("kappa", s.kappa().to_string()),
            ("mean_photons", s.mean_photons().to_string()),
        ];
        if let Some(mu) = s.mu_th() {
            meta.push(("mu_th", mu.to_string()));
            meta.push(("mu_th_default", DEFAULT_MU_TH.to_string()));
        }
        meta.push(("scheme", q.scheme.to_string()));
        meta.push(("branch", q.branch.to_string()));
        match &q.lattice {
            Some(lat) => {
                meta.push(("side_count", lat.side_count().to_string()));
                meta.push(("pitch", lat.pitch().to_string()));
            }
            None => meta.push(("side_count", "pointlike".into())),
        }
        meta.push(("wavelength", q.geometry.wavelength().to_string()));
        meta.push(("focal_length", q.geometry.focal_length().to_string()));
        meta.push(("waist_w0", q.geometry.waist_w0().to_string()));
        meta.push(("shot_level", shot_level(s).to_string()));
        meta.push(("seed", self.config.seed().to_string()));
        if let Some(sim) = self.simulation {
            meta.push(("grid_points", sim.grid_points.to_string()));
            meta.push(("grid_pitch", sim.grid_pitch.to_string()));
            meta.push(("dt", sim.dt.to_string()));
            meta.push(("segment_len", sim.segment_len.to_string()));
            meta.push(("segments", sim.segments.to_string()));
            meta.push(("excess_noise", sim.excess_noise.to_string()));
            meta.push(("stderr_units", "shot-normalised".into()));
        }
        meta
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.meta_pairs() {
            writeln!(out, "# {k} = {v}").unwrap();
        }
        out.push_str(CONFIG_BEGIN);
        out.push('\n');
        for line in self.config.to_toml().lines() {
            if line.is_empty() {
                out.push_str("#\n");
            } else {
                writeln!(out, "# {line}").unwrap();
            }
        }
        out.push_str(CONFIG_END);
        out.push('\n');
        let se = self.result.stderr.as_ref();
        out.push_str(if se.is_some() {
            "qx,qy,omega,s_abs,s_norm,stderr\n"
        } else {
            "qx,qy,omega,s_abs,s_norm\n"
        });
        let q = &self.result.query;
        for (i, p) in q.q_grid.iter().enumerate() {
            for (j, w) in q.omega_grid.iter().enumerate() {
                write!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    p.x,
                    p.y,
                    w,
                    self.result.values[[i, j]],
                    self.result.shot_normalized[[i, j]]
                )
                .unwrap();
                if let Some(se) = se {
                    write!(out, ",{:.16e}", se[[i, j]]).unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    fn json(&self) -> String {
        let mut meta = serde_json::Map::new();
        for (k, v) in self.meta_pairs() {
            meta.insert(k.to_string(), Value::String(v));
        }
        meta.insert("config".into(), Value::String(self.config.to_toml()));
        let q = &self.result.query;
        let mut rows = Vec::with_capacity(q.q_grid.len() * q.omega_grid.len());
        for (i, p) in q.q_grid.iter().enumerate() {
            for (j, w) in q.omega_grid.iter().enumerate() {
                let mut row = json!({
                    "qx": p.x,
                    "qy": p.y,
                    "omega": w,
                    "s_abs": self.result.values[[i, j]],
                    "s_norm": self.result.shot_normalized[[i, j]],
                });
                if let Some(se) = &self.result.stderr {
                    row["stderr"] = json!(se[[i, j]]);
                }
                rows.push(row);
            }
        }
        let mut text = serde_json::to_string_pretty(&json!({ "meta": meta, "rows": rows })).unwrap();
        text.push('\n');
        text
    }
}

/// The config embedded in a CSV header, with the comment prefix removed.
pub fn embedded_config(csv: &str) -> Option<String> {
    let mut lines = csv.lines();
    lines.find(|l| *l == CONFIG_BEGIN)?;
    let mut out = String::new();
    for line in lines {
        if line == CONFIG_END {
            return Some(out);
        }
        let body = line.strip_prefix('#')?;
        out.push_str(body.strip_prefix(' ').unwrap_or(body));
        out.push('\n');
    }
    None
}
