//! Spatial transform of the combined current and trajectory-averaged periodograms.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use super::config::MIN_SEGMENTS;
use super::detect::Photocurrent;
use super::fft2::Grid;
use super::synth::bin_frequency;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Trajectory-averaged spectral density in pipeline units, before shot normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    /// Probe frequencies after snapping to the detector-plane transform grid.
    pub q_grid: Vec<Vec2>,
    /// Temporal frequencies after snapping to the periodogram bins.
    pub omega_grid: Vec<f64>,
    pub mean: Array2<f64>,
    /// Standard error of `mean` from the scatter between trajectories.
    pub stderr: Array2<f64>,
    pub floor: f64,
    pub segments: usize,
}

/// Snaps spatial frequencies to the grid `2 pi j / (n pitch)` of a detector-plane grid.
fn snap_q(q_grid: &[Vec2], grid: Grid) -> Result<Vec<(i64, i64)>> {
    let step = 2.0 * PI / (grid.points as f64 * grid.pitch);
    let limit = grid.points as i64 / 2;
    q_grid
        .iter()
        .map(|q| {
            let jx = (q.x / step).round() as i64;
            let jy = (q.y / step).round() as i64;
            if jx.abs() >= limit || jy.abs() >= limit {
                Err(Error::InvalidQuery(format!(
                    "q = ({:e}, {:e}) lies beyond the detector-grid Nyquist frequency {:e}",
                    q.x,
                    q.y,
                    step * limit as f64
                )))
            } else {
                Ok((jx, jy))
            }
        })
        .collect()
}

fn snap_omega(omega_grid: &[f64], len: usize, dt: f64) -> Result<Vec<usize>> {
    let step = 2.0 * PI / (len as f64 * dt);
    omega_grid
        .iter()
        .map(|&w| {
            let k = (w / step).round() as i64;
            if 2 * k.unsigned_abs() as usize > len {
                Err(Error::InvalidQuery(format!("omega = {w:e} exceeds the Nyquist frequency {:e}", PI / dt)))
            } else {
                Ok(k.rem_euclid(len as i64) as usize)
            }
        })
        .collect()
}

/// `exp(-2 pi i j k / n)` for every grid index `k`; the lattice-aligned form of `exp(-i q x)`.
fn phase_table(j: i64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let r = (j * k as i64).rem_euclid(n as i64);
            Complex64::from_polar(1.0, -2.0 * PI * r as f64 / n as f64)
        })
        .collect()
}

/// Per-probe periodograms `|sum_t I(q, t) e^{-i Omega t dt} dt|^2 / (M dt)` of one trajectory,
/// where `I(q, t) = sum i(rho, t) e^{-i q rho} dA`.
fn trajectory_periodogram(current: &Photocurrent, probes: &[(i64, i64)], bins: &[usize]) -> Array2<f64> {
    let grid = current.grid();
    let n = grid.points;
    let m = current.steps();
    let dt = current.dt();
    let mut by_y: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (p, &(_, jy)) in probes.iter().enumerate() {
        by_y.entry(jy).or_default().push(p);
    }
    let x_tables: Vec<Vec<Complex64>> = probes.iter().map(|&(jx, _)| phase_table(jx, n)).collect();
    let y_tables: BTreeMap<i64, Vec<Complex64>> = by_y.keys().map(|&jy| (jy, phase_table(jy, n))).collect();

    let mut series = Array2::<Complex64>::zeros((probes.len(), m));
    let mut rows = vec![Complex64::new(0.0, 0.0); n];
    for t in 0..m {
        let i = current.slice(t);
        for (jy, members) in &by_y {
            let py = &y_tables[jy];
            for (ix, r) in rows.iter_mut().enumerate() {
                *r = i.row(ix).iter().zip(py).map(|(&v, &p)| p * v).sum();
            }
            for &p in members {
                let s: Complex64 = rows.iter().zip(&x_tables[p]).map(|(r, px)| r * px).sum();
                series[[p, t]] = s * grid.cell_area();
            }
        }
    }
    let mut out = Array2::zeros((probes.len(), bins.len()));
    for (p, row) in series.outer_iter().enumerate() {
        for (b, &k) in bins.iter().enumerate() {
            let tw = phase_table(k as i64, m);
            let x: Complex64 = row.iter().zip(&tw).map(|(v, w)| v * w).sum::<Complex64>() * dt;
            out[[p, b]] = x.norm_sqr() / (m as f64 * dt);
        }
    }
    out
}

/// Averages per-trajectory periodograms produced by `make(index)` for
/// `count` trajectories. Trajectories run in parallel; the reduction is in
/// index order, so results do not depend on the thread count.
pub fn estimate_with<F>(count: usize, make: F, q_grid: &[Vec2], omega_grid: &[f64]) -> Result<SpectrumEstimate>
where
    F: Fn(usize) -> Result<Photocurrent> + Sync,
{
    if count < MIN_SEGMENTS {
        return Err(Error::InsufficientDuration(format!(
            "{count} segments; at least {MIN_SEGMENTS} are needed"
        )));
    }
    let first = make(0)?;
    let (grid, steps, dt, floor) = (first.grid(), first.steps(), first.dt(), first.shot_floor());
    let probes = snap_q(q_grid, grid)?;
    let bins = snap_omega(omega_grid, steps, dt)?;

    let per: Vec<Array2<f64>> = (0..count)
        .into_par_iter()
        .map(|j| {
            let current = if j == 0 { first.clone() } else { make(j)? };
            if current.grid() != grid || current.steps() != steps || current.shot_floor() != floor {
                return Err(Error::InvalidQuery(format!("segment {j} differs in grid, length or mean field")));
            }
            Ok(trajectory_periodogram(&current, &probes, &bins))
        })
        .collect::<Result<_>>()?;

    let k = count as f64;
    let mut mean = Array2::<f64>::zeros(per[0].dim());
    for p in &per {
        mean += p;
    }
    mean /= k;
    let mut var = Array2::<f64>::zeros(mean.dim());
    for p in &per {
        var += &(p - &mean).mapv(|d| d * d);
    }
    let stderr = var.mapv(|v| (v / (k - 1.0) / k).sqrt());

    let q_step = 2.0 * PI / (grid.points as f64 * grid.pitch);
    Ok(SpectrumEstimate {
        q_grid: probes.iter().map(|&(jx, jy)| Vec2::new(jx as f64 * q_step, jy as f64 * q_step)).collect(),
        omega_grid: bins.iter().map(|&b| bin_frequency(b, steps, dt)).collect(),
        mean,
        stderr,
        floor,
        segments: count,
    })
}

/// Spectrum of the combined current over a set of independent segments.
pub fn estimate_spectrum(segments: &[Photocurrent], q_grid: &[Vec2], omega_grid: &[f64]) -> Result<SpectrumEstimate> {
    estimate_with(segments.len(), |j| Ok(segments[j].clone()), q_grid, omega_grid)
}
