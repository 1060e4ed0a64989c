//! Linearised direct detection and the plus-minus current combinations.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::fft2::Grid;
use super::field::VACUUM_PSD;
use super::lens::FarFieldEnsemble;
use crate::error::{Error, Result};
use crate::sources::SignBranch;
use crate::spectra::Scheme;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `dI(rho) = 2 Re(<S>* dS)`.
pub fn linear_current(mean: &Array2<Complex64>, fluct: &Array2<Complex64>) -> Array2<f64> {
    Zip::from(mean).and(fluct).map_collect(|m, d| 2.0 * (m.conj() * d).re)
}

/// Balanced beamsplitter `((a + b) / sqrt 2, (a - b) / sqrt 2)`.
pub fn beamsplitter(a: &Array2<Complex64>, b: &Array2<Complex64>) -> (Array2<Complex64>, Array2<Complex64>) {
    let sum = Zip::from(a).and(b).map_collect(|x, y| (x + y) * SQRT_HALF);
    let diff = Zip::from(a).and(b).map_collect(|x, y| (x - y) * SQRT_HALF);
    (sum, diff)
}

/// `a(rho) +- b(-rho)` on an FFT-ordered grid.
pub fn mirror_combine(a: &Array2<f64>, b: &Array2<f64>, grid: Grid, branch: SignBranch) -> Array2<f64> {
    let s = match branch {
        SignBranch::Plus => 1.0,
        SignBranch::Minus => -1.0,
    };
    Array2::from_shape_fn(a.dim(), |(i, j)| a[[i, j]] + s * b[[grid.mirror(i), grid.mirror(j)]])
}

/// Combined current for one time slice. `means` and `flucts` hold the
/// detector-plane fields of every source beam, before any beamsplitter.
pub fn combine_currents(
    means: &[Array2<Complex64>],
    flucts: &[Array2<Complex64>],
    grid: Grid,
    scheme: Scheme,
    branch: SignBranch,
) -> Array2<f64> {
    match scheme {
        Scheme::TwoBeam => {
            let (m1, m2) = beamsplitter(&means[0], &means[1]);
            let (d1, d2) = beamsplitter(&flucts[0], &flucts[1]);
            mirror_combine(&linear_current(&m1, &d1), &linear_current(&m2, &d2), grid, branch)
        }
        Scheme::SingleBeam => {
            let i = linear_current(&means[0], &flucts[0]);
            mirror_combine(&i, &i, grid, branch)
        }
    }
}

/// Same as [`combine_currents`] with the beamsplitter already applied to
/// `detector_means`, written as one pass over flat buffers.
fn combine_fast(detector_means: &[Array2<Complex64>], flucts: &[Array2<Complex64>], mirror: &[usize], scheme: Scheme, branch: SignBranch) -> Vec<f64> {
    let s = match branch {
        SignBranch::Plus => 1.0,
        SignBranch::Minus => -1.0,
    };
    match scheme {
        Scheme::TwoBeam => {
            let (f1, f2) = (flucts[0].as_slice().expect("standard layout"), flucts[1].as_slice().expect("standard layout"));
            let (m1, m2) = (
                detector_means[0].as_slice().expect("standard layout"),
                detector_means[1].as_slice().expect("standard layout"),
            );
            let i2: Vec<f64> = f1
                .iter()
                .zip(f2)
                .zip(m2)
                .map(|((a, b), m)| 2.0 * (m.conj() * ((a - b) * SQRT_HALF)).re)
                .collect();
            f1.iter()
                .zip(f2)
                .zip(m1)
                .zip(mirror)
                .map(|(((a, b), m), &k)| 2.0 * (m.conj() * ((a + b) * SQRT_HALF)).re + s * i2[k])
                .collect()
        }
        Scheme::SingleBeam => {
            let f = flucts[0].as_slice().expect("standard layout");
            let m = detector_means[0].as_slice().expect("standard layout");
            let i: Vec<f64> = f.iter().zip(m).map(|(d, m)| 2.0 * (m.conj() * d).re).collect();
            mirror.iter().enumerate().map(|(k, &mk)| i[k] + s * i[mk]).collect()
        }
    }
}

/// Plus or minus photocurrent of one trajectory, produced slice by slice.
#[derive(Debug, Clone)]
pub struct Photocurrent {
    beams: Vec<FarFieldEnsemble>,
    /// Means after the beamsplitter, one per detector.
    detector_means: Vec<Array2<Complex64>>,
    /// Flat index of the mirrored cell.
    mirror: Vec<usize>,
    scheme: Scheme,
    branch: SignBranch,
    floor: f64,
}

impl Photocurrent {
    pub fn grid(&self) -> Grid {
        self.beams[0].grid()
    }

    pub fn steps(&self) -> usize {
        self.beams[0].steps()
    }

    pub fn dt(&self) -> f64 {
        self.beams[0].dt()
    }

    /// Expected spatio-temporal density of the current under pure vacuum input,
    /// ignoring the mirror-image correlation of the single-beam scheme:
    /// `4 sum_beams sum |<S_F>|^2 dA` for two beams, `8 sum |<S_F>|^2 dA` for one.
    pub fn shot_floor(&self) -> f64 {
        self.floor
    }

    pub fn slice(&self, t: usize) -> Array2<f64> {
        let flucts: Vec<_> = self.beams.iter().map(|b| b.slice(t)).collect();
        let n = self.grid().points;
        let flat = combine_fast(&self.detector_means, &flucts, &self.mirror, self.scheme, self.branch);
        Array2::from_shape_vec((n, n), flat).expect("square grid")
    }
}

pub fn detect_and_combine(far: Vec<FarFieldEnsemble>, scheme: Scheme, branch: SignBranch) -> Result<Photocurrent> {
    let expected = match scheme {
        Scheme::TwoBeam => 2,
        Scheme::SingleBeam => 1,
    };
    if far.len() != expected {
        return Err(Error::InvalidQuery(format!(
            "{scheme} detection needs {expected} beam(s), got {}",
            far.len()
        )));
    }
    let grid = far[0].grid();
    if far.iter().any(|b| b.grid() != grid || b.steps() != far[0].steps()) {
        return Err(Error::InvalidQuery("beams sampled on different grids".into()));
    }
    let means: Vec<_> = far.iter().map(|b| b.mean_field().clone()).collect();
    let energy: f64 = means.iter().flat_map(|m| m.iter()).map(|c| c.norm_sqr()).sum::<f64>() * grid.cell_area();
    let floor = match scheme {
        Scheme::TwoBeam => 4.0 * VACUUM_PSD * energy,
        Scheme::SingleBeam => 8.0 * VACUUM_PSD * energy,
    };
    let detector_means = match scheme {
        Scheme::TwoBeam => {
            let (a, b) = beamsplitter(&means[0], &means[1]);
            vec![a, b]
        }
        Scheme::SingleBeam => means,
    };
    let n = grid.points;
    let mirror = (0..n * n).map(|k| grid.mirror(k / n) * n + grid.mirror(k % n)).collect();
    Ok(Photocurrent {
        beams: far,
        detector_means,
        mirror,
        scheme,
        branch,
        floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(n: usize, a: f64, b: f64) -> Array2<Complex64> {
        Array2::from_shape_fn((n, n), |(i, j)| {
            Complex64::new((a * i as f64 + b * j as f64).sin(), (b * i as f64 - 0.3 * j as f64).cos())
        })
    }

    #[test]
    fn fused_path_matches_reference() {
        let n = 10;
        let grid = Grid { points: n, pitch: 0.7 };
        let means = vec![field(n, 0.3, 0.1), field(n, -0.2, 0.5)];
        let flucts = vec![field(n, 1.1, 0.7), field(n, 0.4, -0.9)];
        let mirror: Vec<usize> = (0..n * n).map(|k| grid.mirror(k / n) * n + grid.mirror(k % n)).collect();
        let (a, b) = beamsplitter(&means[0], &means[1]);
        for branch in [SignBranch::Plus, SignBranch::Minus] {
            let slow = combine_currents(&means, &flucts, grid, Scheme::TwoBeam, branch);
            let fast = combine_fast(&[a.clone(), b.clone()], &flucts, &mirror, Scheme::TwoBeam, branch);
            for (x, y) in slow.iter().zip(&fast) {
                assert!((x - y).abs() < 1e-12);
            }
            let slow = combine_currents(&means, &flucts, grid, Scheme::SingleBeam, branch);
            let fast = combine_fast(&means, &flucts, &mirror, Scheme::SingleBeam, branch);
            for (x, y) in slow.iter().zip(&fast) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
