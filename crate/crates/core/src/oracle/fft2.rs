use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Square sampling grid stored in FFT order: index `j` sits at `signed(j) * pitch`,
/// so the origin is index 0 and `-x` is index `(n - j) mod n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub points: usize,
    pub pitch: f64,
}

impl Grid {
    pub fn signed_index(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if 2 * j >= n {
            j - n
        } else {
            j
        }
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        self.signed_index(j) as f64 * self.pitch
    }

    /// Index of the mirrored coordinate.
    pub fn mirror(&self, j: usize) -> usize {
        (self.points - j) % self.points
    }

    pub fn cell_area(&self) -> f64 {
        self.pitch * self.pitch
    }

    /// Distance in cells from `j` to the nearer window edge.
    pub fn cells_to_edge(&self, j: usize) -> usize {
        let half = self.points as i64 / 2;
        (half - 1 - self.signed_index(j).abs()).max(0) as usize
    }
}

/// Forward 2-D DFT `sum_{jk} a_{jk} e^{-2 pi i (j u + k v) / n}`, in place.
#[derive(Clone)]
pub struct Fft2 {
    fft: Arc<dyn Fft<f64>>,
    n: usize,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        Self {
            fft: FftPlanner::new().plan_fft_forward(n),
            n,
        }
    }

    pub fn process(&self, a: &mut Array2<Complex64>) {
        assert_eq!(a.dim(), (self.n, self.n), "array does not match the planned size");
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut t = vec![Complex64::new(0.0, 0.0); n * n];
        let flat = a.as_slice_mut().expect("standard layout");
        // rows, then rows of the transpose
        self.fft.process_with_scratch(flat, &mut scratch);
        transpose(flat, &mut t, n);
        self.fft.process_with_scratch(&mut t, &mut scratch);
        transpose(&t, flat, n);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 16;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn matches_direct_dft() {
        let n = 6;
        let a = Array2::from_shape_fn((n, n), |(j, k)| Complex64::new((j * 7 + k) as f64 % 5.0, j as f64 - k as f64));
        let mut b = a.clone();
        Fft2::new(n).process(&mut b);
        for u in 0..n {
            for v in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    for k in 0..n {
                        let ph = -2.0 * PI * ((j * u + k * v) as f64) / n as f64;
                        s += a[[j, k]] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((s - b[[u, v]]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn grid_order() {
        let g = Grid { points: 8, pitch: 0.5 };
        let coords: Vec<f64> = (0..8).map(|j| g.coordinate(j)).collect();
        assert_eq!(coords, vec![0.0, 0.5, 1.0, 1.5, -2.0, -1.5, -1.0, -0.5]);
        assert_eq!(g.mirror(0), 0);
        assert_eq!(g.mirror(3), 5);
        assert_eq!(g.cells_to_edge(0), 3);
        assert_eq!(g.cells_to_edge(4), 0);
        assert_eq!(g.cells_to_edge(3), 0);
    }
}
