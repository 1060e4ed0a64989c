//! Thin-lens Fourier transform from the source plane to the detector plane.

use ndarray::Array2;
use num_complex::Complex64;

use super::fft2::{Fft2, Grid};
use super::field::FieldEnsemble;
use crate::geometry::OpticalGeometry;

/// Mean-field energy fraction near the window edge above which the lens warns.
pub const EDGE_ENERGY_LIMIT: f64 = 1e-6;
pub const EDGE_CELLS: usize = 3;

/// Detector-plane grid conjugate to `near`: pitch `lambda f / (n h)`.
pub fn far_grid(near: Grid, g: &OpticalGeometry) -> Grid {
    Grid {
        points: near.points,
        pitch: g.wavelength() * g.focal_length() / (near.points as f64 * near.pitch),
    }
}

/// `S_F(rho_F) = -i (h^2 / lambda f) sum S(rho) exp(-2 pi i rho . rho_F / lambda f)`,
/// the discrete form of the lens relation. Unitary between the two grids.
pub fn lens_transform_slice(near: &Array2<Complex64>, grid: Grid, g: &OpticalGeometry, fft: &Fft2) -> Array2<Complex64> {
    let mut out = near.to_owned();
    lens_transform_in_place(&mut out, grid, g, fft);
    out
}

/// [`lens_transform_slice`] overwriting its input.
pub fn lens_transform_in_place(a: &mut Array2<Complex64>, grid: Grid, g: &OpticalGeometry, fft: &Fft2) {
    fft.process(a);
    let scale = Complex64::new(0.0, -grid.cell_area() / (g.wavelength() * g.focal_length()));
    a.mapv_inplace(|c| c * scale);
}

/// Share of `sum |a|^2` held within [`EDGE_CELLS`] cells of the window edge.
pub fn edge_energy_fraction(a: &Array2<Complex64>, grid: Grid) -> f64 {
    let mut edge = 0.0;
    let mut total = 0.0;
    for ((i, j), c) in a.indexed_iter() {
        let e = c.norm_sqr();
        total += e;
        if grid.cells_to_edge(i) < EDGE_CELLS || grid.cells_to_edge(j) < EDGE_CELLS {
            edge += e;
        }
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

/// A near-field beam seen in the detector plane; slices are transformed on demand.
#[derive(Debug, Clone)]
pub struct FarFieldEnsemble {
    near: FieldEnsemble,
    geometry: OpticalGeometry,
    grid: Grid,
    fft: Fft2,
    mean: Array2<Complex64>,
    edge_fraction: f64,
}

impl FarFieldEnsemble {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn steps(&self) -> usize {
        self.near.steps()
    }

    pub fn dt(&self) -> f64 {
        self.near.dt()
    }

    pub fn mean_field(&self) -> &Array2<Complex64> {
        &self.mean
    }

    /// Larger of the near- and far-plane edge energy fractions of the mean field.
    pub fn edge_fraction(&self) -> f64 {
        self.edge_fraction
    }

    pub fn slice(&self, t: usize) -> Array2<Complex64> {
        let mut a = self.near.slice(t);
        lens_transform_in_place(&mut a, self.near.grid(), &self.geometry, &self.fft);
        a
    }
}

pub fn lens_transform(ensemble: FieldEnsemble, g: &OpticalGeometry) -> FarFieldEnsemble {
    let near_grid = ensemble.grid();
    let fft = Fft2::new(near_grid.points);
    let mean = lens_transform_slice(ensemble.mean_field(), near_grid, g, &fft);
    let grid = far_grid(near_grid, g);
    let edge_fraction = edge_energy_fraction(ensemble.mean_field(), near_grid).max(edge_energy_fraction(&mean, grid));
    if edge_fraction > EDGE_ENERGY_LIMIT {
        log::warn!(
            "mean field holds {edge_fraction:.2e} of its energy within {EDGE_CELLS} cells of the window edge; \
             the lens transform may alias"
        );
    }
    FarFieldEnsemble {
        near: ensemble,
        geometry: *g,
        grid,
        fft,
        mean,
        edge_fraction,
    }
}
