//! Optical geometry of the 2f imaging setup and the square pixel lattice.
//!
//! A lens of focal length `f` maps a near-field transverse frequency `Q` onto
//! the detector position `rho = lambda f Q / 2 pi`. Every spatial frequency in
//! this crate is stored in rad/m and every temporal frequency in rad/s.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};

/// Smallest admissible ratio `pitch / waist`. Below it the overlap between
/// neighbouring pixel modes, `exp(-(l/w0)^2 / 2)`, is no longer negligible.
pub const MIN_PITCH_OVER_WAIST: f64 = 5.0;

/// A transverse 2-vector (position in m or frequency in rad/m).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

/// Wavelength, lens focal length and the waist of a single pixel mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalGeometry {
    wavelength: f64,
    focal_length: f64,
    waist_w0: f64,
}

impl OpticalGeometry {
    pub fn new(wavelength: f64, focal_length: f64, waist_w0: f64) -> Result<Self> {
        Ok(Self {
            wavelength: check_positive("wavelength", wavelength)?,
            focal_length: check_positive("focal_length", focal_length)?,
            waist_w0: check_positive("waist", waist_w0)?,
        })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    pub fn waist_w0(&self) -> f64 {
        self.waist_w0
    }

    /// `2 pi / (lambda f)`, the factor converting detector positions into
    /// near-field spatial frequencies.
    pub fn frequency_scale(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.wavelength * self.focal_length)
    }
}

/// Near-field frequency `Q = 2 pi rho / (lambda f)` probed at detector position `rho`.
pub fn far_frequency_of_position(rho: Vec2, g: &OpticalGeometry) -> Vec2 {
    rho * g.frequency_scale()
}

/// Far-field waist `lambda f / (2 pi w0)`; its inverse is the hole width `Delta q`.
pub fn effective_waist(g: &OpticalGeometry) -> f64 {
    1.0 / (g.frequency_scale() * g.waist_w0)
}

/// Square `N x N` array of identical emitters at pitch `l`, centred on the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelLattice {
    pitch_l: f64,
    side_count: usize,
}

impl PixelLattice {
    /// Rejects even `N` and pitches closer than [`MIN_PITCH_OVER_WAIST`] waists.
    pub fn new(pitch_l: f64, side_count: usize, waist_w0: f64) -> Result<Self> {
        check_positive("pitch", pitch_l)?;
        check_positive("waist", waist_w0)?;
        if side_count == 0 {
            return Err(Error::InvalidParameter {
                name: "side_count",
                value: 0.0,
                reason: "must be a positive odd integer".into(),
            });
        }
        if side_count % 2 == 0 {
            return Err(Error::EvenSideCount(side_count));
        }
        let ratio = pitch_l / waist_w0;
        if side_count > 1 && ratio < MIN_PITCH_OVER_WAIST {
            return Err(Error::PixelsOverlap {
                ratio,
                min: MIN_PITCH_OVER_WAIST,
            });
        }
        Ok(Self {
            pitch_l,
            side_count,
        })
    }

    pub fn pitch(&self) -> f64 {
        self.pitch_l
    }

    pub fn side_count(&self) -> usize {
        self.side_count
    }

    pub fn pixel_count(&self) -> usize {
        self.side_count * self.side_count
    }

    /// Largest index magnitude `(N - 1) / 2`.
    pub fn half_span(&self) -> i64 {
        (self.side_count as i64 - 1) / 2
    }

    /// Integer indices `(m_x, m_y)`, row-major with `m_y` outermost.
    pub fn indices(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let h = self.half_span();
        (-h..=h).flat_map(move |my| (-h..=h).map(move |mx| (mx, my)))
    }

    /// Pixel centres `rho_m = l (m_x, m_y)`.
    pub fn positions(&self) -> Vec<Vec2> {
        self.indices()
            .map(|(mx, my)| Vec2::new(mx as f64, my as f64) * self.pitch_l)
            .collect()
    }

    /// Full side length `(N - 1) l` spanned by the pixel centres.
    pub fn extent(&self) -> f64 {
        (self.side_count - 1) as f64 * self.pitch_l
    }
}

/// Far-field frequencies `Q_m` matching each pixel position, in [`PixelLattice::positions`] order.
pub fn lattice_far_frequencies(lat: &PixelLattice, g: &OpticalGeometry) -> Vec<Vec2> {
    lat.positions()
        .into_iter()
        .map(|rho| far_frequency_of_position(rho, g))
        .collect()
}

/// Width, spacing and overall range of the hole comb in the far-field spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleGeometry {
    /// Gaussian hole width `1 / w~0`.
    pub delta_q: f64,
    /// Spacing between adjacent holes along an axis.
    pub spacing_d: f64,
    /// Full frequency range `N d`.
    pub range_d: f64,
}

pub fn hole_geometry(lat: &PixelLattice, g: &OpticalGeometry) -> HoleGeometry {
    let spacing_d = g.frequency_scale() * lat.pitch();
    HoleGeometry {
        delta_q: 1.0 / effective_waist(g),
        spacing_d,
        range_d: spacing_d * lat.side_count() as f64,
    }
}
