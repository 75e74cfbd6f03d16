use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{centered_axis, Spectral};

/// Physical and numerical parameters of the two-slit source.
///
/// `beam_diameter` is the 1/e² *intensity* diameter of each slit beam, so
/// the amplitude profile of one slit is `exp(-(x - c)² / w0²)` with
/// `w0 = beam_diameter / 2`. All lengths are in metres and the transverse
/// grid spans `[-grid_extent, grid_extent)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlitScene {
    pub wavelength: f64,
    pub slit_separation: f64,
    pub beam_diameter: f64,
    pub slit_amplitudes: [f64; 2],
    /// Half-width of the transverse grid.
    pub grid_extent: f64,
    pub grid_points: usize,
}

impl Default for SlitScene {
    fn default() -> Self {
        Self {
            wavelength: 915e-9,
            slit_separation: 2e-3,
            beam_diameter: 0.55e-3,
            slit_amplitudes: [1.0, 1.0],
            grid_extent: 25e-3,
            grid_points: 1 << 14,
        }
    }
}

impl SlitScene {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("slit_separation", self.slit_separation),
            ("beam_diameter", self.beam_diameter),
            ("grid_extent", self.grid_extent),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.grid_points < 2 || !self.grid_points.is_power_of_two() {
            return Err(Error::config(format!(
                "grid_points must be a power of two >= 2, got {}",
                self.grid_points
            )));
        }
        let [a1, a2] = self.slit_amplitudes;
        if !(a1 >= 0.0 && a2 >= 0.0) || a1 + a2 == 0.0 {
            return Err(Error::config(
                "slit amplitudes must be non-negative and not both zero",
            ));
        }
        let needed = self.slit_separation / 2.0 + 4.0 * self.beam_diameter;
        if self.grid_extent < needed {
            return Err(Error::config(format!(
                "grid_extent {:.3e} m does not cover ±(s/2 + 4w) = ±{needed:.3e} m",
                self.grid_extent
            )));
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// Amplitude 1/e radius `w0 = w/2`.
    pub fn waist(&self) -> f64 {
        self.beam_diameter / 2.0
    }

    /// Rayleigh range `k w0² / 2` of one slit beam.
    pub fn rayleigh_range(&self) -> f64 {
        0.5 * self.wavenumber() * self.waist().powi(2)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.grid_extent / self.grid_points as f64
    }

    pub fn position_axis(&self) -> Vec<f64> {
        centered_axis(self.grid_points, self.dx())
    }

    /// Transverse-angle axis conjugate to the position grid.
    pub fn angle_axis(&self) -> Vec<f64> {
        let k = self.wavenumber();
        self.spectral()
            .wavenumber_axis()
            .into_iter()
            .map(|kx| kx / k)
            .collect()
    }

    pub fn spectral(&self) -> Spectral {
        Spectral::new(self.grid_points, self.dx())
    }

    /// Slit centres, `[+s/2, -s/2]`, in the order of `slit_amplitudes`.
    pub fn slit_centers(&self) -> [f64; 2] {
        [self.slit_separation / 2.0, -self.slit_separation / 2.0]
    }
}
