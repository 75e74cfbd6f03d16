//! Two-slit source field and its free paraxial evolution.
//!
//! The envelope obeys `i ∂_z u = -(1/2k) ∂²_x u`, the free Schrödinger
//! equation with `z` in the role of time and `θ = k_x/k` in the role of
//! momentum. A single slit beam `exp(-(x-c)²/w0²)` evolves in closed form as
//! `sqrt(q0/q) exp(i k (x-c)² / 2q)` with `q = z + q0`, `q0 = -i z_R`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Representation, Spectral, WavefieldGrid};
use crate::scene::SlitScene;

/// Near-to-far-field transition distance quoted alongside the experimental
/// parameters (m). The formula in [`near_far_transition`] gives ≈0.944 m for
/// the same parameters; both are kept.
pub const QUOTED_NEAR_FAR_TRANSITION: f64 = 0.77;

/// Edge amplitude (relative to peak) above which spectral propagation is
/// considered aliased.
pub const ALIASING_GUARD: f64 = 1e-6;

/// Closed-form two-slit envelope, unnormalized.
#[derive(Debug, Clone, Copy)]
pub struct TwoSlitField {
    k: f64,
    rayleigh: f64,
    centers: [f64; 2],
    amplitudes: [f64; 2],
}

impl TwoSlitField {
    pub fn new(scene: &SlitScene) -> Self {
        Self {
            k: scene.wavenumber(),
            rayleigh: scene.rayleigh_range(),
            centers: scene.slit_centers(),
            amplitudes: scene.slit_amplitudes,
        }
    }

    pub fn at(&self, x: f64, z: f64) -> Complex64 {
        let q0 = Complex64::new(0.0, -self.rayleigh);
        let q = q0 + z;
        let prefactor = (q0 / q).sqrt();
        let ik = Complex64::new(0.0, self.k);
        self.centers
            .iter()
            .zip(&self.amplitudes)
            .filter(|(_, &a)| a != 0.0)
            .map(|(&c, &a)| a * prefactor * (ik * (x - c).powi(2) / (2.0 * q)).exp())
            .sum()
    }
}

/// Closed-form evolution with the grid and normalization fixed once, for
/// repeated evaluation at many planes.
#[derive(Debug, Clone)]
pub struct FreeEvolution {
    source: TwoSlitField,
    inv_norm: f64,
    axis: Vec<f64>,
}

impl FreeEvolution {
    pub fn new(scene: &SlitScene) -> Result<Self> {
        scene.validate()?;
        let source = TwoSlitField::new(scene);
        let axis = scene.position_axis();
        let amps: Vec<_> = axis.iter().map(|&x| source.at(x, 0.0)).collect();
        let norm = WavefieldGrid::new(Representation::Position, axis.clone(), amps, 0.0)?.norm();
        if norm == 0.0 {
            return Err(Error::ZeroField);
        }
        Ok(Self {
            source,
            inv_norm: 1.0 / norm,
            axis,
        })
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn amplitudes(&self, z: f64) -> Vec<Complex64> {
        self.axis
            .iter()
            .map(|&x| self.source.at(x, z) * self.inv_norm)
            .collect()
    }

    pub fn field(&self, z: f64) -> Result<WavefieldGrid> {
        if !(z >= 0.0) {
            return Err(Error::domain(format!("propagation distance must be >= 0, got {z}")));
        }
        WavefieldGrid::new(Representation::Position, self.axis.clone(), self.amplitudes(z), z)
    }
}

/// A freely evolving field that can be sampled at any plane.
pub trait Evolution: Sync {
    fn wavenumber(&self) -> f64;
    fn field(&self, z: f64) -> Result<WavefieldGrid>;
}

impl Evolution for FreeEvolution {
    fn wavenumber(&self) -> f64 {
        self.source.k
    }

    fn field(&self, z: f64) -> Result<WavefieldGrid> {
        FreeEvolution::field(self, z)
    }
}

/// Exact spectral free evolution of an arbitrary position-space field.
///
/// Planes may lie before or after the starting plane; no aliasing guard is
/// applied, the caller owns the grid.
#[derive(Debug, Clone)]
pub struct SpectralEvolution {
    spectral: Spectral,
    wavenumber: f64,
    start: WavefieldGrid,
}

impl SpectralEvolution {
    pub fn new(field: &WavefieldGrid, wavenumber: f64) -> Result<Self> {
        let spectral = Spectral::for_field(field, wavenumber);
        Ok(Self {
            start: momentum_rep_with(field, wavenumber, &spectral)?,
            spectral,
            wavenumber,
        })
    }
}

impl Evolution for SpectralEvolution {
    fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    fn field(&self, z: f64) -> Result<WavefieldGrid> {
        let mut m = self.start.clone();
        propagate_momentum(&mut m, self.wavenumber, z - self.start.plane_z)?;
        position_rep_with(&m, self.wavenumber, &self.spectral)
    }
}

/// The normalized two-slit field at the slit plane (`z = 0`).
pub fn build_two_slit(scene: &SlitScene) -> Result<WavefieldGrid> {
    evolve_analytic(scene, 0.0)
}

/// Closed-form free evolution of both slit beams to plane `z`.
///
/// The superposition is divided by the discrete norm of the `z = 0` field
/// only; free evolution is unitary so no per-plane renormalization happens.
pub fn evolve_analytic(scene: &SlitScene, z: f64) -> Result<WavefieldGrid> {
    if !(z >= 0.0) {
        return Err(Error::domain(format!("propagation distance must be >= 0, got {z}")));
    }
    FreeEvolution::new(scene)?.field(z)
}

/// Free-space kernel `exp(-i k θ² dz / 2)` applied to a momentum-representation field.
pub fn propagate_momentum(field: &mut WavefieldGrid, wavenumber: f64, dz: f64) -> Result<()> {
    field.expect(Representation::Momentum)?;
    for (a, &theta) in field.amplitudes.iter_mut().zip(&field.axis) {
        *a *= Complex64::from_polar(1.0, -0.5 * wavenumber * theta * theta * dz);
    }
    field.plane_z += dz;
    Ok(())
}

fn edge_ratio(field: &WavefieldGrid) -> f64 {
    let n = field.len();
    let band = (n / 100).max(1);
    let peak = field.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    field.amplitudes[..band]
        .iter()
        .chain(&field.amplitudes[n - band..])
        .map(|a| a.norm())
        .fold(0.0, f64::max)
        / peak
}

/// Fails with [`Error::Aliasing`] when the field at the grid edges exceeds
/// [`ALIASING_GUARD`] of its peak.
pub fn check_aliasing(field: &WavefieldGrid) -> Result<()> {
    let ratio = edge_ratio(field);
    if ratio > ALIASING_GUARD {
        return Err(Error::Aliasing {
            z: field.plane_z,
            edge_ratio: ratio,
            limit: ALIASING_GUARD,
        });
    }
    Ok(())
}

/// Spectral (split-step) propagation of the slit field to `z` in `steps`
/// equal steps. With no potential each step is one exact kinetic kernel;
/// the field is checked for edge amplitude after every step.
pub fn evolve_split_step(scene: &SlitScene, z: f64, steps: usize) -> Result<WavefieldGrid> {
    if steps == 0 {
        return Err(Error::domain("split-step propagation needs at least one step"));
    }
    if !(z >= 0.0) {
        return Err(Error::domain(format!("propagation distance must be >= 0, got {z}")));
    }
    let k = scene.wavenumber();
    let spectral = scene.spectral();
    let start = build_two_slit(scene)?;
    if z == 0.0 {
        return Ok(start);
    }
    let mut momentum = momentum_rep_with(&start, k, &spectral)?;
    let h = z / steps as f64;
    let mut position = start;
    for step in 1..=steps {
        propagate_momentum(&mut momentum, k, h)?;
        position = position_rep_with(&momentum, k, &spectral)?;
        position.plane_z = step as f64 * h;
        check_aliasing(&position)?;
    }
    position.plane_z = z;
    Ok(position)
}

/// Unitary transform of a position field onto the transverse-angle axis `θ = k_x/k`.
pub fn momentum_rep(field: &WavefieldGrid, wavenumber: f64) -> Result<WavefieldGrid> {
    let spectral = Spectral::for_field(field, wavenumber);
    momentum_rep_with(field, wavenumber, &spectral)
}

pub(crate) fn momentum_rep_with(
    field: &WavefieldGrid,
    wavenumber: f64,
    spectral: &Spectral,
) -> Result<WavefieldGrid> {
    field.expect(Representation::Position)?;
    let scale = wavenumber.sqrt();
    let amps = spectral
        .to_wavenumber(&field.amplitudes)
        .into_iter()
        .map(|a| a * scale)
        .collect();
    let axis = spectral
        .wavenumber_axis()
        .into_iter()
        .map(|kx| kx / wavenumber)
        .collect();
    WavefieldGrid::new(Representation::Momentum, axis, amps, field.plane_z)
}

/// Inverse of [`momentum_rep`].
pub fn position_rep(field: &WavefieldGrid, wavenumber: f64) -> Result<WavefieldGrid> {
    let spectral = Spectral::for_field(field, wavenumber);
    position_rep_with(field, wavenumber, &spectral)
}

pub(crate) fn position_rep_with(
    field: &WavefieldGrid,
    wavenumber: f64,
    spectral: &Spectral,
) -> Result<WavefieldGrid> {
    field.expect(Representation::Momentum)?;
    let scale = 1.0 / wavenumber.sqrt();
    let spectrum: Vec<_> = field.amplitudes.iter().map(|a| a * scale).collect();
    let amps = spectral.to_position(&spectrum);
    WavefieldGrid::new(
        Representation::Position,
        spectral.position_axis(),
        amps,
        field.plane_z,
    )
}

/// `(s/2) / (λ / (π w/2))`: slit half-separation over the far-field
/// divergence angle of one slit beam.
pub fn near_far_transition(scene: &SlitScene) -> f64 {
    let divergence = scene.wavelength / (std::f64::consts::PI * scene.beam_diameter / 2.0);
    (scene.slit_separation / 2.0) / divergence
}
