//! Position-ontology (x-Bohm) guidance: the velocity field `dx/dz = θ(x, z)`,
//! streamlines through it, and momentum assigned along them as a weak value.
//!
//! The guidance velocity is the full phase gradient, `v = (1/k) ∂S/∂x`,
//! which equals the probability current over the density.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, DEFAULT_MAX_STEP};
use crate::grid::{Representation, Spectral, WavefieldGrid};
use crate::interp::UniformAxis;
use crate::profile::{floor_flags, WeakValueProfile};
use crate::scene::SlitScene;
use crate::trajectory::{Seed, Theory, TrajectoryBundle};
use crate::wavepacket::{Evolution, FreeEvolution};

pub use crate::trajectory::seed_from_density;

/// Guidance velocity (a transverse angle, rad) sampled at one plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityField {
    pub plane_z: f64,
    pub axis: Vec<f64>,
    pub v: Vec<f64>,
    pub density: Vec<f64>,
    /// Density below `DENSITY_FLOOR` of its peak; `v` is computed there but unreliable.
    pub below_floor: Vec<bool>,
}

impl VelocityField {
    fn assemble(field: &WavefieldGrid, v: Vec<f64>) -> Self {
        let density = field.density();
        Self {
            plane_z: field.plane_z,
            axis: field.axis.clone(),
            v,
            below_floor: floor_flags(&density),
            density,
        }
    }

    /// Cubic interpolation of `v`; `None` near the grid ends.
    pub fn at(&self, x: f64) -> Option<f64> {
        UniformAxis::from_samples(&self.axis).cubic(&self.v, x)
    }
}

fn check_field(field: &WavefieldGrid) -> Result<()> {
    field.expect(Representation::Position)?;
    if field.peak_density() == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(())
}

fn phase_gradient(psi: &[Complex64], dpsi: &[Complex64], wavenumber: f64) -> Vec<f64> {
    psi.iter()
        .zip(dpsi)
        .map(|(p, d)| {
            let rho = p.norm_sqr();
            if rho > 0.0 {
                (p.conj() * d).im / (rho * wavenumber)
            } else {
                0.0
            }
        })
        .collect()
}

/// `v(x) = Re[⟨x|k̂_x|u⟩ / ⟨x|u⟩] / k`, with `k̂_x = -i ∂_x` applied spectrally.
pub fn velocity_field(field: &WavefieldGrid, wavenumber: f64) -> Result<VelocityField> {
    velocity_field_with(field, wavenumber, &Spectral::for_field(field, wavenumber))
}

pub(crate) fn velocity_field_with(
    field: &WavefieldGrid,
    wavenumber: f64,
    spectral: &Spectral,
) -> Result<VelocityField> {
    check_field(field)?;
    let dpsi = spectral.derivative(&field.amplitudes);
    let v = phase_gradient(&field.amplitudes, &dpsi, wavenumber);
    Ok(VelocityField::assemble(field, v))
}

/// Probability current `j = (u* ∂u - u ∂u*) / 2ik`, with both derivatives taken
/// independently.
pub fn current_density(field: &WavefieldGrid, wavenumber: f64) -> Result<Vec<f64>> {
    check_field(field)?;
    let spectral = Spectral::for_field(field, wavenumber);
    let psi = &field.amplitudes;
    let conj: Vec<Complex64> = psi.iter().map(|a| a.conj()).collect();
    let dpsi = spectral.derivative(psi);
    let dconj = spectral.derivative(&conj);
    let two_ik = Complex64::new(0.0, 2.0 * wavenumber);
    Ok((0..psi.len())
        .map(|i| ((conj[i] * dpsi[i] - psi[i] * dconj[i]) / two_ik).re)
        .collect())
}

/// Velocity as current over density; agrees with [`velocity_field`] wherever
/// the density is above the floor.
pub fn velocity_from_current(field: &WavefieldGrid, wavenumber: f64) -> Result<VelocityField> {
    let j = current_density(field, wavenumber)?;
    let v = j
        .iter()
        .zip(&field.amplitudes)
        .map(|(j, a)| {
            let rho = a.norm_sqr();
            if rho > 0.0 {
                j / rho
            } else {
                0.0
            }
        })
        .collect();
    Ok(VelocityField::assemble(field, v))
}

/// Transverse momentum (as an angle `p/mc = θ`) post-selected on position.
///
/// In optical units this is numerically identical to the guidance velocity.
pub fn weak_momentum_profile(field: &WavefieldGrid, wavenumber: f64) -> Result<WeakValueProfile> {
    let vf = velocity_field(field, wavenumber)?;
    Ok(WeakValueProfile {
        axis_label: "x [m]".into(),
        value_label: "theta_w [rad]".into(),
        spread: vec![0.0; vf.axis.len()],
        flagged: vf.below_floor,
        axis: vf.axis,
        value: vf.v,
        counts: vf.density,
    })
}

/// x-Bohm paths of the two-slit field seeded at the first plane.
pub fn integrate_trajectories(
    scene: &SlitScene,
    seeds: &[Seed],
    planes: &[f64],
) -> Result<TrajectoryBundle> {
    let first = *planes
        .first()
        .ok_or_else(|| Error::domain("at least one plane is required"))?;
    integrate_paths(&FreeEvolution::new(scene)?, seeds, first, planes, DEFAULT_MAX_STEP)
}

/// RK4 streamlines of any evolution, seeded at `seed_plane` and reported at
/// `planes` (strictly increasing, on either side of the seed plane).
///
/// Velocity fields are recomputed spectrally at every RK stage plane. A path
/// whose interpolation stencil leaves the grid is flagged as truncated.
pub fn integrate_paths<E: Evolution>(
    evolution: &E,
    seeds: &[Seed],
    seed_plane: f64,
    planes: &[f64],
    max_step: f64,
) -> Result<TrajectoryBundle> {
    if planes.is_empty() {
        return Err(Error::domain("at least one plane is required"));
    }
    if planes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("planes must be strictly increasing"));
    }
    let k = evolution.wavenumber();
    let start = evolution.field(seed_plane)?;
    let spectral = Spectral::for_field(&start, k);
    let axis = UniformAxis::from_samples(&start.axis);
    let velocity_at = |z: f64| -> Result<Vec<f64>> {
        Ok(velocity_field_with(&evolution.field(z)?, k, &spectral)?.v)
    };

    let n = seeds.len();
    let mut ontic = vec![vec![f64::NAN; planes.len()]; n];
    let mut truncated = vec![false; n];
    let split = planes.partition_point(|&z| z < seed_plane);
    let forward: Vec<usize> = (split..planes.len()).collect();
    let backward: Vec<usize> = (0..split).rev().collect();
    for order in [forward, backward] {
        let mut xs: Vec<f64> = seeds.iter().map(|s| s.value).collect();
        let mut alive: Vec<bool> = xs.iter().map(|&x| axis.contains(x)).collect();
        let mut t = seed_plane;
        for j in order {
            flow::advance(&axis, &velocity_at, &mut xs, &mut alive, t, planes[j], max_step)?;
            for i in 0..n {
                if alive[i] {
                    ontic[i][j] = xs[i];
                } else {
                    truncated[i] = true;
                }
            }
            t = planes[j];
        }
    }

    let fields = planes
        .par_iter()
        .map(|&z| velocity_at(z))
        .collect::<Result<Vec<_>>>()?;
    let derived = ontic
        .iter()
        .map(|path| {
            path.iter()
                .zip(&fields)
                .map(|(&x, v)| axis.cubic(v, x).unwrap_or(f64::NAN))
                .collect()
        })
        .collect();

    Ok(TrajectoryBundle {
        theory: Theory::XBohm,
        seeds: seeds.to_vec(),
        planes: planes.to_vec(),
        ontic_paths: ontic,
        derived_paths: derived,
        truncated,
    })
}

/// Far-field check of one path: the angle a path should have if it came
/// straight from the nearer slit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteCheck {
    pub x: f64,
    pub theta: f64,
    pub predicted: f64,
    pub deviation: f64,
}

/// `|θ - (x - sgn(x) s/2) / z|` for a path at `(x, z)` with `|x| > s/2 + 2w`;
/// `None` inside that band.
pub fn asymptote_residual(scene: &SlitScene, x: f64, theta: f64, z: f64) -> Option<AsymptoteCheck> {
    let half = scene.slit_separation / 2.0;
    if !(x.abs() > half + 2.0 * scene.beam_diameter) || !(z > 0.0) || !theta.is_finite() {
        return None;
    }
    let predicted = (x - x.signum() * half) / z;
    Some(AsymptoteCheck {
        x,
        theta,
        predicted,
        deviation: (theta - predicted).abs(),
    })
}

/// [`asymptote_residual`] for every path at the bundle's final plane.
pub fn asymptote_deviation(
    bundle: &TrajectoryBundle,
    scene: &SlitScene,
) -> Vec<Option<AsymptoteCheck>> {
    let last = bundle.planes.len() - 1;
    let z = bundle.planes[last];
    bundle
        .ontic_paths
        .iter()
        .zip(&bundle.derived_paths)
        .map(|(x, th)| asymptote_residual(scene, x[last], th[last], z))
        .collect()
}
