//! Momentum-ontology (p-Bohm) picture for free propagation.
//!
//! With no potential the momentum-space current vanishes, so each ontic
//! angle is constant along `z`. Position is assigned as the weak value
//! `x_p(θ, z) = Re[⟨θ|x̂|ψ⟩ / ⟨θ|ψ⟩]`, which for free evolution of a real
//! initial field grows as `θ z` (the `x = p t / m` of a free particle).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Representation, Spectral, WavefieldGrid};
use crate::profile::{floor_flags, WeakValueProfile};
use crate::scene::SlitScene;
use crate::trajectory::{seed_from_density, Theory, TrajectoryBundle};
use crate::wavepacket::{momentum_rep_with, FreeEvolution};

/// Potential entering the momentum-space continuity equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Potential {
    Free,
    /// `V(x) = Σ c_n xⁿ`; not supported.
    Polynomial(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumCurrent {
    pub plane_z: f64,
    pub axis: Vec<f64>,
    pub j_p: Vec<f64>,
    pub density: Vec<f64>,
    pub below_floor: Vec<bool>,
}

impl MomentumCurrent {
    /// `j_p / |ψ̃|²`, zero under the density floor.
    pub fn velocity(&self) -> Vec<f64> {
        self.j_p
            .iter()
            .zip(&self.density)
            .zip(&self.below_floor)
            .map(|((j, d), low)| if *low { 0.0 } else { j / d })
            .collect()
    }
}

/// Current density along the momentum axis.
pub fn momentum_current(field: &WavefieldGrid, potential: &Potential) -> Result<MomentumCurrent> {
    field.expect(Representation::Momentum)?;
    match potential {
        Potential::Free => {
            let density = field.density();
            Ok(MomentumCurrent {
                plane_z: field.plane_z,
                axis: field.axis.clone(),
                j_p: vec![0.0; field.len()],
                below_floor: floor_flags(&density),
                density,
            })
        }
        Potential::Polynomial(_) => Err(Error::Unsupported(
            "momentum-space current is only implemented for free propagation".into(),
        )),
    }
}

/// `x_p(θ)` on the momentum grid of a position-representation field, using
/// `⟨θ|x̂|ψ⟩ = FT[x ψ]`.
pub fn weak_position_of(field: &WavefieldGrid, wavenumber: f64) -> Result<WeakValueProfile> {
    field.expect(Representation::Position)?;
    let spectral = Spectral::for_field(field, wavenumber);
    let m = momentum_rep_with(field, wavenumber, &spectral)?;
    if m.peak_density() == 0.0 {
        return Err(Error::ZeroField);
    }
    let x_psi: Vec<Complex64> = field
        .amplitudes
        .iter()
        .zip(&field.axis)
        .map(|(a, &x)| a * x)
        .collect();
    let numerator = spectral.to_wavenumber(&x_psi);
    let scale = wavenumber.sqrt();
    let value = numerator
        .iter()
        .zip(&m.amplitudes)
        .map(|(n, d)| {
            if d.norm_sqr() > 0.0 {
                (n * scale / d).re
            } else {
                0.0
            }
        })
        .collect();
    Ok(WeakValueProfile::ideal(
        "theta [rad]",
        "x_w [m]",
        m.axis.clone(),
        value,
        m.density(),
    ))
}

/// [`weak_position_of`] for the two-slit field at plane `z`.
pub fn weak_position_profile(scene: &SlitScene, z: f64) -> Result<WeakValueProfile> {
    let f = FreeEvolution::new(scene)?.field(z)?;
    weak_position_of(&f, scene.wavenumber())
}

/// `x_p` at arbitrary angles by direct summation of the transform, for
/// off-grid evaluation along ontic paths.
pub fn weak_position_at(field: &WavefieldGrid, wavenumber: f64, thetas: &[f64]) -> Result<Vec<f64>> {
    field.expect(Representation::Position)?;
    Ok(thetas
        .par_iter()
        .map(|&theta| {
            let kx = wavenumber * theta;
            let (mut num, mut den) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (a, &x) in field.amplitudes.iter().zip(&field.axis) {
                let t = a * Complex64::from_polar(1.0, -kx * x);
                den += t;
                num += t * x;
            }
            if den.norm_sqr() > 0.0 {
                (num / den).re
            } else {
                f64::NAN
            }
        })
        .collect())
}

/// p-Bohm paths: ontic angles seeded at quantiles of `|ψ̃(θ)|²` and held
/// fixed, with `x_p(θ_i, z)` as the derived position.
pub fn p_trajectories(scene: &SlitScene, planes: &[f64], n: usize) -> Result<TrajectoryBundle> {
    if planes.is_empty() {
        return Err(Error::domain("at least one plane is required"));
    }
    if planes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("planes must be strictly increasing"));
    }
    let k = scene.wavenumber();
    let evo = FreeEvolution::new(scene)?;
    let first = evo.field(planes[0])?;
    let m = momentum_rep_with(&first, k, &scene.spectral())?;
    let seeds = seed_from_density(&m, n)?;
    let thetas: Vec<f64> = seeds.iter().map(|s| s.value).collect();
    let per_plane = planes
        .iter()
        .map(|&z| weak_position_at(&evo.field(z)?, k, &thetas))
        .collect::<Result<Vec<_>>>()?;
    let ontic_paths = thetas.iter().map(|&t| vec![t; planes.len()]).collect();
    let derived_paths = (0..n)
        .map(|i| per_plane.iter().map(|xs| xs[i]).collect())
        .collect();
    Ok(TrajectoryBundle {
        theory: Theory::PBohm,
        seeds,
        planes: planes.to_vec(),
        ontic_paths,
        derived_paths,
        truncated: vec![false; n],
    })
}

/// Agreement of the two pictures at one plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldGap {
    /// Largest `|x_i - x_p,i|` over paths with the same quantile label (m).
    pub max_gap: f64,
    /// Span of the x-Bohm positions at the plane (m).
    pub extent: f64,
}

impl FarFieldGap {
    pub fn ratio(&self) -> f64 {
        self.max_gap / self.extent
    }
}

/// Compares x-Bohm ontic positions with p-Bohm derived positions, pairing
/// paths by quantile label, at a plane present in both bundles.
pub fn far_field_gap(
    xbohm: &TrajectoryBundle,
    pbohm: &TrajectoryBundle,
    z: f64,
) -> Result<FarFieldGap> {
    if xbohm.theory != Theory::XBohm || pbohm.theory != Theory::PBohm {
        return Err(Error::domain("far-field gap needs an x-Bohm and a p-Bohm bundle"));
    }
    let same_labels = xbohm.seeds.len() == pbohm.seeds.len()
        && xbohm
            .seeds
            .iter()
            .zip(&pbohm.seeds)
            .all(|(a, b)| a.quantile == b.quantile);
    if !same_labels {
        return Err(Error::domain("bundles must share quantile labels"));
    }
    let plane = |b: &TrajectoryBundle| {
        b.planes
            .iter()
            .position(|&p| p == z)
            .ok_or_else(|| Error::domain(format!("plane {z} m is missing from a bundle")))
    };
    let xs = xbohm.ontic_at(plane(xbohm)?);
    let xp = pbohm.derived_at(plane(pbohm)?);
    let max_gap = xs
        .iter()
        .zip(&xp)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FarFieldGap {
        max_gap,
        extent: hi - lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::trapezoid;
    use crate::wavepacket::{evolve_analytic, momentum_rep};

    fn scene() -> SlitScene {
        SlitScene::default()
    }

    #[test]
    fn free_current_vanishes() {
        let s = scene();
        let m = momentum_rep(&evolve_analytic(&s, 1.0).unwrap(), s.wavenumber()).unwrap();
        let c = momentum_current(&m, &Potential::Free).unwrap();
        assert!(c.j_p.iter().all(|&j| j == 0.0));
        assert!(c.velocity().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn potentials_are_unsupported() {
        let s = scene();
        let m = momentum_rep(&evolve_analytic(&s, 0.0).unwrap(), s.wavenumber()).unwrap();
        assert!(matches!(
            momentum_current(&m, &Potential::Polynomial(vec![0.0, 0.0, 1.0])),
            Err(Error::Unsupported(_))
        ));
        let f = evolve_analytic(&s, 0.0).unwrap();
        assert!(matches!(
            momentum_current(&f, &Potential::Free),
            Err(Error::Representation { .. })
        ));
    }

    #[test]
    fn momentum_density_satisfies_continuity() {
        let s = scene();
        let k = s.wavenumber();
        let dz = 1e-3;
        let a = momentum_rep(&evolve_analytic(&s, 2.0).unwrap(), k).unwrap();
        let b = momentum_rep(&evolve_analytic(&s, 2.0 + dz).unwrap(), k).unwrap();
        let peak = a.peak_density();
        for (x, y) in a.density().iter().zip(b.density()) {
            assert!(((y - x) / dz).abs() < 1e-9 * peak);
        }
    }

    #[test]
    fn slit_plane_weak_position_is_zero() {
        let p = weak_position_profile(&scene(), 0.0).unwrap();
        for (v, low) in p.value.iter().zip(&p.flagged) {
            assert!(*low || v.abs() < 1e-12);
        }
    }

    #[test]
    fn weak_position_matches_phase_slope() {
        // x_p = -dφ/dk_x for ψ̃ = |ψ̃| e^{iφ}; φ from direct summation at θ ± h.
        let s = scene();
        let k = s.wavenumber();
        let z = 3.5;
        let f = evolve_analytic(&s, z).unwrap();
        let theta = 1e-3;
        let transform = |t: f64| -> Complex64 {
            f.amplitudes
                .iter()
                .zip(&f.axis)
                .map(|(a, &x)| a * Complex64::from_polar(1.0, -k * t * x))
                .sum()
        };
        let h = 1e-8;
        let slope = -(transform(theta + h) / transform(theta - h)).arg() / (2.0 * h * k);
        assert!((slope - theta * z).abs() < 1e-6);
        let at = weak_position_at(&f, k, &[theta]).unwrap()[0];
        assert!((at - slope).abs() < 1e-6, "{at} {slope}");
        assert!((at - 3.5e-3).abs() < 1e-6);
        let grid = weak_position_of(&f, k).unwrap();
        for (t, v) in grid.axis.iter().zip(&grid.value) {
            if t.abs() < 1.2e-3 && (0.5 * k * t * s.slit_separation).cos().abs() > 0.05 {
                assert!((v - t * z).abs() < 1e-9, "{t}");
            }
        }
    }

    #[test]
    fn weak_position_averages_to_mean_position() {
        let s = SlitScene {
            slit_amplitudes: [1.0, 0.6],
            ..scene()
        };
        let k = s.wavenumber();
        let f = evolve_analytic(&s, 0.9).unwrap();
        let p = weak_position_of(&f, k).unwrap();
        let w: Vec<f64> = p.value.iter().zip(&p.counts).map(|(v, c)| v * c).collect();
        let lhs = trapezoid(&w, p.axis[1] - p.axis[0]);
        let d = f.density();
        let w: Vec<f64> = f.axis.iter().zip(&d).map(|(x, c)| x * c).collect();
        let rhs = trapezoid(&w, f.spacing());
        let width = crate::trajectory::rms_width(&f);
        assert!(rhs.abs() > 1e-4);
        assert!((lhs - rhs).abs() < 1e-6 * width, "{lhs} {rhs}");
    }

    #[test]
    fn ontic_angles_are_constant() {
        let b = p_trajectories(&scene(), &[0.0, 1.0, 3.5], 11).unwrap();
        for path in &b.ontic_paths {
            assert!(path.iter().all(|t| t.to_bits() == path[0].to_bits()));
        }
        for (path, x) in b.ontic_paths.iter().zip(&b.derived_paths) {
            for (xp, z) in x.iter().zip([0.0, 1.0, 3.5]) {
                assert!((xp - path[0] * z).abs() < 1e-9);
            }
        }
    }
}
