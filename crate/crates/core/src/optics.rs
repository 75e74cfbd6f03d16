//! Ray-transfer (ABCD) algebra for the three-lens relay that images an
//! effective propagation plane onto the camera, and the matching wave-optics
//! transforms for the two configurations used by the measurement pipelines.
//!
//! Rays are `(x, θ)` column vectors. The input plane of every system matrix
//! is the effective plane: the beam is back-propagated by `y` to lens 1
//! and then sent through the relay.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fmt_f64, Representation, WavefieldGrid};
use crate::scene::SlitScene;
use crate::wavepacket::{momentum_rep, momentum_rep_with, position_rep_with, FreeEvolution};
use crate::weakmeas::{
    apply_calcite_exact, extract_phase, prepare_diagonal, readout_circular, CalciteConfig,
    CoupledObservable,
};

/// Calibration fits use camera points brighter than this fraction of the peak.
const CALIBRATION_SUPPORT: f64 = 1e-3;

/// Tolerance for treating an ABCD entry as structurally zero.
const STRUCTURAL_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayMatrix {
    pub a: f64,
    /// m
    pub b: f64,
    /// 1/m
    pub c: f64,
    pub d: f64,
}

impl RayMatrix {
    pub const IDENTITY: RayMatrix = RayMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `self` followed by `next` along the beam, i.e. `next · self`.
    pub fn then(&self, next: &RayMatrix) -> RayMatrix {
        RayMatrix {
            a: next.a * self.a + next.b * self.c,
            b: next.a * self.b + next.b * self.d,
            c: next.c * self.a + next.d * self.c,
            d: next.c * self.b + next.d * self.d,
        }
    }

    pub fn apply(&self, x: f64, theta: f64) -> (f64, f64) {
        (self.a * x + self.b * theta, self.c * x + self.d * theta)
    }

    pub fn max_abs_diff(&self, other: &RayMatrix) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Free propagation over `d` (negative for back-propagation).
pub fn prop(d: f64) -> RayMatrix {
    RayMatrix {
        a: 1.0,
        b: d,
        c: 0.0,
        d: 1.0,
    }
}

/// Thin lens of focal length `f`.
pub fn lens(f: f64) -> RayMatrix {
    RayMatrix {
        a: 1.0,
        b: 0.0,
        c: -1.0 / f,
        d: 1.0,
    }
}

/// Product of `elements` listed in beam order (first element acts first).
pub fn compose(elements: &[RayMatrix]) -> RayMatrix {
    elements
        .iter()
        .fold(RayMatrix::IDENTITY, |acc, m| acc.then(m))
}

/// Distance before the focus of lens 1 at which the effective plane `y`
/// is imaged: `d = f1 / (1 + y/f1)`.
pub fn effective_plane_offset(y: f64, f1: f64) -> Result<f64> {
    if !(f1 > 0.0) || !(y > -f1) {
        return Err(Error::domain(format!("need f1 > 0 and y > -f1, got y={y}, f1={f1}")));
    }
    Ok(f1 / (1.0 + y / f1))
}

/// Transverse scale `f1 / (f1 + y)` from the effective plane to its image after lens 1.
pub fn magnification(y: f64, f1: f64) -> f64 {
    f1 / (f1 + y)
}

/// Inverse of [`effective_plane_offset`]: `y = f1 (f1 - d) / d`.
pub fn offset_to_distance(d: f64, f1: f64) -> Result<f64> {
    if !(d > 0.0) || !(f1 > 0.0) {
        return Err(Error::domain(format!("need d > 0 and f1 > 0, got d={d}, f1={f1}")));
    }
    Ok(f1 * (f1 - d) / d)
}

/// Focal lengths and overall length (lens 1 to camera) of the relay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LensSystem {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub total_length: f64,
}

impl Default for LensSystem {
    fn default() -> Self {
        Self {
            f1: 0.15,
            f2: 0.10,
            f3: 0.10,
            total_length: 0.55,
        }
    }
}

impl LensSystem {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f1", self.f1),
            ("f2", self.f2),
            ("f3", self.f3),
            ("total_length", self.total_length),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Back-propagation by `y`, lens 1, then `f1 - d` of free space.
    pub fn back_propagated_stage(&self, y: f64, d: f64) -> RayMatrix {
        compose(&[prop(-y), lens(self.f1), prop(self.f1 - d)])
    }

    /// [`back_propagated_stage`](Self::back_propagated_stage) at the imaging
    /// offset: `[[f1/(f1+y), 0], [-1/f1, (f1+y)/f1]]`.
    pub fn effective_plane_stage(&self, y: f64) -> Result<RayMatrix> {
        Ok(self.back_propagated_stage(y, effective_plane_offset(y, self.f1)?))
    }

    /// Effective-plane stage followed by lens 2 (focus on the image plane)
    /// and `d2` of free space. Its angle row depends on position only.
    pub fn lens2_stage(&self, y: f64, d2: f64) -> Result<RayMatrix> {
        Ok(compose(&[
            self.effective_plane_stage(y)?,
            prop(self.f2),
            lens(self.f2),
            prop(d2),
        ]))
    }

    /// Lens 2 to lens 3 spacing that keeps lens 3 one focal length before
    /// the camera within `total_length`.
    pub fn lens2_gap(&self, y: f64) -> Result<f64> {
        let d = effective_plane_offset(y, self.f1)?;
        Ok(self.total_length - (self.f1 - d) - self.f2 - self.f3)
    }

    /// Position post-selection configuration with an arbitrary offset `d`.
    pub fn xbohm_system_with(&self, y: f64, d: f64, d2: f64) -> RayMatrix {
        compose(&[
            self.back_propagated_stage(y, d),
            prop(self.f2),
            lens(self.f2),
            prop(d2),
            lens(self.f3),
            prop(self.f3),
        ])
    }

    /// Position post-selection: the effective plane imaged onto the camera
    /// (`b = 0`); `a` is the net magnification.
    pub fn xbohm_system(&self, y: f64) -> Result<RayMatrix> {
        let d = effective_plane_offset(y, self.f1)?;
        Ok(self.xbohm_system_with(y, d, self.lens2_gap(y)?))
    }

    /// Momentum post-selection: lens 2 one focal length past the focus of
    /// lens 1 and lens 3 at `f2 + f3`, so the focal plane of lens 1 is
    /// relayed onto the camera.
    pub fn pbohm_system(&self, y: f64) -> RayMatrix {
        compose(&[
            prop(-y),
            lens(self.f1),
            prop(self.f1 + self.f2),
            lens(self.f2),
            prop(self.f2 + self.f3),
            lens(self.f3),
            prop(self.f3),
        ])
    }

    /// Angle after lens 2 per unit effective-plane position (1/m). A calcite
    /// coupling to that angle with strength `ζ` couples to effective position
    /// with strength `ζ · |c|`.
    pub fn position_coupling(&self, y: f64) -> Result<f64> {
        Ok(self.lens2_stage(y, 0.0)?.c)
    }

    /// Effective-position coupling strength (1/m) for a calcite of strength `zeta`.
    pub fn position_coupling_strength(&self, zeta: f64, y: f64) -> Result<f64> {
        Ok(zeta * self.position_coupling(y)?.abs())
    }
}

/// One point of the lens-2 calibration curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    /// Lens 2 displacement towards lens 1 from the far-field origin (m).
    pub displacement: f64,
    pub effective_distance: f64,
}

/// `n` evenly spaced displacements in `[d_min, d_max]` and their effective distances.
pub fn calibration_curve(
    lenses: &LensSystem,
    d_min: f64,
    d_max: f64,
    n: usize,
) -> Result<Vec<CalibrationPoint>> {
    if n < 2 || !(d_min > 0.0) || !(d_max > d_min) {
        return Err(Error::domain("calibration curve needs n >= 2 and 0 < d_min < d_max"));
    }
    (0..n)
        .map(|i| {
            let d = d_min + (d_max - d_min) * i as f64 / (n - 1) as f64;
            Ok(CalibrationPoint {
                displacement: d,
                effective_distance: offset_to_distance(d, lenses.f1)?,
            })
        })
        .collect()
}

pub fn write_calibration_csv<W: Write>(points: &[CalibrationPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lens2_displacement_m", "effective_distance_m"])?;
    for p in points {
        w.write_record([fmt_f64(p.displacement), fmt_f64(p.effective_distance)])?;
    }
    w.flush()?;
    Ok(())
}

/// Wave-optics counterpart of `m` acting on a position field, for the two
/// structural cases the relay produces: imaging (`b = 0`) and Fourier
/// transforming (`a = 0`). The output is a position field on the camera
/// axis, sorted increasing.
pub fn apply_ray_matrix(field: &WavefieldGrid, m: &RayMatrix, wavenumber: f64) -> Result<WavefieldGrid> {
    field.expect(Representation::Position)?;
    let k = wavenumber;
    let (axis, amps): (Vec<f64>, Vec<Complex64>) = if m.b.abs() <= STRUCTURAL_ZERO {
        // out(X) = a^{-1/2} exp(i k c X² / 2a) in(X / a)
        let pre = Complex64::new(m.a, 0.0).sqrt().inv();
        field
            .axis
            .iter()
            .zip(&field.amplitudes)
            .map(|(&x, &u)| {
                let big = m.a * x;
                (big, u * pre * Complex64::from_polar(1.0, k * m.c * big * big / (2.0 * m.a)))
            })
            .unzip()
    } else if m.a.abs() <= STRUCTURAL_ZERO {
        // out(X) = (i b)^{-1/2} exp(i k d X² / 2b) ψ̃(X / b)
        let spectrum = momentum_rep(field, k)?;
        let pre = Complex64::new(0.0, m.b).sqrt().inv();
        spectrum
            .axis
            .iter()
            .zip(&spectrum.amplitudes)
            .map(|(&theta, &u)| {
                let big = m.b * theta;
                (big, u * pre * Complex64::from_polar(1.0, k * m.d * big * big / (2.0 * m.b)))
            })
            .unzip()
    } else {
        return Err(Error::Unsupported(
            "wave transform is only implemented for imaging (b = 0) or Fourier (a = 0) systems"
                .into(),
        ));
    };
    let (mut axis, mut amps) = (axis, amps);
    if axis.len() > 1 && axis[1] < axis[0] {
        axis.reverse();
        amps.reverse();
    }
    WavefieldGrid::new(Representation::Position, axis, amps, field.plane_z)
}

/// Weak and strong measurement of the same variable at effective plane `y`,
/// returning the fitted slope of extracted phase against the observable.
///
/// For transverse momentum this recovers `cfg.zeta`; for effective position
/// it recovers the relay-scaled strength `ζ f1/(f2 (f1 + y))` in 1/m.
pub fn simulated_zeta_calibration(
    scene: &SlitScene,
    lenses: &LensSystem,
    cfg: &CalciteConfig,
    y: f64,
) -> Result<f64> {
    cfg.validate()?;
    lenses.validate()?;
    let k = scene.wavenumber();
    let spectral = scene.spectral();
    let field = FreeEvolution::new(scene)?.field(y)?;
    let phi0 = cfg.phi0_list[0];
    let (camera, scale) = match cfg.coupled_observable {
        CoupledObservable::TransverseMomentum => {
            let pointer = prepare_diagonal(&momentum_rep_with(&field, k, &spectral)?);
            let m = lenses.pbohm_system(y);
            let camera = apply_calcite_exact(&pointer, cfg, phi0)?
                .map_components(|c| position_rep_with(c, k, &spectral))?
                .map_components(|c| apply_ray_matrix(c, &m, k))?;
            (camera, m.b)
        }
        CoupledObservable::EffectivePosition => {
            let effective = CalciteConfig {
                zeta: lenses.position_coupling_strength(cfg.zeta, y)?,
                ..cfg.clone()
            };
            let m = lenses.xbohm_system(y)?;
            let camera = apply_calcite_exact(&prepare_diagonal(&field), &effective, phi0)?
                .map_components(|c| apply_ray_matrix(c, &m, k))?;
            (camera, m.a)
        }
    };
    let (right, left) = readout_circular(&camera);
    let e = extract_phase(&right, &left, phi0);
    let counts: Vec<f64> = right.iter().zip(&left).map(|(r, l)| r + l).collect();
    let peak = counts.iter().copied().fold(0.0, f64::max);
    let points: Vec<(f64, f64)> = camera
        .axis
        .iter()
        .zip(&e.phase)
        .zip(&counts)
        .filter(|((_, p), &c)| c >= CALIBRATION_SUPPORT * peak && p.is_finite())
        .map(|((&x, &p), _)| (x / scale, p))
        .collect();
    least_squares_slope(&points)
}

fn least_squares_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::ZeroField);
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
