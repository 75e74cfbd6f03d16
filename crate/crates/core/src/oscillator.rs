//! Harmonic oscillator in rotated quadratures `x_θ = x cos θ + (p/ω) sin θ`,
//! with `x_θ` as the ontic variable and `p_θ` as a weak value.
//!
//! Natural units `m = ħ = 1`. Fields use the `WavefieldGrid` position
//! representation over `x_θ`, with time stored in `plane_z`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{centered_axis, Representation, Spectral, WavefieldGrid};
use crate::ontology_x::{integrate_paths, velocity_field_with, VelocityField};
use crate::profile::WeakValueProfile;
use crate::trajectory::{seed_from_density, Theory, TrajectoryBundle};
use crate::wavepacket::Evolution;

pub const MAX_FOCK: u32 = 20;
pub const MAX_COHERENT_AMPLITUDE: f64 = 5.0;

/// Grid points and half-width (in units of `1/√ω`) of the quadrature axis.
const GRID_POINTS: usize = 2048;
const GRID_HALF_WIDTH: f64 = 16.0;

/// Largest RK4 step in units of `1/ω`.
const STEP_PER_PERIOD_UNIT: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaFrame {
    pub theta: f64,
    pub omega: f64,
}

impl ThetaFrame {
    pub fn new(theta: f64, omega: f64) -> Result<Self> {
        let f = Self { theta, omega };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::config(format!("omega must be positive, got {}", self.omega)));
        }
        if !self.theta.is_finite() {
            return Err(Error::config("theta must be finite"));
        }
        Ok(())
    }

    /// Quadrature grid wide enough for every admissible state.
    pub fn axis(&self) -> Vec<f64> {
        let half = GRID_HALF_WIDTH / self.omega.sqrt();
        centered_axis(GRID_POINTS, 2.0 * half / GRID_POINTS as f64)
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OscillatorState {
    Fock(u32),
    Coherent(Complex64),
}

impl OscillatorState {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Fock(n) if n > MAX_FOCK => {
                Err(Error::config(format!("Fock level {n} exceeds {MAX_FOCK}")))
            }
            Self::Coherent(a) if !(a.norm() <= MAX_COHERENT_AMPLITUDE) => Err(Error::config(format!(
                "coherent amplitude |alpha| = {} exceeds {MAX_COHERENT_AMPLITUDE}",
                a.norm()
            ))),
            _ => Ok(()),
        }
    }

    /// `e^{−iφ n̂}` applied to the state, up to a global phase for Fock states.
    pub fn rotated(&self, phi: f64) -> Self {
        match *self {
            Self::Fock(n) => Self::Fock(n),
            Self::Coherent(a) => Self::Coherent(a * Complex64::from_polar(1.0, -phi)),
        }
    }

    /// `⟨p̂_θ⟩` at time `t`.
    pub fn mean_conjugate(&self, frame: &ThetaFrame, t: f64) -> f64 {
        match *self {
            Self::Fock(_) => 0.0,
            Self::Coherent(a) => {
                let beta = a * Complex64::from_polar(1.0, -(frame.theta + frame.omega * t));
                (2.0 * frame.omega).sqrt() * beta.im
            }
        }
    }

    /// `⟨x̂_θ⟩` at time `t`.
    pub fn mean_quadrature(&self, frame: &ThetaFrame, t: f64) -> f64 {
        match *self {
            Self::Fock(_) => 0.0,
            Self::Coherent(a) => {
                let beta = a * Complex64::from_polar(1.0, -(frame.theta + frame.omega * t));
                (2.0 / frame.omega).sqrt() * beta.re
            }
        }
    }
}

/// Normalized Hermite functions `φ_n(√ω ξ)` scaled for frequency `ω`.
fn fock_amplitudes(n: u32, omega: f64, axis: &[f64]) -> Vec<f64> {
    let norm = (omega / std::f64::consts::PI).powf(0.25);
    axis.iter()
        .map(|&x| {
            let u = omega.sqrt() * x;
            let mut prev = 0.0;
            let mut cur = norm * (-u * u / 2.0).exp();
            for m in 0..n {
                let m = m as f64;
                let next = (2.0 / (m + 1.0)).sqrt() * u * cur - (m / (m + 1.0)).sqrt() * prev;
                prev = cur;
                cur = next;
            }
            cur
        })
        .collect()
}

/// `⟨x_θ = ξ| e^{−iĤt} |ψ⟩`: the position representation of the state
/// rotated by `θ + ωt`, times `e^{−iωt/2}`.
pub fn xtheta_wavefunction(state: &OscillatorState, frame: &ThetaFrame, t: f64) -> Result<WavefieldGrid> {
    state.validate()?;
    frame.validate()?;
    let omega = frame.omega;
    let phi = frame.theta + omega * t;
    let zero_point = Complex64::from_polar(1.0, -omega * t / 2.0);
    let axis = frame.axis();
    let amps = match *state {
        OscillatorState::Fock(n) => {
            let phase = zero_point * Complex64::from_polar(1.0, -(n as f64) * phi);
            fock_amplitudes(n, omega, &axis)
                .into_iter()
                .map(|a| phase * a)
                .collect()
        }
        OscillatorState::Coherent(_) => {
            let x0 = state.mean_quadrature(frame, t);
            let p0 = state.mean_conjugate(frame, t);
            let norm = (omega / std::f64::consts::PI).powf(0.25);
            axis.iter()
                .map(|&x| {
                    let d = x - x0;
                    zero_point
                        * norm
                        * (-omega * d * d / 2.0).exp()
                        * Complex64::from_polar(1.0, p0 * x - x0 * p0 / 2.0)
                })
                .collect()
        }
    };
    WavefieldGrid::new(Representation::Position, axis, amps, t)
}

/// `v_θ = Im(ψ'/ψ)` over `x_θ`.
pub fn guidance_velocity(state: &OscillatorState, frame: &ThetaFrame, t: f64) -> Result<VelocityField> {
    let f = xtheta_wavefunction(state, frame, t)?;
    velocity_field_with(&f, 1.0, &Spectral::for_field(&f, 1.0))
}

/// `⟨ξ|p̂|χ⟩ / ⟨ξ|χ⟩` for the rotated, evolved state `χ`, from the ladder
/// action `p̂ = i√(ω/2)(â† − â)`. Zero at nodes of a Fock state.
fn conjugate_ratio(state: &OscillatorState, frame: &ThetaFrame, t: f64, axis: &[f64]) -> Vec<Complex64> {
    let omega = frame.omega;
    match *state {
        OscillatorState::Fock(n) => {
            let centre = fock_amplitudes(n, omega, axis);
            let up = fock_amplitudes(n + 1, omega, axis);
            let down = if n > 0 {
                fock_amplitudes(n - 1, omega, axis)
            } else {
                vec![0.0; axis.len()]
            };
            let scale = Complex64::new(0.0, (omega / 2.0).sqrt());
            centre
                .iter()
                .zip(up.iter().zip(&down))
                .map(|(&c, (&u, &d))| {
                    if c == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        scale * (((n + 1) as f64).sqrt() * u - (n as f64).sqrt() * d) / c
                    }
                })
                .collect()
        }
        OscillatorState::Coherent(_) => {
            let x0 = state.mean_quadrature(frame, t);
            let p0 = state.mean_conjugate(frame, t);
            axis.iter()
                .map(|&x| Complex64::new(p0, omega * (x - x0)))
                .collect()
        }
    }
}

/// `Re[⟨x_θ|p̂_θ|ψ⟩ / ⟨x_θ|ψ⟩]`, with `p̂_θ` acting through the ladder
/// operators of the rotated state.
pub fn weak_conjugate_quadrature(
    state: &OscillatorState,
    frame: &ThetaFrame,
    t: f64,
) -> Result<WeakValueProfile> {
    let f = xtheta_wavefunction(state, frame, t)?;
    let value = conjugate_ratio(state, frame, t, &f.axis)
        .into_iter()
        .map(|r| r.re)
        .collect();
    Ok(WeakValueProfile::ideal(
        "x_theta",
        "p_theta_w",
        f.axis.clone(),
        value,
        f.density(),
    ))
}

/// Time evolution of one state seen in one frame.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureEvolution {
    pub state: OscillatorState,
    pub frame: ThetaFrame,
}

impl Evolution for QuadratureEvolution {
    fn wavenumber(&self) -> f64 {
        1.0
    }

    fn field(&self, t: f64) -> Result<WavefieldGrid> {
        xtheta_wavefunction(&self.state, &self.frame, t)
    }
}

/// θ-Bohm paths of `x_θ` seeded at `n` quantiles of the density at
/// `times[0]`, with `p_θ` weak values as the derived variable.
pub fn quadrature_trajectories(
    state: &OscillatorState,
    frame: &ThetaFrame,
    times: &[f64],
    n: usize,
) -> Result<TrajectoryBundle> {
    let first = *times
        .first()
        .ok_or_else(|| Error::domain("at least one time is required"))?;
    let evolution = QuadratureEvolution {
        state: *state,
        frame: *frame,
    };
    let seeds = seed_from_density(&evolution.field(first)?, n)?;
    let mut bundle = integrate_paths(&evolution, &seeds, first, times, STEP_PER_PERIOD_UNIT / frame.omega)?;
    bundle.theory = Theory::ThetaBohm;
    Ok(bundle)
}
