//! Classical fourth-order Runge–Kutta streamline integration through a
//! sampled one-dimensional velocity field.
//!
//! The velocity is supplied as a callback returning the whole field on a
//! fixed [`UniformAxis`] at a requested evolution parameter. All particles
//! share the same step sequence, so each field evaluation serves every
//! particle; fields for a block of steps are computed in parallel.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::UniformAxis;

/// Default RK4 step bound along `z` (m).
pub const DEFAULT_MAX_STEP: f64 = 2e-3;

const BLOCK_STEPS: usize = 32;

/// Number of equal steps needed to cover `span` with steps no longer than `max_step`.
pub fn step_count(span: f64, max_step: f64) -> usize {
    ((span.abs() / max_step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Moves every live position from `t_from` to `t_to` (either direction).
///
/// A position whose interpolation stencil leaves the axis is marked dead and
/// left at its last in-grid value.
pub fn advance<F>(
    axis: &UniformAxis,
    velocity_at: &F,
    positions: &mut [f64],
    alive: &mut [bool],
    t_from: f64,
    t_to: f64,
    max_step: f64,
) -> Result<()>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    if !(max_step > 0.0) {
        return Err(Error::domain("integration step must be positive"));
    }
    if t_to == t_from {
        return Ok(());
    }
    let steps = step_count(t_to - t_from, max_step);
    let h = (t_to - t_from) / steps as f64;
    let mut done = 0;
    while done < steps {
        let block = BLOCK_STEPS.min(steps - done);
        let fields = (0..=2 * block)
            .into_par_iter()
            .map(|j| velocity_at(t_from + (done as f64 + 0.5 * j as f64) * h))
            .collect::<Result<Vec<_>>>()?;
        for (x, live) in positions.iter_mut().zip(alive.iter_mut()) {
            for s in 0..block {
                if !*live {
                    break;
                }
                let v = |field: &Vec<f64>, at: f64| axis.cubic(field, at);
                let stage = |x: f64| -> Option<f64> {
                    let k1 = v(&fields[2 * s], x)?;
                    let k2 = v(&fields[2 * s + 1], x + 0.5 * h * k1)?;
                    let k3 = v(&fields[2 * s + 1], x + 0.5 * h * k2)?;
                    let k4 = v(&fields[2 * s + 2], x + h * k3)?;
                    Some(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
                };
                match stage(*x) {
                    Some(next) if axis.contains(next) => *x = next,
                    _ => *live = false,
                }
            }
        }
        done += block;
    }
    Ok(())
}
