//! Sampled complex wavefields on a uniform transverse axis and the spectral
//! machinery shared by every module that differentiates or Fourier
//! transforms them.
//!
//! Position grids are always centered: `x_n = (n - N/2) dx`. The conjugate
//! wavenumber grid uses the same convention, `k_m = (m - N/2) dk` with
//! `dk = 2π / (N dx)`, so the discrete transforms below sample the continuous
//! unitary Fourier transform `(2π)^(-1/2) ∫ ψ(x) e^{-ikx} dx` without any
//! origin-dependent phase.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which variable the axis of a [`WavefieldGrid`] samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Transverse position `x` in metres.
    Position,
    /// Transverse angle `θ = k_x/|k|` in radians.
    Momentum,
}

impl Representation {
    pub fn axis_header(self) -> &'static str {
        match self {
            Representation::Position => "x [m]",
            Representation::Momentum => "theta [rad]",
        }
    }
}

/// Complex amplitudes sampled on a uniform, strictly increasing axis at one
/// propagation plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefieldGrid {
    pub representation: Representation,
    pub axis: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    /// Effective propagation distance (m). The oscillator module stores time here.
    pub plane_z: f64,
}

impl WavefieldGrid {
    pub fn new(
        representation: Representation,
        axis: Vec<f64>,
        amplitudes: Vec<Complex64>,
        plane_z: f64,
    ) -> Result<Self> {
        if axis.len() != amplitudes.len() {
            return Err(Error::config(format!(
                "axis has {} samples but amplitudes has {}",
                axis.len(),
                amplitudes.len()
            )));
        }
        if axis.len() < 2 {
            return Err(Error::config("a wavefield needs at least two samples"));
        }
        let step = axis[1] - axis[0];
        if !(step > 0.0) {
            return Err(Error::config("axis must be strictly increasing"));
        }
        let tol = 1e-9 * step.max(axis[axis.len() - 1].abs());
        for (i, w) in axis.windows(2).enumerate() {
            if ((w[1] - w[0]) - step).abs() > tol.max(1e-6 * step) {
                return Err(Error::config(format!("axis is not uniform at index {i}")));
            }
        }
        Ok(Self {
            representation,
            axis,
            amplitudes,
            plane_z,
        })
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.axis[1] - self.axis[0]
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn peak_density(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .fold(0.0, f64::max)
    }

    /// Discrete L2 norm by the trapezoid rule.
    pub fn norm(&self) -> f64 {
        trapezoid(&self.density(), self.spacing()).sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    pub(crate) fn expect(&self, rep: Representation) -> Result<()> {
        if self.representation == rep {
            Ok(())
        } else {
            Err(Error::Representation {
                expected: rep,
                found: self.representation,
            })
        }
    }

    /// `axis, re, im` with a unit-bearing header row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([self.representation.axis_header(), "re", "im"])?;
        for (x, a) in self.axis.iter().zip(&self.amplitudes) {
            w.write_record([fmt_f64(*x), fmt_f64(a.re), fmt_f64(a.im)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the output of [`write_csv`](Self::write_csv). The plane is not
    /// part of the CSV schema and must be supplied.
    pub fn read_csv<R: Read>(input: R, plane_z: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.get(0).unwrap_or_default().to_string();
        let representation = if header == Representation::Position.axis_header() {
            Representation::Position
        } else if header == Representation::Momentum.axis_header() {
            Representation::Momentum
        } else {
            return Err(Error::config(format!("unknown axis column {header:?}")));
        };
        let mut axis = Vec::new();
        let mut amplitudes = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let x: f64 = parse_field(&rec, 0)?;
            let re: f64 = parse_field(&rec, 1)?;
            let im: f64 = parse_field(&rec, 2)?;
            axis.push(x);
            amplitudes.push(Complex64::new(re, im));
        }
        Self::new(representation, axis, amplitudes, plane_z)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn parse_field(rec: &csv::StringRecord, i: usize) -> Result<f64> {
    rec.get(i)
        .ok_or_else(|| Error::config(format!("missing column {i}")))?
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::config(format!("column {i}: {e}")))
}

/// Shortest scientific form that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

/// Cumulative trapezoid integral, starting at 0.
pub fn cumulative_trapezoid(values: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * step * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Centered axis `(n - N/2) * step`.
pub fn centered_axis(n: usize, step: f64) -> Vec<f64> {
    let half = (n / 2) as f64;
    (0..n).map(|i| (i as f64 - half) * step).collect()
}

/// FFT plans and wavenumbers for one centered position grid.
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    dx: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Wavenumbers in FFT (unshifted) order, Nyquist bin zeroed.
    kx_fft: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("n", &self.n)
            .field("dx", &self.dx)
            .finish()
    }
}

impl Spectral {
    pub fn new(n: usize, dx: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let dk = Self::dk_for(n, dx);
        let kx_fft = (0..n)
            .map(|j| {
                if 2 * j < n {
                    j as f64 * dk
                } else if 2 * j == n {
                    0.0
                } else {
                    (j as f64 - n as f64) * dk
                }
            })
            .collect();
        Self {
            n,
            dx,
            forward,
            inverse,
            kx_fft,
        }
    }

    /// Plans for the position grid underlying `field` (either representation).
    pub fn for_field(field: &WavefieldGrid, wavenumber: f64) -> Self {
        let n = field.len();
        match field.representation {
            Representation::Position => Self::new(n, field.spacing()),
            Representation::Momentum => {
                let dk = field.spacing() * wavenumber;
                Self::new(n, 2.0 * std::f64::consts::PI / (n as f64 * dk))
            }
        }
    }

    fn dk_for(n: usize, dx: f64) -> f64 {
        2.0 * std::f64::consts::PI / (n as f64 * dx)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dk(&self) -> f64 {
        Self::dk_for(self.n, self.dx)
    }

    pub fn position_axis(&self) -> Vec<f64> {
        centered_axis(self.n, self.dx)
    }

    /// Centered wavenumber axis `k_m = (m - N/2) dk` (rad/m).
    pub fn wavenumber_axis(&self) -> Vec<f64> {
        centered_axis(self.n, self.dk())
    }

    fn alternate(buf: &mut [Complex64], offset: usize) {
        for (i, v) in buf.iter_mut().enumerate() {
            if (i + offset) % 2 == 1 {
                *v = -*v;
            }
        }
    }

    /// Samples of the unitary transform `ψ̃(k_m)` on the centered wavenumber axis.
    pub fn to_wavenumber(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut buf = psi.to_vec();
        Self::alternate(&mut buf, 0);
        self.forward.process(&mut buf);
        Self::alternate(&mut buf, self.n / 2);
        let scale = self.dx / (2.0 * std::f64::consts::PI).sqrt();
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }

    /// Inverse of [`to_wavenumber`](Self::to_wavenumber).
    pub fn to_position(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spectrum.to_vec();
        Self::alternate(&mut buf, 0);
        self.inverse.process(&mut buf);
        Self::alternate(&mut buf, self.n / 2);
        let scale = self.dk() / (2.0 * std::f64::consts::PI).sqrt();
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }

    /// Spectral first derivative `∂ψ/∂x`.
    pub fn derivative(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut buf = psi.to_vec();
        self.forward.process(&mut buf);
        let inv_n = 1.0 / self.n as f64;
        for (v, &k) in buf.iter_mut().zip(&self.kx_fft) {
            *v *= Complex64::new(0.0, k * inv_n);
        }
        self.inverse.process(&mut buf);
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(n: usize, dx: f64, center: f64, width: f64, tilt: f64) -> Vec<Complex64> {
        centered_axis(n, dx)
            .iter()
            .map(|&x| {
                Complex64::from_polar((-(x - center).powi(2) / width.powi(2)).exp(), tilt * x)
            })
            .collect()
    }

    #[test]
    fn rejects_nonuniform_axis() {
        let axis = vec![0.0, 1.0, 2.5];
        let amps = vec![Complex64::new(1.0, 0.0); 3];
        assert!(WavefieldGrid::new(Representation::Position, axis, amps, 0.0).is_err());
    }

    #[test]
    fn rejects_decreasing_axis() {
        let axis = vec![2.0, 1.0, 0.0];
        let amps = vec![Complex64::new(1.0, 0.0); 3];
        assert!(WavefieldGrid::new(Representation::Position, axis, amps, 0.0).is_err());
    }

    #[test]
    fn transform_round_trip_and_parseval() {
        let (n, dx) = (256, 0.05);
        let s = Spectral::new(n, dx);
        let psi = gaussian(n, dx, 0.7, 0.8, 3.0);
        let spec = s.to_wavenumber(&psi);
        let back = s.to_position(&spec);
        for (a, b) in psi.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
        let nx: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx;
        let nk: f64 = spec.iter().map(|a| a.norm_sqr()).sum::<f64>() * s.dk();
        assert!((nx - nk).abs() < 1e-12);
    }

    #[test]
    fn transform_matches_continuous_gaussian() {
        // FT of exp(-x²/w²) is (w/√2) exp(-k²w²/4).
        let (n, dx, w) = (512, 0.04, 1.1);
        let s = Spectral::new(n, dx);
        let spec = s.to_wavenumber(&gaussian(n, dx, 0.0, w, 0.0));
        for (k, v) in s.wavenumber_axis().iter().zip(&spec) {
            let exact = w / 2f64.sqrt() * (-k * k * w * w / 4.0).exp();
            assert!((v - exact).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn derivative_of_tilted_gaussian() {
        let (n, dx, w, t) = (512, 0.04, 1.3, 2.0);
        let s = Spectral::new(n, dx);
        let psi = gaussian(n, dx, 0.0, w, t);
        let d = s.derivative(&psi);
        for ((x, p), dp) in s.position_axis().iter().zip(&psi).zip(&d) {
            let exact = p * Complex64::new(-2.0 * x / (w * w), t);
            assert!((dp - exact).norm() < 1e-10);
        }
    }

    #[test]
    fn csv_round_trip() {
        let axis = centered_axis(8, 0.5);
        let amps: Vec<_> = (0..8).map(|i| Complex64::new(i as f64, -0.5 * i as f64)).collect();
        let g = WavefieldGrid::new(Representation::Momentum, axis, amps, 1.25).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = WavefieldGrid::read_csv(buf.as_slice(), 1.25).unwrap();
        assert_eq!(g, back);
    }
}
