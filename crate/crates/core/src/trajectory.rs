use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, fmt_f64, parse_field, trapezoid, WavefieldGrid};
use crate::interp::UniformAxis;

/// Which variable is ontic (carried by the particle) in a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theory {
    /// Position is ontic; momentum (angle) is a weak value.
    XBohm,
    /// Momentum (angle) is ontic; position is a weak value.
    PBohm,
    /// Oscillator quadrature `x_θ` is ontic; `p_θ` is a weak value.
    ThetaBohm,
}

impl Theory {
    /// CSV header: seed id, quantile, evolution parameter, ontic, derived.
    pub fn csv_header(self) -> [&'static str; 5] {
        match self {
            Theory::XBohm => ["seed_id", "quantile", "z [m]", "x [m]", "theta [rad]"],
            Theory::PBohm => ["seed_id", "quantile", "z [m]", "theta [rad]", "x [m]"],
            Theory::ThetaBohm => ["seed_id", "quantile", "t", "x_theta", "p_theta"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub quantile: f64,
    pub value: f64,
}

/// Ontic and derived values of a family of paths, indexed `[seed][plane]`.
///
/// Paths that left the grid are marked `truncated` and hold NaN from the
/// first plane they could not reach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBundle {
    pub theory: Theory,
    pub seeds: Vec<Seed>,
    pub planes: Vec<f64>,
    pub ontic_paths: Vec<Vec<f64>>,
    pub derived_paths: Vec<Vec<f64>>,
    pub truncated: Vec<bool>,
}

impl TrajectoryBundle {
    pub fn ontic_at(&self, plane: usize) -> Vec<f64> {
        self.ontic_paths.iter().map(|p| p[plane]).collect()
    }

    pub fn derived_at(&self, plane: usize) -> Vec<f64> {
        self.derived_paths.iter().map(|p| p[plane]).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.theory.csv_header())?;
        for (id, seed) in self.seeds.iter().enumerate() {
            for (j, &z) in self.planes.iter().enumerate() {
                w.write_record([
                    id.to_string(),
                    fmt_f64(seed.quantile),
                    fmt_f64(z),
                    fmt_f64(self.ontic_paths[id][j]),
                    fmt_f64(self.derived_paths[id][j]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Parses [`write_csv`](Self::write_csv) output. Seed values are taken from
    /// the first plane and truncation is inferred from NaN entries.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        let theory = [Theory::XBohm, Theory::PBohm, Theory::ThetaBohm]
            .into_iter()
            .find(|t| headers.iter().eq(t.csv_header()))
            .ok_or_else(|| Error::config("unrecognized trajectory CSV header"))?;
        let mut b = TrajectoryBundle {
            theory,
            seeds: vec![],
            planes: vec![],
            ontic_paths: vec![],
            derived_paths: vec![],
            truncated: vec![],
        };
        for rec in r.records() {
            let rec = rec?;
            let id: usize = rec[0]
                .parse()
                .map_err(|e| Error::config(format!("seed_id: {e}")))?;
            let (q, z, o, d) = (
                parse_field(&rec, 1)?,
                parse_field(&rec, 2)?,
                parse_field(&rec, 3)?,
                parse_field(&rec, 4)?,
            );
            if id == b.seeds.len() {
                b.seeds.push(Seed { quantile: q, value: o });
                b.ontic_paths.push(vec![]);
                b.derived_paths.push(vec![]);
            } else if id + 1 != b.seeds.len() {
                return Err(Error::config("trajectory CSV rows are not grouped by seed"));
            }
            if id == 0 {
                b.planes.push(z);
            }
            b.ontic_paths[id].push(o);
            b.derived_paths[id].push(d);
        }
        if b.ontic_paths.iter().any(|p| p.len() != b.planes.len()) {
            return Err(Error::config("trajectory CSV has ragged paths"));
        }
        b.truncated = b
            .ontic_paths
            .iter()
            .map(|p| p.iter().any(|v| v.is_nan()))
            .collect();
        Ok(b)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Normalized cumulative distribution of `|amplitude|²` over the field axis.
pub fn density_cdf(field: &WavefieldGrid) -> Result<Vec<f64>> {
    let mut cdf = cumulative_trapezoid(&field.density(), field.spacing());
    let total = *cdf.last().unwrap_or(&0.0);
    if !(total > 0.0) {
        return Err(Error::ZeroField);
    }
    cdf.iter_mut().for_each(|c| *c /= total);
    Ok(cdf)
}

/// Axis value at which the `|amplitude|²` distribution reaches quantile `q`.
pub fn quantile_position(field: &WavefieldGrid, q: f64) -> Result<f64> {
    let cdf = density_cdf(field)?;
    Ok(UniformAxis::from_samples(&field.axis).invert_monotone(&cdf, q))
}

/// `n` seeds at quantiles `(i - 1/2)/n` of the field's density, by inverse
/// CDF (cumulative trapezoid with linear interpolation). Works in either
/// representation.
pub fn seed_from_density(field: &WavefieldGrid, n: usize) -> Result<Vec<Seed>> {
    if n == 0 {
        return Err(Error::domain("at least one seed is required"));
    }
    let cdf = density_cdf(field)?;
    let axis = UniformAxis::from_samples(&field.axis);
    Ok((1..=n)
        .map(|i| {
            let quantile = (i as f64 - 0.5) / n as f64;
            Seed {
                quantile,
                value: axis.invert_monotone(&cdf, quantile),
            }
        })
        .collect())
}

/// Root-mean-square width of the density about its mean.
pub fn rms_width(field: &WavefieldGrid) -> f64 {
    let d = field.density();
    let h = field.spacing();
    let total = trapezoid(&d, h);
    let weighted = |f: &dyn Fn(f64) -> f64| {
        let vals: Vec<f64> = field.axis.iter().zip(&d).map(|(&x, &p)| f(x) * p).collect();
        trapezoid(&vals, h) / total
    };
    let mean = weighted(&|x| x);
    weighted(&|x| (x - mean).powi(2)).sqrt()
}
