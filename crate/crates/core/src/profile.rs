use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fmt_f64, parse_field};

/// Fraction of the peak density below which weak values are flagged.
pub const DENSITY_FLOOR: f64 = 1e-12;

/// Real weak values against a post-selection coordinate.
///
/// `spread` is the standard deviation across calcite tilts (zero for ideal
/// profiles) and `counts` the post-selected intensity behind each value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakValueProfile {
    pub axis_label: String,
    pub value_label: String,
    pub axis: Vec<f64>,
    pub value: Vec<f64>,
    pub spread: Vec<f64>,
    pub counts: Vec<f64>,
    /// Points whose counts fall below `DENSITY_FLOOR` of the maximum, or whose
    /// extraction was clamped.
    pub flagged: Vec<bool>,
}

impl WeakValueProfile {
    /// Ideal profile with zero spread; points under the density floor are flagged.
    pub fn ideal(
        axis_label: &str,
        value_label: &str,
        axis: Vec<f64>,
        value: Vec<f64>,
        counts: Vec<f64>,
    ) -> Self {
        let flagged = floor_flags(&counts);
        Self {
            axis_label: axis_label.into(),
            value_label: value_label.into(),
            spread: vec![0.0; axis.len()],
            axis,
            value,
            counts,
            flagged,
        }
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    /// `axis, value, spread, counts`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let spread = format!("spread {}", unit_of(&self.value_label));
        w.write_record([
            self.axis_label.as_str(),
            self.value_label.as_str(),
            spread.trim(),
            "counts",
        ])?;
        for i in 0..self.len() {
            w.write_record([
                fmt_f64(self.axis[i]),
                fmt_f64(self.value[i]),
                fmt_f64(self.spread[i]),
                fmt_f64(self.counts[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses [`write_csv`](Self::write_csv) output; flags are recomputed from counts.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.len() != 4 {
            return Err(Error::config(format!(
                "weak-value CSV needs 4 columns, found {}",
                headers.len()
            )));
        }
        let mut p = Self::ideal(&headers[0], &headers[1], vec![], vec![], vec![]);
        for rec in r.records() {
            let rec = rec?;
            p.axis.push(parse_field(&rec, 0)?);
            p.value.push(parse_field(&rec, 1)?);
            p.spread.push(parse_field(&rec, 2)?);
            p.counts.push(parse_field(&rec, 3)?);
        }
        p.flagged = floor_flags(&p.counts);
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn unit_of(label: &str) -> &str {
    label.find('[').map_or("", |i| &label[i..])
}

pub(crate) fn floor_flags(counts: &[f64]) -> Vec<bool> {
    let peak = counts.iter().copied().fold(0.0, f64::max);
    counts.iter().map(|&c| !(c > DENSITY_FLOOR * peak)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_values() {
        let p = WeakValueProfile {
            axis_label: "x [m]".into(),
            value_label: "theta_w [rad]".into(),
            axis: vec![-1e-3, 0.0, 1e-3],
            value: vec![1.5e-4, 0.0, -2.25e-4],
            spread: vec![0.0, 1e-6, 0.0],
            counts: vec![1.0, 1e-20, 2.0],
            flagged: vec![false, true, false],
        };
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x [m],theta_w [rad],spread [rad],counts\n"));
        let back = WeakValueProfile::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn floor_flags_relative_to_peak() {
        assert_eq!(floor_flags(&[1.0, 1e-13, 0.5, 0.0]), [false, true, false, true]);
    }
}
