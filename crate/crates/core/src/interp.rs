/// A uniform sample axis `start + i * step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAxis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformAxis {
    pub fn from_samples(axis: &[f64]) -> Self {
        Self {
            start: axis[0],
            step: axis[1] - axis[0],
            len: axis.len(),
        }
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    /// Keys cubic convolution (a = -1/2), third-order accurate and C¹.
    ///
    /// Returns `None` when `x` is too close to either end for the four-point
    /// stencil.
    pub fn cubic(&self, values: &[f64], x: f64) -> Option<f64> {
        debug_assert_eq!(values.len(), self.len);
        let (i, u) = self.cell(x)?;
        let (fm, f0, f1, f2) = (values[i - 1], values[i], values[i + 1], values[i + 2]);
        Some(
            f0 + 0.5
                * u
                * (f1 - fm
                    + u * (2.0 * fm - 5.0 * f0 + 4.0 * f1 - f2 + u * (3.0 * (f0 - f1) + f2 - fm))),
        )
    }

    /// Whether the cubic stencil around `x` lies inside the axis.
    pub fn contains(&self, x: f64) -> bool {
        self.cell(x).is_some()
    }

    fn cell(&self, x: f64) -> Option<(usize, f64)> {
        let t = (x - self.start) / self.step;
        if !t.is_finite() {
            return None;
        }
        let i = t.floor();
        if i < 1.0 || i + 2.0 > (self.len - 1) as f64 {
            return None;
        }
        Some((i as usize, t - i))
    }

    /// Piecewise-linear inverse of a non-decreasing sampled function.
    pub fn invert_monotone(&self, values: &[f64], target: f64) -> f64 {
        let j = values.partition_point(|&v| v < target);
        if j == 0 {
            return self.start;
        }
        if j >= values.len() {
            return self.at(self.len - 1);
        }
        let (lo, hi) = (values[j - 1], values[j]);
        let frac = if hi > lo { (target - lo) / (hi - lo) } else { 0.0 };
        self.at(j - 1) + frac * self.step
    }

    /// Piecewise-linear interpolation.
    pub fn linear(&self, values: &[f64], x: f64) -> f64 {
        let t = ((x - self.start) / self.step).clamp(0.0, (self.len - 1) as f64);
        let i = (t.floor() as usize).min(self.len - 2);
        let u = t - i as f64;
        values[i] * (1.0 - u) + values[i + 1] * u
    }
}
