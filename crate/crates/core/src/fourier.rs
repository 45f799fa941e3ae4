//! Finite Fourier series on the unit circle and the warp profiles built
//! from them.

use rustfft::{num_complex::Complex, FftPlanner};
use std::f64::consts::TAU;

/// `constant + Σ_m cos[m-1]·cos(2πmt) + sin[m-1]·sin(2πmt)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierSeries {
    pub constant: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    /// Pure sine series, `Σ b_m sin(2πmt)`.
    pub fn sines(sin: Vec<f64>) -> Self {
        Self {
            constant: 0.0,
            cos: Vec::new(),
            sin,
        }
    }

    pub fn new(constant: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        Self { constant, cos, sin }
    }

    pub fn is_finite(&self) -> bool {
        self.constant.is_finite()
            && self.cos.iter().all(|c| c.is_finite())
            && self.sin.iter().all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.cos.iter().all(|&c| c == 0.0) && self.sin.iter().all(|&c| c == 0.0)
    }

    /// Highest mode present.
    pub fn order(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivatives(t)[0]
    }

    /// Value, first and second derivative at `t`.
    pub fn derivatives(&self, t: f64) -> [f64; 3] {
        let mut out = [self.constant, 0.0, 0.0];
        for m in 1..=self.order() {
            let a = self.cos.get(m - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(m - 1).copied().unwrap_or(0.0);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let w = TAU * m as f64;
            let (s, c) = (w * t).sin_cos();
            out[0] += a * c + b * s;
            out[1] += w * (-a * s + b * c);
            out[2] -= w * w * (a * c + b * s);
        }
        out
    }

    /// Mean over one period.
    pub fn mean(&self) -> f64 {
        self.constant
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            constant: self.constant * k,
            cos: self.cos.iter().map(|c| c * k).collect(),
            sin: self.sin.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len_c = self.cos.len().max(other.cos.len());
        let len_s = self.sin.len().max(other.sin.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        Self {
            constant: self.constant + other.constant,
            cos: (0..len_c).map(|i| get(&self.cos, i) + get(&other.cos, i)).collect(),
            sin: (0..len_s).map(|i| get(&self.sin, i) + get(&other.sin, i)).collect(),
        }
    }

    /// Trigonometric interpolant of equispaced samples `values[i] = v(i/N)`.
    ///
    /// For even `N` the Nyquist mode is dropped, so the interpolant is exact at
    /// the nodes only up to that mode's amplitude. Modes whose amplitude falls
    /// below `1e-16` of the largest one are truncated.
    pub fn interpolate(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::zero();
        }
        let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let half = (n - 1) / 2;
        let mut cos = Vec::with_capacity(half);
        let mut sin = Vec::with_capacity(half);
        for c in &buf[1..=half] {
            // X_m = Σ v_j e^{-2πi m j/N}; v(t) ≈ Σ a cos + b sin with a = 2Re/N, b = -2Im/N.
            cos.push(2.0 * c.re * scale);
            sin.push(-2.0 * c.im * scale);
        }
        let largest = cos
            .iter()
            .chain(sin.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let cutoff = largest * 1e-16;
        let mut last = 0;
        for m in 0..half {
            if cos[m].abs() > cutoff || sin[m].abs() > cutoff {
                last = m + 1;
            }
        }
        cos.truncate(last);
        sin.truncate(last);
        Self {
            constant: buf[0].re * scale,
            cos,
            sin,
        }
    }
}

/// `a(t) = slope·t + series(t)`: the logarithm of a metric scale factor.
///
/// A nonzero slope makes the factor non-periodic in `t`; the built-in torus
/// bundle compensates for it with the deck twist.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WarpProfile {
    pub slope: f64,
    pub series: FourierSeries,
}

impl WarpProfile {
    pub fn new(slope: f64, series: FourierSeries) -> Self {
        Self { slope, series }
    }

    pub fn flat() -> Self {
        Self::default()
    }

    pub fn derivatives(&self, t: f64) -> [f64; 3] {
        let [v, d1, d2] = self.series.derivatives(t);
        [v + self.slope * t, d1 + self.slope, d2]
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivatives(t)[0]
    }

    pub fn plus_series(&self, extra: &FourierSeries) -> Self {
        Self {
            slope: self.slope,
            series: self.series.add(extra),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn derivatives_of_single_sine() {
        let s = FourierSeries::sines(vec![0.3]);
        let t = 0.1;
        let [v, d1, d2] = s.derivatives(t);
        assert_abs_diff_eq!(v, 0.3 * (TAU * t).sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(d1, 0.3 * TAU * (TAU * t).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(d2, -0.3 * TAU * TAU * (TAU * t).sin(), epsilon = 1e-13);
    }

    #[test]
    fn interpolation_recovers_band_limited_series() {
        let s = FourierSeries::new(0.5, vec![0.1, 0.0, -0.02], vec![0.3, 0.05]);
        let n = 16;
        let samples: Vec<f64> = (0..n).map(|i| s.value(i as f64 / n as f64)).collect();
        let r = FourierSeries::interpolate(&samples);
        assert_abs_diff_eq!(r.constant, 0.5, epsilon = 1e-14);
        for t in [0.013, 0.4, 0.77] {
            assert_abs_diff_eq!(r.value(t), s.value(t), epsilon = 1e-13);
            assert_abs_diff_eq!(r.derivatives(t)[1], s.derivatives(t)[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn warp_slope_enters_value_and_first_derivative() {
        let w = WarpProfile::new(-2.0, FourierSeries::constant(1.0));
        assert_eq!(w.derivatives(0.25), [0.5, -2.0, 0.0]);
    }

    #[test]
    fn add_and_scale() {
        let a = FourierSeries::sines(vec![0.3]);
        let b = a.scaled(-1.0);
        assert!(a.add(&b).is_zero());
    }
}
