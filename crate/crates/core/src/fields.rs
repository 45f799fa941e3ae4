//! Scalar test functions and basic 1-forms with exact derivatives.

use crate::atlas::Atlas;
use crate::fourier::FourierSeries;
use crate::{Mat3, Vec3};
use std::f64::consts::TAU;

/// A smooth function on the universal cover, with first and second
/// coordinate derivatives.
pub trait ScalarField: Send + Sync {
    fn value(&self, z: &Vec3) -> f64;
    fn gradient(&self, z: &Vec3) -> Vec3;
    fn hessian(&self, z: &Vec3) -> Mat3;
    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl ScalarField for Constant {
    fn value(&self, _: &Vec3) -> f64 {
        self.0
    }
    fn gradient(&self, _: &Vec3) -> Vec3 {
        Vec3::zeros()
    }
    fn hessian(&self, _: &Vec3) -> Mat3 {
        Mat3::zeros()
    }
    fn name(&self) -> String {
        format!("const({})", self.0)
    }
}

/// Basic function `h(t)` given by a Fourier series in the circle coordinate.
#[derive(Debug, Clone)]
pub struct BasicFourier {
    pub series: FourierSeries,
    t_index: usize,
}

impl BasicFourier {
    pub fn on(atlas: &Atlas, series: FourierSeries) -> Self {
        Self {
            series,
            t_index: atlas.dims().t_index(),
        }
    }

    /// `cos(2π m t)`.
    pub fn cos_mode(atlas: &Atlas, m: usize) -> Self {
        let mut cos = vec![0.0; m];
        cos[m - 1] = 1.0;
        Self::on(atlas, FourierSeries::new(0.0, cos, Vec::new()))
    }

    /// `sin(2π m t)`.
    pub fn sin_mode(atlas: &Atlas, m: usize) -> Self {
        let mut sin = vec![0.0; m];
        sin[m - 1] = 1.0;
        Self::on(atlas, FourierSeries::new(0.0, Vec::new(), sin))
    }
}

impl ScalarField for BasicFourier {
    fn value(&self, z: &Vec3) -> f64 {
        self.series.value(z[self.t_index])
    }
    fn gradient(&self, z: &Vec3) -> Vec3 {
        let mut g = Vec3::zeros();
        g[self.t_index] = self.series.derivatives(z[self.t_index])[1];
        g
    }
    fn hessian(&self, z: &Vec3) -> Mat3 {
        let mut h = Mat3::zeros();
        h[(self.t_index, self.t_index)] = self.series.derivatives(z[self.t_index])[2];
        h
    }
    fn name(&self) -> String {
        let s = &self.series;
        if s.constant == 0.0 && s.sin.iter().all(|&b| b == 0.0) && s.cos.iter().filter(|&&a| a != 0.0).count() == 1 {
            let m = s.cos.iter().position(|&a| a != 0.0).unwrap() + 1;
            if s.cos[m - 1] == 1.0 {
                return format!("cos{m}");
            }
        }
        if s.constant == 0.0 && s.cos.iter().all(|&a| a == 0.0) && s.sin.iter().filter(|&&b| b != 0.0).count() == 1 {
            let m = s.sin.iter().position(|&b| b != 0.0).unwrap() + 1;
            if s.sin[m - 1] == 1.0 {
                return format!("sin{m}");
            }
        }
        "basic_fourier".into()
    }
}

/// `amplitude · sin(2π m z_0)`: varies along the leaf coordinate only.
#[derive(Debug, Clone, Copy)]
pub struct LeafWave {
    pub m: usize,
    pub amplitude: f64,
}

impl ScalarField for LeafWave {
    fn value(&self, z: &Vec3) -> f64 {
        self.amplitude * (TAU * self.m as f64 * z[0]).sin()
    }
    fn gradient(&self, z: &Vec3) -> Vec3 {
        let w = TAU * self.m as f64;
        Vec3::new(self.amplitude * w * (w * z[0]).cos(), 0.0, 0.0)
    }
    fn hessian(&self, z: &Vec3) -> Mat3 {
        let w = TAU * self.m as f64;
        let mut h = Mat3::zeros();
        h[(0, 0)] = -self.amplitude * w * w * (w * z[0]).sin();
        h
    }
    fn name(&self) -> String {
        format!("leafwave{}", self.m)
    }
}

/// Sum of fields.
pub struct SumField(pub Vec<Box<dyn ScalarField>>);

impl ScalarField for SumField {
    fn value(&self, z: &Vec3) -> f64 {
        self.0.iter().map(|f| f.value(z)).sum()
    }
    fn gradient(&self, z: &Vec3) -> Vec3 {
        self.0.iter().map(|f| f.gradient(z)).sum()
    }
    fn hessian(&self, z: &Vec3) -> Mat3 {
        self.0.iter().map(|f| f.hessian(z)).sum()
    }
    fn name(&self) -> String {
        self.0.iter().map(|f| f.name()).collect::<Vec<_>>().join("+")
    }
}

/// Arbitrary closure with central-difference derivatives.
pub struct FdField<F> {
    pub f: F,
    pub step: f64,
    pub dim: usize,
    pub label: String,
}

impl<F: Fn(&Vec3) -> f64 + Send + Sync> FdField<F> {
    pub fn new(dim: usize, label: &str, f: F) -> Self {
        Self {
            f,
            step: 1e-4,
            dim,
            label: label.into(),
        }
    }
}

impl<F: Fn(&Vec3) -> f64 + Send + Sync> ScalarField for FdField<F> {
    fn value(&self, z: &Vec3) -> f64 {
        (self.f)(z)
    }
    fn gradient(&self, z: &Vec3) -> Vec3 {
        let mut g = Vec3::zeros();
        for i in 0..self.dim {
            let mut zp = *z;
            let mut zm = *z;
            zp[i] += self.step;
            zm[i] -= self.step;
            g[i] = ((self.f)(&zp) - (self.f)(&zm)) / (2.0 * self.step);
        }
        g
    }
    fn hessian(&self, z: &Vec3) -> Mat3 {
        let h = self.step;
        let mut out = Mat3::zeros();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let shifted = |si: f64, sj: f64| {
                    let mut w = *z;
                    w[i] += si;
                    w[j] += sj;
                    (self.f)(&w)
                };
                out[(i, j)] =
                    (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4.0 * h * h);
            }
        }
        out
    }
    fn name(&self) -> String {
        self.label.clone()
    }
}

/// Basic 1-form `h(t) dt`.
#[derive(Debug, Clone)]
pub struct BasicOneForm {
    pub series: FourierSeries,
    n: usize,
}

impl BasicOneForm {
    pub fn on(atlas: &Atlas, series: FourierSeries) -> Self {
        Self { series, n: atlas.n() }
    }

    /// `cos(2π m t) dt`.
    pub fn cos_mode(atlas: &Atlas, m: usize) -> Self {
        let mut cos = vec![0.0; m];
        cos[m - 1] = 1.0;
        Self::on(atlas, FourierSeries::new(0.0, cos, Vec::new()))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Coordinate components `θ_k` at `z`.
    pub fn components(&self, z: &Vec3) -> Vec3 {
        let mut c = Vec3::zeros();
        c[self.n - 1] = self.series.value(z[self.n - 1]);
        c
    }

    /// `h(t)` and its first two derivatives.
    pub fn coefficient(&self, t: f64) -> [f64; 3] {
        self.series.derivatives(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fd_field_matches_exact_derivatives() {
        let atlas = Atlas::build_e1(FourierSeries::zero()).unwrap();
        let exact = SumField(vec![
            Box::new(BasicFourier::cos_mode(&atlas, 1)),
            Box::new(LeafWave { m: 1, amplitude: 1.0 }),
        ]);
        let fd = FdField::new(2, "fd", |z: &Vec3| (TAU * z[1]).cos() + (TAU * z[0]).sin());
        let z = Vec3::new(0.3, 0.1, 0.0);
        assert_abs_diff_eq!(exact.value(&z), fd.value(&z), epsilon = 1e-15);
        assert!((exact.gradient(&z) - fd.gradient(&z)).norm() < 1e-6);
        assert!((exact.hessian(&z) - fd.hessian(&z)).norm() < 1e-5);
    }

    #[test]
    fn names() {
        let atlas = Atlas::build_e1(FourierSeries::zero()).unwrap();
        assert_eq!(BasicFourier::cos_mode(&atlas, 1).name(), "cos1");
        assert_eq!(BasicFourier::sin_mode(&atlas, 3).name(), "sin3");
    }
}
