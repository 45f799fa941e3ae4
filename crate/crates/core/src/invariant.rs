//! Invariant density of the full diffusion, basic projection, leafwise
//! dilation and the moment identities of the torus bundle.
//!
//! Both built-in metrics depend on `t` only, so the density does too and
//! `A*φ = 0` reduces to the periodic ODE
//! `(1/ρ) (ρ (φ' − κ φ))' = 0` with `ρ = √det g` and `κ = κ^t(t)`.
//! It is discretized in flux form on a uniform grid,
//!
//! ```text
//! J_{i+½} = ρ_{i+½} [ (φ_{i+1} − φ_i)/h − κ_{i+½} (φ_i + φ_{i+1})/2 ]
//! (Lφ)_i  = (J_{i+½} − J_{i−½}) / (2 h ρ_i),
//! ```
//!
//! which is second order and conserves `Σ ρ_i φ_i`.

use crate::atlas::Atlas;
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::fourier::FourierSeries;
use crate::metric::mean_curvature;
use crate::Vec3;

const SHIFT: f64 = 1e-12;
const INVERSE_ITERATIONS: usize = 3;
const DEFLATED_ITERATIONS: usize = 40;
/// Relative size of the second eigenvalue below which the kernel is
/// reported as non-simple.
const SIMPLICITY_TOL: f64 = 1e-8;

/// Periodic grid function on `t ∈ [0, 1)`, normalized by `Σ φ_i ρ_i h = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    /// Volume density `ρ(t_i)` used in the normalization.
    pub rho: Vec<f64>,
    /// `‖Lφ‖_∞` of the normalized solution.
    pub residual: f64,
    /// `‖L v₂‖ / ‖v₂‖` for the deflated second inverse-iteration vector.
    pub second_eigenvalue: f64,
    /// `‖L‖_∞`.
    pub operator_norm: f64,
}

impl GridDensity {
    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n() as f64
    }

    /// `∫ f φ dvol` by the periodic trapezoid rule.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let h = self.h();
        self.t
            .iter()
            .zip(self.phi.iter().zip(&self.rho))
            .map(|(&t, (&p, &r))| f(t) * p * r * h)
            .sum()
    }

    pub fn min(&self) -> f64 {
        self.phi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_i |φ_i / oracle(t_i) − 1|`.
    pub fn max_relative_error(&self, oracle: impl Fn(f64) -> f64) -> f64 {
        self.t
            .iter()
            .zip(&self.phi)
            .map(|(&t, &p)| (p / oracle(t) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Trigonometric interpolant of `log φ`.
    pub fn log_series(&self) -> FourierSeries {
        let logs: Vec<f64> = self.phi.iter().map(|p| p.ln()).collect();
        FourierSeries::interpolate(&logs)
    }
}

/// Periodic tridiagonal matrix: row `i` is
/// `lower[i] x_{i−1} + diag[i] x_i + upper[i] x_{i+1}` with wrap-around.
struct CyclicTridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl CyclicTridiagonal {
    fn len(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| self.lower[i] * x[(i + n - 1) % n] + self.diag[i] * x[i] + self.upper[i] * x[(i + 1) % n])
            .collect()
    }

    fn norm_inf(&self) -> f64 {
        (0..self.len())
            .map(|i| self.lower[i].abs() + self.diag[i].abs() + self.upper[i].abs())
            .fold(0.0, f64::max)
    }

    /// Solve `(M − σ I) x = r` by the Sherman–Morrison reduction to a
    /// plain tridiagonal system.
    fn solve_shifted(&self, sigma: f64, r: &[f64]) -> Vec<f64> {
        let n = self.len();
        let diag: Vec<f64> = self.diag.iter().map(|d| d - sigma).collect();
        let alpha = self.upper[n - 1]; // bottom-left
        let beta = self.lower[0]; // top-right
        let gamma = -diag[0];
        let mut bb = diag.clone();
        bb[0] -= gamma;
        bb[n - 1] -= alpha * beta / gamma;
        let x = thomas(&self.lower, &bb, &self.upper, r);
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = alpha;
        let z = thomas(&self.lower, &bb, &self.upper, &u);
        let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
        x.iter().zip(&z).map(|(a, b)| a - fact * b).collect()
    }
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], r: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = r[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        d[i] = (r[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn scale(x: &mut [f64]) {
    let s = norm_inf(x);
    x.iter_mut().for_each(|v| *v /= s);
}

fn adjoint_operator(atlas: &Atlas, n: usize) -> (CyclicTridiagonal, Vec<f64>) {
    let h = 1.0 / n as f64;
    let rho: Vec<f64> = (0..n).map(|i| atlas.volume_density(i as f64 * h)).collect();
    let mut op = CyclicTridiagonal {
        lower: vec![0.0; n],
        diag: vec![0.0; n],
        upper: vec![0.0; n],
    };
    for i in 0..n {
        let w = 1.0 / (2.0 * h * rho[i]);
        // right face i+½ and left face i−½
        let tr = (i as f64 + 0.5) * h;
        let tl = (i as f64 - 0.5) * h;
        let (rr, kr) = (atlas.volume_density(tr), atlas.mean_curvature_closed(tr).0);
        let (rl, kl) = (atlas.volume_density(tl), atlas.mean_curvature_closed(tl).0);
        // J_{i+½} = rr[(φ_{i+1} − φ_i)/h − kr(φ_i + φ_{i+1})/2]
        op.upper[i] = w * rr * (1.0 / h - kr / 2.0);
        op.diag[i] = w * (rr * (-1.0 / h - kr / 2.0) - rl * (1.0 / h - kl / 2.0));
        // −J_{i−½} = −rl[(φ_i − φ_{i−1})/h − kl(φ_{i−1} + φ_i)/2]
        op.lower[i] = w * rl * (1.0 / h + kl / 2.0);
    }
    (op, rho)
}

/// Kernel of the discretized adjoint generator on an `n`-point grid.
pub fn solve_invariant_density(atlas: &Atlas, n: usize) -> Result<GridDensity> {
    if n < 8 {
        return Err(Error::GridTooSmall(n));
    }
    let (op, rho) = adjoint_operator(atlas, n);
    let h = 1.0 / n as f64;
    let sigma = -SHIFT;

    let mut v = vec![1.0; n];
    for _ in 0..INVERSE_ITERATIONS {
        v = op.solve_shifted(sigma, &v);
        scale(&mut v);
    }
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let mass: f64 = v.iter().zip(&rho).map(|(a, r)| a * r * h).sum();
    v.iter_mut().for_each(|x| *x /= mass);

    // deflated inverse iteration for the eigenvalue next to zero; ρ is the
    // left kernel vector since L conserves Σ ρ_i φ_i
    let left_dot_v: f64 = rho.iter().zip(&v).map(|(a, b)| a * b).sum();
    let deflate = |x: &mut Vec<f64>| {
        let c = rho.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() / left_dot_v;
        x.iter_mut().zip(&v).for_each(|(a, b)| *a -= c * b);
    };
    let mut w: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 * h;
            (std::f64::consts::TAU * t).cos() + 0.5 * (std::f64::consts::TAU * t).sin()
        })
        .collect();
    deflate(&mut w);
    for _ in 0..DEFLATED_ITERATIONS {
        w = op.solve_shifted(sigma, &w);
        deflate(&mut w);
        scale(&mut w);
    }
    let second = norm_inf(&op.apply(&w)) / norm_inf(&w);
    let operator_norm = op.norm_inf();
    if second < SIMPLICITY_TOL * operator_norm {
        return Err(Error::NonSimpleKernel(second));
    }
    let residual = norm_inf(&op.apply(&v));
    Ok(GridDensity {
        t: (0..n).map(|i| i as f64 * h).collect(),
        phi: v,
        rho,
        residual,
        second_eigenvalue: second,
        operator_norm,
    })
}

/// Closed-form invariant density of an undilated built-in atlas,
/// `log φ = −(perturbation)` up to normalization.
///
/// For `e^{2f} dx² + dt²` the zero-flux solution is `e^{−f}`; for the torus
/// bundle the flux is constant and `φ = K e^{−u}`.
pub fn closed_form_log_density(atlas: &Atlas) -> Result<FourierSeries> {
    if !atlas.dilation().is_zero() {
        return Err(Error::InvalidParameter {
            key: "manifold",
            reason: "closed-form density is only known for undilated metrics".into(),
        });
    }
    let log_phi = atlas.perturbation().scaled(-1.0);
    let m = 4096;
    let mass: f64 = (0..m)
        .map(|i| {
            let t = i as f64 / m as f64;
            (log_phi.value(t)).exp() * atlas.volume_density(t)
        })
        .sum::<f64>()
        / m as f64;
    Ok(log_phi.add(&FourierSeries::constant(-mass.ln())))
}

/// Fiber average `h_b(t)` of a function at each height in `ts`, using an
/// `m`-point periodic rule per fiber direction. The fiber volume density is
/// constant on each fiber for the built-in metrics.
pub fn basic_projection(atlas: &Atlas, h: &dyn ScalarField, ts: &[f64], m: usize) -> Vec<f64> {
    let fiber_dim = atlas.n() - 1;
    let count = m.pow(fiber_dim as u32);
    ts.iter()
        .map(|&t| {
            let mut s = 0.0;
            for idx in 0..count {
                let mut lattice = [0.0; 2];
                let mut rest = idx;
                for c in lattice.iter_mut().take(fiber_dim) {
                    *c = (rest % m) as f64 / m as f64;
                    rest /= m;
                }
                s += h.value(&atlas.point_at(&lattice[..fiber_dim], t).coords);
            }
            s / count as f64
        })
        .collect()
}

/// Leafwise dilation by a basic function `ψ = exp(log_psi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationSpec {
    pub base: Atlas,
    pub log_psi: FourierSeries,
}

impl DilationSpec {
    pub fn new(base: Atlas, log_psi: FourierSeries) -> Result<Self> {
        if !log_psi.is_finite() {
            return Err(Error::NonPositiveDilation { t: f64::NAN, value: f64::NAN });
        }
        Ok(Self { base, log_psi })
    }

    /// Dilation by grid values of `ψ`, interpolated through `log ψ`.
    pub fn from_values(base: Atlas, values: &[f64]) -> Result<Self> {
        let n = values.len();
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositiveDilation {
                t: i as f64 / n as f64,
                value: v,
            });
        }
        let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        Self::new(base, FourierSeries::interpolate(&logs))
    }

    pub fn from_density(base: Atlas, phi: &GridDensity) -> Result<Self> {
        Self::from_values(base, &phi.phi)
    }
}

/// Atlas with leafwise block scaled by `ψ^{2/p}`; `dvol' = ψ dvol`.
pub fn dilate_metric(spec: &DilationSpec) -> Result<Atlas> {
    Ok(spec.base.with_leaf_dilation(&spec.log_psi))
}

/// `κ'^t = κ^t − (log ψ)'` at height `t`.
pub fn kappa_dilated(atlas: &Atlas, log_psi: &FourierSeries, t: f64) -> f64 {
    atlas.mean_curvature_closed(t).0 - log_psi.derivatives(t)[1]
}

/// Largest gap between [`kappa_dilated`] and the mean curvature computed
/// from the Gram–Schmidt frame of the dilated metric, over `samples` heights.
pub fn kappa_dilated_crosscheck(spec: &DilationSpec, samples: usize) -> Result<f64> {
    let dilated = dilate_metric(spec)?;
    let ti = dilated.dims().t_index();
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let t = (i as f64 + 0.5) / samples as f64;
        let mut z = Vec3::zeros();
        z[ti] = t;
        let direct = mean_curvature(&dilated, &z).components[ti];
        worst = worst.max((direct - kappa_dilated(&spec.base, &spec.log_psi, t)).abs());
    }
    Ok(worst)
}

/// `(‖δ_b κ_b‖_∞, ‖dκ_b‖_∞)` sampled at `samples` heights.
///
/// With `κ = κ^t(t) ∂_t` basic, `δκ = −(dκ^t/dt + κ^t (log ρ)')`. The
/// exterior derivative of `κ^t(t) dt` vanishes identically in one variable.
pub fn basic_harmonic_residual(atlas: &Atlas, samples: usize) -> (f64, f64) {
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let t = i as f64 / samples as f64;
        let (k, dk) = atlas.mean_curvature_closed(t);
        worst = worst.max((dk + k * atlas.log_volume_density_derivative(t)).abs());
    }
    (worst, 0.0)
}

/// Solve for the density on a dilated atlas and report `max |φ' − 1|`.
pub fn verify_phi_b_one(dilated: &Atlas, n: usize) -> Result<f64> {
    let phi = solve_invariant_density(dilated, n)?;
    Ok(phi.phi.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max))
}

/// One test function in the moment table.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub label: String,
    /// `∫_M F h dvol`.
    pub lhs: f64,
    /// `C · F₀`.
    pub rhs: f64,
    pub residual: f64,
}

/// Bin `[α, β]` of the Radon–Nikodym table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuRow {
    pub alpha: f64,
    pub beta: f64,
    /// `μ[α, β] = ∫_{α ≤ t ≤ β} dvol`.
    pub mu: f64,
    /// `(β − α) / μ[α, β]`.
    pub quotient: f64,
    /// `h(mid) / C`.
    pub target: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarriereReport {
    /// `C = ∫_M h dvol`.
    pub c: f64,
    pub moments: Vec<MomentRow>,
    pub mu_table: Vec<MuRow>,
}

/// Test functions `1, sin(2πmt), cos(2πmt)` for `m ≤ max_mode`.
pub fn standard_moment_functions(max_mode: usize) -> Vec<(String, FourierSeries)> {
    let mut out = vec![("1".to_string(), FourierSeries::constant(1.0))];
    for m in 1..=max_mode {
        let mut unit = vec![0.0; m];
        unit[m - 1] = 1.0;
        out.push((format!("sin{m}"), FourierSeries::new(0.0, Vec::new(), unit.clone())));
        out.push((format!("cos{m}"), FourierSeries::new(0.0, unit, Vec::new())));
    }
    out
}

/// Moment identities with `h(t) = (dt, κ)` on an atlas whose mean curvature
/// is basic: `∫ F h dvol = C F₀`, and the binned quotient
/// `(β − α)/μ[α, β]` against `h/C`.
///
/// Integrals use the periodic trapezoid rule with `n_quad` nodes; each bin
/// of the `μ` table is integrated with Simpson's rule on `sub` panels.
pub fn carriere_moment_check(
    atlas: &Atlas,
    functions: &[(String, FourierSeries)],
    n_quad: usize,
    bins: usize,
) -> Result<CarriereReport> {
    if n_quad < 8 {
        return Err(Error::GridTooSmall(n_quad));
    }
    if bins == 0 {
        return Err(Error::GridTooSmall(bins));
    }
    let h = |t: f64| atlas.mean_curvature_closed(t).0;
    let hq = 1.0 / n_quad as f64;
    let nodes: Vec<(f64, f64)> = (0..n_quad)
        .map(|i| {
            let t = i as f64 * hq;
            (t, h(t) * atlas.volume_density(t))
        })
        .collect();
    let c: f64 = nodes.iter().map(|(_, w)| w * hq).sum();
    let moments = functions
        .iter()
        .map(|(label, f)| {
            let lhs: f64 = nodes.iter().map(|(t, w)| f.value(*t) * w * hq).sum();
            let rhs = c * f.mean();
            MomentRow {
                label: label.clone(),
                lhs,
                rhs,
                residual: (lhs - rhs).abs(),
            }
        })
        .collect();
    let sub = 16;
    let mu_table = (0..bins)
        .map(|b| {
            let alpha = b as f64 / bins as f64;
            let beta = (b + 1) as f64 / bins as f64;
            let step = (beta - alpha) / sub as f64;
            let mut mu = 0.0;
            for j in 0..=sub {
                let w = if j == 0 || j == sub {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                mu += w * atlas.volume_density(alpha + j as f64 * step);
            }
            mu *= step / 3.0;
            let quotient = (beta - alpha) / mu;
            let target = h(0.5 * (alpha + beta)) / c;
            MuRow {
                alpha,
                beta,
                mu,
                quotient,
                target,
                residual: (quotient - target).abs(),
            }
        })
        .collect();
    Ok(CarriereReport { c, moments, mu_table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{BasicFourier, LeafWave, SumField};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    fn e1(a: f64) -> Atlas {
        Atlas::build_e1(FourierSeries::sines(vec![a])).unwrap()
    }
    fn e2(u: f64) -> Atlas {
        Atlas::build_e2([[2, 1], [1, 1]], FourierSeries::sines(vec![u])).unwrap()
    }

    #[test]
    fn cyclic_solver_matches_dense_product() {
        let n = 12;
        let m = CyclicTridiagonal {
            lower: (0..n).map(|i| 1.0 + 0.1 * i as f64).collect(),
            diag: (0..n).map(|i| -4.0 - 0.05 * i as f64).collect(),
            upper: (0..n).map(|i| 1.5 - 0.02 * i as f64).collect(),
        };
        let r: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = m.solve_shifted(0.3, &r);
        let back: Vec<f64> = m.apply(&x).iter().zip(&x).map(|(a, b)| a - 0.3 * b).collect();
        for (a, b) in back.iter().zip(&r) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn flat_and_constant_curvature_give_constant_density() {
        for a in [e1(0.0), e2(0.0)] {
            let d = solve_invariant_density(&a, 64).unwrap();
            for p in &d.phi {
                assert_abs_diff_eq!(*p, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn warped_torus_density_matches_closed_form() {
        let a = e1(0.3);
        let d = solve_invariant_density(&a, 256).unwrap();
        assert!(d.min() > 0.0);
        let err = d.max_relative_error(|t| (-0.3 * (TAU * t).sin()).exp());
        assert!(err < 1e-4, "{err}");
        let at_quarter = d.phi[64];
        assert_abs_diff_eq!(at_quarter, (-0.3f64).exp(), epsilon = 1e-4);
        assert!(solve_invariant_density(&a, 4).is_err());
    }

    #[test]
    fn closed_form_density_is_normalized() {
        for a in [e1(0.3), e2(0.2)] {
            let s = closed_form_log_density(&a).unwrap();
            assert_abs_diff_eq!(s.constant, 0.0, epsilon = 1e-14);
            assert_eq!(s.sin[0], -a.perturbation().sin[0]);
        }
    }

    #[test]
    fn projection_examples() {
        let a = e1(0.3);
        let ts = [0.0, 0.13, 0.5];
        let basic = BasicFourier::cos_mode(&a, 1);
        let p = basic_projection(&a, &basic, &ts, 16);
        for (t, v) in ts.iter().zip(&p) {
            assert_abs_diff_eq!(*v, (TAU * t).cos(), epsilon = 1e-14);
        }
        let wave = LeafWave { m: 1, amplitude: 1.0 };
        assert!(basic_projection(&a, &wave, &ts, 16).iter().all(|v| v.abs() < 1e-14));
        let sum = SumField(vec![Box::new(wave), Box::new(basic)]);
        for (t, v) in ts.iter().zip(basic_projection(&a, &sum, &ts, 16)) {
            assert_abs_diff_eq!(v, (TAU * t).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn dilation_examples() {
        let a = e1(0.3);
        let same = dilate_metric(&DilationSpec::new(a.clone(), FourierSeries::zero()).unwrap()).unwrap();
        assert_eq!(same.metric(&Vec3::new(0.1, 0.3, 0.0)), a.metric(&Vec3::new(0.1, 0.3, 0.0)));

        let spec = DilationSpec::new(a.clone(), closed_form_log_density(&a).unwrap()).unwrap();
        let flat = dilate_metric(&spec).unwrap();
        for t in [0.0, 0.2, 0.7] {
            let g = flat.metric(&Vec3::new(0.0, t, 0.0)).g;
            assert!((g - crate::Mat3::identity()).amax() < 1e-14);
            assert!(kappa_dilated(&a, &spec.log_psi, t).abs() < 1e-14);
        }
        assert!(kappa_dilated_crosscheck(&spec, 17).unwrap() < 1e-13);
        assert!(DilationSpec::from_values(a, &[1.0, 0.5, 0.0, 2.0]).is_err());
    }

    #[test]
    fn dilated_torus_bundle_has_constant_curvature() {
        let a = e2(0.2);
        let spec = DilationSpec::new(a.clone(), closed_form_log_density(&a).unwrap()).unwrap();
        let d = dilate_metric(&spec).unwrap();
        let l = a.carriere().unwrap().log_lambda;
        for t in [0.0, 0.3, 0.8] {
            assert_abs_diff_eq!(d.mean_curvature_closed(t).0, l, epsilon = 1e-13);
        }
        assert!(basic_harmonic_residual(&d, 64).0 < 1e-12);
        assert!(kappa_dilated_crosscheck(&spec, 9).unwrap() < 1e-12);
        let undilated = basic_harmonic_residual(&a, 64).0;
        assert!(undilated > 0.1);
    }

    #[test]
    fn moments_with_constant_curvature() {
        let a = e2(0.0);
        let rep = carriere_moment_check(&a, &standard_moment_functions(2), 64, 8).unwrap();
        let l = a.carriere().unwrap().log_lambda;
        assert_abs_diff_eq!(rep.c, l, epsilon = 1e-14);
        assert_abs_diff_eq!(rep.moments[0].lhs, rep.c, epsilon = 1e-14);
        for row in &rep.moments {
            assert!(row.residual < 1e-13);
        }
        for row in &rep.mu_table {
            assert_abs_diff_eq!(row.quotient, 1.0, epsilon = 1e-13);
            assert!(row.residual < 1e-13);
        }
    }
}
