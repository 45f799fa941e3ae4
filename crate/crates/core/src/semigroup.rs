//! Monte-Carlo transition semigroups on functions and basic 1-forms.

use crate::atlas::{Atlas, ChartPoint};
use crate::brownian::sample_brownian;
use crate::error::{Error, Result};
use crate::fields::{BasicFourier, BasicOneForm, ScalarField};
use crate::flow::{flow_stochastic_endpoint, IntegratorConfig};
use crate::frame::{descalarize_oneform, scalarize_oneform, AdaptedFrame};
use crate::metric::generator_apply;
use crate::stats::mean_stderr;
use crate::Vec3;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Which flow drives the estimate: `q` transverse Brownian components or
/// all `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemigroupMode {
    Transverse,
    Full,
}

impl SemigroupMode {
    pub fn name(&self) -> &'static str {
        match self {
            SemigroupMode::Transverse => "transverse",
            SemigroupMode::Full => "full",
        }
    }
}

/// Monte-Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    pub k: u32,
    pub dt: f64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    pub workers: Option<usize>,
}

impl McConfig {
    pub fn new(n_paths: usize, k: u32, seed: u64) -> Self {
        Self {
            n_paths,
            k,
            dt: 1e-3_f64.min((-(k as f64)).exp2()),
            seed,
            workers: None,
        }
    }

    fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.dt,
            k: self.k,
            stride: 1,
            reorthonormalize: true,
            wrap: false,
        }
    }
}

/// Mean and standard error of a scalar semigroup estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub t: f64,
    pub mode: SemigroupMode,
}

/// Estimate of `T_t θ` for a basic 1-form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneFormEstimate {
    /// Frame components `U_J = E[F_{θ,J}(R_t)]`.
    pub u: Vec3,
    pub u_stderr: Vec3,
    /// Coordinate components at the base point.
    pub components: Vec3,
    pub component_stderr: Vec3,
    pub n_paths: usize,
    pub seed: u64,
    pub t: f64,
}

/// Evaluate `per_path(i)` for every path index, in index order.
fn map_paths<T, F>(cfg: &McConfig, per_path: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if cfg.n_paths == 0 {
        return Err(Error::NoPaths);
    }
    let run = || (0..cfg.n_paths as u64).into_par_iter().map(&per_path).collect::<Result<Vec<T>>>();
    match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter {
                key: "workers",
                reason: e.to_string(),
            })?
            .install(run),
        None => run(),
    }
}

fn path_dim(atlas: &Atlas, mode: SemigroupMode) -> usize {
    match mode {
        SemigroupMode::Transverse => atlas.dims().q,
        SemigroupMode::Full => atlas.n(),
    }
}

fn endpoint(atlas: &Atlas, r0: &AdaptedFrame, t: f64, dim: usize, cfg: &McConfig, i: u64) -> Result<AdaptedFrame> {
    let path = sample_brownian(dim, cfg.k, t, cfg.seed, i)?;
    flow_stochastic_endpoint(atlas, r0, &path, &cfg.integrator())
}

/// `E[f(π R(t, r0, ·))]` starting from the Gram–Schmidt coordinate frame at `z`.
pub fn estimate_semigroup_fn(
    atlas: &Atlas,
    f: &dyn ScalarField,
    z: &ChartPoint,
    t: f64,
    mode: SemigroupMode,
    cfg: &McConfig,
) -> Result<McEstimate> {
    estimate_semigroup_fn_from(atlas, f, &AdaptedFrame::coordinate(atlas, *z), t, mode, cfg)
}

/// As [`estimate_semigroup_fn`] from an arbitrary adapted frame.
pub fn estimate_semigroup_fn_from(
    atlas: &Atlas,
    f: &dyn ScalarField,
    r0: &AdaptedFrame,
    t: f64,
    mode: SemigroupMode,
    cfg: &McConfig,
) -> Result<McEstimate> {
    if cfg.n_paths == 0 {
        return Err(Error::NoPaths);
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let (mean, stderr) = if t == 0.0 {
        (f.value(&r0.base.coords), 0.0)
    } else {
        let dim = path_dim(atlas, mode);
        let vals = map_paths(cfg, |i| Ok(f.value(&endpoint(atlas, r0, t, dim, cfg, i)?.base.coords)))?;
        mean_stderr(&vals)
    };
    Ok(McEstimate {
        mean,
        stderr,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        t,
        mode,
    })
}

/// Transverse-semigroup estimate of a basic 1-form from the coordinate frame at `z`.
pub fn estimate_semigroup_oneform(
    atlas: &Atlas,
    theta: &BasicOneForm,
    z: &ChartPoint,
    t: f64,
    cfg: &McConfig,
) -> Result<OneFormEstimate> {
    estimate_semigroup_oneform_from(atlas, theta, &AdaptedFrame::coordinate(atlas, *z), t, cfg)
}

pub fn estimate_semigroup_oneform_from(
    atlas: &Atlas,
    theta: &BasicOneForm,
    r0: &AdaptedFrame,
    t: f64,
    cfg: &McConfig,
) -> Result<OneFormEstimate> {
    if theta.dim() != atlas.n() {
        return Err(Error::NotBasic(format!(
            "form lives in dimension {}, manifold has {}",
            theta.dim(),
            atlas.n()
        )));
    }
    if cfg.n_paths == 0 {
        return Err(Error::NoPaths);
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let n = atlas.n();
    let samples: Vec<Vec3> = if t == 0.0 {
        vec![scalarize_oneform(&theta.components(&r0.base.coords), r0).values]
    } else {
        let q = atlas.dims().q;
        map_paths(cfg, |i| {
            let r = endpoint(atlas, r0, t, q, cfg, i)?;
            Ok(scalarize_oneform(&theta.components(&r.base.coords), &r).values)
        })?
    };
    let dual = r0.dual().f;
    let coords: Vec<Vec3> = samples.iter().map(|s| dual.transpose() * s).collect();
    let mut out = OneFormEstimate {
        u: Vec3::zeros(),
        u_stderr: Vec3::zeros(),
        components: Vec3::zeros(),
        component_stderr: Vec3::zeros(),
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        t,
    };
    for j in 0..n {
        let col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
        (out.u[j], out.u_stderr[j]) = mean_stderr(&col);
        let col: Vec<f64> = coords.iter().map(|s| s[j]).collect();
        (out.components[j], out.component_stderr[j]) = mean_stderr(&col);
    }
    debug_assert!(
        (descalarize_oneform(&crate::frame::OneFormScalarization { values: out.u }, r0) - out.components).amax()
            < 1e-9 * (1.0 + out.components.amax())
    );
    Ok(out)
}

/// Input to the difference-quotient generator check.
#[derive(Debug, Clone, Copy)]
pub enum GeneratorInput<'a> {
    Function(&'a BasicFourier),
    OneForm(&'a BasicOneForm),
}

/// One row of [`generator_fd_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdRow {
    pub t: f64,
    pub quotient: f64,
    pub stderr: f64,
    pub target: f64,
    pub bias_bound: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `sup |h''''|` of a Fourier series, bounded termwise.
fn fourth_derivative_bound(s: &crate::fourier::FourierSeries) -> f64 {
    (1..=s.order())
        .map(|m| {
            let a = s.cos.get(m - 1).copied().unwrap_or(0.0).abs();
            let b = s.sin.get(m - 1).copied().unwrap_or(0.0).abs();
            (TAU * m as f64).powi(4) * (a + b)
        })
        .sum()
}

/// Compare `(P_t u − u)/t` with the generator applied to `u`, for basic
/// input on a manifold with flat transverse model.
///
/// For such input the generator is `½ d²/dt²` on the coefficient `h(t)`, so
/// the Taylor remainder of the semigroup is bounded by `½ t sup|¼ h''''|`.
/// Functions use the full flow and `A`; 1-forms use the transverse flow and
/// the `dt` component of `½Δ⊕θ`. Each row passes when the residual is below
/// `3σ + bias`.
pub fn generator_fd_check(
    atlas: &Atlas,
    input: GeneratorInput<'_>,
    z: &ChartPoint,
    times: &[f64],
    cfg: &McConfig,
) -> Result<Vec<FdRow>> {
    if atlas.transverse_model() != crate::atlas::TransverseModel::FlatCircle {
        return Err(Error::InvalidParameter {
            key: "manifold",
            reason: "difference-quotient oracle needs a flat transverse model".into(),
        });
    }
    let ti = atlas.dims().t_index();
    let (series, value0, target) = match input {
        GeneratorInput::Function(f) => (&f.series, f.value(&z.coords), generator_apply(atlas, f, &z.coords)),
        GeneratorInput::OneForm(th) => {
            let d = th.coefficient(z.coords[ti]);
            (&th.series, d[0], 0.5 * d[2])
        }
    };
    let bound = 0.25 * fourth_derivative_bound(series);
    times
        .iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Err(Error::NegativeTime(t));
            }
            let (mean, se) = match input {
                GeneratorInput::Function(f) => {
                    let e = estimate_semigroup_fn(atlas, f, z, t, SemigroupMode::Full, cfg)?;
                    (e.mean, e.stderr)
                }
                GeneratorInput::OneForm(th) => {
                    let e = estimate_semigroup_oneform(atlas, th, z, t, cfg)?;
                    (e.components[ti], e.component_stderr[ti])
                }
            };
            let quotient = (mean - value0) / t;
            let stderr = se / t;
            let bias_bound = 0.5 * t * bound;
            let residual = (quotient - target).abs();
            let tolerance = 3.0 * stderr + bias_bound;
            Ok(FdRow {
                t,
                quotient,
                stderr,
                target,
                bias_bound,
                residual,
                tolerance,
                pass: residual < tolerance,
            })
        })
        .collect()
}

/// Estimates of the same basic function under two metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricComparison {
    pub first: McEstimate,
    pub second: McEstimate,
    pub difference: f64,
    pub combined_stderr: f64,
}

impl MetricComparison {
    pub fn consistent(&self, sigmas: f64) -> bool {
        self.difference.abs() <= sigmas * self.combined_stderr
    }
}

/// Transverse semigroups of two atlases with the same transverse metric,
/// applied to a basic function at the same coordinates and seed.
pub fn metric_independence_check(
    first: &Atlas,
    second: &Atlas,
    f: &dyn ScalarField,
    z: &ChartPoint,
    t: f64,
    cfg: &McConfig,
) -> Result<MetricComparison> {
    first.same_transverse_metric(second).map_err(Error::TransverseMismatch)?;
    let a = estimate_semigroup_fn(first, f, z, t, SemigroupMode::Transverse, cfg)?;
    let b = estimate_semigroup_fn(second, f, z, t, SemigroupMode::Transverse, cfg)?;
    Ok(MetricComparison {
        first: a,
        second: b,
        difference: a.mean - b.mean,
        combined_stderr: (a.stderr * a.stderr + b.stderr * b.stderr).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Constant, LeafWave};
    use crate::fourier::FourierSeries;

    fn e1(a: f64) -> Atlas {
        Atlas::build_e1(FourierSeries::sines(vec![a])).unwrap()
    }

    #[test]
    fn time_zero_and_constants_are_exact() {
        let a = e1(0.3);
        let z = ChartPoint::from_slice(&[0.2, 0.35]);
        let f = BasicFourier::cos_mode(&a, 1);
        let cfg = McConfig::new(50, 4, 1);
        let e = estimate_semigroup_fn(&a, &f, &z, 0.0, SemigroupMode::Full, &cfg).unwrap();
        assert_eq!(e.mean, f.value(&z.coords));
        assert_eq!(e.stderr, 0.0);
        let e = estimate_semigroup_fn(&a, &Constant(1.0), &z, 0.2, SemigroupMode::Full, &cfg).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        assert!(matches!(
            estimate_semigroup_fn(&a, &f, &z, 0.1, SemigroupMode::Full, &McConfig::new(0, 4, 1)),
            Err(Error::NoPaths)
        ));
        assert!(estimate_semigroup_fn(&a, &f, &z, -0.1, SemigroupMode::Full, &cfg).is_err());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let a = e1(0.3);
        let z = ChartPoint::from_slice(&[0.2, 0.35]);
        let f = LeafWave { m: 1, amplitude: 1.0 };
        let mut cfg = McConfig::new(64, 4, 9);
        cfg.workers = Some(1);
        let one = estimate_semigroup_fn(&a, &f, &z, 0.1, SemigroupMode::Full, &cfg).unwrap();
        cfg.workers = Some(4);
        let four = estimate_semigroup_fn(&a, &f, &z, 0.1, SemigroupMode::Full, &cfg).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn oneform_at_time_zero_is_the_scalarization() {
        let a = e1(0.3);
        let z = ChartPoint::from_slice(&[0.2, 0.1]);
        let th = BasicOneForm::cos_mode(&a, 1);
        let e = estimate_semigroup_oneform(&a, &th, &z, 0.0, &McConfig::new(10, 4, 1)).unwrap();
        let r = AdaptedFrame::coordinate(&a, z);
        assert_eq!(e.u, scalarize_oneform(&th.components(&z.coords), &r).values);
        assert!((e.components - th.components(&z.coords)).amax() < 1e-15);
    }

    #[test]
    fn parallel_form_is_preserved_on_flat_torus() {
        let a = e1(0.0);
        let th = BasicOneForm::on(&a, FourierSeries::constant(1.0));
        let z = ChartPoint::from_slice(&[0.2, 0.1]);
        let e = estimate_semigroup_oneform(&a, &th, &z, 0.3, &McConfig::new(200, 4, 1)).unwrap();
        assert!((e.components - Vec3::new(0.0, 1.0, 0.0)).amax() < 1e-12);
    }

    #[test]
    fn mismatched_transverse_metrics_are_rejected() {
        let a = e1(0.3);
        let b = Atlas::build_e2([[2, 1], [1, 1]], FourierSeries::zero()).unwrap();
        let z = ChartPoint::from_slice(&[0.2, 0.1]);
        let f = BasicFourier::cos_mode(&a, 1);
        let r = metric_independence_check(&a, &b, &f, &z, 0.1, &McConfig::new(10, 4, 1));
        assert!(matches!(r, Err(Error::TransverseMismatch(_))));
    }
}
