//! Verification checks shared by the command-line `verify` run and the
//! acceptance tests. Each criterion yields one or more [`CheckRow`]s.

use crate::atlas::Atlas;
use crate::brownian::sample_brownian;
use crate::error::Result;
use crate::fields::{BasicFourier, BasicOneForm};
use crate::flow::{
    flow_deterministic, flow_stochastic, flow_transverse_reduced, IntegratorConfig, TransverseState,
};
use crate::fourier::FourierSeries;
use crate::frame::{group_act, leaf_transport, AdaptedFrame, GroupElement};
use crate::invariant::{
    basic_harmonic_residual, carriere_moment_check, closed_form_log_density, dilate_metric, kappa_dilated,
    kappa_dilated_crosscheck, solve_invariant_density, standard_moment_functions, verify_phi_b_one,
    DilationSpec,
};
use crate::metric::{christoffel_oplus, drift_field, mean_curvature};
use crate::semigroup::{
    estimate_semigroup_fn, estimate_semigroup_oneform, generator_fd_check, metric_independence_check,
    GeneratorInput, McConfig, SemigroupMode,
};
use crate::stats::loglog_slope;
use crate::{ChartPoint, Mat3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

/// One measured quantity against its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    /// Passes when `residual ≤ tolerance`; NaN never passes.
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

/// A named group of rows that passes when all rows pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub name: &'static str,
    pub rows: Vec<CheckRow>,
}

impl Criterion {
    pub fn pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }
}

/// Knobs for the statistical checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub n_paths: usize,
    pub k: u32,
    pub dt: f64,
    pub workers: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 20240601,
            n_paths: 10_000,
            k: 8,
            dt: 1e-3,
            workers: None,
        }
    }
}

impl SuiteOptions {
    fn mc(&self, salt: u64) -> McConfig {
        McConfig {
            n_paths: self.n_paths,
            k: self.k,
            dt: self.dt.min((-(self.k as f64)).exp2()),
            seed: self.seed.wrapping_add(salt),
            workers: self.workers,
        }
    }

    fn flow(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.dt,
            k: self.k,
            stride: 1,
            reorthonormalize: false,
            wrap: false,
        }
    }
}

/// Warped torus with `f = 0.3 sin(2πt)`.
pub fn warped_torus() -> Atlas {
    Atlas::build_e1(FourierSeries::sines(vec![0.3])).expect("valid parameters")
}

pub fn flat_torus() -> Atlas {
    Atlas::build_e1(FourierSeries::zero()).expect("valid parameters")
}

/// Torus bundle with `A = [[2,1],[1,1]]` and `u = amp · sin(2πt)`.
pub fn torus_bundle(amp: f64) -> Atlas {
    Atlas::build_e2([[2, 1], [1, 1]], FourierSeries::sines(vec![amp])).expect("valid parameters")
}

fn both() -> [(&'static str, Atlas); 2] {
    [("e1", warped_torus()), ("e2", torus_bundle(0.2))]
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// `⊕Γ^i_{kl} = 0` for transverse `i` and leafwise `l`, at 100 random points.
pub fn connection_zero_pattern(opts: &SuiteOptions) -> Criterion {
    let mut rows = Vec::new();
    for (name, a) in both() {
        let mut r = rng(opts.seed, 1);
        let dims = a.dims();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let z = a.random_point(&mut r).coords;
            let op = christoffel_oplus(&a, &z);
            for i in dims.p..dims.n() {
                for k in 0..dims.n() {
                    for l in 0..dims.p {
                        worst = worst.max(op.get(i, k, l).abs());
                    }
                }
            }
        }
        rows.push(CheckRow::new(format!("{name}_max_abs"), worst, 1e-12));
    }
    Criterion {
        name: "direct-sum connection zero block",
        rows,
    }
}

/// Drift of the full diffusion equals half the mean curvature.
pub fn drift_is_half_mean_curvature(opts: &SuiteOptions) -> Criterion {
    let mut rows = Vec::new();
    for (name, a) in both() {
        let mut r = rng(opts.seed, 2);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let z = a.random_point(&mut r).coords;
            let b = drift_field(&a, &z).components;
            let k = mean_curvature(&a, &z).components;
            worst = worst.max((b - 0.5 * k).amax());
        }
        rows.push(CheckRow::new(format!("{name}_max_abs"), worst, 1e-10));
    }
    Criterion {
        name: "drift = half mean curvature",
        rows,
    }
}

/// Transverse frame block is unchanged by leafwise transport.
pub fn c_block_leaf_invariance(opts: &SuiteOptions) -> Result<Criterion> {
    let mut rows = Vec::new();
    for (name, a) in both() {
        let mut r = rng(opts.seed, 3);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let f = AdaptedFrame::random(&a, &mut r);
            let moved = leaf_transport(&a, &f, &[r.random_range(-5.0..5.0)])?;
            let c0 = f.c_block(a.dims());
            let c1 = moved.c_block(a.dims());
            for (u, v) in c0.iter().zip(&c1) {
                worst = worst.max((u - v).abs());
            }
        }
        rows.push(CheckRow::new(format!("{name}_max_abs"), worst, 1e-12));
    }
    Ok(Criterion {
        name: "C block constant along leaves",
        rows,
    })
}

/// Stochastic flows keep frames adapted and orthonormal over `[0, 1]`.
pub fn flows_preserve_adapted_frames(opts: &SuiteOptions) -> Result<Criterion> {
    let cfg = IntegratorConfig {
        reorthonormalize: true,
        ..opts.flow()
    };
    let mut rows = Vec::new();
    for (name, a) in both() {
        let mut r = rng(opts.seed, 4);
        let mut lower: f64 = 0.0;
        let mut ortho: f64 = 0.0;
        let mut events = 0usize;
        for i in 0..10u64 {
            let f = AdaptedFrame::random(&a, &mut r);
            let dim = if i % 2 == 0 { a.dims().q } else { a.n() };
            let path = sample_brownian(dim, opts.k, 1.0, opts.seed, 100 + i)?;
            let tr = flow_stochastic(&a, &f, &path, &cfg)?;
            lower = lower.max(tr.max_lower_left(&a));
            ortho = ortho.max(tr.max_residual());
            events += tr.reorthonormalizations;
        }
        rows.push(CheckRow::new(format!("{name}_lower_left"), lower, 1e-10));
        rows.push(CheckRow::new(format!("{name}_orthonormality"), ortho, 1e-6));
        // Reported, not bounded: one Gram–Schmidt pass per step at most.
        rows.push(CheckRow::new(format!("{name}_reorthonormalizations"), events as f64, 10_000.0));
    }
    Ok(Criterion {
        name: "flows preserve adapted orthonormal frames",
        rows,
    })
}

fn frame_gap(x: &AdaptedFrame, y: &AdaptedFrame) -> f64 {
    (x.e - y.e).amax().max((x.base.coords - y.base.coords).amax())
}

/// `R(t, r·h, c) = R(t, r, h·c)·h` for deterministic and stochastic drivers.
pub fn flow_equivariance(opts: &SuiteOptions) -> Result<Criterion> {
    let cfg = opts.flow();
    let mut rows = Vec::new();
    for (name, a) in both() {
        let mut r = rng(opts.seed, 5);
        let n = a.n();
        let mut det: f64 = 0.0;
        let mut sto: f64 = 0.0;
        for i in 0..20u64 {
            let f = AdaptedFrame::random(&a, &mut r);
            let h = GroupElement::random(a.dims(), &mut r);
            let mut c = Vec3::zeros();
            for v in c.iter_mut().take(n) {
                *v = r.random_range(-1.0..1.0);
            }
            let lhs = flow_deterministic(&a, &group_act(&f, &h)?, &c, 1.0, &cfg)?;
            let rhs = flow_deterministic(&a, &f, &h.apply(&c), 1.0, &cfg)?;
            for (x, y) in lhs.frames.iter().zip(&rhs.frames) {
                det = det.max(frame_gap(x, &group_act(y, &h)?));
            }
            let path = sample_brownian(n, opts.k, 1.0, opts.seed, 200 + i)?;
            let lhs = flow_stochastic(&a, &group_act(&f, &h)?, &path, &cfg)?;
            let rhs = flow_stochastic(&a, &f, &path.transformed(&h.m), &cfg)?;
            for (x, y) in lhs.frames.iter().zip(&rhs.frames) {
                sto = sto.max(frame_gap(x, &group_act(y, &h)?));
            }
        }
        rows.push(CheckRow::new(format!("{name}_deterministic"), det, 1e-8));
        rows.push(CheckRow::new(format!("{name}_stochastic"), sto, 1e-8));
    }
    Ok(Criterion {
        name: "flow equivariance",
        rows,
    })
}

/// Transverse histories from leaf-related frames coincide.
pub fn transverse_adaptedness(opts: &SuiteOptions) -> Result<Criterion> {
    let cfg = opts.flow();
    let mut rows = Vec::new();
    for (name, a) in both() {
        let mut r = rng(opts.seed, 6);
        let dims = a.dims();
        let mut moved: f64 = 0.0;
        let mut twisted: f64 = 0.0;
        for i in 0..20u64 {
            let f0 = AdaptedFrame::random(&a, &mut r);
            let f1 = leaf_transport(&a, &f0, &[r.random_range(-2.0..2.0)])?;
            let f2 = group_act(&f1, &GroupElement::leaf_reflection(dims))?;
            let path = sample_brownian(dims.q, opts.k, 1.0, opts.seed, 300 + i)?;
            let t0 = flow_stochastic(&a, &f0, &path, &cfg)?;
            let t1 = flow_stochastic(&a, &f1, &path, &cfg)?;
            let t2 = flow_stochastic(&a, &f2, &path, &cfg)?;
            for ((x, y), w) in t0.frames.iter().zip(&t1.frames).zip(&t2.frames) {
                let sx = TransverseState::of_frame(&a, x);
                moved = moved.max(sx.max_abs_diff(&TransverseState::of_frame(&a, y)));
                twisted = twisted.max(sx.max_abs_diff(&TransverseState::of_frame(&a, w)));
            }
        }
        rows.push(CheckRow::new(format!("{name}_leaf_transport"), moved, 1e-6));
        rows.push(CheckRow::new(format!("{name}_with_leaf_reflection"), twisted, 1e-6));
    }
    Ok(Criterion {
        name: "transverse flows are adapted",
        rows,
    })
}

/// Reduced `(ȳ, C)` system against the projection of the full flow.
pub fn transverse_reduction(opts: &SuiteOptions) -> Result<Criterion> {
    let cfg = opts.flow();
    let a = torus_bundle(0.2);
    let mut r = rng(opts.seed, 7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = AdaptedFrame::random(&a, &mut r);
        let c = Vec3::new(0.0, r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let full = flow_deterministic(&a, &f, &c, 1.0, &cfg)?;
        let red = flow_transverse_reduced(&a, &TransverseState::of_frame(&a, &f), &c, 1.0, &cfg)?;
        for (x, s) in full.frames.iter().zip(&red.states) {
            worst = worst.max(TransverseState::of_frame(&a, x).max_abs_diff(s));
        }
    }
    Ok(Criterion {
        name: "transverse reduction",
        rows: vec![CheckRow::new("e2_max_abs", worst, 1e-8)],
    })
}

/// Heat-equation oracle for the full semigroup on the warped torus, with
/// mode and metric independence.
pub fn heat_oracle(opts: &SuiteOptions) -> Result<Criterion> {
    let a = warped_torus();
    let f = BasicFourier::cos_mode(&a, 1);
    let z = ChartPoint::from_slice(&[0.3, 0.1]);
    let t = 0.1;
    let full = estimate_semigroup_fn(&a, &f, &z, t, SemigroupMode::Full, &opts.mc(10))?;
    let oracle = (-2.0 * PI * PI * t).exp() * (TAU * 0.1).cos();
    let trans = estimate_semigroup_fn(&a, &f, &z, t, SemigroupMode::Transverse, &opts.mc(11))?;
    let combined = (full.stderr.powi(2) + trans.stderr.powi(2)).sqrt();
    let cmp = metric_independence_check(&a, &flat_torus(), &f, &z, t, &opts.mc(12))?;
    Ok(Criterion {
        name: "heat semigroup oracle",
        rows: vec![
            CheckRow::new("full_vs_oracle", (full.mean - oracle).abs(), 3.0 * full.stderr),
            CheckRow::new("full_vs_transverse", (full.mean - trans.mean).abs(), 3.0 * combined),
            CheckRow::new(
                "warped_vs_flat",
                cmp.difference.abs(),
                3.0 * cmp.combined_stderr,
            ),
        ],
    })
}

/// Basicness and generator of the 1-form semigroup.
pub fn oneform_semigroup(opts: &SuiteOptions) -> Result<Criterion> {
    let a = warped_torus();
    let th = BasicOneForm::cos_mode(&a, 1);
    let z = ChartPoint::from_slice(&[0.3, 0.1]);
    let est = estimate_semigroup_oneform(&a, &th, &z, 0.1, &opts.mc(20))?;
    let mut rows = vec![
        CheckRow::new("leaf_frame_component", est.u[0].abs(), 3.0 * est.u_stderr[0]),
        CheckRow::new("dx_component", est.components[0].abs(), 3.0 * est.component_stderr[0]),
    ];
    for row in generator_fd_check(&a, GeneratorInput::OneForm(&th), &z, &[0.01, 0.02, 0.04], &opts.mc(21))? {
        rows.push(CheckRow::new(format!("quotient_t{}", row.t), row.residual, row.tolerance));
    }
    Ok(Criterion {
        name: "1-form semigroup",
        rows,
    })
}

/// Invariant density on the warped torus: positivity, simple kernel,
/// closed-form match and second-order convergence.
pub fn invariant_density(_opts: &SuiteOptions) -> Result<Criterion> {
    let a = warped_torus();
    let oracle = |t: f64| (-0.3 * (TAU * t).sin()).exp();
    let mut errs = Vec::new();
    let mut rows = Vec::new();
    for n in [128, 256, 512] {
        let d = solve_invariant_density(&a, n)?;
        rows.push(CheckRow::new(format!("min_phi_negated_N{n}"), -d.min(), 0.0 - f64::MIN_POSITIVE));
        rows.push(CheckRow::new(
            format!("kernel_gap_N{n}"),
            -(d.second_eigenvalue / d.operator_norm),
            -1e-8,
        ));
        errs.push(d.max_relative_error(oracle));
    }
    rows.push(CheckRow::new("relative_error_N512", errs[2], 1e-5));
    let slope = loglog_slope(&[128.0, 256.0, 512.0], &errs);
    rows.push(CheckRow::new("order_minus_2", (slope + 2.0).abs(), 0.2));
    Ok(Criterion {
        name: "invariant density",
        rows,
    })
}

/// Long-time full semigroup against `∫ f φ dvol` at two points.
pub fn ergodic_limit(opts: &SuiteOptions) -> Result<Criterion> {
    let a = warped_torus();
    let f = BasicFourier::cos_mode(&a, 1);
    let d = solve_invariant_density(&a, 512)?;
    let limit = d.integrate(|t| (TAU * t).cos());
    let mut rows = Vec::new();
    for (i, z) in [[0.3, 0.1], [0.7, 0.6]].iter().enumerate() {
        let e = estimate_semigroup_fn(&a, &f, &ChartPoint::from_slice(z), 3.0, SemigroupMode::Full, &opts.mc(30 + i as u64))?;
        rows.push(CheckRow::new(
            format!("z{}_vs_limit", i + 1),
            (e.mean - limit).abs(),
            3.0 * e.stderr + 0.01,
        ));
    }
    Ok(Criterion {
        name: "ergodic limit",
        rows,
    })
}

/// Dilation by the invariant density makes the basic mean curvature
/// basic-harmonic and the new density constant.
pub fn dilation_pipeline(_opts: &SuiteOptions) -> Result<Criterion> {
    let mut rows = Vec::new();

    let e1 = warped_torus();
    let spec = DilationSpec::new(e1.clone(), closed_form_log_density(&e1)?)?;
    let flat = dilate_metric(&spec)?;
    let mut gap: f64 = 0.0;
    let mut kappa: f64 = 0.0;
    for i in 0..256 {
        let t = i as f64 / 256.0;
        gap = gap.max((flat.metric(&Vec3::new(0.0, t, 0.0)).g - Mat3::identity()).amax());
        kappa = kappa.max(kappa_dilated(&e1, &spec.log_psi, t).abs());
    }
    rows.push(CheckRow::new("e1_dilated_metric_flat", gap, 1e-8));
    rows.push(CheckRow::new("e1_kappa_dilated", kappa, 1e-8));
    rows.push(CheckRow::new("e1_kappa_crosscheck", kappa_dilated_crosscheck(&spec, 64)?, 1e-8));
    rows.push(CheckRow::new("e1_codifferential", basic_harmonic_residual(&flat, 1024).0, 1e-8));
    rows.push(CheckRow::new("e1_density_one", verify_phi_b_one(&flat, 512)?, 1e-8));

    let grid = solve_invariant_density(&e1, 512)?;
    let from_grid = dilate_metric(&DilationSpec::from_density(e1.clone(), &grid)?)?;
    rows.push(CheckRow::new("e1_codifferential_solver_N512", basic_harmonic_residual(&from_grid, 1024).0, 1e-4));

    let e2 = torus_bundle(0.2);
    let mut deltas = Vec::new();
    for n in [512, 1024] {
        let phi = solve_invariant_density(&e2, n)?;
        let spec = DilationSpec::from_density(e2.clone(), &phi)?;
        let dil = dilate_metric(&spec)?;
        let (delta, d) = basic_harmonic_residual(&dil, 1024);
        if n == 512 {
            rows.push(CheckRow::new("e2_codifferential_N512", delta, 1e-4));
            rows.push(CheckRow::new("e2_exterior_derivative", d, 0.0));
            rows.push(CheckRow::new("e2_kappa_crosscheck", kappa_dilated_crosscheck(&spec, 64)?, 1e-10));
            rows.push(CheckRow::new("e2_density_one_N512", verify_phi_b_one(&dil, n)?, 1e-4));
        }
        deltas.push(delta);
    }
    rows.push(CheckRow::new("e2_refinement_ratio_minus_4", (deltas[0] / deltas[1] - 4.0).abs(), 0.5));
    Ok(Criterion {
        name: "dilation pipeline",
        rows,
    })
}

/// Grid size for the density used in the moment identities.
pub const MOMENT_GRID: usize = 2048;

/// Moment identities and the Radon–Nikodym table on the dilated torus bundle.
pub fn carriere_identities(_opts: &SuiteOptions) -> Result<Criterion> {
    let e2 = torus_bundle(0.2);
    let phi = solve_invariant_density(&e2, MOMENT_GRID)?;
    let dil = dilate_metric(&DilationSpec::from_density(e2, &phi)?)?;
    let rep = carriere_moment_check(&dil, &standard_moment_functions(4), 4096, 64)?;
    let mut rows: Vec<CheckRow> = rep
        .moments
        .iter()
        .map(|m| CheckRow::new(format!("moment_{}", m.label), m.residual, 1e-6))
        .collect();
    let mu = rep.mu_table.iter().map(|r| r.residual).fold(0.0, f64::max);
    rows.push(CheckRow::new("radon_nikodym_max", mu, 1e-4));
    Ok(Criterion {
        name: "torus bundle moment identities",
        rows,
    })
}

/// Names accepted by [`run_group`].
pub const GROUPS: [&str; 5] = ["geometry", "frames", "flows", "semigroup", "invariant"];

/// Run one group of criteria.
pub fn run_group(group: &str, opts: &SuiteOptions) -> Result<Vec<Criterion>> {
    Ok(match group {
        "geometry" => vec![connection_zero_pattern(opts), drift_is_half_mean_curvature(opts)],
        "frames" => vec![c_block_leaf_invariance(opts)?],
        "flows" => vec![
            flows_preserve_adapted_frames(opts)?,
            flow_equivariance(opts)?,
            transverse_adaptedness(opts)?,
            transverse_reduction(opts)?,
        ],
        "semigroup" => vec![heat_oracle(opts)?, oneform_semigroup(opts)?, ergodic_limit(opts)?],
        "invariant" => vec![
            invariant_density(opts)?,
            dilation_pipeline(opts)?,
            carriere_identities(opts)?,
        ],
        other => {
            return Err(crate::Error::InvalidParameter {
                key: "groups",
                reason: format!("unknown check group `{other}`"),
            })
        }
    })
}

pub fn run_all(opts: &SuiteOptions) -> Result<Vec<Criterion>> {
    let mut out = Vec::new();
    for g in GROUPS {
        out.extend(run_group(g, opts)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_pass_rule() {
        assert!(CheckRow::new("a", 0.0, 0.0).pass);
        assert!(!CheckRow::new("a", f64::NAN, 1.0).pass);
        assert!(!Criterion { name: "x", rows: vec![] }.pass());
    }

    #[test]
    fn cheap_groups_pass() {
        let opts = SuiteOptions::default();
        for g in ["geometry", "frames"] {
            for c in run_group(g, &opts).unwrap() {
                assert!(c.pass(), "{c:?}");
            }
        }
        assert!(run_group("nope", &opts).is_err());
    }
}
