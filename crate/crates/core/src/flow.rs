//! Canonical horizontal vector fields of the direct-sum connection and the
//! flows they generate: deterministic, transverse-reduced and stochastic.

use crate::atlas::Atlas;
use crate::brownian::DrivingPath;
use crate::error::{Error, Result};
use crate::frame::{gram_schmidt, AdaptedFrame, ORTHONORMAL_TOL};
use crate::metric::{christoffel_oplus, model_point, ChristoffelField};
use crate::{Mat3, Vec3};
use nalgebra::{Matrix2, Vector2};

/// Integration settings shared by all flows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Maximal RK4 substep.
    pub dt: f64,
    /// Dyadic level of the driving path.
    pub k: u32,
    /// Record every `stride`-th step (substep for deterministic flows,
    /// dyadic interval for stochastic ones). The final state is always kept.
    pub stride: usize,
    /// Re-orthonormalize when `‖EᵀgE − I‖_∞` exceeds the frame tolerance.
    pub reorthonormalize: bool,
    /// Map states back into the fundamental domain after every interval.
    /// When false the flow runs on the universal cover.
    pub wrap: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            k: 8,
            stride: 1,
            reorthonormalize: true,
            wrap: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter {
                key: "dt",
                reason: format!("substep must be positive, got {}", self.dt),
            });
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter {
                key: "stride",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Sampled solution of a frame-bundle flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub frames: Vec<AdaptedFrame>,
    /// Orthonormality residual of each stored frame.
    pub residuals: Vec<f64>,
    /// Number of corrective Gram–Schmidt passes.
    pub reorthonormalizations: usize,
}

impl FlowTrajectory {
    fn start(atlas: &Atlas, r0: &AdaptedFrame) -> Self {
        Self {
            times: vec![0.0],
            frames: vec![*r0],
            residuals: vec![r0.orthonormality_residual(atlas)],
            reorthonormalizations: 0,
        }
    }

    fn push(&mut self, atlas: &Atlas, t: f64, r: &AdaptedFrame) {
        self.times.push(t);
        self.frames.push(*r);
        self.residuals.push(r.orthonormality_residual(atlas));
    }

    pub fn last(&self) -> &AdaptedFrame {
        self.frames.last().expect("trajectory is never empty")
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_lower_left(&self, atlas: &Atlas) -> f64 {
        self.frames
            .iter()
            .map(|f| f.lower_left_max(atlas.dims()))
            .fold(0.0, f64::max)
    }
}

/// Tangent vector to the frame bundle: base part `ż` and fiber part `Ė`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundleTangent {
    pub base: Vec3,
    pub fiber: Mat3,
}

fn fiber_velocity(op: &ChristoffelField, x: &Vec3, e: &Mat3, n: usize) -> Mat3 {
    let mut out = Mat3::zeros();
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                if x[k] == 0.0 {
                    continue;
                }
                for l in 0..n {
                    s += op.gamma[i][k][l] * x[k] * e[(l, j)];
                }
            }
            out[(i, j)] = -s;
        }
    }
    out
}

/// `Σ_a c_a Y_a` at the frame: base `E c`, fiber `−⊕Γ(Ec, E)`.
pub fn combined_horizontal(atlas: &Atlas, z: &Vec3, e: &Mat3, c: &Vec3) -> BundleTangent {
    let n = atlas.n();
    let x = e * c;
    let op = christoffel_oplus(atlas, z);
    let mut base = x;
    for v in base.iter_mut().skip(n) {
        *v = 0.0;
    }
    BundleTangent {
        base,
        fiber: fiber_velocity(&op, &base, e, n),
    }
}

/// Standard horizontal vector field `Y_a` at `frame` (index `a` is 0-based).
pub fn horizontal_vector(atlas: &Atlas, frame: &AdaptedFrame, a: usize) -> BundleTangent {
    let mut c = Vec3::zeros();
    c[a] = 1.0;
    combined_horizontal(atlas, &frame.base.coords, &frame.e, &c)
}

fn rk4_step(atlas: &Atlas, z: &Vec3, e: &Mat3, c: &Vec3, h: f64) -> (Vec3, Mat3) {
    let k1 = combined_horizontal(atlas, z, e, c);
    let k2 = combined_horizontal(atlas, &(z + k1.base * (h / 2.0)), &(e + k1.fiber * (h / 2.0)), c);
    let k3 = combined_horizontal(atlas, &(z + k2.base * (h / 2.0)), &(e + k2.fiber * (h / 2.0)), c);
    let k4 = combined_horizontal(atlas, &(z + k3.base * h), &(e + k3.fiber * h), c);
    let z1 = z + (k1.base + k2.base * 2.0 + k3.base * 2.0 + k4.base) * (h / 6.0);
    let e1 = e + (k1.fiber + k2.fiber * 2.0 + k3.fiber * 2.0 + k4.fiber) * (h / 6.0);
    (z1, e1)
}

/// Integrate with constant coefficients `c` for time `tau` in equal
/// substeps no longer than `dt`.
fn integrate_segment(atlas: &Atlas, r: &mut AdaptedFrame, c: &Vec3, tau: f64, dt: f64, t0: f64) -> Result<()> {
    if tau <= 0.0 || c.iter().all(|&v| v == 0.0) {
        return Ok(());
    }
    let steps = (tau / dt).ceil().max(1.0) as usize;
    let h = tau / steps as f64;
    for s in 0..steps {
        let (z1, e1) = rk4_step(atlas, &r.base.coords, &r.e, c, h);
        let t = t0 + (s + 1) as f64 * h;
        if !z1.iter().all(|v| v.is_finite()) || !e1.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        r.base.coords = z1;
        r.e = e1;
    }
    Ok(())
}

fn maintain(atlas: &Atlas, r: &mut AdaptedFrame, cfg: &IntegratorConfig, count: &mut usize) -> Result<()> {
    if cfg.reorthonormalize && r.orthonormality_residual(atlas) > ORTHONORMAL_TOL {
        *r = gram_schmidt(atlas, r.base, &r.e)?;
        *count += 1;
    }
    if cfg.wrap {
        let (p, e) = atlas.normalize(&r.base, Some(&r.e));
        r.base = p;
        r.e = e.expect("frame was supplied");
    }
    Ok(())
}

/// Flow of `Y = Σ c_a Y_a` from `r0` over `[0, horizon]`.
pub fn flow_deterministic(
    atlas: &Atlas,
    r0: &AdaptedFrame,
    c: &Vec3,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<FlowTrajectory> {
    cfg.validate()?;
    if !(horizon >= 0.0) {
        return Err(Error::NegativeTime(horizon));
    }
    let mut traj = FlowTrajectory::start(atlas, r0);
    let mut r = *r0;
    let steps = (horizon / cfg.dt).ceil().max(1.0) as usize;
    let mut count = 0;
    let h = horizon / steps as f64;
    if horizon > 0.0 {
        for s in 0..steps {
            integrate_segment(atlas, &mut r, c, h, h, s as f64 * h)?;
            maintain(atlas, &mut r, cfg, &mut count)?;
            if (s + 1) % cfg.stride == 0 || s + 1 == steps {
                traj.push(atlas, (s + 1) as f64 * h, &r);
            }
        }
    }
    traj.reorthonormalizations = count;
    Ok(traj)
}

/// Coefficient vector for interval slope `w` of a path of dimension `q`
/// (transverse slots only) or `n`.
fn driving_coefficients(atlas: &Atlas, path: &DrivingPath, w: &Vec3) -> Vec3 {
    let dims = atlas.dims();
    if path.dim == dims.n() {
        return *w;
    }
    let mut c = Vec3::zeros();
    for a in 0..dims.q {
        c[dims.p + a] = w[a];
    }
    c
}

/// Stratonovich flow driven by the polygonal path: on each dyadic interval
/// the flow of `Σ ẇ_a Y_a` with the interval slope.
pub fn flow_stochastic(
    atlas: &Atlas,
    r0: &AdaptedFrame,
    path: &DrivingPath,
    cfg: &IntegratorConfig,
) -> Result<FlowTrajectory> {
    cfg.validate()?;
    let dims = atlas.dims();
    if path.dim != dims.q && path.dim != dims.n() {
        return Err(Error::PathDimension {
            got: path.dim,
            expected_q: dims.q,
            expected_n: dims.n(),
        });
    }
    let mut traj = FlowTrajectory::start(atlas, r0);
    let mut r = *r0;
    let mut t = 0.0;
    let mut count = 0;
    let last = path.intervals();
    for (j, (w, &d)) in path.slopes.iter().zip(&path.durations).enumerate() {
        let c = driving_coefficients(atlas, path, w);
        integrate_segment(atlas, &mut r, &c, d, cfg.dt, t)?;
        t += d;
        maintain(atlas, &mut r, cfg, &mut count)?;
        if (j + 1) % cfg.stride == 0 || j + 1 == last {
            traj.push(atlas, t, &r);
        }
    }
    traj.reorthonormalizations = count;
    Ok(traj)
}

/// Endpoint of [`flow_stochastic`] without storing intermediate frames.
pub fn flow_stochastic_endpoint(
    atlas: &Atlas,
    r0: &AdaptedFrame,
    path: &DrivingPath,
    cfg: &IntegratorConfig,
) -> Result<AdaptedFrame> {
    let dims = atlas.dims();
    if path.dim != dims.q && path.dim != dims.n() {
        return Err(Error::PathDimension {
            got: path.dim,
            expected_q: dims.q,
            expected_n: dims.n(),
        });
    }
    let mut r = *r0;
    let mut t = 0.0;
    let mut count = 0;
    for (w, &d) in path.slopes.iter().zip(&path.durations) {
        let c = driving_coefficients(atlas, path, w);
        integrate_segment(atlas, &mut r, &c, d, cfg.dt, t)?;
        t += d;
        maintain(atlas, &mut r, cfg, &mut count)?;
    }
    Ok(r)
}

/// State of the transverse system: model point `ȳ = (y, t)` and the
/// transverse frame block `C`. For codimension one the `y` slot and the
/// first row and column of `C` are inert.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseState {
    pub ybar: Vector2<f64>,
    pub c: Matrix2<f64>,
}

impl TransverseState {
    /// Transverse data of a full frame.
    pub fn of_frame(atlas: &Atlas, r: &AdaptedFrame) -> Self {
        let dims = atlas.dims();
        let mp = model_point(atlas, &r.base.coords);
        let mut c = Matrix2::identity();
        let off = 2 - dims.q;
        for i in 0..dims.q {
            for j in 0..dims.q {
                c[(off + i, off + j)] = r.e[(dims.p + i, dims.p + j)];
            }
        }
        Self {
            ybar: Vector2::new(mp[0], mp[1]),
            c,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.ybar - other.ybar).amax().max((self.c - other.c).amax())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransverseTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<TransverseState>,
}

fn transverse_velocity(atlas: &Atlas, s: &TransverseState, ct: &Vector2<f64>) -> (Vector2<f64>, Matrix2<f64>) {
    let x = s.c * ct;
    let gam = atlas.transverse_christoffel(&[s.ybar[0], s.ybar[1]]);
    let mut dc = Matrix2::zeros();
    for m in 0..2 {
        for j in 0..2 {
            let mut v = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    v += gam[m][k][l] * x[k] * s.c[(l, j)];
                }
            }
            dc[(m, j)] = -v;
        }
    }
    (x, dc)
}

/// Closed `(ȳ, C)` system of a transverse flow, integrated with the model
/// connection. `c` holds full-length coefficients whose leaf slots must be 0.
pub fn flow_transverse_reduced(
    atlas: &Atlas,
    start: &TransverseState,
    c: &Vec3,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<TransverseTrajectory> {
    cfg.validate()?;
    let dims = atlas.dims();
    for slot in 0..dims.p {
        if c[slot] != 0.0 {
            return Err(Error::LeafCoefficient { slot, value: c[slot] });
        }
    }
    if !(horizon >= 0.0) {
        return Err(Error::NegativeTime(horizon));
    }
    let mut ct = Vector2::zeros();
    let off = 2 - dims.q;
    for a in 0..dims.q {
        ct[off + a] = c[dims.p + a];
    }
    let steps = (horizon / cfg.dt).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;
    let mut s = *start;
    let mut out = TransverseTrajectory {
        times: vec![0.0],
        states: vec![s],
    };
    if horizon == 0.0 {
        return Ok(out);
    }
    for i in 0..steps {
        let add = |s: &TransverseState, d: &(Vector2<f64>, Matrix2<f64>), f: f64| TransverseState {
            ybar: s.ybar + d.0 * f,
            c: s.c + d.1 * f,
        };
        let k1 = transverse_velocity(atlas, &s, &ct);
        let k2 = transverse_velocity(atlas, &add(&s, &k1, h / 2.0), &ct);
        let k3 = transverse_velocity(atlas, &add(&s, &k2, h / 2.0), &ct);
        let k4 = transverse_velocity(atlas, &add(&s, &k3, h), &ct);
        s.ybar += (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0);
        s.c += (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0);
        if (i + 1) % cfg.stride == 0 || i + 1 == steps {
            out.times.push((i + 1) as f64 * h);
            out.states.push(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::sample_brownian;
    use crate::atlas::ChartPoint;
    use crate::fourier::FourierSeries;
    use crate::frame::{group_act, leaf_transport, GroupElement};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn e1(a: f64) -> Atlas {
        Atlas::build_e1(FourierSeries::sines(vec![a])).unwrap()
    }
    fn e2(u: f64) -> Atlas {
        Atlas::build_e2([[2, 1], [1, 1]], FourierSeries::sines(vec![u])).unwrap()
    }

    #[test]
    fn horizontal_vector_examples() {
        let flat = e1(0.0);
        let r = AdaptedFrame::coordinate(&flat, ChartPoint::from_slice(&[0.3, 0.2]));
        let y = horizontal_vector(&flat, &r, 1);
        assert_eq!(y.fiber, Mat3::zeros());
        assert_eq!(y.base, r.column(1));

        let a = e1(0.3);
        let r = AdaptedFrame::coordinate(&a, ChartPoint::from_slice(&[0.0, 0.0]));
        let y = horizontal_vector(&a, &r, 1);
        assert_abs_diff_eq!(y.base[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y.fiber[(0, 0)], -0.6 * PI, epsilon = 1e-12);
    }

    #[test]
    fn flat_flows_are_straight() {
        let a = e1(0.0);
        let r = AdaptedFrame::coordinate(&a, ChartPoint::from_slice(&[0.1, 0.2]));
        let c = Vec3::new(0.5, -0.25, 0.0);
        let tr = flow_deterministic(&a, &r, &c, 2.0, &IntegratorConfig::default()).unwrap();
        let end = tr.last();
        assert!((end.base.coords - Vec3::new(1.1, -0.3, 0.0)).amax() < 1e-13);
        assert!((end.e - r.e).amax() < 1e-15);

        let path = sample_brownian(2, 6, 1.0, 3, 0).unwrap();
        let end = flow_stochastic_endpoint(&a, &r, &path, &IntegratorConfig::default()).unwrap();
        let expect = r.base.coords + r.e * path.endpoint();
        assert!((end.base.coords - expect).amax() < 1e-12);
    }

    #[test]
    fn zero_input_is_constant() {
        let a = e2(0.2);
        let r = AdaptedFrame::coordinate(&a, ChartPoint::new(Vec3::new(0.1, 0.2, 0.3)));
        let tr = flow_deterministic(&a, &r, &Vec3::zeros(), 1.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(*tr.last(), r);
        let path = DrivingPath::zero(2, 4, 1.0);
        let tr = flow_stochastic(&a, &r, &path, &IntegratorConfig::default()).unwrap();
        assert!(tr.frames.iter().all(|f| *f == r));
        let red = flow_transverse_reduced(
            &a,
            &TransverseState::of_frame(&a, &r),
            &Vec3::zeros(),
            1.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(red.states.iter().all(|s| *s == red.states[0]));
    }

    #[test]
    fn transverse_unit_speed_on_warped_torus() {
        let a = e1(0.3);
        let r = AdaptedFrame::coordinate(&a, ChartPoint::from_slice(&[0.4, 0.1]));
        let tr = flow_deterministic(&a, &r, &Vec3::new(0.0, 1.0, 0.0), 0.75, &IntegratorConfig::default()).unwrap();
        assert_abs_diff_eq!(tr.last().base.coords[1], 0.85, epsilon = 1e-12);
        assert_abs_diff_eq!(tr.last().base.coords[0], 0.4, epsilon = 1e-12);
    }

    #[test]
    fn reduced_flow_on_flat_model() {
        let a = e1(0.3);
        let r = AdaptedFrame::coordinate(&a, ChartPoint::from_slice(&[0.4, 0.1]));
        let s0 = TransverseState::of_frame(&a, &r);
        let red =
            flow_transverse_reduced(&a, &s0, &Vec3::new(0.0, 2.0, 0.0), 1.0, &IntegratorConfig::default()).unwrap();
        let end = red.states.last().unwrap();
        assert_eq!(end.c, s0.c);
        assert_abs_diff_eq!(end.ybar[1], 2.1, epsilon = 1e-12);
        assert!(flow_transverse_reduced(&a, &s0, &Vec3::new(1.0, 0.0, 0.0), 1.0, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn reduced_matches_full_on_carriere() {
        let a = e2(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = IntegratorConfig::default();
        for _ in 0..5 {
            let r = AdaptedFrame::coordinate(&a, a.random_point(&mut rng));
            let r = group_act(&r, &GroupElement::random(a.dims(), &mut rng)).unwrap();
            let c = Vec3::new(0.0, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let full = flow_deterministic(&a, &r, &c, 1.0, &cfg).unwrap();
            let red = flow_transverse_reduced(&a, &TransverseState::of_frame(&a, &r), &c, 1.0, &cfg).unwrap();
            for (f, s) in full.frames.iter().zip(&red.states) {
                assert!(TransverseState::of_frame(&a, f).max_abs_diff(s) < 1e-8);
            }
        }
    }

    #[test]
    fn equivariance_and_adaptedness() {
        let a = e2(0.2);
        let dims = a.dims();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        // corrective Gram–Schmidt passes do not commute with the group action
        let cfg = IntegratorConfig {
            dt: 1e-2,
            k: 4,
            reorthonormalize: false,
            ..IntegratorConfig::default()
        };
        let r = AdaptedFrame::coordinate(&a, a.random_point(&mut rng));
        let h = GroupElement::random(dims, &mut rng);
        let path = sample_brownian(3, 4, 0.5, 1, 0).unwrap();
        let lhs = flow_stochastic_endpoint(&a, &group_act(&r, &h).unwrap(), &path, &cfg).unwrap();
        let rhs = flow_stochastic_endpoint(&a, &r, &path.transformed(&h.m), &cfg).unwrap();
        let rhs = group_act(&rhs, &h).unwrap();
        assert!((lhs.e - rhs.e).amax() < 1e-8);
        assert!((lhs.base.coords - rhs.base.coords).amax() < 1e-8);

        let tpath = sample_brownian(2, 4, 0.5, 1, 1).unwrap();
        let r1 = leaf_transport(&a, &r, &[0.7]).unwrap();
        let r1 = group_act(&r1, &GroupElement::leaf_reflection(dims)).unwrap();
        let t0 = flow_stochastic(&a, &r, &tpath, &cfg).unwrap();
        let t1 = flow_stochastic(&a, &r1, &tpath, &cfg).unwrap();
        for (f0, f1) in t0.frames.iter().zip(&t1.frames) {
            assert!(TransverseState::of_frame(&a, f0).max_abs_diff(&TransverseState::of_frame(&a, f1)) < 1e-6);
        }
    }

    #[test]
    fn wrapping_keeps_points_in_domain() {
        let a = e2(0.2);
        let r = AdaptedFrame::coordinate(&a, ChartPoint::new(Vec3::new(0.1, 0.1, 0.9)));
        let cfg = IntegratorConfig {
            wrap: true,
            ..IntegratorConfig::default()
        };
        let path = sample_brownian(3, 5, 2.0, 4, 0).unwrap();
        let tr = flow_stochastic(&a, &r, &path, &cfg).unwrap();
        for f in &tr.frames[1..] {
            assert!((0.0..1.0).contains(&f.base.coords[2]));
            assert!(f.orthonormality_residual(&a) < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_path_dimension() {
        let a = e2(0.0);
        let r = AdaptedFrame::coordinate(&a, ChartPoint::new(Vec3::new(0.1, 0.1, 0.5)));
        let p = DrivingPath::zero(1, 3, 1.0);
        assert!(matches!(
            flow_stochastic(&a, &r, &p, &IntegratorConfig::default()),
            Err(Error::PathDimension { .. })
        ));
    }
}
