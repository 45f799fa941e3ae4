//! Adapted orthonormal frames: Gram–Schmidt, leafwise transport, the
//! `O(p) × O(q)` action and scalarization of 1-forms.
//!
//! A frame is stored as an `n × n` matrix whose column `j` holds the
//! coordinate components `e^k_j` of the frame vector `e_j`. Adapted frames
//! have block form `[[A, B], [0, C]]` with the zero block of size `q × p`.

use crate::atlas::{Atlas, ChartPoint, FoliationDims};
use crate::error::{Error, Result};
use crate::{Mat3, Vec3};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Orthonormality tolerance applied when frames are constructed.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Gram–Schmidt of the first `n` columns of `raw` with respect to `g`,
/// in column order. Unused trailing slots are set to the identity.
pub fn gram_schmidt_columns(g: &Mat3, raw: &Mat3, n: usize) -> Result<Mat3> {
    let mut e = Mat3::identity();
    let inner = |v: &Vec3, w: &Vec3| (v.transpose() * g * w)[0];
    for j in 0..n {
        let mut v: Vec3 = raw.column(j).into_owned();
        for k in n..3 {
            v[k] = 0.0;
        }
        let scale = inner(&v, &v).sqrt();
        for i in 0..j {
            let ei: Vec3 = e.column(i).into_owned();
            v -= inner(&v, &ei) * ei;
        }
        let norm = inner(&v, &v).sqrt();
        if !(norm > 1e-12 * scale.max(f64::MIN_POSITIVE)) || !norm.is_finite() {
            return Err(Error::DegenerateFrame { column: j, norm });
        }
        e.set_column(j, &(v / norm));
    }
    Ok(e)
}

/// Orthonormal frame adapted to the foliation, attached to a base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptedFrame {
    pub base: ChartPoint,
    pub e: Mat3,
}

impl AdaptedFrame {
    /// Gram–Schmidt of the ordered coordinate basis at `base`.
    pub fn coordinate(atlas: &Atlas, base: ChartPoint) -> Self {
        gram_schmidt(atlas, base, &Mat3::identity()).expect("coordinate basis is independent")
    }

    /// Gram–Schmidt of a random adapted matrix at a uniform point of the
    /// fundamental domain.
    pub fn random<R: Rng + ?Sized>(atlas: &Atlas, rng: &mut R) -> Self {
        let dims = atlas.dims();
        let base = atlas.random_point(rng);
        let mut raw = Mat3::identity();
        for i in 0..dims.n() {
            for j in 0..dims.n() {
                if !(i >= dims.p && j < dims.p) {
                    raw[(i, j)] = rng.random_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 };
                }
            }
        }
        gram_schmidt(atlas, base, &raw).expect("diagonally dominant matrices are independent")
    }

    pub fn column(&self, j: usize) -> Vec3 {
        self.e.column(j).into_owned()
    }

    /// Largest entry of the lower-left `q × p` block.
    pub fn lower_left_max(&self, dims: FoliationDims) -> f64 {
        let mut m: f64 = 0.0;
        for i in dims.p..dims.n() {
            for j in 0..dims.p {
                m = m.max(self.e[(i, j)].abs());
            }
        }
        m
    }

    /// `‖Eᵀ g E − I‖_∞` over the active block.
    pub fn orthonormality_residual(&self, atlas: &Atlas) -> f64 {
        let n = atlas.n();
        let gram = self.e.transpose() * atlas.metric(&self.base.coords).g * self.e;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                m = m.max((gram[(i, j)] - target).abs());
            }
        }
        m
    }

    /// The transverse block `C` (rows and columns `p..n`), row-major.
    pub fn c_block(&self, dims: FoliationDims) -> Vec<f64> {
        let mut out = Vec::with_capacity(dims.q * dims.q);
        for i in dims.p..dims.n() {
            for j in dims.p..dims.n() {
                out.push(self.e[(i, j)]);
            }
        }
        out
    }

    pub fn dual(&self) -> DualFrame {
        DualFrame {
            f: self.e.try_inverse().expect("frames are invertible"),
        }
    }
}

/// Rows of `E⁻¹`: the coframe `f^j_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualFrame {
    pub f: Mat3,
}

/// Orthonormalize `raw` at `base`. The first `p` columns must be leafwise.
pub fn gram_schmidt(atlas: &Atlas, base: ChartPoint, raw: &Mat3) -> Result<AdaptedFrame> {
    let dims = atlas.dims();
    for i in dims.p..dims.n() {
        for j in 0..dims.p {
            if raw[(i, j)] != 0.0 {
                return Err(Error::NotAdapted(raw[(i, j)]));
            }
        }
    }
    let g = atlas.metric(&base.coords).g;
    let e = gram_schmidt_columns(&g, raw, dims.n())?;
    Ok(AdaptedFrame { base, e })
}

/// Move the frame along its leaf: keep the coordinate components fixed,
/// shift the base point by `dx`, and re-orthonormalize there.
pub fn leaf_transport(atlas: &Atlas, frame: &AdaptedFrame, dx: &[f64]) -> Result<AdaptedFrame> {
    let base = atlas.leaf_step(&frame.base, dx);
    gram_schmidt(atlas, base, &frame.e)
}

/// Element `block-diag(γ', γ'')` of `O(p) × O(q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub m: Mat3,
    pub dims: FoliationDims,
}

impl GroupElement {
    pub fn identity(dims: FoliationDims) -> Self {
        Self {
            m: Mat3::identity(),
            dims,
        }
    }

    /// From row-major blocks `leaf` (`p × p`) and `transverse` (`q × q`).
    pub fn from_blocks(dims: FoliationDims, leaf: &[f64], transverse: &[f64]) -> Result<Self> {
        let (p, q) = (dims.p, dims.q);
        assert_eq!(leaf.len(), p * p);
        assert_eq!(transverse.len(), q * q);
        let mut m = Mat3::identity();
        for i in 0..p {
            for j in 0..p {
                m[(i, j)] = leaf[i * p + j];
            }
        }
        for i in 0..q {
            for j in 0..q {
                m[(p + i, p + j)] = transverse[i * q + j];
            }
        }
        let g = Self { m, dims };
        let r = g.orthogonality_residual();
        if r > 1e-10 {
            return Err(Error::NotOrthogonal { residual: r });
        }
        Ok(g)
    }

    /// Rotation by `theta` in the transverse block (a sign flip when `q = 1`
    /// and `theta = π`), identity on the leaf block.
    pub fn transverse_rotation(dims: FoliationDims, theta: f64) -> Self {
        let mut m = Mat3::identity();
        let p = dims.p;
        if dims.q == 2 {
            let (s, c) = theta.sin_cos();
            m[(p, p)] = c;
            m[(p, p + 1)] = -s;
            m[(p + 1, p)] = s;
            m[(p + 1, p + 1)] = c;
        } else {
            m[(p, p)] = theta.cos().signum();
        }
        Self { m, dims }
    }

    /// `-1` on the first leaf vector.
    pub fn leaf_reflection(dims: FoliationDims) -> Self {
        let mut m = Mat3::identity();
        m[(0, 0)] = -1.0;
        Self { m, dims }
    }

    /// Haar-distributed element of `O(p) × O(q)`.
    pub fn random<R: Rng + ?Sized>(dims: FoliationDims, rng: &mut R) -> Self {
        let leaf = haar_orthogonal(dims.p, rng);
        let trans = haar_orthogonal(dims.q, rng);
        Self::from_blocks(dims, &leaf, &trans).expect("QR factor is orthogonal")
    }

    /// Whether the element lies in the `O(p)` factor.
    pub fn is_leafwise(&self) -> bool {
        let (p, n) = (self.dims.p, self.dims.n());
        (p..n).all(|i| (p..n).all(|j| self.m[(i, j)] == if i == j { 1.0 } else { 0.0 }))
    }

    pub fn inverse(&self) -> Self {
        Self {
            m: self.m.transpose(),
            dims: self.dims,
        }
    }

    pub fn orthogonality_residual(&self) -> f64 {
        (self.m.transpose() * self.m - Mat3::identity()).amax()
    }

    /// `γ · c` on a coefficient vector.
    pub fn apply(&self, c: &Vec3) -> Vec3 {
        self.m * c
    }
}

fn haar_orthogonal<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let a = DMatrix::<f64>::from_fn(k, k, |_, _| rng.sample(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            for i in 0..k {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            out.push(q[(i, j)]);
        }
    }
    out
}

/// Right action `(r·γ)_j = Σ_i γ_{ij} e_i`.
pub fn group_act(frame: &AdaptedFrame, gamma: &GroupElement) -> Result<AdaptedFrame> {
    let r = gamma.orthogonality_residual();
    if r > 1e-10 {
        return Err(Error::NotOrthogonal { residual: r });
    }
    Ok(AdaptedFrame {
        base: frame.base,
        e: frame.e * gamma.m,
    })
}

/// Values `F_{θ,j}(r) = θ_k e^k_j` of a 1-form on the frame bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneFormScalarization {
    pub values: Vec3,
}

pub fn scalarize_oneform(theta: &Vec3, frame: &AdaptedFrame) -> OneFormScalarization {
    OneFormScalarization {
        values: frame.e.transpose() * theta,
    }
}

/// Inverse of [`scalarize_oneform`]: `θ_L = F_J f^J_L`.
pub fn descalarize_oneform(f: &OneFormScalarization, frame: &AdaptedFrame) -> Vec3 {
    frame.dual().f.transpose() * f.values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierSeries;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e1() -> Atlas {
        Atlas::build_e1(FourierSeries::sines(vec![0.3])).unwrap()
    }
    fn e2(u: f64) -> Atlas {
        Atlas::build_e2([[2, 1], [1, 1]], FourierSeries::sines(vec![u])).unwrap()
    }

    /// Random adapted (not orthonormal) raw matrix.
    fn random_raw<R: Rng>(atlas: &Atlas, rng: &mut R) -> Mat3 {
        let dims = atlas.dims();
        let mut m = Mat3::identity();
        for i in 0..dims.n() {
            for j in 0..dims.n() {
                if !(i >= dims.p && j < dims.p) {
                    m[(i, j)] = rng.random_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 };
                }
            }
        }
        m
    }

    fn random_frame<R: Rng>(atlas: &Atlas, rng: &mut R) -> AdaptedFrame {
        let base = atlas.random_point(rng);
        gram_schmidt(atlas, base, &random_raw(atlas, rng)).unwrap()
    }

    #[test]
    fn coordinate_frames() {
        let a = e1();
        let f = AdaptedFrame::coordinate(&a, ChartPoint::from_slice(&[0.3, 0.0]));
        assert_abs_diff_eq!(f.e[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.e[(1, 1)], 1.0, epsilon = 1e-15);

        let b = e2(0.0);
        let lam = b.carriere().unwrap().lambda;
        let f = AdaptedFrame::coordinate(&b, ChartPoint::new(Vec3::new(0.1, 0.1, 0.5)));
        assert_abs_diff_eq!(f.e[(0, 0)], lam.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.e[(1, 1)], 1.0 / lam.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.e[(2, 2)], 1.0, epsilon = 1e-15);
        assert_eq!(f.e[(0, 1)], 0.0);
    }

    #[test]
    fn gram_schmidt_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for a in [e1(), e2(0.2)] {
            let f = random_frame(&a, &mut rng);
            let g = gram_schmidt(&a, f.base, &f.e).unwrap();
            assert!((g.e - f.e).amax() < 1e-14);
            assert!(f.orthonormality_residual(&a) < 1e-14);
            assert_eq!(f.lower_left_max(a.dims()), 0.0);
        }
    }

    #[test]
    fn gram_schmidt_rejects_degenerate_and_unadapted() {
        let a = e2(0.0);
        let base = ChartPoint::new(Vec3::new(0.0, 0.0, 0.2));
        let mut raw = Mat3::identity();
        raw.set_column(2, &Vec3::new(0.0, 1.0, 0.0));
        assert!(matches!(gram_schmidt(&a, base, &raw), Err(Error::DegenerateFrame { column: 2, .. })));
        let mut raw = Mat3::identity();
        raw[(2, 0)] = 0.5;
        assert!(matches!(gram_schmidt(&a, base, &raw), Err(Error::NotAdapted(_))));
    }

    #[test]
    fn leaf_transport_keeps_c_block_and_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for a in [e1(), e2(0.2)] {
            let dims = a.dims();
            for _ in 0..100 {
                let f = random_frame(&a, &mut rng);
                let dx = rng.random_range(-3.0..3.0);
                let dy = rng.random_range(-3.0..3.0);
                let g = leaf_transport(&a, &f, &[dx]).unwrap();
                let c0 = f.c_block(dims);
                let c1 = g.c_block(dims);
                for (u, v) in c0.iter().zip(&c1) {
                    assert!((u - v).abs() < 1e-12);
                }
                let two = leaf_transport(&a, &g, &[dy]).unwrap();
                let one = leaf_transport(&a, &f, &[dx + dy]).unwrap();
                assert!((two.e - one.e).amax() < 1e-12);
                assert!((two.base.coords - one.base.coords).amax() < 1e-12);
                assert_eq!(g.lower_left_max(dims), 0.0);
            }
            let f = random_frame(&a, &mut rng);
            let same = leaf_transport(&a, &f, &[0.0]).unwrap();
            assert!((same.e - f.e).amax() < 1e-15);
        }
    }

    #[test]
    fn group_action() {
        let a = e2(0.2);
        let dims = a.dims();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_frame(&a, &mut rng);
        assert_eq!(group_act(&f, &GroupElement::identity(dims)).unwrap(), f);

        let rot = GroupElement::transverse_rotation(dims, std::f64::consts::FRAC_PI_2);
        let g = group_act(&f, &rot).unwrap();
        assert!((g.column(1) - f.column(2)).amax() < 1e-15);
        assert!((g.column(2) + f.column(1)).amax() < 1e-15);

        for _ in 0..50 {
            let h = GroupElement::random(dims, &mut rng);
            let g = group_act(&f, &h).unwrap();
            assert_eq!(g.lower_left_max(dims), 0.0);
            assert!(g.orthonormality_residual(&a) < 1e-13);
            let back = group_act(&g, &h.inverse()).unwrap();
            assert!((back.e - f.e).amax() < 1e-14);
        }
        let bad = GroupElement {
            m: Mat3::identity() * 2.0,
            dims,
        };
        assert!(group_act(&f, &bad).is_err());
        assert!(GroupElement::from_blocks(dims, &[1.0], &[1.0, 1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn scalarization_examples() {
        let a = e1();
        let f = AdaptedFrame::coordinate(&a, ChartPoint::from_slice(&[0.2, 0.4]));
        let dt = Vec3::new(0.0, 1.0, 0.0);
        let s = scalarize_oneform(&dt, &f);
        assert_eq!(s.values[0], 0.0);
        assert_abs_diff_eq!(s.values[1], 1.0, epsilon = 1e-15);
        assert!((descalarize_oneform(&s, &f) - dt).amax() < 1e-15);
        let zero = scalarize_oneform(&Vec3::zeros(), &f);
        assert_eq!(zero.values, Vec3::zeros());
        assert_eq!(descalarize_oneform(&zero, &f), Vec3::zeros());
    }

    #[test]
    fn basic_forms_invariant_under_leaf_transport_and_leaf_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for a in [e1(), e2(0.2)] {
            let dims = a.dims();
            for _ in 0..50 {
                let f = random_frame(&a, &mut rng);
                let theta = |z: &Vec3| {
                    let mut c = Vec3::zeros();
                    c[dims.t_index()] = (std::f64::consts::TAU * z[dims.t_index()]).cos();
                    c
                };
                let s0 = scalarize_oneform(&theta(&f.base.coords), &f);
                for j in 0..dims.p {
                    assert_eq!(s0.values[j], 0.0);
                }
                let g = leaf_transport(&a, &f, &[rng.random_range(-2.0..2.0)]).unwrap();
                let s1 = scalarize_oneform(&theta(&g.base.coords), &g);
                assert!((s1.values - s0.values).amax() < 1e-12);
                let h = group_act(&f, &GroupElement::leaf_reflection(dims)).unwrap();
                let s2 = scalarize_oneform(&theta(&h.base.coords), &h);
                assert!((s2.values - s0.values).amax() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn scalarization_round_trip_and_equivariance(
            seed in any::<u64>(),
            th in prop::array::uniform3(-5.0f64..5.0),
        ) {
            let a = e2(0.2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_frame(&a, &mut rng);
            let theta = Vec3::new(th[0], th[1], th[2]);
            let s = scalarize_oneform(&theta, &f);
            prop_assert!((descalarize_oneform(&s, &f) - theta).amax() < 1e-12);
            let h = GroupElement::random(a.dims(), &mut rng);
            let sh = scalarize_oneform(&theta, &group_act(&f, &h).unwrap());
            let expect = h.inverse().apply(&s.values);
            prop_assert!((sh.values - expect).amax() < 1e-12);
        }
    }
}
