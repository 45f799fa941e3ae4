//! Bundle-like metric fields, the Levi-Civita and direct-sum connections,
//! mean curvature, drift, and the generator `A` with its formal adjoint.

use crate::atlas::Atlas;
use crate::fields::ScalarField;
use crate::frame::gram_schmidt_columns;
use crate::{Mat3, Vec3, MAX_DIM};

/// Metric tensor at a point with its first coordinate derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricField {
    pub dim: usize,
    pub g: Mat3,
    pub g_inv: Mat3,
    /// `dg[k] = ∂_k g`.
    pub dg: [Mat3; MAX_DIM],
    pub sqrt_det: f64,
}

impl MetricField {
    pub fn inner(&self, v: &Vec3, w: &Vec3) -> f64 {
        (v.transpose() * self.g * w)[0]
    }

    /// Build from `g` and `∂g`, computing inverse and volume density.
    pub fn from_parts(dim: usize, g: Mat3, dg: [Mat3; MAX_DIM]) -> Self {
        let g_inv = g.try_inverse().expect("metric is positive definite");
        let sqrt_det = g.determinant().sqrt();
        Self {
            dim,
            g,
            g_inv,
            dg,
            sqrt_det,
        }
    }
}

/// `gamma[i][k][l] = Γ^i_{kl}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelField {
    pub dim: usize,
    pub gamma: [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM],
}

impl ChristoffelField {
    fn zero(dim: usize) -> Self {
        Self {
            dim,
            gamma: [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn get(&self, i: usize, k: usize, l: usize) -> f64 {
        self.gamma[i][k][l]
    }

    /// `Γ(v, w)^i = Γ^i_{kl} v^k w^l`.
    pub fn contract(&self, v: &Vec3, w: &Vec3) -> Vec3 {
        let mut out = Vec3::zeros();
        for i in 0..self.dim {
            let mut s = 0.0;
            for k in 0..self.dim {
                for l in 0..self.dim {
                    s += self.gamma[i][k][l] * v[k] * w[l];
                }
            }
            out[i] = s;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..MAX_DIM {
            for k in 0..MAX_DIM {
                for l in 0..MAX_DIM {
                    m = m.max((self.gamma[i][k][l] - other.gamma[i][k][l]).abs());
                }
            }
        }
        m
    }
}

/// Vector field value at a point, in coordinate components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorFieldValue {
    pub point: Vec3,
    pub components: Vec3,
}

impl Atlas {
    /// Metric and exact derivatives at `z`.
    pub fn metric(&self, z: &Vec3) -> MetricField {
        let n = self.n();
        let ti = self.dims().t_index();
        let s = self.log_scales(z[ti]);
        let mut g = Mat3::identity();
        let mut dg = [Mat3::zeros(); MAX_DIM];
        for i in 0..ti {
            let e = (2.0 * s[i][0]).exp();
            g[(i, i)] = e;
            dg[ti][(i, i)] = 2.0 * s[i][1] * e;
        }
        MetricField::from_parts(n, g, dg)
    }
}

/// Levi-Civita symbols from `g` and `∂g`.
pub fn levi_civita_from(m: &MetricField) -> ChristoffelField {
    let n = m.dim;
    let mut out = ChristoffelField::zero(n);
    for i in 0..n {
        for k in 0..n {
            for l in k..n {
                let mut s = 0.0;
                for r in 0..n {
                    let gi = m.g_inv[(i, r)];
                    if gi == 0.0 {
                        continue;
                    }
                    s += gi * (m.dg[k][(r, l)] + m.dg[l][(r, k)] - m.dg[r][(k, l)]);
                }
                out.gamma[i][k][l] = 0.5 * s;
                out.gamma[i][l][k] = 0.5 * s;
            }
        }
    }
    out
}

pub fn christoffel_lc(atlas: &Atlas, z: &Vec3) -> ChristoffelField {
    levi_civita_from(&atlas.metric(z))
}

/// Levi-Civita symbols with `∂g` replaced by central differences of `g`.
pub fn christoffel_lc_fd(atlas: &Atlas, z: &Vec3, step: f64) -> ChristoffelField {
    let n = atlas.n();
    let mut dg = [Mat3::zeros(); MAX_DIM];
    for (k, d) in dg.iter_mut().enumerate().take(n) {
        let mut zp = *z;
        let mut zm = *z;
        zp[k] += step;
        zm[k] -= step;
        *d = (atlas.metric(&zp).g - atlas.metric(&zm).g) / (2.0 * step);
    }
    levi_civita_from(&MetricField::from_parts(n, atlas.metric(z).g, dg))
}

/// Orthogonal projector onto `TF = span(∂_1..∂_p)` and its coordinate
/// derivatives. Columns `l < p` are set to `e_l` exactly.
fn leaf_projector(m: &MetricField, p: usize) -> (Mat3, [Mat3; MAX_DIM]) {
    let n = m.dim;
    // inverse of the leaf block
    let mut ginv = Mat3::zeros();
    match p {
        1 => ginv[(0, 0)] = 1.0 / m.g[(0, 0)],
        2 => {
            let block = nalgebra::Matrix2::new(m.g[(0, 0)], m.g[(0, 1)], m.g[(1, 0)], m.g[(1, 1)]);
            let inv = block.try_inverse().expect("leaf block is positive definite");
            for a in 0..2 {
                for b in 0..2 {
                    ginv[(a, b)] = inv[(a, b)];
                }
            }
        }
        _ => unreachable!("p is 1 or 2 for n <= 3"),
    }
    let mut proj = Mat3::zeros();
    for a in 0..p {
        proj[(a, a)] = 1.0;
    }
    for l in p..n {
        for a in 0..p {
            proj[(a, l)] = (0..p).map(|b| ginv[(a, b)] * m.g[(b, l)]).sum();
        }
    }
    let mut dproj = [Mat3::zeros(); MAX_DIM];
    for k in 0..n {
        // ∂G^{-1} = -G^{-1} ∂G G^{-1} on the leaf block
        let mut dginv = Mat3::zeros();
        for a in 0..p {
            for b in 0..p {
                let mut s = 0.0;
                for c in 0..p {
                    for d in 0..p {
                        s -= ginv[(a, c)] * m.dg[k][(c, d)] * ginv[(d, b)];
                    }
                }
                dginv[(a, b)] = s;
            }
        }
        for l in p..n {
            for a in 0..p {
                dproj[k][(a, l)] = (0..p)
                    .map(|b| dginv[(a, b)] * m.g[(b, l)] + ginv[(a, b)] * m.dg[k][(b, l)])
                    .sum();
            }
        }
    }
    (proj, dproj)
}

/// Symbols of `∇⊕ = P∇P + P⊥∇P⊥` from the Levi-Civita symbols and the
/// projector derivatives.
pub fn oplus_from(atlas: &Atlas, m: &MetricField, lc: &ChristoffelField) -> ChristoffelField {
    let n = m.dim;
    let p = atlas.dims().p;
    let (proj, dproj) = leaf_projector(m, p);
    let mut out = ChristoffelField::zero(n);
    let gamma_k = |k: usize, v: &Vec3| -> Vec3 {
        let mut r = Vec3::zeros();
        for i in 0..n {
            r[i] = (0..n).map(|j| lc.gamma[i][k][j] * v[j]).sum();
        }
        r
    };
    for l in 0..n {
        let v: Vec3 = proj.column(l).into_owned();
        let mut w = -v;
        w[l] += 1.0;
        for k in 0..n {
            let dv: Vec3 = dproj[k].column(l).into_owned();
            let a = dv + gamma_k(k, &v);
            let b = -dv + gamma_k(k, &w);
            let res = proj * a + (b - proj * b);
            for i in 0..n {
                out.gamma[i][k][l] = res[i];
            }
        }
    }
    out
}

pub fn christoffel_oplus(atlas: &Atlas, z: &Vec3) -> ChristoffelField {
    let m = atlas.metric(z);
    let lc = levi_civita_from(&m);
    oplus_from(atlas, &m, &lc)
}

/// Mean curvature of the leaves from the Gram–Schmidt frame of the ordered
/// coordinate basis: `κ = Σ_{a≤p} Σ_{b>p} g(∇_{e_a} e_a, e_b) e_b`.
///
/// The frame derivative term of `∇_{e_a} e_a` is leafwise and drops out, so
/// only the Christoffel part is needed.
pub fn mean_curvature(atlas: &Atlas, z: &Vec3) -> VectorFieldValue {
    let m = atlas.metric(z);
    let lc = levi_civita_from(&m);
    mean_curvature_from(atlas, &m, &lc, z)
}

fn mean_curvature_from(atlas: &Atlas, m: &MetricField, lc: &ChristoffelField, z: &Vec3) -> VectorFieldValue {
    let n = m.dim;
    let p = atlas.dims().p;
    let e = gram_schmidt_columns(&m.g, &Mat3::identity(), n).expect("coordinate basis is independent");
    let mut kappa = Vec3::zeros();
    for a in 0..p {
        let ea: Vec3 = e.column(a).into_owned();
        let nab = lc.contract(&ea, &ea);
        for b in p..n {
            let eb: Vec3 = e.column(b).into_owned();
            kappa += m.inner(&nab, &eb) * eb;
        }
    }
    VectorFieldValue {
        point: *z,
        components: kappa,
    }
}

/// `b^i = ½ g^{km} (Γ^i_{km} − ⊕Γ^i_{km})`.
pub fn drift_field(atlas: &Atlas, z: &Vec3) -> VectorFieldValue {
    let m = atlas.metric(z);
    let lc = levi_civita_from(&m);
    let op = oplus_from(atlas, &m, &lc);
    let n = m.dim;
    let mut b = Vec3::zeros();
    for i in 0..n {
        let mut s = 0.0;
        for k in 0..n {
            for l in 0..n {
                s += m.g_inv[(k, l)] * (lc.gamma[i][k][l] - op.gamma[i][k][l]);
            }
        }
        b[i] = 0.5 * s;
    }
    VectorFieldValue {
        point: *z,
        components: b,
    }
}

/// `Δ_M h = g^{ij} ∂_i∂_j h − g^{ij} Γ^k_{ij} ∂_k h`.
pub fn laplacian(atlas: &Atlas, h: &dyn ScalarField, z: &Vec3) -> f64 {
    let m = atlas.metric(z);
    let lc = levi_civita_from(&m);
    laplacian_from(&m, &lc, h, z)
}

fn laplacian_from(m: &MetricField, lc: &ChristoffelField, h: &dyn ScalarField, z: &Vec3) -> f64 {
    let n = m.dim;
    let grad = h.gradient(z);
    let hess = h.hessian(z);
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let gij = m.g_inv[(i, j)];
            if gij == 0.0 {
                continue;
            }
            s += gij * hess[(i, j)];
            for k in 0..n {
                s -= gij * lc.gamma[k][i][j] * grad[k];
            }
        }
    }
    s
}

/// Generator of the full semigroup on functions, `A h = ½(Δ_M h + κ h)`.
pub fn generator_apply(atlas: &Atlas, h: &dyn ScalarField, z: &Vec3) -> f64 {
    let m = atlas.metric(z);
    let lc = levi_civita_from(&m);
    let kappa = mean_curvature_from(atlas, &m, &lc, z).components;
    0.5 * (laplacian_from(&m, &lc, h, z) + kappa.dot(&h.gradient(z)))
}

/// Divergence of the mean curvature field with respect to `dvol_g`.
///
/// Uses the closed-form `κ = κ^t(t) ∂_t` of the built-in families:
/// `div κ = ∂_t κ^t + κ^t ∂_t log √det g`.
pub fn mean_curvature_divergence(atlas: &Atlas, z: &Vec3) -> f64 {
    let t = atlas.t_of(z);
    let (k, dk) = atlas.mean_curvature_closed(t);
    dk + k * atlas.log_volume_density_derivative(t)
}

/// Formal adjoint `A* h = ½(Δ_M h − div(h κ))` with respect to `dvol_g`.
pub fn adjoint_apply(atlas: &Atlas, h: &dyn ScalarField, z: &Vec3) -> f64 {
    let m = atlas.metric(z);
    let lc = levi_civita_from(&m);
    let kappa = mean_curvature_from(atlas, &m, &lc, z).components;
    let div_hk = h.value(z) * mean_curvature_divergence(atlas, z) + kappa.dot(&h.gradient(z));
    0.5 * (laplacian_from(&m, &lc, h, z) - div_hk)
}

/// Compare the transverse part of `P⊥ ∇_X P⊥ ∂_l` with the model connection
/// `∇^T_{X̄} ∂̄_l`. The leafwise part of `x` is projected away first; `l`
/// must be a transverse index.
pub fn transverse_connection_check(atlas: &Atlas, z: &Vec3, x: &Vec3, l: usize) -> f64 {
    let dims = atlas.dims();
    let (n, p) = (dims.n(), dims.p);
    assert!(l >= p && l < n, "l must be a transverse index");
    let m = atlas.metric(z);
    let lc = levi_civita_from(&m);
    let (proj, dproj) = leaf_projector(&m, p);
    let x_perp = x - proj * x;
    let v: Vec3 = proj.column(l).into_owned();
    let mut w = -v;
    w[l] += 1.0;
    let mut nab = Vec3::zeros();
    for k in 0..n {
        let dw: Vec3 = -dproj[k].column(l).into_owned();
        let mut gw = Vec3::zeros();
        for i in 0..n {
            gw[i] = (0..n).map(|j| lc.gamma[i][k][j] * w[j]).sum();
        }
        nab += x_perp[k] * (dw + gw);
    }
    let lhs = nab - proj * nab;

    let tg = atlas.transverse_christoffel(&model_point(atlas, z));
    let model_index = |i: usize| model_slot(atlas, i);
    let mut err: f64 = 0.0;
    for mi in p..n {
        let mut rhs = 0.0;
        for k in p..n {
            rhs += tg[model_index(mi)][model_index(k)][model_index(l)] * x_perp[k];
        }
        err = err.max((lhs[mi] - rhs).abs());
    }
    err
}

/// Transverse point `(y, t)` of the model space; for `q = 1` the `y` slot is 0.
pub(crate) fn model_point(atlas: &Atlas, z: &Vec3) -> [f64; 2] {
    let dims = atlas.dims();
    let t = z[dims.t_index()];
    if dims.q == 2 {
        [z[dims.p], t]
    } else {
        [0.0, t]
    }
}

/// Model-space slot of transverse coordinate index `i` (`t` is always slot 1).
pub(crate) fn model_slot(atlas: &Atlas, i: usize) -> usize {
    let dims = atlas.dims();
    if dims.q == 1 {
        1
    } else {
        i - dims.p
    }
}
