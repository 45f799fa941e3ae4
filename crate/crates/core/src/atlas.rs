//! The two built-in foliated manifolds as periodic coordinate systems.
//!
//! Coordinates are ordered leaf first, then transverse, with the circle
//! coordinate `t` always last:
//!
//! * `E1` (warped torus): `(x, t)`, metric `e^{2f(t)} dx² + dt²`, leaves are
//!   the circles `t = const`.
//! * `E2` (hyperbolic torus bundle): eigencoordinates `(x, y, t)` of a matrix
//!   `A ∈ SL(2, Z)`, metric `λ^{-2t} e^{2u(t)} dx² + λ^{2t} dy² + dt²`, leaves
//!   are the lines along the expanding eigenvector.
//!
//! Every metric is diagonal with log-scale factors depending on `t` only, so
//! the transverse block is constant along leaves and the deck maps below are
//! isometries.

use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, WarpProfile};
use crate::{Mat3, Vec3, MAX_DIM};
use nalgebra::{Matrix2, Vector2};
use rand::Rng;

/// Leaf dimension `p` and transverse codimension `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoliationDims {
    pub p: usize,
    pub q: usize,
}

impl FoliationDims {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 || p + q > MAX_DIM {
            return Err(Error::InvalidParameter {
                key: "dims",
                reason: format!("need p, q >= 1 and p + q <= {MAX_DIM}, got p = {p}, q = {q}"),
            });
        }
        Ok(Self { p, q })
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    pub fn is_leaf_index(&self, i: usize) -> bool {
        i < self.p
    }

    /// Index of the circle coordinate `t`.
    pub fn t_index(&self) -> usize {
        self.n() - 1
    }
}

/// A point in distinguished coordinates together with the deck index it was
/// unwrapped from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub coords: Vec3,
    pub cover_sheet: [i64; 3],
}

impl ChartPoint {
    pub fn new(coords: Vec3) -> Self {
        Self {
            coords,
            cover_sheet: [0; 3],
        }
    }

    /// Build from the first `n` coordinates, padding the rest with zero.
    pub fn from_slice(c: &[f64]) -> Self {
        let mut coords = Vec3::zeros();
        for (i, v) in c.iter().take(MAX_DIM).enumerate() {
            coords[i] = *v;
        }
        Self::new(coords)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtlasKind {
    E1WarpedTorus,
    E2Carriere,
}

impl AtlasKind {
    pub fn name(&self) -> &'static str {
        match self {
            AtlasKind::E1WarpedTorus => "e1",
            AtlasKind::E2Carriere => "e2",
        }
    }
}

/// Connection data of the local transverse model space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransverseModel {
    /// Flat circle `dt²`.
    FlatCircle,
    /// Left-invariant metric `λ^{2t} dy² + dt²` on the affine group with law
    /// `(y, t)∘(y', t') = (λ^{-t} y' + y, t + t')`.
    AffineGroup { log_lambda: f64 },
}

/// Eigen-data of the monodromy matrix of the torus bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct CarriereData {
    pub matrix: [[i64; 2]; 2],
    pub lambda: f64,
    pub log_lambda: f64,
    /// Columns are the eigenvectors `V1` (eigenvalue λ) and `V2` (1/λ),
    /// scaled so that `det = 1`.
    pub eigenbasis: Matrix2<f64>,
    pub eigenbasis_inv: Matrix2<f64>,
}

/// Affine identification `z ↦ J z + shift` of the universal cover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeckMap {
    pub linear: Mat3,
    pub shift: Vec3,
}

impl DeckMap {
    pub fn apply(&self, z: &Vec3) -> Vec3 {
        self.linear * z + self.shift
    }

    pub fn jacobian(&self) -> Mat3 {
        self.linear
    }

    pub fn inverse(&self) -> DeckMap {
        let inv = self
            .linear
            .try_inverse()
            .expect("deck maps are invertible");
        DeckMap {
            linear: inv,
            shift: -(inv * self.shift),
        }
    }
}

/// A foliated manifold with a bundle-like metric. Immutable after
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Atlas {
    dims: FoliationDims,
    kind: AtlasKind,
    /// Log-scale factor `a_i(t)` of `g_ii = e^{2 a_i}` for every coordinate
    /// except `t` (which has `g_tt = 1`).
    warps: Vec<WarpProfile>,
    model: TransverseModel,
    carriere: Option<CarriereData>,
    /// The user-supplied warp (`f` for E1, `u` for E2).
    perturbation: FourierSeries,
    /// Accumulated leafwise dilation `log ψ`.
    dilation: FourierSeries,
}

impl Atlas {
    /// Warped torus with metric `e^{2f(t)} dx² + dt²`. An empty series is the
    /// flat torus.
    pub fn build_e1(f: FourierSeries) -> Result<Self> {
        if !f.is_finite() {
            return Err(Error::InvalidParameter {
                key: "f_coeffs",
                reason: "coefficients must be finite".into(),
            });
        }
        Ok(Self {
            dims: FoliationDims::new(1, 1)?,
            kind: AtlasKind::E1WarpedTorus,
            warps: vec![WarpProfile::new(0.0, f.clone())],
            model: TransverseModel::FlatCircle,
            carriere: None,
            perturbation: f,
            dilation: FourierSeries::zero(),
        })
    }

    /// Hyperbolic torus bundle with monodromy `a` and leafwise perturbation
    /// `u(t)`.
    pub fn build_e2(a: [[i64; 2]; 2], u: FourierSeries) -> Result<Self> {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det != 1 {
            return Err(Error::InvalidParameter {
                key: "A",
                reason: format!("determinant must be 1, got {det}"),
            });
        }
        let trace = a[0][0] + a[1][1];
        if trace <= 2 {
            return Err(Error::InvalidParameter {
                key: "A",
                reason: format!("trace must exceed 2 for real distinct eigenvalues, got {trace}"),
            });
        }
        if !u.is_finite() {
            return Err(Error::InvalidParameter {
                key: "u_coeffs",
                reason: "coefficients must be finite".into(),
            });
        }
        let tr = trace as f64;
        let lambda = 0.5 * (tr + (tr * tr - 4.0).sqrt());
        let m = Matrix2::new(
            a[0][0] as f64,
            a[0][1] as f64,
            a[1][0] as f64,
            a[1][1] as f64,
        );
        let v1 = eigenvector(&m, lambda);
        let v2 = eigenvector(&m, 1.0 / lambda);
        let mut basis = Matrix2::from_columns(&[v1, v2]);
        let d = basis.determinant();
        basis /= d.abs().sqrt();
        if d < 0.0 {
            basis.set_column(1, &(-basis.column(1)));
        }
        let basis_inv = basis.try_inverse().expect("eigenvectors are independent");
        let log_lambda = lambda.ln();
        Ok(Self {
            dims: FoliationDims::new(1, 2)?,
            kind: AtlasKind::E2Carriere,
            warps: vec![
                WarpProfile::new(-log_lambda, u.clone()),
                WarpProfile::new(log_lambda, FourierSeries::zero()),
            ],
            model: TransverseModel::AffineGroup { log_lambda },
            carriere: Some(CarriereData {
                matrix: a,
                lambda,
                log_lambda,
                eigenbasis: basis,
                eigenbasis_inv: basis_inv,
            }),
            perturbation: u,
            dilation: FourierSeries::zero(),
        })
    }

    /// Copy of this atlas whose leafwise metric block is multiplied by
    /// `ψ^{2/p}`, with `log ψ` given as a Fourier series.
    pub(crate) fn with_leaf_dilation(&self, log_psi: &FourierSeries) -> Self {
        let mut out = self.clone();
        let per_leaf = log_psi.scaled(1.0 / self.dims.p as f64);
        for w in out.warps.iter_mut().take(self.dims.p) {
            *w = w.plus_series(&per_leaf);
        }
        out.dilation = out.dilation.add(log_psi);
        out
    }

    pub fn dims(&self) -> FoliationDims {
        self.dims
    }

    pub fn n(&self) -> usize {
        self.dims.n()
    }

    pub fn kind(&self) -> AtlasKind {
        self.kind
    }

    pub fn transverse_model(&self) -> TransverseModel {
        self.model
    }

    pub fn carriere(&self) -> Option<&CarriereData> {
        self.carriere.as_ref()
    }

    pub fn perturbation(&self) -> &FourierSeries {
        &self.perturbation
    }

    pub fn dilation(&self) -> &FourierSeries {
        &self.dilation
    }

    pub fn warps(&self) -> &[WarpProfile] {
        &self.warps
    }

    pub fn t_of(&self, z: &Vec3) -> f64 {
        z[self.dims.t_index()]
    }

    /// `(a_i, a_i', a_i'')` for each coordinate, `a_t ≡ 0`; unused slots are 0.
    pub fn log_scales(&self, t: f64) -> [[f64; 3]; MAX_DIM] {
        let mut out = [[0.0; 3]; MAX_DIM];
        for (i, w) in self.warps.iter().enumerate() {
            out[i] = w.derivatives(t);
        }
        out
    }

    /// Riemannian volume density `√det g` at height `t`. With the fiber
    /// normalized to unit coordinate volume this is also the fiber volume.
    pub fn volume_density(&self, t: f64) -> f64 {
        self.log_scales(t).iter().map(|a| a[0]).sum::<f64>().exp()
    }

    /// `(log √det g)'(t)`.
    pub fn log_volume_density_derivative(&self, t: f64) -> f64 {
        self.log_scales(t).iter().map(|a| a[1]).sum()
    }

    /// Closed-form mean curvature `κ = κ^t(t) ∂_t` and `dκ^t/dt`.
    ///
    /// For leaves spanned by coordinate lines with `g_aa = e^{2 a_a(t)}` and
    /// `g_tt = 1`, `κ^t = -Σ_{a ≤ p} a_a'(t)`.
    pub fn mean_curvature_closed(&self, t: f64) -> (f64, f64) {
        let s = self.log_scales(t);
        let k = -(0..self.dims.p).map(|a| s[a][1]).sum::<f64>();
        let dk = -(0..self.dims.p).map(|a| s[a][2]).sum::<f64>();
        (k, dk)
    }

    /// Christoffel symbols `Γ^m_{kl}` of the transverse model space at
    /// transverse point `ybar` (transverse indices `0..q`, `t` last).
    pub fn transverse_christoffel(&self, ybar: &[f64]) -> [[[f64; 2]; 2]; 2] {
        let mut g = [[[0.0; 2]; 2]; 2];
        if let TransverseModel::AffineGroup { log_lambda } = self.model {
            let t = ybar[1];
            let l = log_lambda;
            // Koszul on λ^{2t}dy² + dt²: Γ^t_yy = -l λ^{2t}, Γ^y_yt = Γ^y_ty = l.
            g[1][0][0] = -l * (2.0 * l * t).exp();
            g[0][0][1] = l;
            g[0][1][0] = l;
        }
        g
    }

    /// `∂_t` of [`Self::transverse_christoffel`].
    pub fn transverse_christoffel_dt(&self, ybar: &[f64]) -> [[[f64; 2]; 2]; 2] {
        let mut g = [[[0.0; 2]; 2]; 2];
        if let TransverseModel::AffineGroup { log_lambda } = self.model {
            let l = log_lambda;
            g[1][0][0] = -2.0 * l * l * (2.0 * l * ybar[1]).exp();
        }
        g
    }

    /// The transverse model metric at `ybar`.
    pub fn transverse_metric(&self, ybar: &[f64]) -> [[f64; 2]; 2] {
        match self.model {
            TransverseModel::FlatCircle => [[1.0, 0.0], [0.0, 0.0]],
            TransverseModel::AffineGroup { log_lambda } => {
                [[(2.0 * log_lambda * ybar[1]).exp(), 0.0], [0.0, 1.0]]
            }
        }
    }

    /// Whether two atlases induce the same transverse metric.
    pub fn same_transverse_metric(&self, other: &Atlas) -> std::result::Result<(), String> {
        if self.dims != other.dims || self.kind != other.kind {
            return Err("different manifold or dimensions".into());
        }
        if self.model != other.model {
            return Err("different transverse model".into());
        }
        if self.carriere.as_ref().map(|c| c.matrix) != other.carriere.as_ref().map(|c| c.matrix) {
            return Err("different monodromy matrix".into());
        }
        let p = self.dims.p;
        if self.warps[p..] != other.warps[p..] {
            return Err("different transverse metric block".into());
        }
        Ok(())
    }

    /// Generators of the deck group.
    pub fn deck_generators(&self) -> Vec<DeckMap> {
        let n = self.n();
        match &self.carriere {
            None => (0..n)
                .map(|i| {
                    let mut shift = Vec3::zeros();
                    shift[i] = 1.0;
                    DeckMap {
                        linear: Mat3::identity(),
                        shift,
                    }
                })
                .collect(),
            Some(c) => {
                let mut maps: Vec<DeckMap> = (0..2)
                    .map(|i| {
                        let v = c.eigenbasis_inv.column(i);
                        DeckMap {
                            linear: Mat3::identity(),
                            shift: Vec3::new(v[0], v[1], 0.0),
                        }
                    })
                    .collect();
                maps.push(DeckMap {
                    linear: Mat3::from_diagonal(&Vec3::new(c.lambda, 1.0 / c.lambda, 1.0)),
                    shift: Vec3::new(0.0, 0.0, 1.0),
                });
                maps
            }
        }
    }

    /// Map a point (and optionally a frame at it) into the fundamental
    /// domain, recording the deck index in `cover_sheet`.
    ///
    /// E1 wraps both coordinates into `[0, 1)`. E2 first undoes the monodromy
    /// twist until `t ∈ [0, 1)`, then wraps the lattice coordinates
    /// `s = P·(x, y)` into `[0, 1)²`.
    pub fn normalize(&self, pt: &ChartPoint, frame: Option<&Mat3>) -> (ChartPoint, Option<Mat3>) {
        let mut out = *pt;
        let mut e = frame.copied();
        match &self.carriere {
            None => {
                for i in 0..self.n() {
                    let m = out.coords[i].floor();
                    if m != 0.0 {
                        out.coords[i] -= m;
                        out.cover_sheet[i] += m as i64;
                    }
                    // floor can round a tiny negative up to exactly 1.0
                    if out.coords[i] >= 1.0 {
                        out.coords[i] -= 1.0;
                        out.cover_sheet[i] += 1;
                    }
                }
            }
            Some(c) => {
                let tw = Mat3::from_diagonal(&Vec3::new(1.0 / c.lambda, c.lambda, 1.0));
                let tw_inv = Mat3::from_diagonal(&Vec3::new(c.lambda, 1.0 / c.lambda, 1.0));
                while out.coords[2] >= 1.0 {
                    out.coords = tw * out.coords;
                    out.coords[2] -= 1.0;
                    out.cover_sheet[2] += 1;
                    e = e.map(|m| tw * m);
                }
                while out.coords[2] < 0.0 {
                    out.coords = tw_inv * out.coords;
                    out.coords[2] += 1.0;
                    out.cover_sheet[2] -= 1;
                    e = e.map(|m| tw_inv * m);
                }
                let mut s = c.eigenbasis * Vector2::new(out.coords[0], out.coords[1]);
                for i in 0..2 {
                    let m = s[i].floor();
                    if m != 0.0 {
                        s[i] -= m;
                        out.cover_sheet[i] += m as i64;
                    }
                }
                let xy = c.eigenbasis_inv * s;
                out.coords[0] = xy[0];
                out.coords[1] = xy[1];
            }
        }
        (out, e)
    }

    /// Move along the leaf through `pt`: shift the leaf coordinates by `dx`.
    pub fn leaf_step(&self, pt: &ChartPoint, dx: &[f64]) -> ChartPoint {
        let mut out = *pt;
        for (i, d) in dx.iter().take(self.dims.p).enumerate() {
            out.coords[i] += d;
        }
        out
    }

    /// Uniform point in the fundamental domain.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> ChartPoint {
        match &self.carriere {
            None => ChartPoint::from_slice(&[rng.random::<f64>(), rng.random::<f64>()]),
            Some(c) => {
                let xy = c.eigenbasis_inv * Vector2::new(rng.random::<f64>(), rng.random::<f64>());
                ChartPoint::new(Vec3::new(xy[0], xy[1], rng.random::<f64>()))
            }
        }
    }

    /// Point in the fundamental domain with prescribed height `t` and fiber
    /// position given in lattice coordinates `s ∈ [0, 1)^{n-1}`.
    pub fn point_at(&self, s: &[f64], t: f64) -> ChartPoint {
        match &self.carriere {
            None => ChartPoint::from_slice(&[s.first().copied().unwrap_or(0.0), t]),
            Some(c) => {
                let xy = c.eigenbasis_inv
                    * Vector2::new(
                        s.first().copied().unwrap_or(0.0),
                        s.get(1).copied().unwrap_or(0.0),
                    );
                ChartPoint::new(Vec3::new(xy[0], xy[1], t))
            }
        }
    }

    pub fn describe(&self) -> String {
        match &self.carriere {
            None => format!("e1 f={:?}", self.perturbation),
            Some(c) => format!("e2 A={:?} u={:?}", c.matrix, self.perturbation),
        }
    }
}

fn eigenvector(m: &Matrix2<f64>, ev: f64) -> Vector2<f64> {
    // (m - ev I) v = 0: take v orthogonal to the larger row.
    let r0 = Vector2::new(m[(0, 0)] - ev, m[(0, 1)]);
    let r1 = Vector2::new(m[(1, 0)], m[(1, 1)] - ev);
    let r = if r0.norm() >= r1.norm() { r0 } else { r1 };
    let v = Vector2::new(-r[1], r[0]);
    let v = v / v.norm();
    // Fix orientation: first nonzero component positive.
    if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cat_map() -> [[i64; 2]; 2] {
        [[2, 1], [1, 1]]
    }

    #[test]
    fn e2_eigenvalue_of_cat_map() {
        let a = Atlas::build_e2(cat_map(), FourierSeries::zero()).unwrap();
        let c = a.carriere().unwrap();
        assert_abs_diff_eq!(c.lambda, (3.0 + 5f64.sqrt()) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.lambda, 2.618034, epsilon = 1e-6);
        assert_abs_diff_eq!(c.eigenbasis.determinant(), 1.0, epsilon = 1e-14);
        let m = Matrix2::new(2.0, 1.0, 1.0, 1.0);
        let v1 = c.eigenbasis.column(0).into_owned();
        let v2 = c.eigenbasis.column(1).into_owned();
        assert!((m * v1 - c.lambda * v1).norm() < 1e-14);
        assert!((m * v2 - v2 / c.lambda).norm() < 1e-14);
    }

    #[test]
    fn e2_rejects_bad_matrices() {
        assert!(Atlas::build_e2([[1, 1], [0, 1]], FourierSeries::zero()).is_err());
        assert!(Atlas::build_e2([[2, 0], [0, 1]], FourierSeries::zero()).is_err());
        assert!(Atlas::build_e2([[-2, 1], [-1, 0]], FourierSeries::zero()).is_err());
    }

    #[test]
    fn e1_normalize_lattice_translation() {
        let a = Atlas::build_e1(FourierSeries::sines(vec![0.3])).unwrap();
        let (p, _) = a.normalize(&ChartPoint::from_slice(&[1.2, 0.3]), None);
        assert_abs_diff_eq!(p.coords[0], 0.2, epsilon = 1e-15);
        assert_eq!(p.coords[1], 0.3);
        assert_eq!(p.cover_sheet, [1, 0, 0]);
    }

    #[test]
    fn normalize_is_identity_inside_domain() {
        let a = Atlas::build_e1(FourierSeries::zero()).unwrap();
        let pt = ChartPoint::from_slice(&[0.4, 0.9]);
        let (p, f) = a.normalize(&pt, Some(&Mat3::identity()));
        assert_eq!(p, pt);
        assert_eq!(f.unwrap(), Mat3::identity());
    }

    #[test]
    fn e2_normalize_undoes_twist() {
        let a = Atlas::build_e2(cat_map(), FourierSeries::zero()).unwrap();
        let c = a.carriere().unwrap().clone();
        // a point whose lattice coordinates stay inside [0,1)^2 after the twist
        let s = Vector2::new(0.3, 0.6);
        let xy_after = c.eigenbasis_inv * s;
        let x = xy_after[0] * c.lambda;
        let y = xy_after[1] / c.lambda;
        let pt = ChartPoint::new(Vec3::new(x, y, 1.0));
        let (p, f) = a.normalize(&pt, Some(&Mat3::identity()));
        assert_abs_diff_eq!(p.coords[0], x / c.lambda, epsilon = 1e-14);
        assert_abs_diff_eq!(p.coords[1], y * c.lambda, epsilon = 1e-14);
        assert_eq!(p.coords[2], 0.0);
        assert_eq!(p.cover_sheet, [0, 0, 1]);
        let f = f.unwrap();
        assert_abs_diff_eq!(f[(0, 0)], 1.0 / c.lambda, epsilon = 1e-15);
        assert_abs_diff_eq!(f[(1, 1)], c.lambda, epsilon = 1e-15);
    }

    #[test]
    fn e2_normalized_lattice_coordinates_in_unit_square() {
        let a = Atlas::build_e2(cat_map(), FourierSeries::sines(vec![0.2])).unwrap();
        let c = a.carriere().unwrap().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let z = Vec3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-3.0..3.0),
            );
            let (p, _) = a.normalize(&ChartPoint::new(z), None);
            let s = c.eigenbasis * Vector2::new(p.coords[0], p.coords[1]);
            assert!((0.0..1.0).contains(&p.coords[2]));
            assert!(s.iter().all(|v| (-1e-12..1.0 + 1e-12).contains(v)), "{s:?}");
        }
    }

    #[test]
    fn leaf_step_keeps_transverse_coordinates() {
        let a = Atlas::build_e1(FourierSeries::zero()).unwrap();
        let p = a.leaf_step(&ChartPoint::from_slice(&[0.1, 0.7]), &[0.5]);
        assert_abs_diff_eq!(p.coords[0], 0.6, epsilon = 1e-15);
        assert_eq!(p.coords[1], 0.7);
        let same = a.leaf_step(&p, &[0.0]);
        assert_eq!(same, p);

        let b = Atlas::build_e2(cat_map(), FourierSeries::sines(vec![0.2])).unwrap();
        let q = ChartPoint::new(Vec3::new(0.1, 0.2, 0.3));
        let r = b.leaf_step(&q, &[3.7]);
        assert_eq!(r.coords[1], 0.2);
        assert_eq!(r.coords[2], 0.3);
    }

    #[test]
    fn closed_form_mean_curvature() {
        let a = Atlas::build_e1(FourierSeries::sines(vec![0.3])).unwrap();
        let (k0, _) = a.mean_curvature_closed(0.0);
        assert_abs_diff_eq!(k0, -0.6 * std::f64::consts::PI, epsilon = 1e-14);
        assert_abs_diff_eq!(a.mean_curvature_closed(0.25).0, 0.0, epsilon = 1e-14);

        let b = Atlas::build_e2(cat_map(), FourierSeries::zero()).unwrap();
        let l = b.carriere().unwrap().log_lambda;
        for t in [0.0, 0.3, 0.8] {
            assert_abs_diff_eq!(b.mean_curvature_closed(t).0, l, epsilon = 1e-14);
        }
        let c = Atlas::build_e2(cat_map(), FourierSeries::sines(vec![0.2])).unwrap();
        let t: f64 = 0.1;
        let expect = l - 0.4 * std::f64::consts::PI * (std::f64::consts::TAU * t).cos();
        assert_abs_diff_eq!(c.mean_curvature_closed(t).0, expect, epsilon = 1e-14);
    }
}
