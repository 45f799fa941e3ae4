//! Dyadic piecewise-linear Brownian driving paths.
//!
//! Paths are generated by a Lévy (midpoint bridge) construction on each unit
//! time interval: the unit increment is drawn first, then midpoints level by
//! level. Every Gaussian draw comes from its own position in a ChaCha8
//! stream keyed by `(seed, index)` and by the node it belongs to, so a path
//! refined from level `k` to `k + 1` reuses all coarse nodes unchanged.

use crate::error::{Error, Result};
use crate::{Mat3, Vec3, MAX_DIM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Deepest supported dyadic level.
pub const MAX_LEVEL: u32 = 24;

const NODES_PER_UNIT: u64 = 1 << 30;
/// Heap slot holding the bridge sample at a non-dyadic horizon.
const HORIZON_SLOT: u64 = NODES_PER_UNIT - 1;
const WORDS_PER_NODE: u128 = 64;

/// Piecewise-linear path: constant slope on each dyadic interval
/// `[j 2^{-k}, (j+1) 2^{-k}]`, the last interval cut at the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingPath {
    pub dim: usize,
    pub k: u32,
    pub horizon: f64,
    pub seed: u64,
    pub index: u64,
    /// Slope on each interval; components beyond `dim` are zero.
    pub slopes: Vec<Vec3>,
    /// Length of each interval.
    pub durations: Vec<f64>,
}

impl DrivingPath {
    /// The zero path of the given shape.
    pub fn zero(dim: usize, k: u32, horizon: f64) -> Self {
        let durations = interval_durations(k, horizon);
        Self {
            dim,
            k,
            horizon,
            seed: 0,
            index: 0,
            slopes: vec![Vec3::zeros(); durations.len()],
            durations,
        }
    }

    pub fn intervals(&self) -> usize {
        self.slopes.len()
    }

    /// Value `w(t)` of the polygonal path, `w(0) = 0`.
    pub fn value_at(&self, t: f64) -> Vec3 {
        let mut w = Vec3::zeros();
        let mut s = 0.0;
        for (v, &d) in self.slopes.iter().zip(&self.durations) {
            if t <= s + d {
                return w + v * (t - s).max(0.0);
            }
            w += v * d;
            s += d;
        }
        w
    }

    pub fn endpoint(&self) -> Vec3 {
        self.slopes.iter().zip(&self.durations).map(|(v, &d)| v * d).sum()
    }

    /// Increments `w(t_{j+1}) - w(t_j)`.
    pub fn increments(&self) -> Vec<Vec3> {
        self.slopes.iter().zip(&self.durations).map(|(v, &d)| v * d).collect()
    }

    /// Path `m · w` for a linear map acting on the first `dim` components.
    pub fn transformed(&self, m: &Mat3) -> Self {
        let mut out = self.clone();
        for v in &mut out.slopes {
            let mut r = m * *v;
            for c in r.iter_mut().skip(self.dim) {
                *c = 0.0;
            }
            *v = r;
        }
        out
    }
}

fn interval_durations(k: u32, horizon: f64) -> Vec<f64> {
    let h = (-(k as f64)).exp2();
    let full = (horizon / h).floor() as usize;
    let mut d = vec![h; full];
    let rest = horizon - full as f64 * h;
    if rest > 1e-14 * h {
        d.push(rest);
    }
    d
}

struct NodeSampler {
    rng: ChaCha8Rng,
    dim: u64,
}

impl NodeSampler {
    fn normal(&mut self, unit: u64, heap: u64, comp: usize) -> f64 {
        let node = ((unit * NODES_PER_UNIT + heap) * self.dim + comp as u64) as u128;
        self.rng.set_word_pos(node * WORDS_PER_NODE);
        self.rng.sample(StandardNormal)
    }
}

/// Sample path `index` of the family seeded by `seed`.
pub fn sample_brownian(dim: usize, k: u32, horizon: f64, seed: u64, index: u64) -> Result<DrivingPath> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidParameter {
            key: "dim",
            reason: format!("path dimension {dim} not in 1..={MAX_DIM}"),
        });
    }
    if k > MAX_LEVEL {
        return Err(Error::InvalidParameter {
            key: "k",
            reason: format!("dyadic level {k} exceeds {MAX_LEVEL}"),
        });
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::NegativeTime(horizon));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut sampler = NodeSampler { rng, dim: dim as u64 };

    let durations = interval_durations(k, horizon);
    let per_unit = 1usize << k;
    let units = durations.len().div_ceil(per_unit);
    let mut slopes = Vec::with_capacity(durations.len());
    let mut base = Vec3::zeros();
    let mut nodes = vec![Vec3::zeros(); per_unit + 1];

    for m in 0..units {
        nodes[0] = base;
        let mut end = base;
        for c in 0..dim {
            end[c] += sampler.normal(m as u64, 0, c);
        }
        nodes[per_unit] = end;
        for j in 1..=k {
            let span = per_unit >> (j - 1);
            let std = (-((j + 1) as f64)).exp2().sqrt();
            for i in 0..(1usize << (j - 1)) {
                let l = i * span;
                let r = l + span;
                let mid = l + span / 2;
                let heap = (1u64 << (j - 1)) + i as u64;
                let mut v = (nodes[l] + nodes[r]) * 0.5;
                for c in 0..dim {
                    v[c] += std * sampler.normal(m as u64, heap, c);
                }
                nodes[mid] = v;
            }
        }
        let h = 1.0 / per_unit as f64;
        for j in 0..per_unit {
            let idx = m * per_unit + j;
            if idx >= durations.len() {
                break;
            }
            let d = durations[idx];
            if d < h {
                // horizon inside this interval: bridge sample at the horizon
                let frac = d / h;
                let std = (d * (h - d) / h).sqrt();
                let mut w = nodes[j] + (nodes[j + 1] - nodes[j]) * frac;
                for c in 0..dim {
                    w[c] += std * sampler.normal(m as u64, HORIZON_SLOT - k as u64, c);
                }
                slopes.push((w - nodes[j]) / d);
            } else {
                slopes.push((nodes[j + 1] - nodes[j]) / h);
            }
        }
        base = end;
    }

    Ok(DrivingPath {
        dim,
        k,
        horizon,
        seed,
        index,
        slopes,
        durations,
    })
}
