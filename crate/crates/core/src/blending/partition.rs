//! Lattice-normalized tensor bump partition of unity.

use serde::{Deserialize, Serialize};

use super::dyadic::DyadicGrid;
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 4;
/// Half-width of the profile support in cube units.
pub const SUPPORT: f64 = 1.25;
const MIN_DENOMINATOR: f64 = 1e-6;
const NORM_SAMPLES: usize = 321;

/// Truncated Taylor series `sum c_k t^k`, `k <= MAX_ORDER`.
#[derive(Clone, Copy, Debug)]
struct Jet([f64; MAX_ORDER + 1]);

impl Jet {
    fn var(t: f64) -> Self {
        let mut c = [0.0; MAX_ORDER + 1];
        c[0] = t;
        c[1] = 1.0;
        Jet(c)
    }

    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; MAX_ORDER + 1];
        for i in 0..=MAX_ORDER {
            for j in 0..=MAX_ORDER - i {
                c[i + j] += self.0[i] * o.0[j];
            }
        }
        Jet(c)
    }

    fn scale(mut self, s: f64) -> Jet {
        self.0.iter_mut().for_each(|v| *v *= s);
        self
    }

    fn add_const(mut self, s: f64) -> Jet {
        self.0[0] += s;
        self
    }

    fn add(mut self, o: Jet) -> Jet {
        for i in 0..=MAX_ORDER {
            self.0[i] += o.0[i];
        }
        self
    }

    fn recip(self) -> Jet {
        let a = self.0;
        let mut r = [0.0; MAX_ORDER + 1];
        r[0] = 1.0 / a[0];
        for k in 1..=MAX_ORDER {
            let s: f64 = (1..=k).map(|i| a[i] * r[k - i]).sum();
            r[k] = -s * r[0];
        }
        Jet(r)
    }

    fn exp(self) -> Jet {
        let a = self.0;
        let mut e = [0.0; MAX_ORDER + 1];
        e[0] = a[0].exp();
        for k in 1..=MAX_ORDER {
            let s: f64 = (1..=k).map(|i| i as f64 * a[i] * e[k - i]).sum();
            e[k] = s / k as f64;
        }
        Jet(e)
    }

    /// Derivatives `f^(l)(t)` for `l = 0..=MAX_ORDER`.
    fn derivatives(self) -> [f64; MAX_ORDER + 1] {
        let mut d = self.0;
        let mut fact = 1.0;
        for (l, v) in d.iter_mut().enumerate().skip(1) {
            fact *= l as f64;
            *v *= fact;
        }
        d
    }
}

/// `exp(-1 / (1 - (t / SUPPORT)^2))` on `|t| < SUPPORT` with its Taylor jet.
fn bump_jet(t: f64) -> Jet {
    let s = t / SUPPORT;
    if s.abs() >= 1.0 {
        return Jet([0.0; MAX_ORDER + 1]);
    }
    let x = Jet::var(t).scale(1.0 / SUPPORT);
    let w = x.mul(x).scale(-1.0).add_const(1.0);
    w.recip().scale(-1.0).exp()
}

fn shift_sum(t: f64) -> Jet {
    let base = t.round() as i64;
    let mut acc = Jet([0.0; MAX_ORDER + 1]);
    for j in base - 2..=base + 2 {
        acc = acc.add(bump_jet(t - j as f64));
    }
    acc
}

/// One-dimensional normalized profile `b(t) / sum_j b(t - j)` and its derivatives.
pub fn profile_1d(t: f64) -> [f64; MAX_ORDER + 1] {
    let b = bump_jet(t);
    if b.0[0] == 0.0 {
        return [0.0; MAX_ORDER + 1];
    }
    b.mul(shift_sum(t).recip()).derivatives()
}

/// Number of distinct partials up to `MAX_ORDER`, indexed by [`multi_index`].
pub const PARTIALS: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

/// Position of `d^a/dx1^a d^b/dx2^b` in order-major layout.
pub fn multi_index(a: usize, b: usize) -> usize {
    let l = a + b;
    l * (l + 1) / 2 + b
}

/// Norm of a symmetric order-`l` tensor given by its distinct partials
/// (`l + 1` values, indexed by the number of `x2` derivatives).
pub fn tensor_norm(partials: &[f64]) -> f64 {
    let l = partials.len() - 1;
    let mut binom = 1.0;
    let mut acc = 0.0;
    for (b, v) in partials.iter().enumerate() {
        acc += binom * v * v;
        binom = binom * (l - b) as f64 / (b + 1) as f64;
    }
    acc.sqrt()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionOfUnity {
    pub grid: DyadicGrid,
    /// `sup |D^l psi|` of the unscaled profile, `l = 0..=MAX_ORDER`.
    pub profile_norms: Vec<f64>,
    /// `sup |D^l psi_i| = 2^(k l) sup |D^l psi|`.
    pub scaled_norms: Vec<f64>,
}

pub fn bump_partition(grid: &DyadicGrid) -> Result<PartitionOfUnity> {
    let mut min_den = f64::INFINITY;
    for s in 0..=1000 {
        min_den = min_den.min(shift_sum(s as f64 / 1000.0).0[0]);
    }
    if min_den < MIN_DENOMINATOR {
        return Err(Error::ProfileTooNarrow(min_den));
    }
    let mut profile_norms = vec![0.0f64; MAX_ORDER + 1];
    let samples: Vec<[f64; MAX_ORDER + 1]> = (0..NORM_SAMPLES)
        .map(|s| profile_1d(-SUPPORT + 2.0 * SUPPORT * s as f64 / (NORM_SAMPLES - 1) as f64))
        .collect();
    for d1 in &samples {
        for d2 in &samples {
            for (l, norm) in profile_norms.iter_mut().enumerate() {
                let parts: Vec<f64> = (0..=l).map(|b| d1[l - b] * d2[b]).collect();
                *norm = norm.max(tensor_norm(&parts));
            }
        }
    }
    let scale = (grid.k as f64).exp2();
    let scaled_norms = profile_norms.iter().enumerate().map(|(l, v)| v * scale.powi(l as i32)).collect();
    Ok(PartitionOfUnity { grid: grid.clone(), profile_norms, scaled_norms })
}

impl PartitionOfUnity {
    /// All partials of `psi_i` at `q`, indexed by [`multi_index`].
    pub fn partials(&self, idx: usize, q: [f64; 2]) -> [f64; PARTIALS] {
        let scale = (self.grid.k as f64).exp2();
        let c = self.grid.center(idx);
        let d1 = profile_1d(scale * (q[0] - c[0]));
        let d2 = profile_1d(scale * (q[1] - c[1]));
        let mut out = [0.0; PARTIALS];
        for l in 0..=MAX_ORDER {
            let f = scale.powi(l as i32);
            for b in 0..=l {
                out[multi_index(l - b, b)] = f * d1[l - b] * d2[b];
            }
        }
        out
    }

    pub fn value(&self, idx: usize, q: [f64; 2]) -> f64 {
        let scale = (self.grid.k as f64).exp2();
        let c = self.grid.center(idx);
        profile_1d(scale * (q[0] - c[0]))[0] * profile_1d(scale * (q[1] - c[1]))[0]
    }

    /// Cubes whose bump does not vanish at `q`.
    pub fn active(&self, q: [f64; 2]) -> Vec<usize> {
        let s = self.grid.step();
        let lo = [((q[0] / s) - SUPPORT).ceil() as i64, ((q[1] / s) - SUPPORT).ceil() as i64];
        let hi = [((q[0] / s) + SUPPORT).floor() as i64, ((q[1] / s) + SUPPORT).floor() as i64];
        let mut out = Vec::new();
        for a in lo[0]..=hi[0] {
            for b in lo[1]..=hi[1] {
                if let Some(i) = self.grid.index_of([a, b]) {
                    let c = self.grid.center(i);
                    if (0..2).all(|ax| ((q[ax] - c[ax]) / s).abs() < SUPPORT) {
                        out.push(i);
                    }
                }
            }
        }
        out
    }

    /// `sum_i D^alpha psi_i (q)` for every multi-index.
    pub fn partial_sums(&self, q: [f64; 2]) -> [f64; PARTIALS] {
        let mut acc = [0.0; PARTIALS];
        for i in self.active(q) {
            let p = self.partials(i, q);
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
        }
        acc
    }
}
