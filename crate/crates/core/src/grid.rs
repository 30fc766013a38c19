//! Vector-valued samples on a square lattice over a plane.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stencil::{axis_stencil, lagrange_weights, min_line_len};
use serde::{Deserialize, Serialize};

/// Number of nodes per axis used by the Lagrange interpolant in [`GridFunction::eval`].
pub const INTERP_POINTS: usize = 6;

/// Samples of a map `R^2 -> R^n` on the lattice `center + h * (i - N, j - N)`,
/// `0 <= i, j <= 2N`. The square `[center - N h, center + N h]^2` contains the ball
/// of radius `N h`, which is the nominal domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "R: Real + Serialize + serde::de::DeserializeOwned")]
pub struct GridFunction<R> {
    pub center: [R; 2],
    pub half: usize,
    pub h: R,
    pub n: usize,
    pub values: Vec<R>,
}

impl<R: Real> GridFunction<R> {
    pub fn zeros(center: [R; 2], radius: R, h: R, n: usize) -> Result<Self> {
        if !(h > R::zero()) || !h.is_finite() {
            return Err(Error::InvalidConfig(format!("grid spacing must be positive, got {h:?}")));
        }
        if n == 0 {
            return Err(Error::InvalidConfig("codimension must be at least 1".into()));
        }
        let ratio = (radius / h).as_f64();
        let half = ratio.round();
        if half < 1.0 || (ratio - half).abs() > 1e-6 {
            return Err(Error::InvalidConfig(format!(
                "radius {:?} is not a positive multiple of h {:?}",
                radius, h
            )));
        }
        let half = half as usize;
        let side = 2 * half + 1;
        Ok(Self { center, half, h, n, values: vec![R::zero(); side * side * n] })
    }

    pub fn from_fn<F>(center: [R; 2], radius: R, h: R, n: usize, mut f: F) -> Result<Self>
    where
        F: FnMut([R; 2], &mut [R]),
    {
        let mut g = Self::zeros(center, radius, h, n)?;
        let side = g.side();
        for j in 0..side {
            for i in 0..side {
                let x = g.node(i, j);
                let k = g.offset(i, j);
                f(x, &mut g.values[k..k + n]);
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.half + 1
    }

    pub fn radius(&self) -> R {
        self.h * R::from_usize(self.half).unwrap()
    }

    pub fn node_count(&self) -> usize {
        self.side() * self.side()
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize) -> usize {
        (j * self.side() + i) * self.n
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> [R; 2] {
        let hf = R::from_usize(self.half).unwrap();
        [
            self.center[0] + self.h * (R::from_usize(i).unwrap() - hf),
            self.center[1] + self.h * (R::from_usize(j).unwrap() - hf),
        ]
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> &[R] {
        let k = self.offset(i, j);
        &self.values[k..k + self.n]
    }

    #[inline]
    pub fn value_mut(&mut self, i: usize, j: usize) -> &mut [R] {
        let k = self.offset(i, j);
        let n = self.n;
        &mut self.values[k..k + n]
    }

    /// Continuous lattice coordinates of `x` (node `(i, j)` sits at integer `(i, j)`).
    pub fn lattice_coords(&self, x: [R; 2]) -> [R; 2] {
        let hf = R::from_usize(self.half).unwrap();
        [(x[0] - self.center[0]) / self.h + hf, (x[1] - self.center[1]) / self.h + hf]
    }

    /// Index of the node at `x`, if `x` is a lattice node within `tol * h`.
    pub fn node_index(&self, x: [R; 2], tol: R) -> Option<(usize, usize)> {
        let [a, b] = self.lattice_coords(x);
        let (ra, rb) = (a.round(), b.round());
        if (a - ra).abs() > tol || (b - rb).abs() > tol {
            return None;
        }
        let max = R::from_usize(self.side() - 1).unwrap();
        if ra < R::zero() || rb < R::zero() || ra > max || rb > max {
            return None;
        }
        Some((ra.to_usize().unwrap(), rb.to_usize().unwrap()))
    }

    /// Whether the closed square `[x - r, x + r]^2` lies inside the lattice square.
    pub fn contains_square(&self, x: [R; 2], r: R) -> bool {
        let big = self.radius() * (R::one() + R::lit(1e-12));
        (0..2).all(|a| (x[a] - self.center[a]).abs() + r <= big)
    }

    /// Restriction to the aligned sub-lattice centered at `center` with the given radius.
    pub fn restrict(&self, center: [R; 2], radius: R) -> Result<Self> {
        let tol = R::lit(1e-6);
        let (ci, cj) = self
            .node_index(center, tol)
            .ok_or(Error::DomainMismatch("restriction center is not a lattice node".into()))?;
        let half = (radius / self.h).round().to_usize().unwrap_or(0);
        if half == 0 || ci < half || cj < half || ci + half >= self.side() || cj + half >= self.side() {
            return Err(Error::OutsideDomain { what: "restricted grid" });
        }
        let mut out = Self::zeros(self.node(ci, cj), self.h * R::from_usize(half).unwrap(), self.h, self.n)?;
        for j in 0..out.side() {
            for i in 0..out.side() {
                let src = self.offset(ci - half + i, cj - half + j);
                let dst = out.offset(i, j);
                out.values[dst..dst + self.n].copy_from_slice(&self.values[src..src + self.n]);
            }
        }
        Ok(out)
    }

    /// Mixed partial derivative `d^a/dx1^a d^b/dx2^b` of component `c` at node `(i, j)`,
    /// second-order accurate, one-sided near the edges.
    pub fn partial(&self, i: usize, j: usize, a: usize, b: usize, c: usize) -> R {
        let side = self.side();
        debug_assert!(side >= min_line_len(a.max(b)));
        let (oi, wi) = axis_stencil(a, i, side);
        let (oj, wj) = axis_stencil(b, j, side);
        let mut acc = R::zero();
        for (q, &wq) in wj.iter().enumerate() {
            if wq == 0.0 {
                continue;
            }
            let jj = (j as isize + oj + q as isize) as usize;
            let mut row = R::zero();
            for (p, &wp) in wi.iter().enumerate() {
                if wp == 0.0 {
                    continue;
                }
                let ii = (i as isize + oi + p as isize) as usize;
                row += R::lit(wp) * self.values[self.offset(ii, jj) + c];
            }
            acc += R::lit(wq) * row;
        }
        acc / self.h.powi((a + b) as i32)
    }

    /// Jacobian `n x 2` at node `(i, j)`, row-major (`[c][axis]`).
    pub fn gradient(&self, i: usize, j: usize, out: &mut [R]) {
        for c in 0..self.n {
            out[2 * c] = self.partial(i, j, 1, 0, c);
            out[2 * c + 1] = self.partial(i, j, 0, 1, c);
        }
    }

    /// All `order + 1` distinct partials of order `order`, as `[c][k]` with `k` the
    /// number of `x2` derivatives.
    pub fn derivative_tensor(&self, i: usize, j: usize, order: usize) -> Vec<R> {
        let mut out = Vec::with_capacity(self.n * (order + 1));
        for c in 0..self.n {
            for k in 0..=order {
                out.push(self.partial(i, j, order - k, k, c));
            }
        }
        out
    }

    /// Tensor-product Lagrange interpolation of all components at `x`, with the
    /// gradient (`[c][axis]`) when `grad` is given.
    pub fn eval(&self, x: [R; 2], out: &mut [R], grad: Option<&mut [R]>) -> Result<()> {
        let side = self.side();
        let npts = INTERP_POINTS.min(side);
        let t = self.lattice_coords(x);
        let maxc = R::from_usize(side - 1).unwrap();
        let slack = R::lit(1e-9);
        if t.iter().any(|&v| v < -slack || v > maxc + slack || !v.is_finite()) {
            return Err(Error::OutsideDomain { what: "interpolation point" });
        }
        let mut start = [0usize; 2];
        let mut wv = [[0.0f64; INTERP_POINTS]; 2];
        let mut wd = [[0.0f64; INTERP_POINTS]; 2];
        for a in 0..2 {
            let base = t[a].floor().as_f64() as isize - (npts as isize / 2 - 1);
            let s = base.clamp(0, (side - npts) as isize) as usize;
            start[a] = s;
            let local = t[a].as_f64() - s as f64;
            lagrange_weights(local, npts, &mut wv[a], &mut wd[a]);
        }
        for v in out.iter_mut() {
            *v = R::zero();
        }
        let want_grad = grad.is_some();
        let mut g = vec![R::zero(); if want_grad { 2 * self.n } else { 0 }];
        for q in 0..npts {
            for p in 0..npts {
                let k = self.offset(start[0] + p, start[1] + q);
                let w = R::lit(wv[0][p] * wv[1][q]);
                for c in 0..self.n {
                    out[c] += w * self.values[k + c];
                }
                if want_grad {
                    let w0 = R::lit(wd[0][p] * wv[1][q]) / self.h;
                    let w1 = R::lit(wv[0][p] * wd[1][q]) / self.h;
                    for c in 0..self.n {
                        g[2 * c] += w0 * self.values[k + c];
                        g[2 * c + 1] += w1 * self.values[k + c];
                    }
                }
            }
        }
        if let Some(gr) = grad {
            gr[..2 * self.n].copy_from_slice(&g);
        }
        Ok(())
    }

    pub fn max_abs(&self) -> R {
        self.values.iter().fold(R::zero(), |m, v| m.max(v.abs()))
    }

    pub fn map_values<F: FnMut(R) -> R>(&self, mut f: F) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v = f(*v);
        }
        out
    }

    pub fn same_lattice(&self, other: &Self) -> bool {
        self.half == other.half
            && self.n == other.n
            && (self.h - other.h).abs() <= self.h * R::lit(1e-12)
            && (0..2).all(|a| (self.center[a] - other.center[a]).abs() <= self.h * R::lit(1e-9))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> GridFunction<f64> {
        GridFunction::from_fn([0.1, -0.2], 0.5, 1.0 / 32.0, 1, |x: [f64; 2], v: &mut [f64]| {
            v[0] = x[0].powi(3) - 2.0 * x[0] * x[1] + x[1] * x[1];
        })
        .unwrap()
    }

    #[test]
    fn single_precision_grid() {
        let g = crate::Grid32::from_fn([0.0, 0.0], 0.5, 1.0 / 16.0, 1, |x: [f32; 2], v: &mut [f32]| {
            v[0] = x[0] * x[0] - x[1]
        })
        .unwrap();
        let (i, j) = (5, 11);
        assert!((g.partial(i, j, 2, 0, 0) - 2.0).abs() < 1e-3);
        assert!((g.partial(i, j, 0, 1, 0) + 1.0).abs() < 1e-4);
    }

    #[test]
    fn radius_must_be_multiple_of_h() {
        assert!(GridFunction::<f64>::zeros([0.0; 2], 0.55, 0.1, 1).is_err());
        assert!(GridFunction::<f64>::zeros([0.0; 2], 0.5, 0.1, 1).is_ok());
        assert!(GridFunction::<f64>::zeros([0.0; 2], 0.5, -0.1, 1).is_err());
    }

    #[test]
    fn partials_of_cubic() {
        let g = cubic();
        let (i, j) = (7, 20);
        let x = g.node(i, j);
        assert!((g.partial(i, j, 1, 0, 0) - (3.0 * x[0] * x[0] - 2.0 * x[1])).abs() < 1e-2);
        assert!((g.partial(i, j, 1, 1, 0) + 2.0).abs() < 1e-9);
        assert!((g.partial(i, j, 0, 2, 0) - 2.0).abs() < 1e-9);
        assert!((g.partial(i, j, 3, 0, 0) - 6.0).abs() < 1e-7);
        assert!(g.partial(i, j, 4, 0, 0).abs() < 1e-5);
        // edges use one-sided stencils, still exact on quadratics in each variable
        assert!((g.partial(0, 0, 0, 2, 0) - 2.0).abs() < 1e-8);
        assert!((g.partial(0, g.side() - 1, 0, 1, 0) - (2.0 * g.node(0, g.side() - 1)[1] - 2.0 * g.node(0, 0)[0])).abs() < 1e-8);
    }

    #[test]
    fn eval_matches_polynomial() {
        let g = cubic();
        let mut v = [0.0];
        let mut d = [0.0; 2];
        let x = [0.123, -0.31];
        g.eval(x, &mut v, Some(&mut d)).unwrap();
        let exact = x[0].powi(3) - 2.0 * x[0] * x[1] + x[1] * x[1];
        assert!((v[0] - exact).abs() < 1e-12);
        assert!((d[0] - (3.0 * x[0] * x[0] - 2.0 * x[1])).abs() < 1e-10);
        assert!((d[1] - (-2.0 * x[0] + 2.0 * x[1])).abs() < 1e-10);
        assert!(g.eval([5.0, 0.0], &mut v, None).is_err());
    }

    #[test]
    fn restriction_is_aligned_copy() {
        let g = cubic();
        let c = g.node(16, 16);
        let r = g.restrict(c, 0.25).unwrap();
        assert_eq!(r.side(), 17);
        assert_eq!(r.value(8, 8), g.value(16, 16));
        assert_eq!(r.value(0, 0), g.value(8, 8));
        assert!(g.restrict(g.node(2, 2), 0.25).is_err());
    }
}
