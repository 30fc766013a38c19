//! Dirichlet problem on a disk by Shortley-Weller finite differences.

use std::cell::RefCell;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Residual `||Δ_h f̄||_∞` accepted after the solve.
pub const RESIDUAL_TOL: f64 = 1e-9;
const REFINEMENT_STEPS: usize = 3;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarmonicExtension {
    /// Solution at the disk nodes; the remaining nodes carry the boundary data.
    pub grid: GridFunction<f64>,
    pub interior: Vec<bool>,
    /// Per component `[min, max]` of the boundary values used by the scheme.
    pub boundary_range: Vec<[f64; 2]>,
    pub residual: f64,
}

/// Row of the scaled (`h^2 Δ_h`) operator at one interior node: diagonal, interior
/// neighbors, and boundary crossings `(theta, coefficient, outside node)`.
struct Row {
    diag: f64,
    links: Vec<(usize, f64)>,
    crossings: Vec<(f64, f64, usize, usize)>,
}

/// Dense storage of a banded matrix, factored in place without pivoting.
struct Banded {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl Banded {
    fn new(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (2 * bw + 1)] }
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * (2 * self.bw + 1) + (j + self.bw - i)]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * (2 * self.bw + 1) + (j + self.bw - i)]
    }

    fn factor(&mut self) -> Result<()> {
        for k in 0..self.n {
            let piv = self.get(k, k);
            if piv.abs() < 1e-300 {
                return Err(Error::Degenerate("singular Dirichlet matrix"));
            }
            let last = (k + self.bw).min(self.n - 1);
            for i in k + 1..=last {
                let l = self.get(i, k) / piv;
                if l == 0.0 {
                    continue;
                }
                *self.at(i, k) = l;
                for j in k + 1..=last {
                    let u = self.get(k, j);
                    if u != 0.0 {
                        *self.at(i, j) -= l * u;
                    }
                }
            }
        }
        Ok(())
    }

    fn solve(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let first = i.saturating_sub(self.bw);
            let mut s = b[i];
            for j in first..i {
                s -= self.get(i, j) * b[j];
            }
            b[i] = s;
        }
        for i in (0..self.n).rev() {
            let last = (i + self.bw).min(self.n - 1);
            let mut s = b[i];
            for j in i + 1..=last {
                s -= self.get(i, j) * b[j];
            }
            b[i] = s / self.get(i, i);
        }
    }
}

/// Distance fraction `t ∈ (0, 1]` along `x + t d` at which `|· - q| = r`, for `x`
/// inside and `x + d` outside the disk.
fn crossing(x: [f64; 2], d: [f64; 2], q: [f64; 2], r: f64) -> f64 {
    let p = [x[0] - q[0], x[1] - q[1]];
    let a = d[0] * d[0] + d[1] * d[1];
    let b = 2.0 * (p[0] * d[0] + p[1] * d[1]);
    let c = p[0] * p[0] + p[1] * p[1] - r * r;
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    // c < 0, so the positive root is stable in this form
    let t = 2.0 * c / (-b - disc);
    t.clamp(1e-8, 1.0)
}

/// Harmonic function on `B_radius(q)` whose boundary values are `src` interpolated
/// linearly along grid lines at the cut points. The output lattice is `src`'s,
/// centered at the node nearest to `q`.
pub fn harmonic_extend(src: &GridFunction<f64>, q: [f64; 2], radius: f64) -> Result<HarmonicExtension> {
    let h = src.h;
    if radius < 4.0 * h {
        return Err(Error::DegenerateBall { radius, min: 4.0 * h });
    }
    let lc = src.lattice_coords(q);
    let (ci, cj) = (lc[0].round(), lc[1].round());
    let half = (radius / h).ceil() as usize + 1;
    let max = (src.side() - 1) as f64;
    if ci < half as f64 || cj < half as f64 || ci + half as f64 > max || cj + half as f64 > max {
        return Err(Error::OutsideDomain { what: "harmonic extension square" });
    }
    let grid = src.restrict(src.node(ci as usize, cj as usize), half as f64 * h)?;
    let dq = [q[0] - grid.center[0], q[1] - grid.center[1]];
    let op = cached_operator(grid.side(), h, dq, radius)?;
    solve_on(grid, &op, h)
}

/// Disk operator in coordinates relative to the grid center; depends only on the
/// lattice shape, the offset of the disk center and the radius.
struct Operator {
    interior: Vec<bool>,
    rows: Vec<Row>,
    factored: Banded,
}

type OperatorKey = (usize, u64, u64, u64, u64);

thread_local! {
    static OPERATORS: RefCell<Vec<(OperatorKey, Rc<Operator>)>> = const { RefCell::new(Vec::new()) };
}
const CACHED_OPERATORS: usize = 8;

fn cached_operator(side: usize, h: f64, dq: [f64; 2], radius: f64) -> Result<Rc<Operator>> {
    let key = (side, h.to_bits(), dq[0].to_bits(), dq[1].to_bits(), radius.to_bits());
    if let Some(op) = OPERATORS.with(|c| c.borrow().iter().find(|(k, _)| *k == key).map(|(_, op)| op.clone())) {
        return Ok(op);
    }
    let op = Rc::new(build_operator(side, h, dq, radius)?);
    OPERATORS.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= CACHED_OPERATORS {
            c.remove(0);
        }
        c.push((key, op.clone()));
    });
    Ok(op)
}

fn build_operator(side: usize, h: f64, dq: [f64; 2], radius: f64) -> Result<Operator> {
    let half = (side - 1) as f64 / 2.0;
    let rel = |i: usize, j: usize| [(i as f64 - half) * h - dq[0], (j as f64 - half) * h - dq[1]];
    let inside = |x: [f64; 2]| x[0].hypot(x[1]) < radius;

    let mut index = vec![usize::MAX; side * side];
    let mut interior = vec![false; side * side];
    let mut count = 0;
    for j in 0..side {
        for i in 0..side {
            if inside(rel(i, j)) {
                index[j * side + i] = count;
                interior[j * side + i] = true;
                count += 1;
            }
        }
    }
    let mut rows = Vec::with_capacity(count);
    let mut bw = 0usize;
    for j in 0..side {
        for i in 0..side {
            if !interior[j * side + i] {
                continue;
            }
            let me = index[j * side + i];
            let x = rel(i, j);
            let mut row = Row { diag: 0.0, links: Vec::new(), crossings: Vec::new() };
            for axis in 0..2 {
                let mut nb = [(0usize, 0usize, 1.0f64, false); 2];
                for (s, sign) in [-1isize, 1].into_iter().enumerate() {
                    let (ii, jj) = if axis == 0 {
                        ((i as isize + sign) as usize, j)
                    } else {
                        (i, (j as isize + sign) as usize)
                    };
                    let inner = interior[jj * side + ii];
                    let theta = if inner {
                        1.0
                    } else {
                        let mut d = [0.0; 2];
                        d[axis] = sign as f64 * h;
                        crossing(x, d, [0.0, 0.0], radius)
                    };
                    nb[s] = (ii, jj, theta, inner);
                }
                let (tw, te) = (nb[0].2, nb[1].2);
                // h^2 u_xx ≈ 2/(tw+te) [ (uE - uP)/te - (uP - uW)/tw ]
                let scale = 2.0 / (tw + te);
                row.diag -= scale * (1.0 / te + 1.0 / tw);
                for &(ii, jj, theta, inner) in &nb {
                    let coef = scale / theta;
                    if inner {
                        let other = index[jj * side + ii];
                        bw = bw.max(other.abs_diff(me));
                        row.links.push((other, coef));
                    } else {
                        row.crossings.push((theta, coef, ii, jj));
                    }
                }
            }
            rows.push(row);
        }
    }
    if count == 0 {
        return Err(Error::DegenerateBall { radius, min: 4.0 * h });
    }

    let mut factored = Banded::new(count, bw);
    for (k, row) in rows.iter().enumerate() {
        *factored.at(k, k) += row.diag;
        for &(o, c) in &row.links {
            *factored.at(k, o) += c;
        }
    }
    factored.factor()?;
    Ok(Operator { interior, rows, factored })
}

fn solve_on(mut grid: GridFunction<f64>, op: &Operator, h: f64) -> Result<HarmonicExtension> {
    let side = grid.side();
    let n = grid.n;
    let (interior, rows, factored) = (&op.interior, &op.rows, &op.factored);
    let count = rows.len();
    let mut boundary_range = vec![[f64::INFINITY, f64::NEG_INFINITY]; n];
    let mut worst: f64 = 0.0;
    let mut solution = vec![vec![0.0; count]; n];
    let centers: Vec<(usize, usize)> =
        (0..side * side).filter(|&k| interior[k]).map(|k| (k % side, k / side)).collect();
    for c in 0..n {
        let mut rhs = vec![0.0; count];
        for (k, row) in rows.iter().enumerate() {
            let (i, j) = centers[k];
            let up = grid.value(i, j)[c];
            for &(theta, coef, ii, jj) in &row.crossings {
                let b = (1.0 - theta) * up + theta * grid.value(ii, jj)[c];
                boundary_range[c][0] = boundary_range[c][0].min(b);
                boundary_range[c][1] = boundary_range[c][1].max(b);
                rhs[k] -= coef * b;
            }
        }
        let mut u = rhs.clone();
        factored.solve(&mut u);
        let residual = |u: &[f64]| -> Vec<f64> {
            (0..count)
                .map(|k| {
                    let row = &rows[k];
                    let mut s = row.diag * u[k];
                    for &(o, cf) in &row.links {
                        s += cf * u[o];
                    }
                    rhs[k] - s
                })
                .collect()
        };
        let mut res = residual(&u);
        let mut norm = res.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (h * h);
        for _ in 0..REFINEMENT_STEPS {
            if norm <= RESIDUAL_TOL {
                break;
            }
            factored.solve(&mut res);
            u.iter_mut().zip(&res).for_each(|(a, d)| *a += d);
            res = residual(&u);
            norm = res.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (h * h);
        }
        if norm > RESIDUAL_TOL {
            return Err(Error::NonConvergence { what: "harmonic extension", iterations: REFINEMENT_STEPS });
        }
        worst = worst.max(norm);
        solution[c] = u;
    }
    for (k, &(i, j)) in centers.iter().enumerate() {
        let dst = grid.value_mut(i, j);
        for c in 0..n {
            dst[c] = solution[c][k];
        }
    }
    Ok(HarmonicExtension { grid, interior: interior.clone(), boundary_range, residual: worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src<F: Fn([f64; 2]) -> f64>(h: f64, f: F) -> GridFunction<f64> {
        GridFunction::from_fn([0.0, 0.0], 0.75, h, 1, |x: [f64; 2], v: &mut [f64]| v[0] = f(x)).unwrap()
    }

    fn max_error<F: Fn([f64; 2]) -> f64>(h: f64, f: F, q: [f64; 2], r: f64) -> f64 {
        let ext = harmonic_extend(&src(h, &f), q, r).unwrap();
        let side = ext.grid.side();
        let mut e: f64 = 0.0;
        for k in 0..side * side {
            if ext.interior[k] {
                let x = ext.grid.node(k % side, k / side);
                e = e.max((ext.grid.value(k % side, k / side)[0] - f(x)).abs());
            }
        }
        e
    }

    #[test]
    fn constants_and_coordinates_are_reproduced() {
        let q = [0.013, -0.021];
        assert!(max_error(1.0 / 32.0, |_| 1.7, q, 0.5) < 1e-12);
        assert!(max_error(1.0 / 32.0, |x| x[0], q, 0.5) < 1e-12);
    }

    #[test]
    fn harmonic_quadratic_converges_at_second_order() {
        let f = |x: [f64; 2]| x[0] * x[0] - x[1] * x[1];
        let q = [0.013, -0.021];
        let e1 = max_error(1.0 / 32.0, f, q, 0.5);
        let e2 = max_error(1.0 / 64.0, f, q, 0.5);
        let order = (e1 / e2).log2();
        assert!(e1 < 1.0 / (32.0 * 32.0), "{e1}");
        assert!(order >= 1.9, "{order} ({e1} -> {e2})");
    }

    #[test]
    fn maximum_principle_and_residual() {
        let ext = harmonic_extend(&src(1.0 / 32.0, |x| (4.0 * x[0]).sin() * (3.0 * x[1]).cos()), [0.0, 0.0], 0.5).unwrap();
        assert!(ext.residual <= RESIDUAL_TOL);
        let [lo, hi] = ext.boundary_range[0];
        for k in 0..ext.interior.len() {
            if ext.interior[k] {
                let v = ext.grid.values[k];
                assert!(v >= lo - 1e-14 && v <= hi + 1e-14);
            }
        }
    }

    #[test]
    fn degenerate_ball() {
        assert!(matches!(
            harmonic_extend(&src(1.0 / 32.0, |_| 0.0), [0.0, 0.0], 0.1),
            Err(Error::DegenerateBall { .. })
        ));
    }
}
