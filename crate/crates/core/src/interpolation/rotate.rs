//! Re-expressing a graph in rotated coordinates.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::lipschitz::measured_lipschitz;
use crate::quadrature::disk_nodes;

pub const INVERSE_TOL: f64 = 1e-12;
pub const INVERSE_MAX_ITERS: usize = 50;

/// Target lattice of a resampling.
#[derive(Clone, Copy, Debug)]
pub struct Lattice {
    pub center: [f64; 2],
    pub half: usize,
    pub h: f64,
}

/// Given `f` over the plane `{y = 0}` and the coordinate change `x' = A x`, returns `f'`
/// with `graph(f') = A graph(f)` sampled on `target`. `q` is the base point, `u` the
/// fiber value near it and `r` the radius of the target disk `B_r(q')`; the inverse
/// images must stay in `B_{2r}(q)`.
pub fn rotate_graph(
    f: &GridFunction<f64>,
    a: &DMatrix<f64>,
    q: [f64; 2],
    u: &[f64],
    r: f64,
    c0: f64,
    target: Lattice,
) -> Result<GridFunction<f64>> {
    let n = f.n;
    let d = 2 + n;
    if a.shape() != (d, d) {
        return Err(Error::DomainMismatch("rotation size does not match the graph".into()));
    }
    let gap = (a - DMatrix::<f64>::identity(d, d)).svd(false, false).singular_values.max();
    if gap > c0 {
        return Err(Error::RotationPrecondition(format!("|A - Id| = {gap:.3e} > {c0}")));
    }
    let side = f.side();
    let near: Vec<bool> = (0..side * side)
        .map(|k| {
            let x = f.node(k % side, k / side);
            (x[0] - q[0]).hypot(x[1] - q[1]) <= 2.0 * r + 1e-12
        })
        .collect();
    let lip = measured_lipschitz(f, Some(&near));
    if lip > c0 {
        return Err(Error::RotationPrecondition(format!("Lip(f) = {lip:.3e} > {c0}")));
    }
    let mut fq = vec![0.0; n];
    f.eval(q, &mut fq, None)?;
    let off: f64 = fq.iter().zip(u).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    if off > c0 * r {
        return Err(Error::RotationPrecondition(format!("|f(q) - u| = {off:.3e} > c0 r")));
    }

    let mut out = GridFunction::zeros(target.center, target.half as f64 * target.h, target.h, n)?;
    let mut val = vec![0.0; n];
    let mut grad = vec![0.0; 2 * n];
    let forward = |x: [f64; 2], v: &[f64]| -> DVector<f64> {
        let mut p = DVector::zeros(d);
        p[0] = x[0];
        p[1] = x[1];
        for c in 0..n {
            p[2 + c] = v[c];
        }
        a * p
    };
    let at = a.transpose();
    for j in 0..out.side() {
        for i in 0..out.side() {
            let xp = out.node(i, j);
            // initial guess: base projection of the point over x' at the reference height
            let mut guess = DVector::zeros(d);
            guess[0] = xp[0];
            guess[1] = xp[1];
            for c in 0..n {
                guess[2 + c] = fq[c];
            }
            let back = &at * guess;
            let mut x = [back[0], back[1]];
            let mut converged = false;
            let mut res_norm;
            for _ in 0..INVERSE_MAX_ITERS {
                f.eval(x, &mut val, Some(&mut grad))?;
                let img = forward(x, &val);
                let res = Vector2::new(img[0] - xp[0], img[1] - xp[1]);
                res_norm = res.norm();
                if res_norm <= INVERSE_TOL * (1.0 + xp[0].abs() + xp[1].abs()) {
                    converged = true;
                    break;
                }
                // D I = P A [Id; Df]
                let mut jac = Matrix2::zeros();
                for row in 0..2 {
                    for col in 0..2 {
                        let mut s = a[(row, col)];
                        for c in 0..n {
                            s += a[(row, 2 + c)] * grad[2 * c + col];
                        }
                        jac[(row, col)] = s;
                    }
                }
                let step = jac.lu().solve(&res).ok_or(Error::Degenerate("singular projection Jacobian"))?;
                let mut t = 1.0;
                loop {
                    let trial = [x[0] - t * step[0], x[1] - t * step[1]];
                    if f.eval(trial, &mut val, None).is_ok() {
                        let img = forward(trial, &val);
                        let tn = (img[0] - xp[0]).hypot(img[1] - xp[1]);
                        if tn < res_norm || t < 1e-3 {
                            x = trial;
                            break;
                        }
                    }
                    t *= 0.5;
                    if t < 1e-3 {
                        return Err(Error::NonConvergence { what: "graph rotation inverse", iterations: INVERSE_MAX_ITERS });
                    }
                }
            }
            if !converged {
                return Err(Error::NonConvergence { what: "graph rotation inverse", iterations: INVERSE_MAX_ITERS });
            }
            if (x[0] - q[0]).hypot(x[1] - q[1]) > 2.0 * r {
                return Err(Error::RotationPrecondition("preimage leaves B_2r(q)".into()));
            }
            f.eval(x, &mut val, None)?;
            let img = forward(x, &val);
            let dst = out.value_mut(i, j);
            for c in 0..n {
                dst[c] = img[2 + c];
            }
        }
    }
    Ok(out)
}

/// `(‖f' - g'‖_{L¹(B_r(q'))}, ‖f - g‖_{L¹(B_{2r}(q))})` for graphs re-expressed in
/// the coordinates `x' = A x`, with `(q', u') = A (q, u)`. Norms use the Euclidean
/// length of the fiber difference.
pub fn rotation_l1_comparison(
    f: &GridFunction<f64>,
    g: &GridFunction<f64>,
    a: &DMatrix<f64>,
    q: [f64; 2],
    u: &[f64],
    r: f64,
    c0: f64,
) -> Result<(f64, f64)> {
    if f.n != g.n || f.h != g.h || f.center != g.center || f.half != g.half {
        return Err(Error::DomainMismatch("f and g must share a lattice".into()));
    }
    let n = f.n;
    let mut p = DVector::zeros(2 + n);
    p[0] = q[0];
    p[1] = q[1];
    for c in 0..n {
        p[2 + c] = u[c];
    }
    let qp = a * p;
    let target = Lattice { center: [qp[0], qp[1]], half: (r / f.h).ceil() as usize, h: f.h };
    let fp = rotate_graph(f, a, q, u, r, c0, target)?;
    let gp = rotate_graph(g, a, q, u, r, c0, target)?;
    let l1 = |x: &GridFunction<f64>, y: &GridFunction<f64>, c: [f64; 2], radius: f64| -> Result<f64> {
        let nodes = disk_nodes(x, c, radius).ok_or(Error::OutsideDomain { what: "rotation comparison disk" })?;
        Ok(nodes
            .iter()
            .map(|nd| {
                let d: f64 =
                    x.value(nd.i, nd.j).iter().zip(y.value(nd.i, nd.j)).map(|(s, t)| (s - t).powi(2)).sum::<f64>();
                nd.area * d.sqrt()
            })
            .sum())
    };
    Ok((l1(&fp, &gp, target.center, r)?, l1(f, g, q, 2.0 * r)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::frame::plane_rotation;

    fn lattice() -> Lattice {
        Lattice { center: [0.0, 0.0], half: 8, h: 1.0 / 32.0 }
    }

    fn source<F: Fn([f64; 2]) -> f64>(f: F) -> GridFunction<f64> {
        GridFunction::from_fn([0.0, 0.0], 0.75, 1.0 / 32.0, 1, |x: [f64; 2], v: &mut [f64]| v[0] = f(x)).unwrap()
    }

    #[test]
    fn identity_resamples() {
        let f = source(|x| 0.05 * (x[0] * x[0] - x[1] * x[1]));
        let a = DMatrix::identity(3, 3);
        let g = rotate_graph(&f, &a, [0.0, 0.0], &[0.0], 0.25, 0.1, lattice()).unwrap();
        for j in 0..g.side() {
            for i in 0..g.side() {
                let x = g.node(i, j);
                assert!((g.value(i, j)[0] - 0.05 * (x[0] * x[0] - x[1] * x[1])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tilted_plane_rotates_flat() {
        let slope: f64 = 0.08;
        let f = source(|x| slope * x[0]);
        // x' = A x with A rotating e1 toward -e3 by atan(slope)
        let a = plane_rotation(3, 0, 2, -slope.atan());
        let g = rotate_graph(&f, &a, [0.0, 0.0], &[0.0], 0.25, 0.1, lattice()).unwrap();
        assert!(g.max_abs() < 1e-8, "{}", g.max_abs());
    }

    #[test]
    fn flat_plane_tilts() {
        let theta: f64 = 0.05;
        let f = source(|_| 0.0);
        let a = plane_rotation(3, 0, 2, theta);
        let g = rotate_graph(&f, &a, [0.0, 0.0], &[0.0], 0.25, 0.1, lattice()).unwrap();
        for j in 0..g.side() {
            for i in 0..g.side() {
                let x = g.node(i, j);
                assert!((g.value(i, j)[0] - theta.tan() * x[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn preconditions() {
        let steep = source(|x| 0.5 * x[0]);
        let a = DMatrix::identity(3, 3);
        assert!(matches!(
            rotate_graph(&steep, &a, [0.0, 0.0], &[0.0], 0.25, 0.1, lattice()),
            Err(Error::RotationPrecondition(_))
        ));
        let flat = source(|_| 0.0);
        let big = plane_rotation(3, 0, 2, 0.3);
        assert!(rotate_graph(&flat, &big, [0.0, 0.0], &[0.0], 0.25, 0.1, lattice()).is_err());
    }
}
