//! Derivatives of polynomials controlled by their L¹ norm on a ball.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::quadrature::disk_nodes;

const STARTS: usize = 100;
const ASCENT_ITERS: usize = 200;
const RADIAL_POINTS: usize = 48;
const ANGULAR_POINTS: usize = 96;
const LINE_POINTS: usize = 4000;

/// Exponent vectors of all monomials of degree `<= degree` in `m` variables, by degree.
pub fn monomials(m: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(m, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=degree {
        rec(m, d, &mut Vec::new(), &mut out);
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

fn monomial(e: &[usize], x: &[f64]) -> f64 {
    e.iter().zip(x).map(|(&p, &v)| v.powi(p as i32)).product()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; npts];
    let mut w = vec![0.0; npts];
    for i in 0..npts {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (npts as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=npts {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = npts as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Quadrature rule on the unit ball of `R^m`, `m <= 3`.
pub fn ball_rule(m: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    match m {
        1 => {
            let h = 2.0 / LINE_POINTS as f64;
            for i in 0..LINE_POINTS {
                pts.push(vec![-1.0 + (i as f64 + 0.5) * h]);
                wts.push(h);
            }
        }
        2 | 3 => {
            let (gx, gw) = gauss_legendre(RADIAL_POINTS);
            let tau = 2.0 * std::f64::consts::PI;
            let dth = tau / ANGULAR_POINTS as f64;
            for (r0, rw) in gx.iter().zip(&gw) {
                let r = 0.5 * (r0 + 1.0);
                let wr = 0.5 * rw * r.powi(m as i32 - 1);
                for a in 0..ANGULAR_POINTS {
                    let th = (a as f64 + 0.5) * dth;
                    if m == 2 {
                        pts.push(vec![r * th.cos(), r * th.sin()]);
                        wts.push(wr * dth);
                    } else {
                        for (c, cw) in gx.iter().zip(&gw) {
                            let s = (1.0 - c * c).sqrt();
                            pts.push(vec![r * s * th.cos(), r * s * th.sin(), r * c]);
                            wts.push(wr * dth * cw);
                        }
                    }
                }
            }
        }
        _ => return Err(Error::InvalidConfig(format!("polynomial oracle supports m <= 3, got {m}"))),
    }
    Ok((pts, wts))
}

/// `sum_k |D^k S(0)|` for coefficients in the monomial basis, with `|.|` the Frobenius
/// norm of the symmetric derivative tensor.
pub fn derivative_norms(exps: &[Vec<usize>], coef: &[f64], degree: usize) -> Vec<f64> {
    let mut sq = vec![0.0; degree + 1];
    for (e, c) in exps.iter().zip(coef) {
        let k: usize = e.iter().sum();
        let alpha: f64 = e.iter().map(|&p| factorial(p)).product();
        sq[k] += factorial(k) * alpha * c * c;
    }
    sq.into_iter().map(f64::sqrt).collect()
}

struct Oracle {
    exps: Vec<Vec<usize>>,
    basis: DMatrix<f64>,
    weights: DVector<f64>,
    degree: usize,
}

impl Oracle {
    fn new(m: usize, degree: usize) -> Result<Self> {
        let exps = monomials(m, degree);
        let (pts, wts) = ball_rule(m)?;
        let basis = DMatrix::from_fn(pts.len(), exps.len(), |p, a| monomial(&exps[a], &pts[p]));
        Ok(Oracle { exps, basis, weights: DVector::from_vec(wts), degree })
    }

    fn l1(&self, c: &DVector<f64>) -> (f64, DVector<f64>) {
        let s = &self.basis * c;
        let sgn = s.map(f64::signum).component_mul(&self.weights);
        (s.abs().dot(&self.weights), self.basis.tr_mul(&sgn))
    }

    fn top(&self, c: &DVector<f64>) -> (f64, DVector<f64>) {
        let norms = derivative_norms(&self.exps, c.as_slice(), self.degree);
        let grad = DVector::from_fn(c.len(), |a, _| {
            let e = &self.exps[a];
            let k: usize = e.iter().sum();
            if norms[k] == 0.0 {
                return 0.0;
            }
            let alpha: f64 = e.iter().map(|&p| factorial(p)).product();
            factorial(k) * alpha * c[a] / norms[k]
        });
        (norms.iter().sum(), grad)
    }

    fn ratio(&self, c: &DVector<f64>) -> f64 {
        let (l1, _) = self.l1(c);
        self.top(c).0 / l1
    }

    /// Projected gradient ascent of `top / l1` on the `l1` unit sphere.
    fn ascend(&self, mut c: DVector<f64>) -> f64 {
        let (l1, _) = self.l1(&c);
        c /= l1;
        let mut val = self.ratio(&c);
        let mut step = 0.1;
        for _ in 0..ASCENT_ITERS {
            let (l1, g1) = self.l1(&c);
            let (top, gt) = self.top(&c);
            let grad = (gt - g1 * (top / l1)) / l1;
            let gn = grad.norm();
            if gn < 1e-14 {
                break;
            }
            loop {
                let trial = &c + &grad * (step / gn);
                let (tl1, _) = self.l1(&trial);
                let trial = trial / tl1;
                let tv = self.ratio(&trial);
                if tv > val {
                    c = trial;
                    val = tv;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
                if step < 1e-12 {
                    return val;
                }
            }
        }
        val
    }
}

/// `C(m, degree) = max sum_k |D^k S(0)|` over polynomials with `∫_{B_1} |S| = 1`.
pub fn poly_constant_oracle(m: usize, degree: usize, seed: u64) -> Result<f64> {
    if degree > 4 || m == 0 || m > 3 {
        return Err(Error::InvalidConfig(format!("oracle needs degree <= 4 and 1 <= m <= 3, got m={m}, degree={degree}")));
    }
    let oracle = Oracle::new(m, degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = oracle.exps.len();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..STARTS {
        let c = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
        if c.norm() == 0.0 {
            continue;
        }
        let v = oracle.ascend(c);
        if v.is_finite() {
            best = best.max(v);
        }
    }
    if !(best > 0.0) {
        return Err(Error::Stagnation);
    }
    Ok(best)
}

/// `∫_{B_r(q)} |R|` for `R(x) = S((x - q) / r)` given by scaled-variable coefficients.
pub fn ball_l1(m: usize, degree: usize, coef: &[f64], r: f64) -> Result<f64> {
    let exps = monomials(m, degree);
    let (pts, wts) = ball_rule(m)?;
    let mut acc = 0.0;
    for (p, w) in pts.iter().zip(&wts) {
        let s: f64 = exps.iter().zip(coef).map(|(e, c)| c * monomial(e, p)).sum();
        acc += w * s.abs();
    }
    Ok(acc * r.powi(m as i32))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyBound {
    pub k: usize,
    /// `|D^k R(q)|`.
    pub value: f64,
    /// `C / r^(m + k) ∫_{B_r(q)} |R|`.
    pub bound: f64,
}

impl PolyBound {
    pub fn holds(&self) -> bool {
        self.value <= self.bound * (1.0 + 1e-9) + 1e-300
    }
}

/// Fits a polynomial of degree `<= degree` to `samples` on `B_r(q)` and compares each
/// `|D^k R(q)|` with the bound from the constant `c`.
pub fn poly_derivative_bound(
    samples: &GridFunction<f64>,
    degree: usize,
    r: f64,
    q: [f64; 2],
    c: f64,
) -> Result<Vec<PolyBound>> {
    if samples.n != 1 {
        return Err(Error::DomainMismatch("polynomial bound needs scalar samples".into()));
    }
    let nodes = disk_nodes(samples, q, r).ok_or(Error::OutsideDomain { what: "polynomial ball" })?;
    let exps = monomials(2, degree);
    let used: Vec<_> = nodes.iter().filter(|n| n.area > 0.25 * samples.h * samples.h).collect();
    if used.len() < exps.len() {
        return Err(Error::TooFewSamples(used.len()));
    }
    let a = DMatrix::from_fn(used.len(), exps.len(), |p, e| {
        let x = samples.node(used[p].i, used[p].j);
        monomial(&exps[e], &[(x[0] - q[0]) / r, (x[1] - q[1]) / r])
    });
    let b = DVector::from_fn(used.len(), |p, _| samples.value(used[p].i, used[p].j)[0]);
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&b, 1e-14).map_err(|_| Error::Degenerate("polynomial fit"))?;
    let resid = (&a * &coef - &b).amax();
    let scale = samples.max_abs();
    if resid > 1e-6 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::FitResidual { residual: resid });
    }
    let l1 = ball_l1(2, degree, coef.as_slice(), r)?;
    let norms = derivative_norms(&exps, coef.as_slice(), degree);
    Ok((0..=degree)
        .map(|k| PolyBound { k, value: norms[k] / r.powi(k as i32), bound: c / r.powi((2 + k) as i32) * l1 })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_count() {
        assert_eq!(monomials(2, 3).len(), 10);
        assert_eq!(monomials(3, 2).len(), 10);
        assert_eq!(monomials(1, 4).len(), 5);
        assert_eq!(monomials(2, 1), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn ball_rules_have_unit_ball_volume() {
        for (m, vol) in [(1, 2.0), (2, std::f64::consts::PI), (3, 4.0 * std::f64::consts::PI / 3.0)] {
            let (_, w) = ball_rule(m).unwrap();
            assert!((w.iter().sum::<f64>() - vol).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_norm_of_product() {
        // S = x y: D^2 S = [[0,1],[1,0]]
        let exps = monomials(2, 2);
        let mut c = vec![0.0; exps.len()];
        let pos = exps.iter().position(|e| e == &vec![1, 1]).unwrap();
        c[pos] = 1.0;
        assert!((derivative_norms(&exps, &c, 2)[2] - 2f64.sqrt()).abs() < 1e-15);
    }
}
