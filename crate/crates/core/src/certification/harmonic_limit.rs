//! Blow-up of Lipschitz approximations towards a harmonic function.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::ConstantsConfig;
use crate::error::{Error, Result};
use crate::geometry::{Frame, Region};
use crate::grid::GridFunction;
use crate::harness::SurfaceSpec;
use crate::lipschitz::approximate;
use crate::quadrature::{disk_nodes, QuadNode};
use crate::scalar::unit_ball_volume;

pub const HARMONIC_DEGREE: usize = 4;
const MIN_EXCESS: f64 = 1e-14;
const ENERGY_SLACK: f64 = 0.05;
/// Fit distances below this are roundoff and count as equal.
const DISTANCE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUp {
    pub excess: f64,
    /// `W^{1,2}(B_{r/2})` distance from `u_l` to the best harmonic polynomial.
    pub distance: f64,
    /// `∫_{B_s} |Du_l|^2`.
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicLimit {
    pub steps: Vec<BlowUp>,
    pub energy_bound: f64,
    pub nonincreasing: bool,
    pub energy_ok: bool,
}

/// Values and gradients of the real harmonic polynomials `1, Re z^k, Im z^k`.
fn harmonic_basis(x: [f64; 2]) -> Vec<(f64, [f64; 2])> {
    let mut out = vec![(1.0, [0.0, 0.0])];
    // z^{k-1} as (re, im)
    let mut prev = (1.0, 0.0);
    for k in 1..=HARMONIC_DEGREE {
        let cur = (prev.0 * x[0] - prev.1 * x[1], prev.0 * x[1] + prev.1 * x[0]);
        let kf = k as f64;
        let d = (kf * prev.0, kf * prev.1);
        out.push((cur.0, [d.0, -d.1]));
        out.push((cur.1, [d.1, d.0]));
        prev = cur;
    }
    out
}

/// Squared `W^{1,2}` distance of one component to the span of the harmonic basis.
fn fit_component(u: &GridFunction<f64>, c: usize, nodes: &[QuadNode], center: [f64; 2], r: f64) -> Result<f64> {
    let nb = 1 + 2 * HARMONIC_DEGREE;
    let rows = 3 * nodes.len();
    let mut a = DMatrix::zeros(rows, nb);
    let mut b = DVector::zeros(rows);
    for (k, q) in nodes.iter().enumerate() {
        let w = q.area.sqrt();
        let x = u.node(q.i, q.j);
        let y = [(x[0] - center[0]) / r, (x[1] - center[1]) / r];
        for (col, (v, g)) in harmonic_basis(y).into_iter().enumerate() {
            a[(3 * k, col)] = w * v;
            a[(3 * k + 1, col)] = w * g[0] / r;
            a[(3 * k + 2, col)] = w * g[1] / r;
        }
        b[3 * k] = w * u.value(q.i, q.j)[c];
        b[3 * k + 1] = w * u.partial(q.i, q.j, 1, 0, c);
        b[3 * k + 2] = w * u.partial(q.i, q.j, 0, 1, c);
    }
    let coef = a.clone().svd(true, true).solve(&b, 1e-12).map_err(|_| Error::Degenerate("harmonic fit"))?;
    Ok((&a * coef - b).norm_squared())
}

/// For each surface, the Lipschitz approximation `f_l` on `C_r`, the blow-up
/// `u_l = (f_l - mean) / sqrt(E_l)` and its distance to harmonic polynomials on `B_{r/2}`.
pub fn harmonic_limit_check(family: &[SurfaceSpec], r: f64, cfg: &ConstantsConfig) -> Result<HarmonicLimit> {
    if family.len() < 3 {
        return Err(Error::TooFewSamples(family.len()));
    }
    let mut steps = Vec::with_capacity(family.len());
    for spec in family {
        let t = spec.generate()?;
        let frame = Frame::reference(t.m(), t.n());
        let cyl = Region::cylinder(&frame, [0.0, 0.0], r)?;
        let approx = approximate(&t, &cyl, cfg)?;
        let e = approx.excess;
        if e < MIN_EXCESS {
            return Err(Error::Degenerate("excess vanishes, blow-up undefined"));
        }
        let f = &approx.f;
        let s = approx.shrunk_radius;
        let ns = disk_nodes(f, approx.center, s).ok_or(Error::OutsideDomain { what: "blow-up ball" })?;
        let area: f64 = ns.iter().map(|q| q.area).sum();
        let n = f.n;
        let mean: Vec<f64> = (0..n).map(|c| ns.iter().map(|q| q.area * f.value(q.i, q.j)[c]).sum::<f64>() / area).collect();
        let scale = 1.0 / e.sqrt();
        let mut u = f.clone();
        for chunk in u.values.chunks_mut(n) {
            for (v, m) in chunk.iter_mut().zip(&mean) {
                *v = (*v - m) * scale;
            }
        }
        let mut energy = 0.0;
        for q in &ns {
            for c in 0..n {
                energy += q.area * (u.partial(q.i, q.j, 1, 0, c).powi(2) + u.partial(q.i, q.j, 0, 1, c).powi(2));
            }
        }
        let half = disk_nodes(&u, approx.center, 0.5 * r).ok_or(Error::OutsideDomain { what: "fit ball" })?;
        let mut dist2 = 0.0;
        for c in 0..n {
            dist2 += fit_component(&u, c, &half, approx.center, 0.5 * r)?;
        }
        steps.push(BlowUp { excess: e, distance: dist2.sqrt(), energy });
    }
    let energy_bound = 2.0 * unit_ball_volume::<f64>(2) * r * r * (1.0 + ENERGY_SLACK);
    let nonincreasing = steps.windows(2).all(|w| w[1].distance <= w[0].distance + DISTANCE_FLOOR);
    let energy_ok = steps.last().map(|s| s.energy <= energy_bound).unwrap_or(false);
    Ok(HarmonicLimit { steps, energy_bound, nonincreasing, energy_ok })
}
