//! Maximal function of the cylindrical excess over a dyadic radius ladder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::multivector::compound;
use crate::geometry::{Region, SampledCurrent};
use crate::grid::GridFunction;
use crate::quadrature::disk_rect_moments;
use crate::scalar::unit_ball_volume;

/// `M_T` on the nodes of the current's base grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaximalField {
    pub values: GridFunction<f64>,
    /// Radius attaining the sup at each node (0 where no ladder radius fits).
    pub argmax: Vec<f64>,
    /// Nodes inside the open base disk of the cylinder.
    pub domain: Vec<bool>,
    pub ladder: Vec<f64>,
    pub center: [f64; 2],
    pub radius: f64,
}

/// Exact cut-cell weights of the disk of radius `s` about a lattice node.
#[derive(Clone, Debug)]
pub(crate) struct DiskStencil {
    pub entries: Vec<(isize, isize, f64, [f64; 2])>,
}

impl DiskStencil {
    pub fn new(s: f64, h: f64) -> Self {
        let reach = (s / h).ceil() as isize + 1;
        let mut entries = Vec::new();
        for b in -reach..=reach {
            for a in -reach..=reach {
                let (xc, yc) = (a as f64 * h, b as f64 * h);
                let [area, mx, my] = disk_rect_moments(s, xc - 0.5 * h, xc + 0.5 * h, yc - 0.5 * h, yc + 0.5 * h);
                if area > 0.0 {
                    entries.push((a, b, area, [mx - xc * area, my - yc * area]));
                }
            }
        }
        Self { entries }
    }
}

/// Dyadic ladder `h 2^k` up to `max`.
pub fn dyadic_ladder(h: f64, max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = h;
    while s <= max * (1.0 + 1e-12) {
        out.push(s);
        s *= 2.0;
    }
    out
}

/// Per-node excess density `J - <T⃗, e_m> J` of the graph (zero in masked columns),
/// with its finite-difference gradient for the cut-cell correction.
pub(crate) fn excess_density(t: &SampledCurrent) -> (Vec<f64>, Vec<[f64; 2]>) {
    let f = t.fields();
    let side = t.base.side();
    let mut val = vec![0.0; side * side];
    let mut grad = vec![[0.0; 2]; side * side];
    for j in 0..side {
        for i in 0..side {
            if !t.in_mask(i, j) {
                continue;
            }
            let k = j * side + i;
            val[k] = f.area.value(i, j)[0] - f.wedge.value(i, j)[0];
            grad[k] = [
                f.area.partial(i, j, 1, 0, 0) - f.wedge.partial(i, j, 1, 0, 0),
                f.area.partial(i, j, 0, 1, 0) - f.wedge.partial(i, j, 0, 1, 0),
            ];
        }
    }
    (val, grad)
}

/// Base points and excess contributions `mu (1 - <τ, e_m>)` of the defects.
pub(crate) fn defect_excess(t: &SampledCurrent) -> Vec<([f64; 2], f64)> {
    let c = compound(t.frame.rotation(), t.m());
    t.defects
        .iter()
        .map(|d| {
            let p = t.frame.to_frame(&d.position);
            let proj: f64 = (0..d.tangent.len()).map(|k| c[(0, k)] * d.tangent[k]).sum();
            ([p[0], p[1]], d.mass * (1.0 - proj))
        })
        .collect()
}

fn check_cylinder(t: &SampledCurrent, c: &Region) -> Result<[f64; 2]> {
    let cf = c.cylinder_frame()?;
    if !cf.same_as(&t.frame) {
        return Err(Error::DomainMismatch("cylinder must be over the current's own plane".into()));
    }
    let q = c.base_point()?;
    if !t.base.contains_square(q, c.radius) {
        return Err(Error::OutsideDomain { what: "cylinder" });
    }
    Ok(q)
}

/// `M_T(x) = max over s in the ladder with B_s(x) ⊂ B_r(q) of Ex(T, C_s(x))`.
pub fn maximal_excess(t: &SampledCurrent, c: &Region, ladder: &[f64]) -> Result<MaximalField> {
    if ladder.is_empty() {
        return Err(Error::EmptyLadder);
    }
    if ladder.iter().any(|&s| !(s > 0.0) || s > c.radius * (1.0 + 1e-12)) {
        return Err(Error::InvalidConfig("ladder radii must lie in (0, r]".into()));
    }
    let q = check_cylinder(t, c)?;
    let r = c.radius;
    let g = &t.base;
    let side = g.side();
    let h = g.h;
    let (dens, dgrad) = excess_density(t);
    let defects = defect_excess(t);
    let omega = unit_ball_volume::<f64>(t.m());

    let mut domain = vec![false; side * side];
    for j in 0..side {
        for i in 0..side {
            let x = g.node(i, j);
            domain[j * side + i] = (x[0] - q[0]).hypot(x[1] - q[1]) < r;
        }
    }
    let mut values = GridFunction::zeros(g.center, g.radius(), h, 1)?;
    let mut argmax = vec![0.0; side * side];
    for &s in ladder {
        let stencil = DiskStencil::new(s, h);
        let norm = omega * s.powi(t.m() as i32);
        for j in 0..side {
            for i in 0..side {
                let x = g.node(i, j);
                if (x[0] - q[0]).hypot(x[1] - q[1]) + s > r * (1.0 + 1e-12) {
                    continue;
                }
                let mut e = 0.0;
                for &(a, b, area, mom) in &stencil.entries {
                    let k = (j as isize + b) as usize * side + (i as isize + a) as usize;
                    e += dens[k] * area + dgrad[k][0] * mom[0] + dgrad[k][1] * mom[1];
                }
                for &(p, w) in &defects {
                    if (p[0] - x[0]).hypot(p[1] - x[1]) < s {
                        e += w;
                    }
                }
                let v = e / norm;
                let slot = &mut values.value_mut(i, j)[0];
                if v > *slot {
                    *slot = v;
                    argmax[j * side + i] = s;
                }
            }
        }
    }
    Ok(MaximalField { values, argmax, domain, ladder: ladder.to_vec(), center: q, radius: r })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoodSet {
    pub k: Vec<bool>,
    /// Enlarged bad set `{M > threshold / 2^m}`.
    pub enlarged_bad: Vec<bool>,
    pub threshold: f64,
}

/// `K = {M <= threshold}` and `L = {M > threshold / 2^m}`, both within the domain.
pub fn good_set(field: &MaximalField, threshold: f64, m: usize) -> GoodSet {
    let l_thr = threshold / 2f64.powi(m as i32);
    let vals = &field.values.values;
    let k = vals.iter().zip(&field.domain).map(|(&v, &d)| d && v <= threshold).collect();
    let enlarged_bad = vals.iter().zip(&field.domain).map(|(&v, &d)| d && v > l_thr).collect();
    GoodSet { k, enlarged_bad, threshold }
}
