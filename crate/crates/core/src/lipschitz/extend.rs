//! Lipschitz extension from a set of lattice nodes.

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Node pairs at lattice distance up to this many steps are used to measure Lipschitz
/// constants.
pub const LIP_REACH: isize = 4;

/// Largest componentwise difference quotient over node pairs within `LIP_REACH`
/// steps, both in `mask` (all nodes when `None`).
pub fn measured_lipschitz(g: &GridFunction<f64>, mask: Option<&[bool]>) -> f64 {
    let side = g.side() as isize;
    let inside = |i: isize, j: isize| mask.map_or(true, |m| m[(j * side + i) as usize]);
    let mut best: f64 = 0.0;
    for j in 0..side {
        for i in 0..side {
            if !inside(i, j) {
                continue;
            }
            let v = g.value(i as usize, j as usize);
            // half-plane of offsets so every pair is visited once
            for b in 0..=LIP_REACH {
                for a in -LIP_REACH..=LIP_REACH {
                    if (b == 0 && a <= 0) || a * a + b * b > LIP_REACH * LIP_REACH {
                        continue;
                    }
                    let (ii, jj) = (i + a, j + b);
                    if ii < 0 || ii >= side || jj >= side || !inside(ii, jj) {
                        continue;
                    }
                    let w = g.value(ii as usize, jj as usize);
                    let d = g.h * ((a * a + b * b) as f64).sqrt();
                    for c in 0..g.n {
                        best = best.max((v[c] - w[c]).abs() / d);
                    }
                }
            }
        }
    }
    best
}

/// Extends the values of `g` on the nodes flagged by `k` to every node by the mean of
/// the lower and upper McShane extensions, componentwise:
/// `h = (min_y (g(y) + L|x - y|) + max_y (g(y) - L|x - y|)) / 2`.
pub fn lipschitz_extend(g: &GridFunction<f64>, k: &[bool], lip_bound: f64) -> Result<GridFunction<f64>> {
    if k.len() != g.node_count() {
        return Err(Error::DomainMismatch("mask length does not match grid".into()));
    }
    let side = g.side();
    let good: Vec<(usize, usize)> =
        (0..side).flat_map(|j| (0..side).map(move |i| (i, j))).filter(|&(i, j)| k[j * side + i]).collect();
    if good.is_empty() {
        return Err(Error::EmptyGoodSet);
    }
    let measured = measured_lipschitz(g, Some(k));
    if measured > 1.05 * lip_bound {
        return Err(Error::LipschitzViolation { measured, bound: lip_bound });
    }
    let n = g.n;
    let mut gmin = vec![f64::INFINITY; n];
    let mut gmax = vec![f64::NEG_INFINITY; n];
    for &(a, b) in &good {
        for (c, v) in g.value(a, b).iter().enumerate() {
            gmin[c] = gmin[c].min(*v);
            gmax[c] = gmax[c].max(*v);
        }
    }
    let mut out = g.clone();
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    let s = side as isize;
    for j in 0..side {
        for i in 0..side {
            if k[j * side + i] {
                continue;
            }
            let x = g.node(i, j);
            lo.iter_mut().for_each(|v| *v = f64::INFINITY);
            hi.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
            // scan Chebyshev rings outward; nodes beyond ring t are at least (t + 1) h
            // away, which bounds how much they can still improve either envelope
            for t in 0..s {
                let (ci, cj) = (i as isize, j as isize);
                let mut visit = |a: isize, b: isize| {
                    if a < 0 || b < 0 || a >= s || b >= s || !k[(b * s + a) as usize] {
                        return;
                    }
                    let y = g.node(a as usize, b as usize);
                    let (dx, dy) = (x[0] - y[0], x[1] - y[1]);
                    let d = lip_bound * (dx * dx + dy * dy).sqrt();
                    for (c, v) in g.value(a as usize, b as usize).iter().enumerate() {
                        lo[c] = lo[c].min(v + d);
                        hi[c] = hi[c].max(v - d);
                    }
                };
                if t == 0 {
                    visit(ci, cj);
                } else {
                    for a in ci - t..=ci + t {
                        visit(a, cj - t);
                        visit(a, cj + t);
                    }
                    for b in cj - t + 1..cj + t {
                        visit(ci - t, b);
                        visit(ci + t, b);
                    }
                }
                let reach = lip_bound * (t + 1) as f64 * g.h;
                if (0..n).all(|c| reach >= lo[c] - gmin[c] && reach >= gmax[c] - hi[c]) {
                    break;
                }
            }
            let dst = out.value_mut(i, j);
            for c in 0..n {
                dst[c] = 0.5 * (lo[c] + hi[c]);
            }
        }
    }
    Ok(out)
}
