//! Finite-difference and interpolation weights on uniform lattices.

use std::sync::OnceLock;

/// Fornberg's recursion: weights of the `order`-th derivative at `x0` from samples at `xs`.
pub fn fornberg(order: usize, x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert!(order < n, "need more points than the derivative order");
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

pub const MAX_ORDER: usize = 4;

struct Table {
    // [order] -> centered (offset, weights)
    centered: Vec<(isize, Vec<f64>)>,
    // [order][d] -> stencil starting d nodes left of the evaluation node
    left: Vec<Vec<(isize, Vec<f64>)>>,
    right: Vec<Vec<(isize, Vec<f64>)>>,
}

fn half_width(order: usize) -> usize {
    order.div_ceil(2)
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut centered = Vec::new();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for order in 0..=MAX_ORDER {
            let p = half_width(order) as isize;
            let xs: Vec<f64> = (-p..=p).map(|o| o as f64).collect();
            centered.push((-p, fornberg(order, 0.0, &xs)));
            // one-sided variants use order+2 points, second-order accurate
            let npts = (order + 2) as isize;
            let mut l = Vec::new();
            let mut r = Vec::new();
            for d in 0..p {
                let xs: Vec<f64> = (-d..npts - d).map(|o| o as f64).collect();
                l.push((-d, fornberg(order, 0.0, &xs)));
                let xs: Vec<f64> = (d - npts + 1..=d).map(|o| o as f64).collect();
                r.push((d - npts + 1, fornberg(order, 0.0, &xs)));
            }
            left.push(l);
            right.push(r);
        }
        Table { centered, left, right }
    })
}

/// Unit-spacing stencil for the `order`-th derivative at node `i` of a line of `len` nodes.
/// Returns the offset of the first weight relative to `i`.
pub fn axis_stencil(order: usize, i: usize, len: usize) -> (isize, &'static [f64]) {
    let t = table();
    let p = half_width(order);
    if i >= p && i + p < len {
        let (o, w) = &t.centered[order];
        (*o, w)
    } else if i < p {
        let (o, w) = &t.left[order][i];
        (*o, w)
    } else {
        let (o, w) = &t.right[order][len - 1 - i];
        (*o, w)
    }
}

/// Minimum number of nodes per line needed for `order`.
pub fn min_line_len(order: usize) -> usize {
    order + 2
}

/// Lagrange weights (values and first derivatives, unit spacing) for nodes
/// `0..npts` evaluated at fractional position `t`.
pub fn lagrange_weights(t: f64, npts: usize, vals: &mut [f64], ders: &mut [f64]) {
    for j in 0..npts {
        let xj = j as f64;
        let mut num = 1.0;
        let mut den = 1.0;
        for k in 0..npts {
            if k != j {
                num *= t - k as f64;
                den *= xj - k as f64;
            }
        }
        vals[j] = num / den;
        // derivative: sum over dropped factor
        let mut d = 0.0;
        for l in 0..npts {
            if l == j {
                continue;
            }
            let mut p = 1.0;
            for k in 0..npts {
                if k != j && k != l {
                    p *= t - k as f64;
                }
            }
            d += p;
        }
        ders[j] = d / den;
    }
}
