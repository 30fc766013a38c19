//! Simple m-vectors in Plücker coordinates.
//!
//! An oriented m-plane spanned by the columns of a `d x m` matrix `V` is stored as
//! the vector of its `m x m` row minors, indexed by the increasing row subsets in
//! lexicographic order. The inner product of two such vectors is the Euclidean one.

use nalgebra::DMatrix;

pub fn binomial(d: usize, m: usize) -> usize {
    if m > d {
        return 0;
    }
    (0..m).fold(1usize, |acc, i| acc * (d - i) / (i + 1))
}

/// Increasing `m`-subsets of `0..d` in lexicographic order.
pub fn subsets(d: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(d, m));
    let mut cur: Vec<usize> = (0..m).collect();
    if m > d {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut k = m;
        while k > 0 && cur[k - 1] == d - m + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        cur[k - 1] += 1;
        for t in k..m {
            cur[t] = cur[t - 1] + 1;
        }
    }
    out
}

fn minor(v: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    match k {
        0 => 1.0,
        1 => v[(rows[0], cols[0])],
        2 => v[(rows[0], cols[0])] * v[(rows[1], cols[1])] - v[(rows[1], cols[0])] * v[(rows[0], cols[1])],
        _ => DMatrix::from_fn(k, k, |a, b| v[(rows[a], cols[b])]).determinant(),
    }
}

/// Plücker coordinates of the columns of `v` (`d x m`), not normalized.
pub fn wedge_columns(v: &DMatrix<f64>) -> Vec<f64> {
    let (d, m) = v.shape();
    let cols: Vec<usize> = (0..m).collect();
    subsets(d, m).iter().map(|rows| minor(v, rows, &cols)).collect()
}

/// The `m`-th compound matrix of `a`: the action of `a` on Plücker coordinates.
pub fn compound(a: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let d = a.nrows();
    let subs = subsets(d, m);
    let k = subs.len();
    DMatrix::from_fn(k, k, |r, c| minor(a, &subs[r], &subs[c]))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Plücker coordinates of the graph tangent `(e_1 + L e_1) ∧ ... ∧ (e_m + L e_m)`
/// for the `n x m` gradient `grad` (row-major), written into `out`. The norm of the
/// result is the area element `sqrt(det(I + L^T L))`.
pub fn graph_wedge(m: usize, n: usize, grad: &[f64], subs: &[Vec<usize>], out: &mut [f64]) {
    let entry = |row: usize, col: usize| -> f64 {
        if row < m {
            if row == col {
                1.0
            } else {
                0.0
            }
        } else {
            grad[(row - m) * m + col]
        }
    };
    if m == 2 {
        for (k, s) in subs.iter().enumerate() {
            let (a, b) = (s[0], s[1]);
            out[k] = entry(a, 0) * entry(b, 1) - entry(b, 0) * entry(a, 1);
        }
        return;
    }
    let v = DMatrix::from_fn(m + n, m, entry);
    let cols: Vec<usize> = (0..m).collect();
    for (k, s) in subs.iter().enumerate() {
        out[k] = minor(&v, s, &cols);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(5, 2).len(), 10);
        assert_eq!(binomial(6, 3), 20);
    }

    #[test]
    fn graph_wedge_norm_is_area_element() {
        let subs = subsets(4, 2);
        let grad = [0.3, -0.1, 0.2, 0.5]; // n = 2
        let mut w = vec![0.0; subs.len()];
        graph_wedge(2, 2, &grad, &subs, &mut w);
        let l = DMatrix::from_row_slice(2, 2, &grad);
        let g = DMatrix::<f64>::identity(2, 2) + l.transpose() * &l;
        assert!((norm(&w) - g.determinant().sqrt()).abs() < 1e-14);
        assert_eq!(w[0], 1.0);
    }

    #[test]
    fn compound_is_multiplicative() {
        let a = DMatrix::from_fn(3, 3, |r, c| ((r * 3 + c) as f64).sin());
        let b = DMatrix::from_fn(3, 3, |r, c| ((r + 2 * c) as f64).cos());
        let lhs = compound(&(&a * &b), 2);
        let rhs = compound(&a, 2) * compound(&b, 2);
        assert!((lhs - rhs).abs().max() < 1e-12);
    }
}
