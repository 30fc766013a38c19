//! Dyadic cubes of side `2 * 2^-k` centered on `2^-k Z^2` that meet `Q`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two cubes are adjacent when their bumps can overlap: `|i - j|_inf <= ADJACENT_REACH`.
pub const ADJACENT_REACH: i64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicGrid {
    pub k: u32,
    pub n0: u32,
    /// Integer labels `i` with `c_i = 2^-k i`, row-major in `(i1, i2)`.
    pub cubes: Vec<[i64; 2]>,
    /// Indices into `cubes`, each list sorted and containing the cube itself.
    pub adjacency: Vec<Vec<usize>>,
}

pub fn dyadic_grid(k: u32, n0: u32) -> Result<DyadicGrid> {
    if !(5 < n0 && n0 < k) || k > 30 {
        return Err(Error::DepthBounds { n0, k });
    }
    // closed cube [c - s, c + s] meets [-2^-n0, 2^-n0] iff |i| <= 2^(k - n0) + 1
    let reach = (1i64 << (k - n0)) + 1;
    let mut cubes = Vec::new();
    for a in -reach..=reach {
        for b in -reach..=reach {
            cubes.push([a, b]);
        }
    }
    let side = 2 * reach + 1;
    let adjacency = cubes
        .iter()
        .map(|c| {
            let mut adj = Vec::new();
            for a in (c[0] - ADJACENT_REACH).max(-reach)..=(c[0] + ADJACENT_REACH).min(reach) {
                for b in (c[1] - ADJACENT_REACH).max(-reach)..=(c[1] + ADJACENT_REACH).min(reach) {
                    adj.push(((a + reach) * side + (b + reach)) as usize);
                }
            }
            adj
        })
        .collect();
    Ok(DyadicGrid { k, n0, cubes, adjacency })
}

impl DyadicGrid {
    pub fn step(&self) -> f64 {
        (-(self.k as f64)).exp2()
    }

    /// Half-width of `Q`.
    pub fn q_radius(&self) -> f64 {
        (-(self.n0 as f64)).exp2()
    }

    pub fn half_side(&self) -> f64 {
        self.step()
    }

    fn reach(&self) -> i64 {
        (1i64 << (self.k - self.n0)) + 1
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        let s = self.step();
        [self.cubes[idx][0] as f64 * s, self.cubes[idx][1] as f64 * s]
    }

    pub fn index_of(&self, label: [i64; 2]) -> Option<usize> {
        let r = self.reach();
        if label.iter().any(|v| v.abs() > r) {
            return None;
        }
        Some(((label[0] + r) * (2 * r + 1) + (label[1] + r)) as usize)
    }

    /// Cubes whose closed cube contains `q`.
    pub fn containing(&self, q: [f64; 2]) -> Vec<usize> {
        let s = self.step();
        let mut out = Vec::new();
        let lo = [(q[0] / s - 1.0).ceil() as i64, (q[1] / s - 1.0).ceil() as i64];
        let hi = [(q[0] / s + 1.0).floor() as i64, (q[1] / s + 1.0).floor() as i64];
        for a in lo[0]..=hi[0] {
            for b in lo[1]..=hi[1] {
                if let Some(i) = self.index_of([a, b]) {
                    out.push(i);
                }
            }
        }
        out
    }

    pub fn in_q(&self, q: [f64; 2]) -> bool {
        let r = self.q_radius();
        q.iter().all(|v| v.abs() <= r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_bounds() {
        assert!(dyadic_grid(6, 6).is_err());
        assert!(dyadic_grid(7, 5).is_err());
        assert!(dyadic_grid(7, 6).is_ok());
    }

    #[test]
    fn count_by_enumeration() {
        for k in 7..=9 {
            let g = dyadic_grid(k, 6).unwrap();
            let s = g.step();
            let qr = g.q_radius();
            let mut count = 0;
            for a in -100i64..=100 {
                for b in -100i64..=100 {
                    let c = [a as f64 * s, b as f64 * s];
                    if c.iter().all(|v| v.abs() - s <= qr) {
                        count += 1;
                    }
                }
            }
            assert_eq!(g.cubes.len(), count);
            let side = 2 * (1usize << (k - 6)) + 3;
            assert_eq!(count, side * side);
        }
    }

    #[test]
    fn adjacency_and_lookup() {
        let g = dyadic_grid(8, 6).unwrap();
        let mid = g.index_of([0, 0]).unwrap();
        assert_eq!(g.adjacency[mid].len(), 25);
        assert!(g.adjacency.iter().all(|a| a.len() <= 25));
        for (i, c) in g.cubes.iter().enumerate() {
            assert_eq!(g.index_of(*c), Some(i));
        }
        assert_eq!(g.center(mid), [0.0, 0.0]);
        assert_eq!(g.containing([0.5 * g.step(), 0.5 * g.step()]).len(), 4);
    }
}
