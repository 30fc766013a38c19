//! Sampled Hölder seminorm of a nodal field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

pub const HOLDER_PAIRS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub seminorm: f64,
    pub alpha: f64,
    /// Nodes of the maximizing pair.
    pub argmax: [[f64; 2]; 2],
    pub pairs: usize,
}

fn quotient(field: &GridFunction<f64>, a: (usize, usize), b: (usize, usize), alpha: f64) -> f64 {
    let (x, y) = (field.node(a.0, a.1), field.node(b.0, b.1));
    let d = (x[0] - y[0]).hypot(x[1] - y[1]);
    let diff: f64 =
        field.value(a.0, a.1).iter().zip(field.value(b.0, b.1)).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    diff / d.powf(alpha)
}

/// `max |F(q) - F(q')| / |q - q'|^alpha` over seeded random node pairs with
/// `|q - q'| >= 2h`, plus the corner pairs. Differences use the Euclidean norm of
/// all components.
pub fn holder_seminorm(field: &GridFunction<f64>, alpha: f64, seed: u64) -> Result<HolderEstimate> {
    let side = field.side();
    if side < 3 {
        return Err(Error::TooFewSamples(side * side));
    }
    let last = side - 1;
    let corners = [(0, 0), (last, 0), (0, last), (last, last)];
    let mut best = (0.0, corners[0], corners[3]);
    let mut consider = |a: (usize, usize), b: (usize, usize)| {
        let q = quotient(field, a, b, alpha);
        if q > best.0 {
            best = (q, a, b);
        }
    };
    for (ia, &a) in corners.iter().enumerate() {
        for &b in &corners[ia + 1..] {
            consider(a, b);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_sep2 = 4 * 4;
    let mut used = 0;
    while used < HOLDER_PAIRS {
        let a = (rng.gen_range(0..side), rng.gen_range(0..side));
        let b = (rng.gen_range(0..side), rng.gen_range(0..side));
        let di = a.0.abs_diff(b.0);
        let dj = a.1.abs_diff(b.1);
        if di * di + dj * dj < min_sep2 {
            continue;
        }
        consider(a, b);
        used += 1;
    }
    Ok(HolderEstimate {
        seminorm: best.0,
        alpha,
        argmax: [field.node(best.1 .0, best.1 .1), field.node(best.2 .0, best.2 .1)],
        pairs: used + 6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_linear_fields() {
        let g = GridFunction::from_fn([0.0, 0.0], 1.0, 1.0 / 32.0, 1, |_, v| v[0] = 2.0).unwrap();
        assert_eq!(holder_seminorm(&g, 0.5, 1).unwrap().seminorm, 0.0);
        let g = GridFunction::from_fn([0.0, 0.0], 1.0, 1.0 / 32.0, 1, |x, v| v[0] = 3.0 * x[0] + 4.0 * x[1]).unwrap();
        let est = holder_seminorm(&g, 0.5, 1).unwrap();
        // along the diagonal the quotient is 7 d / sqrt(2) / d^0.5 with d = 2 sqrt 2
        let d = 2.0 * 2f64.sqrt();
        let exact = 7.0 * d / 2f64.sqrt() / d.sqrt();
        assert!((est.seminorm - exact).abs() < 0.02 * exact, "{} vs {exact}", est.seminorm);
    }
}
