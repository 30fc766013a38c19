//! Slice variation estimate `(|DΦ_ψ|(A))^2 <= 2 e(T, A x R^n, e_m) ||T||(A x R^n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::excess::region_moments;
use crate::geometry::{Region, SampledCurrent};
use crate::quadrature::disk_nodes;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BvCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl BvCheck {
    pub fn ratio(&self) -> f64 {
        if self.rhs > 0.0 {
            self.lhs / self.rhs
        } else if self.lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + slack) + 1e-300
    }
}

/// `psi` returns the value and gradient of the test function at a point of `R^n`;
/// `A` is the base disk `B_radius(center)` in the current's frame. Defects have no
/// sheet over any open set and enter only through the right-hand side.
pub fn bv_slice_check<P>(t: &SampledCurrent, psi: P, center: [f64; 2], radius: f64) -> Result<BvCheck>
where
    P: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let g = &t.base;
    let nodes = t.masked(disk_nodes(g, center, radius).ok_or(Error::OutsideDomain { what: "slice domain" })?);
    let n = t.n();
    let mut df = vec![0.0; 2 * n];
    let mut variation = 0.0;
    for qn in &nodes {
        let (_, dpsi) = psi(g.value(qn.i, qn.j));
        let norm = dpsi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-9 {
            return Err(Error::GradientTooLarge(norm));
        }
        g.gradient(qn.i, qn.j, &mut df);
        let mut d = [0.0; 2];
        for c in 0..n {
            d[0] += dpsi[c] * df[2 * c];
            d[1] += dpsi[c] * df[2 * c + 1];
        }
        variation += d[0].hypot(d[1]) * qn.area;
    }
    let cyl = Region::cylinder(&t.frame, center, radius)?;
    let mom = region_moments(t, &cyl)?;
    let e = mom.excess_against(&t.frame.orientation()) * mom.scale;
    Ok(BvCheck { lhs: variation * variation, rhs: 2.0 * e * mom.mass })
}
