//! The three-step interpolation: Lipschitz approximation, mollification, harmonic
//! extension, and rotation back to reference coordinates.

use serde::{Deserialize, Serialize};

use super::harmonic::harmonic_extend;
use super::mollify::mollify;
use super::rotate::{rotate_graph, Lattice};
use crate::config::ConstantsConfig;
use crate::error::{Error, Result};
use crate::geometry::{is_admissible, Frame, Region, SampledCurrent};
use crate::grid::GridFunction;
use crate::lipschitz::{approximate, ApproxStats};

pub const MAX_JET_ORDER: usize = 4;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub p: Vec<f64>,
    pub rho: f64,
    pub frame: Frame,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Interpolant {
    pub provenance: Provenance,
    /// `g` over the reference plane on a square containing `B_rho(q')`.
    pub g: GridFunction<f64>,
    /// `jets[l]` holds the order-`l` partials of `g` at its center node, as `[c][k]`
    /// with `k` the number of `x2` derivatives.
    pub jets: Vec<Vec<f64>>,
    /// Lipschitz approximation restricted to a `6 rho` square around `q`.
    pub f: GridFunction<f64>,
    pub f_hat: GridFunction<f64>,
    pub f_bar: GridFunction<f64>,
    pub approx_stats: ApproxStats,
    /// Cylindrical excess seen by the Lipschitz approximation.
    pub excess: f64,
    /// Admissibility margin of `(p, 8 rho, π)` at creation.
    pub admissible_margin: f64,
}

impl Interpolant {
    pub fn center(&self) -> [f64; 2] {
        self.g.center
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Partials of orders `0..=MAX_JET_ORDER` at node `(i, j)`.
pub fn jets_at(g: &GridFunction<f64>, i: usize, j: usize) -> Vec<Vec<f64>> {
    (0..=MAX_JET_ORDER).map(|l| g.derivative_tensor(i, j, l)).collect()
}

/// `(p, rho, π)`-interpolation of `t`, where `π` is the plane of `t`'s frame and `p`
/// an ambient point (reference coordinates) on `t`. The output lattice has spacing
/// `out_h` and nodes on `out_h Z^2`.
pub fn interpolate(t: &SampledCurrent, p: &[f64], rho: f64, cfg: &ConstantsConfig, out_h: f64) -> Result<Interpolant> {
    let frame = t.frame.clone();
    let local = frame.to_frame(p);
    let q = [local[0], local[1]];
    let u = local[2..].to_vec();
    let adm = is_admissible(t, p, 8.0 * rho, &frame, cfg).map_err(|e| e.in_stage("admissibility"))?;
    if !adm.admissible {
        return Err(Error::NotAdmissible { lhs: adm.excess, rhs: adm.budget });
    }
    let cyl = Region::cylinder(&frame, q, 8.0 * rho)?;
    let approx = approximate(t, &cyl, cfg).map_err(|e| e.in_stage("approximate"))?;

    let h = approx.f.h;
    let lc = approx.f.lattice_coords(q);
    let node = approx.f.node(lc[0].round() as usize, lc[1].round() as usize);
    let six = (6.0 * rho / h).ceil() * h;
    let f6 = approx.f.restrict(node, six).map_err(|e| e.in_stage("restrict"))?;
    let f_hat = mollify(&f6, rho, cfg).map_err(|e| e.in_stage("mollify"))?;
    let ext = harmonic_extend(&f_hat, q, 4.0 * rho).map_err(|e| e.in_stage("harmonic"))?;

    let back = frame.to_reference(&local);
    let q0 = [back[0], back[1]];
    let center = [(q0[0] / out_h).round() * out_h, (q0[1] / out_h).round() * out_h];
    let half = (rho / out_h).ceil() as usize;
    let lattice = Lattice { center, half, h: out_h };
    let a = frame.rotation().transpose();
    let g = rotate_graph(&ext.grid, &a, q, &u, rho, cfg.c0, lattice).map_err(|e| e.in_stage("rotate"))?;
    let jets = jets_at(&g, g.half, g.half);
    Ok(Interpolant {
        provenance: Provenance { p: p.to_vec(), rho, frame },
        g,
        jets,
        f: f6,
        f_hat,
        f_bar: ext.grid,
        approx_stats: approx.stats,
        excess: approx.excess,
        admissible_margin: adm.margin,
    })
}
