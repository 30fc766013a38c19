//! Lipschitz approximation of a current with small cylindrical excess.

use serde::{Deserialize, Serialize};

use super::extend::{lipschitz_extend, measured_lipschitz};
use super::maximal::{defect_excess, dyadic_ladder, excess_density, good_set, maximal_excess, GoodSet, MaximalField};
use crate::bits;
use crate::config::ConstantsConfig;
use crate::error::{Error, Result};
use crate::geometry::excess::region_moments;
use crate::geometry::multivector::dot;
use crate::geometry::{cylindrical_excess, Region, SampledCurrent};
use crate::grid::GridFunction;
use crate::quadrature::{disk_nodes, integrate};
use crate::scalar::unit_ball_volume;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxStats {
    /// Lipschitz constant of `f` measured on `B_s`.
    pub lip_const: f64,
    /// Bound `lip_const_cfg * E^eta` handed to the extension.
    pub lip_bound: f64,
    /// `|B_s \ K|` by cell counting.
    pub bad_measure: f64,
    /// `5^m E^(-2 beta) e(T, (L ∩ B_{s + t}) x R^n)` with `t` the truncation radius.
    pub bad_bound: f64,
    /// `5^m E^(1 - 2 beta) omega_m r^m`.
    pub bad_bound_crude: f64,
    /// `| ||T||(C_s) - omega_m s^m - ∫_{B_s} |Df|^2 / 2 |`.
    pub energy_gap: f64,
}

#[derive(Clone, Debug)]
pub struct LipApprox {
    pub f: GridFunction<f64>,
    /// Good set on the nodes of `f`.
    pub k: Vec<bool>,
    /// Enlarged bad set on the nodes of `f`.
    pub enlarged_bad: Vec<bool>,
    /// Cylindrical excess of the input.
    pub excess: f64,
    pub center: [f64; 2],
    pub radius: f64,
    /// Radius `s = r (1 - E^((1 - 2 beta) / m))` of the ball where the estimates hold.
    pub shrunk_radius: f64,
    pub threshold: f64,
    pub truncation: f64,
    pub stats: ApproxStats,
}

#[derive(Serialize, Deserialize)]
struct LipApproxDoc {
    f: GridFunction<f64>,
    #[serde(rename = "K")]
    k: String,
    #[serde(rename = "L")]
    l: String,
    #[serde(rename = "E")]
    excess: f64,
    center: [f64; 2],
    radius: f64,
    shrunk_radius: f64,
    threshold: f64,
    truncation: f64,
    stats: ApproxStats,
}

impl LipApprox {
    pub fn to_json(&self) -> Result<String> {
        let doc = LipApproxDoc {
            f: self.f.clone(),
            k: bits::encode(&self.k),
            l: bits::encode(&self.enlarged_bad),
            excess: self.excess,
            center: self.center,
            radius: self.radius,
            shrunk_radius: self.shrunk_radius,
            threshold: self.threshold,
            truncation: self.truncation,
            stats: self.stats.clone(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: LipApproxDoc = serde_json::from_str(text)?;
        let len = d.f.node_count();
        if d.f.values.len() != len * d.f.n {
            return Err(Error::InvalidConfig("approximation grid has wrong length".into()));
        }
        Ok(Self {
            k: bits::decode(&d.k, len)?,
            enlarged_bad: bits::decode(&d.l, len)?,
            f: d.f,
            excess: d.excess,
            center: d.center,
            radius: d.radius,
            shrunk_radius: d.shrunk_radius,
            threshold: d.threshold,
            truncation: d.truncation,
            stats: d.stats,
        })
    }

    /// Nodes of `f` inside the open disk of radius `s` about the center.
    pub fn nodes_within(&self, s: f64) -> Vec<bool> {
        let side = self.f.side();
        let mut out = vec![false; side * side];
        for j in 0..side {
            for i in 0..side {
                let x = self.f.node(i, j);
                out[j * side + i] = (x[0] - self.center[0]).hypot(x[1] - self.center[1]) < s;
            }
        }
        out
    }
}

/// Aligned sub-grid covering the cylinder's base disk, or the whole grid when the
/// center is not a lattice node. Returns the grid and its node offset.
fn working_grid(base: &GridFunction<f64>, q: [f64; 2], r: f64) -> Result<(GridFunction<f64>, usize, usize)> {
    if let Some((ci, cj)) = base.node_index(q, 1e-9) {
        let half = (r / base.h - 1e-9).ceil() as usize + 1;
        if ci >= half && cj >= half && ci + half < base.side() && cj + half < base.side() {
            let sub = base.restrict(base.node(ci, cj), half as f64 * base.h)?;
            return Ok((sub, ci - half, cj - half));
        }
    }
    Ok((base.clone(), 0, 0))
}

fn pick<T: Copy>(full: &[T], side: usize, sub_side: usize, oi: usize, oj: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(sub_side * sub_side);
    for j in 0..sub_side {
        for i in 0..sub_side {
            out.push(full[(oj + j) * side + oi + i]);
        }
    }
    out
}

pub struct ApproxParts {
    pub approx: LipApprox,
    pub field: MaximalField,
    pub good: GoodSet,
}

pub fn approximate(t: &SampledCurrent, c: &Region, cfg: &ConstantsConfig) -> Result<LipApprox> {
    approximate_with_field(t, c, cfg).map(|p| p.approx)
}

/// Like [`approximate`], also returning the maximal field and good set on the
/// current's base grid.
pub fn approximate_with_field(t: &SampledCurrent, c: &Region, cfg: &ConstantsConfig) -> Result<ApproxParts> {
    let cf = c.cylinder_frame()?;
    if !cf.same_as(&t.frame) {
        return Err(Error::DomainMismatch("cylinder must be over the current's own plane".into()));
    }
    let m = t.m();
    let r = c.radius;
    let q = c.base_point()?;
    let excess = cylindrical_excess(t, c, &t.frame)?.value.max(0.0);
    if excess > cfg.eps1 {
        return Err(Error::ExcessTooLarge { excess, limit: cfg.eps1 });
    }
    let omega = unit_ball_volume::<f64>(m);
    let e_m = t.frame.orientation();
    let projected: f64 = t
        .defects
        .iter()
        .filter(|d| c.contains(&d.position))
        .map(|d| d.mass * dot(&d.tangent, &e_m).abs())
        .sum();
    if projected > excess * omega * r.powi(m as i32) + 1e-12 {
        return Err(Error::MultiSheeted);
    }

    let beta = cfg.trunc_beta;
    let threshold = excess.powf(2.0 * beta).max(f64::MIN_POSITIVE);
    let truncation = r * excess.powf((1.0 - 2.0 * beta) / m as f64);
    let shrunk = r - truncation;
    let h = t.base.h;
    // radii at or beyond the truncation never exceed the threshold; one extra dyadic
    // step keeps the enlarged bad set L faithful to the full ladder
    let ladder = dyadic_ladder(h, (2.0 * truncation).min(r));
    let field = if ladder.is_empty() {
        let side = t.base.side();
        let mut domain = vec![false; side * side];
        for j in 0..side {
            for i in 0..side {
                let x = t.base.node(i, j);
                domain[j * side + i] = (x[0] - q[0]).hypot(x[1] - q[1]) < r;
            }
        }
        MaximalField {
            values: GridFunction::zeros(t.base.center, t.base.radius(), h, 1)?,
            argmax: vec![0.0; side * side],
            domain,
            ladder: Vec::new(),
            center: q,
            radius: r,
        }
    } else {
        maximal_excess(t, c, &ladder)?
    };
    let good = good_set(&field, threshold, m);
    // nodes in masked columns are never good
    let k_full: Vec<bool> = good.k.iter().zip(&t.base_mask).map(|(&a, &b)| a && b).collect();

    let (sub, oi, oj) = working_grid(&t.base, q, r)?;
    let side = t.base.side();
    let k = pick(&k_full, side, sub.side(), oi, oj);
    let enlarged_bad = pick(&good.enlarged_bad, side, sub.side(), oi, oj);
    let lip_bound = cfg.lip_const * excess.powf(cfg.eta);
    let f = lipschitz_extend(&sub, &k, lip_bound)?;

    let mut approx = LipApprox {
        f,
        k,
        enlarged_bad,
        excess,
        center: q,
        radius: r,
        shrunk_radius: shrunk,
        threshold,
        truncation,
        stats: ApproxStats {
            lip_const: 0.0,
            lip_bound,
            bad_measure: 0.0,
            bad_bound: 0.0,
            bad_bound_crude: 5f64.powi(m as i32) * excess.powf(1.0 - 2.0 * beta) * omega * r.powi(m as i32),
            energy_gap: 0.0,
        },
    };
    let inner = approx.nodes_within(shrunk);
    approx.stats.lip_const = measured_lipschitz(&approx.f, Some(&inner));
    let h2 = h * h;
    approx.stats.bad_measure = inner.iter().zip(&approx.k).filter(|(&a, &b)| a && !b).count() as f64 * h2;
    approx.stats.bad_bound = 5f64.powi(m as i32) / threshold * excess_on_nodes(t, &good.enlarged_bad, q, shrunk + truncation);
    if shrunk > h {
        approx.stats.energy_gap = energy_gap(t, &approx.f, q, shrunk)?;
    }
    Ok(ApproxParts { approx, field, good })
}

/// `e(T, A x R^n, e_m)` for the union `A` of the cells of flagged nodes within `B_rad(q)`.
fn excess_on_nodes(t: &SampledCurrent, flags: &[bool], q: [f64; 2], rad: f64) -> f64 {
    let g = &t.base;
    let side = g.side();
    let h = g.h;
    let (dens, _) = excess_density(t);
    let within = |i: usize, j: usize| {
        let x = g.node(i, j);
        flags[j * side + i] && (x[0] - q[0]).hypot(x[1] - q[1]) < rad
    };
    let mut e = 0.0;
    for j in 0..side {
        for i in 0..side {
            if within(i, j) {
                e += dens[j * side + i] * h * h;
            }
        }
    }
    for (p, w) in defect_excess(t) {
        if let Some((i, j)) = g.node_index(p, 0.5) {
            if within(i, j) {
                e += w;
            }
        }
    }
    e
}

/// `| ||T||(C_s(q)) - omega_m s^m - ∫_{B_s(q)} |Df|^2 / 2 |`.
pub fn energy_gap(t: &SampledCurrent, f: &GridFunction<f64>, q: [f64; 2], s: f64) -> Result<f64> {
    let cyl = Region::cylinder(&t.frame, q, s)?;
    let mass = region_moments(t, &cyl)?.mass;
    let dir = dirichlet_energy(f, q, s)?;
    let omega = unit_ball_volume::<f64>(t.m());
    Ok((mass - omega * s.powi(t.m() as i32) - dir).abs())
}

/// `∫_{B_s(q)} |Df|^2 / 2` with finite-difference gradients.
pub fn dirichlet_energy(f: &GridFunction<f64>, q: [f64; 2], s: f64) -> Result<f64> {
    let nodes = disk_nodes(f, q, s).ok_or(Error::OutsideDomain { what: "energy disk" })?;
    let mut dens = GridFunction::zeros(f.center, f.radius(), f.h, 1)?;
    let mut grad = vec![0.0; 2 * f.n];
    for j in 0..f.side() {
        for i in 0..f.side() {
            f.gradient(i, j, &mut grad);
            dens.value_mut(i, j)[0] = 0.5 * grad.iter().map(|v| v * v).sum::<f64>();
        }
    }
    Ok(integrate(&nodes, &dens))
}
