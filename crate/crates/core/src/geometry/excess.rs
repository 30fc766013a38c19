//! Cylindrical and spherical excess of sampled currents, admissibility, tangent planes.
//!
//! With `M = ||T||(R)` and `W = ∫_R T⃗ d||T||`, the excess against a plane is
//! `∫_R (1 - <T⃗, π⃗>) d||T|| = M - <W, π⃗>`, so once the region integrals are known
//! every plane is scored in constant time.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::current::SampledCurrent;
use super::frame::Frame;
use super::multivector::{compound, dot, norm, subsets, wedge_columns};
use super::region::{Region, RegionKind};
use crate::config::ConstantsConfig;
use crate::error::{Error, Result};
use crate::quadrature::{disk_nodes, region_nodes, QuadNode};
use crate::scalar::unit_ball_volume;

/// Sub-cells per axis used to resolve cut cells of general regions.
pub const CUT_CELL_SUBDIVISION: usize = 8;

const PLANE_TOL: f64 = 1e-10;
const PLANE_MAX_ITERS: usize = 200;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExcessReport {
    pub kind: RegionKind,
    pub center: Vec<f64>,
    pub radius: f64,
    /// Normalized excess `(M - <W, π⃗>) / (omega_m r^m)`.
    pub value: f64,
    pub mass: f64,
    pub plane: Frame,
    /// `(M - omega_m r^m) / (omega_m r^m)`, cylinders only.
    pub mass_excess: Option<f64>,
}

impl ExcessReport {
    pub fn csv_header(d: usize) -> String {
        let mut s = String::from("kind,radius,value,mass");
        for a in 0..d {
            s.push_str(&format!(",c{a}"));
        }
        s
    }

    pub fn csv_row(&self) -> String {
        let kind = match self.kind {
            RegionKind::Ball => "ball",
            RegionKind::Cylinder => "cylinder",
        };
        let mut s = format!("{kind},{:e},{:e},{:e}", self.radius, self.value, self.mass);
        for c in &self.center {
            s.push_str(&format!(",{c:e}"));
        }
        s
    }
}

/// Mass and integrated orientation of a current inside a region.
#[derive(Clone, Debug)]
pub struct RegionMoments {
    pub mass: f64,
    pub wedge: Vec<f64>,
    /// `omega_m r^m`.
    pub scale: f64,
}

impl RegionMoments {
    pub fn excess_against(&self, plane: &[f64]) -> f64 {
        (self.mass - dot(&self.wedge, plane)) / self.scale
    }
}

fn add_defects(t: &SampledCurrent, region: &Region, mass: &mut f64, wedge: &mut [f64]) -> usize {
    let mut hits = 0;
    for d in &t.defects {
        if region.contains(&d.position) {
            hits += 1;
            *mass += d.mass;
            for (w, tau) in wedge.iter_mut().zip(&d.tangent) {
                *w += d.mass * tau;
            }
        }
    }
    hits
}

fn touches_boundary(t: &SampledCurrent, nodes: &[QuadNode]) -> bool {
    let last = t.base.side() - 1;
    nodes.iter().any(|q| q.i == 0 || q.j == 0 || q.i == last || q.j == last)
}

/// Quadrature nodes of the part of the graph lying inside the region.
pub fn region_quadrature(t: &SampledCurrent, region: &Region) -> Result<Vec<QuadNode>> {
    let g = &t.base;
    let nodes = match region.kind {
        RegionKind::Cylinder => {
            let cf = region.cylinder_frame()?;
            if cf.same_as(&t.frame) {
                let q = region.base_point()?;
                disk_nodes(g, q, region.radius).ok_or(Error::OutsideDomain { what: "cylinder" })?
            } else {
                let c = t.frame.to_frame(&region.center);
                let nodes = region_nodes(g, [c[0], c[1]], 2.0 * region.radius, CUT_CELL_SUBDIVISION, |x| {
                    let mut v = vec![0.0; t.n()];
                    t.fiber_bilinear(x, &mut v);
                    region.contains(&t.lift(x, &v))
                });
                if touches_boundary(t, &nodes) {
                    return Err(Error::OutsideDomain { what: "cylinder" });
                }
                nodes
            }
        }
        RegionKind::Ball => {
            let c = t.frame.to_frame(&region.center);
            let q = [c[0], c[1]];
            if !g.contains_square(q, region.radius) {
                return Err(Error::OutsideDomain { what: "ball" });
            }
            region_nodes(g, q, region.radius, CUT_CELL_SUBDIVISION, |x| {
                let mut v = vec![0.0; t.n()];
                t.fiber_bilinear(x, &mut v);
                region.contains(&t.lift(x, &v))
            })
        }
    };
    Ok(t.masked(nodes))
}

pub fn region_moments(t: &SampledCurrent, region: &Region) -> Result<RegionMoments> {
    let nodes = region_quadrature(t, region)?;
    let (mut mass, mut wedge) = t.graph_moments(&nodes);
    let hits = add_defects(t, region, &mut mass, &mut wedge);
    if nodes.is_empty() && hits == 0 {
        return Err(Error::EmptyIntersection);
    }
    let m = t.m();
    let scale = unit_ball_volume::<f64>(m) * region.radius.powi(m as i32);
    Ok(RegionMoments { mass, wedge, scale })
}

/// Excess of `t` in the cylinder `c` measured against the plane of `pi`.
pub fn cylindrical_excess(t: &SampledCurrent, c: &Region, pi: &Frame) -> Result<ExcessReport> {
    c.cylinder_frame()?;
    let mom = region_moments(t, c)?;
    Ok(ExcessReport {
        kind: RegionKind::Cylinder,
        center: c.center.clone(),
        radius: c.radius,
        value: mom.excess_against(&pi.orientation()),
        mass: mom.mass,
        plane: pi.clone(),
        mass_excess: Some((mom.mass - mom.scale) / mom.scale),
    })
}

/// Spherical excess: the ball excess minimized over oriented planes, with a minimizer.
pub fn spherical_excess(t: &SampledCurrent, b: &Region) -> Result<ExcessReport> {
    if b.kind != RegionKind::Ball {
        return Err(Error::WrongRegion { expected: "ball" });
    }
    let mom = region_moments(t, b)?;
    let (plane, score) = best_plane(&t.frame, &mom.wedge)?;
    Ok(ExcessReport {
        kind: RegionKind::Ball,
        center: b.center.clone(),
        radius: b.radius,
        value: (mom.mass - score) / mom.scale,
        mass: mom.mass,
        plane,
        mass_excess: None,
    })
}

/// Ball excess against a fixed plane.
pub fn ball_excess(t: &SampledCurrent, b: &Region, pi: &Frame) -> Result<f64> {
    if b.kind != RegionKind::Ball {
        return Err(Error::WrongRegion { expected: "ball" });
    }
    Ok(region_moments(t, b)?.excess_against(&pi.orientation()))
}

fn score(frame: &Frame, l: &[f64], w: &[f64]) -> f64 {
    let (m, n) = (frame.m(), frame.n());
    let v = DMatrix::from_fn(m + n, m, |r, a| if r < m { (r == a) as u8 as f64 } else { l[(r - m) * m + a] });
    let p = wedge_columns(&(frame.rotation().transpose() * v));
    dot(&p, w) / norm(&p)
}

/// Oriented plane maximizing `<W, π⃗>`, started from the mass-averaged graph gradient
/// over `base` and refined by damped Newton steps in graph coordinates.
pub fn best_plane(base: &Frame, w: &[f64]) -> Result<(Frame, f64)> {
    let (m, n) = (base.m(), base.n());
    let wn = norm(w);
    if wn < 1e-300 {
        return Ok((base.clone(), 0.0));
    }
    let subs = subsets(m + n, m);
    let wf = compound(base.rotation(), m) * DVector::from_column_slice(w);
    let mut frame = base.clone();
    if m == 2 && wf[0].abs() > 1e-12 * wn {
        let idx = |a: usize, b: usize| subs.iter().position(|s| s[0] == a && s[1] == b).unwrap();
        let mut l = DMatrix::zeros(n, m);
        for c in 0..n {
            l[(c, 0)] = -wf[idx(1, 2 + c)] / wf[0];
            l[(c, 1)] = wf[idx(0, 2 + c)] / wf[0];
        }
        frame = Frame::graph_plane(base, &l)?;
    }
    let k = n * m;
    let zero = vec![0.0; k];
    for _ in 0..PLANE_MAX_ITERS {
        let f0 = score(&frame, &zero, w);
        let at = |e: &[(usize, f64)]| {
            let mut l = zero.clone();
            for &(i, s) in e {
                l[i] += s;
            }
            score(&frame, &l, w)
        };
        let s1 = 1e-5;
        let g = DVector::from_fn(k, |i, _| (at(&[(i, s1)]) - at(&[(i, -s1)])) / (2.0 * s1));
        let s2 = 1e-3;
        let hess = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                (at(&[(i, s2)]) - 2.0 * f0 + at(&[(i, -s2)])) / (s2 * s2)
            } else {
                (at(&[(i, s2), (j, s2)]) - at(&[(i, s2), (j, -s2)]) - at(&[(i, -s2), (j, s2)])
                    + at(&[(i, -s2), (j, -s2)]))
                    / (4.0 * s2 * s2)
            }
        });
        let mut step = match (-&hess).cholesky() {
            Some(ch) => ch.solve(&g),
            None => &g / wn,
        };
        if step.dot(&g) <= 0.0 {
            step = &g / wn;
        }
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-8 {
            let l: Vec<f64> = step.iter().map(|v| v * t).collect();
            let val = score(&frame, &l, w);
            if val >= f0 - 1e-15 * wn {
                accepted = Some(l);
                break;
            }
            t *= 0.5;
        }
        let Some(l) = accepted else {
            return Ok((frame, f0));
        };
        let size = norm(&l);
        frame = Frame::graph_plane(&frame, &DMatrix::from_row_slice(n, m, &l))?;
        if size < PLANE_TOL {
            let f = score(&frame, &zero, w);
            return Ok((frame, f));
        }
    }
    Err(Error::NonConvergence { what: "plane optimization", iterations: PLANE_MAX_ITERS })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub excess: f64,
    pub budget: f64,
    /// `budget - excess`; negative when the triple is not admissible.
    pub margin: f64,
}

/// Checks `E(T, B_rho(p), π) <= C eps0^2 rho^(2 - 2 delta)`.
pub fn is_admissible(t: &SampledCurrent, p: &[f64], rho: f64, pi: &Frame, cfg: &ConstantsConfig) -> Result<Admissibility> {
    let b = Region::ball(p.to_vec(), rho)?;
    let excess = ball_excess(t, &b, pi)?;
    let budget = cfg.admissible_budget(rho);
    Ok(Admissibility { admissible: excess <= budget, excess, budget, margin: budget - excess })
}

/// Oriented tangent plane of the graph at the ambient point `p`, from the
/// interpolated gradient.
pub fn tangent_plane(t: &SampledCurrent, p: &[f64]) -> Result<Frame> {
    let c = t.frame.to_frame(p);
    let q = [c[0], c[1]];
    let g = &t.base;
    let [a, b] = g.lattice_coords(q);
    let max = (g.side() - 1) as f64;
    if !(0.0..=max).contains(&a) || !(0.0..=max).contains(&b) {
        return Err(Error::OutsideDomain { what: "tangent point" });
    }
    if !t.in_mask(a.round() as usize, b.round() as usize) {
        return Err(Error::DefectColumn);
    }
    let (m, n) = (t.m(), t.n());
    let mut v = vec![0.0; n];
    let mut grad = vec![0.0; n * m];
    g.eval(q, &mut v, Some(&mut grad))?;
    Frame::graph_plane(&t.frame, &DMatrix::from_row_slice(n, m, &grad))
}
