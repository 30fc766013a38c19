//! Excess decay: power-law fits, the one-step decay ratio and the tilt identity.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::ConstantsConfig;
use crate::error::{Error, Result};
use crate::geometry::{cylindrical_excess, spherical_excess, Frame, Region, SampledCurrent};
use crate::grid::GridFunction;
use crate::quadrature::{disk_nodes, integrate, total_area, QuadNode};
use crate::scalar::unit_ball_volume;

const FLAT_EXCESS: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::TooFewSamples(xs.len().min(ys.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Degenerate("power-law fit needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("power-law fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / k).sqrt();
    Ok(PowerFit { slope, intercept, residual })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub radii: Vec<f64>,
    pub excesses: Vec<f64>,
    pub fit: PowerFit,
}

/// Spherical excess of `t` in `B_r(p)` for each radius and the log-log slope.
pub fn decay_fit(t: &SampledCurrent, p: &[f64], radii: &[f64]) -> Result<DecayFit> {
    if radii.len() < 4 {
        return Err(Error::TooFewSamples(radii.len()));
    }
    let mut excesses = Vec::with_capacity(radii.len());
    for &r in radii {
        let e = spherical_excess(t, &Region::ball(p.to_vec(), r)?)?.value;
        if e <= FLAT_EXCESS {
            return Err(Error::Degenerate("excess vanishes, decay slope undefined"));
        }
        excesses.push(e);
    }
    let fit = fit_power_law(radii, &excesses)?;
    Ok(DecayFit { radii: radii.to_vec(), excesses, fit })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicDecay {
    /// Unnormalized excesses `e(T, B_{r/2}(p))` and `e(T, B_r(p))`.
    pub inner: f64,
    pub outer: f64,
    pub ratio: f64,
    pub threshold: f64,
}

impl BasicDecay {
    pub fn holds(&self) -> bool {
        self.ratio <= self.threshold
    }
}

/// `e(T, B_{r/2}(p)) / e(T, B_r(p))` against `1 / 2^(m+2) + theta`.
pub fn basic_decay_check(t: &SampledCurrent, p: &[f64], r: f64, cfg: &ConstantsConfig) -> Result<BasicDecay> {
    let m = t.m();
    let unnorm = |radius: f64| -> Result<f64> {
        let rep = spherical_excess(t, &Region::ball(p.to_vec(), radius)?)?;
        Ok(rep.value * unit_ball_volume::<f64>(m) * radius.powi(m as i32))
    };
    let outer = unnorm(r)?;
    if outer <= FLAT_EXCESS {
        return Err(Error::Degenerate("excess on the outer ball vanishes"));
    }
    let inner = unnorm(0.5 * r)?;
    let threshold = 1.0 / (1u64 << (m + 2)) as f64 + cfg.basic_theta;
    Ok(BasicDecay { inner, outer, ratio: inner / outer, threshold })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltIdentity {
    /// `e(graph f, C_t, tau)`, unnormalized.
    pub lhs: f64,
    /// `∫_{B_t} |Df - A|^2 / 2`.
    pub rhs: f64,
    pub gap: f64,
    /// Normalized cylindrical excess of the graph over `C_s` against the base plane.
    pub excess: f64,
    /// `gap / E^(1 + eta)`.
    pub fitted: f64,
    /// Mean gradient `A` over `B_s`, row-major `n x m`.
    pub mean_gradient: Vec<f64>,
}

fn gradient_field(f: &GridFunction<f64>) -> Result<GridFunction<f64>> {
    let mut g = GridFunction::zeros(f.center, f.radius(), f.h, 2 * f.n)?;
    let side = f.side();
    for j in 0..side {
        for i in 0..side {
            let k = g.offset(i, j);
            f.gradient(i, j, &mut g.values[k..k + 2 * f.n]);
        }
    }
    Ok(g)
}

fn scalar_field<F: Fn(&[f64]) -> f64>(src: &GridFunction<f64>, f: F) -> Result<GridFunction<f64>> {
    let mut g = GridFunction::zeros(src.center, src.radius(), src.h, 1)?;
    let side = src.side();
    for j in 0..side {
        for i in 0..side {
            let k = g.offset(i, j);
            g.values[k] = f(src.value(i, j));
        }
    }
    Ok(g)
}

fn disk(f: &GridFunction<f64>, r: f64) -> Result<Vec<QuadNode>> {
    disk_nodes(f, f.center, r).ok_or(Error::OutsideDomain { what: "tilt identity disk" })
}

/// Compares the excess of `graph f` over `C_t` against the plane `tau` of the mean
/// gradient on `B_s` with the Dirichlet energy of `Df - A`. Disks are centered at
/// the grid center.
pub fn tilt_excess_identity(f: &GridFunction<f64>, t: f64, s: f64, cfg: &ConstantsConfig) -> Result<TiltIdentity> {
    if !(t > 0.0 && t <= s) {
        return Err(Error::InvalidConfig(format!("tilt identity needs 0 < t <= s, got t={t}, s={s}")));
    }
    let n = f.n;
    let grad = gradient_field(f)?;
    let ns = disk(f, s)?;
    let nt = disk(f, t)?;
    let steep = ns.iter().map(|q| grad.value(q.i, q.j).iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max);
    if steep > 1.0 {
        return Err(Error::GradientTooLarge(steep));
    }
    let area = total_area(&ns);
    let mean: Vec<f64> = (0..2 * n)
        .map(|c| integrate(&ns, &scalar_field(&grad, |v| v[c]).expect("same lattice")) / area)
        .collect();
    let rhs_field = scalar_field(&grad, |v| 0.5 * v.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>())?;
    let rhs = integrate(&nt, &rhs_field);

    let base = Frame::reference(2, n);
    let l = DMatrix::from_row_slice(n, 2, &mean);
    let tau = Frame::graph_plane(&base, &l)?;
    let cur = SampledCurrent::graph(base.clone(), f.clone())?;
    let cyl_t = Region::cylinder(&base, f.center, t)?;
    let lhs = cylindrical_excess(&cur, &cyl_t, &tau)?.value * unit_ball_volume::<f64>(2) * t * t;
    let cyl_s = Region::cylinder(&base, f.center, s)?;
    let excess = cylindrical_excess(&cur, &cyl_s, &base)?.value;
    let gap = (lhs - rhs).abs();
    let fitted = if excess > 0.0 { gap / excess.powf(1.0 + cfg.eta) } else { f64::INFINITY };
    Ok(TiltIdentity { lhs, rhs, gap, excess, fitted, mean_gradient: mean })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs = [0.5, 0.25, 0.125, 0.0625];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(2.0)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit_power_law(&xs, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }
}
