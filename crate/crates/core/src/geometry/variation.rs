//! Discrete first-variation residuals of graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VariationResidual {
    /// `|∫ Df : Dκ|`, the linearized first variation.
    pub dirichlet: f64,
    /// `|δ graph(f)(κ)|`, the first variation of the area of the graph.
    pub area_variation: f64,
    /// `∫ |Dκ| |Df|^3`.
    pub cubic: f64,
    /// `∫_bad |Dκ| (1 + J)`, the contribution of columns outside the good set.
    pub bad: f64,
}

impl VariationResidual {
    pub fn rhs(&self) -> f64 {
        self.cubic + self.bad
    }
}

/// Residuals of `f` against the compactly supported test field `kappa`, whose lattice
/// must be an aligned sub-lattice of `f`'s. `bad` optionally flags nodes of `f`
/// outside the good set.
pub fn first_variation_residual(
    f: &GridFunction<f64>,
    kappa: &GridFunction<f64>,
    bad: Option<&[bool]>,
) -> Result<VariationResidual> {
    if f.n != kappa.n {
        return Err(Error::DomainMismatch("test field has a different codimension".into()));
    }
    if (f.h - kappa.h).abs() > 1e-12 * f.h {
        return Err(Error::DomainMismatch("test field uses a different spacing".into()));
    }
    let (oi, oj) = f.node_index(kappa.node(0, 0), 1e-6).ok_or(Error::SupportViolation)?;
    let last = kappa.side() - 1;
    if oi + last >= f.side() || oj + last >= f.side() {
        return Err(Error::SupportViolation);
    }
    let peak = kappa.max_abs();
    for j in 0..=last {
        for i in 0..=last {
            let ring = i.min(j).min(last - i).min(last - j);
            if ring < 2 && kappa.value(i, j).iter().any(|v| v.abs() > 1e-12 * peak.max(f64::MIN_POSITIVE)) {
                return Err(Error::SupportViolation);
            }
        }
    }
    let n = f.n;
    let h2 = f.h * f.h;
    let mut df = vec![0.0; 2 * n];
    let mut dk = vec![0.0; 2 * n];
    let mut out = VariationResidual { dirichlet: 0.0, area_variation: 0.0, cubic: 0.0, bad: 0.0 };
    let mut dir = 0.0;
    let mut var = 0.0;
    for j in 1..last {
        for i in 1..last {
            kappa.gradient(i, j, &mut dk);
            let (fi, fj) = (oi + i, oj + j);
            f.gradient(fi, fj, &mut df);
            let nk = dk.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nf2 = df.iter().map(|v| v * v).sum::<f64>();
            dir += df.iter().zip(&dk).map(|(a, b)| a * b).sum::<f64>() * h2;
            // metric g = I + Df^T Df and the mixed term Df^T Dκ
            let mut g = [[0.0; 2]; 2];
            let mut mix = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    g[a][b] = (a == b) as u8 as f64;
                    for c in 0..n {
                        g[a][b] += df[2 * c + a] * df[2 * c + b];
                        mix[a][b] += df[2 * c + a] * dk[2 * c + b];
                    }
                }
            }
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            let trace = (g[1][1] * mix[0][0] - g[0][1] * mix[1][0] - g[1][0] * mix[0][1] + g[0][0] * mix[1][1]) / det;
            var += det.sqrt() * trace * h2;
            out.cubic += nk * nf2 * nf2.sqrt() * h2;
            if let Some(mask) = bad {
                if mask[fj * f.side() + fi] {
                    out.bad += nk * (1.0 + det.sqrt()) * h2;
                }
            }
        }
    }
    out.dirichlet = dir.abs();
    out.area_variation = var.abs();
    Ok(out)
}

/// Smooth bump `exp(-1 / (1 - |x - c|^2 / r^2))` on `B_r(c)`, replicated on `n`
/// components, sampled on the lattice `h Z^2`.
pub fn bump_field(center: [f64; 2], radius: f64, h: f64, n: usize) -> Result<GridFunction<f64>> {
    let half = (radius / h).ceil() + 3.0;
    let snapped = [(center[0] / h).round() * h, (center[1] / h).round() * h];
    GridFunction::from_fn(snapped, half * h, h, n, |x: [f64; 2], v: &mut [f64]| {
        let s = ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)) / (radius * radius);
        let b = if s < 1.0 { (-1.0 / (1.0 - s)).exp() } else { 0.0 };
        v.iter_mut().for_each(|o| *o = b);
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scherk(h: f64, eps: f64) -> GridFunction<f64> {
        GridFunction::from_fn([0.0, 0.0], 0.5, h, 1, |x: [f64; 2], v: &mut [f64]| {
            v[0] = ((eps * x[1]).cos() / (eps * x[0]).cos()).ln() / eps;
        })
        .unwrap()
    }

    #[test]
    fn harmonic_quadratic_has_no_linear_residual() {
        let h = 1.0 / 64.0;
        for eps in [0.1, 0.05] {
            let f = GridFunction::from_fn([0.0, 0.0], 0.5, h, 1, |x: [f64; 2], v: &mut [f64]| {
                v[0] = eps * (x[0] * x[0] - x[1] * x[1]);
            })
            .unwrap();
            let k = bump_field([0.0, 0.0], 0.3, h, 1).unwrap();
            let r = first_variation_residual(&f, &k, None).unwrap();
            assert!(r.dirichlet < 1e-14, "{r:?}");
            assert!(r.dirichlet <= r.rhs() + 1e-14);
        }
    }

    #[test]
    fn minimal_graph_area_variation_is_discretization_error() {
        let mut prev = None;
        for h in [1.0 / 32.0, 1.0 / 64.0] {
            let f = scherk(h, 1.0);
            let k = bump_field([0.05, -0.02], 0.3, h, 1).unwrap();
            let r = first_variation_residual(&f, &k, None).unwrap();
            assert!(r.area_variation < 10.0 * h * h, "{h} {r:?}");
            assert!(r.dirichlet > 10.0 * r.area_variation);
            if let Some(p) = prev {
                assert!(r.area_variation < p / 3.0);
            }
            prev = Some(r.area_variation);
        }
    }

    #[test]
    fn support_must_be_interior() {
        let h = 1.0 / 32.0;
        let f = scherk(h, 1.0);
        let k = bump_field([0.4, 0.0], 0.3, h, 1).unwrap();
        assert!(matches!(first_variation_residual(&f, &k, None), Err(Error::SupportViolation)));
        let wide = GridFunction::from_fn([0.0, 0.0], 0.25, h, 1, |_, v: &mut [f64]| v[0] = 1.0).unwrap();
        assert!(matches!(first_variation_residual(&f, &wide, None), Err(Error::SupportViolation)));
    }
}
