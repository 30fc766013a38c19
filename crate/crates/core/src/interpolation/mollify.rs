//! Convolution with a rescaled radial bump.

use crate::config::ConstantsConfig;
use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// `exp(-1 / (1 - |w|^2))` on the unit ball, zero outside.
pub fn bump(w2: f64) -> f64 {
    if w2 < 1.0 {
        (-1.0 / (1.0 - w2)).exp()
    } else {
        0.0
    }
}

/// Nodal weights of `φ_ρ` on the lattice `h Z^2`, normalized to sum to one, as
/// `(di, dj, weight)` with zero weights dropped.
pub fn kernel_weights(rho: f64, h: f64) -> Vec<(isize, isize, f64)> {
    let reach = (rho / h).ceil() as isize;
    let mut out = Vec::new();
    for b in -reach..=reach {
        for a in -reach..=reach {
            let w2 = ((a * a + b * b) as f64) * h * h / (rho * rho);
            let v = bump(w2);
            if v > 0.0 {
                out.push((a, b, v));
            }
        }
    }
    let total: f64 = out.iter().map(|e| e.2).sum();
    out.iter_mut().for_each(|e| e.2 /= total);
    out
}

/// `f ∗ φ_ρ` on the grid shrunk by `ceil(ρ / h)` nodes per side.
pub fn mollify(f: &GridFunction<f64>, rho: f64, cfg: &ConstantsConfig) -> Result<GridFunction<f64>> {
    let h = f.h;
    let rho = rho * cfg.kernel.support_radius;
    if rho < 2.0 * h {
        return Err(Error::UnderResolved { rho, two_h: 2.0 * h });
    }
    let reach = (rho / h).ceil() as usize;
    if reach >= f.half {
        return Err(Error::OutsideDomain { what: "mollified grid" });
    }
    let weights = kernel_weights(rho, h);
    let half = f.half - reach;
    let mut out = GridFunction::zeros(f.center, half as f64 * h, h, f.n)?;
    let side = out.side();
    for j in 0..side {
        for i in 0..side {
            let (si, sj) = (i + reach, j + reach);
            let dst = out.value_mut(i, j);
            for &(a, b, w) in &weights {
                let v = f.value((si as isize + a) as usize, (sj as isize + b) as usize);
                for c in 0..f.n {
                    dst[c] += w * v[c];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid<F: Fn([f64; 2]) -> f64>(f: F) -> GridFunction<f64> {
        GridFunction::from_fn([0.1, -0.2], 1.0, 1.0 / 32.0, 1, |x: [f64; 2], v: &mut [f64]| v[0] = f(x)).unwrap()
    }

    #[test]
    fn affine_and_harmonic_are_preserved() {
        let cfg = ConstantsConfig::default();
        let rho = 0.2;
        for f in [
            Box::new(|x: [f64; 2]| 0.3 * x[0] - 0.7 * x[1] + 0.25) as Box<dyn Fn([f64; 2]) -> f64>,
            Box::new(|x: [f64; 2]| x[0] * x[0] - x[1] * x[1] + x[0] * x[1]),
        ] {
            let out = mollify(&grid(&f), rho, &cfg).unwrap();
            for j in 0..out.side() {
                for i in 0..out.side() {
                    assert!((out.value(i, j)[0] - f(out.node(i, j))).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn square_norm_picks_up_second_moment() {
        let cfg = ConstantsConfig::default();
        let (rho, h): (f64, f64) = (0.15, 1.0 / 32.0);
        let mut m2 = 0.0;
        let mut tot = 0.0;
        let reach = (rho / h).ceil() as i32;
        for b in -reach..=reach {
            for a in -reach..=reach {
                let y2 = ((a * a + b * b) as f64) * h * h;
                let w = if y2 < rho * rho { (-1.0 / (1.0 - y2 / (rho * rho))).exp() } else { 0.0 };
                m2 += w * y2;
                tot += w;
            }
        }
        m2 /= tot;
        let out = mollify(&grid(|x| x[0] * x[0] + x[1] * x[1]), rho, &cfg).unwrap();
        for j in 0..out.side() {
            for i in 0..out.side() {
                let x = out.node(i, j);
                assert!((out.value(i, j)[0] - (x[0] * x[0] + x[1] * x[1] + m2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_in_constants_and_rejects_coarse_kernels() {
        let cfg = ConstantsConfig::default();
        let f = grid(|x| (3.0 * x[0]).sin() * x[1]);
        let a = mollify(&f, 0.1, &cfg).unwrap();
        let b = mollify(&f.map_values(|v| v + 2.5), 0.1, &cfg).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            assert!((u + 2.5 - v).abs() < 1e-14);
        }
        assert!(matches!(mollify(&f, 0.05, &cfg), Err(Error::UnderResolved { .. })));
    }
}
