//! `h_k = sum_i psi_i g_i` with derivatives assembled by the Leibniz rule.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::partition::{multi_index, tensor_norm, PartitionOfUnity, MAX_ORDER, PARTIALS};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::interpolation::Interpolant;

/// Extra nodes kept around the bump support of each chart for interpolation.
const CHART_MARGIN: usize = 3;

/// Partials of one interpolant near its cube, all multi-indices up to `MAX_ORDER`,
/// laid out `[c][multi_index]`.
#[derive(Clone, Debug)]
struct Chart {
    fields: GridFunction<f64>,
}

impl Chart {
    fn new(g: &GridFunction<f64>, support: f64) -> Result<Self> {
        let want = (support / g.h).ceil() as usize + CHART_MARGIN;
        let half = want.min(g.half);
        let off = g.half - half;
        let n = g.n;
        let mut fields = GridFunction::zeros(g.center, half as f64 * g.h, g.h, n * PARTIALS)?;
        let side = fields.side();
        for j in 0..side {
            for i in 0..side {
                let k = fields.offset(i, j);
                for c in 0..n {
                    for l in 0..=MAX_ORDER {
                        for b in 0..=l {
                            fields.values[k + c * PARTIALS + multi_index(l - b, b)] =
                                g.partial(i + off, j + off, l - b, b, c);
                        }
                    }
                }
            }
        }
        Ok(Chart { fields })
    }
}

#[derive(Clone, Debug)]
struct Charts {
    pou: PartitionOfUnity,
    charts: Vec<Chart>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlendedSurface {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub k: u32,
    pub n0: u32,
    pub n: usize,
    /// `h_k` on `Q`.
    pub values: GridFunction<f64>,
    /// `derivatives[l - 1]` holds `D^l h_k` as `[c][b]` with `b` the number of `x2`
    /// derivatives.
    pub derivatives: Vec<GridFunction<f64>>,
    /// Labels of the cubes whose interpolants were blended.
    pub contributors: Vec<[i64; 2]>,
    #[serde(skip)]
    charts: Option<Charts>,
}

fn schema_version() -> u32 {
    crate::certification::report::SCHEMA_VERSION
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Adds `D^alpha (psi g)` for every multi-index to `out` (`[c][multi_index]`).
fn leibniz(psi: &[f64; PARTIALS], g: &[f64], n: usize, out: &mut [f64]) {
    for l in 0..=MAX_ORDER {
        for b in 0..=l {
            let a = l - b;
            let slot = multi_index(a, b);
            for a1 in 0..=a {
                for b1 in 0..=b {
                    let w = binomial(a, a1) * binomial(b, b1) * psi[multi_index(a1, b1)];
                    if w == 0.0 {
                        continue;
                    }
                    let gi = multi_index(a - a1, b - b1);
                    for c in 0..n {
                        out[c * PARTIALS + slot] += w * g[c * PARTIALS + gi];
                    }
                }
            }
        }
    }
}

impl Charts {
    fn assemble(&self, q: [f64; 2], n: usize) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; n * PARTIALS];
        let mut g = vec![0.0; n * PARTIALS];
        for idx in self.pou.active(q) {
            let psi = self.pou.partials(idx, q);
            self.charts[idx].fields.eval(q, &mut g, None)?;
            leibniz(&psi, &g, n, &mut acc);
        }
        Ok(acc)
    }
}

/// Blends one interpolant per cube. Interpolants are matched to cubes by their center;
/// `sub` subdivides the cube step for the output lattice.
pub fn blend(interpolants: &[Interpolant], pou: &PartitionOfUnity, sub: usize) -> Result<BlendedSurface> {
    let fields: Vec<&GridFunction<f64>> = interpolants.iter().map(|it| &it.g).collect();
    blend_fields(&fields, pou, sub)
}

/// [`blend`] on bare local graphs, matched to cubes by their lattice centers.
pub fn blend_fields(fields: &[&GridFunction<f64>], pou: &PartitionOfUnity, sub: usize) -> Result<BlendedSurface> {
    let grid = &pou.grid;
    let step = grid.step();
    let mut by_label: BTreeMap<[i64; 2], &GridFunction<f64>> = BTreeMap::new();
    for &it in fields {
        let c = it.center;
        let label = [(c[0] / step).round() as i64, (c[1] / step).round() as i64];
        if grid.index_of(label).is_some() {
            by_label.insert(label, it);
        }
    }
    let n = fields.first().map(|g| g.n).ok_or(Error::MissingInterpolant([0, 0]))?;
    let support = super::partition::SUPPORT * step;
    let mut charts = Vec::with_capacity(grid.cubes.len());
    for label in &grid.cubes {
        let it = by_label.get(label).ok_or(Error::MissingInterpolant(*label))?;
        if it.n != n {
            return Err(Error::DomainMismatch("interpolants disagree on codimension".into()));
        }
        charts.push(Chart::new(it, support)?);
    }
    let charts = Charts { pou: pou.clone(), charts };

    let hb = step / sub.max(1) as f64;
    let mut values = GridFunction::zeros([0.0, 0.0], grid.q_radius(), hb, n)?;
    let mut derivatives: Vec<GridFunction<f64>> = (1..=MAX_ORDER)
        .map(|l| GridFunction::zeros([0.0, 0.0], grid.q_radius(), hb, n * (l + 1)))
        .collect::<Result<_>>()?;
    let side = values.side();
    for j in 0..side {
        for i in 0..side {
            let q = values.node(i, j);
            let acc = charts.assemble(q, n)?;
            let k = values.offset(i, j);
            for c in 0..n {
                values.values[k + c] = acc[c * PARTIALS];
            }
            for (l1, field) in derivatives.iter_mut().enumerate() {
                let l = l1 + 1;
                let k = field.offset(i, j);
                for c in 0..n {
                    for b in 0..=l {
                        field.values[k + c * (l + 1) + b] = acc[c * PARTIALS + multi_index(l - b, b)];
                    }
                }
            }
        }
    }
    Ok(BlendedSurface {
        schema_version: schema_version(),
        k: grid.k,
        n0: grid.n0,
        n,
        values,
        derivatives,
        contributors: grid.cubes.clone(),
        charts: Some(charts),
    })
}

/// `D^l h_k (q)` for `l = 0..=order`, each as `[c][b]`. Exact Leibniz assembly when the
/// charts are present, otherwise interpolation of the assembled fields.
pub fn derivatives_at(h: &BlendedSurface, q: [f64; 2], order: usize) -> Result<Vec<Vec<f64>>> {
    if order > MAX_ORDER {
        return Err(Error::InvalidConfig(format!("derivative order {order} above {MAX_ORDER}")));
    }
    let r = h.values.radius() * (1.0 + 1e-12);
    if q.iter().any(|v| !(v.abs() <= r)) {
        return Err(Error::BoundaryCollar);
    }
    let n = h.n;
    let mut out = Vec::with_capacity(order + 1);
    if let Some(charts) = &h.charts {
        let acc = charts.assemble(q, n)?;
        for l in 0..=order {
            let mut t = Vec::with_capacity(n * (l + 1));
            for c in 0..n {
                for b in 0..=l {
                    t.push(acc[c * PARTIALS + multi_index(l - b, b)]);
                }
            }
            out.push(t);
        }
        return Ok(out);
    }
    let mut v = vec![0.0; n];
    h.values.eval(q, &mut v, None)?;
    out.push(v);
    for l in 1..=order {
        let f = &h.derivatives[l - 1];
        let mut t = vec![0.0; f.n];
        f.eval(q, &mut t, None)?;
        out.push(t);
    }
    Ok(out)
}

impl BlendedSurface {
    pub fn step(&self) -> f64 {
        self.values.h
    }

    /// Field of `D^l h_k`; `l = 0` gives the values.
    pub fn field(&self, l: usize) -> &GridFunction<f64> {
        if l == 0 {
            &self.values
        } else {
            &self.derivatives[l - 1]
        }
    }

    /// Norm of `D^l h_k` at node `(i, j)`, summed over components in quadrature.
    pub fn norm_at(&self, l: usize, i: usize, j: usize) -> f64 {
        let v = self.field(l).value(i, j);
        (0..self.n).map(|c| tensor_norm(&v[c * (l + 1)..(c + 1) * (l + 1)]).powi(2)).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self, l: usize) -> f64 {
        let side = self.values.side();
        let mut m = 0.0f64;
        for j in 0..side {
            for i in 0..side {
                m = m.max(self.norm_at(l, i, j));
            }
        }
        m
    }

    /// `max_{l <= order} sup |D^l h_k|`.
    pub fn c_norm(&self, order: usize) -> f64 {
        (0..=order).map(|l| self.sup_norm(l)).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Table `q1,q2,<components>` of `D^l h_k` at every node.
    pub fn csv_table(&self, l: usize) -> String {
        let f = self.field(l);
        let mut s = String::from("q1,q2");
        for c in 0..self.n {
            for b in 0..=l {
                let _ = write!(s, ",d{}_{}_{}", l, c, b);
            }
        }
        s.push('\n');
        let side = f.side();
        for j in 0..side {
            for i in 0..side {
                let x = f.node(i, j);
                let _ = write!(s, "{:e},{:e}", x[0], x[1]);
                for v in f.value(i, j) {
                    let _ = write!(s, ",{:e}", v);
                }
                s.push('\n');
            }
        }
        s
    }
}
