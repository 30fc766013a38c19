//! Discretized integral currents: a sampled multi-valued-free graph over the plane of
//! a frame plus a finite list of point masses carrying the part that is not a graph.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::frame::{plucker_len, Frame};
use super::multivector::{graph_wedge, norm, subsets};
use crate::bits;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::quadrature::QuadNode;

const FORMAT_VERSION: u32 = 1;

/// A point mass with an oriented unit tangent (Plücker coordinates, reference frame).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub position: Vec<f64>,
    pub tangent: Vec<f64>,
    pub mass: f64,
}

/// Nodal area element `J` and unnormalized tangent wedge of the graph, both in the
/// coordinates of the current's frame.
#[derive(Clone, Debug)]
pub struct GraphFields {
    pub area: GridFunction<f64>,
    pub wedge: GridFunction<f64>,
    /// Maps wedge components to reference Plücker coordinates.
    pub to_reference: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct SampledCurrent {
    pub frame: Frame,
    pub base: GridFunction<f64>,
    pub defects: Vec<Defect>,
    /// `false` marks columns where the graph is not part of the current.
    pub base_mask: Vec<bool>,
    fields: OnceLock<GraphFields>,
}

#[derive(Serialize, Deserialize)]
struct Dims {
    m: usize,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct GridDoc {
    center: [f64; 2],
    radius: f64,
    h: f64,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CurrentDoc {
    version: u32,
    dims: Dims,
    frame: Frame,
    grid: GridDoc,
    defects: Vec<Defect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<String>,
}

impl SampledCurrent {
    pub fn new(frame: Frame, base: GridFunction<f64>, defects: Vec<Defect>, mask: Option<Vec<bool>>) -> Result<Self> {
        if frame.m() != 2 {
            return Err(Error::InvalidConfig("sampled currents need m = 2".into()));
        }
        if base.n != frame.n() {
            return Err(Error::InvalidConfig(format!("grid has {} components, frame codimension {}", base.n, frame.n())));
        }
        let len = plucker_len(frame.m(), frame.n());
        for d in &defects {
            if d.position.len() != frame.dim() || d.tangent.len() != len {
                return Err(Error::InvalidConfig("defect has wrong dimensions".into()));
            }
            if !(d.mass >= 0.0 && d.mass.is_finite()) {
                return Err(Error::InvalidConfig(format!("defect mass {}", d.mass)));
            }
            if (norm(&d.tangent) - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidConfig("defect tangent is not a unit m-vector".into()));
            }
        }
        let base_mask = match mask {
            Some(m) if m.len() != base.node_count() => {
                return Err(Error::InvalidConfig("mask length does not match grid".into()))
            }
            Some(m) => m,
            None => vec![true; base.node_count()],
        };
        Ok(Self { frame, base, defects, base_mask, fields: OnceLock::new() })
    }

    pub fn graph(frame: Frame, base: GridFunction<f64>) -> Result<Self> {
        Self::new(frame, base, Vec::new(), None)
    }

    pub fn m(&self) -> usize {
        self.frame.m()
    }

    pub fn n(&self) -> usize {
        self.frame.n()
    }

    #[inline]
    pub fn in_mask(&self, i: usize, j: usize) -> bool {
        self.base_mask[j * self.base.side() + i]
    }

    pub fn fields(&self) -> &GraphFields {
        self.fields.get_or_init(|| {
            let (m, n) = (self.m(), self.n());
            let subs = subsets(m + n, m);
            let len = subs.len();
            let g = &self.base;
            let mut area = GridFunction::zeros(g.center, g.radius(), g.h, 1).expect("valid grid");
            let mut wedge = GridFunction::zeros(g.center, g.radius(), g.h, len).expect("valid grid");
            let mut grad = vec![0.0; n * m];
            let mut w = vec![0.0; len];
            for j in 0..g.side() {
                for i in 0..g.side() {
                    g.gradient(i, j, &mut grad);
                    graph_wedge(m, n, &grad, &subs, &mut w);
                    area.value_mut(i, j)[0] = norm(&w);
                    wedge.value_mut(i, j).copy_from_slice(&w);
                }
            }
            GraphFields { area, wedge, to_reference: self.frame.plucker_to_reference() }
        })
    }

    /// Ambient reference coordinates of the graph point over base point `x` with fiber `v`.
    pub fn lift(&self, x: [f64; 2], v: &[f64]) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.frame.dim());
        p.extend_from_slice(&x);
        p.extend_from_slice(v);
        self.frame.to_reference(&p)
    }

    pub fn node_point(&self, i: usize, j: usize) -> Vec<f64> {
        self.lift(self.base.node(i, j), self.base.value(i, j))
    }

    /// Fiber value at an arbitrary base point by bilinear interpolation, clamped to the
    /// grid. Cheap enough for region membership tests.
    pub fn fiber_bilinear(&self, x: [f64; 2], out: &mut [f64]) {
        let g = &self.base;
        let max = (g.side() - 1) as f64;
        let [a, b] = g.lattice_coords(x);
        let a = a.clamp(0.0, max);
        let b = b.clamp(0.0, max);
        let i0 = (a.floor() as usize).min(g.side().saturating_sub(2));
        let j0 = (b.floor() as usize).min(g.side().saturating_sub(2));
        let (s, t) = (a - i0 as f64, b - j0 as f64);
        for c in 0..g.n {
            out[c] = (1.0 - s) * (1.0 - t) * g.value(i0, j0)[c]
                + s * (1.0 - t) * g.value(i0 + 1, j0)[c]
                + (1.0 - s) * t * g.value(i0, j0 + 1)[c]
                + s * t * g.value(i0 + 1, j0 + 1)[c];
        }
    }

    /// Drops quadrature nodes in masked-out columns.
    pub fn masked(&self, nodes: Vec<QuadNode>) -> Vec<QuadNode> {
        nodes.into_iter().filter(|q| self.in_mask(q.i, q.j)).collect()
    }

    /// Mass and reference Plücker vector `∫ T⃗ d||T||` of the graph part over the nodes.
    pub fn graph_moments(&self, nodes: &[QuadNode]) -> (f64, Vec<f64>) {
        let f = self.fields();
        let mass = crate::quadrature::integrate(nodes, &f.area);
        let w = crate::quadrature::integrate_components(nodes, &f.wedge);
        let w_ref = &f.to_reference * nalgebra::DVector::from_vec(w);
        (mass, w_ref.iter().copied().collect())
    }

    pub fn total_mass(&self) -> f64 {
        let f = self.fields();
        let h2 = self.base.h * self.base.h;
        let mut graph = 0.0;
        for j in 0..self.base.side() {
            for i in 0..self.base.side() {
                if self.in_mask(i, j) {
                    graph += f.area.value(i, j)[0] * h2;
                }
            }
        }
        graph + self.defects.iter().map(|d| d.mass).sum::<f64>()
    }

    pub fn to_json(&self) -> Result<String> {
        let all = self.base_mask.iter().all(|&b| b);
        let doc = CurrentDoc {
            version: FORMAT_VERSION,
            dims: Dims { m: self.m(), n: self.n() },
            frame: self.frame.clone(),
            grid: GridDoc {
                center: self.base.center,
                radius: self.base.radius(),
                h: self.base.h,
                values: self.base.values.clone(),
            },
            defects: self.defects.clone(),
            mask: (!all).then(|| bits::encode(&self.base_mask)),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CurrentDoc = serde_json::from_str(text)?;
        if doc.version != FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!("unsupported current format version {}", doc.version)));
        }
        if doc.dims.m != doc.frame.m() || doc.dims.n != doc.frame.n() {
            return Err(Error::InvalidConfig("dims disagree with frame".into()));
        }
        let mut base = GridFunction::zeros(doc.grid.center, doc.grid.radius, doc.grid.h, doc.dims.n)?;
        if doc.grid.values.len() != base.values.len() {
            return Err(Error::InvalidConfig("grid values have wrong length".into()));
        }
        base.values = doc.grid.values;
        let mask = doc.mask.map(|s| bits::decode(&s, base.node_count())).transpose()?;
        Self::new(doc.frame, base, doc.defects, mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(n: usize) -> SampledCurrent {
        let g = GridFunction::from_fn([0.0, 0.0], 1.0, 1.0 / 16.0, n, |x: [f64; 2], v: &mut [f64]| {
            for (c, out) in v.iter_mut().enumerate() {
                *out = 0.1 * (c as f64 + 1.0) * (x[0] * x[0] - x[1] * x[1]);
            }
        })
        .unwrap();
        SampledCurrent::graph(Frame::reference(2, n), g).unwrap()
    }

    #[test]
    fn json_round_trip_with_mask_and_defects() {
        let mut t = quadratic(2);
        let mut mask = vec![true; t.base.node_count()];
        mask[5] = false;
        let tangent = Frame::reference(2, 2).orientation();
        let d = Defect { position: vec![0.1, 0.2, 0.3, 0.4], tangent, mass: 0.01 };
        t = SampledCurrent::new(t.frame.clone(), t.base.clone(), vec![d], Some(mask)).unwrap();
        let back = SampledCurrent::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back.base, t.base);
        assert_eq!(back.defects, t.defects);
        assert_eq!(back.base_mask, t.base_mask);
        assert!(back.frame.same_as(&t.frame));
    }

    #[test]
    fn wedge_norm_is_area_element() {
        let t = quadratic(2);
        let f = t.fields();
        let w = f.wedge.value(3, 7);
        assert!((norm(w) - f.area.value(3, 7)[0]).abs() < 1e-14);
        assert_eq!(w[0], 1.0);
    }

    #[test]
    fn rejects_bad_defect() {
        let t = quadratic(1);
        let d = Defect { position: vec![0.0; 3], tangent: vec![1.0, 1.0, 0.0], mass: 1.0 };
        assert!(SampledCurrent::new(t.frame.clone(), t.base.clone(), vec![d], None).is_err());
    }
}
