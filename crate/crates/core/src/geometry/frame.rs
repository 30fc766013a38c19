//! Oriented orthonormal coordinate systems.

use super::multivector::{compound, norm, subsets, wedge_columns};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

const ORTHO_TOL: f64 = 1e-12;

/// Positively oriented coordinates `x' = A x`. The horizontal plane of the frame is
/// `{x'_{m+1} = ... = x'_{m+n} = 0}`, spanned in reference coordinates by the first
/// `m` rows of `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameRepr", into = "FrameRepr")]
pub struct Frame {
    m: usize,
    n: usize,
    rotation: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct FrameRepr {
    m: usize,
    n: usize,
    /// Row-major `(m+n) x (m+n)`.
    rotation: Vec<f64>,
    orientation: Vec<f64>,
}

impl From<Frame> for FrameRepr {
    fn from(f: Frame) -> Self {
        let d = f.dim();
        let rotation = (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).map(|(r, c)| f.rotation[(r, c)]).collect();
        FrameRepr { m: f.m, n: f.n, orientation: f.orientation(), rotation }
    }
}

impl TryFrom<FrameRepr> for Frame {
    type Error = Error;
    fn try_from(r: FrameRepr) -> Result<Self> {
        let d = r.m + r.n;
        if r.rotation.len() != d * d {
            return Err(Error::InvalidConfig("frame rotation has wrong size".into()));
        }
        Frame::from_rotation(r.m, r.n, DMatrix::from_row_slice(d, d, &r.rotation))
    }
}

impl Frame {
    pub fn reference(m: usize, n: usize) -> Self {
        Self { m, n, rotation: DMatrix::identity(m + n, m + n) }
    }

    pub fn from_rotation(m: usize, n: usize, rotation: DMatrix<f64>) -> Result<Self> {
        let d = m + n;
        if rotation.shape() != (d, d) {
            return Err(Error::InvalidConfig("rotation must be (m+n) x (m+n)".into()));
        }
        let defect = (&rotation * rotation.transpose() - DMatrix::identity(d, d)).abs().max();
        if defect > ORTHO_TOL * d as f64 {
            return Err(Error::InvalidConfig(format!("rotation not orthogonal (defect {defect:.2e})")));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHO_TOL * d as f64 {
            return Err(Error::InvalidConfig(format!("rotation has determinant {det}")));
        }
        Ok(Self { m, n, rotation })
    }

    /// Completes the column span of `basis` (`d x m`, full rank) to a positively
    /// oriented orthonormal frame whose plane is that span, with the orientation of
    /// the given columns.
    pub fn from_plane_basis(m: usize, n: usize, basis: &DMatrix<f64>) -> Result<Self> {
        let d = m + n;
        if basis.shape() != (d, m) {
            return Err(Error::InvalidConfig("plane basis must be (m+n) x m".into()));
        }
        let mut vecs: Vec<DVector<f64>> = Vec::with_capacity(d);
        let push = |mut v: DVector<f64>, vecs: &mut Vec<DVector<f64>>| -> bool {
            // modified Gram-Schmidt, twice for stability
            for _ in 0..2 {
                for u in vecs.iter() {
                    let p = u.dot(&v);
                    v -= u * p;
                }
            }
            let nv = v.norm();
            if nv < 1e-10 {
                return false;
            }
            vecs.push(v / nv);
            true
        };
        for c in 0..m {
            if !push(basis.column(c).into_owned(), &mut vecs) {
                return Err(Error::Degenerate("plane basis is rank deficient"));
            }
        }
        for e in 0..d {
            if vecs.len() == d {
                break;
            }
            let mut v = DVector::zeros(d);
            v[e] = 1.0;
            push(v, &mut vecs);
        }
        let mut a = DMatrix::from_fn(d, d, |r, c| vecs[r][c]);
        if a.determinant() < 0.0 {
            for c in 0..d {
                a[(d - 1, c)] = -a[(d - 1, c)];
            }
        }
        Self::from_rotation(m, n, a)
    }

    /// Frame whose plane is the graph of the linear map `l` (`n x m`) over the plane of
    /// `base`, in `base` coordinates.
    pub fn graph_plane(base: &Frame, l: &DMatrix<f64>) -> Result<Self> {
        let (m, n) = (base.m, base.n);
        let v = DMatrix::from_fn(m + n, m, |r, c| if r < m { (r == c) as u8 as f64 } else { l[(r - m, c)] });
        let in_ref = base.rotation.transpose() * v;
        Self::from_plane_basis(m, n, &in_ref)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    /// Unit Plücker coordinates of the oriented horizontal plane.
    pub fn orientation(&self) -> Vec<f64> {
        wedge_columns(&self.plane_basis())
    }

    /// Orthonormal basis of the plane in reference coordinates (`d x m`).
    pub fn plane_basis(&self) -> DMatrix<f64> {
        self.rotation.rows(0, self.m).transpose()
    }

    pub fn to_frame(&self, p: &[f64]) -> Vec<f64> {
        (&self.rotation * DVector::from_column_slice(p)).iter().copied().collect()
    }

    pub fn to_reference(&self, p: &[f64]) -> Vec<f64> {
        (self.rotation.transpose() * DVector::from_column_slice(p)).iter().copied().collect()
    }

    /// Rotation taking coordinates of `self` to coordinates of `other`.
    pub fn relative_to(&self, other: &Frame) -> DMatrix<f64> {
        &other.rotation * self.rotation.transpose()
    }

    /// Map on Plücker coordinates taking `self`-coordinates to reference ones.
    pub fn plucker_to_reference(&self) -> DMatrix<f64> {
        compound(&self.rotation.transpose(), self.m)
    }

    /// `|π⃗ - π⃗'|` between the oriented planes.
    pub fn plane_distance(&self, other: &Frame) -> f64 {
        let a = self.orientation();
        let b = other.orientation();
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        norm(&diff)
    }

    /// `||A - Id||` (operator norm) of the rotation relative to `other`.
    pub fn rotation_gap(&self, other: &Frame) -> f64 {
        let d = self.dim();
        (self.relative_to(other) - DMatrix::identity(d, d)).svd(false, false).singular_values.max()
    }

    pub fn same_as(&self, other: &Frame) -> bool {
        self.m == other.m && self.n == other.n && (&self.rotation - &other.rotation).abs().max() < 1e-14
    }

    /// Applies a global rotation `r` of the ambient space: new reference coordinates
    /// are `r x`.
    pub fn rotated(&self, r: &DMatrix<f64>) -> Result<Self> {
        Self::from_rotation(self.m, self.n, &self.rotation * r.transpose())
    }

    pub fn check_invariants(&self) -> Result<()> {
        Self::from_rotation(self.m, self.n, self.rotation.clone()).map(|_| ())?;
        let o = norm(&self.orientation());
        if (o - 1.0).abs() > ORTHO_TOL {
            return Err(Error::InvalidConfig(format!("orientation norm {o}")));
        }
        Ok(())
    }
}

/// Rotation by `angle` in the coordinate plane `(a, b)` of `R^d`.
pub fn plane_rotation(d: usize, a: usize, b: usize, angle: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(d, d);
    let (s, c) = angle.sin_cos();
    r[(a, a)] = c;
    r[(b, b)] = c;
    r[(a, b)] = -s;
    r[(b, a)] = s;
    r
}

pub fn plucker_len(m: usize, n: usize) -> usize {
    subsets(m + n, m).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tilted_plane_frame() {
        let base = Frame::reference(2, 1);
        let l = DMatrix::from_row_slice(1, 2, &[0.3, 0.4]);
        let f = Frame::graph_plane(&base, &l).unwrap();
        f.check_invariants().unwrap();
        // normal of the plane z = 0.3x + 0.4y is (-0.3, -0.4, 1)/sqrt(1.25)
        let basis = f.plane_basis();
        let nrm = [-0.3, -0.4, 1.0];
        for c in 0..2 {
            let d: f64 = (0..3).map(|r| basis[(r, c)] * nrm[r]).sum();
            assert!(d.abs() < 1e-14);
        }
        // orientation agrees with e1 ∧ e2 component positive
        assert!(f.orientation()[0] > 0.0);
    }

    #[test]
    fn serde_round_trip() {
        let f = Frame::from_rotation(2, 1, plane_rotation(3, 0, 2, 0.2)).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let g: Frame = serde_json::from_str(&s).unwrap();
        assert!(f.plane_distance(&g) < 1e-15);
        let bad = s.replace("\"m\":2", "\"m\":1");
        assert!(serde_json::from_str::<Frame>(&bad).is_err());
    }

    #[test]
    fn reflections_rejected() {
        let mut r = DMatrix::<f64>::identity(3, 3);
        r[(2, 2)] = -1.0;
        assert!(Frame::from_rotation(2, 1, r).is_err());
    }
}
