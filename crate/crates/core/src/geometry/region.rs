use super::frame::Frame;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Ball,
    Cylinder,
}

/// A ball `B_r(p)` in the ambient space or a cylinder `B_r(q) x π^⊥` over the plane of
/// a frame. `center` is always an ambient point in reference coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub center: Vec<f64>,
    pub radius: f64,
    pub frame: Option<Frame>,
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self { kind: RegionKind::Ball, center, radius, frame: None })
    }

    /// Cylinder over the plane of `frame`, with base point `q` given in that frame.
    pub fn cylinder(frame: &Frame, q: [f64; 2], radius: f64) -> Result<Self> {
        check_radius(radius)?;
        let mut p = vec![0.0; frame.dim()];
        p[0] = q[0];
        p[1] = q[1];
        Ok(Self { kind: RegionKind::Cylinder, center: frame.to_reference(&p), radius, frame: Some(frame.clone()) })
    }

    pub fn cylinder_frame(&self) -> Result<&Frame> {
        match (self.kind, &self.frame) {
            (RegionKind::Cylinder, Some(f)) => Ok(f),
            _ => Err(Error::WrongRegion { expected: "cylinder" }),
        }
    }

    /// Base point of a cylinder in its own frame.
    pub fn base_point(&self) -> Result<[f64; 2]> {
        let f = self.cylinder_frame()?;
        let p = f.to_frame(&self.center);
        Ok([p[0], p[1]])
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        match self.kind {
            RegionKind::Ball => {
                let d2: f64 = point.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 < self.radius * self.radius
            }
            RegionKind::Cylinder => {
                let f = self.frame.as_ref().expect("cylinder has a frame");
                let diff: Vec<f64> = point.iter().zip(&self.center).map(|(a, b)| a - b).collect();
                let local = f.to_frame(&diff);
                let d2: f64 = local[..f.m()].iter().map(|v| v * v).sum();
                d2 < self.radius * self.radius
            }
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("region radius must be positive, got {r}")))
    }
}
