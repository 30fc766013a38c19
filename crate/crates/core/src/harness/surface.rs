//! Analytic test surfaces sampled as graphs over arbitrary frames.

use nalgebra::{DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::frame::plane_rotation;
use crate::geometry::{Defect, Frame, SampledCurrent};
use crate::grid::GridFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceKind {
    Plane,
    /// Linear graph `x -> L x`, `L` row-major `n x 2`.
    Tilted { l: Vec<f64> },
    HarmonicQuadratic { eps: f64 },
    /// `Re sum_k c_k z^k` with complex coefficients `[re, im]`.
    HarmonicPoly { coeffs: Vec<[f64; 2]> },
    /// Graph of the holomorphic polynomial `sum_k c_k z^k` in `C = R^2` (codimension 2).
    Holomorphic { coeffs: Vec<[f64; 2]> },
    Enneper { eps: f64 },
    Scherk { eps: f64 },
    Spiked {
        base: Box<SurfaceKind>,
        defect_fraction: f64,
        /// Mass per defect; the nominal cell area when absent.
        #[serde(default)]
        defect_mass: Option<f64>,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    #[serde(flatten)]
    pub kind: SurfaceKind,
    /// Nodes per side of the nominal grid.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Half-width of the nominal square domain centered at the origin.
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_resolution() -> usize {
    129
}

fn default_radius() -> f64 {
    1.0
}

/// Largest slope accepted for a patch to count as a graph.
pub const MAX_SLOPE: f64 = 1.0;
const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX: usize = 60;

fn cpow_eval(coeffs: &[[f64; 2]], z: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    // Horner for p and p'
    let mul = |a: [f64; 2], b: [f64; 2]| [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]];
    let mut p = [0.0; 2];
    let mut dp = [0.0; 2];
    for c in coeffs.iter().rev() {
        let t = mul(dp, z);
        dp = [t[0] + p[0], t[1] + p[1]];
        let t = mul(p, z);
        p = [t[0] + c[0], t[1] + c[1]];
    }
    (p, dp)
}

/// Inverse of the Enneper base map `(u, v) -> (u - u^3/3 + u v^2, v - v^3/3 + v u^2)`.
fn enneper_uv(w: [f64; 2]) -> Option<(f64, f64, Matrix2<f64>)> {
    let (mut u, mut v) = (w[0], w[1]);
    for _ in 0..NEWTON_MAX {
        let res = Vector2::new(u - u * u * u / 3.0 + u * v * v - w[0], v - v * v * v / 3.0 + v * u * u - w[1]);
        let jac = Matrix2::new(1.0 - u * u + v * v, 2.0 * u * v, 2.0 * u * v, 1.0 - v * v + u * u);
        if res.norm() < NEWTON_TOL {
            return Some((u, v, jac));
        }
        let step = jac.lu().solve(&res)?;
        u -= step[0];
        v -= step[1];
        if !(u * u + v * v < 1.0) {
            return None;
        }
    }
    None
}

impl SurfaceKind {
    pub fn n(&self) -> usize {
        match self {
            SurfaceKind::Tilted { l } => (l.len() / 2).max(1),
            SurfaceKind::Holomorphic { .. } => 2,
            SurfaceKind::Spiked { base, .. } => base.n(),
            _ => 1,
        }
    }

    fn base(&self) -> &SurfaceKind {
        match self {
            SurfaceKind::Spiked { base, .. } => base.base(),
            other => other,
        }
    }

    /// Value and Jacobian (`[c][axis]`) of the graph map over the reference plane.
    pub fn eval(&self, y: [f64; 2], val: &mut [f64], grad: &mut [f64]) -> Result<()> {
        match self.base() {
            SurfaceKind::Plane => {
                val.iter_mut().for_each(|v| *v = 0.0);
                grad.iter_mut().for_each(|v| *v = 0.0);
            }
            SurfaceKind::Tilted { l } => {
                for c in 0..val.len() {
                    val[c] = l[2 * c] * y[0] + l[2 * c + 1] * y[1];
                    grad[2 * c] = l[2 * c];
                    grad[2 * c + 1] = l[2 * c + 1];
                }
            }
            SurfaceKind::HarmonicQuadratic { eps } => {
                val[0] = eps * (y[0] * y[0] - y[1] * y[1]);
                grad[0] = 2.0 * eps * y[0];
                grad[1] = -2.0 * eps * y[1];
            }
            SurfaceKind::HarmonicPoly { coeffs } => {
                let (p, dp) = cpow_eval(coeffs, y);
                val[0] = p[0];
                grad[0] = dp[0];
                grad[1] = -dp[1];
            }
            SurfaceKind::Holomorphic { coeffs } => {
                let (p, dp) = cpow_eval(coeffs, y);
                val[0] = p[0];
                val[1] = p[1];
                // Cauchy-Riemann
                grad[0] = dp[0];
                grad[1] = -dp[1];
                grad[2] = dp[1];
                grad[3] = dp[0];
            }
            SurfaceKind::Enneper { eps } => {
                let w = [eps * y[0], eps * y[1]];
                let (u, v, jac) =
                    enneper_uv(w).ok_or_else(|| Error::NotAGraph(format!("Enneper inversion failed at {y:?}")))?;
                val[0] = (u * u - v * v) / eps;
                let inv = jac.try_inverse().ok_or(Error::Degenerate("Enneper Jacobian"))?;
                grad[0] = 2.0 * u * inv[(0, 0)] - 2.0 * v * inv[(1, 0)];
                grad[1] = 2.0 * u * inv[(0, 1)] - 2.0 * v * inv[(1, 1)];
            }
            SurfaceKind::Scherk { eps } => {
                let (a, b) = ((2.0 * eps * y[0]).cos(), (2.0 * eps * y[1]).cos());
                if a <= 0.0 || b <= 0.0 {
                    return Err(Error::NotAGraph("Scherk patch leaves its cell".into()));
                }
                val[0] = (b / a).ln() / (2.0 * eps);
                grad[0] = (2.0 * eps * y[0]).tan();
                grad[1] = -(2.0 * eps * y[1]).tan();
            }
            SurfaceKind::Spiked { .. } => unreachable!(),
        }
        Ok(())
    }

    pub fn value(&self, y: [f64; 2]) -> Result<Vec<f64>> {
        let n = self.n();
        let mut v = vec![0.0; n];
        let mut g = vec![0.0; 2 * n];
        self.eval(y, &mut v, &mut g)?;
        Ok(v)
    }

    fn validate(&self) -> Result<()> {
        match self {
            SurfaceKind::HarmonicQuadratic { eps } | SurfaceKind::Enneper { eps } | SurfaceKind::Scherk { eps }
                if !(*eps >= 0.0 && eps.is_finite()) =>
            {
                Err(Error::InvalidConfig(format!("surface amplitude must be >= 0, got {eps}")))
            }
            SurfaceKind::Enneper { eps } | SurfaceKind::Scherk { eps } if *eps == 0.0 => {
                Err(Error::InvalidConfig("Enneper and Scherk patches need eps > 0".into()))
            }
            SurfaceKind::Tilted { l } if l.is_empty() || l.len() % 2 != 0 => {
                Err(Error::InvalidConfig("tilt matrix must be n x 2".into()))
            }
            SurfaceKind::Spiked { base, defect_fraction, defect_mass, .. } => {
                if !(0.0..=0.05).contains(defect_fraction) {
                    return Err(Error::InvalidConfig(format!("defect fraction {defect_fraction} outside [0, 0.05]")));
                }
                if defect_mass.is_some_and(|m| !(m > 0.0 && m.is_finite())) {
                    return Err(Error::InvalidConfig("defect mass must be positive".into()));
                }
                if matches!(**base, SurfaceKind::Spiked { .. }) {
                    return Err(Error::InvalidConfig("spiked surfaces do not nest".into()));
                }
                base.validate()
            }
            _ => Ok(()),
        }
    }
}

impl SurfaceSpec {
    pub fn new(kind: SurfaceKind) -> Self {
        Self { kind, resolution: default_resolution(), radius: default_radius() }
    }

    pub fn nominal_h(&self) -> f64 {
        2.0 * self.radius / (self.resolution - 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 33 || self.resolution % 2 == 0 {
            return Err(Error::InvalidConfig(format!("resolution must be odd and >= 33, got {}", self.resolution)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidConfig("domain radius must be positive".into()));
        }
        self.kind.validate()
    }

    /// Seeded vertical point masses of the spiked variant (empty otherwise), in
    /// reference coordinates.
    pub fn defects(&self) -> Result<Vec<Defect>> {
        let SurfaceKind::Spiked { base, defect_fraction, defect_mass, seed } = &self.kind else {
            return Ok(Vec::new());
        };
        let n = base.n();
        let count = (defect_fraction * (self.resolution * self.resolution) as f64).round() as usize;
        let h = self.nominal_h();
        let mass = defect_mass.unwrap_or(h * h);
        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
        // a vertical fin: the plane spanned by e_1 and the first normal direction
        let tangent = Frame::from_rotation(2, n, plane_rotation(2 + n, 1, 2, std::f64::consts::FRAC_PI_2))?.orientation();
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let y = [rng.gen_range(-0.9..0.9) * self.radius, rng.gen_range(-0.9..0.9) * self.radius];
            if y[0].hypot(y[1]) >= 0.9 * self.radius {
                continue;
            }
            let lift: f64 = rng.gen_range(0.0..0.05) * self.radius;
            let v = base.value(y)?;
            let mut position = vec![y[0], y[1]];
            position.extend(v.iter().enumerate().map(|(c, x)| if c == 0 { x + lift } else { *x }));
            out.push(Defect { position, tangent: tangent.clone(), mass });
        }
        Ok(out)
    }

    /// The nominal sampling over the reference plane.
    pub fn generate(&self) -> Result<SampledCurrent> {
        self.validate()?;
        let frame = Frame::reference(2, self.kind.n());
        let t = sample_surface(self, &frame, [0.0, 0.0], self.radius, self.nominal_h())?;
        let mut slope: f64 = 0.0;
        let mut grad = vec![0.0; 2 * t.n()];
        for j in 0..t.base.side() {
            for i in 0..t.base.side() {
                t.base.gradient(i, j, &mut grad);
                slope = slope.max(grad.iter().map(|v| v * v).sum::<f64>().sqrt());
            }
        }
        if slope > MAX_SLOPE {
            return Err(Error::NotAGraph(format!("slope {slope:.3} exceeds {MAX_SLOPE}")));
        }
        Ok(t)
    }
}

pub fn generate_surface(spec: &SurfaceSpec) -> Result<SampledCurrent> {
    spec.generate()
}

/// Samples the surface as a graph over the plane of `frame`, on the square of
/// half-width `radius` (a multiple of `h`) about the base point `q` (frame
/// coordinates). Defects inside the sampled cylinder are kept.
pub fn sample_surface(spec: &SurfaceSpec, frame: &Frame, q: [f64; 2], radius: f64, h: f64) -> Result<SampledCurrent> {
    let kind = &spec.kind;
    let n = kind.n();
    if frame.n() != n || frame.m() != 2 {
        return Err(Error::DomainMismatch("frame does not match the surface dimensions".into()));
    }
    let a = frame.rotation().clone();
    let at = a.transpose();
    let identity = frame.same_as(&Frame::reference(2, n));
    let mut val = vec![0.0; n];
    let mut grad = vec![0.0; 2 * n];
    let mut failure = None;
    let base = GridFunction::from_fn(q, radius, h, n, |x: [f64; 2], out: &mut [f64]| {
        if failure.is_some() {
            return;
        }
        if identity {
            if let Err(e) = kind.eval(x, out, &mut grad) {
                failure = Some(e);
            }
            return;
        }
        // find y in the reference plane with P A (y, F(y)) = x
        let mut p = DVector::zeros(2 + n);
        p[0] = x[0];
        p[1] = x[1];
        let start = &at * &p;
        let mut y = [start[0], start[1]];
        for it in 0..=NEWTON_MAX {
            if let Err(e) = kind.eval(y, &mut val, &mut grad) {
                failure = Some(e);
                return;
            }
            let mut s = DVector::zeros(2 + n);
            s[0] = y[0];
            s[1] = y[1];
            for c in 0..n {
                s[2 + c] = val[c];
            }
            let img = &a * s;
            let res = Vector2::new(img[0] - x[0], img[1] - x[1]);
            if res.norm() < NEWTON_TOL * (1.0 + x[0].abs() + x[1].abs()) {
                for c in 0..n {
                    out[c] = img[2 + c];
                }
                return;
            }
            if it == NEWTON_MAX {
                failure = Some(Error::NotAGraph(format!("no preimage for {x:?} over the requested plane")));
                return;
            }
            let mut jac = Matrix2::zeros();
            for r in 0..2 {
                for col in 0..2 {
                    let mut v = a[(r, col)];
                    for c in 0..n {
                        v += a[(r, 2 + c)] * grad[2 * c + col];
                    }
                    jac[(r, col)] = v;
                }
            }
            match jac.lu().solve(&res) {
                Some(step) => {
                    y[0] -= step[0];
                    y[1] -= step[1];
                }
                None => {
                    failure = Some(Error::NotAGraph("vertical tangent over the requested plane".into()));
                    return;
                }
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let half = radius;
    let defects = spec
        .defects()?
        .into_iter()
        .filter(|d| {
            let l = frame.to_frame(&d.position);
            (l[0] - q[0]).abs() < half && (l[1] - q[1]).abs() < half
        })
        .collect();
    SampledCurrent::new(frame.clone(), base, defects, None)
}
