//! Scalar abstraction shared by the grid, kernel and partition-of-unity code.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::Debug;
use std::iter::Sum;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Copy + Debug + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for literals.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Lebesgue measure of the unit ball in `R^m`.
pub fn unit_ball_volume<R: Real>(m: usize) -> R {
    // ω_m = π^{m/2} / Γ(m/2 + 1), by the two-step recursion ω_m = 2π/m · ω_{m-2}
    let pi = R::PI();
    match m {
        0 => R::one(),
        1 => R::lit(2.0),
        _ => pi * R::lit(2.0) / R::from_usize(m).unwrap() * unit_ball_volume::<R>(m - 2),
    }
}
