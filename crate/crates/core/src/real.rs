use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Scalar type the analytic side of the crate is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances are derived from
/// [`Float::epsilon`] so that the same solvers run at either precision; the
/// tight tolerances quoted in the docs apply to `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// `max(abs_tol, 64 eps)`: an absolute tolerance that is attainable at this precision.
    #[inline]
    fn tol(abs_tol: f64) -> Self {
        Self::lit(abs_tol).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Clamps into the closed unit interval.
    #[inline]
    fn clamp_unit(self) -> Self {
        self.max(Self::zero()).min(Self::one())
    }

    /// Integer power for a degree-like exponent.
    #[inline]
    fn powu(self, k: usize) -> Self {
        match i32::try_from(k) {
            Ok(k) => self.powi(k),
            Err(_) => self.powf(Self::from_usize_lossy(k)),
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
