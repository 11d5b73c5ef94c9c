use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar for all field evaluations: f32 or f64.
///
/// Everything downstream of the profile closures is generic over this
/// trait; the quadrature tolerances in [`crate::kernel::QuadratureConfig`]
/// assume f64-class precision, so f32 instantiations are best treated as
/// low-accuracy previews.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + core::ops::AddAssign
    + core::fmt::Debug
    + core::fmt::Display
    + core::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an f64 literal.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal must convert into the scalar type")
    }

    /// Lossless widening into f64, for error payloads and reports.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert into f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
