//! Generic floating-point scalar used throughout the library: f32 or f64.

use std::fmt::{Debug, Display};
use std::ops::AddAssign;

/// Floating-point number the auction arithmetic is generic over.
///
/// Everything downstream (valuations, costs, prices, thresholds) is expressed
/// in this scalar. The crate-root aliases pin it to `f64`, which is what the
/// harness and CLI use; `f32` works for the core math as well.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + AddAssign + Debug + Display + Send + Sync + 'static
{
    /// Convert an `f64` literal or intermediate into this scalar.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to Real")
    }

    /// Convert a count into this scalar.
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize converts to Real")
    }
}

impl Real for f32 {}
impl Real for f64 {}
