use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point type used for the agents' expectation arithmetic.
///
/// Prices and cash are integer ticks regardless of the scalar; only the
/// expected-return, expected-price and order-price computations run in `F`.
pub trait Scalar:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion used for random draws, which are always sampled in
    /// `f64` so that both precisions consume identical random streams.
    fn of(x: f64) -> Self;
}

impl Scalar for f32 {
    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }
}

impl Scalar for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }
}
