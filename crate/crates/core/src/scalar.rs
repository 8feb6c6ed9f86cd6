use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point type the numerical core runs on.
pub trait Scalar: Float + FromPrimitive + Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static {
    /// Converts an `f64` literal. Every `f64` is representable (possibly rounded).
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal converts to any float")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to any float")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
