use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the metrics are computed in: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to any float scalar")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count converts to any float scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float scalar converts to f64")
    }

    fn hundred() -> Self {
        Self::from_f64_lossy(100.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
