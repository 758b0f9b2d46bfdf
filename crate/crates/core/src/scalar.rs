use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type the reward, advantage and metric arithmetic is
/// generic over. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
