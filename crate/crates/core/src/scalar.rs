//! Floating-point scalar abstraction for the walk and collision numerics.

use std::fmt::Debug;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type the dense walk computations run over.
///
/// `f64` is the default and what the CLI uses; `f32` works at small sizes
/// where the `1/(2n)` mixing threshold stays well above the epsilon.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + AddAssign + Debug + Send + Sync + 'static
{
    /// Lossless-enough conversion from a node count or index.
    fn from_count(c: usize) -> Self {
        Self::from_usize(c).expect("count representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + AddAssign + Debug + Send + Sync + 'static
{
}
