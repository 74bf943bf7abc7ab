//! Scalar abstraction: everything numeric in this crate is generic over [`Real`].

use std::fmt::{Debug, Display, LowerExp};

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the solver works over.
///
/// Blanket-implemented for anything float-like; in practice `f32` and `f64`.
/// The crate root exports `f64` aliases of all the main types.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// The rational num/den evaluated in this scalar type.
    ///
    /// Band templates are kept as exact integer pairs and converted through
    /// here exactly once, so no decimal transcription of constants like
    /// 5307/100800 ever enters the build.
    fn rational(num: i64, den: i64) -> Self {
        Self::from_i64(num).unwrap() / Self::from_i64(den).unwrap()
    }

    /// Small integer constant.
    fn int(v: i64) -> Self {
        Self::from_i64(v).unwrap()
    }

    /// Conversion from an `f64` literal.
    fn of(v: f64) -> Self {
        Self::from_f64(v).unwrap()
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
}

#[cfg(test)]
mod tests {
    use super::Real;

    #[test]
    fn rational_is_correctly_rounded() {
        assert_eq!(f64::rational(1, 2), 0.5);
        assert_eq!(f64::rational(-9, 2), -4.5);
        assert_eq!(f64::rational(31686, 50400), 31686.0 / 50400.0);
        assert_eq!(f32::rational(669, 8400), 669.0f32 / 8400.0f32);
    }

    #[test]
    fn int_and_of() {
        assert_eq!(f64::int(-40), -40.0);
        assert_eq!(f32::of(0.25), 0.25f32);
    }
}
