//! Scalar abstraction for the floating-point parts of the model.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by geometry, penalties and the wait model.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts currency to integer micro-units with round-half-even.
pub fn to_micros(value: f64) -> i64 {
    let scaled = value * 1e6;
    let rounded = scaled.round();
    if (scaled - scaled.trunc()).abs() == 0.5 {
        // halfway: pick the even neighbour
        let down = scaled.floor();
        if (down as i64) % 2 == 0 {
            return down as i64;
        }
        return down as i64 + 1;
    }
    rounded as i64
}

pub fn from_micros(value: i64) -> f64 {
    value as f64 / 1e6
}
