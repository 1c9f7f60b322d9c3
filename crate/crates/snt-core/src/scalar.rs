use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::Debug;
use std::iter::Sum;

/// Floating-point scalar used by the statevector backend and the statistics code.
pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Default + Send + Sync + 'static {
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite conversion")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
