//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::Arc;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the kernels, quadratures and solvers are written against.
///
/// Implemented for `f32` and `f64`. Transcendental kernels rule out exact
/// rational arithmetic, so only IEEE types are supported.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance floor below which relative accuracy requests are meaningless.
    fn accuracy_floor() -> Self {
        Self::epsilon() * lit(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline(always)]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a scalar to `f64` for reporting.
#[inline(always)]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Clamps a requested tolerance to what the scalar type can resolve.
pub fn effective_tol<T: Real>(requested: f64) -> T {
    lit::<T>(requested).max(T::accuracy_floor())
}

/// Shared univariate function `[0,1] -> R`.
pub type Func<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Shared bivariate function, used for nonlinearities `f(t, u)`.
pub type Func2<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Wraps a closure as a [`Func`].
pub fn func<T: Real>(f: impl Fn(T) -> T + Send + Sync + 'static) -> Func<T> {
    Arc::new(f)
}

/// Wraps a closure as a [`Func2`].
pub fn func2<T: Real>(f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Func2<T> {
    Arc::new(f)
}

/// Uniform grid of `n >= 2` points on `[lo, hi]`, endpoints included.
pub fn uniform_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let n = n.max(2);
    let step = (hi - lo) / lit::<T>((n - 1) as f64);
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * lit::<T>(i as f64) })
        .collect()
}
