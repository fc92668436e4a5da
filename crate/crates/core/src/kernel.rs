//! Generic kernels on `[0,1]^2`, weight functions and signed row integrals.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{split_points, Integrator};
use crate::scalar::{lit, Func, Real};
use crate::search::{grid_extremum, sign_changes, Extremum, Goal};

/// Number of `t` samples used by the brute-force sup/inf scans.
pub const T_GRID: usize = 2000;

/// A continuous, piecewise smooth kernel `k(t, s)` on `[0,1]^2`.
pub trait Kernel<T: Real>: Send + Sync {
    fn eval(&self, t: T, s: T) -> T;

    /// Points where `s -> k(t, s)` loses smoothness or may change sign.
    fn s_breaks(&self, t: T) -> Vec<T>;

    /// Points where `t -> k(t, s)` loses smoothness.
    fn t_breaks(&self, s: T) -> Vec<T>;

    /// Lines `s = const`, independent of `t`, across which the kernel kinks or
    /// changes sign. Used to align quadrature panels.
    fn fixed_s_breaks(&self) -> Vec<T> {
        Vec::new()
    }

    /// True when [`Kernel::s_breaks`] already lists every sign change in `s`.
    fn sign_changes_listed(&self) -> bool {
        false
    }

    /// `Φ(s)` with `|k(t, s)| <= Φ(s)` for all `t`, when known in closed form.
    fn envelope(&self, _s: T) -> Option<T> {
        None
    }
}

/// Nonnegative weight `g(s)` multiplying the kernel.
#[derive(Clone)]
pub enum Weight<T> {
    One,
    Linear,
    Func { f: Func<T>, label: String },
}

impl<T: Real> Weight<T> {
    pub fn custom(label: impl Into<String>, f: Func<T>) -> Self {
        Weight::Func {
            f,
            label: label.into(),
        }
    }

    #[inline]
    pub fn eval(&self, s: T) -> T {
        match self {
            Weight::One => T::one(),
            Weight::Linear => s,
            Weight::Func { f, .. } => f(s),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Weight::One => "one",
            Weight::Linear => "linear",
            Weight::Func { label, .. } => label,
        }
    }

    /// Grid check of `g >= 0`.
    pub fn check_nonnegative(&self) -> Result<()> {
        if let Weight::Func { f, label } = self {
            for i in 0..=T_GRID {
                let s = lit::<T>(i as f64 / T_GRID as f64);
                let v = f(s);
                if v.is_nan() || v < T::zero() {
                    return Err(Error::InvalidInput(format!(
                        "weight {label} is negative or undefined at s = {s}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl<T> fmt::Debug for Weight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::One => f.write_str("Weight::One"),
            Weight::Linear => f.write_str("Weight::Linear"),
            Weight::Func { label, .. } => write!(f, "Weight::Func({label})"),
        }
    }
}

/// Which part of a signed kernel an operator integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Full,
    Abs,
    Plus,
    Minus,
}

impl Part {
    #[inline]
    pub fn apply<T: Real>(self, v: T) -> T {
        match self {
            Part::Full => v,
            Part::Abs => v.abs(),
            Part::Plus => v.max(T::zero()),
            Part::Minus => (-v).max(T::zero()),
        }
    }
}

/// Positive and negative parts of a row integral `∫ k(t,s) g(s) ds`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SignedIntegral<T> {
    pub plus: T,
    pub minus: T,
}

impl<T: Real> SignedIntegral<T> {
    pub fn net(&self) -> T {
        self.plus - self.minus
    }

    pub fn abs(&self) -> T {
        self.plus + self.minus
    }

    pub fn larger(&self) -> T {
        self.plus.max(self.minus)
    }
}

/// Sub-intervals of `[lo, hi]` on which `s -> k(t, s)` is smooth and of one sign.
pub fn smooth_pieces<T: Real, K: Kernel<T> + ?Sized>(k: &K, t: T, lo: T, hi: T) -> Vec<T> {
    let breaks = k.s_breaks(t);
    let mut pts = split_points(lo, hi, &breaks);
    if !k.sign_changes_listed() {
        let mut extra = Vec::new();
        for w in pts.windows(2) {
            extra.extend(sign_changes(&|s| k.eval(t, s), w[0], w[1], 48));
        }
        if !extra.is_empty() {
            extra.extend(breaks);
            pts = split_points(lo, hi, &extra);
        }
    }
    pts
}

/// `∫_lo^hi k(t,s) g(s) ds` split into positive and negative parts.
pub fn signed_row_integral<T: Real, K: Kernel<T> + ?Sized>(
    k: &K,
    t: T,
    g: &Weight<T>,
    lo: T,
    hi: T,
    q: &Integrator<T>,
) -> Result<SignedIntegral<T>> {
    let pts = smooth_pieces(k, t, lo, hi);
    let mut out = SignedIntegral::default();
    for w in pts.windows(2) {
        let v = q.integrate(&|s| k.eval(t, s) * g.eval(s), w[0], w[1])?;
        if v >= T::zero() {
            out.plus = out.plus + v;
        } else {
            out.minus = out.minus - v;
        }
    }
    Ok(out)
}

/// `∫_lo^hi k(t,s) g(s) ds` with the domain split at the kernel's breaks.
pub fn row_integral<T: Real, K: Kernel<T> + ?Sized>(
    k: &K,
    t: T,
    g: &Weight<T>,
    lo: T,
    hi: T,
    q: &Integrator<T>,
) -> Result<T> {
    let breaks = k.s_breaks(t);
    q.integrate_split(&|s| k.eval(t, s) * g.eval(s), lo, hi, &breaks)
}

/// `sup_t max{∫_0^1 k⁺ g, ∫_0^1 k⁻ g}` by dense `t` scan with refinement.
pub fn sup_signed_row<T: Real, K: Kernel<T> + ?Sized>(
    k: &K,
    g: &Weight<T>,
    q: &Integrator<T>,
    points: usize,
) -> Result<Extremum<T>> {
    grid_extremum(
        |t| signed_row_integral(k, t, g, T::zero(), T::one(), q).map(|v| v.larger()),
        T::zero(),
        T::one(),
        points,
        Goal::Max,
    )
}

/// `inf_{t∈[a,b]} ∫_a^b k(t,s) g(s) ds` by dense `t` scan with refinement.
pub fn inf_row_on_interval<T: Real, K: Kernel<T> + ?Sized>(
    k: &K,
    g: &Weight<T>,
    a: T,
    b: T,
    q: &Integrator<T>,
    points: usize,
) -> Result<Extremum<T>> {
    grid_extremum(|t| row_integral(k, t, g, a, b, q), a, b, points, Goal::Min)
}

/// Dense sample of a kernel, row-major over `ts × ss`.
pub fn sample_kernel<T: Real, K: Kernel<T> + ?Sized>(k: &K, ts: &[T], ss: &[T]) -> Vec<T> {
    ts.par_iter()
        .flat_map_iter(|&t| ss.iter().map(move |&s| k.eval(t, s)))
        .collect()
}

/// Kernel defined by a closure, with optional diagonal kink.
pub struct FnKernel<T> {
    f: std::sync::Arc<dyn Fn(T, T) -> T + Send + Sync>,
    diagonal_kink: bool,
}

impl<T: Real> FnKernel<T> {
    pub fn new(f: impl Fn(T, T) -> T + Send + Sync + 'static, diagonal_kink: bool) -> Self {
        Self {
            f: std::sync::Arc::new(f),
            diagonal_kink,
        }
    }
}

impl<T: Real> Kernel<T> for FnKernel<T> {
    fn eval(&self, t: T, s: T) -> T {
        (self.f)(t, s)
    }

    fn s_breaks(&self, t: T) -> Vec<T> {
        if self.diagonal_kink {
            vec![t]
        } else {
            Vec::new()
        }
    }

    fn t_breaks(&self, s: T) -> Vec<T> {
        self.s_breaks(s)
    }
}
