//! Row integrals of the shifted kernels against `1` and `s` from exact
//! antiderivatives, split at the diagonal and at the zeros of the factors.

use super::{ShiftSign, ShiftedKernel};
use crate::kernel::SignedIntegral;
use crate::quadrature::split_points;
use crate::scalar::Real;

/// `∫_lo^hi k(t,s) w(s) ds` with `w(s) = s` if `linear`, else `w ≡ 1`,
/// split into positive and negative parts.
pub fn exact_row_integral<T: Real>(
    k: &ShiftedKernel<T>,
    t: T,
    lo: T,
    hi: T,
    linear: bool,
) -> SignedIntegral<T> {
    let w = k.omega();
    let one = T::one();
    let hyperbolic = k.sign() == ShiftSign::Minus;
    let (c, sn) = if hyperbolic {
        (T::cosh as fn(T) -> T, T::sinh as fn(T) -> T)
    } else {
        (T::cos as fn(T) -> T, T::sin as fn(T) -> T)
    };
    let scale = w * sn(w);
    let w2 = w * w;

    // Antiderivatives of h(ωs) and s·h(ωs).
    let left_anti = |s: T| -> T {
        if !linear {
            sn(w * s) / w
        } else if hyperbolic {
            s * sn(w * s) / w - c(w * s) / w2
        } else {
            s * sn(w * s) / w + c(w * s) / w2
        }
    };
    // Antiderivatives of h(ω(1-s)) and s·h(ω(1-s)).
    let right_anti = |s: T| -> T {
        let x = w * (one - s);
        if !linear {
            -sn(x) / w
        } else if hyperbolic {
            -s * sn(x) / w - c(x) / w2
        } else {
            -s * sn(x) / w + c(x) / w2
        }
    };

    let lines = k.sign_lines();
    let mut out = SignedIntegral::default();
    let mut add = |v: T| {
        if v >= T::zero() {
            out.plus = out.plus + v;
        } else {
            out.minus = out.minus - v;
        }
    };

    // s <= t: k = h(ω(1-t)) h(ωs) / scale
    let l_hi = hi.min(t);
    if l_hi > lo {
        let factor = c(w * (one - t)) / scale;
        let pts = split_points(lo, l_hi, &lines);
        for p in pts.windows(2) {
            add(factor * (left_anti(p[1]) - left_anti(p[0])));
        }
    }
    // s >= t: k = h(ωt) h(ω(1-s)) / scale
    let r_lo = lo.max(t);
    if hi > r_lo {
        let factor = c(w * t) / scale;
        let pts = split_points(r_lo, hi, &lines);
        for p in pts.windows(2) {
            add(factor * (right_anti(p[1]) - right_anti(p[0])));
        }
    }
    out
}
