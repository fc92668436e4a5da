//! Green's functions of the shifted Neumann problems `∓(u'' ± ω²u) = h`,
//! `u'(0) = u'(1) = 0`, together with their cone constants.
//!
//! With `ε = -1`
//!
//! ```text
//! k(t,s) = cosh ω(1 - max(t,s)) · cosh ω min(t,s) / (ω sinh ω),
//! ```
//!
//! and with `ε = +1` the same expression with `cos`/`sin` in place of
//! `cosh`/`sinh`. Both satisfy `∫_0^1 k(t,s) ds = 1/ω²`.

mod exact;

use serde::{Deserialize, Serialize};

pub use exact::exact_row_integral;

use crate::error::{Error, Result};
use crate::kernel::{inf_row_on_interval, sup_signed_row, Kernel, Weight, T_GRID};
use crate::quadrature::Integrator;
use crate::scalar::{lit, to_f64, Real};
use crate::search::{bisect, grid_extremum, Goal};

/// Minimum distance of `ω` from the poles `kπ` of the `ε = +1` kernel.
pub const POLE_GUARD: f64 = 1e-8;

/// Sign `ε` of the shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShiftSign {
    /// `ε = -1`: `-u'' + ω²u`, hyperbolic kernel.
    Minus,
    /// `ε = +1`: `u'' + ω²u`, trigonometric kernel.
    Plus,
}

impl ShiftSign {
    pub fn from_epsilon(eps: i32) -> Result<Self> {
        match eps {
            -1 => Ok(ShiftSign::Minus),
            1 => Ok(ShiftSign::Plus),
            other => Err(Error::Domain(format!("epsilon must be -1 or +1, got {other}"))),
        }
    }

    pub fn epsilon(self) -> i32 {
        match self {
            ShiftSign::Minus => -1,
            ShiftSign::Plus => 1,
        }
    }
}

/// Sign pattern of the `ε = +1` kernel, determined by `ω` alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SignClass {
    PositiveEverywhere,
    /// Positive except at `(0,0)` and `(1,1)`.
    PositiveExceptCorners,
    /// Positive on `(lo, hi) × [0,1]`.
    PositiveOnStrip { lo: f64, hi: f64 },
    NoStrip,
}

/// Sign class of the `ε = +1` kernel at frequency `ω`.
pub fn classify_sign<T: Real>(omega: T) -> Result<SignClass> {
    check_omega(ShiftSign::Plus, omega)?;
    let half_pi = T::FRAC_PI_2();
    let eps = T::epsilon() * lit(16.0) * half_pi;
    Ok(if omega < half_pi - eps {
        SignClass::PositiveEverywhere
    } else if (omega - half_pi).abs() <= eps {
        SignClass::PositiveExceptCorners
    } else if omega < T::PI() {
        let hi = half_pi / omega;
        SignClass::PositiveOnStrip {
            lo: to_f64(T::one() - hi),
            hi: to_f64(hi),
        }
    } else {
        SignClass::NoStrip
    })
}

fn check_omega<T: Real>(sign: ShiftSign, omega: T) -> Result<()> {
    if omega.is_nan() || omega <= T::zero() || !omega.is_finite() {
        return Err(Error::Domain(format!("omega must be positive and finite, got {omega}")));
    }
    if sign == ShiftSign::Plus {
        let k = (omega / T::PI()).round();
        if k >= T::one() && (omega - k * T::PI()).abs() < lit(POLE_GUARD) {
            return Err(Error::Domain(format!(
                "omega = {omega} is within {POLE_GUARD:e} of {k}π where sin ω vanishes"
            )));
        }
    }
    Ok(())
}

/// Green's function of the shifted Neumann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedKernel<T> {
    sign: ShiftSign,
    omega: T,
    /// `ω sinh ω` or `ω sin ω`; unused by the stable hyperbolic branch.
    scale: T,
}

impl<T: Real> ShiftedKernel<T> {
    pub fn new(sign: ShiftSign, omega: T) -> Result<Self> {
        check_omega(sign, omega)?;
        let scale = match sign {
            ShiftSign::Minus => omega * omega.sinh(),
            ShiftSign::Plus => omega * omega.sin(),
        };
        Ok(Self { sign, omega, scale })
    }

    pub fn sign(&self) -> ShiftSign {
        self.sign
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    /// Sign class; every `ε = -1` kernel is positive everywhere.
    pub fn sign_class(&self) -> SignClass {
        match self.sign {
            ShiftSign::Minus => SignClass::PositiveEverywhere,
            ShiftSign::Plus => classify_sign(self.omega).expect("omega validated at construction"),
        }
    }

    /// True when the constants `Φ`, `c(a,b)`, `m`, `M(a,b)` are defined.
    fn constants_available(&self) -> Result<()> {
        if self.sign == ShiftSign::Plus && self.omega >= T::PI() {
            return Err(Error::Domain(format!(
                "constants of the ε = +1 kernel are only defined for ω < π, got ω = {}",
                self.omega
            )));
        }
        Ok(())
    }

    /// Evaluates `k(t, s)`.
    pub fn value(&self, t: T, s: T) -> T {
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        let w = self.omega;
        match self.sign {
            ShiftSign::Minus => {
                // cosh x cosh y / (ω sinh ω) rewritten with decaying exponentials.
                let x = w * (T::one() - hi);
                let y = w * lo;
                let sum = (x + y - w).exp() + (x - y - w).exp() + (y - x - w).exp() + (-x - y - w).exp();
                let denom = lit::<T>(2.0) * w * (-(lit::<T>(-2.0) * w).exp_m1());
                sum / denom
            }
            ShiftSign::Plus => (w * (T::one() - hi)).cos() * (w * lo).cos() / self.scale,
        }
    }

    /// Zeros of `cos ωs` and `cos ω(1-s)` inside `(0,1)`.
    pub fn sign_lines(&self) -> Vec<T> {
        if self.sign == ShiftSign::Minus {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut j = 0usize;
        loop {
            let z = (lit::<T>(j as f64) + lit(0.5)) * T::PI() / self.omega;
            if z >= T::one() {
                break;
            }
            out.push(z);
            out.push(T::one() - z);
            j += 1;
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    /// Envelope `Φ(s) = sup_t |k(t,s)|`.
    pub fn phi(&self, s: T) -> Result<T> {
        self.constants_available()?;
        Ok(match self.sign {
            ShiftSign::Minus => self.value(s, s),
            ShiftSign::Plus => {
                let w = self.omega;
                (w * (T::one() - s)).cos().max((w * s).cos()) / self.scale
            }
        })
    }

    /// Checks that `[a, b]` lies where the kernel is positive.
    pub fn admissible_interval(&self, a: T, b: T) -> Result<()> {
        if !(a >= T::zero() && b <= T::one() && a < b) {
            return Err(Error::InvalidInput(format!(
                "interval [{a}, {b}] must satisfy 0 <= a < b <= 1"
            )));
        }
        self.constants_available()?;
        let strip = match self.sign_class() {
            SignClass::PositiveEverywhere => return Ok(()),
            SignClass::PositiveExceptCorners => (T::zero(), T::one()),
            SignClass::PositiveOnStrip { lo, hi } => (lit(lo), lit(hi)),
            SignClass::NoStrip => unreachable!("excluded by constants_available"),
        };
        let tol = T::epsilon() * lit(8.0);
        if a > strip.0 + tol && b < strip.1 - tol {
            Ok(())
        } else {
            Err(Error::StripViolation {
                a: to_f64(a),
                b: to_f64(b),
                lo: to_f64(strip.0),
                hi: to_f64(strip.1),
            })
        }
    }

    /// Cone constant `c(a,b) = min_{t∈[a,b]} k(t,s)/Φ(s)` in closed form.
    pub fn c_of_interval(&self, a: T, b: T) -> Result<T> {
        self.admissible_interval(a, b)?;
        let w = self.omega;
        Ok(match self.sign {
            ShiftSign::Minus => (w * a).cosh().min((w * (T::one() - b)).cosh()) / w.cosh(),
            ShiftSign::Plus => (w * a)
                .cos()
                .min((w * (T::one() - a)).cos())
                .min((w * b).cos())
                .min((w * (T::one() - b)).cos()),
        })
    }

    /// `m = 1 / sup_t max{∫_0^1 k⁺ g, ∫_0^1 k⁻ g}`.
    ///
    /// Closed form for `g ≡ 1`, exact antiderivatives plus a `t` search for
    /// `g(s) = s`, adaptive quadrature otherwise.
    pub fn m_constant(&self, g: &Weight<T>, q: &Integrator<T>) -> Result<T> {
        self.constants_available()?;
        let w = self.omega;
        match g {
            Weight::One => Ok(match self.sign {
                ShiftSign::Plus if w >= T::FRAC_PI_2() => w * w * w.sin(),
                _ => w * w,
            }),
            Weight::Linear => {
                let ext = grid_extremum(
                    |t| Ok(exact_row_integral(self, t, T::zero(), T::one(), true).larger()),
                    T::zero(),
                    T::one(),
                    T_GRID,
                    Goal::Max,
                )?;
                Ok(T::one() / ext.value)
            }
            Weight::Func { .. } => self.m_by_quadrature(g, q),
        }
    }

    /// `M(a,b) = 1 / inf_{t∈[a,b]} ∫_a^b k(t,s) g(s) ds`.
    pub fn m_ab_constant(&self, a: T, b: T, g: &Weight<T>, q: &Integrator<T>) -> Result<T> {
        self.admissible_interval(a, b)?;
        match g {
            Weight::One => self.m_ab_closed_form(a, b),
            Weight::Linear => {
                let ext = grid_extremum(
                    |t| Ok(exact_row_integral(self, t, a, b, true).net()),
                    a,
                    b,
                    T_GRID,
                    Goal::Min,
                )?;
                Ok(T::one() / ext.value)
            }
            Weight::Func { .. } => self.m_ab_by_quadrature(a, b, g, q),
        }
    }

    fn m_ab_closed_form(&self, a: T, b: T) -> Result<T> {
        let w = self.omega;
        let one = T::one();
        let inv = match self.sign {
            ShiftSign::Minus => {
                // ξ₁ is convex, so its maximum over [a,b] sits at an endpoint.
                let xi1 = |t: T| (w * a).sinh() * (w * (one - t)).cosh() + (w * (one - b)).sinh() * (w * t).cosh();
                let xi = if a + b <= one { xi1(b) } else { xi1(a) };
                one / (w * w) - xi / (w * w * w.sinh())
            }
            ShiftSign::Plus => {
                let sin_w = w.sin();
                if (a + b - one).abs() <= T::epsilon() * lit(4.0) {
                    (sin_w - lit::<T>(2.0) * (w * lit(0.5)).cos() * (w * a).sin()) / (w * w * sin_w)
                } else {
                    let (sa, sb) = ((w * a).sin(), (w * (one - b)).sin());
                    let xi3 = |t: T| (w * (one - t)).cos() * sa + (w * t).cos() * sb;
                    let dxi3 = |t: T| w * ((w * (one - t)).sin() * sa - (w * t).sin() * sb);
                    let (da, db) = (dxi3(a), dxi3(b));
                    let top = if da > T::zero() && db < T::zero() {
                        let t0 = bisect(dxi3, a, b, lit(1e-12), 200)?;
                        xi3(t0).max(xi3(a)).max(xi3(b))
                    } else {
                        xi3(a).max(xi3(b))
                    };
                    one / (w * w) - top / (w * w * sin_w)
                }
            }
        };
        if inv <= T::zero() {
            return Err(Error::NonpositiveInfimum {
                t: f64::NAN,
                value: to_f64(inv),
            });
        }
        Ok(one / inv)
    }

    /// Brute-force `m`: 2000-point `t` grid, adaptive quadrature in `s`.
    pub fn m_by_quadrature(&self, g: &Weight<T>, q: &Integrator<T>) -> Result<T> {
        self.constants_available()?;
        let ext = sup_signed_row(self, g, q, T_GRID)?;
        Ok(T::one() / ext.value)
    }

    /// Brute-force `M(a,b)`: 2000-point `t` grid, adaptive quadrature in `s`.
    pub fn m_ab_by_quadrature(&self, a: T, b: T, g: &Weight<T>, q: &Integrator<T>) -> Result<T> {
        self.admissible_interval(a, b)?;
        let ext = inf_row_on_interval(self, g, a, b, q, T_GRID)?;
        if ext.value <= T::zero() {
            return Err(Error::NonpositiveInfimum {
                t: to_f64(ext.at),
                value: to_f64(ext.value),
            });
        }
        Ok(T::one() / ext.value)
    }
}

impl<T: Real> Kernel<T> for ShiftedKernel<T> {
    fn eval(&self, t: T, s: T) -> T {
        self.value(t, s)
    }

    fn s_breaks(&self, t: T) -> Vec<T> {
        let mut b = self.sign_lines();
        b.push(t);
        b
    }

    fn t_breaks(&self, s: T) -> Vec<T> {
        self.s_breaks(s)
    }

    fn fixed_s_breaks(&self) -> Vec<T> {
        self.sign_lines()
    }

    fn sign_changes_listed(&self) -> bool {
        true
    }

    fn envelope(&self, s: T) -> Option<T> {
        self.phi(s).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn km(w: f64) -> ShiftedKernel<f64> {
        ShiftedKernel::new(ShiftSign::Minus, w).unwrap()
    }

    fn kp(w: f64) -> ShiftedKernel<f64> {
        ShiftedKernel::new(ShiftSign::Plus, w).unwrap()
    }

    #[test]
    fn hyperbolic_corner_value() {
        let v = km(1.0).value(0.0, 0.0);
        assert!((v - 1f64.cosh() / 1f64.sinh()).abs() < 1e-14);
        assert!((v - 1.3130).abs() < 1e-4);
    }

    #[test]
    fn stable_branch_matches_naive_formula() {
        let k = km(2.5);
        for &(t, s) in &[(0.1f64, 0.7f64), (0.9, 0.2), (0.5, 0.5)] {
            let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
            let naive = (2.5 * (1.0 - hi)).cosh() * (2.5 * lo).cosh() / (2.5 * 2.5f64.sinh());
            assert!((k.value(t, s) - naive).abs() < 1e-14);
        }
        // no overflow far beyond where cosh ω overflows
        let big = km(900.0).value(0.5, 0.5);
        assert!(big.is_finite() && big > 0.0);
    }

    #[test]
    fn trig_kernel_vanishes_at_corner_for_quarter_period() {
        assert!(kp(PI / 2.0).value(0.0, 0.0).abs() < 1e-15);
        assert!(kp(PI / 2.0).value(1.0, 1.0).abs() < 1e-15);
    }

    #[test]
    fn poles_and_bad_omega_rejected() {
        assert!(ShiftedKernel::new(ShiftSign::Plus, PI).is_err());
        assert!(ShiftedKernel::new(ShiftSign::Plus, 2.0 * PI + 1e-9).is_err());
        assert!(ShiftedKernel::new(ShiftSign::Plus, 2.0 * PI + 1e-6).is_ok());
        assert!(ShiftedKernel::new(ShiftSign::Minus, 0.0).is_err());
        assert!(ShiftedKernel::new(ShiftSign::Minus, PI).is_ok());
        assert!(ShiftSign::from_epsilon(0).is_err());
    }

    #[test]
    fn sign_classes() {
        assert_eq!(classify_sign(PI / 4.0).unwrap(), SignClass::PositiveEverywhere);
        assert_eq!(classify_sign(PI / 2.0).unwrap(), SignClass::PositiveExceptCorners);
        match classify_sign(7.0 * PI / 12.0).unwrap() {
            SignClass::PositiveOnStrip { lo, hi } => {
                assert!((lo - 1.0 / 7.0).abs() < 1e-14);
                assert!((hi - 6.0 / 7.0).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(classify_sign(4.0).unwrap(), SignClass::NoStrip);
        assert!(classify_sign(3.0 * PI).is_err());
    }

    #[test]
    fn envelope_values() {
        let phi = km(1.0).phi(0.5).unwrap();
        assert!((phi - 0.5f64.cosh().powi(2) / 1f64.sinh()).abs() < 1e-14);
        assert!((phi - 1.0820).abs() < 1e-4);
        let phi = kp(3.0).phi(0.0).unwrap();
        assert!((phi - 1.0 / (3.0 * 3f64.sin())).abs() < 1e-14);
        assert!(kp(4.0).phi(0.2).is_err());
    }

    #[test]
    fn cone_constants() {
        let c = kp(7.0 * PI / 12.0).c_of_interval(0.25, 0.75).unwrap();
        let nested = 0.5 * (2.0 - (2.0 + 2f64.sqrt()).sqrt()).sqrt();
        assert!((c - nested).abs() < 1e-14);
        assert!((c - 0.195).abs() < 1e-3);
        let c = km(1.0).c_of_interval(0.0, 1.0).unwrap();
        assert!((c - 1.0 / 1f64.cosh()).abs() < 1e-15);
        assert!(matches!(
            kp(7.0 * PI / 12.0).c_of_interval(0.1, 0.75),
            Err(Error::StripViolation { .. })
        ));
        assert!(kp(1.0).c_of_interval(0.0, 1.0).is_ok());
        assert!(kp(PI / 2.0).c_of_interval(0.0, 0.5).is_err());
    }

    #[test]
    fn m_constants() {
        let q = Integrator::default();
        assert!((km(1.0).m_constant(&Weight::One, &q).unwrap() - 1.0).abs() < 1e-15);
        let m = km(1.0).m_constant(&Weight::Linear, &q).unwrap();
        assert!((m - (E + 1.0) / 2.0).abs() < 1e-9);
        let m = kp(2.0).m_constant(&Weight::One, &q).unwrap();
        assert!((m - 4.0 * 2f64.sin()).abs() < 1e-14);
        assert!((m - 3.637).abs() < 1e-3);
    }

    #[test]
    fn m_ab_constants() {
        let q = Integrator::default();
        let m = km(1.0).m_ab_constant(0.0, 1.0, &Weight::Linear, &q).unwrap();
        assert!((m - (E + 1.0) / (E - 1.0)).abs() < 1e-9);
        let m = km(1.7).m_ab_constant(0.0, 1.0, &Weight::One, &q).unwrap();
        assert!((m - 1.7 * 1.7).abs() < 1e-12);
        // Symmetric interval: closed form and quadrature agree.
        let k = kp(7.0 * PI / 12.0);
        let closed = k.m_ab_constant(0.25, 0.75, &Weight::One, &q).unwrap();
        let brute = k.m_ab_by_quadrature(0.25, 0.75, &Weight::One, &q).unwrap();
        assert!((closed - brute).abs() < 1e-8 * brute);
    }

    #[test]
    fn quarter_period_positive_part_sup() {
        let q = Integrator::default();
        for &w in &[1.7, 2.0, 2.6, 3.0] {
            let k = kp(w);
            let ext = sup_signed_row(&k, &Weight::One, &q, 400).unwrap();
            assert!((ext.value - 1.0 / (w * w * w.sin())).abs() < 1e-8);
        }
    }

    #[test]
    fn f32_kernel_smoke() {
        let k = ShiftedKernel::<f32>::new(ShiftSign::Minus, 1.0).unwrap();
        assert!((k.value(0.0, 0.0) - 1.313_035_3).abs() < 1e-5);
        let c = k.c_of_interval(0.0, 1.0).unwrap();
        assert!((c - 0.648_054_3).abs() < 1e-5);
    }
}
