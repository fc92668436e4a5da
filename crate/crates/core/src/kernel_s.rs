//! The auxiliary kernel
//!
//! ```text
//! k_S(t,s) = γ(t)/D [(1-β[δ]) K_A(s) + α[δ] K_B(s)]
//!          + δ(t)/D [β[γ] K_A(s) + (1-α[γ]) K_B(s)] + k(t,s),
//! ```
//!
//! whose Hammerstein operator shares its fixed points in the cone with the
//! perturbed operator, and the constants `m_S`, `M_S`, `c̃` built from it.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Condition, Error, Result};
use crate::kernel::{
    inf_row_on_interval, signed_row_integral, sup_signed_row, Kernel, Part, SignedIntegral, Weight, T_GRID,
};
use crate::measures::{BoundaryData, BoundaryScalars, KernelFunctional, SIGN_SLACK};
use crate::quadrature::Integrator;
use crate::scalar::{lit, to_f64, uniform_grid, Real};
use crate::search::{grid_extremum, Goal};

/// `k_S` with its envelope `Ψ = Υ + Φ` and cone constant `c = min{c₁, c₂, c₃}`.
#[derive(Clone)]
pub struct AssembledKernel<T: Real> {
    base: Arc<dyn Kernel<T>>,
    bd: BoundaryData<T>,
    ka: KernelFunctional<T>,
    kb: KernelFunctional<T>,
    scalars: BoundaryScalars<T>,
    gamma_norm: T,
    delta_norm: T,
    c1: T,
    c2: Option<T>,
    c3: Option<T>,
    extra_breaks: Vec<T>,
}

impl<T: Real> fmt::Debug for AssembledKernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AssembledKernel")
            .field("scalars", &self.scalars)
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .field("c3", &self.c3)
            .finish()
    }
}

impl<T: Real> AssembledKernel<T> {
    /// Builds `k_S` after checking `(C₅)`–`(C₈)` on `[a, b]`.
    ///
    /// `c1` is the cone constant of the base kernel on `[a, b]`.
    pub fn assemble(
        base: Arc<dyn Kernel<T>>,
        bd: BoundaryData<T>,
        c1: T,
        a: T,
        b: T,
        q: &Integrator<T>,
    ) -> Result<Self> {
        let (scalars, c2, c3) = bd.validate(a, b, q)?;
        let ka = KernelFunctional::new(&bd.alpha, base.clone(), q)?;
        let kb = KernelFunctional::new(&bd.beta, base.clone(), q)?;
        for (name, kf) in [("K_A", &ka), ("K_B", &kb)] {
            let (s, v) = kf.grid_min();
            if v < -lit::<T>(SIGN_SLACK) {
                return Err(Error::ConditionViolation {
                    condition: Condition::C5,
                    detail: format!("{name}({s}) = {v} < 0 (grid-verified)"),
                });
            }
        }
        let gamma_norm = bd.gamma.sup_norm()?;
        let delta_norm = bd.delta.sup_norm()?;
        let mut extra_breaks = ka.breaks();
        extra_breaks.extend(kb.breaks());
        Ok(Self {
            base,
            bd,
            ka,
            kb,
            scalars,
            gamma_norm,
            delta_norm,
            c1,
            c2,
            c3,
            extra_breaks,
        })
    }

    /// `k_S = k` for trivial boundary data.
    pub fn plain(base: Arc<dyn Kernel<T>>, c1: T, q: &Integrator<T>) -> Result<Self> {
        Self::assemble(base, BoundaryData::trivial(), c1, T::zero(), T::one(), q)
    }

    pub fn base(&self) -> &Arc<dyn Kernel<T>> {
        &self.base
    }

    pub fn boundary(&self) -> &BoundaryData<T> {
        &self.bd
    }

    pub fn scalars(&self) -> &BoundaryScalars<T> {
        &self.scalars
    }

    pub fn ka(&self) -> &KernelFunctional<T> {
        &self.ka
    }

    pub fn kb(&self) -> &KernelFunctional<T> {
        &self.kb
    }

    pub fn gamma_norm(&self) -> T {
        self.gamma_norm
    }

    pub fn delta_norm(&self) -> T {
        self.delta_norm
    }

    pub fn c1(&self) -> T {
        self.c1
    }

    pub fn c2(&self) -> Option<T> {
        self.c2
    }

    pub fn c3(&self) -> Option<T> {
        self.c3
    }

    /// `c = min{c₁, c₂, c₃}` over the constants that apply.
    pub fn cone_c(&self) -> T {
        let mut c = self.c1;
        if let Some(c2) = self.c2 {
            c = c.min(c2);
        }
        if let Some(c3) = self.c3 {
            c = c.min(c3);
        }
        c
    }

    /// `(1-β[δ]) K_A(s) + α[δ] K_B(s)` over `D`, and the `δ` counterpart.
    pub fn functional_terms(&self, s: T) -> (T, T) {
        if self.ka.is_zero() && self.kb.is_zero() {
            return (T::zero(), T::zero());
        }
        let (ka, kb) = (self.ka.eval(s), self.kb.eval(s));
        let (xa, xb) = self.scalars.gamma_coefficients();
        let (ya, yb) = self.scalars.delta_coefficients();
        (xa * ka + xb * kb, ya * ka + yb * kb)
    }

    /// `Υ(s) = ‖γ‖ A(s) + ‖δ‖ B(s)`.
    pub fn upsilon(&self, s: T) -> T {
        let (ga, da) = self.functional_terms(s);
        self.gamma_norm * ga + self.delta_norm * da
    }

    /// `Ψ(s) = Υ(s) + Φ(s)`.
    pub fn psi(&self, s: T) -> Result<T> {
        let phi = self
            .base
            .envelope(s)
            .ok_or_else(|| Error::EnvelopeUnavailable("base kernel has no closed-form Φ".into()))?;
        Ok(self.upsilon(s) + phi)
    }

    /// Positive and negative parts of `k_S`.
    pub fn decompose_pm(&self, t: T, s: T) -> (T, T) {
        let v = self.eval(t, s);
        (Part::Plus.apply(v), Part::Minus.apply(v))
    }

    /// `(m_S, M_S)` by 2000-point `t` scans with split quadrature in `s`.
    pub fn ms_constants(&self, g: &Weight<T>, a: T, b: T, q: &Integrator<T>) -> Result<(T, T)> {
        let sup = sup_signed_row(self, g, q, T_GRID)?;
        let inf = inf_row_on_interval(self, g, a, b, q, T_GRID)?;
        if inf.value <= T::zero() {
            return Err(Error::NonpositiveInfimum {
                t: to_f64(inf.at),
                value: to_f64(inf.value),
            });
        }
        Ok((T::one() / sup.value, T::one() / inf.value))
    }

    /// `c̃ = (1/c) sup_t ∫_0^1 k_S⁻ g / ∫_a^b k_S⁺ g`.
    pub fn c_tilde(&self, g: &Weight<T>, a: T, b: T, q: &Integrator<T>) -> Result<T> {
        self.c_tilde_with(g, a, b, q, T_GRID)
    }

    pub fn c_tilde_with(&self, g: &Weight<T>, a: T, b: T, q: &Integrator<T>, points: usize) -> Result<T> {
        let c = self.cone_c();
        let ratio = |t: T| -> Result<T> {
            let num = signed_row_integral(self, t, g, T::zero(), T::one(), q)?.minus;
            let den = signed_row_integral(self, t, g, a, b, q)?.plus;
            if den <= T::epsilon() * lit(1e3) {
                return Err(Error::DivisionByZeroRegion { t: to_f64(t) });
            }
            Ok(num / den)
        };
        let ext = grid_extremum(ratio, T::zero(), T::one(), points, Goal::Max)?;
        Ok(ext.value / c)
    }

    /// `max{∫_0^1 k_S⁺ g, ∫_0^1 k_S⁻ g}` and `∫_0^1 |k_S| g` at `t`.
    pub fn row_parts(&self, t: T, g: &Weight<T>, q: &Integrator<T>) -> Result<SignedIntegral<T>> {
        signed_row_integral(self, t, g, T::zero(), T::one(), q)
    }

    /// Largest violation of `|k_S| <= Ψ` and of `min_{[a,b]} k_S >= cΨ` on an `n × n` grid.
    pub fn envelope_defects(&self, a: T, b: T, n: usize) -> Result<(T, T)> {
        let ss = uniform_grid(T::zero(), T::one(), n);
        let ts = uniform_grid(T::zero(), T::one(), n);
        let tab = uniform_grid(a, b, n);
        let c = self.cone_c();
        let defects: Vec<(T, T)> = ss
            .par_iter()
            .map(|&s| {
                let psi = self.psi(s)?;
                let env = ts
                    .iter()
                    .map(|&t| self.eval(t, s).abs() - psi)
                    .fold(T::neg_infinity(), T::max);
                let low = tab.iter().map(|&t| self.eval(t, s)).fold(T::infinity(), T::min);
                Ok((env, c * psi - low))
            })
            .collect::<Result<_>>()?;
        Ok(defects
            .into_iter()
            .fold((T::neg_infinity(), T::neg_infinity()), |acc, d| (acc.0.max(d.0), acc.1.max(d.1))))
    }
}

impl<T: Real> Kernel<T> for AssembledKernel<T> {
    fn eval(&self, t: T, s: T) -> T {
        let base = self.base.eval(t, s);
        if self.bd.is_trivial() {
            return base;
        }
        let (ga, da) = self.functional_terms(s);
        self.bd.gamma.eval(t) * ga + self.bd.delta.eval(t) * da + base
    }

    fn s_breaks(&self, t: T) -> Vec<T> {
        let mut b = self.base.s_breaks(t);
        b.extend(self.extra_breaks.iter().copied());
        b
    }

    fn t_breaks(&self, s: T) -> Vec<T> {
        self.base.t_breaks(s)
    }

    fn fixed_s_breaks(&self) -> Vec<T> {
        let mut b = self.base.fixed_s_breaks();
        b.extend(self.extra_breaks.iter().copied());
        b
    }

    fn sign_changes_listed(&self) -> bool {
        self.bd.is_trivial() && self.base.sign_changes_listed()
    }

    fn envelope(&self, s: T) -> Option<T> {
        self.psi(s).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{ShiftSign, ShiftedKernel};
    use std::f64::consts::{E, PI};

    fn plain(sign: ShiftSign, w: f64, a: f64, b: f64) -> AssembledKernel<f64> {
        let q = Integrator::default();
        let k = ShiftedKernel::new(sign, w).unwrap();
        let c1 = k.c_of_interval(a, b).unwrap();
        AssembledKernel::plain(Arc::new(k), c1, &q).unwrap()
    }

    #[test]
    fn trivial_data_reproduces_base_kernel() {
        let ak = plain(ShiftSign::Minus, 1.0, 0.0, 1.0);
        let k = ShiftedKernel::new(ShiftSign::Minus, 1.0).unwrap();
        for &(t, s) in &[(0.1, 0.2), (0.7, 0.3), (1.0, 0.0)] {
            assert_eq!(ak.eval(t, s), k.value(t, s));
        }
        assert_eq!(ak.upsilon(0.3), 0.0);
    }

    #[test]
    fn example_three_constants() {
        let q = Integrator::default();
        let ak = plain(ShiftSign::Minus, 1.0, 0.0, 1.0);
        let (ms, big) = ak.ms_constants(&Weight::Linear, 0.0, 1.0, &q).unwrap();
        assert!((ms - (E + 1.0) / 2.0).abs() < 1e-9);
        assert!((big - (E + 1.0) / (E - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn negative_part_near_the_far_corner() {
        let ak = plain(ShiftSign::Plus, 7.0 * PI / 12.0, 0.25, 0.75);
        // cos ω(1-s) < 0 once 1 - s > 6/7.
        let (plus, minus) = ak.decompose_pm(0.0, 0.01);
        assert!(minus > 0.0 && plus == 0.0);
        let (_, minus) = ak.decompose_pm(1.0, 0.99);
        assert!(minus > 0.0);
        let (_, minus) = ak.decompose_pm(0.0, 0.99);
        assert_eq!(minus, 0.0);
        let (plus, minus) = ak.decompose_pm(0.0, 0.5);
        assert!(plus > 0.0 && minus == 0.0);
    }

    #[test]
    fn c_tilde_vanishes_for_positive_kernel() {
        let q = Integrator::default();
        let ak = plain(ShiftSign::Minus, 1.3, 0.0, 1.0);
        assert_eq!(ak.c_tilde_with(&Weight::One, 0.0, 1.0, &q, 200).unwrap(), 0.0);
    }

    #[test]
    fn envelope_and_cone_inequalities() {
        let ak = plain(ShiftSign::Plus, 7.0 * PI / 12.0, 0.25, 0.75);
        let (env, cone) = ak.envelope_defects(0.25, 0.75, 200).unwrap();
        assert!(env <= 1e-10, "{env}");
        assert!(cone <= 1e-10, "{cone}");
    }
}
