//! Stieltjes boundary functionals `α[u] = ∫ u dA`, `β[u] = ∫ u dB` given by
//! finitely many atoms plus a density, the kernel functionals `K_A`, `K_B`,
//! and the 2×2 linear algebra tying the boundary terms together.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Condition, Error, Result};
use crate::interp::PiecewiseChebyshev;
use crate::kernel::{Kernel, T_GRID};
use crate::quadrature::Integrator;
use crate::scalar::{lit, to_f64, uniform_grid, Func, Real};
use crate::search::{grid_extremum, Goal};

/// Slack for sign conditions checked on sampled values.
pub const SIGN_SLACK: f64 = 1e-10;

/// Absolutely continuous part `dA(t) = ρ(t) dt`.
#[derive(Clone)]
pub struct Density<T> {
    pub f: Func<T>,
    /// Points where `ρ` is not smooth.
    pub breaks: Vec<T>,
    pub label: String,
}

impl<T> fmt::Debug for Density<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Density({})", self.label)
    }
}

/// Finite atoms plus an optional density on `[0,1]`. May be signed.
#[derive(Clone, Debug)]
pub struct StieltjesMeasure<T> {
    atoms: Vec<(T, T)>,
    density: Option<Density<T>>,
}

impl<T: Real> Default for StieltjesMeasure<T> {
    fn default() -> Self {
        Self::trivial()
    }
}

impl<T: Real> StieltjesMeasure<T> {
    pub fn trivial() -> Self {
        Self {
            atoms: Vec::new(),
            density: None,
        }
    }

    /// Atoms as `(location, weight)` pairs.
    pub fn new(atoms: Vec<(T, T)>, density: Option<Density<T>>) -> Result<Self> {
        for &(x, w) in &atoms {
            if !(x >= T::zero() && x <= T::one()) || !w.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "atom ({x}, {w}) must sit in [0,1] with finite weight"
                )));
            }
        }
        Ok(Self { atoms, density })
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density<T>> {
        self.density.as_ref()
    }

    pub fn is_trivial(&self) -> bool {
        self.density.is_none() && self.atoms.iter().all(|&(_, w)| w == T::zero())
    }

    /// Atom weights nonnegative and density nonnegative on a sample grid.
    pub fn is_positive(&self) -> bool {
        if self.atoms.iter().any(|&(_, w)| w < T::zero()) {
            return false;
        }
        match &self.density {
            None => true,
            Some(d) => uniform_grid(T::zero(), T::one(), T_GRID + 1)
                .into_iter()
                .all(|s| (d.f)(s) >= -lit::<T>(SIGN_SLACK)),
        }
    }

    /// Atom locations and density breaks.
    pub fn breaks(&self) -> Vec<T> {
        let mut b: Vec<T> = self.atoms.iter().map(|&(x, _)| x).collect();
        if let Some(d) = &self.density {
            b.extend(d.breaks.iter().copied());
        }
        b
    }

    /// `Σ wᵢ u(xᵢ) + ∫_0^1 ρ(s) u(s) ds`.
    pub fn apply<F: Fn(T) -> T + ?Sized>(&self, u: &F, q: &Integrator<T>) -> Result<T> {
        self.apply_split(u, &[], q)
    }

    /// As [`StieltjesMeasure::apply`], also splitting the density integral at `u_breaks`.
    pub fn apply_split<F: Fn(T) -> T + ?Sized>(&self, u: &F, u_breaks: &[T], q: &Integrator<T>) -> Result<T> {
        let mut total: T = self.atoms.iter().map(|&(x, w)| w * u(x)).sum();
        if let Some(d) = &self.density {
            let mut breaks = d.breaks.clone();
            breaks.extend_from_slice(u_breaks);
            total = total + q.integrate_split(&|s| (d.f)(s) * u(s), T::zero(), T::one(), &breaks)?;
        }
        Ok(total)
    }
}

/// `K(s) = ∫_0^1 k(t,s) dA(t)`: atoms evaluated exactly, density part tabulated.
#[derive(Clone)]
pub struct KernelFunctional<T: Real> {
    atoms: Vec<(T, T)>,
    kernel: Arc<dyn Kernel<T>>,
    table: Option<PiecewiseChebyshev<T>>,
    density_breaks: Vec<T>,
}

impl<T: Real> fmt::Debug for KernelFunctional<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelFunctional")
            .field("atoms", &self.atoms)
            .field("tabulated", &self.table.is_some())
            .finish()
    }
}

/// Panels and degree of the density tables.
const TABLE_PANELS: usize = 16;
const TABLE_DEGREE: usize = 24;

impl<T: Real> KernelFunctional<T> {
    pub fn new(mu: &StieltjesMeasure<T>, kernel: Arc<dyn Kernel<T>>, q: &Integrator<T>) -> Result<Self> {
        let table = match mu.density() {
            None => None,
            Some(d) => {
                let k = kernel.clone();
                let inner = |s: T| {
                    let mut breaks = k.t_breaks(s);
                    breaks.extend(d.breaks.iter().copied());
                    q.integrate_split(&|t| k.eval(t, s) * (d.f)(t), T::zero(), T::one(), &breaks)
                };
                Some(PiecewiseChebyshev::build(
                    inner,
                    T::zero(),
                    T::one(),
                    &d.breaks,
                    TABLE_PANELS,
                    TABLE_DEGREE,
                )?)
            }
        };
        Ok(Self {
            atoms: mu.atoms().iter().copied().filter(|&(_, w)| w != T::zero()).collect(),
            kernel,
            table,
            density_breaks: mu.density().map(|d| d.breaks.clone()).unwrap_or_default(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.table.is_none()
    }

    pub fn eval(&self, s: T) -> T {
        let mut v: T = self.atoms.iter().map(|&(x, w)| w * self.kernel.eval(x, s)).sum();
        if let Some(t) = &self.table {
            v = v + t.eval(s);
        }
        v
    }

    /// Points where `K` may lose smoothness.
    pub fn breaks(&self) -> Vec<T> {
        let mut b: Vec<T> = self.atoms.iter().flat_map(|&(x, _)| self.kernel.t_breaks(x)).collect();
        b.extend(self.density_breaks.iter().copied());
        b
    }

    /// Minimum over a 2000-point grid; `(C₅)` asks for it to be nonnegative.
    pub fn grid_min(&self) -> (T, T) {
        uniform_grid(T::zero(), T::one(), T_GRID)
            .into_iter()
            .map(|s| (s, self.eval(s)))
            .fold((T::zero(), T::infinity()), |acc, x| if x.1 < acc.1 { x } else { acc })
    }
}

/// Boundary function `γ` or `δ`; `None` means identically zero.
#[derive(Clone)]
pub struct BoundaryFn<T> {
    f: Option<Func<T>>,
    label: String,
}

impl<T> fmt::Debug for BoundaryFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundaryFn({})", self.label)
    }
}

impl<T: Real> BoundaryFn<T> {
    pub fn zero() -> Self {
        Self {
            f: None,
            label: "zero".into(),
        }
    }

    pub fn new(label: impl Into<String>, f: Func<T>) -> Self {
        Self {
            f: Some(f),
            label: label.into(),
        }
    }

    /// `t -> k(t, 0)`.
    pub fn kernel_left(k: Arc<dyn Kernel<T>>) -> Self {
        Self::new("kernel_left", Arc::new(move |t| k.eval(t, T::zero())))
    }

    /// `t -> k(t, 1)`.
    pub fn kernel_right(k: Arc<dyn Kernel<T>>) -> Self {
        Self::new("kernel_right", Arc::new(move |t| k.eval(t, T::one())))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_none()
    }

    #[inline]
    pub fn eval(&self, t: T) -> T {
        match &self.f {
            Some(f) => f(t),
            None => T::zero(),
        }
    }

    /// `‖γ‖ = max_{[0,1]} |γ|`.
    pub fn sup_norm(&self) -> Result<T> {
        if self.is_zero() {
            return Ok(T::zero());
        }
        Ok(grid_extremum(|t| Ok(self.eval(t).abs()), T::zero(), T::one(), T_GRID, Goal::Max)?.value)
    }

    /// `min_{[a,b]} γ`.
    pub fn min_on(&self, a: T, b: T) -> Result<T> {
        if self.is_zero() {
            return Ok(T::zero());
        }
        Ok(grid_extremum(|t| Ok(self.eval(t)), a, b, T_GRID, Goal::Min)?.value)
    }
}

/// `γ, δ, α, β` of the perturbed equation `u = γα[u] + δβ[u] + Fu`.
#[derive(Clone, Debug)]
pub struct BoundaryData<T> {
    pub gamma: BoundaryFn<T>,
    pub delta: BoundaryFn<T>,
    pub alpha: StieltjesMeasure<T>,
    pub beta: StieltjesMeasure<T>,
}

impl<T: Real> BoundaryData<T> {
    pub fn trivial() -> Self {
        Self {
            gamma: BoundaryFn::zero(),
            delta: BoundaryFn::zero(),
            alpha: StieltjesMeasure::trivial(),
            beta: StieltjesMeasure::trivial(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        !self.gamma_active() && !self.delta_active()
    }

    /// The `γ` term contributes only when both `γ` and `α` are nontrivial.
    pub fn gamma_active(&self) -> bool {
        !self.gamma.is_zero() && !self.alpha.is_trivial()
    }

    pub fn delta_active(&self) -> bool {
        !self.delta.is_zero() && !self.beta.is_trivial()
    }

    pub fn scalars(&self, q: &Integrator<T>) -> Result<BoundaryScalars<T>> {
        let ap = |m: &StieltjesMeasure<T>, f: &BoundaryFn<T>| -> Result<T> {
            if f.is_zero() || m.is_trivial() {
                Ok(T::zero())
            } else {
                m.apply(&|t| f.eval(t), q)
            }
        };
        let alpha_gamma = ap(&self.alpha, &self.gamma)?;
        let alpha_delta = ap(&self.alpha, &self.delta)?;
        let beta_gamma = ap(&self.beta, &self.gamma)?;
        let beta_delta = ap(&self.beta, &self.delta)?;
        let d = (T::one() - alpha_gamma) * (T::one() - beta_delta) - alpha_delta * beta_gamma;
        Ok(BoundaryScalars {
            alpha_gamma,
            alpha_delta,
            beta_gamma,
            beta_delta,
            d,
        })
    }

    /// `c₂ = min_{[a,b]} γ / ‖γ‖` when the `γ` term is active.
    pub fn c2(&self, a: T, b: T) -> Result<Option<T>> {
        cone_ratio(&self.gamma, self.gamma_active(), a, b)
    }

    /// `c₃ = min_{[a,b]} δ / ‖δ‖` when the `δ` term is active.
    pub fn c3(&self, a: T, b: T) -> Result<Option<T>> {
        cone_ratio(&self.delta, self.delta_active(), a, b)
    }

    /// Checks `(C₆)`–`(C₈)`, returning the scalars and `(c₂, c₃)`.
    pub fn validate(&self, a: T, b: T, q: &Integrator<T>) -> Result<(BoundaryScalars<T>, Option<T>, Option<T>)> {
        let sc = self.scalars(q)?;
        let slack: T = lit(SIGN_SLACK);
        let c2 = self.c2(a, b)?;
        let c3 = self.c3(a, b)?;
        if self.gamma_active() {
            if !(sc.alpha_gamma >= -slack && sc.alpha_gamma < T::one()) {
                return Err(violation(Condition::C6, format!("α[γ] = {} outside [0,1)", sc.alpha_gamma)));
            }
            if sc.beta_gamma < -slack {
                return Err(violation(Condition::C6, format!("β[γ] = {} < 0", sc.beta_gamma)));
            }
            match c2 {
                Some(c) if c > T::zero() => {}
                _ => return Err(violation(Condition::C6, format!("γ is not positive on [{a}, {b}]"))),
            }
        }
        if self.delta_active() {
            if !(sc.beta_delta >= -slack && sc.beta_delta < T::one()) {
                return Err(violation(Condition::C7, format!("β[δ] = {} outside [0,1)", sc.beta_delta)));
            }
            if sc.alpha_delta < -slack {
                return Err(violation(Condition::C7, format!("α[δ] = {} < 0", sc.alpha_delta)));
            }
            match c3 {
                Some(c) if c > T::zero() => {}
                _ => return Err(violation(Condition::C7, format!("δ is not positive on [{a}, {b}]"))),
            }
        }
        if sc.d <= T::zero() {
            return Err(violation(Condition::C8, format!("D = {} <= 0", sc.d)));
        }
        Ok((sc, c2, c3))
    }
}

fn violation(condition: Condition, detail: String) -> Error {
    Error::ConditionViolation { condition, detail }
}

fn cone_ratio<T: Real>(f: &BoundaryFn<T>, active: bool, a: T, b: T) -> Result<Option<T>> {
    if !active {
        return Ok(None);
    }
    let norm = f.sup_norm()?;
    if norm == T::zero() {
        return Ok(None);
    }
    Ok(Some(f.min_on(a, b)? / norm))
}

/// `α[γ], α[δ], β[γ], β[δ]` and `D = (1-α[γ])(1-β[δ]) - α[δ]β[γ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryScalars<T> {
    pub alpha_gamma: T,
    pub alpha_delta: T,
    pub beta_gamma: T,
    pub beta_delta: T,
    pub d: T,
}

impl<T: Real> BoundaryScalars<T> {
    pub fn trivial() -> Self {
        Self {
            alpha_gamma: T::zero(),
            alpha_delta: T::zero(),
            beta_gamma: T::zero(),
            beta_delta: T::zero(),
            d: T::one(),
        }
    }

    /// Recovers `(α[u], β[u])` from `(α[Fu], β[Fu])` for a fixed point `u = Tu`.
    pub fn solve_functionals(&self, p: T, q: T) -> Result<(T, T)> {
        resolvent_2x2(
            T::one() - self.alpha_gamma,
            -self.alpha_delta,
            -self.beta_gamma,
            T::one() - self.beta_delta,
            p,
            q,
        )
    }

    /// Coefficients `(x_A, x_B)` of `K_A`, `K_B` multiplying `γ(t)` in `k_S`.
    pub fn gamma_coefficients(&self) -> (T, T) {
        ((T::one() - self.beta_delta) / self.d, self.alpha_delta / self.d)
    }

    /// Coefficients `(y_A, y_B)` of `K_A`, `K_B` multiplying `δ(t)` in `k_S`.
    pub fn delta_coefficients(&self) -> (T, T) {
        (self.beta_gamma / self.d, (T::one() - self.alpha_gamma) / self.d)
    }

    pub fn to_f64(&self) -> BoundaryScalars<f64> {
        BoundaryScalars {
            alpha_gamma: to_f64(self.alpha_gamma),
            alpha_delta: to_f64(self.alpha_delta),
            beta_gamma: to_f64(self.beta_gamma),
            beta_delta: to_f64(self.beta_delta),
            d: to_f64(self.d),
        }
    }
}

/// Solves `[[a11, a12], [a21, a22]] (x, y) = (p, q)`.
pub fn resolvent_2x2<T: Real>(a11: T, a12: T, a21: T, a22: T, p: T, q: T) -> Result<(T, T)> {
    let det = a11 * a22 - a12 * a21;
    let scale = a11.abs().max(a12.abs()).max(a21.abs()).max(a22.abs()).max(T::min_positive_value());
    if !det.is_finite() || det.abs() <= T::epsilon() * lit(16.0) * scale * scale {
        return Err(Error::SingularMatrix { det: to_f64(det) });
    }
    Ok(((a22 * p - a12 * q) / det, (a11 * q - a21 * p) / det))
}

/// Solves `N_μ (x, y) = (p, q)` with `N_μ = [[μ - a, -b], [-c, μ - d]]`.
pub fn n_mu_solve<T: Real>(mu: T, a: T, b: T, c: T, d: T, p: T, q: T) -> Result<(T, T)> {
    resolvent_2x2(mu - a, -b, -c, mu - d, p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{ShiftSign, ShiftedKernel};
    use std::f64::consts::PI;

    fn sine_density() -> Density<f64> {
        Density {
            f: Arc::new(|t: f64| (PI * t).sin()),
            breaks: vec![],
            label: "sin(pi t)".into(),
        }
    }

    #[test]
    fn apply_examples() {
        let q = Integrator::default();
        let m = StieltjesMeasure::new(vec![(0.0, 1.0), (1.0, 1.0)], None).unwrap();
        assert_eq!(m.apply(&|t: f64| t, &q).unwrap(), 1.0);
        let m = StieltjesMeasure::new(vec![], Some(sine_density())).unwrap();
        assert!((m.apply(&|_t: f64| 1.0, &q).unwrap() - 2.0 / PI).abs() < 1e-14);
        let m = StieltjesMeasure::<f64>::trivial();
        assert_eq!(m.apply(&|t: f64| t.exp(), &q).unwrap(), 0.0);
        assert!(m.is_trivial());
    }

    #[test]
    fn atoms_outside_unit_interval_rejected() {
        assert!(StieltjesMeasure::new(vec![(1.5, 1.0)], None).is_err());
    }

    #[test]
    fn kernel_functionals_match_closed_forms() {
        let q = Integrator::default();
        let w = 2.0;
        let k: Arc<dyn Kernel<f64>> = Arc::new(ShiftedKernel::new(ShiftSign::Plus, w).unwrap());
        let alpha = StieltjesMeasure::new(vec![(0.0, 1.0), (1.0, 1.0)], None).unwrap();
        let ka = KernelFunctional::new(&alpha, k.clone(), &q).unwrap();
        let closed_a = |s: f64| ((w * s).cos() + (w * (1.0 - s)).cos()) / (w * w.sin());
        assert!((ka.eval(0.0) - closed_a(0.0)).abs() < 1e-10);
        let beta = StieltjesMeasure::new(vec![], Some(sine_density())).unwrap();
        let kb = KernelFunctional::new(&beta, k, &q).unwrap();
        let cot = 1.0 / (w / 2.0).tan();
        let closed_b = |s: f64| {
            (PI * (w * s).cos() * cot - w * (PI * s).sin() + PI * (w * s).sin()) / (PI * PI * w - w * w * w)
        };
        for &s in &[0.0, 0.13, 0.5, 0.77, 1.0] {
            assert!((kb.eval(s) - closed_b(s)).abs() < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn trivial_functional_is_zero() {
        let q = Integrator::default();
        let k: Arc<dyn Kernel<f64>> = Arc::new(ShiftedKernel::new(ShiftSign::Minus, 1.0).unwrap());
        let kf = KernelFunctional::new(&StieltjesMeasure::trivial(), k, &q).unwrap();
        assert!(kf.is_zero());
        assert_eq!(kf.eval(0.4), 0.0);
    }

    #[test]
    fn trivial_boundary_data() {
        let q = Integrator::<f64>::default();
        let bd = BoundaryData::trivial();
        let (sc, c2, c3) = bd.validate(0.0, 1.0, &q).unwrap();
        assert_eq!(sc.d, 1.0);
        assert!(c2.is_none() && c3.is_none());
    }

    #[test]
    fn resolvent_identity_and_singular() {
        assert_eq!(resolvent_2x2(1.0, 0.0, 0.0, 1.0, 3.0, 5.0).unwrap(), (3.0, 5.0));
        assert!(matches!(
            resolvent_2x2(1.0, 2.0, 2.0, 4.0, 1.0, 1.0),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn determinant_violation_reported() {
        let q = Integrator::<f64>::default();
        let bd = BoundaryData {
            gamma: BoundaryFn::new("one", Arc::new(|_| 1.0)),
            delta: BoundaryFn::zero(),
            alpha: StieltjesMeasure::new(vec![(0.5, 1.0)], None).unwrap(),
            beta: StieltjesMeasure::trivial(),
        };
        match bd.validate(0.0, 1.0, &q) {
            Err(Error::ConditionViolation { condition, .. }) => assert_eq!(condition, Condition::C6),
            other => panic!("unexpected {other:?}"),
        }
    }
}
