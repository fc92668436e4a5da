//! Ready-made problems: a sign-changing Neumann problem with a bump
//! nonlinearity, a problem with two nonlocal boundary conditions and the
//! exponential Neumann problem, plus helpers for the boundary determinant of
//! the second one.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::criteria::{Asymptotics, Nonlinearity};
use crate::error::Result;
use crate::greens::{ShiftSign, ShiftedKernel};
use crate::kernel::{Kernel, Weight};
use crate::measures::{BoundaryData, BoundaryFn, BoundaryScalars, Density, StieltjesMeasure};
use crate::problem::ProblemSpec;
use crate::quadrature::Integrator;
use crate::search::{bisect, neville_at_zero};

/// `ω` of the bump problem.
pub const EXAMPLE1_OMEGA: f64 = 7.0 * PI / 12.0;

/// `u'' + ω²u = τ₁u² e^{-τ₂|u|}/(1+t²)`, `u'(0) = u'(1) = 0`, `ω = 7π/12`, cone on `[1/4, 3/4]`.
pub fn example1(tau1: f64, tau2: f64) -> ProblemSpec<f64> {
    let (a, b) = (0.25, 0.75);
    let bump = move |u: f64| tau1 * u * u * (-tau2 * u.abs()).exp();
    let peak = 2.0 / tau2;
    let f = Nonlinearity::new(
        format!("{tau1}*u^2*exp(-{tau2}*|u|)/(1+t^2)"),
        Arc::new(move |t: f64, u: f64| bump(u) / (1.0 + t * t)),
    )
    .with_envelope_sup(Arc::new(move |rho: f64| bump(rho.min(peak)) / rho))
    .with_envelope_inf(Arc::new(move |rho: f64, c: f64, _a: f64, b: f64| {
        bump(rho).min(bump(rho / c)) / (1.0 + b * b) / rho
    }))
    .with_asymptotics(Asymptotics {
        upper_zero: Some(0.0),
        lower_zero: Some(0.0),
        upper_inf: Some(0.0),
        lower_inf: Some(0.0),
        tilde_zero: Some(0.0),
    });
    ProblemSpec::new(ShiftSign::Plus, EXAMPLE1_OMEGA, Weight::One, f, a, b)
}

/// `γ(t) = k(t,0)`, `δ(t) = k(t,1)`, `α[u] = u(0) + u(1)`, `β[u] = ∫ u(t) sin πt dt`.
pub fn example2_boundary(omega: f64) -> Result<BoundaryData<f64>> {
    let k: Arc<dyn Kernel<f64>> = Arc::new(ShiftedKernel::new(ShiftSign::Plus, omega)?);
    Ok(BoundaryData {
        gamma: BoundaryFn::kernel_left(k.clone()),
        delta: BoundaryFn::kernel_right(k),
        alpha: StieltjesMeasure::new(vec![(0.0, 1.0), (1.0, 1.0)], None)?,
        beta: StieltjesMeasure::new(
            vec![],
            Some(Density {
                f: Arc::new(|t: f64| (PI * t).sin()),
                breaks: vec![],
                label: "sin(pi t)".into(),
            }),
        )?,
    })
}

/// `u'' + ω²u = e^{-|u|}` with `u'(0) = u(0) + u(1)`, `u'(1) = ∫ u sin πt dt`.
pub fn example2(omega: f64, a: f64, b: f64) -> Result<ProblemSpec<f64>> {
    let f = Nonlinearity::autonomous("exp(-|u|)", |u: f64| (-u.abs()).exp())
        .with_envelope_sup(Arc::new(|rho: f64| 1.0 / rho))
        .with_envelope_inf(Arc::new(|rho: f64, c: f64, _a: f64, _b: f64| (-rho / c).exp() / rho))
        .with_asymptotics(Asymptotics {
            upper_zero: Some(f64::INFINITY),
            lower_zero: Some(f64::INFINITY),
            upper_inf: Some(0.0),
            lower_inf: Some(0.0),
            tilde_zero: Some(f64::INFINITY),
        });
    Ok(ProblemSpec::new(ShiftSign::Plus, omega, Weight::One, f, a, b).with_boundary(example2_boundary(omega)?))
}

/// `α[γ], α[δ], β[γ], β[δ]` and `D` of the nonlocal problem at `ω`.
pub fn example2_scalars(omega: f64) -> Result<BoundaryScalars<f64>> {
    example2_boundary(omega)?.scalars(&Integrator::default())
}

/// Boundary determinant `D(ω)`.
pub fn example2_d(omega: f64) -> Result<f64> {
    Ok(example2_scalars(omega)?.d)
}

/// `D(π)` by polynomial extrapolation of `D(π - h)` to `h = 0`; the kernel has a pole at `ω = π`.
pub fn example2_d_at_pi() -> Result<f64> {
    let hs = [0.01, 0.005, 0.0025, 0.00125, 0.000625];
    let ds = hs.iter().map(|&h| example2_d(PI - h)).collect::<Result<Vec<_>>>()?;
    Ok(neville_at_zero(&hs, &ds))
}

/// The zero of `D` on `(0, π)`.
pub fn example2_d_root() -> Result<f64> {
    bisect(|w| example2_d(w).unwrap_or(f64::NAN), 0.5, PI - 0.01, 1e-12, 200)
}

/// `-u'' + u = λ t e^u`, `u'(0) = u'(1) = 0`, as `g(s) = s`, `f(u) = λe^u` on `[0, 1]`.
pub fn example3(lambda: f64) -> ProblemSpec<f64> {
    let f = Nonlinearity::autonomous(format!("{lambda}*exp(u)"), move |u: f64| lambda * u.exp())
        .with_envelope_sup(Arc::new(move |rho: f64| lambda * rho.exp() / rho))
        .with_envelope_inf(Arc::new(move |rho: f64, _c: f64, _a: f64, _b: f64| lambda * rho.exp() / rho))
        .with_asymptotics(Asymptotics {
            upper_zero: Some(f64::INFINITY),
            lower_zero: Some(f64::INFINITY),
            upper_inf: Some(f64::INFINITY),
            lower_inf: Some(f64::INFINITY),
            tilde_zero: Some(f64::INFINITY),
        });
    ProblemSpec::new(ShiftSign::Minus, 1.0, Weight::Linear, f, 0.0, 1.0)
}

/// `(e+1)e⁻²`: below it `(I¹_2)` holds for the exponential problem.
pub fn example3_index_one_bound() -> f64 {
    let e = std::f64::consts::E;
    (e + 1.0) / (e * e)
}

/// `(e+1)/(e(e-1))`: above it the exponential problem has no solution in the cone.
pub fn example3_nonexistence_bound() -> f64 {
    let e = std::f64::consts::E;
    (e + 1.0) / (e * (e - 1.0))
}
