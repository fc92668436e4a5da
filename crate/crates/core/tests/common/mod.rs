//! Generators, independent oracles and property checks shared by the
//! property suite and the acceptance runner.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use hammerstein_core::greens::{classify_sign, SignClass};
use hammerstein_core::kernel::Kernel;
use hammerstein_core::measures::{n_mu_solve, resolvent_2x2};
use hammerstein_core::quadrature::Integrator;
use hammerstein_core::scenarios::{example1, example2, example3};
use hammerstein_core::solver::{Discretization, Target};
use hammerstein_core::{AssembledKernel, Analysis, ShiftSign, ShiftedKernel, Weight};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// `(ε, ω, a, b, g)` with `[a,b]` inside the positivity strip.
#[derive(Debug, Clone, Copy)]
pub struct Tuple {
    pub sign: ShiftSign,
    pub omega: f64,
    pub a: f64,
    pub b: f64,
    pub linear_g: bool,
}

impl Tuple {
    pub fn kernel(&self) -> ShiftedKernel<f64> {
        ShiftedKernel::new(self.sign, self.omega).unwrap()
    }

    pub fn g(&self) -> Weight<f64> {
        if self.linear_g {
            Weight::Linear
        } else {
            Weight::One
        }
    }
}

/// Admissible tuple from four uniform draws in `[0,1)`.
pub fn tuple_from(plus: bool, u_omega: f64, u_a: f64, u_b: f64, linear_g: bool) -> Tuple {
    let sign = if plus { ShiftSign::Plus } else { ShiftSign::Minus };
    let omega = if plus {
        0.1 + u_omega * (PI - 0.15)
    } else {
        0.1 + u_omega * 4.9
    };
    let (lo, hi) = match sign {
        ShiftSign::Minus => (0.0, 1.0),
        ShiftSign::Plus => match classify_sign(omega).unwrap() {
            SignClass::PositiveOnStrip { lo, hi } => {
                let pad = 1e-3 * (hi - lo);
                (lo + pad, hi - pad)
            }
            _ => (0.0, 1.0),
        },
    };
    let x = lo + (hi - lo) * u_a.min(u_b);
    let y = lo + (hi - lo) * u_a.max(u_b);
    let (a, b) = if y - x < 1e-3 * (hi - lo) {
        let mid = 0.5 * (x + y);
        let half = 0.05 * (hi - lo);
        ((mid - half).max(lo), (mid + half).min(hi))
    } else {
        (x, y)
    };
    Tuple {
        sign,
        omega,
        a,
        b,
        linear_g,
    }
}

pub fn tuple_strategy() -> impl Strategy<Value = Tuple> {
    (any::<bool>(), 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, any::<bool>())
        .prop_map(|(p, w, a, b, g)| tuple_from(p, w, a, b, g))
}

/// Composite Simpson rule with `n` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let h = (hi - lo) / n as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..n {
        let x = lo + h * i as f64;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    sum * h / 3.0
}

/// `∫_lo^hi part(k(t,s)) g(s) ds` by Simpson on the smooth, one-signed pieces.
fn oracle_row(k: &ShiftedKernel<f64>, g: &Weight<f64>, t: f64, lo: f64, hi: f64, part: fn(f64) -> f64) -> f64 {
    let mut cuts = vec![lo, hi];
    for x in std::iter::once(t).chain(k.sign_lines()) {
        if x > lo && x < hi {
            cuts.push(x);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| simpson(|s| part(k.value(t, s)) * g.eval(s), w[0], w[1], 400))
        .sum()
}

/// Golden-section refinement of a grid extremum; `sign = 1` maximizes.
fn refine<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, sign: f64) -> f64 {
    let n = 400;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| sign * f(t)).collect();
    let best = (0..vals.len()).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    let (mut x0, mut x1) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n)]);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = x1 - r * (x1 - x0);
    let mut d = x0 + r * (x1 - x0);
    let (mut fc, mut fd) = (sign * f(c), sign * f(d));
    while x1 - x0 > 1e-12 {
        if fc > fd {
            x1 = d;
            d = c;
            fd = fc;
            c = x1 - r * (x1 - x0);
            fc = sign * f(c);
        } else {
            x0 = c;
            c = d;
            fc = fd;
            d = x0 + r * (x1 - x0);
            fd = sign * f(d);
        }
    }
    sign * vals[best].max(fc).max(fd)
}

/// Brute-force `m`.
pub fn oracle_m(tp: &Tuple) -> f64 {
    let k = tp.kernel();
    let g = tp.g();
    let plus = refine(|t| oracle_row(&k, &g, t, 0.0, 1.0, |v| v.max(0.0)), 0.0, 1.0, 1.0);
    let minus = refine(|t| oracle_row(&k, &g, t, 0.0, 1.0, |v| (-v).max(0.0)), 0.0, 1.0, 1.0);
    1.0 / plus.max(minus)
}

/// Brute-force `M(a,b)`.
pub fn oracle_big_m(tp: &Tuple) -> f64 {
    let k = tp.kernel();
    let g = tp.g();
    1.0 / refine(|t| oracle_row(&k, &g, t, tp.a, tp.b, |v| v), tp.a, tp.b, -1.0)
}

pub fn rel_err(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

// ---- greens ----

pub fn kernel_symmetry(tp: Tuple, t: f64, s: f64) -> Result<(), TestCaseError> {
    let k = tp.kernel();
    let (x, y) = (k.value(t, s), k.value(s, t));
    check((x - y).abs() <= 1e-13 * x.abs().max(1.0), || format!("k({t},{s}) = {x} but k({s},{t}) = {y}"))
}

pub fn kernel_envelope(tp: Tuple, t: f64, s: f64) -> Result<(), TestCaseError> {
    let k = tp.kernel();
    let phi = k.phi(s).unwrap();
    let v = k.value(t, s).abs();
    check(v <= phi * (1.0 + 1e-12) + 1e-15, || format!("|k({t},{s})| = {v} > Φ = {phi}"))
}

pub fn kernel_cone(tp: Tuple, ut: f64, s: f64) -> Result<(), TestCaseError> {
    let k = tp.kernel();
    let t = tp.a + ut * (tp.b - tp.a);
    let c = k.c_of_interval(tp.a, tp.b).unwrap();
    let lhs = k.value(t, s);
    let rhs = c * k.phi(s).unwrap();
    check(lhs >= rhs - 1e-12 * rhs.abs().max(1.0), || {
        format!("k({t},{s}) = {lhs} < c Φ(s) = {rhs} for {tp:?}")
    })
}

// ---- kernel_s ----

/// `k_S` for the nonlocal problem with `ω ∈ (π/2, π)`, or for trivial data.
pub fn assembled(nonlocal: bool, u: f64) -> AssembledKernel<f64> {
    let q = Integrator::default();
    if nonlocal {
        let omega = PI / 2.0 + 0.05 + u * (PI / 2.0 - 0.1);
        let strip_hi = PI / (2.0 * omega);
        let a = 1.0 - strip_hi + 0.3 * (2.0 * strip_hi - 1.0);
        let spec = example2(omega, a, 1.0 - a).unwrap();
        let k = spec.kernel().unwrap();
        let c1 = k.c_of_interval(spec.a, spec.b).unwrap();
        AssembledKernel::assemble(Arc::new(k), spec.boundary, c1, spec.a, spec.b, &q).unwrap()
    } else {
        let tp = tuple_from(u > 0.5, u, 0.2, 0.8, false);
        let k = tp.kernel();
        let c1 = k.c_of_interval(tp.a, tp.b).unwrap();
        AssembledKernel::plain(Arc::new(k), c1, &q).unwrap()
    }
}

pub fn pm_partition(ak: &AssembledKernel<f64>, t: f64, s: f64) -> Result<(), TestCaseError> {
    let v = ak.eval(t, s);
    let (p, m) = ak.decompose_pm(t, s);
    check(p >= 0.0 && m >= 0.0, || format!("negative part at ({t},{s})"))?;
    check(p * m == 0.0, || format!("both parts nonzero at ({t},{s})"))?;
    check(p - m == v && p + m == v.abs(), || format!("partition broken at ({t},{s})"))
}

pub fn part_integrals(ak: &AssembledKernel<f64>, g: &Weight<f64>, t: f64) -> Result<(), TestCaseError> {
    let q = Integrator::default();
    let r = ak.row_parts(t, g, &q).unwrap();
    let direct = q
        .integrate_split(&|s| ak.eval(t, s).abs() * g.eval(s), 0.0, 1.0, &ak.s_breaks(t))
        .unwrap();
    check(r.larger() <= r.abs() + 1e-14, || format!("max parts {} > |.| {}", r.larger(), r.abs()))?;
    check((r.abs() - direct).abs() <= 1e-9 * direct.max(1e-12), || {
        format!("∫|k_S| split {} vs direct {}", r.abs(), direct)
    })
}

// ---- measures ----

pub fn resolvent_order(m: [f64; 4], p: [f64; 2], dp: [f64; 2]) -> Result<(), TestCaseError> {
    let [a, b, c, d] = m;
    let (x1, y1) = resolvent_2x2(1.0 - a, -b, -c, 1.0 - d, p[0], p[1]).unwrap();
    let (x2, y2) = resolvent_2x2(1.0 - a, -b, -c, 1.0 - d, p[0] + dp[0], p[1] + dp[1]).unwrap();
    let tol = 1e-12 * (1.0 + x2.abs() + y2.abs());
    check(x1 >= -tol && y1 >= -tol, || format!("negative solution ({x1}, {y1})"))?;
    check(x1 <= x2 + tol && y1 <= y2 + tol, || format!("order not preserved: ({x1},{y1}) vs ({x2},{y2})"))
}

pub fn n_mu_comparison(m: [f64; 4], p: [f64; 2], extra: [f64; 2]) -> Result<(), TestCaseError> {
    let [a, b, c, d] = m;
    // Spectral radius of the nonnegative 2×2 matrix.
    let r = 0.5 * (a + d + ((a - d).powi(2) + 4.0 * b * c).sqrt());
    let mu1 = r + 0.05 + extra[0];
    let mu2 = mu1 + extra[1];
    let (x1, y1) = n_mu_solve(mu1, a, b, c, d, p[0], p[1]).unwrap();
    let (x2, y2) = n_mu_solve(mu2, a, b, c, d, p[0], p[1]).unwrap();
    let tol = 1e-10 * (1.0 + x1.abs() + y1.abs());
    check(x2 >= -tol && y2 >= -tol, || format!("N_μ⁻¹ p negative: ({x2},{y2})"))?;
    check(x2 <= x1 + tol && y2 <= y1 + tol, || {
        format!("N_μ2⁻¹ p = ({x2},{y2}) exceeds N_μ1⁻¹ p = ({x1},{y1})")
    })
}

// ---- solver ----

/// Fixed problems for the solver properties, built once per process.
pub fn solver_problems() -> &'static [Analysis<f64>] {
    static CELL: OnceLock<Vec<Analysis<f64>>> = OnceLock::new();
    CELL.get_or_init(|| {
        vec![
            example3(0.25).analyze().unwrap(),
            example2(2.4, 0.4, 0.6).unwrap().analyze().unwrap(),
            example1(40.0, 1.0).analyze().unwrap(),
        ]
    })
}

/// `u = κ(1 + Σ a_j cos jπt)` with `Σ|a_j| ≤ (1-c)/(1+c)`, which lies in the cone.
pub fn cone_vector(d: &Discretization<f64>, kappa: f64, coeffs: &[f64]) -> Vec<f64> {
    let c = d.analysis().cone_c();
    let budget = 0.99 * (1.0 - c) / (1.0 + c);
    let total: f64 = coeffs.iter().map(|x| x.abs()).sum::<f64>().max(1e-300);
    let scale = (budget / total).min(1.0);
    d.nodes()
        .iter()
        .map(|&t| {
            let wave: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(j, &a)| a * scale * ((j + 1) as f64 * PI * t).cos())
                .sum();
            kappa * (1.0 + wave)
        })
        .collect()
}

fn solver_grids() -> &'static [Discretization<'static, f64>] {
    static CELL: OnceLock<Vec<Discretization<'static, f64>>> = OnceLock::new();
    CELL.get_or_init(|| {
        solver_problems()
            .iter()
            .map(|an| Discretization::new(an, 200).unwrap())
            .collect()
    })
}

pub fn t_maps_cone(which: usize, kappa: f64, coeffs: &[f64]) -> Result<(), TestCaseError> {
    let d = &solver_grids()[which];
    let u = cone_vector(d, kappa, coeffs);
    check(d.verify_membership(&u).in_cone, || "generated vector outside the cone".into())?;
    let tu = d.apply_t(&u);
    let cc = d.verify_membership(&tu);
    check(cc.in_cone, || format!("Tu left the cone: {cc:?}"))
}

/// Residual of `S` at the converged `T` fixed point.
pub fn s_t_agreement(u_omega: f64, u_a: f64) -> Result<(), TestCaseError> {
    let omega = PI / 2.0 + 0.1 + u_omega * (PI / 2.0 - 0.25);
    let strip_hi = PI / (2.0 * omega);
    let a = 1.0 - strip_hi + (0.1 + 0.35 * u_a) * (2.0 * strip_hi - 1.0);
    let an = example2(omega, a, 1.0 - a).unwrap().analyze().unwrap();
    let d = Discretization::new(&an, 120).unwrap();
    let settings = hammerstein_core::Settings {
        anderson: Some(5),
        ..Default::default()
    };
    let sol = d.solve_fixed_point(Target::T, &vec![0.5; d.len()], &settings).unwrap();
    check(sol.status == hammerstein_core::Status::Converged, || format!("T iteration {:?}", sol.status))?;
    let res = d.residual(Target::S, &sol.values);
    check(res < 1e-6, || format!("S residual {res} at ω = {omega}, a = {a}"))
}
