//! Sufficient conditions for nontrivial solutions in the cone: the index
//! inequalities `(I¹_ρ)` and `(I⁰_ρ)`, the radius menus `(S₁)`–`(S₆)`, the
//! eigenvalue menus `(H)`, `(Z)`, `(T)`, the `L₊` growth condition and the
//! nonexistence certificates. Each returns a [`CriterionReport`].
//!
//! Envelopes and limits of `f` are taken from declarations when present and
//! otherwise sampled. Sampled quantities carry an error budget of ten times
//! the largest jump between the extremal sample and its grid neighbours;
//! margins inside the budget are UNDECIDED.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Condition, Error, Result};
use crate::problem::Analysis;
use crate::report::{Certificate, CriterionReport, Relation, Verdict};
use crate::scalar::{lit, to_f64, uniform_grid, Func2, Real};
use crate::search::Goal;
use crate::spectral::{OperatorKind, SpectralEstimate};

/// Points per axis of the envelope sampling grid.
pub const ENVELOPE_GRID: usize = 2001;
/// Sampled margins must exceed this many local spreads.
pub const BUDGET_FACTOR: f64 = 10.0;
/// Relative slack for comparisons of computed (not sampled) quantities.
pub const NUMERIC_SLACK: f64 = 1e-9;
/// Relative budget for limits estimated at a single small or large `u`.
pub const SAMPLED_LIMIT_SLACK: f64 = 0.1;
/// Radius of the `u` range scanned by the nonexistence certificates.
pub const NONEXISTENCE_RADIUS: f64 = 50.0;
const SMALL_U: f64 = 1e-6;
const LARGE_U: f64 = 1e6;
const LIMIT_T_GRID: usize = 201;
const NONEXISTENCE_T_GRID: usize = 201;

pub type EnvelopeSupFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
pub type EnvelopeInfFn<T> = Arc<dyn Fn(T, T, T, T) -> T + Send + Sync>;

/// Declared limits of `f`; `None` falls back to sampling.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Asymptotics<T> {
    /// `f⁰ = limsup_{u→0} sup_t f(t,u)/|u|`.
    pub upper_zero: Option<T>,
    /// `f₀ = liminf_{u→0⁺} inf_{[a,b]} f(t,u)/u`.
    pub lower_zero: Option<T>,
    /// `f^∞ = limsup_{|u|→∞} sup_t f(t,u)/|u|`.
    pub upper_inf: Option<T>,
    /// `f_∞ = liminf_{u→+∞} inf_{[a,b]} f(t,u)/u`.
    pub lower_inf: Option<T>,
    /// `f̃₀ = liminf_{u→0} inf_t f(t,u)/|u|`.
    pub tilde_zero: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Limit {
    UpperZero,
    LowerZero,
    UpperInf,
    LowerInf,
    TildeZero,
}

impl Limit {
    pub const ALL: [Limit; 5] = [
        Limit::UpperZero,
        Limit::LowerZero,
        Limit::UpperInf,
        Limit::LowerInf,
        Limit::TildeZero,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Limit::UpperZero => "f^0",
            Limit::LowerZero => "f_0",
            Limit::UpperInf => "f^inf",
            Limit::LowerInf => "f_inf",
            Limit::TildeZero => "f~_0",
        }
    }
}

/// A limit with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitValue<T> {
    pub value: T,
    pub declared: bool,
}

/// Sampled or declared envelope value, already divided by `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope<T> {
    pub value: T,
    pub sampled: bool,
    /// Largest jump to a grid neighbour of the extremal sample; zero when declared.
    pub spread: T,
    pub at_t: T,
    pub at_u: T,
}

/// The nonlinearity `f(t,u) ≥ 0` with optional declared envelopes and limits.
#[derive(Clone)]
pub struct Nonlinearity<T: Real> {
    f: Func2<T>,
    label: String,
    autonomous: bool,
    envelope_sup: Option<EnvelopeSupFn<T>>,
    envelope_inf: Option<EnvelopeInfFn<T>>,
    asymptotics: Asymptotics<T>,
}

impl<T: Real> fmt::Debug for Nonlinearity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("label", &self.label)
            .field("autonomous", &self.autonomous)
            .field("asymptotics", &self.asymptotics)
            .finish()
    }
}

impl<T: Real> Nonlinearity<T> {
    pub fn new(label: impl Into<String>, f: Func2<T>) -> Self {
        Self {
            f,
            label: label.into(),
            autonomous: false,
            envelope_sup: None,
            envelope_inf: None,
            asymptotics: Asymptotics::default(),
        }
    }

    /// `f(t,u) = h(u)`; envelopes then need only a one-dimensional scan.
    pub fn autonomous(label: impl Into<String>, h: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        let mut n = Self::new(label, Arc::new(move |_t, u| h(u)));
        n.autonomous = true;
        n
    }

    /// `f ≡ 0`, with every envelope and limit declared.
    pub fn zero() -> Self {
        Self::autonomous("0", |_| T::zero())
            .with_envelope_sup(Arc::new(|_| T::zero()))
            .with_envelope_inf(Arc::new(|_, _, _, _| T::zero()))
            .with_asymptotics(Asymptotics {
                upper_zero: Some(T::zero()),
                lower_zero: Some(T::zero()),
                upper_inf: Some(T::zero()),
                lower_inf: Some(T::zero()),
                tilde_zero: Some(T::zero()),
            })
    }

    pub fn mark_autonomous(mut self, yes: bool) -> Self {
        self.autonomous = yes;
        self
    }

    /// Declares `ρ ↦ f^{-ρ,ρ}`.
    pub fn with_envelope_sup(mut self, e: EnvelopeSupFn<T>) -> Self {
        self.envelope_sup = Some(e);
        self
    }

    /// Declares `(ρ, c, a, b) ↦ f_{ρ,ρ/c}`.
    pub fn with_envelope_inf(mut self, e: EnvelopeInfFn<T>) -> Self {
        self.envelope_inf = Some(e);
        self
    }

    pub fn with_asymptotics(mut self, a: Asymptotics<T>) -> Self {
        self.asymptotics = a;
        self
    }

    /// `θ f`, with declared envelopes and limits scaled alike.
    pub fn scaled(&self, theta: T) -> Self {
        let f = self.f.clone();
        let sc = |v: Option<T>| v.map(|x| if x == T::zero() { x } else { x * theta });
        Self {
            f: Arc::new(move |t, u| theta * f(t, u)),
            label: format!("{theta}*({})", self.label),
            autonomous: self.autonomous,
            envelope_sup: self.envelope_sup.clone().map(|e| -> EnvelopeSupFn<T> { Arc::new(move |r| theta * e(r)) }),
            envelope_inf: self
                .envelope_inf
                .clone()
                .map(|e| -> EnvelopeInfFn<T> { Arc::new(move |r, c, a, b| theta * e(r, c, a, b)) }),
            asymptotics: Asymptotics {
                upper_zero: sc(self.asymptotics.upper_zero),
                lower_zero: sc(self.asymptotics.lower_zero),
                upper_inf: sc(self.asymptotics.upper_inf),
                lower_inf: sc(self.asymptotics.lower_inf),
                tilde_zero: sc(self.asymptotics.tilde_zero),
            },
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_autonomous(&self) -> bool {
        self.autonomous
    }

    pub fn asymptotics(&self) -> &Asymptotics<T> {
        &self.asymptotics
    }

    pub fn function(&self) -> &Func2<T> {
        &self.f
    }

    #[inline]
    pub fn eval(&self, t: T, u: T) -> T {
        (self.f)(t, u)
    }

    fn t_grid(&self, lo: T, hi: T, n: usize) -> Vec<T> {
        if self.autonomous {
            vec![lo]
        } else {
            uniform_grid(lo, hi, n)
        }
    }

    /// `f^{-ρ,ρ} = sup {f(t,u)/ρ : t ∈ [0,1], |u| ≤ ρ}`.
    pub fn envelope_sup(&self, rho: T) -> Result<Envelope<T>> {
        check_radius(rho)?;
        if let Some(e) = &self.envelope_sup {
            return Ok(declared(e(rho)));
        }
        let ts = self.t_grid(T::zero(), T::one(), ENVELOPE_GRID);
        let us = uniform_grid(-rho, rho, ENVELOPE_GRID);
        self.scan(&ts, &us, Goal::Max, true, |_, _, v| v / rho)
    }

    /// `f_{ρ,ρ/c} = inf {f(t,u)/ρ : t ∈ [a,b], ρ ≤ u ≤ ρ/c}`.
    pub fn envelope_inf(&self, rho: T, c: T, a: T, b: T) -> Result<Envelope<T>> {
        check_radius(rho)?;
        if !(c > T::zero() && c <= T::one()) {
            return Err(Error::InvalidInput(format!("cone constant {c} outside (0, 1]")));
        }
        if let Some(e) = &self.envelope_inf {
            return Ok(declared(e(rho, c, a, b)));
        }
        let ts = self.t_grid(a, b, ENVELOPE_GRID);
        let us = uniform_grid(rho, rho / c, ENVELOPE_GRID);
        self.scan(&ts, &us, Goal::Min, true, |_, _, v| v / rho)
    }

    /// Declared limit, or an estimate at `u = ±10⁻⁶` or `u = ±10⁶`.
    pub fn limit(&self, which: Limit, a: T, b: T) -> LimitValue<T> {
        let declared_value = match which {
            Limit::UpperZero => self.asymptotics.upper_zero,
            Limit::LowerZero => self.asymptotics.lower_zero,
            Limit::UpperInf => self.asymptotics.upper_inf,
            Limit::LowerInf => self.asymptotics.lower_inf,
            Limit::TildeZero => self.asymptotics.tilde_zero,
        };
        match declared_value {
            Some(value) => LimitValue { value, declared: true },
            None => LimitValue {
                value: self.sampled_limit(which, a, b),
                declared: false,
            },
        }
    }

    pub fn sampled_limit(&self, which: Limit, a: T, b: T) -> T {
        let (h, signs, lo, hi, goal): (T, &[f64], T, T, Goal) = match which {
            Limit::UpperZero => (lit(SMALL_U), &[1.0, -1.0], T::zero(), T::one(), Goal::Max),
            Limit::LowerZero => (lit(SMALL_U), &[1.0], a, b, Goal::Min),
            Limit::UpperInf => (lit(LARGE_U), &[1.0, -1.0], T::zero(), T::one(), Goal::Max),
            Limit::LowerInf => (lit(LARGE_U), &[1.0], a, b, Goal::Min),
            Limit::TildeZero => (lit(SMALL_U), &[1.0, -1.0], T::zero(), T::one(), Goal::Min),
        };
        let vals = self
            .t_grid(lo, hi, LIMIT_T_GRID)
            .into_iter()
            .flat_map(|t| signs.iter().map(move |&s| (t, lit::<T>(s) * h)))
            .map(|(t, u)| self.eval(t, u) / h);
        match goal {
            Goal::Max => vals.fold(T::neg_infinity(), T::max),
            Goal::Min => vals.fold(T::infinity(), T::min),
        }
    }

    /// Declared limits that disagree with their sampled estimates.
    pub fn limit_warnings(&self, a: T, b: T) -> Vec<String> {
        let mut out = Vec::new();
        for which in Limit::ALL {
            let lv = self.limit(which, a, b);
            if !lv.declared {
                continue;
            }
            let est = self.sampled_limit(which, a, b);
            let consistent = if lv.value.is_infinite() {
                est.abs() > lit(1e4) && est.signum() == lv.value.signum()
            } else {
                let diff = (est - lv.value).abs();
                diff <= lit::<T>(SAMPLED_LIMIT_SLACK) * lv.value.abs().max(T::one()) * lit(10.0) || diff <= lit(1e-3)
            };
            if !consistent {
                out.push(format!(
                    "declared {} = {} differs from sampled estimate {}",
                    which.symbol(),
                    lv.value,
                    est
                ));
            }
        }
        out
    }

    /// Extremum of `h(t, u, f(t,u))` over `ts × us` with the local spread.
    fn scan<H>(&self, ts: &[T], us: &[T], goal: Goal, check_sign: bool, h: H) -> Result<Envelope<T>>
    where
        H: Fn(T, T, T) -> T + Sync,
    {
        let better = |x: T, y: T| match goal {
            Goal::Max => x > y,
            Goal::Min => x < y,
        };
        let value_at = |t: T, u: T| -> Result<T> {
            let fv = self.eval(t, u);
            if fv.is_nan() {
                return Err(Error::EnvelopeUnavailable(format!(
                    "f({t}, {u}) of {} is not a number",
                    self.label
                )));
            }
            if check_sign && fv < T::zero() {
                return Err(Error::ConditionViolation {
                    condition: Condition::C4,
                    detail: format!("f({t}, {u}) = {fv} < 0"),
                });
            }
            Ok(h(t, u, fv))
        };
        let rows: Vec<(usize, T)> = ts
            .par_iter()
            .map(|&t| -> Result<(usize, T)> {
                let mut best = (0, value_at(t, us[0])?);
                for (j, &u) in us.iter().enumerate().skip(1) {
                    let v = value_at(t, u)?;
                    if better(v, best.1) {
                        best = (j, v);
                    }
                }
                Ok(best)
            })
            .collect::<Result<_>>()?;
        let mut bi = 0;
        for i in 1..rows.len() {
            if better(rows[i].1, rows[bi].1) {
                bi = i;
            }
        }
        let (bj, value) = rows[bi];
        let mut spread = T::zero();
        let neighbours = [
            (bi.wrapping_sub(1), bj),
            (bi + 1, bj),
            (bi, bj.wrapping_sub(1)),
            (bi, bj + 1),
        ];
        for (i, j) in neighbours {
            if i < ts.len() && j < us.len() {
                let v = value_at(ts[i], us[j])?;
                if v.is_finite() {
                    spread = spread.max((v - value).abs());
                }
            }
        }
        Ok(Envelope {
            value,
            sampled: true,
            spread,
            at_t: ts[bi],
            at_u: us[bj],
        })
    }
}

fn declared<T: Real>(value: T) -> Envelope<T> {
    Envelope {
        value,
        sampled: false,
        spread: T::zero(),
        at_t: T::nan(),
        at_u: T::nan(),
    }
}

fn check_radius<T: Real>(rho: T) -> Result<()> {
    if rho > T::zero() && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("radius must be positive and finite, got {rho}")))
    }
}

/// Which index inequality, or how its kernel factor is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Coupled sup/inf over `t`.
    #[default]
    Full,
    /// Decoupled bound through `‖γ‖`, `‖δ‖`, `1/m`, `1/M(a,b)`.
    Simplified,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::Simplified => "simplified",
        })
    }
}

/// `lhs rel rhs` with the budget raised to the numerical slack.
fn compare<T: Real>(id: &str, lhs: T, rel: Relation, rhs: T, budget: T, sampled: bool) -> CriterionReport {
    let (l, r) = (to_f64(lhs), to_f64(rhs));
    let scale = [l.abs(), r.abs()].into_iter().filter(|x| x.is_finite()).fold(0.0, f64::max);
    let budget = to_f64(budget).max(NUMERIC_SLACK * scale);
    CriterionReport::from_certificate(id, Certificate::new(l, rel, r, budget), sampled)
}

/// `(I¹_ρ)`: `f^{-ρ,ρ} · K₁ < 1`.
pub fn index_one<T: Real>(an: &Analysis<T>, rho: T, mode: Mode) -> Result<CriterionReport> {
    let env = an.f().envelope_sup(rho)?;
    let factor = match mode {
        Mode::Full => an.index_one_sup()?.value,
        Mode::Simplified => an.index_one_simplified(),
    };
    let lhs = env.value * factor;
    let budget = lit::<T>(BUDGET_FACTOR) * env.spread * factor;
    Ok(compare("I1_rho", lhs, Relation::Less, T::one(), budget, env.sampled)
        .with_input("rho", to_f64(rho))
        .with_input("f^{-rho,rho}", to_f64(env.value))
        .with_input("kernel_factor", to_f64(factor))
        .with_note(format!("mode: {mode}")))
}

/// `(I⁰_ρ)`: `f_{ρ,ρ/c} · K₀ > 1`.
pub fn index_zero<T: Real>(an: &Analysis<T>, rho: T, mode: Mode) -> Result<CriterionReport> {
    let (a, b) = an.interval();
    let c = an.cone_c();
    let env = an.f().envelope_inf(rho, c, a, b)?;
    let factor = match mode {
        Mode::Full => an.index_zero_inf()?.value,
        Mode::Simplified => an.index_zero_simplified(),
    };
    let lhs = env.value * factor;
    let budget = lit::<T>(BUDGET_FACTOR) * env.spread * factor.abs();
    Ok(compare("I0_rho", lhs, Relation::Greater, T::one(), budget, env.sampled)
        .with_input("rho", to_f64(rho))
        .with_input("c", to_f64(c))
        .with_input("f_{rho,rho/c}", to_f64(env.value))
        .with_input("kernel_factor", to_f64(factor))
        .with_note(format!("mode: {mode}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SCase {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Index {
    One,
    Zero,
}

impl SCase {
    pub const ALL: [SCase; 6] = [SCase::S1, SCase::S2, SCase::S3, SCase::S4, SCase::S5, SCase::S6];

    fn pattern(self) -> &'static [Index] {
        use Index::*;
        match self {
            SCase::S1 => &[Zero, One],
            SCase::S2 => &[One, Zero],
            SCase::S3 => &[Zero, One, Zero],
            SCase::S4 => &[One, Zero, One],
            SCase::S5 => &[Zero, One, Zero, One],
            SCase::S6 => &[One, Zero, One, Zero],
        }
    }

    /// Number of radii.
    pub fn arity(self) -> usize {
        self.pattern().len()
    }

    /// Nonzero solutions in the cone guaranteed when the case holds.
    pub fn solutions(self) -> usize {
        match self {
            SCase::S1 | SCase::S2 => 1,
            SCase::S3 | SCase::S4 => 2,
            SCase::S5 | SCase::S6 => 3,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            SCase::S1 => "S1",
            SCase::S2 => "S2",
            SCase::S3 => "S3",
            SCase::S4 => "S4",
            SCase::S5 => "S5",
            SCase::S6 => "S6",
        }
    }

    /// The gap `ρ_i < ρ_{i+1}` becomes `ρ_i/c < ρ_{i+1}` after an index-zero radius.
    fn divided(self, i: usize) -> bool {
        self.pattern()[i] == Index::Zero
    }
}

fn subscript(i: usize) -> &'static str {
    ["₁", "₂", "₃", "₄"][i]
}

/// Checks the ordering of `rhos` required by `case`.
pub fn check_ordering<T: Real>(case: SCase, rhos: &[T], c: T) -> Result<()> {
    if rhos.len() != case.arity() {
        return Err(Error::InvalidInput(format!(
            "{} needs {} radii, got {}",
            case.id(),
            case.arity(),
            rhos.len()
        )));
    }
    for i in 0..rhos.len() - 1 {
        let left = if case.divided(i) { rhos[i] / c } else { rhos[i] };
        if !(rhos[i] > T::zero() && left < rhos[i + 1]) {
            let lhs = if case.divided(i) {
                format!("ρ{}/c", subscript(i))
            } else {
                format!("ρ{}", subscript(i))
            };
            return Err(Error::OrderingViolation(format!(
                "{lhs} < ρ{} violated ({lhs} = {left}, ρ{} = {})",
                subscript(i + 1),
                subscript(i + 1),
                rhos[i + 1]
            )));
        }
    }
    Ok(())
}

/// One of `(S₁)`–`(S₆)` at the given radii.
pub fn s_case<T: Real>(an: &Analysis<T>, case: SCase, rhos: &[T], mode: Mode) -> Result<CriterionReport> {
    let c = an.cone_c();
    check_ordering(case, rhos, c)?;
    let mut parts = Vec::with_capacity(rhos.len());
    for (i, (&rho, idx)) in rhos.iter().zip(case.pattern()).enumerate() {
        let mut r = match idx {
            Index::One => index_one(an, rho, mode)?,
            Index::Zero => index_zero(an, rho, mode)?,
        };
        r.condition_id = format!("{}(rho{})", r.condition_id.trim_end_matches("_rho"), i + 1);
        parts.push(r);
    }
    let mut rep = CriterionReport::conjunction(case.id(), parts).with_input("c", to_f64(c));
    for (i, &r) in rhos.iter().enumerate() {
        rep = rep.with_input(format!("rho{}", i + 1), to_f64(r));
    }
    Ok(rep.with_note(format!("implies at least {} nonzero solution(s) in K", case.solutions())))
}

/// Every S-case whose arity matches the number of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityMenu {
    pub cases: Vec<CriterionReport>,
    /// Cases skipped because the radii violate their ordering.
    pub skipped: Vec<(String, String)>,
    /// Strongest case that holds and the solution count it implies.
    pub strongest: Option<(String, usize)>,
}

pub fn multiplicity_menu<T: Real>(an: &Analysis<T>, rhos: &[T], mode: Mode) -> Result<MultiplicityMenu> {
    let candidates: Vec<SCase> = SCase::ALL.into_iter().filter(|c| c.arity() == rhos.len()).collect();
    if candidates.is_empty() {
        return Err(Error::InvalidInput(format!(
            "the S-cases take 2, 3 or 4 radii, got {}",
            rhos.len()
        )));
    }
    let mut cases = Vec::new();
    let mut skipped = Vec::new();
    let mut first_violation = None;
    for case in candidates {
        match s_case(an, case, rhos, mode) {
            Ok(r) => cases.push(r),
            Err(Error::OrderingViolation(msg)) => {
                skipped.push((case.id().to_string(), msg.clone()));
                first_violation.get_or_insert(msg);
            }
            Err(e) => return Err(e),
        }
    }
    if cases.is_empty() {
        return Err(Error::OrderingViolation(first_violation.unwrap_or_default()));
    }
    let strongest = SCase::ALL
        .into_iter()
        .filter(|c| cases.iter().any(|r| r.condition_id == c.id() && r.verdict == Verdict::Holds))
        .max_by_key(|c| c.solutions())
        .map(|c| (c.id().to_string(), c.solutions()));
    Ok(MultiplicityMenu {
        cases,
        skipped,
        strongest,
    })
}

/// Log-spaced radii, the default scan when none are supplied. Heuristic.
pub fn log_spaced<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let (l, h) = (lo.ln(), hi.ln());
    uniform_grid(l, h, n).into_iter().map(T::exp).collect()
}

fn default_radii<T: Real>() -> Vec<T> {
    log_spaced(lit(1e-3), lit(1e3), 25)
}

struct SpectralData<T> {
    mu_l: SpectralEstimate<T>,
    mu_lt: SpectralEstimate<T>,
}

fn require_positive<T: Real>(an: &Analysis<T>) -> Result<()> {
    if an.measures_positive() {
        Ok(())
    } else {
        Err(Error::PositivityRequired("α and β must be positive measures".into()))
    }
}

/// Comparison of a limit of `f` with a spectral value.
fn limit_vs_mu<T: Real>(
    id: &str,
    lim: LimitValue<T>,
    rel: Relation,
    mu: &SpectralEstimate<T>,
) -> CriterionReport {
    let mut budget = lit::<T>(BUDGET_FACTOR) * finite_or_zero(mu.refinement_gap);
    if !lim.declared {
        budget = budget + lit::<T>(SAMPLED_LIMIT_SLACK) * mu.mu.abs();
    }
    let mut r = compare(id, lim.value, rel, mu.mu, budget, !lim.declared);
    if !lim.declared {
        r = r.with_note("limit estimated by sampling");
    }
    r
}

fn finite_or_zero<T: Real>(x: T) -> T {
    if x.is_finite() {
        x
    } else {
        T::zero()
    }
}

fn bump<T: Real>(an: &Analysis<T>, rho: T) -> Result<CriterionReport> {
    let (a, b) = an.interval();
    let env = an.f().envelope_inf(rho, an.cone_c(), a, b)?;
    let budget = lit::<T>(BUDGET_FACTOR) * env.spread;
    Ok(compare("f_{rho,rho/c}>M_S", env.value, Relation::Greater, an.big_m_s(), budget, env.sampled)
        .with_input("rho", to_f64(rho)))
}

fn flat<T: Real>(an: &Analysis<T>, rho: T) -> Result<CriterionReport> {
    let env = an.f().envelope_sup(rho)?;
    let budget = lit::<T>(BUDGET_FACTOR) * env.spread;
    Ok(compare("f^{-rho,rho}<m_S", env.value, Relation::Less, an.m_s(), budget, env.sampled)
        .with_input("rho", to_f64(rho)))
}

/// Disjunction over alternatives, reporting the strongest one.
fn exists(id: &str, alts: Vec<CriterionReport>, note: &str) -> CriterionReport {
    let verdict = Verdict::any(alts.iter().map(|r| r.verdict));
    let best = alts
        .iter()
        .max_by(|x, y| {
            rank(x.verdict)
                .cmp(&rank(y.verdict))
                .then_with(|| strength(x).total_cmp(&strength(y)))
        })
        .cloned();
    let mut r = CriterionReport {
        condition_id: id.to_string(),
        verdict,
        certificate: best.as_ref().and_then(|b| b.certificate),
        inputs: best.as_ref().map(|b| b.inputs.clone()).unwrap_or_default(),
        sampled: alts.iter().any(|r| r.sampled),
        notes: vec![note.to_string()],
        parts: best.into_iter().collect(),
    };
    if alts.is_empty() {
        r.notes.push("no admissible radius among those supplied".into());
    }
    r
}

fn rank(v: Verdict) -> u8 {
    match v {
        Verdict::Holds => 2,
        Verdict::Undecided => 1,
        Verdict::Fails => 0,
    }
}

fn strength(r: &CriterionReport) -> f64 {
    r.certificate.map(|c| c.strength()).unwrap_or(f64::NEG_INFINITY)
}

/// `(H₁)`, `(H₂)`, `(Z₁)`, `(Z₂)`, `(T₁)`, `(T₂)`. Radii conditions are tried
/// at each supplied radius (pairs in increasing order for the T-cases); an
/// empty list falls back to a log-spaced scan.
pub fn eigen_menu<T: Real>(an: &Analysis<T>, rhos: &[T]) -> Result<Vec<CriterionReport>> {
    require_positive(an)?;
    let sd = SpectralData {
        mu_l: an.spectral(OperatorKind::L)?,
        mu_lt: an.spectral(OperatorKind::Ltilde)?,
    };
    let (a, b) = an.interval();
    let f = an.f();
    let scanned = rhos.is_empty();
    let radii: Vec<T> = if scanned { default_radii() } else { rhos.to_vec() };
    let radius_note = if scanned {
        "radii from a heuristic log-spaced scan on [1e-3, 1e3]"
    } else {
        "radii as supplied"
    };
    let up0 = limit_vs_mu("f^0<mu(L)", f.limit(Limit::UpperZero, a, b), Relation::Less, &sd.mu_l);
    let upi = limit_vs_mu("f^inf<mu(L)", f.limit(Limit::UpperInf, a, b), Relation::Less, &sd.mu_l);
    let lo0 = limit_vs_mu("f_0>mu(L~)", f.limit(Limit::LowerZero, a, b), Relation::Greater, &sd.mu_lt);
    let loi = limit_vs_mu("f_inf>mu(L~)", f.limit(Limit::LowerInf, a, b), Relation::Greater, &sd.mu_lt);

    let bumps: Vec<CriterionReport> = radii.iter().map(|&r| bump(an, r)).collect::<Result<_>>()?;
    let flats: Vec<CriterionReport> = radii.iter().map(|&r| flat(an, r)).collect::<Result<_>>()?;
    let c = an.cone_c();
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    for i in 0..radii.len() {
        for j in 0..radii.len() {
            if radii[i] < radii[j] {
                t1.push(
                    CriterionReport::conjunction("pair", vec![flats[i].clone(), bumps[j].clone()])
                        .with_input("rho1", to_f64(radii[i]))
                        .with_input("rho2", to_f64(radii[j])),
                );
            }
            if radii[i] < c * radii[j] {
                t2.push(
                    CriterionReport::conjunction("pair", vec![bumps[i].clone(), flats[j].clone()])
                        .with_input("rho1", to_f64(radii[i]))
                        .with_input("rho2", to_f64(radii[j])),
                );
            }
        }
    }
    let some_bump = exists("exists rho: f_{rho,rho/c}>M_S", bumps, radius_note);
    let some_flat = exists("exists rho: f^{-rho,rho}<m_S", flats, radius_note);
    let pair1 = exists("exists rho1<rho2", t1, radius_note);
    let pair2 = exists("exists rho1<c*rho2", t2, radius_note);

    let inputs = |r: CriterionReport| {
        r.with_input("mu(L)", to_f64(sd.mu_l.mu))
            .with_input("mu(L~)", to_f64(sd.mu_lt.mu))
            .with_input("m_S", to_f64(an.m_s()))
            .with_input("M_S", to_f64(an.big_m_s()))
            .with_input("c", to_f64(c))
    };
    Ok(vec![
        inputs(CriterionReport::conjunction("H1", vec![up0.clone(), loi.clone()])),
        inputs(CriterionReport::conjunction("H2", vec![upi.clone(), lo0.clone()])),
        inputs(CriterionReport::conjunction("Z1", vec![up0.clone(), some_bump, upi.clone()])),
        inputs(CriterionReport::conjunction("Z2", vec![lo0.clone(), some_flat, loi.clone()])),
        inputs(CriterionReport::conjunction("T1", vec![lo0, pair1, upi])),
        inputs(CriterionReport::conjunction("T2", vec![up0, pair2, loi])),
    ])
}

/// `μ(L₊) < f̃₀ − c̃ f⁰`.
pub fn lplus_condition<T: Real>(an: &Analysis<T>) -> Result<CriterionReport> {
    require_positive(an)?;
    let (a, b) = an.interval();
    let ft0 = an.f().limit(Limit::TildeZero, a, b);
    let f0 = an.f().limit(Limit::UpperZero, a, b);
    for (name, l) in [("f~_0", ft0), ("f^0", f0)] {
        if !l.value.is_finite() {
            return Err(Error::EnvelopeUnavailable(format!(
                "{name} = {} but the L+ condition needs it finite",
                l.value
            )));
        }
    }
    let mu = an.spectral(OperatorKind::Lplus)?;
    let ct = an.c_tilde()?;
    let rhs = ft0.value - ct * f0.value;
    let sampled = !(ft0.declared && f0.declared);
    let mut budget = lit::<T>(BUDGET_FACTOR) * finite_or_zero(mu.refinement_gap);
    if sampled {
        budget = budget + lit::<T>(SAMPLED_LIMIT_SLACK) * (ft0.value.abs() + ct * f0.value.abs());
    }
    let mut r = compare("LPLUS", mu.mu, Relation::Less, rhs, budget, sampled)
        .with_input("mu(L+)", to_f64(mu.mu))
        .with_input("f~_0", to_f64(ft0.value))
        .with_input("f^0", to_f64(f0.value))
        .with_input("c~", to_f64(ct));
    if a == T::zero() && b == T::one() {
        r = r.with_note("[a,b] = [0,1]: L = L+ = L~ and the condition reads mu(L) < f~_0");
    }
    Ok(r)
}

/// Nonexistence certificates: `(1)` `f(t,u) < m_S|u|` and `(2)` `f(t,u) > M_S u`,
/// sampled on `|u| ≤ 50` and combined with the limits of `f`.
pub fn nonexistence<T: Real>(an: &Analysis<T>) -> Result<Vec<CriterionReport>> {
    let (a, b) = an.interval();
    let f = an.f();
    let r = lit::<T>(NONEXISTENCE_RADIUS);
    let mut pos = log_spaced(lit::<T>(SMALL_U), r / lit(2000.0), 200);
    pos.pop();
    pos.extend(uniform_grid(r / lit(2000.0), r, 2000));
    let mut both: Vec<T> = pos.iter().rev().map(|&u| -u).collect();
    both.extend(pos.iter().copied());

    let ts = f.t_grid(T::zero(), T::one(), NONEXISTENCE_T_GRID);
    let sup = f.scan(&ts, &both, Goal::Max, false, |_, u, v| v / u.abs())?;
    let mut lhs1 = (sup.value, lit::<T>(BUDGET_FACTOR) * sup.spread, true, "grid".to_string());
    for which in [Limit::UpperZero, Limit::UpperInf] {
        let l = f.limit(which, a, b);
        if l.value > lhs1.0 {
            let budget = if l.declared {
                T::zero()
            } else {
                lit::<T>(SAMPLED_LIMIT_SLACK) * l.value.abs()
            };
            lhs1 = (l.value, budget, !l.declared, which.symbol().to_string());
        }
    }
    let cert1 = compare("NOEXT1", lhs1.0, Relation::Less, an.m_s(), lhs1.1, lhs1.2)
        .with_input("sup f/|u|", to_f64(lhs1.0))
        .with_input("m_S", to_f64(an.m_s()))
        .with_input("R", NONEXISTENCE_RADIUS)
        .with_note(format!("decisive value from {}", lhs1.3));

    let ts = f.t_grid(a, b, NONEXISTENCE_T_GRID);
    let inf = f.scan(&ts, &pos, Goal::Min, false, |_, u, v| v / u)?;
    let mut lhs2 = (inf.value, lit::<T>(BUDGET_FACTOR) * inf.spread, true, "grid".to_string());
    for which in [Limit::LowerZero, Limit::LowerInf] {
        let l = f.limit(which, a, b);
        if l.value < lhs2.0 {
            let budget = if l.declared {
                T::zero()
            } else {
                lit::<T>(SAMPLED_LIMIT_SLACK) * l.value.abs()
            };
            lhs2 = (l.value, budget, !l.declared, which.symbol().to_string());
        }
    }
    let cert2 = compare("NOEXT2", lhs2.0, Relation::Greater, an.big_m_s(), lhs2.1, lhs2.2)
        .with_input("inf f/u", to_f64(lhs2.0))
        .with_input("M_S", to_f64(an.big_m_s()))
        .with_input("R", NONEXISTENCE_RADIUS)
        .with_note(format!("decisive value from {}", lhs2.3));
    Ok(vec![cert1, cert2])
}

/// Verdicts of both index inequalities at each radius. Heuristic aid for
/// choosing radii; it proves nothing by itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusScanRow {
    pub rho: f64,
    pub index_one: Verdict,
    pub index_zero: Verdict,
}

pub fn scan_radii<T: Real>(an: &Analysis<T>, rhos: &[T], mode: Mode) -> Result<Vec<RadiusScanRow>> {
    rhos.iter()
        .map(|&rho| {
            Ok(RadiusScanRow {
                rho: to_f64(rho),
                index_one: index_one(an, rho, mode)?.verdict,
                index_zero: index_zero(an, rho, mode)?.verdict,
            })
        })
        .collect()
}

/// `2 ((c-1)/ln c) c^{c/(c-1)} M`: the ratio `τ₁/τ₂` above which the bump
/// `τ₁u² e^{-τ₂u}/2` clears `M u` on some `[ρ, ρ/c]`.
pub fn bump_threshold<T: Real>(c: T, big_m: T) -> T {
    let one = T::one();
    lit::<T>(2.0) * ((c - one) / c.ln()) * c.powf(c / (c - one)) * big_m
}

/// All reports of a problem keyed by condition id, for summaries.
pub fn index_reports<T: Real>(reports: &[CriterionReport]) -> BTreeMap<String, Verdict> {
    reports.iter().map(|r| (r.condition_id.clone(), r.verdict)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{example1, example2, example3, example3_index_one_bound, example3_nonexistence_bound};

    #[test]
    fn index_one_threshold_for_exponential_problem() {
        let bound = example3_index_one_bound();
        let an = example3(0.99 * bound).analyze().unwrap();
        assert_eq!(index_one(&an, 2.0, Mode::Simplified).unwrap().verdict, Verdict::Holds);
        assert_eq!(index_one(&an, 2.0, Mode::Full).unwrap().verdict, Verdict::Holds);
        let an = example3(1.05 * bound).analyze().unwrap();
        assert_eq!(index_one(&an, 2.0, Mode::Simplified).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn index_zero_and_s1_for_exponential_problem() {
        let an = example3(0.25).analyze().unwrap();
        assert_eq!(index_zero(&an, 0.1, Mode::Full).unwrap().verdict, Verdict::Holds);
        let r = s_case(&an, SCase::S1, &[0.1, 2.0], Mode::Full).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.parts.len(), 2);
    }

    #[test]
    fn ordering_violation_names_the_gap() {
        let an = example3(0.25).analyze().unwrap();
        match s_case(&an, SCase::S1, &[1.5, 2.0], Mode::Full) {
            Err(Error::OrderingViolation(msg)) => assert!(msg.contains("ρ₁/c < ρ₂"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let menu = multiplicity_menu(&an, &[1.5, 2.0], Mode::Full).unwrap();
        assert_eq!(menu.skipped.len(), 1);
        assert_eq!(menu.cases[0].condition_id, "S2");
    }

    #[test]
    fn zero_nonlinearity() {
        let an = example3(0.25).with_f(Nonlinearity::zero()).analyze().unwrap();
        assert_eq!(index_one(&an, 1.0, Mode::Full).unwrap().verdict, Verdict::Holds);
        assert_eq!(index_zero(&an, 1.0, Mode::Full).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn sampled_envelopes_agree_with_declared() {
        let spec = example3(0.25);
        let f = spec.f.clone();
        let raw = Nonlinearity::autonomous("raw", |u: f64| 0.25 * u.exp());
        for rho in [0.1, 1.0, 2.0] {
            let d = f.envelope_sup(rho).unwrap();
            let s = raw.envelope_sup(rho).unwrap();
            assert!(s.sampled && (s.value - d.value).abs() < 1e-12);
            let d = f.envelope_inf(rho, 0.648, 0.0, 1.0).unwrap();
            let s = raw.envelope_inf(rho, 0.648, 0.0, 1.0).unwrap();
            assert!((s.value - d.value).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_nonlinearity_violates_c4() {
        let an = example3(0.25)
            .with_f(Nonlinearity::autonomous("u", |u: f64| u))
            .analyze()
            .unwrap();
        match index_one(&an, 1.0, Mode::Full) {
            Err(Error::ConditionViolation { condition, .. }) => assert_eq!(condition, Condition::C4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nonexistence_certificates() {
        let an = example3(0.9).analyze().unwrap();
        let certs = nonexistence(&an).unwrap();
        assert_eq!(certs[1].verdict, Verdict::Holds);
        let an = example3(0.25).analyze().unwrap();
        let certs = nonexistence(&an).unwrap();
        assert_eq!(certs[0].verdict, Verdict::Fails);
        assert_eq!(certs[1].verdict, Verdict::Fails);
        assert!(0.9 > example3_nonexistence_bound());
    }

    #[test]
    fn small_linear_growth_has_no_solution() {
        let an = example3(0.25).analyze().unwrap();
        let half = an.m_s() / 2.0;
        let an = example3(0.25)
            .with_f(Nonlinearity::autonomous("|u|", move |u: f64| half * u.abs()))
            .analyze()
            .unwrap();
        assert_eq!(nonexistence(&an).unwrap()[0].verdict, Verdict::Holds);
    }

    #[test]
    fn lplus_needs_finite_limits() {
        let an = example3(0.25).analyze().unwrap();
        assert!(matches!(lplus_condition(&an), Err(Error::EnvelopeUnavailable(_))));
        let an = example3(0.25)
            .with_f(Nonlinearity::autonomous("5|u|", |u: f64| 5.0 * u.abs()))
            .analyze()
            .unwrap();
        let r = lplus_condition(&an).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.notes.iter().any(|n| n.contains("[0,1]")));
    }

    #[test]
    fn bump_problem_eigen_menu() {
        let radii = log_spaced(0.01, 100.0, 41);
        let an = example1(40.0, 1.0).analyze().unwrap();
        let menu = eigen_menu(&an, &radii).unwrap();
        let z1 = menu.iter().find(|r| r.condition_id == "Z1").unwrap();
        assert_eq!(z1.verdict, Verdict::Holds);
        let h1 = menu.iter().find(|r| r.condition_id == "H1").unwrap();
        assert_eq!(h1.verdict, Verdict::Fails);
        let an = example1(12.0, 1.0).analyze().unwrap();
        let menu = eigen_menu(&an, &radii).unwrap();
        assert_eq!(menu.iter().find(|r| r.condition_id == "Z1").unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn nonlocal_problem_index_zero_for_small_radius() {
        let an = example2(2.4, 0.4, 0.6).unwrap().analyze().unwrap();
        assert_eq!(index_zero(&an, 1e-3, Mode::Full).unwrap().verdict, Verdict::Holds);
        assert_eq!(index_one(&an, 1e3, Mode::Full).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn threshold_formula() {
        assert!((bump_threshold(0.195_f64, 7.029) - 10.289).abs() < 5e-3);
    }
}
