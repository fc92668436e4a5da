//! TOML problem files.
//!
//! ```toml
//! name = "exponential Neumann problem"
//! epsilon = -1
//! omega = 1.0
//! interval = [0.0, 1.0]
//! g = "linear"                       # "one", "linear" or an expression in s
//!
//! [params]
//! lambda = 0.25                      # usable by name in every expression
//!
//! [f]
//! expr = "lambda*exp(u)"             # in t and u
//! envelope_sup = "lambda*exp(rho)/rho"          # optional, in rho
//! envelope_inf = "lambda*exp(rho)/rho"          # optional, in rho, c, a, b
//! asymptotics = { upper_zero = inf, lower_zero = inf }
//!
//! [alpha]
//! atoms = [[0.0, 1.0], [1.0, 1.0]]   # (point, weight)
//! density = "sin(pi*t)"              # optional, in t
//!
//! gamma = "kernel_left"              # "kernel_left", "kernel_right", "zero" or an expression in t
//! ```
//!
//! Tables `[beta]`, keys `delta`, `[settings]` (see [`Settings`]) and
//! `[check]` (default `rhos` and `menu`) follow the same pattern.

use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::Arc;

use hammerstein_core::criteria::Asymptotics;
use hammerstein_core::kernel::Kernel;
use hammerstein_core::{
    BoundaryData, BoundaryFn, Condition, Density, Error as CoreError, Nonlinearity, ProblemSpec, Settings,
    ShiftSign, ShiftedKernel, StieltjesMeasure, Weight,
};
use serde::Deserialize;
use toml::Spanned;

use crate::error::CliError;
use crate::expr::Expr;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    name: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    epsilon: Spanned<i32>,
    omega: Spanned<f64>,
    interval: Spanned<[f64; 2]>,
    g: Option<Spanned<String>>,
    f: Spanned<RawF>,
    alpha: Option<Spanned<RawMeasure>>,
    beta: Option<Spanned<RawMeasure>>,
    gamma: Option<Spanned<String>>,
    delta: Option<Spanned<String>>,
    #[serde(default)]
    settings: Settings,
    #[serde(default)]
    check: CheckDefaults,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawF {
    expr: Spanned<String>,
    autonomous: Option<bool>,
    envelope_sup: Option<Spanned<String>>,
    envelope_inf: Option<Spanned<String>>,
    #[serde(default)]
    asymptotics: RawAsymptotics,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAsymptotics {
    upper_zero: Option<f64>,
    lower_zero: Option<f64>,
    upper_inf: Option<f64>,
    lower_inf: Option<f64>,
    tilde_zero: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    #[serde(default)]
    atoms: Vec<[f64; 2]>,
    density: Option<Spanned<String>>,
    #[serde(default)]
    breaks: Vec<f64>,
}

/// Defaults for `check` taken from the file; command-line flags override them.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDefaults {
    #[serde(default)]
    pub rhos: Vec<f64>,
    #[serde(default)]
    pub menu: Vec<String>,
}

/// Where in the file each part of the problem was declared, for error messages.
#[derive(Debug, Clone, Default)]
struct Spans {
    omega: Range<usize>,
    interval: Range<usize>,
    f: Range<usize>,
    boundary: Option<Range<usize>>,
}

/// A parsed problem file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub path: String,
    pub name: Option<String>,
    pub problem: ProblemSpec<f64>,
    pub check: CheckDefaults,
    source: String,
    spans: Spans,
}

fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

struct Builder<'a> {
    path: &'a str,
    source: &'a str,
    params: BTreeMap<String, f64>,
}

impl Builder<'_> {
    fn parse_error(&self, offset: usize, message: String) -> CliError {
        let (line, column) = line_col(self.source, offset);
        CliError::Parse {
            path: self.path.to_string(),
            line,
            column,
            message,
        }
    }

    fn core_error(&self, span: &Range<usize>, error: CoreError) -> CliError {
        let (line, _) = line_col(self.source, span.start);
        CliError::Problem {
            path: self.path.to_string(),
            line: Some(line),
            error,
        }
    }

    /// Compiles an expression held in a TOML string; error columns point into the file.
    fn expr(&self, field: &str, s: &Spanned<String>, vars: &[&str]) -> Result<Expr, CliError> {
        Expr::parse_with(s.get_ref(), vars, &self.params).map_err(|e| {
            let inner: usize = s.get_ref().chars().take(e.column - 1).map(char::len_utf8).sum();
            self.parse_error(s.span().start + 1 + inner, format!("in `{field}`: {}", e.message))
        })
    }

    fn weight(&self, g: Option<&Spanned<String>>) -> Result<Weight<f64>, CliError> {
        let Some(g) = g else { return Ok(Weight::One) };
        Ok(match g.get_ref().trim() {
            "one" => Weight::One,
            "linear" => Weight::Linear,
            _ => {
                let e = self.expr("g", g, &["s"])?;
                Weight::custom(e.source().to_string(), Arc::new(move |s: f64| e.eval(&[s])))
            }
        })
    }

    fn nonlinearity(&self, raw: &RawF) -> Result<Nonlinearity<f64>, CliError> {
        let e = self.expr("f.expr", &raw.expr, &["t", "u"])?;
        let autonomous = raw.autonomous.unwrap_or(!e.uses("t"));
        let label = e.source().to_string();
        let mut f = if autonomous {
            Nonlinearity::autonomous(label, move |u: f64| e.eval(&[0.0, u]))
        } else {
            Nonlinearity::new(label, Arc::new(move |t: f64, u: f64| e.eval(&[t, u])))
        };
        if let Some(s) = &raw.envelope_sup {
            let e = self.expr("f.envelope_sup", s, &["rho"])?;
            f = f.with_envelope_sup(Arc::new(move |rho: f64| e.eval(&[rho])));
        }
        if let Some(s) = &raw.envelope_inf {
            let e = self.expr("f.envelope_inf", s, &["rho", "c", "a", "b"])?;
            f = f.with_envelope_inf(Arc::new(move |rho: f64, c: f64, a: f64, b: f64| e.eval(&[rho, c, a, b])));
        }
        let a = &raw.asymptotics;
        Ok(f.with_asymptotics(Asymptotics {
            upper_zero: a.upper_zero,
            lower_zero: a.lower_zero,
            upper_inf: a.upper_inf,
            lower_inf: a.lower_inf,
            tilde_zero: a.tilde_zero,
        }))
    }

    fn measure(&self, field: &str, raw: Option<&Spanned<RawMeasure>>) -> Result<StieltjesMeasure<f64>, CliError> {
        let Some(raw) = raw else {
            return Ok(StieltjesMeasure::trivial());
        };
        let m = raw.get_ref();
        let density = match &m.density {
            Some(d) => {
                let e = self.expr(&format!("{field}.density"), d, &["t"])?;
                Some(Density {
                    label: e.source().to_string(),
                    f: Arc::new(move |t: f64| e.eval(&[t])),
                    breaks: m.breaks.clone(),
                })
            }
            None => None,
        };
        let atoms = m.atoms.iter().map(|&[x, w]| (x, w)).collect();
        StieltjesMeasure::new(atoms, density).map_err(|e| self.core_error(&raw.span(), e))
    }

    fn boundary_fn(
        &self,
        field: &str,
        raw: Option<&Spanned<String>>,
        kernel: &Arc<dyn Kernel<f64>>,
    ) -> Result<BoundaryFn<f64>, CliError> {
        let Some(s) = raw else { return Ok(BoundaryFn::zero()) };
        Ok(match s.get_ref().trim() {
            "zero" => BoundaryFn::zero(),
            "kernel_left" => BoundaryFn::kernel_left(kernel.clone()),
            "kernel_right" => BoundaryFn::kernel_right(kernel.clone()),
            _ => {
                let e = self.expr(field, s, &["t"])?;
                BoundaryFn::new(e.source().to_string(), Arc::new(move |t: f64| e.eval(&[t])))
            }
        })
    }
}

impl ProblemFile {
    pub fn load(path: &str, overrides: &BTreeMap<String, f64>) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        Self::parse(path, &source, overrides)
    }

    /// Parses `source`; `overrides` replace entries of `[params]` and may add new ones.
    pub fn parse(path: &str, source: &str, overrides: &BTreeMap<String, f64>) -> Result<Self, CliError> {
        let raw: RawProblem = toml::from_str(source).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            let (line, column) = line_col(source, offset);
            CliError::Parse {
                path: path.to_string(),
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        let mut params = raw.params.clone();
        params.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
        let b = Builder { path, source, params };

        let sign = ShiftSign::from_epsilon(*raw.epsilon.get_ref()).map_err(|e| b.core_error(&raw.epsilon.span(), e))?;
        let omega = *raw.omega.get_ref();
        let kernel: Arc<dyn Kernel<f64>> =
            Arc::new(ShiftedKernel::new(sign, omega).map_err(|e| b.core_error(&raw.omega.span(), e))?);
        let [a, bb] = *raw.interval.get_ref();
        let g = b.weight(raw.g.as_ref())?;
        let f = b.nonlinearity(raw.f.get_ref())?;
        let boundary = BoundaryData {
            gamma: b.boundary_fn("gamma", raw.gamma.as_ref(), &kernel)?,
            delta: b.boundary_fn("delta", raw.delta.as_ref(), &kernel)?,
            alpha: b.measure("alpha", raw.alpha.as_ref())?,
            beta: b.measure("beta", raw.beta.as_ref())?,
        };
        let boundary_span = [
            raw.alpha.as_ref().map(Spanned::span),
            raw.beta.as_ref().map(Spanned::span),
            raw.gamma.as_ref().map(Spanned::span),
            raw.delta.as_ref().map(Spanned::span),
        ]
        .into_iter()
        .flatten()
        .min_by_key(|s| s.start);
        let problem = ProblemSpec::new(sign, omega, g, f, a, bb)
            .with_boundary(boundary)
            .with_settings(raw.settings.clone());
        Ok(Self {
            path: path.to_string(),
            name: raw.name.clone(),
            problem,
            check: raw.check.clone(),
            source: source.to_string(),
            spans: Spans {
                omega: raw.omega.span(),
                interval: raw.interval.span(),
                f: raw.f.span(),
                boundary: boundary_span,
            },
        })
    }

    /// Attaches the line of the declaration most likely responsible for `error`.
    pub fn locate(&self, error: CoreError) -> CliError {
        let span = match &error {
            CoreError::ConditionViolation { condition, .. } => match condition {
                Condition::C4 => Some(&self.spans.f),
                _ => self.spans.boundary.as_ref(),
            },
            CoreError::StripViolation { .. } | CoreError::InvalidInput(_) => Some(&self.spans.interval),
            CoreError::Domain(_) => Some(&self.spans.omega),
            CoreError::EnvelopeUnavailable(_) => Some(&self.spans.f),
            _ => None,
        };
        CliError::Problem {
            path: self.path.clone(),
            line: span.map(|s| line_col(&self.source, s.start).0),
            error,
        }
    }
}
