//! Machine-readable command results and their table rendering.

use std::fmt::Write as _;

use hammerstein_core::report::{float, float_vec};
use hammerstein_core::solver::MultiStart;
use hammerstein_core::{ConstantsBundle, CriterionReport, DiscreteSolution, Settings, Verdict};
use serde::{Deserialize, Serialize};

use crate::format::{opt, sig};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Output {
    pub schema: u32,
    pub command: String,
    pub source: Option<String>,
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Body {
    Constants(ConstantsBundle),
    Check(CheckReport),
    Solve(SolveReport),
    Example(ExampleReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub constants: ConstantsBundle,
    #[serde(with = "float_vec")]
    pub rhos: Vec<f64>,
    pub reports: Vec<CriterionReport>,
    pub skipped: Vec<Skipped>,
    pub warnings: Vec<String>,
    /// Strongest multiplicity case that holds and the number of solutions it gives.
    pub strongest: Option<(String, usize)>,
}

/// A criterion that was not evaluated, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub criterion: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub settings: Settings,
    pub multi_start: MultiStart,
    pub solutions: Vec<DiscreteSolution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldenCheck {
    Within(f64),
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub quantity: String,
    #[serde(with = "float")]
    pub expected: f64,
    #[serde(with = "float")]
    pub computed: f64,
    pub check: GoldenCheck,
    pub pass: bool,
}

impl GoldenRow {
    pub fn new(quantity: impl Into<String>, expected: f64, computed: f64, check: GoldenCheck) -> Self {
        let pass = match check {
            GoldenCheck::Within(tol) => (computed - expected).abs() <= tol,
            GoldenCheck::AtLeast => computed >= expected,
            GoldenCheck::AtMost => computed <= expected,
        };
        Self {
            quantity: quantity.into(),
            expected,
            computed,
            check,
            pass,
        }
    }

    pub fn describe(&self) -> String {
        let want = match self.check {
            GoldenCheck::Within(tol) => format!("{} ± {}", sig(self.expected), sig(tol)),
            GoldenCheck::AtLeast => format!(">= {}", sig(self.expected)),
            GoldenCheck::AtMost => format!("<= {}", sig(self.expected)),
        };
        format!("{} = {} (want {want})", self.quantity, sig(self.computed))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub n: u8,
    pub title: String,
    pub rows: Vec<GoldenRow>,
    pub passed: bool,
}

impl ExampleReport {
    pub fn mismatches(&self) -> Vec<String> {
        self.rows.iter().filter(|r| !r.pass).map(GoldenRow::describe).collect()
    }
}

impl Output {
    pub fn new(command: &str, source: Option<String>, body: Body) -> Self {
        Self {
            schema: SCHEMA,
            command: command.to_string(),
            source,
            body,
        }
    }

    /// True when some top-level criterion is UNDECIDED.
    pub fn has_undecided(&self) -> bool {
        match &self.body {
            Body::Check(c) => c.reports.iter().any(|r| r.verdict == Verdict::Undecided),
            _ => false,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(src) = &self.source {
            let _ = writeln!(out, "# {}", src);
        }
        match &self.body {
            Body::Constants(c) => render_constants(&mut out, c),
            Body::Check(c) => render_check(&mut out, c),
            Body::Solve(s) => render_solve(&mut out, s),
            Body::Example(e) => render_example(&mut out, e),
        }
        out
    }
}

fn row(out: &mut String, name: &str, value: String) {
    let _ = writeln!(out, "  {name:<22} {value}");
}

fn render_constants(out: &mut String, c: &ConstantsBundle) {
    let _ = writeln!(out, "constants");
    row(out, "epsilon", c.epsilon.to_string());
    row(out, "omega", sig(c.omega));
    row(out, "[a, b]", format!("[{}, {}]", sig(c.a), sig(c.b)));
    row(out, "kernel sign", format!("{:?}", c.sign_class));
    row(out, "sup Phi", sig(c.phi_sup));
    row(out, "c(a,b)", sig(c.c));
    row(out, "c2", opt(c.c2));
    row(out, "c3", opt(c.c3));
    row(out, "cone c", sig(c.cone_c));
    row(out, "m", sig(c.m));
    row(out, "M(a,b)", sig(c.big_m));
    row(out, "m_S", sig(c.m_s));
    row(out, "M_S", sig(c.big_m_s));
    row(out, "c~", opt(c.c_tilde));
    row(out, "D", sig(c.d));
    row(out, "alpha[gamma]", sig(c.alpha_gamma));
    row(out, "alpha[delta]", sig(c.alpha_delta));
    row(out, "beta[gamma]", sig(c.beta_gamma));
    row(out, "beta[delta]", sig(c.beta_delta));
    row(out, "||gamma||", sig(c.gamma_norm));
    row(out, "||delta||", sig(c.delta_norm));
    row(out, "int_0^1 K_A g", sig(c.ka_integral));
    row(out, "int_0^1 K_B g", sig(c.kb_integral));
    row(out, "int_a^b K_A g", sig(c.ka_integral_ab));
    row(out, "int_a^b K_B g", sig(c.kb_integral_ab));
}

fn render_report(out: &mut String, r: &CriterionReport, depth: usize) {
    let pad = "  ".repeat(depth + 1);
    let cert = r.certificate.map_or_else(String::new, |c| {
        format!(
            "{} {} {}  margin {}  budget {}",
            sig(c.lhs),
            c.relation,
            sig(c.rhs),
            sig(c.margin),
            sig(c.budget)
        )
    });
    let sampled = if r.sampled { "  [sampled]" } else { "" };
    let _ = writeln!(out, "{pad}{:<24} {:<9} {cert}{sampled}", r.condition_id, r.verdict.to_string());
    for (k, v) in &r.inputs {
        let _ = writeln!(out, "{pad}    {k} = {}", sig(*v));
    }
    for n in &r.notes {
        let _ = writeln!(out, "{pad}    note: {n}");
    }
    for p in &r.parts {
        render_report(out, p, depth + 1);
    }
}

fn render_check(out: &mut String, c: &CheckReport) {
    let _ = writeln!(
        out,
        "cone c = {}, m_S = {}, M_S = {}, D = {}",
        sig(c.constants.cone_c),
        sig(c.constants.m_s),
        sig(c.constants.big_m_s),
        sig(c.constants.d)
    );
    if !c.rhos.is_empty() {
        let rs: Vec<String> = c.rhos.iter().map(|&r| sig(r)).collect();
        let _ = writeln!(out, "radii: {}", rs.join(", "));
    }
    let _ = writeln!(out, "criteria");
    for r in &c.reports {
        render_report(out, r, 0);
    }
    for s in &c.skipped {
        let _ = writeln!(out, "  skipped {}: {}", s.criterion, s.reason);
    }
    for w in &c.warnings {
        let _ = writeln!(out, "  warning: {w}");
    }
    if let Some((id, k)) = &c.strongest {
        let _ = writeln!(out, "strongest multiplicity case: {id}, at least {k} nonzero solution(s)");
    }
}

fn render_solve(out: &mut String, s: &SolveReport) {
    let ms = &s.multi_start;
    let _ = writeln!(
        out,
        "multi-start: {} runs, {} nontrivial cone fixed points, {} distinct",
        ms.runs.len(),
        ms.nontrivial_cone_fixed_points,
        ms.distinct_norms.len()
    );
    let _ = writeln!(out, "  {:>12} {:>10} {:>8} {:>12} {:>12} {:>6}", "start", "status", "iter", "residual", "norm", "cone");
    for r in &ms.runs {
        let _ = writeln!(
            out,
            "  {:>12} {:>10} {:>8} {:>12} {:>12} {:>6}",
            sig(r.start),
            format!("{:?}", r.status).to_uppercase(),
            r.iterations,
            sig(r.residual),
            sig(r.norm),
            r.in_cone
        );
    }
    for (i, d) in s.solutions.iter().enumerate() {
        let cc = &d.cone_check;
        let _ = writeln!(out, "solution {}", i + 1);
        row(out, "status", format!("{:?}", d.status).to_uppercase());
        row(out, "iterations", d.iterations.to_string());
        row(out, "residual", sig(d.residual));
        row(out, "band", format!("[{}, {}]", sig(d.band.0), sig(d.band.1)));
        row(out, "alpha[u], beta[u]", format!("{}, {}", sig(cc.alpha), sig(cc.beta)));
        row(out, "in cone", format!("{} (c = {})", cc.in_cone, sig(cc.c_used)));
    }
}

fn render_example(out: &mut String, e: &ExampleReport) {
    let _ = writeln!(out, "example {}: {}", e.n, e.title);
    for r in &e.rows {
        let _ = writeln!(out, "  {:<5} {}", if r.pass { "ok" } else { "DIFF" }, r.describe());
    }
    let _ = writeln!(out, "{}", if e.passed { "all pinned values reproduced" } else { "golden mismatch" });
}
