//! The four pipeline stages behind the subcommands.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use clap::ValueEnum;
use hammerstein_core::criteria::{bump_threshold, eigen_menu, lplus_condition, multiplicity_menu, nonexistence};
use hammerstein_core::scenarios::{example2_d_at_pi, example2_d_root, example3_nonexistence_bound};
use hammerstein_core::solver::Discretization;
use hammerstein_core::{Analysis, CriterionReport, DiscreteSolution, Mode, Status, Target};

use crate::error::CliError;
use crate::output::{CheckReport, ExampleReport, GoldenCheck, GoldenRow, Skipped, SolveReport};
use crate::problem_file::ProblemFile;

/// Tolerance for values published to three decimals.
pub const GOLDEN_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Menu {
    /// Multiplicity cases from index conditions at the given radii.
    #[value(name = "S")]
    S,
    /// Existence from `f⁰`, `f^∞` against the principal characteristic values.
    #[value(name = "H")]
    H,
    /// Existence from one radius condition and one limit.
    #[value(name = "Z")]
    Z,
    /// Existence from two radius conditions.
    #[value(name = "T")]
    T,
    /// Nonexistence certificates.
    #[value(name = "noext")]
    Noext,
    /// Positivity of the kernel functionals.
    #[value(name = "lplus")]
    Lplus,
}

impl Menu {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Menu::from_str(s, true).map_err(|_| CliError::Usage(format!("unknown menu `{s}`")))
    }

    fn prefix(self) -> Option<char> {
        match self {
            Menu::H => Some('H'),
            Menu::Z => Some('Z'),
            Menu::T => Some('T'),
            _ => None,
        }
    }
}

/// Command-line adjustments applied on top of a problem file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub nodes: Option<usize>,
    pub tol: Option<f64>,
    pub starts: Option<usize>,
    pub params: BTreeMap<String, f64>,
}

impl Overrides {
    pub fn apply(&self, pf: &mut ProblemFile) {
        let s = &mut pf.problem.settings;
        if let Some(n) = self.nodes {
            s.nodes = n;
        }
        if let Some(t) = self.tol {
            s.tol = t;
        }
        if let Some(k) = self.starts {
            s.starts = k;
        }
    }

    pub fn load(&self, path: &str) -> Result<ProblemFile, CliError> {
        let mut pf = ProblemFile::load(path, &self.params)?;
        self.apply(&mut pf);
        Ok(pf)
    }
}

fn analyze(pf: &ProblemFile) -> Result<Analysis<f64>, CliError> {
    pf.problem.analyze().map_err(|e| pf.locate(e))
}

pub fn constants(pf: &ProblemFile) -> Result<hammerstein_core::ConstantsBundle, CliError> {
    Ok(analyze(pf)?.constants())
}

/// Runs the requested menus. Without an explicit menu every applicable one
/// runs and those that cannot be evaluated are listed as skipped.
pub fn check(pf: &ProblemFile, rhos: &[f64], menus: &[Menu]) -> Result<CheckReport, CliError> {
    let an = analyze(pf)?;
    let rhos: Vec<f64> = if rhos.is_empty() { pf.check.rhos.clone() } else { rhos.to_vec() };
    let mut menus = menus.to_vec();
    if menus.is_empty() {
        menus = pf.check.menu.iter().map(|m| Menu::parse(m)).collect::<Result<_, _>>()?;
    }
    let explicit = !menus.is_empty();
    if !explicit {
        if !rhos.is_empty() {
            menus.push(Menu::S);
        }
        menus.extend([Menu::H, Menu::Z, Menu::T, Menu::Noext, Menu::Lplus]);
    }

    let mut reports: Vec<CriterionReport> = Vec::new();
    let mut skipped = Vec::new();
    let mut strongest = None;
    let mut eigen: Option<Result<Vec<CriterionReport>, hammerstein_core::Error>> = None;
    for menu in menus {
        let name = menu.to_possible_value().map_or_else(String::new, |v| v.get_name().to_string());
        let result: Result<Vec<CriterionReport>, hammerstein_core::Error> = match menu {
            Menu::S if rhos.is_empty() => {
                return Err(CliError::Usage("the S menu needs radii (--rhos a,b,...)".into()));
            }
            Menu::S => multiplicity_menu(&an, &rhos, Mode::Full).map(|m| {
                skipped.extend(m.skipped.iter().map(|(id, why)| Skipped {
                    criterion: id.clone(),
                    reason: why.clone(),
                }));
                strongest = m.strongest.clone();
                m.cases
            }),
            Menu::H | Menu::Z | Menu::T => {
                let all = eigen.get_or_insert_with(|| eigen_menu(&an, &rhos));
                let p = menu.prefix();
                all.clone()
                    .map(|rs| rs.into_iter().filter(|r| r.condition_id.chars().next() == p).collect())
            }
            Menu::Noext => nonexistence(&an),
            Menu::Lplus => lplus_condition(&an).map(|r| vec![r]),
        };
        match result {
            Ok(rs) => reports.extend(rs),
            Err(e) if explicit => return Err(pf.locate(e)),
            Err(e) => skipped.push(Skipped {
                criterion: name,
                reason: e.to_string(),
            }),
        }
    }
    let (a, b) = an.interval();
    Ok(CheckReport {
        constants: an.constants(),
        rhos,
        reports,
        skipped,
        warnings: an.f().limit_warnings(a, b),
        strongest,
    })
}

/// Multi-start fixed-point iteration. Every distinct nontrivial cone fixed
/// point is re-solved in full; if there is none, the run from `u = 0` is reported.
pub fn solve(pf: &ProblemFile) -> Result<SolveReport, CliError> {
    let an = analyze(pf)?;
    let settings = pf.problem.settings.clone();
    let disc = Discretization::new(&an, settings.nodes).map_err(|e| pf.locate(e))?;
    let ms = disc.multi_start(Target::T, &settings).map_err(|e| pf.locate(e))?;
    let mut solutions: Vec<DiscreteSolution> = Vec::new();
    for &norm in &ms.distinct_norms {
        let run = ms.runs.iter().find(|r| {
            r.status == Status::Converged && r.in_cone && (r.norm - norm).abs() <= 1e-6 * norm.max(1.0)
        });
        if let Some(r) = run {
            let u0 = vec![r.start; disc.len()];
            solutions.push(disc.solve_fixed_point(Target::T, &u0, &settings).map_err(|e| pf.locate(e))?);
        }
    }
    if solutions.is_empty() {
        let u0 = vec![0.0; disc.len()];
        solutions.push(disc.solve_fixed_point(Target::T, &u0, &settings).map_err(|e| pf.locate(e))?);
    }
    Ok(SolveReport {
        settings,
        multi_start: ms,
        solutions,
    })
}

pub const EXAMPLE_FILES: [(&str, &str); 3] = [
    ("scenarios/example1.toml", include_str!("../scenarios/example1.toml")),
    ("scenarios/example2.toml", include_str!("../scenarios/example2.toml")),
    ("scenarios/example3.toml", include_str!("../scenarios/example3.toml")),
];

/// A bundled scenario file by number.
pub fn bundled(n: u8, ov: &Overrides) -> Result<ProblemFile, CliError> {
    let (path, text) = EXAMPLE_FILES
        .get(usize::from(n).wrapping_sub(1))
        .ok_or_else(|| CliError::Usage(format!("there are examples 1, 2 and 3, not {n}")))?;
    let mut pf = ProblemFile::parse(path, text, &ov.params)?;
    ov.apply(&mut pf);
    Ok(pf)
}

/// Recomputes every published number of a bundled scenario and diffs it against the pinned value.
pub fn example(n: u8, ov: &Overrides) -> Result<ExampleReport, CliError> {
    let pf = bundled(n, ov)?;
    let close = GoldenCheck::Within(GOLDEN_TOL);
    let rows = match n {
        1 => {
            let an = analyze(&pf)?;
            vec![
                GoldenRow::new("c(1/4,3/4)", 0.195, an.c1(), close),
                GoldenRow::new("M(1/4,3/4)", 7.029, an.big_m(), close),
                GoldenRow::new("f^_0", 10.289, bump_threshold(an.cone_c(), an.big_m()), close),
            ]
        }
        2 => vec![
            GoldenRow::new("D(pi)", 1.0 - 1.0 / (4.0 * PI), example2_d_at_pi()?, close),
            GoldenRow::new("omega_0", 1.507, example2_d_root()?, close),
        ],
        _ => {
            let an = analyze(&pf)?;
            let sol = solve(&pf)?;
            let best = sol.solutions.iter().find(|s| s.is_nontrivial_cone_fixed_point());
            let (lo, hi) = best.map_or((f64::NAN, f64::NAN), |s| s.band);
            vec![
                GoldenRow::new("c", 0.648, an.c1(), close),
                GoldenRow::new("m", 1.859, an.m(), close),
                GoldenRow::new("M", 2.163, an.big_m(), close),
                GoldenRow::new("m_S", 1.859, an.m_s(), close),
                GoldenRow::new("M_S", 2.163, an.big_m_s(), close),
                GoldenRow::new("nonexistence threshold", 0.797, example3_nonexistence_bound(), close),
                GoldenRow::new("min_[a,b] u", 0.064, lo, GoldenCheck::AtLeast),
                GoldenRow::new("max u", 0.16, hi, GoldenCheck::AtMost),
            ]
        }
    };
    let title = pf.name.clone().unwrap_or_default();
    Ok(ExampleReport {
        n,
        title,
        passed: rows.iter().all(|r| r.pass),
        rows,
    })
}
