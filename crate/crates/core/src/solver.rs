//! Nyström discretization of `Tu = γα[u] + δβ[u] + ∫ k g f(·,u)` and of the
//! folded operator `Su = ∫ k_S g f(·,u)`, damped fixed-point iteration with
//! optional Anderson mixing, and cone-membership checks.
//!
//! Node values are interpolated panel by panel with the Lagrange polynomial
//! through the panel's Gauss nodes; `α[u]`, `β[u]` and the band are computed
//! from that interpolant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Kernel, Part};
use crate::measures::StieltjesMeasure;
use crate::nystrom::{matvec, PanelGrid};
use crate::problem::{Analysis, Settings};
use crate::report::{float, float_vec};
use crate::scalar::{lit, to_f64, uniform_grid, Real};

/// Iterates whose max-norm exceeds this are declared divergent.
pub const DIVERGENCE_BOUND: f64 = 1e6;
/// Slack for the cone predicates on computed values.
pub const MEMBERSHIP_SLACK: f64 = 1e-10;
/// Max-norm below which a fixed point counts as trivial.
pub const TRIVIAL_NORM: f64 = 1e-8;
/// Points per unit length used to sample the interpolant for the band and cone checks.
const CHECK_POINTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Converged,
    Diverged,
    Stalled,
}

/// The three cone predicates at grid resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeCheck {
    pub in_cone: bool,
    #[serde(with = "float")]
    pub c_used: f64,
    #[serde(with = "float")]
    pub min_ab: f64,
    #[serde(with = "float")]
    pub norm: f64,
    #[serde(with = "float")]
    pub alpha: f64,
    #[serde(with = "float")]
    pub beta: f64,
    /// `(α[u] ≥ 0, β[u] ≥ 0)`.
    pub functional_signs: (bool, bool),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSolution {
    #[serde(with = "float_vec")]
    pub nodes: Vec<f64>,
    #[serde(with = "float_vec")]
    pub values: Vec<f64>,
    /// `max_i |u_i - (Tu)_i|`.
    #[serde(with = "float")]
    pub residual: f64,
    pub status: Status,
    pub iterations: usize,
    pub cone_check: ConeCheck,
    /// `(min_{[a,b]} u, max_{[0,1]} u)`.
    pub band: (f64, f64),
}

impl DiscreteSolution {
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Converged, in the cone and not identically zero.
    pub fn is_nontrivial_cone_fixed_point(&self) -> bool {
        self.status == Status::Converged && self.cone_check.in_cone && self.norm() > TRIVIAL_NORM
    }
}

/// Which operator the fixed-point iteration targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    T,
    S,
}

/// Node values, interpolation weights and operator matrices of a problem.
pub struct Discretization<'a, T: Real> {
    an: &'a Analysis<T>,
    grid: PanelGrid<T>,
    /// Rows of `u ↦ ∫ k(t,s) g(s) u(s) ds` at the nodes.
    a_matrix: Vec<T>,
    s_matrix: std::sync::OnceLock<Vec<T>>,
    gamma: Vec<T>,
    delta: Vec<T>,
    alpha_w: Vec<T>,
    beta_w: Vec<T>,
}

fn measure_weights<T: Real>(grid: &PanelGrid<T>, mu: &StieltjesMeasure<T>) -> Vec<T> {
    let mut w = vec![T::zero(); grid.len()];
    for &(x, a) in mu.atoms() {
        for (wi, pi) in w.iter_mut().zip(grid.point_weights(x)) {
            *wi = *wi + a * pi;
        }
    }
    if let Some(d) = mu.density() {
        let h = |s: T| (d.f)(s);
        for (wi, di) in w.iter_mut().zip(grid.functional_weights(&h, &d.breaks)) {
            *wi = *wi + di;
        }
    }
    w
}

impl<'a, T: Real> Discretization<'a, T> {
    pub fn new(an: &'a Analysis<T>, n: usize) -> Result<Self> {
        if n < 20 {
            return Err(Error::InvalidInput(format!("need at least 20 nodes, got {n}")));
        }
        let (a, b) = an.interval();
        let bd = &an.spec().boundary;
        let mut breaks = an.kernel().fixed_s_breaks();
        breaks.extend([a, b]);
        breaks.extend(bd.alpha.breaks());
        breaks.extend(bd.beta.breaks());
        breaks.extend(an.assembled().fixed_s_breaks());
        let grid = PanelGrid::new(T::zero(), T::one(), n, &breaks);
        let a_matrix = grid.operator_matrix(an.kernel(), Part::Full, an.g());
        if a_matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::QuadratureFailure {
                lo: 0.0,
                hi: 1.0,
                error: f64::NAN,
            });
        }
        let (gamma, alpha_w) = if bd.gamma_active() {
            (
                grid.nodes().iter().map(|&t| bd.gamma.eval(t)).collect(),
                measure_weights(&grid, &bd.alpha),
            )
        } else {
            (vec![T::zero(); grid.len()], vec![T::zero(); grid.len()])
        };
        let (delta, beta_w) = if bd.delta_active() {
            (
                grid.nodes().iter().map(|&t| bd.delta.eval(t)).collect(),
                measure_weights(&grid, &bd.beta),
            )
        } else {
            (vec![T::zero(); grid.len()], vec![T::zero(); grid.len()])
        };
        Ok(Self {
            an,
            grid,
            a_matrix,
            s_matrix: std::sync::OnceLock::new(),
            gamma,
            delta,
            alpha_w,
            beta_w,
        })
    }

    pub fn analysis(&self) -> &Analysis<T> {
        self.an
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        self.grid.nodes()
    }

    pub fn grid(&self) -> &PanelGrid<T> {
        &self.grid
    }

    /// `α[u]` of the interpolant through the node values.
    pub fn alpha(&self, u: &[T]) -> T {
        dot(&self.alpha_w, u)
    }

    /// `β[u]` of the interpolant through the node values.
    pub fn beta(&self, u: &[T]) -> T {
        dot(&self.beta_w, u)
    }

    pub fn interpolate(&self, u: &[T], t: T) -> T {
        self.grid.interpolate(u, t)
    }

    fn nonlinear(&self, u: &[T]) -> Vec<T> {
        let f = self.an.f();
        self.nodes().iter().zip(u).map(|(&s, &v)| f.eval(s, v)).collect()
    }

    /// `Fu = ∫ k g f(·,u)` at the nodes.
    pub fn apply_f(&self, u: &[T]) -> Vec<T> {
        matvec(&self.a_matrix, &self.nonlinear(u))
    }

    /// `Tu` at the nodes.
    pub fn apply_t(&self, u: &[T]) -> Vec<T> {
        let (al, be) = (self.alpha(u), self.beta(u));
        let fu = self.apply_f(u);
        fu.iter()
            .zip(self.gamma.iter().zip(&self.delta))
            .map(|(&v, (&g, &d))| g * al + d * be + v)
            .collect()
    }

    fn s_matrix(&self) -> &[T] {
        self.s_matrix
            .get_or_init(|| self.grid.operator_matrix(self.an.assembled(), Part::Full, self.an.g()))
    }

    /// `Su = ∫ k_S g f(·,u)` at the nodes.
    pub fn apply_s(&self, u: &[T]) -> Vec<T> {
        matvec(self.s_matrix(), &self.nonlinear(u))
    }

    pub fn apply(&self, target: Target, u: &[T]) -> Vec<T> {
        match target {
            Target::T => self.apply_t(u),
            Target::S => self.apply_s(u),
        }
    }

    pub fn residual(&self, target: Target, u: &[T]) -> T {
        max_diff(u, &self.apply(target, u))
    }

    /// Cone predicates of the interpolant, with `c` the cone constant.
    pub fn verify_membership(&self, u: &[T]) -> ConeCheck {
        let c = self.an.cone_c();
        let (min_ab, _, norm) = self.band(u);
        let (al, be) = (self.alpha(u), self.beta(u));
        let slack = lit::<T>(MEMBERSHIP_SLACK) * norm.max(T::one());
        let signs = (al >= -slack, be >= -slack);
        ConeCheck {
            in_cone: min_ab >= c * norm - slack && signs.0 && signs.1 && u.iter().all(|v| v.is_finite()),
            c_used: to_f64(c),
            min_ab: to_f64(min_ab),
            norm: to_f64(norm),
            alpha: to_f64(al),
            beta: to_f64(be),
            functional_signs: signs,
        }
    }

    /// `(min_{[a,b]} u, max_{[0,1]} u, max_{[0,1]} |u|)` from nodes and a fine sample of the interpolant.
    fn band(&self, u: &[T]) -> (T, T, T) {
        let (a, b) = self.an.interval();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        let mut norm = T::zero();
        let mut visit = |t: T, v: T| {
            if t >= a && t <= b {
                lo = lo.min(v);
            }
            hi = hi.max(v);
            norm = norm.max(v.abs());
        };
        for (&t, &v) in self.nodes().iter().zip(u) {
            visit(t, v);
        }
        for t in uniform_grid(T::zero(), T::one(), CHECK_POINTS) {
            visit(t, self.interpolate(u, t));
        }
        for t in uniform_grid(a, b, CHECK_POINTS) {
            visit(t, self.interpolate(u, t));
        }
        (lo, hi, norm)
    }

    fn package(&self, u: &[T], residual: T, status: Status, iterations: usize) -> DiscreteSolution {
        let (lo, hi, _) = self.band(u);
        DiscreteSolution {
            nodes: self.nodes().iter().map(|&x| to_f64(x)).collect(),
            values: u.iter().map(|&x| to_f64(x)).collect(),
            residual: to_f64(residual),
            status,
            iterations,
            cone_check: self.verify_membership(u),
            band: (to_f64(lo), to_f64(hi)),
        }
    }

    /// Damped iteration `u ← (1-θ)u + θ·Tu` (or `S`), with Anderson mixing of
    /// depth `settings.anderson` when set.
    pub fn solve_fixed_point(&self, target: Target, u0: &[T], settings: &Settings) -> Result<DiscreteSolution> {
        if u0.len() != self.len() {
            return Err(Error::InvalidInput(format!(
                "initial guess has {} values, grid has {}",
                u0.len(),
                self.len()
            )));
        }
        if u0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("initial guess is not finite".into()));
        }
        let theta = settings.damping;
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidInput(format!("damping {theta} outside (0, 1]")));
        }
        let theta = lit::<T>(theta);
        let tol = lit::<T>(settings.tol);
        let bound = lit::<T>(DIVERGENCE_BOUND);
        let mut mixer = settings.anderson.filter(|&m| m > 0).map(Anderson::new);
        let mut u = u0.to_vec();
        for it in 0..=settings.max_iter {
            let tu = self.apply(target, &u);
            let res = max_diff(&u, &tu);
            if !res.is_finite() || sup_norm(&tu) > bound {
                return Ok(self.package(&u, res, Status::Diverged, it));
            }
            if res < tol {
                return Ok(self.package(&u, res, Status::Converged, it));
            }
            if it == settings.max_iter {
                return Ok(self.package(&u, res, Status::Stalled, it));
            }
            let damped: Vec<T> = u
                .iter()
                .zip(&tu)
                .map(|(&x, &y)| (T::one() - theta) * x + theta * y)
                .collect();
            u = match mixer.as_mut() {
                Some(m) => m.step(&u, damped),
                None => damped,
            };
            if sup_norm(&u) > bound || u.iter().any(|v| !v.is_finite()) {
                return Ok(self.package(&u, res, Status::Diverged, it + 1));
            }
        }
        unreachable!("loop returns at max_iter")
    }

    /// Runs from `settings.starts` constant functions `κ` in the cone, log-spaced on `[10⁻², 10²]`.
    pub fn multi_start(&self, target: Target, settings: &Settings) -> Result<MultiStart> {
        let starts: Vec<T> = crate::criteria::log_spaced(lit(1e-2), lit(1e2), settings.starts.max(1));
        let runs = starts
            .par_iter()
            .map(|&k| {
                let u0 = vec![k; self.len()];
                self.solve_fixed_point(target, &u0, settings).map(|s| (to_f64(k), s))
            })
            .collect::<Result<Vec<_>>>()?;
        let found: Vec<f64> = runs
            .iter()
            .map(|(_, s)| s)
            .filter(|s| s.is_nontrivial_cone_fixed_point())
            .map(DiscreteSolution::norm)
            .collect();
        let mut distinct: Vec<f64> = Vec::new();
        for &n in &found {
            if !distinct.iter().any(|&d| (d - n).abs() <= 1e-6 * d.max(1.0)) {
                distinct.push(n);
            }
        }
        distinct.sort_by(f64::total_cmp);
        Ok(MultiStart {
            runs: runs
                .into_iter()
                .map(|(start, s)| RunSummary {
                    start,
                    status: s.status,
                    iterations: s.iterations,
                    residual: s.residual,
                    norm: s.norm(),
                    in_cone: s.cone_check.in_cone,
                })
                .collect(),
            nontrivial_cone_fixed_points: found.len(),
            distinct_norms: distinct,
        })
    }
}

/// Outcome of one multi-start run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub start: f64,
    pub status: Status,
    pub iterations: usize,
    #[serde(with = "float")]
    pub residual: f64,
    #[serde(with = "float")]
    pub norm: f64,
    pub in_cone: bool,
}

/// Multi-start evidence. Finding nothing is not a proof of nonexistence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStart {
    pub runs: Vec<RunSummary>,
    pub nontrivial_cone_fixed_points: usize,
    /// Max-norms of the distinct nontrivial cone fixed points found.
    pub distinct_norms: Vec<f64>,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn sup_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn max_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| {
        let d = (x - y).abs();
        if d.is_nan() {
            T::nan()
        } else {
            m.max(d)
        }
    })
}

/// Type-II Anderson mixing on the damped map `G(u)`.
struct Anderson<T> {
    depth: usize,
    xs: Vec<Vec<T>>,
    gs: Vec<Vec<T>>,
}

impl<T: Real> Anderson<T> {
    fn new(depth: usize) -> Self {
        Self {
            depth,
            xs: Vec::new(),
            gs: Vec::new(),
        }
    }

    /// Next iterate from the current `u` and `G(u)`.
    fn step(&mut self, u: &[T], g: Vec<T>) -> Vec<T> {
        self.xs.push(u.to_vec());
        self.gs.push(g.clone());
        if self.xs.len() > self.depth + 1 {
            self.xs.remove(0);
            self.gs.remove(0);
        }
        let m = self.xs.len() - 1;
        if m == 0 {
            return g;
        }
        let res: Vec<Vec<T>> = self
            .xs
            .iter()
            .zip(&self.gs)
            .map(|(x, g)| g.iter().zip(x).map(|(&a, &b)| a - b).collect())
            .collect();
        let last = &res[m];
        // Columns ΔF_j = f_{j+1} - f_j; solve min ‖f_m - ΔF γ‖ by normal equations.
        let df: Vec<Vec<T>> = (0..m)
            .map(|j| res[j + 1].iter().zip(&res[j]).map(|(&a, &b)| a - b).collect())
            .collect();
        let mut ata = vec![T::zero(); m * m];
        let mut atb = vec![T::zero(); m];
        for i in 0..m {
            atb[i] = dot(&df[i], last);
            for j in 0..m {
                ata[i * m + j] = dot(&df[i], &df[j]);
            }
        }
        let scale = (0..m).map(|i| ata[i * m + i]).fold(T::zero(), T::max);
        for i in 0..m {
            ata[i * m + i] = ata[i * m + i] + scale * lit(1e-10);
        }
        let Some(coef) = solve_dense(ata, atb, m) else {
            self.xs.clear();
            self.gs.clear();
            return g;
        };
        let mut out = g;
        for (j, &cj) in coef.iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate() {
                *o = *o - cj * (self.gs[j + 1][k] - self.gs[j][k]);
            }
        }
        out
    }
}

/// Gaussian elimination with partial pivoting.
fn solve_dense<T: Real>(mut a: Vec<T>, mut b: Vec<T>, n: usize) -> Option<Vec<T>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().partial_cmp(&a[j * n + col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if a[piv * n + col].abs() <= T::min_positive_value() {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for r in col + 1..n {
            let factor = a[r * n + col] / a[col * n + col];
            for k in col..n {
                a[r * n + k] = a[r * n + k] - factor * a[col * n + k];
            }
            b[r] = b[r] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let s: T = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
