//! Nyström discretizations of the linear comparison operators
//!
//! ```text
//! L u(t)  = ∫_0^1 |k_S(t,s)| g(s) u(s) ds
//! L̃ u(t)  = ∫_a^b  k_S⁺(t,s) g(s) u(s) ds
//! L₊ u(t) = ∫_0^1  k_S⁺(t,s) g(s) u(s) ds
//! ```
//!
//! and their principal characteristic values by power iteration.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, Part, Weight};
use crate::kernel_s::AssembledKernel;
use crate::nystrom::{matvec, PanelGrid};
use crate::quadrature::Integrator;
use crate::scalar::{lit, Real};

/// Smallest node count accepted by [`discretize`].
pub const MIN_NODES: usize = 16;
/// Default cap on power iterations.
pub const MAX_POWER_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OperatorKind {
    L,
    Ltilde,
    Lplus,
}

impl OperatorKind {
    pub fn part(self) -> Part {
        match self {
            OperatorKind::L => Part::Abs,
            OperatorKind::Ltilde | OperatorKind::Lplus => Part::Plus,
        }
    }
}

/// Dense Nyström matrix of one of the comparison operators.
#[derive(Clone)]
pub struct NystromOperator<T: Real> {
    kind: OperatorKind,
    kernel: Arc<dyn Kernel<T>>,
    g: Weight<T>,
    a: T,
    b: T,
    grid: PanelGrid<T>,
    matrix: Vec<T>,
}

impl<T: Real> std::fmt::Debug for NystromOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NystromOperator")
            .field("kind", &self.kind)
            .field("n", &self.grid.len())
            .finish()
    }
}

/// Assembles `kind` for the kernel `k_S` with weight `g`.
pub fn discretize<T: Real>(
    kind: OperatorKind,
    ak: &AssembledKernel<T>,
    g: &Weight<T>,
    a: T,
    b: T,
    n: usize,
) -> Result<NystromOperator<T>> {
    NystromOperator::new(kind, Arc::new(ak.clone()), g.clone(), a, b, n)
}

impl<T: Real> NystromOperator<T> {
    /// Assembles `kind` for an arbitrary kernel. `[a, b]` is the integration
    /// range of `L̃` and is ignored by the other two operators beyond panel alignment.
    pub fn new(kind: OperatorKind, kernel: Arc<dyn Kernel<T>>, g: Weight<T>, a: T, b: T, n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::InvalidInput(format!("node count {n} below {MIN_NODES}")));
        }
        if !(T::zero() <= a && a < b && b <= T::one()) {
            return Err(Error::InvalidInput(format!("[{a}, {b}] is not a subinterval of [0, 1]")));
        }
        let (lo, hi) = match kind {
            OperatorKind::Ltilde => (a, b),
            _ => (T::zero(), T::one()),
        };
        let mut breaks = kernel.fixed_s_breaks();
        breaks.extend([a, b]);
        let grid = PanelGrid::new(lo, hi, n, &breaks);
        let matrix = grid.operator_matrix(kernel.as_ref(), kind.part(), &g);
        if let Some(v) = matrix.iter().find(|v| !v.is_finite()) {
            return Err(Error::QuadratureFailure {
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
                error: v.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            kind,
            kernel,
            g,
            a,
            b,
            grid,
            matrix,
        })
    }

    /// Same operator on a grid with twice as many nodes.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.kind, self.kernel.clone(), self.g.clone(), self.a, self.b, 2 * self.dim())
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn nodes(&self) -> &[T] {
        self.grid.nodes()
    }

    pub fn weights(&self) -> &[T] {
        self.grid.weights()
    }

    pub fn grid(&self) -> &PanelGrid<T> {
        &self.grid
    }

    /// Row-major `n × n` matrix.
    pub fn matrix(&self) -> &[T] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.matrix[i * self.dim() + j]
    }

    pub fn min_entry(&self) -> T {
        self.matrix.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        matvec(&self.matrix, v)
    }

    /// `(K v)(t)` for node values `v` and any `t ∈ [0, 1]`, using the same
    /// product rule as the matrix rows.
    pub fn apply_at(&self, v: &[T], t: T) -> T {
        let row = self.grid.operator_row(self.kernel.as_ref(), self.kind.part(), &self.g, t);
        row.iter().zip(v).map(|(&r, &x)| r * x).sum()
    }

    /// Rows of the matrix restricted to nodes in `[a, b]`, i.e. the operator
    /// `u ↦ ∫_a^b` seen through `L̃`'s grid. Debug view only.
    pub fn restricted_view(&self) -> Vec<Vec<T>> {
        let n = self.dim();
        let idx: Vec<usize> = (0..n)
            .filter(|&i| self.nodes()[i] >= self.a && self.nodes()[i] <= self.b)
            .collect();
        idx.iter()
            .map(|&i| idx.iter().map(|&j| self.matrix[i * n + j]).collect())
            .collect()
    }
}

/// Principal eigenpair of a Nyström operator.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralEstimate<T> {
    pub kind: OperatorKind,
    /// Spectral radius `r`.
    pub rho: T,
    /// Principal characteristic value `1/r`.
    pub mu: T,
    /// Node values, scaled to unit maximum.
    pub eigenfunction: Vec<T>,
    pub nodes: Vec<T>,
    pub node_count: usize,
    /// `|μ_n - μ_2n|`; NaN when no refinement was run.
    pub refinement_gap: T,
    pub iterations: usize,
    /// Final Collatz–Wielandt bracket `min (Av)/v ≤ r ≤ max (Av)/v`.
    pub cw_lower: T,
    pub cw_upper: T,
}

impl<T: Real> SpectralEstimate<T> {
    /// Nyström extension `φ(t) = μ (K φ)(t)` of the eigenfunction.
    pub fn eigenfunction_at(&self, op: &NystromOperator<T>, t: T) -> T {
        self.mu * op.apply_at(&self.eigenfunction, t)
    }

    /// `c‖φ‖ - min_{[a,b]} φ` over a uniform sample of `[0, 1]`; nonpositive when
    /// the eigenfunction lies in the cone with constant `c`.
    pub fn cone_defect(&self, op: &NystromOperator<T>, a: T, b: T, c: T, samples: usize) -> T {
        let vals: Vec<(T, T)> = crate::scalar::uniform_grid(T::zero(), T::one(), samples)
            .into_iter()
            .chain([a, b])
            .map(|t| (t, self.eigenfunction_at(op, t)))
            .collect();
        let norm = vals.iter().map(|v| v.1.abs()).fold(T::zero(), T::max);
        let min_ab = vals
            .iter()
            .filter(|v| v.0 >= a && v.0 <= b)
            .map(|v| v.1)
            .fold(T::infinity(), T::min);
        c * norm - min_ab
    }
}

/// Power iteration from the all-ones vector, stopping when successive
/// Rayleigh quotients agree to `tol` relative.
pub fn power_iteration<T: Real>(op: &NystromOperator<T>, tol: T, max_iter: usize) -> Result<SpectralEstimate<T>> {
    let n = op.dim();
    let tiny = T::min_positive_value().sqrt();
    let mut v = vec![T::one(); n];
    let mut prev = T::nan();
    for it in 1..=max_iter {
        let w = op.apply(&v);
        let vv: T = v.iter().map(|&x| x * x).sum();
        let rq = v.iter().zip(&w).map(|(&a, &b)| a * b).sum::<T>() / vv;
        let (mut lo, mut hi) = (T::infinity(), T::zero());
        for (&x, &y) in v.iter().zip(&w) {
            if x > tiny {
                lo = lo.min(y / x);
                hi = hi.max(y / x);
            }
        }
        let scale = w.iter().copied().fold(T::zero(), T::max);
        if scale <= T::zero() {
            return Ok(SpectralEstimate {
                kind: op.kind(),
                rho: T::zero(),
                mu: T::infinity(),
                eigenfunction: v,
                nodes: op.nodes().to_vec(),
                node_count: n,
                refinement_gap: T::nan(),
                iterations: it,
                cw_lower: T::zero(),
                cw_upper: T::zero(),
            });
        }
        v = w.into_iter().map(|x| x / scale).collect();
        let done = (rq - prev).abs() <= tol * rq.abs() || hi - lo <= tol * rq.abs();
        prev = rq;
        if done {
            return Ok(SpectralEstimate {
                kind: op.kind(),
                rho: rq,
                mu: T::one() / rq,
                eigenfunction: v,
                nodes: op.nodes().to_vec(),
                node_count: n,
                refinement_gap: T::nan(),
                iterations: it,
                cw_lower: lo,
                cw_upper: hi,
            });
        }
    }
    Err(Error::ConvergenceFailure { iterations: max_iter })
}

/// Principal value at the operator's node count, with the gap to a run at
/// twice as many nodes.
pub fn principal_value<T: Real>(op: &NystromOperator<T>, tol: T) -> Result<SpectralEstimate<T>> {
    let mut est = power_iteration(op, tol, MAX_POWER_ITERATIONS)?;
    let fine = power_iteration(&op.refined()?, tol, MAX_POWER_ITERATIONS)?;
    est.refinement_gap = (est.mu - fine.mu).abs();
    Ok(est)
}

/// The chain `M_S(a,b) ≥ μ(L̃) ≥ μ(L) ≥ m_S`.
#[derive(Debug, Clone, Serialize)]
pub struct MuOrdering<T> {
    pub big_m_s: T,
    pub mu_ltilde: T,
    pub mu_l: T,
    pub m_s: T,
    pub gap_ltilde: T,
    pub gap_l: T,
    pub holds: bool,
}

/// Relative slack allowed in each link of the ordering chain.
pub const ORDERING_TOL: f64 = 1e-6;

pub fn mu_ordering_check<T: Real>(
    ak: &AssembledKernel<T>,
    g: &Weight<T>,
    a: T,
    b: T,
    n: usize,
    q: &Integrator<T>,
) -> Result<MuOrdering<T>> {
    let (m_s, big_m_s) = ak.ms_constants(g, a, b, q)?;
    let tol = lit::<T>(1e-13).max(T::epsilon() * lit(16.0));
    let lt = principal_value(&discretize(OperatorKind::Ltilde, ak, g, a, b, n)?, tol)?;
    let l = principal_value(&discretize(OperatorKind::L, ak, g, a, b, n)?, tol)?;
    let slack = lit::<T>(ORDERING_TOL).max(T::epsilon().sqrt()) * big_m_s.abs();
    let holds = big_m_s + slack >= lt.mu && lt.mu + slack >= l.mu && l.mu + slack >= m_s;
    Ok(MuOrdering {
        big_m_s,
        mu_ltilde: lt.mu,
        mu_l: l.mu,
        m_s,
        gap_ltilde: lt.refinement_gap,
        gap_l: l.refinement_gap,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{ShiftSign, ShiftedKernel};
    use crate::kernel::FnKernel;

    fn op(k: impl Kernel<f64> + 'static, kind: OperatorKind, n: usize) -> NystromOperator<f64> {
        NystromOperator::new(kind, Arc::new(k), Weight::One, 0.0, 1.0, n).unwrap()
    }

    #[test]
    fn constant_kernel_has_unit_radius() {
        let o = op(FnKernel::new(|_, _| 1.0, false), OperatorKind::L, 40);
        for r in o.matrix().chunks(o.dim()) {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
        let e = principal_value(&o, 1e-14).unwrap();
        assert!((e.rho - 1.0).abs() < 1e-14 && (e.mu - 1.0).abs() < 1e-14);
    }

    #[test]
    fn separable_kernel_matches_rank_one_value() {
        // ρ = ∫ φ ψ g with φ = e^t, ψ = 1 + s², g = s.
        let k = FnKernel::new(|t: f64, s: f64| t.exp() * (1.0 + s * s), false);
        let o = NystromOperator::new(OperatorKind::L, Arc::new(k), Weight::Linear, 0.0, 1.0, 40).unwrap();
        let e = principal_value(&o, 1e-14).unwrap();
        // ∫ s e^s ds = 1 and ∫ s³ e^s ds = 6 - 2e
        let exact = 7.0 - 2.0 * std::f64::consts::E;
        assert!((e.rho - exact).abs() < 1e-8, "{} vs {exact}", e.rho);
    }

    #[test]
    fn rank_one_matrix_power_iteration() {
        let k = FnKernel::new(|t: f64, s: f64| (1.0 + t) * (2.0 - s), false);
        let o = op(k, OperatorKind::Lplus, 20);
        let e = power_iteration(&o, 1e-15, 100).unwrap();
        // ∫ (1 + s)(2 - s) ds = 13/6
        assert!((e.rho - 13.0 / 6.0).abs() < 1e-13);
        assert!(e.cw_lower <= e.rho + 1e-13 && e.rho <= e.cw_upper + 1e-13);
    }

    #[test]
    fn neumann_kernel_value_equals_lower_bound() {
        // Row sums are constant, so μ(L) = m = ω² = 1.
        let k = ShiftedKernel::<f64>::new(ShiftSign::Minus, 1.0).unwrap();
        let o = op(k, OperatorKind::L, 100);
        let e = principal_value(&o, 1e-14).unwrap();
        assert!((e.mu - 1.0).abs() < 1e-12);
        assert!(e.eigenfunction.iter().all(|&x| x >= 0.0));
        assert!(e.refinement_gap < 1e-12);
    }

    #[test]
    fn sign_changing_kernel_operators_are_nonnegative() {
        let k = ShiftedKernel::<f64>::new(ShiftSign::Plus, 7.0 * std::f64::consts::PI / 12.0).unwrap();
        let k: Arc<dyn Kernel<f64>> = Arc::new(k);
        for kind in [OperatorKind::L, OperatorKind::Ltilde, OperatorKind::Lplus] {
            let o = NystromOperator::new(kind, k.clone(), Weight::One, 0.25, 0.75, 100).unwrap();
            assert!(o.min_entry() >= 0.0);
            let e = principal_value(&o, 1e-13).unwrap();
            assert!(e.refinement_gap < 1e-4);
            assert!(e.cw_lower <= e.rho * (1.0 + 1e-12) && e.rho <= e.cw_upper * (1.0 + 1e-12));
        }
    }

    #[test]
    fn too_few_nodes_rejected() {
        let r = NystromOperator::new(
            OperatorKind::L,
            Arc::new(FnKernel::new(|_: f64, _: f64| 1.0, false)),
            Weight::One,
            0.0,
            1.0,
            8,
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }
}
