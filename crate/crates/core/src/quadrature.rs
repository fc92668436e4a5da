//! Gauss–Legendre rules and the split-aware adaptive composite integrator.
//!
//! The kernels handled here are continuous but only piecewise smooth: the
//! Green's functions have a derivative jump on the diagonal `s = t`, and
//! positive/negative parts add kinks wherever the kernel changes sign. The
//! integrator therefore takes explicit breakpoints and integrates each smooth
//! piece separately, halving panels until the local error estimate is met.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{effective_tol, lit, to_f64, Real};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds the rule by Newton iteration on the three-term Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let (x, w) = legendre_f64(n);
        Self {
            nodes: x.into_iter().map(lit).collect(),
            weights: w.into_iter().map(lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Nodes and weights mapped affinely to `[lo, hi]`.
    pub fn mapped(&self, lo: T, hi: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (hi - lo) * lit(0.5);
        let mid = (hi + lo) * lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }

    /// Single-panel estimate of `∫_lo^hi f`.
    pub fn apply<F: Fn(T) -> T + ?Sized>(&self, f: &F, lo: T, hi: T) -> T {
        self.mapped(lo, hi).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Settings of the adaptive composite integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel.
    pub nodes: usize,
    /// Relative tolerance of the halving test.
    pub rel_tol: f64,
    /// Absolute tolerance per unit length, guards integrals that vanish.
    pub abs_tol: f64,
    /// Maximum number of halvings of any initial piece.
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: 64,
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_depth: 30,
        }
    }
}

/// Adaptive composite Gauss–Legendre integrator. Cheap to clone.
#[derive(Debug, Clone)]
pub struct Integrator<T> {
    rule: Arc<GaussLegendre<T>>,
    config: QuadratureConfig,
}

impl<T: Real> Default for Integrator<T> {
    fn default() -> Self {
        Self::new(QuadratureConfig::default())
    }
}

impl<T: Real> Integrator<T> {
    pub fn new(config: QuadratureConfig) -> Self {
        Self {
            rule: Arc::new(GaussLegendre::new(config.nodes.max(2))),
            config,
        }
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.config
    }

    pub fn rule(&self) -> &GaussLegendre<T> {
        &self.rule
    }

    /// `∫_lo^hi f`, halving panels until the local error estimate is met.
    pub fn integrate<F: Fn(T) -> T + ?Sized>(&self, f: &F, lo: T, hi: T) -> Result<T> {
        if hi == lo {
            return Ok(T::zero());
        }
        if hi < lo {
            return self.integrate(f, hi, lo).map(|v| -v);
        }
        let whole = self.rule.apply(f, lo, hi);
        let rel: T = effective_tol(self.config.rel_tol);
        let abs: T = effective_tol::<T>(self.config.abs_tol) / (hi - lo).max(T::one());
        let floor = (rel * whole.abs()).max(abs * (hi - lo));
        self.refine(f, lo, hi, whole, 0, rel, floor / (hi - lo))
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<F: Fn(T) -> T + ?Sized>(
        &self,
        f: &F,
        lo: T,
        hi: T,
        whole: T,
        depth: u32,
        rel: T,
        density: T,
    ) -> Result<T> {
        let mid = (lo + hi) * lit(0.5);
        let left = self.rule.apply(f, lo, mid);
        let right = self.rule.apply(f, mid, hi);
        let sum = left + right;
        let err = (sum - whole).abs();
        if !sum.is_finite() {
            return Err(Error::QuadratureFailure {
                lo: to_f64(lo),
                hi: to_f64(hi),
                error: f64::INFINITY,
            });
        }
        if err <= rel * sum.abs() || err <= density * (hi - lo) {
            return Ok(sum);
        }
        if depth >= self.config.max_depth {
            return Err(Error::QuadratureFailure {
                lo: to_f64(lo),
                hi: to_f64(hi),
                error: to_f64(err),
            });
        }
        Ok(self.refine(f, lo, mid, left, depth + 1, rel, density)?
            + self.refine(f, mid, hi, right, depth + 1, rel, density)?)
    }

    /// `∫_lo^hi f` with the domain split at every breakpoint inside `(lo, hi)`.
    pub fn integrate_split<F: Fn(T) -> T + ?Sized>(
        &self,
        f: &F,
        lo: T,
        hi: T,
        breaks: &[T],
    ) -> Result<T> {
        let pieces = split_points(lo, hi, breaks);
        let mut total = T::zero();
        for w in pieces.windows(2) {
            total = total + self.integrate(f, w[0], w[1])?;
        }
        Ok(total)
    }
}

/// Sorted, deduplicated `[lo, ..breaks inside (lo, hi).., hi]`.
pub fn split_points<T: Real>(lo: T, hi: T, breaks: &[T]) -> Vec<T> {
    let span = (hi - lo).abs();
    let eps = span * T::epsilon() * lit(16.0);
    let mut pts: Vec<T> = Vec::with_capacity(breaks.len() + 2);
    pts.push(lo);
    pts.extend(breaks.iter().copied().filter(|&b| b > lo + eps && b < hi - eps));
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    pts.dedup_by(|a, b| (*a - *b).abs() <= eps);
    pts
}
