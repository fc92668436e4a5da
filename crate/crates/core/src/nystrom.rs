//! Composite Gauss–Legendre panels and product-integrated Nyström matrices.
//!
//! A row `t` of the discretized operator `u ↦ ∫ κ(t,s) g(s) u(s) ds` is built
//! panel by panel. On panels where `s ↦ κ(t,s)` is smooth the plain Nyström
//! weight `w_j κ(t,s_j) g(s_j)` is used. Panels containing the diagonal, a
//! kink of the kernel or (for `κ⁺`, `|κ|`) a sign change are split there and
//! integrated against the panel's Lagrange basis with a finer rule.

use rayon::prelude::*;

use crate::kernel::{Kernel, Part, Weight};
use crate::quadrature::{split_points, GaussLegendre};
use crate::scalar::{lit, Real};
use crate::search::sign_changes;

/// Gauss–Legendre nodes per panel.
pub const PANEL_ORDER: usize = 10;
/// Nodes of the sub-rule used on split panels.
const SUB_ORDER: usize = 20;
/// Samples per panel when scanning for sign changes.
const SIGN_SAMPLES: usize = 12;

/// Composite Gauss–Legendre discretization of `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct PanelGrid<T> {
    edges: Vec<T>,
    order: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
    sub: GaussLegendre<T>,
}

impl<T: Real> PanelGrid<T> {
    /// About `n` nodes in panels of [`PANEL_ORDER`], with panel edges at every break.
    pub fn new(lo: T, hi: T, n: usize, breaks: &[T]) -> Self {
        Self::with_order(lo, hi, n, breaks, PANEL_ORDER)
    }

    pub fn with_order(lo: T, hi: T, n: usize, breaks: &[T], order: usize) -> Self {
        assert!((2..=32).contains(&order), "panel order must lie in 2..=32");
        let pieces = split_points(lo, hi, breaks);
        let total_panels = n.div_ceil(order).max(pieces.len() - 1);
        let span = hi - lo;
        // Largest-remainder apportionment of panels to pieces by length.
        let shares: Vec<T> = pieces
            .windows(2)
            .map(|w| (w[1] - w[0]) / span * lit::<T>(total_panels as f64))
            .collect();
        let mut counts: Vec<usize> = shares
            .iter()
            .map(|s| s.floor().to_usize().unwrap_or(0).max(1))
            .collect();
        let mut assigned: usize = counts.iter().sum();
        while assigned < total_panels {
            let (best, _) = shares
                .iter()
                .zip(&counts)
                .enumerate()
                .map(|(i, (s, &c))| (i, *s - lit::<T>(c as f64)))
                .fold((0, T::neg_infinity()), |acc, x| if x.1 > acc.1 { x } else { acc });
            counts[best] += 1;
            assigned += 1;
        }
        let mut edges = vec![lo];
        for (w, &c) in pieces.windows(2).zip(&counts) {
            let step = (w[1] - w[0]) / lit::<T>(c as f64);
            for i in 1..c {
                edges.push(w[0] + step * lit::<T>(i as f64));
            }
            edges.push(w[1]);
        }
        let rule = GaussLegendre::<T>::new(order);
        let mut nodes = Vec::with_capacity((edges.len() - 1) * order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for e in edges.windows(2) {
            for (x, w) in rule.mapped(e[0], e[1]) {
                nodes.push(x);
                weights.push(w);
            }
        }
        Self {
            edges,
            order,
            nodes,
            weights,
            sub: GaussLegendre::new(SUB_ORDER),
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

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn panel_count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn lo(&self) -> T {
        self.edges[0]
    }

    pub fn hi(&self) -> T {
        *self.edges.last().expect("grid has edges")
    }

    /// Panel containing `x`; points outside are assigned to the nearest end panel.
    pub fn panel_of(&self, x: T) -> usize {
        let last = self.panel_count() - 1;
        match self
            .edges
            .binary_search_by(|e| e.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    pub fn panel_nodes(&self, p: usize) -> &[T] {
        &self.nodes[p * self.order..(p + 1) * self.order]
    }

    /// Lagrange basis of panel `p` at `x`.
    fn basis(&self, p: usize, x: T) -> [T; 32] {
        let xs = self.panel_nodes(p);
        let mut out = [T::zero(); 32];
        for j in 0..xs.len() {
            let mut v = T::one();
            for (m, &xm) in xs.iter().enumerate() {
                if m != j {
                    v = v * (x - xm) / (xs[j] - xm);
                }
            }
            out[j] = v;
        }
        out
    }

    /// Piecewise polynomial interpolant of node values.
    pub fn interpolate(&self, values: &[T], x: T) -> T {
        let p = self.panel_of(x);
        let b = self.basis(p, x);
        let off = p * self.order;
        (0..self.order).map(|j| b[j] * values[off + j]).sum()
    }

    /// Weights `c_j` with `∫_lo^hi h(s) u(s) ds ≈ Σ c_j u(s_j)` for a known `h`
    /// that may kink at `h_breaks`.
    pub fn functional_weights<F: Fn(T) -> T>(&self, h: &F, h_breaks: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        for p in 0..self.panel_count() {
            self.accumulate_panel(p, &mut out, h_breaks, h);
        }
        out
    }

    /// Weights `c_j` with `u(x) ≈ Σ c_j u(s_j)`.
    pub fn point_weights(&self, x: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        let p = self.panel_of(x);
        let b = self.basis(p, x);
        for j in 0..self.order {
            out[p * self.order + j] = b[j];
        }
        out
    }

    fn accumulate_panel<F: Fn(T) -> T>(&self, p: usize, row: &mut [T], inner: &[T], h: &F) {
        let (lo, hi) = (self.edges[p], self.edges[p + 1]);
        let off = p * self.order;
        let pts = split_points(lo, hi, inner);
        if pts.len() == 2 {
            for j in 0..self.order {
                row[off + j] = row[off + j] + self.weights[off + j] * h(self.nodes[off + j]);
            }
            return;
        }
        for w in pts.windows(2) {
            for (x, wx) in self.sub.mapped(w[0], w[1]) {
                let v = wx * h(x);
                let b = self.basis(p, x);
                for j in 0..self.order {
                    row[off + j] = row[off + j] + v * b[j];
                }
            }
        }
    }

    /// Row `t` of the operator `u ↦ ∫ part(κ(t,s)) g(s) u(s) ds` over the grid.
    pub fn operator_row<K: Kernel<T> + ?Sized>(&self, k: &K, part: Part, g: &Weight<T>, t: T) -> Vec<T> {
        let mut row = vec![T::zero(); self.len()];
        let kb = k.s_breaks(t);
        let scan_signs = part != Part::Full && !k.sign_changes_listed();
        for p in 0..self.panel_count() {
            let (lo, hi) = (self.edges[p], self.edges[p + 1]);
            let mut inner: Vec<T> = kb.iter().copied().filter(|&x| x > lo && x < hi).collect();
            if scan_signs {
                inner.extend(sign_changes(&|s| k.eval(t, s), lo, hi, SIGN_SAMPLES));
            }
            let h = |s: T| part.apply(k.eval(t, s)) * g.eval(s);
            self.accumulate_panel(p, &mut row, &inner, &h);
        }
        row
    }

    /// Dense row-major matrix with rows at the grid's own nodes.
    pub fn operator_matrix<K: Kernel<T> + ?Sized>(&self, k: &K, part: Part, g: &Weight<T>) -> Vec<T> {
        self.nodes
            .par_iter()
            .flat_map_iter(|&t| self.operator_row(k, part, g, t))
            .collect()
    }
}

/// `y = A x` for a square row-major matrix.
pub fn matvec<T: Real>(a: &[T], x: &[T]) -> Vec<T> {
    let n = x.len();
    a.chunks_exact(n)
        .map(|row| row.iter().zip(x).map(|(&r, &v)| r * v).sum())
        .collect()
}
