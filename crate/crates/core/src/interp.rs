//! Piecewise Chebyshev tables and panel Lagrange interpolation.

use crate::error::Result;
use crate::quadrature::split_points;
use crate::scalar::{lit, Real};

/// Piecewise Chebyshev interpolant on `[lo, hi]`, evaluated with the
/// barycentric formula on second-kind points.
#[derive(Debug, Clone)]
pub struct PiecewiseChebyshev<T> {
    edges: Vec<T>,
    /// Values at the Chebyshev points of each panel, `degree + 1` per panel.
    values: Vec<Vec<T>>,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> PiecewiseChebyshev<T> {
    /// Tabulates `f` on `panels` roughly equal panels, never straddling a break.
    pub fn build<F>(f: F, lo: T, hi: T, breaks: &[T], panels: usize, degree: usize) -> Result<Self>
    where
        F: Fn(T) -> Result<T> + Sync,
    {
        use rayon::prelude::*;

        let coarse = split_points(lo, hi, breaks);
        let width = (hi - lo) / lit::<T>(panels.max(1) as f64);
        let mut edges = vec![lo];
        for w in coarse.windows(2) {
            let count = ((w[1] - w[0]) / width).ceil().to_usize().unwrap_or(1).max(1);
            let step = (w[1] - w[0]) / lit::<T>(count as f64);
            for i in 1..count {
                edges.push(w[0] + step * lit::<T>(i as f64));
            }
            edges.push(w[1]);
        }
        let n = degree.max(1);
        let nodes: Vec<T> = (0..=n)
            .map(|j| -(T::PI() * lit::<T>(j as f64) / lit::<T>(n as f64)).cos())
            .collect();
        let weights: Vec<T> = (0..=n)
            .map(|j| {
                let sign = if j % 2 == 0 { T::one() } else { -T::one() };
                if j == 0 || j == n {
                    sign * lit(0.5)
                } else {
                    sign
                }
            })
            .collect();
        let values = edges
            .par_windows(2)
            .map(|e| {
                let half = (e[1] - e[0]) * lit(0.5);
                let mid = (e[1] + e[0]) * lit(0.5);
                nodes.iter().map(|&x| f(mid + half * x)).collect::<Result<Vec<T>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            edges,
            values,
            nodes,
            weights,
        })
    }

    pub fn eval(&self, x: T) -> T {
        let last = self.edges.len() - 2;
        let p = match self
            .edges
            .binary_search_by(|e| e.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        };
        let (a, b) = (self.edges[p], self.edges[p + 1]);
        let y = (x - (a + b) * lit(0.5)) / ((b - a) * lit(0.5));
        let vals = &self.values[p];
        let mut num = T::zero();
        let mut den = T::zero();
        for ((&xj, &wj), &vj) in self.nodes.iter().zip(&self.weights).zip(vals) {
            let d = y - xj;
            if d == T::zero() {
                return vj;
            }
            let c = wj / d;
            num = num + c * vj;
            den = den + c;
        }
        num / den
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }
}

/// Lagrange basis values `ℓ_j(x)` for the nodes `xs`.
pub fn lagrange_basis<T: Real>(xs: &[T], x: T) -> Vec<T> {
    let n = xs.len();
    let mut out = vec![T::one(); n];
    for j in 0..n {
        for m in 0..n {
            if m != j {
                out[j] = out[j] * (x - xs[m]) / (xs[j] - xs[m]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_table_is_spectrally_accurate() {
        let f = |x: f64| Ok((3.0 * x).sin() + (x - 0.4).abs());
        let tab = PiecewiseChebyshev::build(f, 0.0, 1.0, &[0.4], 8, 20).unwrap();
        for i in 0..=500 {
            let x = i as f64 / 500.0;
            assert!((tab.eval(x) - f(x).unwrap()).abs() < 1e-13, "x = {x}");
        }
        assert!(tab.edges().iter().any(|&e| (e - 0.4).abs() < 1e-15));
    }

    #[test]
    fn lagrange_basis_partition_of_unity() {
        let xs = [0.0, 0.3, 0.5, 1.0];
        let l = lagrange_basis(&xs, 0.77);
        assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let l = lagrange_basis(&xs, 0.3);
        assert_eq!(l[1], 1.0);
    }
}
