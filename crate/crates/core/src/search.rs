//! One-dimensional extremum search, bracketing root finders and extrapolation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{lit, uniform_grid, Real};

/// Location and value of a sampled extremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum<T> {
    pub at: T,
    pub value: T,
    /// Largest jump between the extremum and its grid neighbours; a crude
    /// resolution budget for verdicts based on sampled values.
    pub spread: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Max,
    Min,
}

impl Goal {
    fn better<T: Real>(self, a: T, b: T) -> bool {
        match self {
            Goal::Max => a > b,
            Goal::Min => a < b,
        }
    }
}

/// Extremum of a fallible function over `[lo, hi]`: dense uniform scan,
/// evaluated in parallel, then golden-section polishing around the best node.
pub fn grid_extremum<T, F>(f: F, lo: T, hi: T, points: usize, goal: Goal) -> Result<Extremum<T>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
{
    let grid = uniform_grid(lo, hi, points);
    let values: Vec<T> = grid.par_iter().map(|&t| f(t)).collect::<Result<_>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            return Err(Error::Domain(format!("non-finite value at t = {}", grid[i])));
        }
        if goal.better(v, values[best]) {
            best = i;
        }
    }
    let mut spread = T::zero();
    if best > 0 {
        spread = spread.max((values[best] - values[best - 1]).abs());
    }
    if best + 1 < values.len() {
        spread = spread.max((values[best] - values[best + 1]).abs());
    }
    let mut ext = Extremum {
        at: grid[best],
        value: values[best],
        spread,
    };
    if grid.len() >= 3 {
        let l = grid[best.saturating_sub(1)];
        let r = grid[(best + 1).min(grid.len() - 1)];
        let (x, v) = golden_section(&f, l, r, goal, lit(1e-12), 80)?;
        if goal.better(v, ext.value) {
            ext.at = x;
            ext.value = v;
        }
    }
    Ok(ext)
}

/// Golden-section search on `[lo, hi]`; returns the best point seen.
pub fn golden_section<T, F>(f: &F, lo: T, hi: T, goal: Goal, tol: T, max_iter: usize) -> Result<(T, T)>
where
    T: Real,
    F: Fn(T) -> Result<T>,
{
    let inv_phi: T = lit(0.618_033_988_749_894_9);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut best = if goal.better(f1, f2) { (x1, f1) } else { (x2, f2) };
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if goal.better(f1, f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
            if goal.better(f1, best.1) {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
            if goal.better(f2, best.1) {
                best = (x2, f2);
            }
        }
    }
    for &x in &[lo, hi] {
        let v = f(x)?;
        if goal.better(v, best.1) {
            best = (x, v);
        }
    }
    Ok(best)
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<T, F>(f: F, lo: T, hi: T, tol: T, max_iter: usize) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::RootFindFailure(format!(
            "no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}"
        )));
    }
    for _ in 0..max_iter {
        let m = (a + b) * lit(0.5);
        if (b - a) <= tol || m <= a || m >= b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == T::zero() {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((a + b) * lit(0.5))
}

/// Sign changes of `f` found by sampling `samples` intervals and bisecting each.
pub fn sign_changes<T, F>(f: &F, lo: T, hi: T, samples: usize) -> Vec<T>
where
    T: Real,
    F: Fn(T) -> T + ?Sized,
{
    let grid = uniform_grid(lo, hi, samples + 1);
    let vals: Vec<T> = grid.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (va, vb) = (vals[i], vals[i + 1]);
        if va == T::zero() && i > 0 {
            roots.push(grid[i]);
        } else if va * vb < T::zero() {
            if let Ok(r) = bisect(f, grid[i], grid[i + 1], T::epsilon() * lit(4.0), 200) {
                roots.push(r);
            }
        }
    }
    roots
}

/// Value at `x = 0` of the polynomial through `(xs[i], ys[i])` (Neville's scheme).
pub fn neville_at_zero<T: Real>(xs: &[T], ys: &[T]) -> T {
    assert_eq!(xs.len(), ys.len());
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_extremum_finds_interior_peak() {
        let e = grid_extremum(|x: f64| Ok(-(x - 0.3217).powi(2)), 0.0, 1.0, 101, Goal::Max).unwrap();
        assert!((e.at - 0.3217).abs() < 1e-6);
        let e = grid_extremum(|x: f64| Ok((x - 0.3217).powi(2)), 0.0, 1.0, 101, Goal::Min).unwrap();
        assert!(e.value < 1e-12);
    }

    #[test]
    fn grid_extremum_endpoint() {
        let e = grid_extremum(|x: f64| Ok(x.exp()), 0.0, 1.0, 50, Goal::Max).unwrap();
        assert_eq!(e.at, 1.0);
    }

    #[test]
    fn bisection_and_sign_changes() {
        let r = bisect(|x: f64| x.cos(), 0.0, 3.0, 1e-14, 200).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
        assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_err());
        let roots = sign_changes(&|x: f64| (10.0 * x).sin(), 0.05, 1.0, 64);
        assert_eq!(roots.len(), 3);
    }

    #[test]
    fn neville_recovers_limit() {
        let f = |h: f64| h.sin() / h;
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = hs.iter().map(|&h| f(h)).collect();
        assert!((neville_at_zero(&hs, &ys) - 1.0).abs() < 1e-7);
    }
}
