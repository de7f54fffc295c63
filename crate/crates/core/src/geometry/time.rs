//! Time weights on (a, b]: trapezoid of the piecewise-linear interpolant of slice values.

use crate::error::{invalid, Result};
use crate::flowfield::GridSpec;
use crate::geometry::cylinder::slices_in;
use crate::numerics::compensated_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
    /// (slice, weight), sorted by slice; weights sum to end − start.
    pub weights: Vec<(usize, f64)>,
    /// Slices lying inside [start, end].
    pub inside: Vec<usize>,
    /// Interpolation data of the endpoints: (lower slice, fraction towards the next slice).
    endpoints: [(usize, f64); 2],
}

fn locate(grid: &GridSpec, t: f64) -> (usize, f64) {
    let dt = grid.dt();
    let u = (t - grid.t0) / dt;
    let j = (u.floor().max(0.0) as usize).min(grid.n_times - 2);
    let f = (u - j as f64).clamp(0.0, 1.0);
    let snap = |f: f64| if f < 1e-9 { 0.0 } else if f > 1.0 - 1e-9 { 1.0 } else { f };
    (j, snap(f))
}

impl TimeWindow {
    pub fn new(grid: &GridSpec, start: f64, end: f64) -> Result<Self> {
        let slack = 1e-9 * grid.dt();
        if !(start < end) || start < grid.t0 - slack || end > grid.t1 + slack {
            return invalid(format!("time window ({start}, {end}) not inside [{}, {}]", grid.t0, grid.t1));
        }
        let dt = grid.dt();
        let (ja, fa) = locate(grid, start.max(grid.t0));
        let (jb, fb) = locate(grid, end.min(grid.t1));
        let mut w = vec![0.0; grid.n_times];
        for j in ja..=jb.min(grid.n_times - 2) {
            let ua = if j == ja { fa } else { 0.0 };
            let ub = if j == jb { fb } else { 1.0 };
            if ub <= ua {
                continue;
            }
            let lin = ub - ua;
            let quad = 0.5 * (ub * ub - ua * ua);
            w[j] += dt * (lin - quad);
            w[j + 1] += dt * quad;
        }
        let weights = w.iter().enumerate().filter(|(_, w)| **w != 0.0).map(|(j, w)| (j, *w)).collect();
        Ok(Self { start, end, weights, inside: slices_in(grid, start, end), endpoints: [(ja, fa), (jb, fb)] })
    }

    /// Every slice whose value is needed by `integrate` or `sup`.
    pub fn slices(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.weights.iter().map(|(j, _)| *j).chain(self.inside.iter().copied()).collect();
        for (j, f) in self.endpoints {
            s.push(j);
            if f > 0.0 {
                s.push(j + 1);
            }
        }
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn integrate(&self, g: impl Fn(usize) -> f64) -> f64 {
        compensated_sum(self.weights.iter().map(|(j, w)| w * g(*j)))
    }

    /// Maximum over slices inside the window; falls back to interpolated endpoint values when
    /// the window holds no slice.
    pub fn sup(&self, g: impl Fn(usize) -> f64) -> f64 {
        if !self.inside.is_empty() {
            return time_sup(self.inside.iter().map(|&j| g(j)));
        }
        let at = |(j, f): (usize, f64)| if f > 0.0 { (1.0 - f) * g(j) + f * g(j + 1) } else { g(j) };
        at(self.endpoints[0]).max(at(self.endpoints[1]))
    }
}

/// Discrete sup of per-slice values.
pub fn time_sup<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(8, 1.0, 11, 0.0, 1.0).unwrap()
    }

    #[test]
    fn aligned_window_is_trapezoid() {
        let w = TimeWindow::new(&grid(), 0.2, 0.6).unwrap();
        let total: f64 = w.weights.iter().map(|x| x.1).sum();
        assert!((total - 0.4).abs() < 1e-14);
        assert_eq!(w.inside, vec![2, 3, 4, 5, 6]);
        assert!((w.weights[0].1 - 0.05).abs() < 1e-14);
        assert!((w.integrate(|j| j as f64 * 0.1) - 0.16).abs() < 1e-13);
    }

    #[test]
    fn partial_window_integrates_linear_exactly() {
        let w = TimeWindow::new(&grid(), 0.23, 0.27).unwrap();
        assert!(w.inside.is_empty());
        let f = |t: f64| 2.0 * t + 1.0;
        let g = |j: usize| f(j as f64 * 0.1);
        assert!((w.integrate(g) - (0.27f64.powi(2) - 0.23f64.powi(2) + 0.04)).abs() < 1e-14);
        assert!((w.sup(g) - f(0.27)).abs() < 1e-12);
    }

    #[test]
    fn sup_cases() {
        assert_eq!(time_sup([3.0, 3.0, 3.0]), 3.0);
        assert_eq!(time_sup([1.0, 5.0, 2.0]), 5.0);
        let w = TimeWindow::new(&grid(), 0.3, 0.7).unwrap();
        assert_eq!(w.sup(|j| (-(j as f64)).exp()), (-3.0f64).exp());
    }
}
