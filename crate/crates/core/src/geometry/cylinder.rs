use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flowfield::GridSpec;

/// Resolvability policy applied when a cylinder is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// Smallest admissible r / h.
    pub min_radius_cells: f64,
    /// Smallest number of time slices inside (t − r², t].
    pub min_window_slices: usize,
    /// Require the doubled cylinder Q(2r) to fit in the analysis region and data window.
    pub require_doubled: bool,
}

impl Resolution {
    /// r ≥ 4h, at least 5 slices, and Q(2r) admissible.
    pub const STRICT: Resolution = Resolution { min_radius_cells: 4.0, min_window_slices: 5, require_doubled: true };

    /// Admits small balls (interpolated rule) and short windows (interpolated time weights).
    /// Only the cylinder itself must fit.
    pub const RELAXED: Resolution = Resolution { min_radius_cells: 0.125, min_window_slices: 0, require_doubled: false };

    /// Scale ladders: r ≥ 4h, the ladder itself bounds r below by 2√dt.
    pub const SWEEP: Resolution = Resolution { min_radius_cells: 4.0, min_window_slices: 0, require_doubled: false };
}

impl Default for Resolution {
    fn default() -> Self {
        Self::STRICT
    }
}

/// Q(z, r) = B(x, r) × (t − r², t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCylinder {
    pub x: [f64; 3],
    pub t: f64,
    pub r: f64,
}

const REL_TOL: f64 = 1e-9;

impl ParabolicCylinder {
    pub fn new(x: [f64; 3], t: f64, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return invalid(format!("radius must be positive, got {r}"));
        }
        if !(x.iter().all(|v| v.is_finite()) && t.is_finite()) {
            return invalid("cylinder centre must be finite");
        }
        Ok(Self { x, t, r })
    }

    pub fn with_radius(&self, r: f64) -> Result<Self> {
        Self::new(self.x, self.t, r)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t - self.r * self.r, self.t)
    }

    pub fn volume(&self) -> f64 {
        self.r * self.r * 4.0 / 3.0 * std::f64::consts::PI * self.r.powi(3)
    }

    /// Checks geometry and resolvability against the grid.
    pub fn validate(&self, grid: &GridSpec, res: &Resolution) -> Result<()> {
        let ext = if res.require_doubled { 2.0 } else { 1.0 };
        let c = grid.center();
        let d = (0..3).map(|a| (self.x[a] - c[a]).powi(2)).sum::<f64>().sqrt();
        let region = grid.analysis_radius();
        if d + ext * self.r > region * (1.0 + REL_TOL) {
            return Err(Error::OutsideRegion(format!(
                "ball B(x, {}) reaches {:.6} from the centre, region radius {region:.6}",
                ext * self.r,
                d + ext * self.r
            )));
        }
        let slack = REL_TOL * grid.dt();
        let start = self.t - ext * ext * self.r * self.r;
        if start < grid.t0 - slack || self.t > grid.t1 + slack {
            return Err(Error::OutsideRegion(format!(
                "time window ({start}, {}) not inside [{}, {}]",
                self.t, grid.t0, grid.t1
            )));
        }
        let h = grid.h();
        if self.r < res.min_radius_cells * h * (1.0 - REL_TOL) {
            return Err(Error::UnderResolved { radius: self.r, min_radius: res.min_radius_cells * h, cells: res.min_radius_cells });
        }
        let found = slices_in(grid, self.t - self.r * self.r, self.t).len();
        if found < res.min_window_slices {
            return Err(Error::TooFewSlices { found, required: res.min_window_slices });
        }
        Ok(())
    }
}

/// Indices of slices with a ≤ t_j ≤ b (with a tiny relative slack).
pub fn slices_in(grid: &GridSpec, a: f64, b: f64) -> Vec<usize> {
    let slack = REL_TOL * grid.dt();
    (0..grid.n_times).filter(|&j| (a - slack..=b + slack).contains(&grid.time(j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_validation() {
        let g = GridSpec::new(64, 2.0 * std::f64::consts::PI, 33, 0.0, 2.0).unwrap();
        let c = g.center();
        assert!(ParabolicCylinder::new(c, 2.0, 0.5).unwrap().validate(&g, &Resolution::STRICT).is_ok());
        assert!(matches!(
            ParabolicCylinder::new(c, 2.0, 0.3).unwrap().validate(&g, &Resolution::STRICT),
            Err(Error::UnderResolved { .. })
        ));
        assert!(matches!(
            ParabolicCylinder::new(c, 0.5, 0.5).unwrap().validate(&g, &Resolution::STRICT),
            Err(Error::OutsideRegion(_))
        ));
        assert!(ParabolicCylinder::new(c, 0.5, 0.5).unwrap().validate(&g, &Resolution::RELAXED).is_ok());
        assert!(ParabolicCylinder::new(c, 1.0, -1.0).is_err());
        let coarse = GridSpec::new(64, 2.0 * std::f64::consts::PI, 5, 0.0, 2.0).unwrap();
        assert!(matches!(
            ParabolicCylinder::new(c, 2.0, 0.5).unwrap().validate(&coarse, &Resolution::STRICT),
            Err(Error::TooFewSlices { found: 1, required: 5 })
        ));
    }
}
