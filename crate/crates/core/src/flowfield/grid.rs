use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic space-time grid: n³ nodes at x_i = i·h on [0, L)³, `n_times` slices on [t0, t1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub box_length: f64,
    pub n_times: usize,
    pub t0: f64,
    pub t1: f64,
}

impl GridSpec {
    pub fn new(n: usize, box_length: f64, n_times: usize, t0: f64, t1: f64) -> Result<Self> {
        let g = Self { n, box_length, n_times, t0, t1 };
        g.validate()?;
        Ok(g)
    }

    /// Grid on the default box [0, 2π)³.
    pub fn periodic(n: usize, n_times: usize, t0: f64, t1: f64) -> Result<Self> {
        Self::new(n, 2.0 * std::f64::consts::PI, n_times, t0, t1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::InvalidGrid(format!("n = {} < 8", self.n)));
        }
        if !(self.box_length.is_finite() && self.box_length > 0.0) {
            return Err(Error::InvalidGrid(format!("box_length = {}", self.box_length)));
        }
        if self.n_times < 2 {
            return Err(Error::InvalidGrid(format!("n_times = {} < 2", self.n_times)));
        }
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t0 < self.t1) {
            return Err(Error::InvalidGrid(format!("need t0 < t1, got {} and {}", self.t0, self.t1)));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / (self.n_times - 1) as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        if j + 1 == self.n_times {
            self.t1
        } else {
            self.t0 + j as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_times).map(|j| self.time(j)).collect()
    }

    /// Nodes per slice.
    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn center(&self) -> [f64; 3] {
        let c = 0.5 * self.box_length;
        [c, c, c]
    }

    /// Radius of the analysis subregion, the ball of radius L/4 around the box centre.
    pub fn analysis_radius(&self) -> f64 {
        0.25 * self.box_length
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.h();
        [i as f64 * h, j as f64 * h, k as f64 * h]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// Flat index of an unwrapped integer node, reduced periodically.
    #[inline]
    pub fn wrap_index(&self, i: isize, j: isize, k: isize) -> usize {
        let n = self.n as isize;
        self.index(i.rem_euclid(n) as usize, j.rem_euclid(n) as usize, k.rem_euclid(n) as usize)
    }

    /// Signed integer wavenumber of FFT index `i` (Nyquist mapped to -n/2).
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < (n + 1) / 2 {
            i
        } else {
            i - n
        }
    }

    /// Same spatial grid over a different time window.
    pub fn with_times(&self, n_times: usize, t0: f64, t1: f64) -> Result<Self> {
        Self::new(self.n, self.box_length, n_times, t0, t1)
    }
}
