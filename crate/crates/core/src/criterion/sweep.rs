//! Scale ladders r_k = r_max ρ^k and tail surrogates of lim sup / lim inf.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flowfield::GridSpec;
use crate::functionals::Functionals;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub r_max: f64,
    pub rho: f64,
    /// Number of scales; None takes the deepest ladder the grid resolves.
    pub levels: Option<usize>,
}

impl LadderSpec {
    pub fn new(r_max: f64) -> Self {
        Self { r_max, rho: 0.5, levels: None }
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = Some(levels);
        self
    }
}

/// max(4h, 2√dt).
pub fn min_ladder_radius(grid: &GridSpec) -> f64 {
    (4.0 * grid.h()).max(2.0 * grid.dt().sqrt())
}

/// Deepest K with r_max ρ^{K−1} ≥ max(4h, 2√dt); 0 when even r_max is too small.
pub fn ladder_depth(grid: &GridSpec, r_max: f64, rho: f64) -> usize {
    let floor = min_ladder_radius(grid) * (1.0 - 1e-9);
    let mut k = 0;
    let mut r = r_max;
    while r >= floor && k < 64 {
        k += 1;
        r *= rho;
    }
    k
}

/// Radii of the ladder, checked against the grid.
pub fn ladder(grid: &GridSpec, spec: &LadderSpec) -> Result<Vec<f64>> {
    if !(spec.rho > 0.0 && spec.rho < 1.0) || !(spec.r_max > 0.0) {
        return invalid(format!("ladder needs r_max > 0 and 0 < rho < 1 (got {}, {})", spec.r_max, spec.rho));
    }
    let depth = ladder_depth(grid, spec.r_max, spec.rho);
    let k = spec.levels.unwrap_or(depth);
    let floor = min_ladder_radius(grid);
    if k == 0 || k > depth {
        let smallest = spec.r_max * spec.rho.powi(k.max(1) as i32 - 1);
        return Err(Error::UnderResolved { radius: smallest, min_radius: floor, cells: floor / grid.h() });
    }
    Ok((0..k).map(|i| spec.r_max * spec.rho.powi(i as i32)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSweep {
    pub x: [f64; 3],
    pub t: f64,
    pub q: f64,
    pub radii: Vec<f64>,
    pub e_q: Vec<f64>,
    /// E = E_2 at the same scales.
    pub e: Vec<f64>,
    pub a: Vec<f64>,
    pub d: Vec<Option<f64>>,
    pub p: Vec<Option<f64>>,
}

impl ScaleSweep {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Sweep built from given E_q values with E = E_q; for constructing verdict inputs directly.
    pub fn from_values(radii: Vec<f64>, e_q: Vec<f64>, q: f64) -> Result<Self> {
        if radii.len() != e_q.len() || radii.is_empty() {
            return invalid("sweep needs one value per radius");
        }
        if radii.windows(2).any(|w| !(w[1] < w[0])) {
            return invalid("ladder must be strictly decreasing");
        }
        if e_q.iter().any(|e| !(*e >= 0.0)) {
            return invalid("E_q values must be non-negative");
        }
        let k = radii.len();
        Ok(Self { x: [0.0; 3], t: 0.0, q, radii, e: e_q.clone(), e_q, a: vec![0.0; k], d: vec![None; k], p: vec![None; k] })
    }
}

/// E_q (with A, D, P when pressure is present) at every ladder radius about (x, t).
pub fn scale_sweep(ev: &Functionals, x: [f64; 3], t: f64, spec: &LadderSpec, q: f64) -> Result<ScaleSweep> {
    let radii = ladder(ev.flow().grid(), spec)?;
    let mut s = ScaleSweep { x, t, q, radii: radii.clone(), e_q: vec![], e: vec![], a: vec![], d: vec![], p: vec![] };
    for r in radii {
        let cyl = ev.cylinder(x, t, r)?;
        let v = ev.values(&cyl)?;
        s.e_q.push(ev.eq(&cyl, q)?);
        s.e.push(v.e());
        s.a.push(v.a);
        s.d.push(v.d);
        s.p.push(v.p);
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleLimits {
    /// Tail maximum, the surrogate of lim sup (M).
    pub e_bar: f64,
    /// Tail minimum, the surrogate of lim inf (m).
    pub e_under: f64,
    pub tail_length: usize,
}

impl ScaleLimits {
    pub fn new(e_bar: f64, e_under: f64) -> Result<Self> {
        if !(0.0 <= e_under && e_under <= e_bar) {
            return invalid(format!("limits need 0 <= E_under <= E_bar (got {e_under}, {e_bar})"));
        }
        Ok(Self { e_bar, e_under, tail_length: 0 })
    }
}

pub fn default_tail(k: usize) -> usize {
    (k / 2).max(1)
}

fn tail_of(values: &[f64], tail_length: Option<usize>) -> Result<ScaleLimits> {
    let k = values.len();
    let tail = tail_length.unwrap_or_else(|| default_tail(k));
    if tail == 0 || tail > k {
        return invalid(format!("tail length {tail} not in 1..={k}"));
    }
    let t = &values[k - tail..];
    Ok(ScaleLimits {
        e_bar: t.iter().copied().fold(f64::MIN, f64::max),
        e_under: t.iter().copied().fold(f64::MAX, f64::min),
        tail_length: tail,
    })
}

/// Max and min of E_q over the `tail_length` smallest scales (default K/2).
pub fn estimate_limits(sweep: &ScaleSweep, tail_length: Option<usize>) -> Result<ScaleLimits> {
    tail_of(&sweep.e_q, tail_length)
}

/// The same surrogates for E = E_2.
pub fn estimate_limits_e2(sweep: &ScaleSweep, tail_length: Option<usize>) -> Result<ScaleLimits> {
    tail_of(&sweep.e, tail_length)
}
