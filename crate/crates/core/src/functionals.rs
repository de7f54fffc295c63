//! Scaled functionals A, C, C̃, D, E_q, G, P, F on parabolic cylinders.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flowfield::{gradient, SampledFlow, TensorField};
use crate::geometry::{BallQuadrature, ParabolicCylinder, QuadratureCache, Resolution, TimeWindow};
use crate::numerics::compensated_sum;

pub const Q_MIN: f64 = 1.8;
pub const Q_MAX: f64 = 2.0;

pub fn check_q(q: f64) -> Result<()> {
    if !(Q_MIN - 1e-12..=Q_MAX + 1e-12).contains(&q) {
        return invalid(format!("q = {q} outside [9/5, 2]"));
    }
    Ok(())
}

/// Admissible k range for the interpolation exponents at q.
pub fn k_range(q: f64) -> (f64, f64) {
    ((3.0 - q) / (5.0 * q - 6.0), (3.0 - q) / 3.0)
}

pub fn check_k(q: f64, k: f64) -> Result<()> {
    check_q(q)?;
    let (lo, hi) = k_range(q);
    if !(lo - 1e-12..=hi + 1e-12).contains(&k) {
        return invalid(format!("k = {k} outside [{lo}, {hi}] for q = {q}"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParams {
    pub q: f64,
    pub k: Option<f64>,
    /// Exponents evaluated together with every cylinder.
    pub q_grid: Vec<f64>,
    /// Relative bracket width at which the search for P's constant stops.
    pub c_tol: f64,
    pub c_max_iter: usize,
    pub resolution: Resolution,
}

impl Default for FunctionalParams {
    fn default() -> Self {
        Self { q: 2.0, k: None, q_grid: vec![1.8, 1.9, 2.0], c_tol: 1e-12, c_max_iter: 200, resolution: Resolution::STRICT }
    }
}

impl FunctionalParams {
    pub fn relaxed() -> Self {
        Self { resolution: Resolution::RELAXED, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        check_q(self.q)?;
        if let Some(k) = self.k {
            check_k(self.q, k)?;
        }
        self.q_grid.iter().try_for_each(|&q| check_q(q))
    }
}

/// All functionals at one cylinder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderValues {
    pub cylinder: ParabolicCylinder,
    pub a: f64,
    pub c: f64,
    pub c_tilde: f64,
    pub d: Option<f64>,
    pub g: f64,
    pub p: Option<f64>,
    /// Minimizing constant of P.
    pub p_constant: Option<f64>,
    pub f: f64,
    pub force_absent: bool,
    /// (q, E_q) pairs.
    pub e_q: Vec<(f64, f64)>,
}

impl CylinderValues {
    pub fn e_at(&self, q: f64) -> Option<f64> {
        self.e_q.iter().find(|(p, _)| (p - q).abs() < 1e-12).map(|(_, v)| *v)
    }

    /// E = E_2.
    pub fn e(&self) -> f64 {
        self.e_at(2.0).expect("q = 2 is always evaluated")
    }
}

/// Serializable bundle at one (z, r, q).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub t: f64,
    pub r: f64,
    pub q: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_tilde")]
    pub c_tilde: f64,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    #[serde(rename = "E_q")]
    pub e_q: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "P")]
    pub p: Option<f64>,
    #[serde(rename = "F")]
    pub f: f64,
    pub pressure_absent: bool,
    pub force_absent: bool,
}

struct SliceSums {
    v2: f64,
    v3: f64,
    vt3: f64,
    v6: f64,
    gq: Vec<f64>,
    pd: f64,
    f2: f64,
    p: Vec<f64>,
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Weighted mean computed about the first sample so constant data gives that constant exactly.
fn weighted_mean<const C: usize>(w: &[f64], vals: &[[f64; C]], vol: f64) -> [f64; C] {
    let Some(v0) = vals.first().copied() else { return [0.0; C] };
    let mut out = v0;
    for (a, o) in out.iter_mut().enumerate() {
        *o += compensated_sum(w.iter().zip(vals).map(|(w, v)| w * (v[a] - v0[a]))) / vol;
    }
    out
}

fn wsum(w: &[f64], f: impl Iterator<Item = f64>) -> f64 {
    compensated_sum(w.iter().zip(f).map(|(w, v)| w * v)).max(0.0)
}

pub struct Functionals<'a> {
    flow: &'a SampledFlow,
    grad: Arc<TensorField>,
    params: FunctionalParams,
    cache: QuadratureCache,
    memo: RwLock<HashMap<[i64; 5], Arc<CylinderValues>>>,
}

impl<'a> Functionals<'a> {
    /// Computes and caches the spectral gradient of the flow.
    pub fn new(flow: &'a SampledFlow, params: FunctionalParams) -> Result<Self> {
        let grad = Arc::new(gradient(flow));
        Self::with_gradient(flow, grad, params)
    }

    pub fn with_gradient(flow: &'a SampledFlow, grad: Arc<TensorField>, params: FunctionalParams) -> Result<Self> {
        params.validate()?;
        if grad.grid() != flow.grid() {
            return invalid("gradient grid does not match flow grid");
        }
        let mut params = params;
        if !params.q_grid.iter().any(|q| (q - 2.0).abs() < 1e-12) {
            params.q_grid.push(2.0);
        }
        if !params.q_grid.iter().any(|q| (q - params.q).abs() < 1e-12) {
            params.q_grid.push(params.q);
        }
        Ok(Self { flow, grad, params, cache: QuadratureCache::new(), memo: RwLock::new(HashMap::new()) })
    }

    pub fn flow(&self) -> &SampledFlow {
        self.flow
    }

    pub fn params(&self) -> &FunctionalParams {
        &self.params
    }

    pub fn gradient(&self) -> &Arc<TensorField> {
        &self.grad
    }

    /// Cylinder at (x, t) with radius r, validated against the resolution policy.
    pub fn cylinder(&self, x: [f64; 3], t: f64, r: f64) -> Result<ParabolicCylinder> {
        let cyl = ParabolicCylinder::new(x, t, r)?;
        cyl.validate(self.flow.grid(), &self.params.resolution)?;
        Ok(cyl)
    }

    fn ball(&self, cyl: &ParabolicCylinder) -> Result<(BallQuadrature, TimeWindow)> {
        cyl.validate(self.flow.grid(), &self.params.resolution)?;
        let quad = self.cache.ball(self.flow.grid(), cyl.x, cyl.r, self.params.resolution.min_radius_cells)?;
        let (a, b) = cyl.window();
        Ok((quad, TimeWindow::new(self.flow.grid(), a, b)?))
    }

    fn slice_sums(&self, quad: &BallQuadrature, w: &[f64], vol: f64, j: usize) -> SliceSums {
        let v = quad.gather::<3>(self.flow.velocity_slice(j));
        let g = quad.gather::<9>(self.grad.slice(j));
        let speed: Vec<f64> = v.iter().map(norm3).collect();
        let vm = weighted_mean(w, &v, vol);
        let gn: Vec<f64> = g.iter().map(|t| t.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let (pd, p) = match self.flow.pressure_slice(j) {
            Some(ps) => {
                let p: Vec<f64> = quad.gather::<1>(ps).into_iter().map(|x| x[0]).collect();
                let pv: Vec<[f64; 1]> = p.iter().map(|&x| [x]).collect();
                let pm = weighted_mean(w, &pv, vol)[0];
                (wsum(w, p.iter().map(|x| (x - pm).abs().powf(1.5))), p)
            }
            None => (0.0, Vec::new()),
        };
        let f2 = match self.flow.force_slice(j) {
            Some(fs) => wsum(w, quad.gather::<3>(fs).iter().map(|f| f[0] * f[0] + f[1] * f[1] + f[2] * f[2])),
            None => 0.0,
        };
        SliceSums {
            v2: wsum(w, speed.iter().map(|s| s * s)),
            v3: wsum(w, speed.iter().map(|s| s.powi(3))),
            vt3: wsum(w, v.iter().map(|x| norm3(&[x[0] - vm[0], x[1] - vm[1], x[2] - vm[2]]).powi(3))),
            v6: wsum(w, speed.iter().map(|s| s.powi(6))),
            gq: self.params.q_grid.iter().map(|&q| wsum(w, gn.iter().map(|x| x.powf(q)))).collect(),
            pd,
            f2,
            p,
        }
    }

    fn key(cyl: &ParabolicCylinder) -> [i64; 5] {
        [cyl.x[0], cyl.x[1], cyl.x[2], cyl.t, cyl.r].map(|v| (v * 1e10).round() as i64)
    }

    /// All functionals at `cyl`; memoized.
    pub fn values(&self, cyl: &ParabolicCylinder) -> Result<Arc<CylinderValues>> {
        let key = Self::key(cyl);
        if let Some(v) = self.memo.read().expect("functional memo poisoned").get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(self.compute(cyl)?);
        self.memo.write().expect("functional memo poisoned").insert(key, v.clone());
        Ok(v)
    }

    fn compute(&self, cyl: &ParabolicCylinder) -> Result<CylinderValues> {
        let (quad, tw) = self.ball(cyl)?;
        let w = quad.weights();
        let vol = compensated_sum(w.iter().copied());
        let slices = tw.slices();
        let sums: Vec<SliceSums> = slices.par_iter().map(|&j| self.slice_sums(&quad, &w, vol, j)).collect();
        let at = |j: usize| &sums[slices.binary_search(&j).expect("slice gathered")];
        let r = cyl.r;
        let e_q = self
            .params
            .q_grid
            .iter()
            .enumerate()
            .map(|(i, &q)| (q, r.powf(-5.0 + 2.0 * q) * tw.integrate(|j| at(j).gq[i])))
            .collect();
        let has_p = self.flow.has_pressure();
        let (p, p_constant) = if has_p {
            let (c, val) = self.minimize_p(&w, &tw, |j| &at(j).p);
            (Some(val / (r * r)), Some(c))
        } else {
            (None, None)
        };
        Ok(CylinderValues {
            cylinder: *cyl,
            a: tw.sup(|j| at(j).v2) / r,
            c: tw.integrate(|j| at(j).v3) / (r * r),
            c_tilde: tw.integrate(|j| at(j).vt3) / (r * r),
            d: has_p.then(|| tw.integrate(|j| at(j).pd) / (r * r)),
            g: tw.integrate(|j| at(j).v6.cbrt()) / r,
            p,
            p_constant,
            f: tw.integrate(|j| at(j).f2.powf(2.0 / 3.0)).powf(1.5),
            force_absent: !self.flow.has_force(),
            e_q,
        })
    }

    fn p_objective<'b>(w: &[f64], tw: &TimeWindow, p: impl Fn(usize) -> &'b Vec<f64>, c: f64) -> f64 {
        tw.integrate(|j| wsum(w, p(j).iter().map(|x| (x - c).abs().powi(3))).cbrt())
    }

    /// Ternary search of the convex objective J(c) = ∫(∫_B|p−c|³)^{1/3}; returns (c*, J(c*)²).
    fn minimize_p<'b>(&self, w: &[f64], tw: &TimeWindow, p: impl Fn(usize) -> &'b Vec<f64> + Copy) -> (f64, f64) {
        let slices = tw.slices();
        let (mut lo, mut hi) = slices
            .iter()
            .flat_map(|&j| p(j).iter().copied())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if !(lo.is_finite() && hi.is_finite()) {
            return (0.0, 0.0);
        }
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let obj = |c: f64| Self::p_objective(w, tw, p, c);
        let mut it = 0;
        while hi - lo > self.params.c_tol * scale && it < self.params.c_max_iter {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if obj(m1) <= obj(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
            it += 1;
        }
        let c = 0.5 * (lo + hi);
        let j = obj(c);
        (c, j * j)
    }

    /// J(c) of the P minimization at `cyl`, unscaled.
    pub fn p_objective_at(&self, cyl: &ParabolicCylinder, c: f64) -> Result<f64> {
        if !self.flow.has_pressure() {
            return Err(Error::PressureRequired);
        }
        let (quad, tw) = self.ball(cyl)?;
        let w = quad.weights();
        let samples: Vec<(usize, Vec<f64>)> = tw
            .slices()
            .into_iter()
            .map(|j| {
                let s = self.flow.pressure_slice(j).expect("pressure present");
                (j, quad.gather::<1>(s).into_iter().map(|x| x[0]).collect())
            })
            .collect();
        let find = |j: usize| &samples.iter().find(|(k, _)| *k == j).expect("slice gathered").1;
        Ok(Self::p_objective(&w, &tw, find, c))
    }

    pub fn eq(&self, cyl: &ParabolicCylinder, q: f64) -> Result<f64> {
        check_q(q)?;
        let v = self.values(cyl)?;
        if let Some(e) = v.e_at(q) {
            return Ok(e);
        }
        let (quad, tw) = self.ball(cyl)?;
        let w = quad.weights();
        let slices = tw.slices();
        let sums: Vec<f64> = slices
            .par_iter()
            .map(|&j| {
                let g = quad.gather::<9>(self.grad.slice(j));
                wsum(&w, g.iter().map(|t| t.iter().map(|x| x * x).sum::<f64>().sqrt().powf(q)))
            })
            .collect();
        Ok(cyl.r.powf(-5.0 + 2.0 * q) * tw.integrate(|j| sums[slices.binary_search(&j).expect("slice")]))
    }

    pub fn a(&self, cyl: &ParabolicCylinder) -> Result<f64> {
        Ok(self.values(cyl)?.a)
    }

    pub fn c(&self, cyl: &ParabolicCylinder) -> Result<f64> {
        Ok(self.values(cyl)?.c)
    }

    pub fn c_tilde(&self, cyl: &ParabolicCylinder) -> Result<f64> {
        Ok(self.values(cyl)?.c_tilde)
    }

    pub fn d(&self, cyl: &ParabolicCylinder) -> Result<f64> {
        self.values(cyl)?.d.ok_or(Error::PressureRequired)
    }

    pub fn g(&self, cyl: &ParabolicCylinder) -> Result<f64> {
        Ok(self.values(cyl)?.g)
    }

    pub fn p(&self, cyl: &ParabolicCylinder) -> Result<f64> {
        self.values(cyl)?.p.ok_or(Error::PressureRequired)
    }

    /// F, or 0 when the flow carries no force.
    pub fn f(&self, cyl: &ParabolicCylinder) -> Result<f64> {
        Ok(self.values(cyl)?.f)
    }

    pub fn report(&self, cyl: &ParabolicCylinder) -> Result<FunctionalReport> {
        let v = self.values(cyl)?;
        Ok(FunctionalReport {
            x1: cyl.x[0],
            x2: cyl.x[1],
            x3: cyl.x[2],
            t: cyl.t,
            r: cyl.r,
            q: self.params.q,
            a: v.a,
            c: v.c,
            c_tilde: v.c_tilde,
            d: v.d,
            e_q: self.eq(cyl, self.params.q)?,
            e: v.e(),
            g: v.g,
            p: v.p,
            f: v.f,
            pressure_absent: v.d.is_none(),
            force_absent: v.force_absent,
        })
    }
}
