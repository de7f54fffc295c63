//! Control of A + D and P by the gradient functional along a ladder, and point scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criterion::sweep::{default_tail, estimate_limits, estimate_limits_e2, scale_sweep, LadderSpec, ScaleSweep};
use crate::criterion::verdict::{
    ckn_verdict_with_tail, epsilon_over_m, seregin_verdict, theorem1_verdict, theorem2_verdict, CriterionId, CriterionVerdict,
    DEFAULT_EPSILON, DEFAULT_M_CAP,
};
use crate::error::{Error, Result};
use crate::functionals::Functionals;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlRow {
    pub r: f64,
    pub a: f64,
    pub d: Option<f64>,
    pub p: Option<f64>,
    pub e_q: f64,
    pub e: f64,
    /// (A + D) / Ē_q^{2/(q−1)}.
    pub ad_ratio: Option<f64>,
    /// P / Ē².
    pub p_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    pub x: [f64; 3],
    pub t: f64,
    pub q: f64,
    /// Tail maximum of E_q.
    pub e_bar: f64,
    /// Tail maximum of E = E_2.
    pub e2_bar: f64,
    pub rows: Vec<ControlRow>,
    pub max_ad_ratio: Option<f64>,
    pub max_p_ratio: Option<f64>,
    /// Ē_q > 1, the hypothesis of the control lemma.
    pub hypothesis_met: bool,
    /// Ē_q = 0, the ratios are 0/0.
    pub degenerate: bool,
}

/// Tail values of A + D and P against powers of Ē_q and Ē. Reports empirical constants only.
pub fn control_check(ev: &Functionals, x: [f64; 3], t: f64, spec: &LadderSpec, q: f64) -> Result<ControlReport> {
    let sweep = scale_sweep(ev, x, t, spec, q)?;
    control_from_sweep(&sweep, None)
}

pub fn control_from_sweep(sweep: &ScaleSweep, tail: Option<usize>) -> Result<ControlReport> {
    let lim = estimate_limits(sweep, tail)?;
    let lim2 = estimate_limits_e2(sweep, tail)?;
    let q = sweep.q;
    let k = sweep.len();
    let denom_ad = lim.e_bar.powf(2.0 / (q - 1.0));
    let denom_p = lim2.e_bar * lim2.e_bar;
    let rows: Vec<ControlRow> = (k - lim.tail_length..k)
        .map(|i| {
            let ad = sweep.d[i].map(|d| sweep.a[i] + d);
            ControlRow {
                r: sweep.radii[i],
                a: sweep.a[i],
                d: sweep.d[i],
                p: sweep.p[i],
                e_q: sweep.e_q[i],
                e: sweep.e[i],
                ad_ratio: ad.filter(|_| denom_ad > 0.0).map(|v| v / denom_ad),
                p_ratio: sweep.p[i].filter(|_| denom_p > 0.0).map(|v| v / denom_p),
            }
        })
        .collect();
    let max_of = |f: fn(&ControlRow) -> Option<f64>| rows.iter().filter_map(f).reduce(f64::max);
    Ok(ControlReport {
        x: sweep.x,
        t: sweep.t,
        q,
        e_bar: lim.e_bar,
        e2_bar: lim2.e_bar,
        max_ad_ratio: max_of(|r| r.ad_ratio),
        max_p_ratio: max_of(|r| r.p_ratio),
        hypothesis_met: lim.e_bar > 1.0,
        degenerate: lim.e_bar == 0.0,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSpec {
    pub criteria: Vec<CriterionId>,
    pub epsilon: f64,
    /// Exponent of Theorem 1 (9/5 ≤ q < 2).
    pub q: f64,
    pub m_cap: f64,
    pub tail_length: Option<usize>,
}

impl Default for CriterionSpec {
    fn default() -> Self {
        Self { criteria: CriterionId::ALL.to_vec(), epsilon: DEFAULT_EPSILON, q: 1.8, m_cap: DEFAULT_M_CAP, tail_length: None }
    }
}

/// Verdicts of every requested criterion from one sweep.
pub fn verdicts(sweep: &ScaleSweep, spec: &CriterionSpec, force_free: bool) -> Vec<Result<CriterionVerdict>> {
    let tail = spec.tail_length.or(Some(default_tail(sweep.len())));
    spec.criteria
        .iter()
        .map(|c| match c {
            CriterionId::Theorem1 => {
                if !force_free {
                    return Err(Error::Precondition("Theorem 1 assumes zero force".into()));
                }
                theorem1_verdict(&estimate_limits(sweep, tail)?, spec.q, spec.epsilon)
            }
            CriterionId::Theorem2 => theorem2_verdict(&estimate_limits_e2(sweep, tail)?, spec.epsilon),
            CriterionId::Ckn => ckn_verdict_with_tail(sweep, spec.epsilon, tail),
            CriterionId::Seregin => {
                seregin_verdict(&estimate_limits_e2(sweep, tail)?, spec.m_cap, epsilon_over_m(spec.epsilon))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x: [f64; 3],
    pub t: f64,
}

/// One verdict, or the error that prevented it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub t: f64,
    pub criterion: CriterionId,
    pub epsilon: f64,
    #[serde(rename = "E_bar")]
    pub e_bar: Option<f64>,
    #[serde(rename = "E_under")]
    pub e_under: Option<f64>,
    pub product: Option<f64>,
    /// "regular", "not-implied" or "error".
    pub decision: String,
    pub error: Option<String>,
}

impl ScanRow {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

fn rows_for(ev: &Functionals, p: &ScanPoint, ladder: &LadderSpec, spec: &CriterionSpec) -> Vec<ScanRow> {
    let mk = |c: CriterionId, r: std::result::Result<CriterionVerdict, String>| match r {
        Ok(v) => ScanRow {
            x1: p.x[0],
            x2: p.x[1],
            x3: p.x[2],
            t: p.t,
            criterion: c,
            epsilon: spec.epsilon,
            e_bar: Some(v.e_bar),
            e_under: Some(v.e_under),
            product: Some(v.product),
            decision: v.decision.name().to_string(),
            error: None,
        },
        Err(e) => ScanRow {
            x1: p.x[0],
            x2: p.x[1],
            x3: p.x[2],
            t: p.t,
            criterion: c,
            epsilon: spec.epsilon,
            e_bar: None,
            e_under: None,
            product: None,
            decision: "error".into(),
            error: Some(e),
        },
    };
    match scale_sweep(ev, p.x, p.t, ladder, spec.q) {
        Ok(sweep) => spec
            .criteria
            .iter()
            .zip(verdicts(&sweep, spec, !ev.flow().has_force()))
            .map(|(&c, v)| mk(c, v.map_err(|e| e.to_string())))
            .collect(),
        Err(e) => spec.criteria.iter().map(|&c| mk(c, Err(e.to_string()))).collect(),
    }
}

/// Sweeps and verdicts at every point, in point order whatever the scheduling.
pub fn scan_grid(ev: &Functionals, points: &[ScanPoint], ladder: &LadderSpec, spec: &CriterionSpec) -> Vec<ScanRow> {
    points.par_iter().map(|p| rows_for(ev, p, ladder, spec)).collect::<Vec<_>>().into_iter().flatten().collect()
}

/// Regular grid of `per_axis`³ points spanning [c − half, c + half]³ at time t.
pub fn cube_points(center: [f64; 3], half: f64, per_axis: usize, t: f64) -> Vec<ScanPoint> {
    let coord = |i: usize| if per_axis == 1 { 0.0 } else { -half + 2.0 * half * i as f64 / (per_axis - 1) as f64 };
    let mut out = Vec::with_capacity(per_axis.pow(3));
    for i in 0..per_axis {
        for j in 0..per_axis {
            for k in 0..per_axis {
                out.push(ScanPoint { x: [center[0] + coord(i), center[1] + coord(j), center[2] + coord(k)], t });
            }
        }
    }
    out
}
