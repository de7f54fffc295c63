//! Randomized field suites: every checker on every field at two resolutions, aggregated into
//! empirical constants.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowfield::{gradient, make_random_divfree_flow, GridSpec, SampledFlow};
use crate::functionals::{k_range, FunctionalParams, Functionals};
use crate::harness::lemmas::{CheckConfig, Checker, InequalityCheck, LemmaId};
use crate::pressure::{decompose_local, recover_pressure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSets {
    pub pressure_i: Vec<f64>,
    pub pressure_ii: Vec<f64>,
    pub c_split: Vec<f64>,
    pub x_decay: Vec<f64>,
    pub interp_ii: Vec<f64>,
}

impl Default for ThetaSets {
    fn default() -> Self {
        Self {
            pressure_i: vec![1.0 / 8.0, 1.0 / 16.0],
            pressure_ii: vec![1.0 / 8.0, 1.0 / 4.0],
            c_split: vec![1.0 / 4.0, 1.0 / 2.0],
            x_decay: vec![1.0 / 8.0, 1.0 / 16.0],
            interp_ii: vec![1.0 / 4.0, 1.0 / 2.0, 1.0],
        }
    }
}

impl ThetaSets {
    pub fn for_lemma(&self, lemma: LemmaId) -> &[f64] {
        match lemma {
            LemmaId::PressureI => &self.pressure_i,
            LemmaId::PressureII => &self.pressure_ii,
            LemmaId::CSplitA | LemmaId::CSplitB => &self.c_split,
            LemmaId::XDecay => &self.x_decay,
            LemmaId::InterpII => &self.interp_ii,
            _ => &[],
        }
    }
}

/// Corners of the admissible (q, k) region and its midpoint.
pub fn default_qk_points() -> Vec<(f64, f64)> {
    let (lo2, hi2) = k_range(2.0);
    let (lo18, _) = k_range(1.8);
    let (lo19, hi19) = k_range(1.9);
    vec![(1.8, lo18), (2.0, lo2), (2.0, hi2), (1.9, 0.5 * (lo19 + hi19))]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub fields: usize,
    pub seed: u64,
    pub resolutions: Vec<usize>,
    pub max_wavenumber: usize,
    pub amplitude: f64,
    pub n_times: usize,
    pub t1: f64,
    /// Base radius r; cylinders are centred at the box centre at time t1.
    pub radius: f64,
    pub thetas: ThetaSets,
    pub qk: Vec<(f64, f64)>,
    pub lemmas: Vec<LemmaId>,
    /// Keep every InequalityCheck in the report.
    pub keep_checks: bool,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            fields: 200,
            seed: 20240601,
            resolutions: vec![32, 64],
            max_wavenumber: 2,
            amplitude: 1.0,
            n_times: 9,
            t1: 1.0,
            radius: 0.5,
            thetas: ThetaSets::default(),
            qk: default_qk_points(),
            lemmas: LemmaId::LEMMAS.to_vec(),
            keep_checks: false,
        }
    }
}

impl SuiteSpec {
    pub fn grid(&self, n: usize) -> Result<GridSpec> {
        GridSpec::periodic(n, self.n_times, 0.0, self.t1)
    }

    pub fn field_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_add(i as u64)
    }

    /// Configurations checked per field for one lemma.
    pub fn configs(&self, lemma: LemmaId, x: [f64; 3]) -> Vec<CheckConfig> {
        let base = CheckConfig { x, t: self.t1, r: self.radius, theta: None, q: None, k: None };
        let thetas: Vec<Option<f64>> =
            if lemma.uses_theta() { self.thetas.for_lemma(lemma).iter().map(|&t| Some(t)).collect() } else { vec![None] };
        let qks: Vec<(Option<f64>, Option<f64>)> =
            if lemma.uses_qk() { self.qk.iter().map(|&(q, k)| (Some(q), Some(k))).collect() } else { vec![(None, None)] };
        thetas
            .iter()
            .flat_map(|&theta| qks.iter().map(move |&(q, k)| CheckConfig { theta, q, k, ..base }))
            .collect()
    }

    pub fn functional_params(&self) -> FunctionalParams {
        let mut qs: Vec<f64> = vec![1.8, 1.9, 2.0];
        for &(q, _) in &self.qk {
            if !qs.iter().any(|p| (p - q).abs() < 1e-12) {
                qs.push(q);
            }
        }
        FunctionalParams { q_grid: qs, ..FunctionalParams::relaxed() }
    }
}

/// Check outcome for one (field, resolution).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldChecks {
    pub field: usize,
    pub seed: u64,
    pub n: usize,
    pub checks: Vec<InequalityCheck>,
    pub failures: Vec<SampleFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub field: usize,
    pub n: usize,
    pub lemma: Option<LemmaId>,
    pub config: Option<CheckConfig>,
    pub error: String,
}

pub fn run_checks(checker: &Checker, lemmas: &[LemmaId], configs: impl Fn(LemmaId) -> Vec<CheckConfig>) -> (Vec<InequalityCheck>, Vec<(LemmaId, CheckConfig, Error)>) {
    let mut out = Vec::new();
    let mut errs = Vec::new();
    for &lemma in lemmas {
        for cfg in configs(lemma) {
            match checker.check(lemma, &cfg) {
                Ok(c) => out.push(c),
                Err(e) => errs.push((lemma, cfg, e)),
            }
        }
    }
    (out, errs)
}

fn field_checks(spec: &SuiteSpec, field: usize, n: usize) -> FieldChecks {
    let seed = spec.field_seed(field);
    let fail = |e: Error| FieldChecks {
        field,
        seed,
        n,
        checks: Vec::new(),
        failures: vec![SampleFailure { field, n, lemma: None, config: None, error: e.to_string() }],
    };
    let flow = match spec.grid(n).and_then(|g| make_random_divfree_flow(g, seed, spec.max_wavenumber, spec.amplitude)) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let ev = match Functionals::with_gradient(&flow, Arc::new(gradient(&flow)), spec.functional_params()) {
        Ok(ev) => ev,
        Err(e) => return fail(e),
    };
    let checker = Checker::new(&ev);
    let x = flow.grid().center();
    let (checks, errs) = run_checks(&checker, &spec.lemmas, |l| spec.configs(l, x));
    let failures = errs
        .into_iter()
        .map(|(lemma, cfg, e)| SampleFailure { field, n, lemma: Some(lemma), config: Some(cfg), error: e.to_string() })
        .collect();
    FieldChecks { field, seed, n, checks, failures }
}

/// Runs the suite; results are ordered by (field, resolution) whatever the scheduling.
pub fn run_suite(spec: &SuiteSpec) -> Vec<FieldChecks> {
    let jobs: Vec<(usize, usize)> =
        (0..spec.fields).flat_map(|i| spec.resolutions.iter().map(move |&n| (i, n))).collect();
    jobs.par_iter().map(|&(i, n)| field_checks(spec, i, n)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionFit {
    pub n: usize,
    pub samples: usize,
    pub degenerate: usize,
    pub max_ratio: f64,
    pub p95_ratio: f64,
    /// Slope of log(max ratio at θ) against log θ.
    pub theta_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantFit {
    pub lemma: LemmaId,
    pub samples: usize,
    pub degenerate: usize,
    pub max_ratio: f64,
    pub p95_ratio: f64,
    pub per_resolution: Vec<ResolutionFit>,
    /// max/min − 1 of the per-resolution max ratios.
    pub stability: Option<f64>,
    pub stable: bool,
    /// Most negative θ slope over the resolutions.
    pub theta_slope: Option<f64>,
    /// The ratio does not grow faster than θ^{−1/2} as θ decreases.
    pub theta_consistent: Option<bool>,
}

/// Relative spread tolerated between resolutions.
pub const STABILITY_TOL: f64 = 0.25;
/// Slowest admissible θ trend of the max ratio.
pub const THETA_SLOPE_MIN: f64 = -0.5;

/// Nearest-rank 95th percentile of an ascending slice.
fn p95(sorted: &[f64]) -> f64 {
    let rank = ((0.95 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(_, m)| *m > 0.0).map(|&(t, m)| (t.ln(), m.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn resolution_fit(n: usize, checks: &[&InequalityCheck]) -> Option<ResolutionFit> {
    let mut ratios: Vec<f64> = checks.iter().filter_map(|c| c.ratio).collect();
    let degenerate = checks.len() - ratios.len();
    if checks.is_empty() {
        return None;
    }
    ratios.sort_by(f64::total_cmp);
    let (max_ratio, p95_ratio) = if ratios.is_empty() { (0.0, 0.0) } else { (*ratios.last().unwrap(), p95(&ratios)) };
    let mut thetas: Vec<f64> = checks.iter().filter_map(|c| c.config.theta).collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    let theta_slope = if thetas.len() >= 2 {
        let pts: Vec<(f64, f64)> = thetas
            .iter()
            .map(|&t| {
                let m = checks
                    .iter()
                    .filter(|c| c.config.theta == Some(t))
                    .filter_map(|c| c.ratio)
                    .fold(0.0, f64::max);
                (t, m)
            })
            .collect();
        slope(&pts)
    } else {
        None
    };
    Some(ResolutionFit { n, samples: checks.len(), degenerate, max_ratio, p95_ratio, theta_slope })
}

/// Aggregates checks per lemma. Errors with NoSamples when nothing was checked.
pub fn aggregate(results: &[FieldChecks], lemmas: &[LemmaId]) -> Result<Vec<ConstantFit>> {
    let total: usize = results.iter().map(|r| r.checks.len()).sum();
    if total == 0 {
        return Err(Error::NoSamples("the suite produced no inequality checks".into()));
    }
    let mut ns: Vec<usize> = results.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut fits = Vec::new();
    for &lemma in lemmas {
        let per: Vec<ResolutionFit> = ns
            .iter()
            .filter_map(|&n| {
                let cs: Vec<&InequalityCheck> =
                    results.iter().filter(|r| r.n == n).flat_map(|r| r.checks.iter()).filter(|c| c.lemma == lemma).collect();
                resolution_fit(n, &cs)
            })
            .collect();
        if per.is_empty() {
            return Err(Error::NoSamples(format!("no samples for {lemma}")));
        }
        let all: Vec<&InequalityCheck> = results.iter().flat_map(|r| r.checks.iter()).filter(|c| c.lemma == lemma).collect();
        let mut ratios: Vec<f64> = all.iter().filter_map(|c| c.ratio).collect();
        ratios.sort_by(f64::total_cmp);
        let (max_ratio, p95_ratio) = if ratios.is_empty() { (0.0, 0.0) } else { (*ratios.last().unwrap(), p95(&ratios)) };
        let maxes: Vec<f64> = per.iter().map(|p| p.max_ratio).collect();
        let stability = (maxes.len() >= 2).then(|| {
            let hi = maxes.iter().copied().fold(f64::MIN, f64::max);
            let lo = maxes.iter().copied().fold(f64::MAX, f64::min);
            if hi == 0.0 {
                0.0
            } else {
                hi / lo - 1.0
            }
        });
        let stable = stability.is_some_and(|s| s <= STABILITY_TOL);
        let slopes: Vec<f64> = per.iter().filter_map(|p| p.theta_slope).collect();
        let theta_slope = (!slopes.is_empty()).then(|| slopes.iter().copied().fold(f64::MAX, f64::min));
        fits.push(ConstantFit {
            lemma,
            samples: all.len(),
            degenerate: all.len() - ratios.len(),
            max_ratio,
            p95_ratio,
            per_resolution: per,
            stability,
            stable,
            theta_slope,
            theta_consistent: theta_slope.map(|s| s >= THETA_SLOPE_MIN),
        });
    }
    Ok(fits)
}

/// Empirical constants of the pressure decomposition on one ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureSample {
    pub field: usize,
    pub n: usize,
    /// ‖p01‖_{L³} / ‖v − ⟨v⟩‖²_{L⁶}.
    pub cz_ratio: f64,
    /// ‖p02‖_{L³} / ‖f‖_{L^{3/2}}.
    pub force_ratio: Option<f64>,
    /// ∫|p_h − ⟨p_h⟩|³ / ∫|p − ⟨p⟩|³.
    pub harmonic_ratio: f64,
    pub reconstruction_error: f64,
    pub harmonic_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureConstant {
    pub name: String,
    pub per_resolution: Vec<(usize, f64)>,
    pub max: f64,
    pub stability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureFits {
    pub radius: f64,
    pub samples: Vec<PressureSample>,
    pub constants: Vec<PressureConstant>,
}

/// A smooth force with a gradient part, f_a = sin(m_a·x + φ_a) e^{−t}.
pub fn synthetic_force(grid: &GridSpec, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f0ce);
    let modes: Vec<([f64; 3], f64)> = (0..3)
        .map(|_| {
            let mut m = [0.0; 3];
            while m.iter().all(|x| *x == 0.0) {
                m = [0; 3].map(|_: i32| rng.gen_range(-2i32..=2) as f64);
            }
            (m, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let l = grid.box_length;
    let k0 = std::f64::consts::TAU / l;
    let mut out = vec![0.0; 3 * grid.points() * grid.n_times];
    for j in 0..grid.n_times {
        let decay = (-grid.time(j)).exp();
        for i0 in 0..grid.n {
            for i1 in 0..grid.n {
                for i2 in 0..grid.n {
                    let x = grid.node(i0, i1, i2);
                    let idx = 3 * (j * grid.points() + grid.index(i0, i1, i2));
                    for (a, (m, ph)) in modes.iter().enumerate() {
                        out[idx + a] = decay * (k0 * (m[0] * x[0] + m[1] * x[1] + m[2] * x[2]) + ph).sin();
                    }
                }
            }
        }
    }
    out
}

fn lp(vals: impl Iterator<Item = f64>, p: f64, h3: f64) -> f64 {
    (vals.map(|x| x.abs().powf(p)).sum::<f64>() * h3).powf(1.0 / p)
}

fn mean_of(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Decomposition constants on one flow at its last slice, ball B(centre, radius).
pub fn pressure_sample(flow: &SampledFlow, field: usize, radius: f64) -> Result<PressureSample> {
    let g = flow.grid();
    let dec = decompose_local(flow, g.center(), radius, g.n_times - 1)?;
    let h3 = g.h().powi(3);
    let m = dec.v_mean;
    let osc = dec.v.chunks(3).map(|v| ((v[0] - m[0]).powi(2) + (v[1] - m[1]).powi(2) + (v[2] - m[2]).powi(2)).sqrt());
    let cz = lp(dec.p01.values.iter().copied(), 3.0, h3) / lp(osc, 6.0, h3).powi(2);
    let force_ratio = dec.f.as_ref().map(|f| {
        let fn_ = f.chunks(3).map(|f| (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt());
        lp(dec.p02.values.iter().copied(), 3.0, h3) / lp(fn_, 1.5, h3)
    });
    let (ph, p) = (&dec.p_h.values, &dec.p.values);
    let (mh, mp) = (mean_of(ph), mean_of(p));
    let harmonic = ph.iter().map(|x| (x - mh).abs().powi(3)).sum::<f64>() / p.iter().map(|x| (x - mp).abs().powi(3)).sum::<f64>();
    Ok(PressureSample {
        field,
        n: g.n,
        cz_ratio: cz,
        force_ratio,
        harmonic_ratio: harmonic,
        reconstruction_error: dec.diagnostics.reconstruction_error,
        harmonic_residual: dec.diagnostics.harmonic_residual,
    })
}

/// Pressure-decomposition constants over `fields` forced random flows at each resolution.
pub fn pressure_constants(spec: &SuiteSpec, fields: usize, radius: f64) -> Result<PressureFits> {
    let jobs: Vec<(usize, usize)> = (0..fields).flat_map(|i| spec.resolutions.iter().map(move |&n| (i, n))).collect();
    let samples: Vec<PressureSample> = jobs
        .par_iter()
        .map(|&(i, n)| {
            let g = spec.grid(n)?;
            let seed = spec.field_seed(i);
            let flow = make_random_divfree_flow(g, seed, spec.max_wavenumber, spec.amplitude)?;
            let flow = recover_pressure(&flow.with_force(synthetic_force(&g, seed))?)?;
            pressure_sample(&flow, i, radius)
        })
        .collect::<Result<_>>()?;
    if samples.is_empty() {
        return Err(Error::NoSamples("pressure suite is empty".into()));
    }
    type Getter = fn(&PressureSample) -> Option<f64>;
    let named: [(&str, Getter); 3] = [
        ("calderon_zygmund", |s| Some(s.cz_ratio)),
        ("force", |s| s.force_ratio),
        ("harmonic_oscillation", |s| Some(s.harmonic_ratio)),
    ];
    let constants = named
        .iter()
        .map(|(name, get)| {
            let per: Vec<(usize, f64)> = spec
                .resolutions
                .iter()
                .map(|&n| (n, samples.iter().filter(|s| s.n == n).filter_map(get).fold(0.0, f64::max)))
                .collect();
            let hi = per.iter().map(|p| p.1).fold(0.0, f64::max);
            let lo = per.iter().map(|p| p.1).fold(f64::MAX, f64::min);
            PressureConstant {
                name: name.to_string(),
                per_resolution: per,
                max: hi,
                stability: if hi == 0.0 { 0.0 } else { hi / lo - 1.0 },
            }
        })
        .collect();
    Ok(PressureFits { radius, samples, constants })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub lemma: LemmaId,
    pub max_ratio: f64,
    pub baseline: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Regression threshold relative to a committed baseline fit.
pub const BASELINE_FACTOR: f64 = 1.5;

pub fn compare_baseline(fits: &[ConstantFit], baseline: &[ConstantFit]) -> Vec<BaselineComparison> {
    fits.iter()
        .filter_map(|f| {
            let b = baseline.iter().find(|b| b.lemma == f.lemma)?;
            let bound = BASELINE_FACTOR * b.max_ratio;
            Some(BaselineComparison { lemma: f.lemma, max_ratio: f.max_ratio, baseline: b.max_ratio, bound, pass: f.max_ratio <= bound })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: SuiteSpec,
    pub fits: Vec<ConstantFit>,
    pub failures: Vec<SampleFailure>,
    pub baseline: Vec<BaselineComparison>,
    pub checks: Vec<InequalityCheck>,
    pub pressure: Option<PressureFits>,
}

/// Runs the suite and fits constants; with a baseline, every check is marked against
/// 1.5 × the baseline constant of its lemma.
pub fn fit_constants(spec: &SuiteSpec, baseline: Option<&[ConstantFit]>) -> Result<VerificationReport> {
    if spec.fields == 0 || spec.resolutions.is_empty() || spec.lemmas.is_empty() {
        return Err(Error::NoSamples("empty suite".into()));
    }
    let mut results = run_suite(spec);
    let fits = aggregate(&results, &spec.lemmas)?;
    let baseline_cmp = baseline.map(|b| compare_baseline(&fits, b)).unwrap_or_default();
    let failures = results.iter().flat_map(|r| r.failures.iter().cloned()).collect();
    let checks = if spec.keep_checks {
        for r in &mut results {
            for c in &mut r.checks {
                if let Some(b) = baseline_cmp.iter().find(|b| b.lemma == c.lemma) {
                    c.apply_bound(b.bound);
                }
            }
        }
        results.into_iter().flat_map(|r| r.checks).collect()
    } else {
        Vec::new()
    };
    Ok(VerificationReport { suite: spec.clone(), fits, failures, baseline: baseline_cmp, checks, pressure: None })
}
