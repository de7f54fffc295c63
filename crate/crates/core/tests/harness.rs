use std::f64::consts::PI;

use cknscope::flowfield::{make_beltrami_flow, make_random_divfree_flow, make_shear_flow, GridSpec, SampledFlow};
use cknscope::harness::suite::{run_suite, synthetic_force, BASELINE_FACTOR};
use cknscope::harness::{
    check_energy_balance, compare_baseline, fit_constants, pressure_constants, CheckConfig, Checker, CutoffParams, LemmaId,
    SuiteSpec,
};
use cknscope::pressure::recover_pressure;
use cknscope::{Error, FunctionalParams, Functionals};
use proptest::prelude::*;

fn steady(g: GridSpec, v: [f64; 3], p: f64) -> SampledFlow {
    let m = g.points() * g.n_times;
    let vel = (0..m).flat_map(|_| v).collect();
    SampledFlow::new(g, vel, Some(vec![p; m]), None, "constant").unwrap()
}

fn checks_at(ev: &Functionals, x: [f64; 3], t: f64, r: f64, lemma: LemmaId, theta: Option<f64>) -> cknscope::InequalityCheck {
    let cfg = CheckConfig { x, t, r, theta, q: Some(2.0), k: Some(0.25) };
    Checker::new(ev).check(lemma, &cfg).unwrap()
}

#[test]
fn zero_flow_is_degenerate_everywhere() {
    let g = GridSpec::periodic(32, 9, 0.0, 1.0).unwrap();
    let flow = steady(g, [0.0; 3], 0.0);
    let ev = Functionals::new(&flow, FunctionalParams::relaxed()).unwrap();
    let spec = SuiteSpec::default();
    for lemma in LemmaId::LEMMAS {
        for cfg in spec.configs(lemma, g.center()) {
            let c = Checker::new(&ev).check(lemma, &cfg).unwrap();
            assert!(c.degenerate && c.ratio.is_none() && c.pass == Some(true), "{lemma}: {c:?}");
        }
    }
}

// Constant velocity w: E = C~ = D = 0, and over B_r × (t − r², t]
// A = (4π/3) r²|w|², C = (4π/3) r³|w|³, G = (4π/3)^{1/3} r²|w|².
#[test]
fn constant_flow_ratios() {
    let g = GridSpec::periodic(64, 9, 0.0, 1.0).unwrap();
    let w = [0.6, -0.3, 0.2];
    let flow = steady(g, w, 1.5);
    let ev = Functionals::new(&flow, FunctionalParams::relaxed()).unwrap();
    let (x, t, r, theta) = (g.center(), 1.0, 0.5, 0.5);
    let k = 4.0 * PI / 3.0;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-2 * b;

    let c51a = checks_at(&ev, x, t, r, LemmaId::CSplitA, Some(theta));
    assert!(close(c51a.ratio.unwrap(), k.powf(-0.5)), "{c51a:?}");
    let c51b = checks_at(&ev, x, t, r, LemmaId::CSplitB, Some(theta));
    assert!(close(c51b.ratio.unwrap(), theta * theta), "{c51b:?}");
    let c54 = checks_at(&ev, x, t, r, LemmaId::InterpII, Some(theta));
    assert!(close(c54.ratio.unwrap(), k.powf(-2.0 / 3.0)), "{c54:?}");
    let c55 = checks_at(&ev, x, t, r, LemmaId::C23Bound, None);
    assert!(close(c55.ratio.unwrap(), k.powf(-1.0 / 3.0)), "{c55:?}");
    // C~ = 0, so the interpolation bound holds with lhs 0 against a vanishing rhs.
    let c52 = checks_at(&ev, x, t, r, LemmaId::InterpI, None);
    assert!(c52.lhs.abs() < 1e-9);
}

// C(r) = πr⁶/6, A = 4πr⁴/15, E = 4πr⁴/3 on the shear fixture.
#[test]
fn shear_c23_ratio() {
    let g = GridSpec::periodic(64, 17, 0.0, 1.0).unwrap();
    let flow = make_shear_flow(g).unwrap();
    let ev = Functionals::new(&flow, FunctionalParams::default()).unwrap();
    let c = Checker::new(&ev).c23_bound(g.center(), 1.0, 0.5).unwrap();
    let expect = (PI / 6.0).powf(2.0 / 3.0) / (1.6 * PI);
    assert!((c.ratio.unwrap() / expect - 1.0).abs() < 1.5e-2, "{} vs {expect}", c.ratio.unwrap());
}

#[test]
fn forced_local_energy_includes_force_term() {
    let g = GridSpec::periodic(32, 9, 0.0, 1.0).unwrap();
    let flow = make_beltrami_flow(g, [1.0, 0.8, 0.6], 1.0).unwrap();
    let ev = Functionals::new(&flow, FunctionalParams::relaxed()).unwrap();
    let free = Checker::new(&ev).local_energy_ii(g.center(), 1.0, 0.5).unwrap();
    assert!(free.rhs_terms.iter().all(|t| t.name != "F(2r)"));

    let forced = recover_pressure(&flow.with_force(synthetic_force(&g, 3)).unwrap()).unwrap();
    let ev = Functionals::new(&forced, FunctionalParams::relaxed()).unwrap();
    let c = Checker::new(&ev).local_energy_ii(g.center(), 1.0, 0.5).unwrap();
    let f = c.rhs_terms.iter().find(|t| t.name == "F(2r)").expect("force term");
    assert!(f.value > 0.0 && c.ratio.unwrap().is_finite());
    assert_eq!(f.degree, Some(4.0));
}

#[test]
fn theta_ranges_are_enforced() {
    let g = GridSpec::periodic(32, 9, 0.0, 1.0).unwrap();
    let flow = make_random_divfree_flow(g, 1, 2, 1.0).unwrap();
    let ev = Functionals::new(&flow, FunctionalParams::relaxed()).unwrap();
    let ch = Checker::new(&ev);
    let x = g.center();
    assert!(ch.pressure_i(x, 1.0, 0.5, 0.25).is_err());
    assert!(ch.pressure_ii(x, 1.0, 0.5, 0.25).is_ok());
    assert!(ch.pressure_ii(x, 1.0, 0.5, 0.3).is_err());
    assert!(ch.c_split(x, 1.0, 0.5, 1.5).is_err());
    assert!(ch.interp_i(x, 1.0, 0.5, 2.0, 0.5).is_err());
    assert!(ch.local_energy_i(x, 1.0, 1.5).is_err());
    let cfg = CheckConfig { x, t: 1.0, r: 0.5, theta: None, q: None, k: None };
    assert!(ch.check(LemmaId::PressureI, &cfg).is_err());
    assert!(ch.check(LemmaId::EnergyBalance, &cfg).is_err());
}

#[test]
fn pressure_lemmas_need_pressure() {
    let g = GridSpec::periodic(32, 9, 0.0, 1.0).unwrap();
    let flow = make_random_divfree_flow(g, 1, 2, 1.0).unwrap().without_pressure();
    let ev = Functionals::new(&flow, FunctionalParams::relaxed()).unwrap();
    assert!(matches!(Checker::new(&ev).local_energy_i(g.center(), 1.0, 0.5), Err(Error::PressureRequired)));
    assert!(Checker::new(&ev).c23_bound(g.center(), 1.0, 0.5).is_ok());
}

#[test]
fn lemma_codes_round_trip() {
    for id in LemmaId::LEMMAS {
        assert_eq!(id.code().parse::<LemmaId>().unwrap(), id);
    }
    assert_eq!("l51".parse::<LemmaId>().unwrap(), LemmaId::CSplitA);
    assert_eq!("energy".parse::<LemmaId>().unwrap(), LemmaId::EnergyBalance);
    assert!("L99".parse::<LemmaId>().is_err());
    assert_eq!(LemmaId::CSplitB.lemma(), "L51");
}

#[test]
fn energy_balance_preconditions_and_zero_flow() {
    let g = GridSpec::periodic(32, 17, 0.0, 1.0).unwrap();
    let zero = steady(g, [0.0; 3], 0.0);
    let c = check_energy_balance(&zero, CutoffParams::new(g.center(), 1.0, 0.5)).unwrap();
    assert!(c.degenerate && c.relative_residual() == 0.0);
    let nop = make_beltrami_flow(g, [1.0; 3], 1.0).unwrap().without_pressure();
    assert!(matches!(check_energy_balance(&nop, CutoffParams::new(g.center(), 1.0, 0.5)), Err(Error::PressureRequired)));
    let b = make_beltrami_flow(g, [1.0; 3], 1.0).unwrap();
    assert!(check_energy_balance(&b, CutoffParams::new(g.center(), 0.97, 0.5)).is_err());
}

#[test]
fn energy_balance_components_are_positive() {
    let g = GridSpec::periodic(32, 17, 0.0, 1.0).unwrap();
    let b = make_beltrami_flow(g, [1.0, 0.8, 0.6], 1.0).unwrap();
    let c = check_energy_balance(&b, CutoffParams::new(g.center(), 1.0, 0.5)).unwrap();
    assert!(c.component("energy at t").unwrap() > 0.0);
    assert!(c.component("dissipation").unwrap() > 0.0);
    assert!(c.relative_residual() < 1.0);
}

fn small_spec(fields: usize) -> SuiteSpec {
    SuiteSpec { fields, resolutions: vec![32], ..SuiteSpec::default() }
}

#[test]
fn suite_is_deterministic_across_thread_counts() {
    let spec = small_spec(3);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_suite(&spec));
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| run_suite(&spec));
    let lhs = |r: &[cknscope::harness::suite::FieldChecks]| -> Vec<Vec<f64>> {
        r.iter().map(|f| f.checks.iter().map(|c| c.lhs).collect()).collect()
    };
    assert_eq!(lhs(&one), lhs(&three));
    assert_eq!(one.iter().map(|f| f.field).collect::<Vec<_>>(), vec![0, 1, 2]);
}

#[test]
fn fits_cover_every_lemma() {
    let report = fit_constants(&small_spec(2), None).unwrap();
    assert_eq!(report.fits.len(), LemmaId::LEMMAS.len());
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    for f in &report.fits {
        assert!(f.max_ratio.is_finite() && f.max_ratio > 0.0, "{f:?}");
        assert!(f.p95_ratio <= f.max_ratio);
    }
}

#[test]
fn empty_suite_has_no_samples() {
    assert!(matches!(fit_constants(&small_spec(0), None), Err(Error::NoSamples(_))));
}

#[test]
fn baseline_comparison_flags_growth() {
    let fits = fit_constants(&small_spec(1), None).unwrap().fits;
    assert!(compare_baseline(&fits, &fits).iter().all(|b| b.pass));
    let mut shrunk = fits.clone();
    shrunk[0].max_ratio /= 2.0 * BASELINE_FACTOR;
    let cmp = compare_baseline(&fits, &shrunk);
    assert!(!cmp[0].pass && cmp[1..].iter().all(|b| b.pass));
}

#[test]
fn pressure_constants_are_finite() {
    let p = pressure_constants(&small_spec(2), 2, 1.0).unwrap();
    assert!(!p.constants.is_empty());
    for s in &p.samples {
        assert!(s.reconstruction_error <= 1e-9, "{s:?}");
    }
    for c in &p.constants {
        assert!(c.max.is_finite(), "{c:?}");
    }
}

fn scaled(flow: &SampledFlow, a: f64) -> SampledFlow {
    SampledFlow::new(
        *flow.grid(),
        flow.velocity().iter().map(|v| a * v).collect(),
        flow.pressure().map(|p| p.iter().map(|v| a * a * v).collect()),
        flow.force().map(|f| f.iter().map(|v| a * a * v).collect()),
        "scaled",
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    // Each term and the lhs scale by α^degree under v ↦ αv, p ↦ α²p, f ↦ α²f.
    #[test]
    fn amplitude_homogeneity(seed in 0u64..1000, a in 0.2f64..5.0) {
        let g = GridSpec::periodic(32, 9, 0.0, 1.0).unwrap();
        let base = make_random_divfree_flow(g, seed, 2, 1.0).unwrap();
        let base = recover_pressure(&base.with_force(synthetic_force(&g, seed)).unwrap()).unwrap();
        let sc = scaled(&base, a);
        let spec = SuiteSpec::default();
        let ev0 = Functionals::new(&base, spec.functional_params()).unwrap();
        let ev1 = Functionals::new(&sc, spec.functional_params()).unwrap();
        let (c0, c1) = (Checker::new(&ev0), Checker::new(&ev1));
        for lemma in LemmaId::LEMMAS {
            for cfg in spec.configs(lemma, g.center()) {
                let x0 = c0.check(lemma, &cfg).unwrap();
                let x1 = c1.check(lemma, &cfg).unwrap();
                let deg = x0.lhs_degree.unwrap();
                prop_assert!((x1.lhs - a.powf(deg) * x0.lhs).abs() <= 1e-9 * x1.lhs.abs().max(1e-300), "{lemma} lhs");
                for (t0, t1) in x0.rhs_terms.iter().zip(&x1.rhs_terms) {
                    if let Some(d) = t0.degree {
                        prop_assert!((t1.value - a.powf(d) * t0.value).abs() <= 1e-9 * t1.value.abs().max(1e-300), "{lemma} {}", t0.name);
                    }
                }
            }
        }
    }
}
