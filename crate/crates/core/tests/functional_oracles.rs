use std::f64::consts::PI;

use cknscope::flowfield::{make_beltrami_flow, make_shear_flow, GridSpec, SampledFlow};
use cknscope::functionals::{FunctionalParams, Functionals};
use cknscope::Error;

fn grid() -> GridSpec {
    GridSpec::periodic(64, 17, 0.0, 1.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Flow whose velocity, pressure and force are given pointwise and steady.
fn steady(g: GridSpec, v: impl Fn([f64; 3]) -> [f64; 3], p: Option<&dyn Fn([f64; 3]) -> f64>, f: Option<[f64; 3]>) -> SampledFlow {
    let m = g.points();
    let mut vel = vec![0.0; 3 * m * g.n_times];
    let mut pr = vec![0.0; m * g.n_times];
    let mut fo = vec![0.0; 3 * m * g.n_times];
    for t in 0..g.n_times {
        for i in 0..g.n {
            for j in 0..g.n {
                for k in 0..g.n {
                    let x = g.node(i, j, k);
                    let idx = t * m + g.index(i, j, k);
                    vel[3 * idx..3 * idx + 3].copy_from_slice(&v(x));
                    if let Some(p) = p {
                        pr[idx] = p(x);
                    }
                    if let Some(f) = f {
                        fo[3 * idx..3 * idx + 3].copy_from_slice(&f);
                    }
                }
            }
        }
    }
    SampledFlow::new(g, vel, p.map(|_| pr), f.map(|_| fo), "steady").unwrap()
}

#[test]
fn shear_closed_forms() {
    let flow = make_shear_flow(grid()).unwrap();
    let ev = Functionals::new(&flow, FunctionalParams::default()).unwrap();
    let c = flow.grid().center();
    let cyl = ev.cylinder(c, 1.0, 0.5).unwrap();
    let r = 0.5f64;
    let v = ev.values(&cyl).unwrap();
    assert!(rel(v.e(), 4.0 * PI / 3.0 * r.powi(4)) < 1e-2, "E = {}", v.e());
    for q in [1.8, 1.9, 2.0] {
        assert!(rel(ev.eq(&cyl, q).unwrap(), 4.0 * PI / 3.0 * r.powf(2.0 * q)) < 1e-2);
    }
    assert!(rel(ev.eq(&cyl, 1.85).unwrap(), 4.0 * PI / 3.0 * r.powf(3.7)) < 1e-2);
    assert!(rel(v.a, 4.0 * PI * r.powi(4) / 15.0) < 1e-2, "A = {}", v.a);
    assert!(rel(v.c, PI * r.powi(6) / 6.0) < 1.5e-2, "C = {}", v.c);
    assert!(rel(v.c_tilde, v.c) < 1e-6);
    assert_eq!(v.d, Some(0.0));
    assert!(v.p.unwrap().abs() < 1e-20);
    assert_eq!(v.f, 0.0);
    assert!(v.force_absent);
    let rep = ev.report(&cyl).unwrap();
    assert_eq!(rep.q, 2.0);
    assert_eq!(rep.e_q, rep.e);
    assert!(ev.eq(&cyl, 2.5).is_err());
}

#[test]
fn constant_flow_closed_forms() {
    let g = grid();
    let flow = steady(g, |_| [1.0, 0.0, 0.0], Some(&|_| 2.5), Some([0.0, 1.0, 0.0]));
    let ev = Functionals::new(&flow, FunctionalParams::default()).unwrap();
    let cyl = ev.cylinder(g.center(), 1.0, 0.5).unwrap();
    let r = 0.5f64;
    let v = ev.values(&cyl).unwrap();
    let vol = 4.0 * PI / 3.0 * r.powi(3);
    assert!(rel(v.a, vol / r) < 5e-3);
    assert!(rel(v.c, vol * r * r / (r * r)) < 1e-2);
    assert!(rel(v.g, (4.0 * PI / 3.0f64).cbrt() * r * r) < 1e-2);
    assert!(rel(v.f, 4.0 * PI / 3.0 * r.powi(6)) < 1.5e-2);
    assert_eq!(v.c_tilde, 0.0);
    assert_eq!(v.d, Some(0.0));
    assert_eq!(v.p, Some(0.0));
    assert!((v.p_constant.unwrap() - 2.5).abs() < 1e-9);
    assert!(v.e() < 1e-20);
}

#[test]
fn linear_pressure_closed_forms() {
    let g = grid();
    let c = g.center();
    let flow = steady(g, |_| [0.0; 3], Some(&move |x: [f64; 3]| x[0] - c[0]), None);
    let ev = Functionals::new(&flow, FunctionalParams::default()).unwrap();
    let cyl = ev.cylinder(c, 1.0, 0.5).unwrap();
    let r = 0.5f64;
    // ∫_B |x1|^{3/2} = (16π/45) r^{9/2}; ∫_B |x1|³ = π r⁶ / 6.
    let d = ev.d(&cyl).unwrap();
    assert!(rel(d, 16.0 * PI / 45.0 * r.powf(4.5)) < 2e-2, "D = {d}");
    let p = ev.p(&cyl).unwrap();
    assert!(rel(p, (PI / 6.0f64).powf(2.0 / 3.0) * r.powi(6)) < 2e-2, "P = {p}");
    let cs = ev.values(&cyl).unwrap().p_constant.unwrap();
    assert!(cs.abs() < 1e-6);
    let j0 = ev.p_objective_at(&cyl, cs).unwrap();
    for dc in [1e-3, 1e-2, 0.1] {
        assert!(ev.p_objective_at(&cyl, cs + dc).unwrap() >= j0);
        assert!(ev.p_objective_at(&cyl, cs - dc).unwrap() >= j0);
    }
    // Global pressure shift.
    let shifted = flow.shift_pressure(7.0).unwrap();
    let ev2 = Functionals::new(&shifted, FunctionalParams::default()).unwrap();
    assert!(rel(ev2.d(&cyl).unwrap(), d) < 1e-9);
    assert!(rel(ev2.p(&cyl).unwrap(), p) < 1e-6);
}

#[test]
fn zero_flow_and_absent_fields() {
    let g = grid();
    let flow = SampledFlow::zeros(g).unwrap();
    let ev = Functionals::new(&flow, FunctionalParams::default()).unwrap();
    let cyl = ev.cylinder(g.center(), 1.0, 0.5).unwrap();
    let v = ev.values(&cyl).unwrap();
    assert_eq!((v.a, v.c, v.c_tilde, v.g, v.f, v.e()), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
    assert_eq!((v.d, v.p), (Some(0.0), Some(0.0)));

    let nop = make_shear_flow(g).unwrap().without_pressure();
    let ev = Functionals::new(&nop, FunctionalParams::default()).unwrap();
    assert!(matches!(ev.d(&cyl), Err(Error::PressureRequired)));
    assert!(matches!(ev.p(&cyl), Err(Error::PressureRequired)));
    let rep = ev.report(&cyl).unwrap();
    assert!(rep.pressure_absent && rep.d.is_none() && rep.p.is_none());
    assert!(rep.a > 0.0);
}

#[test]
fn beltrami_g_decreases_with_window_start() {
    let g = GridSpec::periodic(32, 33, 0.0, 2.0).unwrap();
    let flow = make_beltrami_flow(g, [1.0, 1.0, 1.0], 1.0).unwrap();
    let ev = Functionals::new(&flow, FunctionalParams::relaxed()).unwrap();
    let c = g.center();
    let vals: Vec<f64> = [0.5, 1.0, 1.5, 2.0].iter().map(|&t| ev.g(&ev.cylinder(c, t, 0.6).unwrap()).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
}

#[test]
fn e_monotone_under_nesting() {
    let g = GridSpec::periodic(32, 33, 0.0, 2.0).unwrap();
    let flow = make_beltrami_flow(g, [1.0, 0.7, 0.4], 1.0).unwrap();
    let ev = Functionals::new(&flow, FunctionalParams::relaxed()).unwrap();
    let c = g.center();
    let r = 1.0;
    let e = ev.values(&ev.cylinder(c, 2.0, r).unwrap()).unwrap().e();
    for theta in [0.125, 0.25, 0.5, 0.75] {
        let et = ev.values(&ev.cylinder(c, 2.0, theta * r).unwrap()).unwrap().e();
        assert!(et <= e / theta * (1.0 + 1e-3), "θ = {theta}: {et} vs {}", e / theta);
    }
}

#[test]
fn strict_policy_rejects_unresolved_cylinders() {
    let flow = make_shear_flow(grid()).unwrap();
    let ev = Functionals::new(&flow, FunctionalParams::default()).unwrap();
    let c = flow.grid().center();
    assert!(matches!(ev.cylinder(c, 1.0, 0.2), Err(Error::UnderResolved { .. })));
    assert!(matches!(ev.cylinder([c[0] + 1.0, c[1], c[2]], 1.0, 0.5), Err(Error::OutsideRegion(_))));
    let bad = FunctionalParams { q: 1.5, ..FunctionalParams::default() };
    assert!(Functionals::new(&flow, bad).is_err());
}
