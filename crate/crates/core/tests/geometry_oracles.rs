use std::f64::consts::PI;

use cknscope::flowfield::GridSpec;
use cknscope::geometry::{ball_integral, ball_mean, ball_quadrature, ParabolicCylinder, QuadratureCache, TimeWindow};

fn grid(n: usize) -> GridSpec {
    GridSpec::periodic(n, 17, 0.0, 1.0).unwrap()
}

fn sample(g: &GridSpec, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; g.points()];
    for i in 0..g.n {
        for j in 0..g.n {
            for k in 0..g.n {
                out[g.index(i, j, k)] = f(g.node(i, j, k));
            }
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn ball_volume_and_fraction_weights() {
    let g = grid(64);
    let c = g.center();
    let ones = vec![1.0; g.points()];
    let exact = 4.0 * PI * 0.125 / 3.0;
    assert!(rel(ball_integral(&g, &ones, c, 0.5).unwrap(), exact) < 5e-3);
    let q = ball_quadrature(&g, c, 0.5, 4.0).unwrap();
    assert!(rel(q.fraction_volume(), exact) < 5e-3);
    assert!(q.fractions().iter().all(|(_, w)| (0.0..=1.0).contains(w)));
    // Off-centre ball with sub-cell offset.
    let x = [c[0] + 0.037, c[1] - 0.061, c[2] + 0.013];
    let q = ball_quadrature(&g, x, 0.45, 4.0).unwrap();
    let exact = 4.0 * PI * 0.45f64.powi(3) / 3.0;
    assert!(rel(q.fraction_volume(), exact) < 5e-3);
    assert!(rel(q.measure(), exact) < 5e-3);
}

#[test]
fn second_moment() {
    let g = grid(64);
    let c = g.center();
    for r in [0.4f64, 0.5, 0.7] {
        let f = sample(&g, |x| (x[1] - c[1]).powi(2));
        let exact = 4.0 * PI * r.powi(5) / 15.0;
        assert!(rel(ball_integral(&g, &f, c, r).unwrap(), exact) < 1e-2, "r = {r}");
    }
}

#[test]
fn odd_field_integrates_to_zero() {
    let g = grid(64);
    let c = g.center();
    let f = sample(&g, |x| x[0] - c[0]);
    let vol = 4.0 * PI * 0.125 / 3.0;
    assert!(ball_integral(&g, &f, c, 0.5).unwrap().abs() < 5e-3 * vol * 0.5);
    assert!(ball_mean(&g, &f, c, 0.5).unwrap().abs() < 1e-12);
}

#[test]
fn means() {
    let g = grid(64);
    let c = g.center();
    let k = vec![3.25; g.points()];
    assert_eq!(ball_mean(&g, &k, c, 0.5).unwrap(), 3.25);
    let f = sample(&g, |x| (0..3).map(|a| (x[a] - c[a]).powi(2)).sum());
    assert!(rel(ball_mean(&g, &f, c, 0.5).unwrap(), 0.6 * 0.25) < 1e-2);
}

#[test]
fn quadrature_converges_at_second_order() {
    let err = |n: usize| {
        let g = GridSpec::periodic(n, 2, 0.0, 1.0).unwrap();
        let c = g.center();
        let x = [c[0] + 0.0123, c[1] - 0.0217, c[2] + 0.0071];
        let f = sample(&g, |y| (0..3).map(|a| (y[a] - x[a]).powi(2)).sum());
        let r = 0.8f64;
        (ball_integral(&g, &f, x, r).unwrap() - 4.0 * PI * r.powi(5) / 5.0).abs()
    };
    let (e1, e2) = (err(32), err(64));
    let order = (e1 / e2).log2();
    eprintln!("quadrature errors {e1:e} {e2:e} order {order}");
    assert!(order >= 1.9, "errors {e1:e} {e2:e}, order {order}");
}

#[test]
fn translation_equivariance() {
    let g = grid(64);
    let c = g.center();
    let bump = |x: [f64; 3], x0: [f64; 3]| (-(0..3).map(|a| (x[a] - x0[a]).powi(2)).sum::<f64>() * 4.0).exp();
    let d = [0.13, -0.07, 0.21];
    let x1 = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
    let f0 = sample(&g, |x| bump(x, c));
    let f1 = sample(&g, |x| bump(x, x1));
    let a = ball_integral(&g, &f0, c, 0.5).unwrap();
    let b = ball_integral(&g, &f1, x1, 0.5).unwrap();
    assert!(rel(a, b) < 2e-3, "{a} vs {b}");
}

#[test]
fn small_ball_rule() {
    let g = grid(32);
    let c = g.center();
    let h = g.h();
    let cache = QuadratureCache::new();
    for rc in [0.7, 1.5, 3.2] {
        let r = rc * h;
        let q = cache.ball(&g, [c[0] + 0.3 * h, c[1], c[2] - 0.2 * h], r, 0.5).unwrap();
        assert!(q.is_interpolated());
        let f = sample(&g, |x| (x[1] - c[1]).powi(2));
        let exact = 4.0 * PI * r.powi(5) / 15.0;
        assert!(rel(q.integrate(&f), exact) < 1e-3, "r/h = {rc}");
        assert!(rel(q.measure(), 4.0 * PI * r.powi(3) / 3.0) < 1e-12);
    }
    assert_eq!(cache.len(), 3);
}

#[test]
fn cache_reuses_translated_stencils() {
    let g = grid(32);
    let cache = QuadratureCache::new();
    let c = g.center();
    let h = g.h();
    for s in 0..4 {
        cache.ball(&g, [c[0] + s as f64 * h, c[1], c[2]], 0.8, 4.0).unwrap();
    }
    assert_eq!(cache.len(), 1);
}

#[test]
fn cylinder_measure_and_windows() {
    let g = grid(64);
    let ones = vec![1.0; g.points()];
    let q = ball_quadrature(&g, g.center(), 0.5, 4.0).unwrap();
    let space = q.integrate(&ones);
    let tw = TimeWindow::new(&g, 0.75, 1.0).unwrap();
    let cyl = ParabolicCylinder::new(g.center(), 1.0, 0.5).unwrap();
    let exact = cyl.volume();
    assert!(rel(tw.integrate(|_| space), exact) < 1e-2);
    // Time-odd integrand about the window midpoint.
    let mid = 0.875;
    assert!(tw.integrate(|j| g.time(j) - mid).abs() < 1e-14);
}
