//! Discrete local energy balance for exact solutions with a C² space-time cutoff.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flowfield::{velocity_gradient_slice, DerivativeScheme, SampledFlow};
use crate::geometry::TimeWindow;
use crate::harness::lemmas::{CheckConfig, InequalityCheck, Term};
use crate::numerics::{smoothstep5, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffParams {
    pub center: [f64; 3],
    /// Time at which the energy is read off; must be a slice time.
    pub t: f64,
    pub r: f64,
    pub viscosity: f64,
}

impl CutoffParams {
    pub fn new(center: [f64; 3], t: f64, r: f64) -> Self {
        Self { center, t, r, viscosity: 1.0 }
    }
}

/// φ = χ(|x − x_c|/r) η((t − s)/r²), equal to 1 on Q(r) and vanishing outside Q(2r).
/// χ drops over ρ ∈ [1, 2] and η over τ ∈ [1, 4], both by the quintic smoothstep.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    pub params: CutoffParams,
}

/// Values of the cutoff and the derivatives the balance needs at one point.
#[derive(Debug, Clone, Copy, Default)]
pub struct CutoffValues {
    pub phi: f64,
    pub dt: f64,
    pub grad: [f64; 3],
    pub lap: f64,
}

impl Cutoff {
    fn chi(rho: f64) -> (f64, f64, f64) {
        if rho <= 1.0 {
            (1.0, 0.0, 0.0)
        } else if rho >= 2.0 {
            (0.0, 0.0, 0.0)
        } else {
            let (s, s1, s2) = smoothstep5(rho - 1.0);
            (1.0 - s, -s1, -s2)
        }
    }

    fn eta(tau: f64) -> (f64, f64) {
        if tau <= 1.0 {
            (1.0, 0.0)
        } else if tau >= 4.0 {
            (0.0, 0.0)
        } else {
            let (s, s1, _) = smoothstep5((tau - 1.0) / 3.0);
            (1.0 - s, -s1 / 3.0)
        }
    }

    pub fn eval(&self, d: [f64; 3], s: f64) -> CutoffValues {
        let r = self.params.r;
        let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let rho = dist / r;
        let (c, c1, c2) = Self::chi(rho);
        let (e, e1) = Self::eta((self.params.t - s) / (r * r));
        if c == 0.0 || e == 0.0 && e1 == 0.0 {
            return CutoffValues::default();
        }
        let radial = if dist > 0.0 { e * c1 / (r * dist) } else { 0.0 };
        let lap = if rho > 1.0 { e * (c2 + 2.0 * c1 / rho) / (r * r) } else { 0.0 };
        CutoffValues { phi: c * e, dt: -c * e1 / (r * r), grad: d.map(|x| radial * x), lap }
    }
}

fn slice_at(flow: &SampledFlow, t: f64) -> Result<usize> {
    let g = flow.grid();
    let u = (t - g.t0) / g.dt();
    let j = u.round();
    if (u - j).abs() > 1e-9 || j < 0.0 || j as usize >= g.n_times {
        return invalid(format!("t = {t} is not a slice time"));
    }
    Ok(j as usize)
}

/// Both sides of the local energy identity
/// ∫|v(t)|²φ + 2ν∬|∇v|²φ = ∬|v|²(∂_sφ + νΔφ) + ∬|v|² v·∇φ + 2∬p v·∇φ + 2∬f·vφ,
/// box rule in space and trapezoid in time over [t − 4r², t].
pub fn check_energy_balance(flow: &SampledFlow, params: CutoffParams) -> Result<InequalityCheck> {
    if !flow.has_pressure() {
        return Err(Error::PressureRequired);
    }
    if !(params.r > 0.0) || !(params.viscosity > 0.0) {
        return invalid("cutoff radius and viscosity must be positive");
    }
    let g = flow.grid();
    let jt = slice_at(flow, params.t)?;
    let window = TimeWindow::new(g, params.t - 4.0 * params.r * params.r, params.t)?;
    let cut = Cutoff { params };
    let nu = params.viscosity;
    let h = g.h();
    let h3 = h.powi(3);
    let reach = (2.0 * params.r / h).ceil() as isize + 1;
    let base = params.center.map(|c| (c / h).round() as isize);

    // Per-slice space integrals: [|v|²φ, |∇v|²φ, |v|²(∂φ + νΔφ), |v|² v·∇φ, p v·∇φ, f·v φ].
    let slice_terms = |j: usize, s: f64| -> [f64; 6] {
        let v = flow.velocity_slice(j);
        let p = flow.pressure_slice(j).expect("pressure checked");
        let f = flow.force_slice(j);
        let grad = velocity_gradient_slice(g, v, DerivativeScheme::Spectral);
        let mut acc: [CompensatedSum; 6] = Default::default();
        for di in -reach..=reach {
            for dj in -reach..=reach {
                for dk in -reach..=reach {
                    let (i, jj, k) = (base[0] + di, base[1] + dj, base[2] + dk);
                    let x = [i as f64 * h, jj as f64 * h, k as f64 * h];
                    let d = [x[0] - params.center[0], x[1] - params.center[1], x[2] - params.center[2]];
                    let cv = cut.eval(d, s);
                    if cv.phi == 0.0 && cv.dt == 0.0 && cv.lap == 0.0 {
                        continue;
                    }
                    let idx = g.wrap_index(i, jj, k);
                    let vv = [v[3 * idx], v[3 * idx + 1], v[3 * idx + 2]];
                    let v2 = vv[0] * vv[0] + vv[1] * vv[1] + vv[2] * vv[2];
                    let g2: f64 = grad[9 * idx..9 * idx + 9].iter().map(|x| x * x).sum();
                    let vg = vv[0] * cv.grad[0] + vv[1] * cv.grad[1] + vv[2] * cv.grad[2];
                    let fv = f.map_or(0.0, |f| f[3 * idx] * vv[0] + f[3 * idx + 1] * vv[1] + f[3 * idx + 2] * vv[2]);
                    acc[0].add(v2 * cv.phi);
                    acc[1].add(g2 * cv.phi);
                    acc[2].add(v2 * (cv.dt + nu * cv.lap));
                    acc[3].add(v2 * vg);
                    acc[4].add(p[idx] * vg);
                    acc[5].add(fv * cv.phi);
                }
            }
        }
        acc.map(|a| a.value() * h3)
    };

    let mut time_acc: [CompensatedSum; 5] = Default::default();
    for &(j, w) in &window.weights {
        let s = slice_terms(j, g.time(j));
        for (a, v) in time_acc.iter_mut().zip(&s[1..]) {
            a.add(w * v);
        }
    }
    let at_t = slice_terms(jt, params.t)[0];
    let [dissipation, heat, transport, pressure, force] = time_acc.map(|a| a.value());

    let lhs = at_t + 2.0 * nu * dissipation;
    let mut rhs_terms = vec![
        Term::new("|v|^2 (d_s phi + nu lap phi)", heat, Some(2.0)),
        Term::new("|v|^2 v.grad phi", transport, Some(3.0)),
        Term::new("2 p v.grad phi", 2.0 * pressure, Some(3.0)),
    ];
    if flow.has_force() {
        rhs_terms.push(Term::new("2 f.v phi", 2.0 * force, Some(3.0)));
    }
    let config = CheckConfig { x: params.center, t: params.t, r: params.r, theta: None, q: None, k: None };
    let components = vec![("energy at t".to_string(), at_t), ("dissipation".to_string(), dissipation)];
    InequalityCheck::balance(config, lhs, rhs_terms, components, flow.max_speed())
}
