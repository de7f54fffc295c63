//! Analytic and synthetic test flows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::flowfield::flow::SampledFlow;
use crate::flowfield::grid::GridSpec;
use crate::flowfield::spectral::{apply_symbol, forward_pair, wavenumbers, Fft3};
use crate::numerics::smooth_step_inf;
use crate::pressure::recover_pressure;

/// Window equal to 1 for d ≤ L/4 and 0 for d ≥ 3L/8, C^∞ in between.
pub fn analysis_window(box_length: f64, d: f64) -> f64 {
    1.0 - smooth_step_inf((d.abs() - 0.25 * box_length) / (0.125 * box_length))
}

/// Odd periodic profile equal to x2 - L/2 on the analysis subregion.
pub fn shear_profile(box_length: f64, x2: f64) -> f64 {
    let y = x2 - 0.5 * box_length;
    y * analysis_window(box_length, y)
}

fn fill_slices<F>(grid: &GridSpec, comps: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, [f64; 3], &mut [f64]) + Sync,
{
    let m = grid.points();
    let mut out = vec![0.0; grid.n_times * m * comps];
    out.par_chunks_mut(m * comps).enumerate().for_each(|(t, slice)| {
        for i in 0..grid.n {
            for j in 0..grid.n {
                for k in 0..grid.n {
                    let p = grid.index(i, j, k);
                    f(t, grid.node(i, j, k), &mut slice[p * comps..(p + 1) * comps]);
                }
            }
        }
    });
    out
}

/// Steady shear v = (s(x2), 0, 0), p = 0, no force.
pub fn make_shear_flow(grid: GridSpec) -> Result<SampledFlow> {
    grid.validate()?;
    let l = grid.box_length;
    let v = fill_slices(&grid, 3, |_, x, out| out[0] = shear_profile(l, x[1]));
    let p = vec![0.0; grid.n_times * grid.points()];
    SampledFlow::new(grid, v, Some(p), None, "shear")
}

/// ABC field with unit wavenumber, ∇×V = V.
pub fn beltrami_velocity(amp: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    let [a, b, c] = amp;
    [
        a * x[2].sin() + c * x[1].cos(),
        b * x[0].sin() + a * x[2].cos(),
        c * x[1].sin() + b * x[0].cos(),
    ]
}

/// Decaying Beltrami flow v = e^{-νt} V(x) with p = -|v|²/2, force-free.
pub fn make_beltrami_flow(grid: GridSpec, amplitudes: [f64; 3], viscosity: f64) -> Result<SampledFlow> {
    grid.validate()?;
    if !(viscosity > 0.0 && viscosity.is_finite()) {
        return invalid(format!("viscosity must be positive, got {viscosity}"));
    }
    let times = grid.times();
    let v = fill_slices(&grid, 3, |t, x, out| {
        let d = (-viscosity * times[t]).exp();
        let w = beltrami_velocity(amplitudes, x);
        for c in 0..3 {
            out[c] = d * w[c];
        }
    });
    let p = v.chunks_exact(3).map(|w| -0.5 * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2])).collect();
    SampledFlow::new(
        grid,
        v,
        Some(p),
        None,
        format!("beltrami A={} B={} C={} nu={viscosity}", amplitudes[0], amplitudes[1], amplitudes[2]),
    )
}

/// Self-similar profile v = (T−t)^{-1/2} U((x−x_c)/√(T−t)), U = ∇×(σ e^{-|y|²} e3).
///
/// Equivalently v = ∇×(Φ e3) with Φ = σ exp(-|x−x_c|²/(T−t)); Φ is windowed radially
/// outside the analysis subregion and differentiated spectrally, so the discrete field is
/// exactly divergence-free. Slices with t ≥ T are zero.
pub fn make_selfsimilar_fixture(grid: GridSpec, blowup_time: f64, profile_scale: f64) -> Result<SampledFlow> {
    grid.validate()?;
    if !(blowup_time > grid.t0 && blowup_time.is_finite()) {
        return invalid(format!("blow-up time {blowup_time} must exceed t0 = {}", grid.t0));
    }
    if !(profile_scale > 0.0 && profile_scale.is_finite()) {
        return invalid(format!("profile scale must be positive, got {profile_scale}"));
    }
    let n = grid.n;
    let m = grid.points();
    let l = grid.box_length;
    let xc = grid.center();
    let fft = Fft3::plan(n);
    let (_, kd) = wavenumbers(&grid);
    let slices: Vec<Vec<f64>> = grid
        .times()
        .into_par_iter()
        .map(|t| {
            let mut out = vec![0.0; 3 * m];
            let s = blowup_time - t;
            if s <= 0.0 {
                return out;
            }
            let mut phi = vec![0.0; m];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let x = grid.node(i, j, k);
                        let d2 = (0..3).map(|a| (x[a] - xc[a]).powi(2)).sum::<f64>();
                        phi[grid.index(i, j, k)] = profile_scale * (-d2 / s).exp() * analysis_window(l, d2.sqrt());
                    }
                }
            }
            // v1 = ∂2Φ, v2 = -∂1Φ packed as one inverse transform.
            let mut z = forward_pair(&fft, &phi, None);
            apply_symbol(n, &mut z, |i, j, _| Complex64::new(0.0, kd[j]) + Complex64::new(kd[i], 0.0));
            fft.inverse(&mut z);
            for p in 0..m {
                out[3 * p] = z[p].re;
                out[3 * p + 1] = z[p].im;
            }
            out
        })
        .collect();
    SampledFlow::new(
        grid,
        slices.concat(),
        None,
        None,
        format!("selfsimilar T={blowup_time} sigma={profile_scale}"),
    )
}

/// Mode coefficients of one random divergence-free field, independent of the grid size.
struct RandomModes {
    modes: Vec<([i64; 3], [Complex64; 3])>,
}

impl RandomModes {
    fn draw(rng: &mut ChaCha8Rng, kmax: i64) -> Self {
        let mut modes = Vec::new();
        for a in -kmax..=kmax {
            for b in -kmax..=kmax {
                for c in -kmax..=kmax {
                    let m = [a, b, c];
                    if m <= [0, 0, 0] {
                        continue;
                    }
                    let k2 = (a * a + b * b + c * c) as f64;
                    let mut z = [Complex64::default(); 3];
                    for zc in z.iter_mut() {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        *zc = Complex64::new(re, im) / k2;
                    }
                    let dot = (z[0] * a as f64 + z[1] * b as f64 + z[2] * c as f64) / k2;
                    for (d, zc) in z.iter_mut().enumerate() {
                        *zc -= dot * m[d] as f64;
                    }
                    modes.push((m, z));
                }
            }
        }
        let mut s = Self { modes };
        let ms: f64 = 2.0 * s.modes.iter().map(|(_, z)| z.iter().map(|c| c.norm_sqr()).sum::<f64>()).sum::<f64>();
        if ms > 0.0 {
            let f = 1.0 / ms.sqrt();
            s.modes.iter_mut().for_each(|(_, z)| z.iter_mut().for_each(|c| *c *= f));
        }
        s
    }

    /// Unit-rms real field on the grid, interleaved components.
    fn synthesize(&self, grid: &GridSpec) -> Vec<f64> {
        let n = grid.n;
        let fft = Fft3::plan(n);
        let idx = |m: i64| m.rem_euclid(n as i64) as usize;
        let mut s12 = vec![Complex64::default(); grid.points()];
        let mut s3 = vec![Complex64::default(); grid.points()];
        let i = Complex64::new(0.0, 1.0);
        for (m, z) in &self.modes {
            let p = (idx(m[0]) * n + idx(m[1])) * n + idx(m[2]);
            let q = (idx(-m[0]) * n + idx(-m[1])) * n + idx(-m[2]);
            s12[p] += z[0] + i * z[1];
            s12[q] += z[0].conj() + i * z[1].conj();
            s3[p] += z[2];
            s3[q] += z[2].conj();
        }
        let scale = grid.points() as f64;
        fft.inverse(&mut s12);
        fft.inverse(&mut s3);
        let mut out = vec![0.0; 3 * grid.points()];
        for p in 0..grid.points() {
            out[3 * p] = s12[p].re * scale;
            out[3 * p + 1] = s12[p].im * scale;
            out[3 * p + 2] = s3[p].re * scale;
        }
        out
    }
}

/// Band-limited random divergence-free flow v = cos(ωt+φ)V_a + sin(ωt+φ)V_b, with V_a, V_b of rms
/// `amplitude`; pressure recovered spectrally. The physical field depends only on the seed and
/// `max_wavenumber`, not on n.
pub fn make_random_divfree_flow(grid: GridSpec, seed: u64, max_wavenumber: usize, amplitude: f64) -> Result<SampledFlow> {
    grid.validate()?;
    if max_wavenumber == 0 || max_wavenumber > grid.n / 4 {
        return invalid(format!("max_wavenumber {max_wavenumber} not resolvable on n = {} (need 1..=n/4)", grid.n));
    }
    if !amplitude.is_finite() {
        return invalid("amplitude must be finite");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega: f64 = rng.gen_range(0.5..1.5);
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let kmax = max_wavenumber as i64;
    let va = RandomModes::draw(&mut rng, kmax).synthesize(&grid);
    let vb = RandomModes::draw(&mut rng, kmax).synthesize(&grid);
    let m3 = 3 * grid.points();
    let times = grid.times();
    let mut v = vec![0.0; grid.n_times * m3];
    v.par_chunks_mut(m3).enumerate().for_each(|(t, slice)| {
        let (s, c) = (omega * times[t] + phase).sin_cos();
        for p in 0..m3 {
            slice[p] = amplitude * (c * va[p] + s * vb[p]);
        }
    });
    let flow = SampledFlow::new(
        grid,
        v,
        None,
        None,
        format!("random seed={seed} kmax={max_wavenumber} amplitude={amplitude}"),
    )?;
    recover_pressure(&flow)
}

/// Applies v_λ(x,t) = λ v(λx, λ²t) to an analytic sampler, keeping the same discrete lattice.
///
/// The returned grid has box length L/λ and times t/λ²; node values are the rescaled ones, so
/// the discrete problem is the original one viewed in rescaled units.
pub fn rescale_flow(flow: &SampledFlow, lambda: f64) -> Result<SampledFlow> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return invalid(format!("scale factor must be positive, got {lambda}"));
    }
    let g = flow.grid();
    let grid = GridSpec::new(g.n, g.box_length / lambda, g.n_times, g.t0 / (lambda * lambda), g.t1 / (lambda * lambda))?;
    let l2 = lambda * lambda;
    SampledFlow::new(
        grid,
        flow.velocity().iter().map(|v| lambda * v).collect(),
        flow.pressure().map(|p| p.iter().map(|v| l2 * v).collect()),
        flow.force().map(|f| f.iter().map(|v| l2 * lambda * v).collect()),
        format!("{} rescaled lambda={lambda}", flow.metadata()),
    )
}
