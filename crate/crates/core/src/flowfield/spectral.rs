//! Periodic differentiation: 3-D FFTs via rustfft, plus a fourth-order central stencil.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::flowfield::flow::{SampledFlow, TensorField};
use crate::flowfield::grid::GridSpec;

/// How spatial derivatives are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeScheme {
    /// Fourier differentiation; Nyquist modes are dropped for odd derivatives.
    #[default]
    Spectral,
    /// Fourth-order central differences, exact on cubic polynomials.
    Central4,
}

/// Planned forward/inverse 3-D transform for an n³ grid. Unnormalized forward, 1/n³ inverse.
pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    /// Shared plan for size n.
    pub fn plan(n: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("fft plan cache poisoned");
        map.entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft3 { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) })
            })
            .clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let s = 1.0 / (self.n * self.n * self.n) as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let n2 = n * n;
        assert_eq!(data.len(), n2 * n);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
        let mut buf = vec![Complex64::default(); n2];
        for i in 0..n {
            let plane = &mut data[i * n2..(i + 1) * n2];
            for j in 0..n {
                for k in 0..n {
                    buf[k * n + j] = plane[j * n + k];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for j in 0..n {
                for k in 0..n {
                    plane[j * n + k] = buf[k * n + j];
                }
            }
        }
        for j in 0..n {
            for i in 0..n {
                let row = &data[i * n2 + j * n..i * n2 + j * n + n];
                for k in 0..n {
                    buf[k * n + i] = row[k];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for i in 0..n {
                let row = &mut data[i * n2 + j * n..i * n2 + j * n + n];
                for k in 0..n {
                    row[k] = buf[k * n + i];
                }
            }
        }
    }
}

/// Angular wavenumbers per FFT index: (with Nyquist, Nyquist zeroed).
pub fn wavenumbers(grid: &GridSpec) -> (Vec<f64>, Vec<f64>) {
    let n = grid.n;
    let s = 2.0 * std::f64::consts::PI / grid.box_length;
    let full: Vec<f64> = (0..n).map(|i| s * grid.wavenumber(i) as f64).collect();
    let odd = (0..n)
        .map(|i| if n % 2 == 0 && i == n / 2 { 0.0 } else { full[i] })
        .collect();
    (full, odd)
}

/// Packs two real fields into one complex array (a + i b) and transforms it.
pub fn forward_pair(fft: &Fft3, a: &[f64], b: Option<&[f64]>) -> Vec<Complex64> {
    let mut z: Vec<Complex64> = match b {
        Some(b) => a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect(),
        None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    };
    fft.forward(&mut z);
    z
}

/// Splits the transform of a packed pair a + i b into (â, b̂).
pub fn unpack_pair(n: usize, z: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let neg = |i: usize| (n - i) % n;
    let mut a = vec![Complex64::default(); z.len()];
    let mut b = vec![Complex64::default(); z.len()];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = (i * n + j) * n + k;
                let m = (neg(i) * n + neg(j)) * n + neg(k);
                let zc = z[m].conj();
                a[p] = 0.5 * (z[p] + zc);
                b[p] = Complex64::new(0.0, -0.5) * (z[p] - zc);
            }
        }
    }
    (a, b)
}

/// Multiplies a spectrum by `sym(k1, k2, k3)` pointwise, with per-axis wavenumber tables.
pub fn apply_symbol<F>(n: usize, z: &mut [Complex64], sym: F)
where
    F: Fn(usize, usize, usize) -> Complex64 + Sync,
{
    z.par_chunks_mut(n * n).enumerate().for_each(|(i, plane)| {
        for j in 0..n {
            for k in 0..n {
                plane[j * n + k] *= sym(i, j, k);
            }
        }
    });
}

fn central4_axis(grid: &GridSpec, f: &[f64], axis: usize, out: &mut [f64]) {
    let n = grid.n as isize;
    let inv = 1.0 / (12.0 * grid.h());
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let at = |d: isize| {
                    let (a, b, c) = match axis {
                        0 => (i + d, j, k),
                        1 => (i, j + d, k),
                        _ => (i, j, k + d),
                    };
                    f[grid.wrap_index(a, b, c)]
                };
                out[grid.index(i as usize, j as usize, k as usize)] =
                    (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) * inv;
            }
        }
    }
}

/// Gradient of one scalar slice; returns the three partial derivatives.
pub fn scalar_gradient(grid: &GridSpec, f: &[f64], scheme: DerivativeScheme) -> [Vec<f64>; 3] {
    let m = grid.points();
    match scheme {
        DerivativeScheme::Central4 => {
            let mut out = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
            for (axis, o) in out.iter_mut().enumerate() {
                central4_axis(grid, f, axis, o);
            }
            out
        }
        DerivativeScheme::Spectral => {
            let n = grid.n;
            let fft = Fft3::plan(n);
            let (_, kd) = wavenumbers(grid);
            let x = forward_pair(&fft, f, None);
            let mut y = x.clone();
            apply_symbol(n, &mut y, |i, j, _| Complex64::new(-kd[j], kd[i]));
            fft.inverse(&mut y);
            let mut w = x;
            apply_symbol(n, &mut w, |_, _, k| Complex64::new(0.0, kd[k]));
            fft.inverse(&mut w);
            [y.iter().map(|z| z.re).collect(), y.iter().map(|z| z.im).collect(), w.iter().map(|z| z.re).collect()]
        }
    }
}

/// Spectral Laplacian of one scalar slice.
pub fn scalar_laplacian(grid: &GridSpec, f: &[f64]) -> Vec<f64> {
    let n = grid.n;
    let fft = Fft3::plan(n);
    let (k, _) = wavenumbers(grid);
    let mut x = forward_pair(&fft, f, None);
    apply_symbol(n, &mut x, |i, j, l| Complex64::new(-(k[i] * k[i] + k[j] * k[j] + k[l] * k[l]), 0.0));
    fft.inverse(&mut x);
    x.iter().map(|z| z.re).collect()
}

fn split_components(v: &[f64]) -> [Vec<f64>; 3] {
    let m = v.len() / 3;
    let mut out = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    for (p, c) in v.chunks_exact(3).enumerate() {
        out[0][p] = c[0];
        out[1][p] = c[1];
        out[2][p] = c[2];
    }
    out
}

/// ∇ of one interleaved velocity slice, 9 components interleaved (3a + b = ∂_b v_a).
pub fn velocity_gradient_slice(grid: &GridSpec, v: &[f64], scheme: DerivativeScheme) -> Vec<f64> {
    let m = grid.points();
    let comps = split_components(v);
    let mut out = vec![0.0; 9 * m];
    let mut put = |a: usize, b: usize, d: &[f64]| {
        for p in 0..m {
            out[9 * p + 3 * a + b] = d[p];
        }
    };
    match scheme {
        DerivativeScheme::Central4 => {
            for (a, c) in comps.iter().enumerate() {
                let g = scalar_gradient(grid, c, scheme);
                for (b, d) in g.iter().enumerate() {
                    put(a, b, d);
                }
            }
        }
        DerivativeScheme::Spectral => {
            let n = grid.n;
            let fft = Fft3::plan(n);
            let (_, kd) = wavenumbers(grid);
            let x12 = forward_pair(&fft, &comps[0], Some(&comps[1]));
            for b in 0..3 {
                let mut y = x12.clone();
                apply_symbol(n, &mut y, |i, j, k| Complex64::new(0.0, [kd[i], kd[j], kd[k]][b]));
                fft.inverse(&mut y);
                put(0, b, &y.iter().map(|z| z.re).collect::<Vec<_>>());
                put(1, b, &y.iter().map(|z| z.im).collect::<Vec<_>>());
            }
            let g3 = scalar_gradient(grid, &comps[2], scheme);
            for (b, d) in g3.iter().enumerate() {
                put(2, b, d);
            }
        }
    }
    out
}

/// Cached-once gradient of the whole flow (spectral).
pub fn gradient(flow: &SampledFlow) -> TensorField {
    gradient_with(flow, DerivativeScheme::Spectral)
}

pub fn gradient_with(flow: &SampledFlow, scheme: DerivativeScheme) -> TensorField {
    let grid = *flow.grid();
    let slices: Vec<Vec<f64>> = (0..grid.n_times)
        .into_par_iter()
        .map(|j| velocity_gradient_slice(&grid, flow.velocity_slice(j), scheme))
        .collect();
    TensorField::new(grid, slices.concat()).expect("gradient of a finite flow is finite")
}

/// Divergence of one interleaved velocity slice.
pub fn divergence_slice(grid: &GridSpec, v: &[f64], scheme: DerivativeScheme) -> Vec<f64> {
    let comps = split_components(v);
    let mut div = vec![0.0; grid.points()];
    for (a, c) in comps.iter().enumerate() {
        let g = scalar_gradient(grid, c, scheme);
        div.iter_mut().zip(&g[a]).for_each(|(d, x)| *d += x);
    }
    div
}

/// max |∇·v| over all slices.
pub fn max_divergence(flow: &SampledFlow, scheme: DerivativeScheme) -> Result<f64> {
    let grid = *flow.grid();
    Ok((0..grid.n_times)
        .into_par_iter()
        .map(|j| divergence_slice(&grid, flow.velocity_slice(j), scheme).iter().fold(0.0f64, |m, d| m.max(d.abs())))
        .reduce(|| 0.0, f64::max))
}
