use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::flowfield::spectral::{forward_pair, unpack_pair, wavenumbers, Fft3};
use crate::flowfield::{GridSpec, SampledFlow};

/// Products v_j v_k in the order 11, 22, 33, 12, 13, 23.
const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

fn component(v: &[f64], c: usize) -> Vec<f64> {
    v.chunks_exact(3).map(|x| x[c]).collect()
}

/// Spectra of the six products w_jk = a_j a_k of an interleaved vector slice.
pub(crate) fn product_spectra(fft: &Fft3, v: &[f64], shift: [f64; 3]) -> Vec<Vec<Complex64>> {
    let prod = |(j, k): (usize, usize)| -> Vec<f64> {
        v.chunks_exact(3).map(|x| (x[j] - shift[j]) * (x[k] - shift[k])).collect()
    };
    let mut out = Vec::with_capacity(6);
    for pair in PAIRS.chunks(2) {
        let (a, b) = unpack_pair(fft.n(), &forward_pair(fft, &prod(pair[0]), Some(&prod(pair[1]))));
        out.push(a);
        out.push(b);
    }
    out
}

/// Spectra of the three components of an interleaved vector slice.
pub(crate) fn vector_spectra(fft: &Fft3, f: &[f64]) -> [Vec<Complex64>; 3] {
    let (a, b) = unpack_pair(fft.n(), &forward_pair(fft, &component(f, 0), Some(&component(f, 1))));
    let c = forward_pair(fft, &component(f, 2), None);
    [a, b, c]
}

/// Spectrum of -∂_j∂_k(w_jk) = Σ k_j k_k ŵ_jk.
pub(crate) fn double_divergence(grid: &GridSpec, w: &[Vec<Complex64>]) -> Vec<Complex64> {
    let n = grid.n;
    let (_, kd) = wavenumbers(grid);
    let mut out = vec![Complex64::default(); grid.points()];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let k = [kd[i], kd[j], kd[l]];
                let p = (i * n + j) * n + l;
                let mut s = Complex64::default();
                for (m, &(a, b)) in PAIRS.iter().enumerate() {
                    let mult = if a == b { 1.0 } else { 2.0 };
                    s += mult * k[a] * k[b] * w[m][p];
                }
                out[p] = s;
            }
        }
    }
    out
}

/// Spectrum of ∇·f.
pub(crate) fn divergence_spectrum(grid: &GridSpec, f: &[Vec<Complex64>; 3]) -> Vec<Complex64> {
    let n = grid.n;
    let (_, kd) = wavenumbers(grid);
    let mut out = vec![Complex64::default(); grid.points()];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let p = (i * n + j) * n + l;
                out[p] = Complex64::new(0.0, 1.0) * (kd[i] * f[0][p] + kd[j] * f[1][p] + kd[l] * f[2][p]);
            }
        }
    }
    out
}

/// Solves -Δp = ∂_j∂_k(v_j v_k) − ∇·f on one slice; zero mean.
pub fn pressure_slice(grid: &GridSpec, v: &[f64], f: Option<&[f64]>) -> Vec<f64> {
    let n = grid.n;
    let fft = Fft3::plan(n);
    let (k, _) = wavenumbers(grid);
    // Δp = -∂j∂k(vjvk) + ∇·f
    let mut rhs = double_divergence(grid, &product_spectra(&fft, v, [0.0; 3]));
    if let Some(f) = f {
        let d = divergence_spectrum(grid, &vector_spectra(&fft, f));
        rhs.iter_mut().zip(&d).for_each(|(r, d)| *r += d);
    }
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let p = (i * n + j) * n + l;
                let k2 = k[i] * k[i] + k[j] * k[j] + k[l] * k[l];
                rhs[p] = if k2 == 0.0 { Complex64::default() } else { -rhs[p] / k2 };
            }
        }
    }
    fft.inverse(&mut rhs);
    rhs.iter().map(|z| z.re).collect()
}

/// Attaches the spectrally recovered pressure (replacing any existing one).
pub fn recover_pressure(flow: &SampledFlow) -> Result<SampledFlow> {
    let grid = *flow.grid();
    let slices: Vec<Vec<f64>> = (0..grid.n_times)
        .into_par_iter()
        .map(|j| pressure_slice(&grid, flow.velocity_slice(j), flow.force_slice(j)))
        .collect();
    flow.clone().with_pressure(slices.concat())
}
