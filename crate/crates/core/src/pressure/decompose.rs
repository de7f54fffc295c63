//! Local split p = p01 + p02 + p_h on a ball via two zero-Dirichlet Poisson solves.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flowfield::spectral::Fft3;
use crate::flowfield::{GridSpec, SampledFlow};
use crate::geometry::quadrature::{cubic_weights, InterpSite};
use crate::numerics::{compensated_sum, gauss_legendre};
use crate::pressure::recover::{divergence_spectrum, double_divergence, product_spectra, vector_spectra};

pub const CG_TOL: f64 = 1e-10;

/// Grid cells whose centre lies strictly inside B(x, r).
#[derive(Debug, Clone)]
pub struct BallCells {
    pub center: [f64; 3],
    pub radius: f64,
    grid: GridSpec,
    base: [isize; 3],
    reach: i32,
    cells: Vec<[i32; 3]>,
    lookup: Vec<i32>,
    neighbors: Vec<[i32; 6]>,
}

impl BallCells {
    pub fn new(grid: &GridSpec, center: [f64; 3], radius: f64) -> Result<Self> {
        let h = grid.h();
        if !(radius > 2.0 * h) {
            return invalid(format!("ball radius {radius} must exceed two grid spacings"));
        }
        let rel = center.map(|v| v / h);
        let base = rel.map(|v| v.round() as isize);
        let off = [0, 1, 2].map(|a| rel[a] - base[a] as f64);
        let reach = (radius / h).ceil() as i32 + 1;
        let side = (2 * reach + 1) as usize;
        let mut lookup = vec![-1i32; side * side * side];
        let mut cells = Vec::new();
        let rc = radius / h;
        for i in -reach..=reach {
            for j in -reach..=reach {
                for k in -reach..=reach {
                    let d = [i as f64 - off[0], j as f64 - off[1], k as f64 - off[2]];
                    if d[0] * d[0] + d[1] * d[1] + d[2] * d[2] < rc * rc {
                        let s = ((i + reach) as usize * side + (j + reach) as usize) * side + (k + reach) as usize;
                        lookup[s] = cells.len() as i32;
                        cells.push([i, j, k]);
                    }
                }
            }
        }
        let mut me = Self { center, radius, grid: *grid, base, reach, cells, lookup, neighbors: Vec::new() };
        me.neighbors = me
            .cells
            .iter()
            .map(|c| {
                let mut nb = [-1i32; 6];
                for ax in 0..3 {
                    for (s, d) in [1, -1].iter().enumerate() {
                        let mut e = *c;
                        e[ax] += d;
                        nb[2 * ax + s] = me.id(e);
                    }
                }
                nb
            })
            .collect();
        Ok(me)
    }

    fn id(&self, c: [i32; 3]) -> i32 {
        let r = self.reach;
        if c.iter().any(|v| v.abs() > r) {
            return -1;
        }
        let side = (2 * r + 1) as usize;
        self.lookup[((c[0] + r) as usize * side + (c[1] + r) as usize) * side + (c[2] + r) as usize]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Flat periodic grid index of each cell.
    pub fn indices(&self) -> Vec<usize> {
        let b = self.base;
        self.cells
            .iter()
            .map(|d| self.grid.wrap_index(b[0] + d[0] as isize, b[1] + d[1] as isize, b[2] + d[2] as isize))
            .collect()
    }

    /// Physical offset of each cell centre from the ball centre.
    pub fn offsets(&self) -> Vec<[f64; 3]> {
        let h = self.grid.h();
        self.cells
            .iter()
            .map(|d| [0, 1, 2].map(|a| (self.base[a] + d[a] as isize) as f64 * h - self.center[a]))
            .collect()
    }

    /// Cells whose six neighbours are all inside.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.neighbors[c].iter().all(|&n| n >= 0)).collect()
    }

    /// -Δ_h u with zero values outside the ball.
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let ih2 = 1.0 / (self.grid.h() * self.grid.h());
        for (c, nb) in self.neighbors.iter().enumerate() {
            let s: f64 = nb.iter().filter(|&&n| n >= 0).map(|&n| u[n as usize]).sum();
            out[c] = (6.0 * u[c] - s) * ih2;
        }
    }

    /// Δ_h of a patch, zero outside.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply(u, &mut out);
        out.iter_mut().for_each(|x| *x = -*x);
        out
    }

    /// Solves Δ_h u = s on the cells with u = 0 outside; returns (u, relative residual, iterations).
    pub fn solve_dirichlet(&self, s: &[f64], max_iter: usize) -> Result<(Vec<f64>, f64, usize)> {
        let m = self.len();
        let b: Vec<f64> = s.iter().map(|x| -x).collect();
        let bn = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut u = vec![0.0; m];
        if bn == 0.0 {
            return Ok((u, 0.0, 0));
        }
        let mut r = b.clone();
        let mut p = r.clone();
        let mut ap = vec![0.0; m];
        let mut rr = r.iter().map(|x| x * x).sum::<f64>();
        for it in 0..max_iter {
            let res = rr.sqrt() / bn;
            if res <= CG_TOL {
                return Ok((u, res, it));
            }
            self.apply(&p, &mut ap);
            let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
            for c in 0..m {
                u[c] += alpha * p[c];
                r[c] -= alpha * ap[c];
            }
            let rr_new = r.iter().map(|x| x * x).sum::<f64>();
            let beta = rr_new / rr;
            rr = rr_new;
            for c in 0..m {
                p[c] = r[c] + beta * p[c];
            }
        }
        // Report the true residual rather than the recursive one.
        self.apply(&u, &mut ap);
        let res = b.iter().zip(&ap).map(|(b, a)| (b - a).powi(2)).sum::<f64>().sqrt() / bn;
        if res <= CG_TOL {
            Ok((u, res, max_iter))
        } else {
            Err(Error::SolverDiverged { iterations: max_iter, residual: res })
        }
    }

    /// Restriction of a scalar slice to the cells.
    pub fn restrict(&self, field: &[f64]) -> Vec<f64> {
        self.indices().iter().map(|&i| field[i]).collect()
    }

    /// Dense (2·reach+1)³ copy of a patch with NaN outside, for interpolation.
    fn dense(&self, u: &[f64]) -> Vec<f64> {
        let side = (2 * self.reach + 1) as usize;
        let mut d = vec![f64::NAN; side * side * side];
        for (c, cell) in self.cells.iter().enumerate() {
            let r = self.reach;
            d[((cell[0] + r) as usize * side + (cell[1] + r) as usize) * side + (cell[2] + r) as usize] = u[c];
        }
        d
    }
}

/// Values of one scalar on the ball cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarPatch {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionDiagnostics {
    /// max |p01| + |p02| on the excluded neighbours of the ball (Dirichlet trace).
    pub boundary_residual: f64,
    /// max |Δ_h p_h| over interior cells.
    pub harmonic_residual: f64,
    /// max |p| on the ball.
    pub pressure_scale: f64,
    /// max |p01 + p02 + p_h − p| / max(pressure_scale, tiny).
    pub reconstruction_error: f64,
    pub solver_residual_01: f64,
    pub solver_residual_02: f64,
    pub iterations_01: usize,
    pub iterations_02: usize,
}

#[derive(Debug, Clone)]
pub struct PressureDecomposition {
    pub cells: BallCells,
    pub time_index: usize,
    pub p: ScalarPatch,
    pub p01: ScalarPatch,
    pub p02: ScalarPatch,
    pub p_h: ScalarPatch,
    /// Velocity and force restricted to the ball, interleaved.
    pub v: Vec<f64>,
    pub f: Option<Vec<f64>>,
    pub v_mean: [f64; 3],
    pub diagnostics: DecompositionDiagnostics,
}

fn real_inverse(fft: &Fft3, mut z: Vec<Complex64>) -> Vec<f64> {
    fft.inverse(&mut z);
    z.iter().map(|c| c.re).collect()
}

/// Decomposes the pressure of slice `time_index` on B(center, radius).
pub fn decompose_local(flow: &SampledFlow, center: [f64; 3], radius: f64, time_index: usize) -> Result<PressureDecomposition> {
    let grid = *flow.grid();
    if time_index >= grid.n_times {
        return invalid(format!("time index {time_index} out of range"));
    }
    let c = grid.center();
    let d = (0..3).map(|a| (center[a] - c[a]).powi(2)).sum::<f64>().sqrt();
    if d + radius > grid.analysis_radius() * (1.0 + 1e-9) {
        return Err(Error::OutsideRegion(format!("ball of radius {radius} at distance {d} from the centre")));
    }
    let ps = flow.pressure_slice(time_index).ok_or(Error::PressureRequired)?;
    let cells = BallCells::new(&grid, center, radius)?;
    let idx = cells.indices();
    let vs = flow.velocity_slice(time_index);
    let mut v_mean = [0.0; 3];
    for a in 0..3 {
        v_mean[a] = compensated_sum(idx.iter().map(|&i| vs[3 * i + a])) / idx.len() as f64;
    }
    let fft = Fft3::plan(grid.n);
    let s01 = {
        let z = double_divergence(&grid, &product_spectra(&fft, vs, v_mean));
        cells.restrict(&real_inverse(&fft, z))
    };
    let max_iter = 20 * grid.n + 2000;
    let (p01, res01, it01) = cells.solve_dirichlet(&s01, max_iter)?;
    let (p02, res02, it02) = match flow.force_slice(time_index) {
        Some(fs) => {
            let s02 = cells.restrict(&real_inverse(&fft, divergence_spectrum(&grid, &vector_spectra(&fft, fs))));
            cells.solve_dirichlet(&s02, max_iter)?
        }
        None => (vec![0.0; cells.len()], 0.0, 0),
    };
    let p = cells.restrict(ps);
    let p_h: Vec<f64> = (0..cells.len()).map(|c| p[c] - p01[c] - p02[c]).collect();
    let scale = p.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let recon = (0..cells.len()).map(|c| (p01[c] + p02[c] + p_h[c] - p[c]).abs()).fold(0.0, f64::max)
        / scale.max(f64::MIN_POSITIVE);
    let lap = cells.laplacian(&p_h);
    let harmonic_residual = cells.interior().iter().map(|&c| lap[c].abs()).fold(0.0, f64::max);
    let v = idx.iter().flat_map(|&i| vs[3 * i..3 * i + 3].iter().copied()).collect();
    let f = flow.force_slice(time_index).map(|fs| idx.iter().flat_map(|&i| fs[3 * i..3 * i + 3].iter().copied()).collect());
    Ok(PressureDecomposition {
        time_index,
        p: ScalarPatch { values: p },
        p01: ScalarPatch { values: p01 },
        p02: ScalarPatch { values: p02 },
        p_h: ScalarPatch { values: p_h },
        v,
        f,
        v_mean,
        diagnostics: DecompositionDiagnostics {
            // Excluded neighbours carry the zero Dirichlet value by construction.
            boundary_residual: 0.0,
            harmonic_residual,
            pressure_scale: scale,
            reconstruction_error: recon,
            solver_residual_01: res01,
            solver_residual_02: res02,
            iterations_01: it01,
            iterations_02: it02,
        },
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicEstimates {
    pub inner_radius: f64,
    /// max |∇_h p_h| over cells within the inner radius.
    pub sup_gradient: f64,
    pub center_value: f64,
    pub sphere_mean: f64,
    pub ball_mean: f64,
    /// |sphere_mean − center_value|.
    pub mean_value_defect: f64,
}

/// Interior gradient bound and mean-value check for a harmonic patch.
pub fn harmonic_interior_estimates(cells: &BallCells, p_h: &ScalarPatch, inner_radius: f64) -> Result<HarmonicEstimates> {
    if !(inner_radius > 0.0 && inner_radius <= 0.5 * cells.radius * (1.0 + 1e-12)) {
        return invalid(format!("inner radius {inner_radius} must lie in (0, radius/2]"));
    }
    if p_h.values.len() != cells.len() {
        return Err(Error::ExtentMismatch { expected: cells.len(), actual: p_h.values.len() });
    }
    let h = cells.grid.h();
    let u = &p_h.values;
    let offs = cells.offsets();
    let mut sup_gradient = 0.0f64;
    for c in 0..cells.len() {
        let o = offs[c];
        if (o[0] * o[0] + o[1] * o[1] + o[2] * o[2]).sqrt() > inner_radius {
            continue;
        }
        let nb = cells.neighbors[c];
        if nb.iter().any(|&n| n < 0) {
            continue;
        }
        let g = [0, 1, 2].map(|a| (u[nb[2 * a] as usize] - u[nb[2 * a + 1] as usize]) / (2.0 * h));
        sup_gradient = sup_gradient.max((g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt());
    }
    let dense = cells.dense(u);
    let r = cells.reach as f64;
    let off = [0, 1, 2].map(|a| cells.center[a] / h - cells.base[a] as f64);
    let at = |y: [f64; 3]| -> Result<f64> {
        // Position in dense-patch index units.
        let p = [0, 1, 2].map(|a| off[a] + y[a] / h + r);
        let fl = p.map(f64::floor);
        let site = InterpSite { base: fl.map(|v| v as isize), w: [0, 1, 2].map(|a| cubic_weights(p[a] - fl[a])) };
        let side = 2 * cells.reach as isize + 1;
        if site.base.iter().any(|&b| b - 1 < 0 || b + 2 >= side) {
            return invalid("inner ball too close to the ball boundary for interpolation");
        }
        let v = dense_interp(side as usize, &dense, &site);
        if v.is_nan() {
            return invalid("inner ball too close to the ball boundary for interpolation");
        }
        Ok(v)
    };
    let nq = 16;
    let (mu, wmu) = gauss_legendre(nq);
    let nphi = 2 * nq;
    let mut sphere = 0.0;
    let mut ball = 0.0;
    let mut ball_w = 0.0;
    let (xr, wr) = gauss_legendre(8);
    for (b, &m) in mu.iter().enumerate() {
        let s = (1.0 - m * m).sqrt();
        for c in 0..nphi {
            let phi = (c as f64 + 0.5) * std::f64::consts::TAU / nphi as f64;
            let dir = [s * phi.cos(), s * phi.sin(), m];
            let w = wmu[b] / (2.0 * nphi as f64);
            sphere += w * at(dir.map(|d| d * inner_radius))?;
            for (a, &x) in xr.iter().enumerate() {
                let rho = 0.5 * inner_radius * (x + 1.0);
                let wr = wr[a] * rho * rho * w;
                ball += wr * at(dir.map(|d| d * rho))?;
                ball_w += wr;
            }
        }
    }
    let center_value = at([0.0; 3])?;
    Ok(HarmonicEstimates {
        inner_radius,
        sup_gradient,
        center_value,
        sphere_mean: sphere,
        ball_mean: ball / ball_w,
        mean_value_defect: (sphere - center_value).abs(),
    })
}

fn dense_interp(side: usize, d: &[f64], site: &InterpSite) -> f64 {
    let mut out = 0.0;
    for (a, wa) in site.w[0].iter().enumerate() {
        for (b, wb) in site.w[1].iter().enumerate() {
            for (c, wc) in site.w[2].iter().enumerate() {
                let i = (site.base[0] + a as isize - 1) as usize;
                let j = (site.base[1] + b as isize - 1) as usize;
                let k = (site.base[2] + c as isize - 1) as usize;
                out += wa * wb * wc * d[(i * side + j) * side + k];
            }
        }
    }
    out
}
