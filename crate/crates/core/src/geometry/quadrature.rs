//! Ball quadrature on the periodic grid.
//!
//! Balls with r ≥ 4h use cell-fraction weights with first and second moment corrections
//! applied through central differences of the integrand, which removes the leading staircase
//! and midpoint errors. Cut cells are sampled by columns integrated exactly along x3. Smaller balls use a spherical product Gauss rule and
//! tricubic interpolation of the sampled fields.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::flowfield::GridSpec;
use crate::numerics::{compensated_sum, gauss_legendre};

/// r / h below which the interpolated spherical rule is used.
pub const STENCIL_MIN_CELLS: f64 = 4.0;
/// Columns per axis used to sample a cut cell.
const COLUMNS: usize = 8;

/// Volume fraction, first and diagonal second moments (cell units, relative to the cell centre)
/// of the part of the unit cell centred at `d` that lies inside the ball of radius `rc` about
/// the origin. Columns along x3 are integrated exactly over their chord; the transverse
/// directions use a midpoint rule.
fn cut_cell_moments(d: [f64; 3], rc: f64) -> (f64, [f64; 3], [f64; 3]) {
    let s = 1.0 / COLUMNS as f64;
    let col_var = s * s / 12.0;
    let mut w = 0.0;
    let mut m1 = [0.0; 3];
    let mut m2 = [0.0; 3];
    for a in 0..COLUMNS {
        let u1 = (a as f64 + 0.5) * s - 0.5;
        for b in 0..COLUMNS {
            let u2 = (b as f64 + 0.5) * s - 0.5;
            let rho2 = (d[0] + u1).powi(2) + (d[1] + u2).powi(2);
            if rho2 >= rc * rc {
                continue;
            }
            let half = (rc * rc - rho2).sqrt();
            let lo = (-half - d[2]).max(-0.5);
            let hi = (half - d[2]).min(0.5);
            if hi <= lo {
                continue;
            }
            let len = (hi - lo) * s * s;
            w += len;
            m1[0] += u1 * len;
            m1[1] += u2 * len;
            m1[2] += 0.5 * (hi * hi - lo * lo) * s * s;
            m2[0] += (u1 * u1 + col_var) * len;
            m2[1] += (u2 * u2 + col_var) * len;
            m2[2] += (hi.powi(3) - lo.powi(3)) / 3.0 * s * s;
        }
    }
    (w, m1, m2)
}

/// Grid-independent rule with sites relative to a base node, offsets in units of h.
#[derive(Debug)]
pub struct RelativeRule {
    /// Volume fraction of each cell inside the ball (stencil regime only).
    pub fractions: Vec<([i32; 3], f64)>,
    /// Node sites and effective weights (h³ units).
    pub nodes: Vec<([i32; 3], f64)>,
    /// Off-grid sites (offsets in h) and weights (h³ units).
    pub points: Vec<([f64; 3], f64)>,
}

impl RelativeRule {
    fn stencil(off: [f64; 3], rc: f64) -> Self {
        let reach = (rc + 1.0).ceil() as i32;
        let side = (2 * reach + 3) as usize;
        let shift = reach + 1;
        let mut eff = vec![0.0; side * side * side];
        let at = |d: [i32; 3]| (((d[0] + shift) as usize * side) + (d[1] + shift) as usize) * side + (d[2] + shift) as usize;
        let mut fractions = Vec::new();
        let half_diag = 0.75f64.sqrt();
        for i in -reach..=reach {
            for j in -reach..=reach {
                for k in -reach..=reach {
                    let d = [i as f64 - off[0], j as f64 - off[1], k as f64 - off[2]];
                    let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                    if dist > rc + half_diag {
                        continue;
                    }
                    let (w, m1, m2) = if dist + half_diag <= rc {
                        (1.0, [0.0; 3], [1.0 / 12.0; 3])
                    } else {
                        cut_cell_moments(d, rc)
                    };
                    if w == 0.0 {
                        continue;
                    }
                    let c = [i, j, k];
                    fractions.push((c, w));
                    eff[at(c)] += w;
                    for ax in 0..3 {
                        let mut up = c;
                        up[ax] += 1;
                        let mut dn = c;
                        dn[ax] -= 1;
                        eff[at(up)] += 0.5 * m1[ax] + 0.5 * m2[ax];
                        eff[at(dn)] += -0.5 * m1[ax] + 0.5 * m2[ax];
                        eff[at(c)] -= m2[ax];
                    }
                }
            }
        }
        let mut nodes = Vec::new();
        for i in -shift..=shift {
            for j in -shift..=shift {
                for k in -shift..=shift {
                    let w = eff[at([i, j, k])];
                    if w != 0.0 {
                        nodes.push(([i, j, k], w));
                    }
                }
            }
        }
        Self { fractions, nodes, points: Vec::new() }
    }

    fn spherical(off: [f64; 3], rc: f64) -> Self {
        let n = ((2.0 * rc).ceil() as usize + 6).max(8);
        let (xr, wr) = gauss_legendre(n);
        let (xm, wm) = gauss_legendre(n);
        let nphi = 2 * n;
        let dphi = std::f64::consts::TAU / nphi as f64;
        let mut points = Vec::with_capacity(n * n * nphi);
        for (a, &x) in xr.iter().enumerate() {
            let rho = 0.5 * rc * (x + 1.0);
            let wrho = 0.5 * rc * wr[a] * rho * rho;
            for (b, &mu) in xm.iter().enumerate() {
                let s = (1.0 - mu * mu).sqrt();
                for c in 0..nphi {
                    let phi = (c as f64 + 0.5) * dphi;
                    let site = [off[0] + rho * s * phi.cos(), off[1] + rho * s * phi.sin(), off[2] + rho * mu];
                    points.push((site, wrho * wm[b] * dphi));
                }
            }
        }
        Self { fractions: Vec::new(), nodes: Vec::new(), points }
    }
}

/// Cubic Lagrange weights on nodes -1, 0, 1, 2 for fractional position s ∈ [0, 1).
#[inline]
pub(crate) fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

/// Quadrature for B(x, r) on a specific grid.
#[derive(Debug, Clone)]
pub struct BallQuadrature {
    pub center: [f64; 3],
    pub radius: f64,
    grid: GridSpec,
    base: [isize; 3],
    rule: Arc<RelativeRule>,
}

/// Interpolation stencil of one off-grid site.
#[derive(Debug, Clone, Copy)]
pub struct InterpSite {
    pub base: [isize; 3],
    pub w: [[f64; 4]; 3],
}

impl BallQuadrature {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// True when the interpolated spherical rule is in use.
    pub fn is_interpolated(&self) -> bool {
        !self.rule.points.is_empty()
    }

    /// Cell volume fractions (node index, fraction), stencil regime only.
    pub fn fractions(&self) -> Vec<(usize, f64)> {
        let b = self.base;
        self.rule
            .fractions
            .iter()
            .map(|(d, w)| (self.grid.wrap_index(b[0] + d[0] as isize, b[1] + d[1] as isize, b[2] + d[2] as isize), *w))
            .collect()
    }

    /// Node sites with physical weights.
    pub fn node_sites(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let h3 = self.grid.h().powi(3);
        let b = self.base;
        self.rule.nodes.iter().map(move |(d, w)| {
            (self.grid.wrap_index(b[0] + d[0] as isize, b[1] + d[1] as isize, b[2] + d[2] as isize), w * h3)
        })
    }

    /// Off-grid sites with physical weights.
    pub fn point_sites(&self) -> impl Iterator<Item = (InterpSite, f64)> + '_ {
        let h3 = self.grid.h().powi(3);
        let b = self.base;
        self.rule.points.iter().map(move |(p, w)| {
            let fl = p.map(f64::floor);
            let site = InterpSite {
                base: [0, 1, 2].map(|a| b[a] + fl[a] as isize),
                w: [0, 1, 2].map(|a| cubic_weights(p[a] - fl[a])),
            };
            (site, w * h3)
        })
    }

    /// Site weights in gather order (nodes then points).
    pub fn weights(&self) -> Vec<f64> {
        let h3 = self.grid.h().powi(3);
        self.rule.nodes.iter().map(|(_, w)| w * h3).chain(self.rule.points.iter().map(|(_, w)| w * h3)).collect()
    }

    /// Values of a C-component interleaved slice at every site, in gather order.
    pub fn gather<const C: usize>(&self, field: &[f64]) -> Vec<[f64; C]> {
        let mut out = Vec::with_capacity(self.rule.nodes.len() + self.rule.points.len());
        for (idx, _) in self.node_sites() {
            let mut v = [0.0; C];
            v.copy_from_slice(&field[C * idx..C * idx + C]);
            out.push(v);
        }
        for (site, _) in self.point_sites() {
            out.push(interpolate::<C>(&self.grid, field, &site));
        }
        out
    }

    /// ∫_B f for a scalar slice.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        let w = self.weights();
        compensated_sum(self.gather::<1>(field).iter().zip(&w).map(|(v, w)| v[0] * w))
    }

    /// ∫_B 1 under the effective weights.
    pub fn measure(&self) -> f64 {
        compensated_sum(self.weights())
    }

    /// Mean over B with the same weights, exact on constants.
    pub fn mean(&self, field: &[f64]) -> f64 {
        let vals = self.gather::<1>(field);
        let Some(v0) = vals.first().map(|v| v[0]) else { return 0.0 };
        let w = self.weights();
        v0 + compensated_sum(vals.iter().zip(&w).map(|(v, w)| w * (v[0] - v0))) / compensated_sum(w.iter().copied())
    }

    /// Σ fraction × h³.
    pub fn fraction_volume(&self) -> f64 {
        self.grid.h().powi(3) * compensated_sum(self.rule.fractions.iter().map(|(_, w)| *w))
    }
}

/// Tricubic interpolation of a C-component interleaved periodic slice.
pub fn interpolate<const C: usize>(grid: &GridSpec, field: &[f64], site: &InterpSite) -> [f64; C] {
    let mut out = [0.0; C];
    for (a, wa) in site.w[0].iter().enumerate() {
        for (b, wb) in site.w[1].iter().enumerate() {
            let wab = wa * wb;
            for (c, wc) in site.w[2].iter().enumerate() {
                let idx = grid.wrap_index(
                    site.base[0] + a as isize - 1,
                    site.base[1] + b as isize - 1,
                    site.base[2] + c as isize - 1,
                );
                let w = wab * wc;
                for (o, v) in out.iter_mut().zip(&field[C * idx..C * idx + C]) {
                    *o += w * v;
                }
            }
        }
    }
    out
}

/// Thread-safe cache of relative rules keyed by sub-cell offset and r / h.
#[derive(Debug, Default)]
pub struct QuadratureCache {
    map: RwLock<HashMap<[i64; 4], Arc<RelativeRule>>>,
}

const KEY_SCALE: f64 = 1e9;

impl QuadratureCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("quadrature cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature for B(x, r); r must be at least `min_cells` grid spacings.
    pub fn ball(&self, grid: &GridSpec, x: [f64; 3], r: f64, min_cells: f64) -> Result<BallQuadrature> {
        let h = grid.h();
        if !(r > 0.0) || r < min_cells * h * (1.0 - 1e-9) {
            return Err(Error::UnderResolved { radius: r, min_radius: min_cells * h, cells: min_cells });
        }
        let rel = x.map(|v| v / h);
        let base = rel.map(|v| v.round() as isize);
        let off = [0, 1, 2].map(|a| rel[a] - base[a] as f64);
        let rc = r / h;
        let key = [off[0], off[1], off[2], rc].map(|v| (v * KEY_SCALE).round() as i64);
        let cached = self.map.read().expect("quadrature cache poisoned").get(&key).cloned();
        let rule = match cached {
            Some(rule) => rule,
            None => {
                let off_q = [0, 1, 2].map(|a| key[a] as f64 / KEY_SCALE);
                let rc_q = key[3] as f64 / KEY_SCALE;
                let rule = Arc::new(if rc_q >= STENCIL_MIN_CELLS * (1.0 - 1e-9) {
                    RelativeRule::stencil(off_q, rc_q)
                } else {
                    RelativeRule::spherical(off_q, rc_q)
                });
                self.map.write().expect("quadrature cache poisoned").entry(key).or_insert(rule).clone()
            }
        };
        Ok(BallQuadrature { center: x, radius: r, grid: *grid, base, rule })
    }
}

/// Uncached ball quadrature (convenience for one-off integrals).
pub fn ball_quadrature(grid: &GridSpec, x: [f64; 3], r: f64, min_cells: f64) -> Result<BallQuadrature> {
    QuadratureCache::new().ball(grid, x, r, min_cells)
}

/// ∫_{B(x,r)} f for a scalar slice, with r ≥ 4h.
pub fn ball_integral(grid: &GridSpec, field: &[f64], x: [f64; 3], r: f64) -> Result<f64> {
    Ok(ball_quadrature(grid, x, r, STENCIL_MIN_CELLS)?.integrate(field))
}

/// ⟨f⟩_{B(x,r)} with the same weights as `ball_integral`.
pub fn ball_mean(grid: &GridSpec, field: &[f64], x: [f64; 3], r: f64) -> Result<f64> {
    Ok(ball_quadrature(grid, x, r, STENCIL_MIN_CELLS)?.mean(field))
}
