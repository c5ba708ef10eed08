//! Kernel lookups and the symmetrized 5D weight.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::sim::{KernelBank, KernelGrid};
use crate::liftspace::{Image2D, LiftedPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelWeights {
    pub sigma_kappa_exp: f64,
    pub sigma_int: f64,
}

impl Default for KernelWeights {
    fn default() -> Self {
        KernelWeights { sigma_kappa_exp: 1.0, sigma_int: 0.275 }
    }
}

impl KernelWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma_kappa_exp", self.sigma_kappa_exp), ("sigma_int", self.sigma_int)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Wraps an angle difference to the line period, [−π/2, π/2).
pub fn wrap_line(d: f64) -> f64 {
    let w = d - PI * (d / PI).round();
    if w >= PI / 2.0 {
        w - PI
    } else {
        w
    }
}

/// Trilinear interpolation at kernel-relative `(u, v, Δθ)`; cells outside
/// the grid read as 0, θ is periodic.
pub fn sample_grid(grid: &KernelGrid, u: f64, v: f64, dtheta: f64) -> f64 {
    let d = grid.dims;
    let fx = u + (d.nx / 2) as f64;
    let fy = v + (d.ny / 2) as f64;
    if !(fx > -1.0 && fy > -1.0 && fx < d.nx as f64 && fy < d.ny as f64) {
        return 0.0;
    }
    let ft = (wrap_line(dtheta) + PI / 2.0) / (PI / d.n_theta as f64);
    let (x0, y0, t0) = (fx.floor(), fy.floor(), ft.floor());
    let (ax, ay, at) = (fx - x0, fy - y0, ft - t0);
    let (x0, y0, t0) = (x0 as i64, y0 as i64, t0 as i64);
    let mut acc = 0.0;
    for (dt, wt) in [(0, 1.0 - at), (1, at)] {
        if wt == 0.0 {
            continue;
        }
        let t = (t0 + dt).rem_euclid(d.n_theta as i64) as usize;
        for (dy, wy) in [(0, 1.0 - ay), (1, ay)] {
            let y = y0 + dy;
            if wy == 0.0 || y < 0 || y >= d.ny as i64 {
                continue;
            }
            for (dx, wx) in [(0, 1.0 - ax), (1, ax)] {
                let x = x0 + dx;
                if wx == 0.0 || x < 0 || x >= d.nx as i64 {
                    continue;
                }
                acc += wt * wy * wx * grid.at(x as usize, y as usize, t);
            }
        }
    }
    acc
}

/// Γ'_κ from `from = (x, y, θ)` to `to`, in the directed frame of `from`.
pub fn eval_gamma(bank: &KernelBank, from: (f64, f64, f64), to: (f64, f64, f64), kappa: f64) -> f64 {
    let grid = bank.slice_for(kappa);
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let (s, c) = from.2.sin_cos();
    sample_grid(grid, c * dx + s * dy, -s * dx + c * dy, to.2 - from.2)
}

/// Γ' for a line element: the sum over its two directed states.
///
/// Orientation θ and curvature κ describe the element along (cos θ, sin θ).
/// Traversed the other way it is the state (θ + π, −κ); the process is
/// symmetric under (y, θ, κ) → (−y, −θ, −κ), so that state's density is the
/// κ slice read at (−u, v, −Δθ).
pub fn eval_line(bank: &KernelBank, from: (f64, f64, f64), to: (f64, f64, f64), kappa: f64) -> f64 {
    let grid = bank.slice_for(kappa);
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let (s, c) = from.2.sin_cos();
    let (u, v, dt) = (c * dx + s * dy, -s * dx + c * dy, wrap_line(to.2 - from.2));
    sample_grid(grid, u, v, dt) + sample_grid(grid, -u, v, -dt)
}

fn state(p: &LiftedPoint) -> (f64, f64, f64) {
    (p.x as f64, p.y as f64, p.theta)
}

/// w₅(p, q); bitwise symmetric in its arguments.
pub fn connectivity_weight(p: &LiftedPoint, q: &LiftedPoint, bank: &KernelBank, weights: &KernelWeights) -> f64 {
    let dk = p.kappa - q.kappa;
    let df = p.f - q.f;
    let curvature = (-(dk * dk) / (weights.sigma_kappa_exp * weights.sigma_kappa_exp)).exp();
    let intensity = (-(df * df) / (weights.sigma_int * weights.sigma_int)).exp();
    let forward = eval_line(bank, state(p), state(q), p.kappa);
    let backward = eval_line(bank, state(q), state(p), q.kappa);
    curvature * intensity * (0.5 * (forward + backward))
}

/// Sum over θ per (x, y): rows are y, columns x, origin at the centre pixel.
pub fn project2d_raw(grid: &KernelGrid) -> Vec<f64> {
    let d = grid.dims;
    let mut out = vec![0.0; d.nx * d.ny];
    for t in 0..d.n_theta {
        for (o, v) in out.iter_mut().zip(&grid.values[t * d.nx * d.ny..(t + 1) * d.nx * d.ny]) {
            *o += v;
        }
    }
    out
}

/// θ-sum scaled so the maximum is 1 (all zeros stay zeros).
pub fn project2d(grid: &KernelGrid) -> Image2D {
    let raw = project2d_raw(grid);
    let max = raw.iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
    Image2D::new(grid.dims.nx, grid.dims.ny, raw.iter().map(|v| v * scale).collect())
        .expect("projection of a finite grid is finite")
}

/// Mass-weighted mean y (in cells, relative to the origin) of a θ-sum.
pub fn mean_y(grid: &KernelGrid) -> f64 {
    let d = grid.dims;
    let raw = project2d_raw(grid);
    let (mut m, mut my) = (0.0, 0.0);
    for y in 0..d.ny {
        for x in 0..d.nx {
            m += raw[y * d.nx + x];
            my += raw[y * d.nx + x] * (y as f64 - (d.ny / 2) as f64);
        }
    }
    if m > 0.0 {
        my / m
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::sim::{GridDims, KappaLattice, PathParams};
    use crate::liftspace::wavelet::bin_theta;

    fn ramp_bank() -> KernelBank {
        let dims = GridDims { nx: 5, ny: 5, n_theta: 4 };
        let values = (0..dims.cells()).map(|i| i as f64).collect();
        let grid = KernelGrid { kappa0: 0.0, dims, values, spill: 0, total: 1 };
        KernelBank {
            lattice: KappaLattice { min: 0.0, step: 0.05, count: 1 },
            params: PathParams::default(),
            dims,
            grids: vec![grid],
        }
    }

    #[test]
    fn cell_centres_and_midpoints() {
        let bank = ramp_bank();
        let g = &bank.grids[0];
        // Bin k sits at Δθ = −π/2 + kπ/4, cell (2, 2) at zero displacement.
        for k in 0..4 {
            let dt = bin_theta(4, k);
            assert!((eval_gamma(&bank, (10.0, 10.0, 0.0), (10.0, 10.0, dt), 0.0) - g.at(2, 2, k)).abs() < 1e-9);
        }
        let mid = eval_gamma(&bank, (0.0, 0.0, 0.0), (0.5, 0.0, 0.0), 0.0);
        assert!((mid - 0.5 * (g.at(2, 2, 2) + g.at(3, 2, 2))).abs() < 1e-12);
        assert_eq!(eval_gamma(&bank, (0.0, 0.0, 0.0), (3.0, 0.0, 0.0), 0.0), 0.0);
        assert_eq!(eval_gamma(&bank, (0.0, 0.0, 0.0), (0.0, -40.0, 0.0), 0.0), 0.0);
    }

    #[test]
    fn rotation_moves_into_the_frame() {
        let bank = ramp_bank();
        let g = &bank.grids[0];
        // From θ = π/2 a step of +1 in y is a step of +1 along u.
        let v = eval_gamma(&bank, (0.0, 0.0, PI / 2.0), (0.0, 1.0, PI / 2.0), 0.0);
        assert!((v - g.at(3, 2, 2)).abs() < 1e-9);
    }

    #[test]
    fn wrap_line_range() {
        for i in -50..50 {
            let w = wrap_line(i as f64 * 0.37);
            assert!((-PI / 2.0..PI / 2.0).contains(&w));
        }
        assert_eq!(wrap_line(PI / 2.0), -PI / 2.0);
    }

    #[test]
    fn weight_factors() {
        let bank = ramp_bank();
        let w = KernelWeights { sigma_kappa_exp: 1.0, sigma_int: 0.25 };
        let p = LiftedPoint { x: 5, y: 5, theta_bin: 2, theta: 0.0, f: 0.5, kappa: 0.0 };
        let q = LiftedPoint { x: 6, y: 5, ..p };
        let base = connectivity_weight(&p, &q, &bank, &w);
        let gamma = 0.5
            * (eval_line(&bank, (5.0, 5.0, 0.0), (6.0, 5.0, 0.0), 0.0)
                + eval_line(&bank, (6.0, 5.0, 0.0), (5.0, 5.0, 0.0), 0.0));
        assert_eq!(base, gamma);
        let q2 = LiftedPoint { f: 0.75, ..q };
        let ratio = connectivity_weight(&p, &q2, &bank, &w) / base;
        assert!((ratio - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(connectivity_weight(&p, &q2, &bank, &w), connectivity_weight(&q2, &p, &bank, &w));
        let far = LiftedPoint { x: 50, ..q };
        assert_eq!(connectivity_weight(&p, &far, &bank, &w), 0.0);
    }

    #[test]
    fn projection_normalizes_and_preserves_mass() {
        let bank = ramp_bank();
        let g = &bank.grids[0];
        let raw = project2d_raw(g);
        assert!((raw.iter().sum::<f64>() - g.mass()).abs() < 1e-9);
        let img = project2d(g);
        assert_eq!(img.min_max().1, 1.0);
    }
}
