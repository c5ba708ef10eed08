//! Monte Carlo estimation of the per-curvature kernel slices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Paths per parallel block; each block has its own ChaCha stream.
pub const PATHS_PER_BLOCK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    /// Step length Δs in pixels.
    pub step: f64,
    /// States per path H, start state included.
    pub steps: usize,
    pub paths: usize,
    /// Curvature diffusion σ_κ_diff, 1/px per √step.
    pub sigma_kappa_diff: f64,
    pub seed: u64,
}

impl Default for PathParams {
    fn default() -> Self {
        PathParams { step: 1.0, steps: 17, paths: 100_000, sigma_kappa_diff: 0.001, seed: 1 }
    }
}

impl PathParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::param("step", format!("must be positive, got {}", self.step)));
        }
        if self.steps == 0 {
            return Err(Error::param("steps", "must be at least 1"));
        }
        if self.paths == 0 {
            return Err(Error::param("paths", "must be at least 1"));
        }
        if !(self.sigma_kappa_diff >= 0.0 && self.sigma_kappa_diff.is_finite()) {
            return Err(Error::param("sigma_kappa_diff", format!("must be ≥ 0, got {}", self.sigma_kappa_diff)));
        }
        Ok(())
    }
}

/// Grid shape; x and y must be odd so the origin is a cell centre. Cells are 1 px.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub nx: usize,
    pub ny: usize,
    pub n_theta: usize,
}

impl GridDims {
    /// Just large enough for a straight path: `2⌈H·Δs⌉ + 1` cells across.
    pub fn for_paths(params: &PathParams, n_theta: usize) -> Self {
        let side = 2 * (params.steps as f64 * params.step).ceil() as usize + 1;
        GridDims { nx: side, ny: side, n_theta }
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny * self.n_theta
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx.is_multiple_of(2) || self.ny.is_multiple_of(2) {
            return Err(Error::param("dims", format!("{}x{} must be odd in x and y", self.nx, self.ny)));
        }
        if self.n_theta < 2 {
            return Err(Error::param("dims", "n_theta must be at least 2"));
        }
        Ok(())
    }

    /// Cell index, x fastest: `(t·ny + y)·nx + x`.
    pub fn index(&self, x: usize, y: usize, t: usize) -> usize {
        (t * self.ny + y) * self.nx + x
    }

    /// Bin of a direction angle, folded to line orientations. Bin k is
    /// centred on −π/2 + kπ/n. Negating θ maps bin k to (n − k) mod n exactly
    /// when n is even.
    pub fn theta_bin(&self, theta: f64) -> usize {
        let n = self.n_theta as i64;
        let line = theta - PI * (theta / PI).round();
        let u = line / (PI / self.n_theta as f64);
        let k = if n % 2 == 0 { u.round() as i64 + n / 2 } else { (u + (n / 2) as f64 + 0.5).floor() as i64 };
        k.rem_euclid(n) as usize
    }
}

/// Γ'_κ for one initial curvature: passage counts divided by n·H.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelGrid {
    pub kappa0: f64,
    pub dims: GridDims,
    pub values: Vec<f64>,
    /// Deposits that fell outside the grid.
    pub spill: u64,
    /// n·H, the normalizer.
    pub total: u64,
}

impl KernelGrid {
    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn spill_fraction(&self) -> f64 {
        self.spill as f64 / self.total as f64
    }

    pub fn at(&self, x: usize, y: usize, t: usize) -> f64 {
        self.values[self.dims.index(x, y, t)]
    }
}

/// Sign applied to every curvature increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Noise {
    Plain,
    /// Negated increments: the run for −κ₀ is then the exact (y, θ, κ) mirror.
    Mirrored,
}

fn simulate_block(
    kappa0: f64,
    dims: &GridDims,
    params: &PathParams,
    noise: Noise,
    block: usize,
    count: usize,
) -> (Vec<u32>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(block as u64);
    let sign = if noise == Noise::Mirrored { -1.0 } else { 1.0 };
    let mut hist = vec![0u32; dims.cells()];
    let mut spill = 0u64;
    let (cx, cy) = ((dims.nx / 2) as i64, (dims.ny / 2) as i64);
    for _ in 0..count {
        let (mut x, mut y, mut theta, mut kappa) = (0.0f64, 0.0f64, 0.0f64, kappa0);
        for h in 0..params.steps {
            if h > 0 {
                x += params.step * theta.cos();
                y += params.step * theta.sin();
                theta += params.step * kappa;
                let z: f64 = rng.sample(StandardNormal);
                kappa += sign * params.step * params.sigma_kappa_diff * z;
            }
            let ix = x.round() as i64 + cx;
            let iy = y.round() as i64 + cy;
            if ix < 0 || iy < 0 || ix >= dims.nx as i64 || iy >= dims.ny as i64 {
                spill += 1;
            } else {
                hist[dims.index(ix as usize, iy as usize, dims.theta_bin(theta))] += 1;
            }
        }
    }
    (hist, spill)
}

/// Simulates `params.paths` paths from `(0, 0, θ = 0, κ₀)` with the default noise sign.
pub fn simulate_paths(kappa0: f64, dims: GridDims, params: &PathParams) -> Result<KernelGrid> {
    simulate_paths_with(kappa0, dims, params, Noise::Plain)
}

/// Blocks run in parallel; their integer histograms are summed in block order.
pub fn simulate_paths_with(kappa0: f64, dims: GridDims, params: &PathParams, noise: Noise) -> Result<KernelGrid> {
    params.validate()?;
    dims.validate()?;
    if !kappa0.is_finite() {
        return Err(Error::param("kappa0", "must be finite"));
    }
    let blocks = params.paths.div_ceil(PATHS_PER_BLOCK);
    let parts: Vec<(Vec<u32>, u64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = PATHS_PER_BLOCK.min(params.paths - b * PATHS_PER_BLOCK);
            simulate_block(kappa0, &dims, params, noise, b, count)
        })
        .collect();
    let mut counts = vec![0u64; dims.cells()];
    let mut spill = 0u64;
    for (hist, s) in &parts {
        for (c, &h) in counts.iter_mut().zip(hist) {
            *c += h as u64;
        }
        spill += s;
    }
    let total = (params.paths * params.steps) as u64;
    let values = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(KernelGrid { kappa0, dims, values, spill, total })
}

/// Curvature lattice `κ_min + iΔκ`, `round((κ_max − κ_min)/Δκ) + 1` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaLattice {
    pub min: f64,
    pub step: f64,
    pub count: usize,
}

impl KappaLattice {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::param("kappa_range", format!("need κ_min ≤ κ_max, got [{min}, {max}]")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::param("kappa_step", format!("must be positive, got {step}")));
        }
        Ok(KappaLattice { min, step, count: ((max - min) / step).round() as usize + 1 })
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    /// Nearest lattice index, clamped to the ends.
    pub fn nearest(&self, kappa: f64) -> usize {
        let i = ((kappa - self.min) / self.step).round();
        if i.is_nan() || i <= 0.0 {
            0
        } else {
            (i as usize).min(self.count - 1)
        }
    }
}

impl Default for KappaLattice {
    fn default() -> Self {
        KappaLattice { min: -0.2, step: 0.05, count: 9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBank {
    pub lattice: KappaLattice,
    pub params: PathParams,
    pub dims: GridDims,
    pub grids: Vec<KernelGrid>,
}

impl KernelBank {
    pub fn slice_for(&self, kappa: f64) -> &KernelGrid {
        &self.grids[self.lattice.nearest(kappa)]
    }
}

/// Seed of slice `index`: the first word of the ChaCha stream `index` under `seed`.
pub fn slice_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.random()
}

pub fn build_bank(lattice: KappaLattice, dims: GridDims, params: &PathParams) -> Result<KernelBank> {
    let grids = (0..lattice.count)
        .map(|i| {
            let p = PathParams { seed: slice_seed(params.seed, i), ..*params };
            simulate_paths(lattice.value(i), dims, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelBank { lattice, params: *params, dims, grids })
}
