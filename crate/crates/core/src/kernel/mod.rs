//! The 5D connectivity kernel: Monte Carlo slices Γ'_κ over (x, y, θ) and the
//! symmetrized pairwise weight built from them.
//!
//! Paths follow x' = cos θ, y' = sin θ, θ' = κ with κ diffusing; each slice
//! starts every path at the origin heading along +x with a fixed κ₀.

pub mod eval;
pub mod k5d;
pub mod sim;

pub use eval::{
    connectivity_weight, eval_gamma, eval_line, mean_y, project2d, project2d_raw, sample_grid, KernelWeights,
};
pub use sim::{
    build_bank, simulate_paths, simulate_paths_with, GridDims, KappaLattice, KernelBank, KernelGrid, Noise, PathParams,
};
