//! Simulates straight, left- and right-bending kernel slices and writes
//! their 2D projections as greymaps.
//!
//! ```text
//! cargo run --release --example kernel_projection -- [out_dir]
//! ```

use std::path::PathBuf;

use grouping5d::kernel::{mean_y, project2d, simulate_paths, GridDims, PathParams};
use grouping5d::liftspace::netpbm::{self, Pnm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "kernel_projection".into()));
    std::fs::create_dir_all(&out)?;
    let params = PathParams { paths: 50_000, sigma_kappa_diff: 0.001, ..PathParams::default() };
    let dims = GridDims::for_paths(&params, 18);
    println!("grid {}x{}x{}, H = {}, {} paths per slice", dims.nx, dims.ny, dims.n_theta, params.steps, params.paths);
    for kappa in [0.0, 0.08, -0.08] {
        let grid = simulate_paths(kappa, dims, &params)?;
        let path = out.join(format!("kappa_{kappa:+.2}.pgm"));
        netpbm::write(&path, &Pnm::from_image(&project2d(&grid), 255))?;
        // y grows downward, so positive curvature bends toward +y.
        println!(
            "κ0 = {kappa:+.2}: mean y {:+.3}, mass {:.4}, spill {:.4} -> {}",
            mean_y(&grid),
            grid.mass(),
            grid.spill_fraction(),
            path.display()
        );
    }
    Ok(())
}
