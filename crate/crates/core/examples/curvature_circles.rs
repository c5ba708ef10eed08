//! Lifts rings of known radius and compares the median estimated |κ| to 1/r.
//!
//! ```text
//! cargo run --release --example curvature_circles
//! ```

use grouping5d::liftspace::{lift_image, Image2D, LiftConfig, SegmentationMask};

fn main() -> grouping5d::Result<()> {
    let cfg = LiftConfig::default();
    for r in [15.0, 20.0, 30.0, 40.0, 60.0] {
        let size = 2 * r as usize + 41;
        let c = (size / 2) as f64;
        let d = move |x: usize, y: usize| ((x as f64 - c).hypot(y as f64 - c) - r).abs();
        // A 3 px dark ring on white; the mask is its centreline.
        let img = Image2D::from_fn(size, size, |x, y| if d(x, y) <= 1.5 { 0.0 } else { 1.0 });
        let mask = SegmentationMask::from_fn(size, size, |x, y| d(x, y) <= 0.5);
        let lifted = lift_image(&img, &mask, &cfg)?.lifted;
        let mut k: Vec<f64> = lifted.points.iter().map(|p| p.kappa.abs()).collect();
        k.sort_by(f64::total_cmp);
        let median = k[k.len() / 2];
        println!(
            "r = {r:4}: {:4} points, median |κ| {median:.4}, 1/r {:.4}, relative error {:+.1}%",
            k.len(),
            1.0 / r,
            100.0 * (median * r - 1.0)
        );
    }
    Ok(())
}
