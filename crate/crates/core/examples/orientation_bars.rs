//! Measures how often the dominant orientation of a bar's centreline lands
//! within one bin of the bar's true direction.
//!
//! ```text
//! cargo run --release --example orientation_bars
//! ```

use std::f64::consts::PI;

use grouping5d::liftspace::{dominant_orientation, orientation_score, CakeParams, FilterBank, Image2D};

fn main() -> grouping5d::Result<()> {
    let n_theta = 18;
    let size = 101;
    let bank = FilterBank::new(n_theta, size, CakeParams::default())?;
    let c = (size / 2) as f64;
    for deg in (0..180).step_by(15) {
        let a = (deg as f64).to_radians();
        let across = move |x: usize, y: usize| -(x as f64 - c) * a.sin() + (y as f64 - c) * a.cos();
        let along = move |x: usize, y: usize| (x as f64 - c) * a.cos() + (y as f64 - c) * a.sin();
        let img = Image2D::from_fn(size, size, |x, y| if across(x, y).abs() <= 1.5 { 0.0 } else { 1.0 });
        let map = dominant_orientation(&orientation_score(&img, &bank));
        let (mut hit, mut n) = (0, 0);
        for y in 0..size {
            for x in 0..size {
                if across(x, y).abs() <= 0.5 && along(x, y).abs() <= 30.0 {
                    let diff = (map.theta_at(x, y) - a).rem_euclid(PI);
                    hit += (diff.min(PI - diff) <= PI / n_theta as f64 + 1e-9) as usize;
                    n += 1;
                }
            }
        }
        println!("bar at {deg:3}°: {hit}/{n} centreline pixels within one bin");
    }
    Ok(())
}
