//! Interest points, the 5D feature map and patch cropping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liftspace::curvature::{multiscale_curvature, CurvatureMap, CurvatureParams};
use crate::liftspace::image::{Image2D, SegmentationMask};
use crate::liftspace::score::{dominant_orientation, orientation_score, OrientationScore};
use crate::liftspace::wavelet::{bin_theta, CakeParams, FilterBank};

/// One point of the lifted feature map. Coordinates are source-image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub x: u16,
    pub y: u16,
    pub theta_bin: u16,
    /// Line orientation in radians, always `bin_theta(n_theta, theta_bin)`.
    pub theta: f64,
    pub f: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedFeatureMap {
    pub width: usize,
    pub height: usize,
    pub n_theta: usize,
    pub points: Vec<LiftedPoint>,
}

impl LiftedFeatureMap {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A cropped window of a feature map. Points keep source coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedPatch {
    pub center: (usize, usize),
    pub half_size: usize,
    pub map: LiftedFeatureMap,
}

/// Mask pixels in row-major order.
pub fn interest_points(mask: &SegmentationMask) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(mask.count());
    for y in 0..mask.height {
        for x in 0..mask.width {
            if mask.get(x, y) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Emits `(x, y, θ_d, I(x), κ(x, θ_d))` for every interest point.
pub fn lift5d(
    image: &Image2D,
    score: &OrientationScore,
    kappa: &CurvatureMap,
    mask: &SegmentationMask,
) -> Result<LiftedFeatureMap> {
    let (w, h) = (image.width, image.height);
    let dims_ok = score.width == w
        && score.height == h
        && kappa.width == w
        && kappa.height == h
        && mask.width == w
        && mask.height == h
        && kappa.n_theta == score.n_theta;
    if !dims_ok {
        return Err(Error::InvalidInput("image, score, curvature map and mask dimensions differ".into()));
    }
    if w > u16::MAX as usize + 1 || h > u16::MAX as usize + 1 {
        return Err(Error::InvalidInput(format!("{w}x{h} image exceeds 16-bit coordinates")));
    }
    let orient = dominant_orientation(score);
    let points = interest_points(mask)
        .into_iter()
        .map(|(x, y)| {
            let bin = orient.bins[y * w + x];
            LiftedPoint {
                x: x as u16,
                y: y as u16,
                theta_bin: bin,
                theta: bin_theta(score.n_theta, bin as usize),
                f: image.get(x, y).clamp(0.0, 1.0),
                kappa: kappa.at(x, y, bin as usize),
            }
        })
        .collect();
    Ok(LiftedFeatureMap { width: w, height: h, n_theta: score.n_theta, points })
}

/// Keeps the points with `|x − cx| ≤ s_o` and `|y − cy| ≤ s_o`.
pub fn crop_patch(lifted: &LiftedFeatureMap, center: (usize, usize), half_size: usize) -> Result<LiftedPatch> {
    let (cx, cy) = center;
    if cx >= lifted.width || cy >= lifted.height {
        return Err(Error::InvalidInput(format!(
            "patch centre ({cx}, {cy}) outside {}x{} image",
            lifted.width, lifted.height
        )));
    }
    let points = lifted
        .points
        .iter()
        .filter(|p| (p.x as usize).abs_diff(cx) <= half_size && (p.y as usize).abs_diff(cy) <= half_size)
        .copied()
        .collect();
    Ok(LiftedPatch {
        center,
        half_size,
        map: LiftedFeatureMap { width: lifted.width, height: lifted.height, n_theta: lifted.n_theta, points },
    })
}

/// Everything needed to go from an image and a mask to a lifted map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LiftConfig {
    pub n_theta: usize,
    pub spatial_size: usize,
    pub cake: CakeParams,
    pub scales: Vec<f64>,
    pub curvature: CurvatureParams,
}

impl Default for LiftConfig {
    fn default() -> Self {
        LiftConfig {
            n_theta: 18,
            spatial_size: 51,
            cake: CakeParams::default(),
            scales: vec![1.5, 2.5, 3.5],
            curvature: CurvatureParams::default(),
        }
    }
}

/// Intermediate products of [`lift_image`], kept for rendering and diagnostics.
#[derive(Debug, Clone)]
pub struct Lifting {
    pub score: OrientationScore,
    pub kappa: CurvatureMap,
    pub lifted: LiftedFeatureMap,
}

/// Orientation score, multiscale curvature and the lift, in one call.
pub fn lift_image(image: &Image2D, mask: &SegmentationMask, config: &LiftConfig) -> Result<Lifting> {
    let bank = FilterBank::new(config.n_theta, config.spatial_size, config.cake)?;
    let score = orientation_score(image, &bank);
    let kappa = multiscale_curvature(&score, &config.scales, &config.curvature)?;
    let lifted = lift5d(image, &score, &kappa, mask)?;
    Ok(Lifting { score, kappa, lifted })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_of(points: &[(u16, u16)]) -> LiftedFeatureMap {
        LiftedFeatureMap {
            width: 100,
            height: 80,
            n_theta: 18,
            points: points
                .iter()
                .map(|&(x, y)| LiftedPoint { x, y, theta_bin: 0, theta: bin_theta(18, 0), f: 0.5, kappa: 0.0 })
                .collect(),
        }
    }

    #[test]
    fn interest_points_are_row_major() {
        let mask = SegmentationMask::from_fn(4, 3, |x, y| (x + y) % 2 == 0);
        let v = interest_points(&mask);
        assert_eq!(v, vec![(0, 0), (2, 0), (1, 1), (3, 1), (0, 2), (2, 2)]);
        assert!(interest_points(&SegmentationMask::empty(5, 5)).is_empty());
        assert_eq!(interest_points(&SegmentationMask::from_fn(10, 10, |_, _| true)).len(), 100);
    }

    #[test]
    fn crop_window_is_inclusive_and_strict() {
        let m = map_of(&[(50, 40), (75, 40), (76, 40), (24, 15), (25, 15)]);
        let p = crop_patch(&m, (50, 40), 25).unwrap();
        let xs: Vec<_> = p.map.points.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(xs, vec![(50, 40), (75, 40), (25, 15)]);
    }

    #[test]
    fn crop_at_corner_invents_nothing() {
        let m = map_of(&[(0, 0), (3, 2), (30, 0)]);
        let p = crop_patch(&m, (0, 0), 25).unwrap();
        assert_eq!(p.map.len(), 2);
        assert!(crop_patch(&m, (100, 0), 25).is_err());
    }

    #[test]
    fn lift_rejects_mismatched_inputs() {
        let img = Image2D::filled(20, 20, 1.0);
        let bank = FilterBank::new(4, 11, CakeParams::default()).unwrap();
        let score = orientation_score(&img, &bank);
        let kappa = multiscale_curvature(&score, &[1.5], &CurvatureParams::default()).unwrap();
        assert!(lift5d(&img, &score, &kappa, &SegmentationMask::empty(20, 19)).is_err());
        let empty = lift5d(&img, &score, &kappa, &SegmentationMask::empty(20, 20)).unwrap();
        assert!(empty.is_empty());
    }
}
