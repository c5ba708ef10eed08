//! Colour-coded rasters of lifted maps, groupings and kernel projections.
//!
//! Renders cover the bounding box of the points plus a margin. Where several
//! lifted points share a pixel, the first one in map order paints it.

use std::f64::consts::PI;

use crate::cluster::NOISE;
use crate::error::{Error, Result};
use crate::kernel::{project2d, KernelGrid};
use crate::liftspace::netpbm::Pnm;
use crate::liftspace::LiftedPoint;

pub const MARGIN: usize = 2;
pub const BACKGROUND: [u8; 3] = [0, 0, 0];
pub const NOISE_GREY: [u8; 3] = [128, 128, 128];

/// HSV with h in [0, 1).
pub fn hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let i = h6.floor();
    let f = h6 - i;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    let (r, g, b) = match i as u8 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [r, g, b].map(|c| (c * 255.0).round() as u8)
}

/// Group `label` (≥ 1): golden-ratio hue steps keep neighbouring ids apart.
/// Saturation stays high, so no group colour is grey.
pub fn group_colour(label: u32) -> [u8; 3] {
    let h = ((label - 1) as f64 * 0.618_033_988_749_895).fract();
    hsv(h, 0.85, 1.0)
}

/// Hue follows orientation over its π period.
pub fn orientation_colour(theta: f64) -> [u8; 3] {
    hsv((theta + PI / 2.0).rem_euclid(PI) / PI, 1.0, 1.0)
}

/// Blue at −κ_max, white at 0, red at +κ_max.
pub fn curvature_colour(kappa: f64, kappa_max: f64) -> [u8; 3] {
    let t = if kappa_max > 0.0 { (kappa / kappa_max).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = ((1.0 - t.abs()) * 255.0).round() as u8;
    if t >= 0.0 {
        [255, fade, fade]
    } else {
        [fade, fade, 255]
    }
}

/// Smallest window holding all points, grown by [`MARGIN`] and clipped at 0.
fn frame(points: &[LiftedPoint]) -> Result<(usize, usize, usize, usize)> {
    if points.is_empty() {
        return Err(Error::InvalidInput("nothing to render: the map has no points".into()));
    }
    let x0 = points.iter().map(|p| p.x as usize).min().unwrap().saturating_sub(MARGIN);
    let y0 = points.iter().map(|p| p.y as usize).min().unwrap().saturating_sub(MARGIN);
    let x1 = points.iter().map(|p| p.x as usize).max().unwrap() + MARGIN;
    let y1 = points.iter().map(|p| p.y as usize).max().unwrap() + MARGIN;
    Ok((x0, y0, x1 - x0 + 1, y1 - y0 + 1))
}

fn paint(points: &[LiftedPoint], colour: impl Fn(usize) -> [u8; 3]) -> Result<Pnm> {
    let (x0, y0, w, h) = frame(points)?;
    let mut rgb = vec![BACKGROUND; w * h];
    let mut done = vec![false; w * h];
    for (i, p) in points.iter().enumerate() {
        let k = (p.y as usize - y0) * w + (p.x as usize - x0);
        if !done[k] {
            rgb[k] = colour(i);
            done[k] = true;
        }
    }
    Ok(Pnm::from_rgb(w, h, rgb.concat()))
}

/// Each group in its own colour, noise grey. A pixel shared by a group and
/// noise shows the group.
pub fn render_clusters(points: &[LiftedPoint], labels: &[u32]) -> Result<Pnm> {
    if points.len() != labels.len() {
        return Err(Error::InvalidInput(format!("{} labels for {} points", labels.len(), points.len())));
    }
    // Grouped points first so they win shared pixels.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| labels[i] == NOISE);
    let sorted: Vec<LiftedPoint> = order.iter().map(|&i| points[i]).collect();
    paint(&sorted, |k| {
        let l = labels[order[k]];
        if l == NOISE {
            NOISE_GREY
        } else {
            group_colour(l)
        }
    })
}

pub fn render_orientation(points: &[LiftedPoint]) -> Result<Pnm> {
    paint(points, |i| orientation_colour(points[i].theta))
}

/// Diverging scale symmetric about zero, over the largest |κ| in the map.
pub fn render_curvature(points: &[LiftedPoint]) -> Result<Pnm> {
    let kmax = points.iter().map(|p| p.kappa.abs()).fold(0.0, f64::max);
    paint(points, |i| curvature_colour(points[i].kappa, kmax))
}

/// Greymap of a kernel slice summed over θ, brightest cell at 255.
pub fn render_kernel(grid: &KernelGrid) -> Pnm {
    Pnm::from_image(&project2d(grid), 255)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: u16, y: u16, theta: f64, kappa: f64) -> LiftedPoint {
        LiftedPoint { x, y, theta_bin: 0, theta, f: 1.0, kappa }
    }

    #[test]
    fn group_colours_are_distinct_and_not_grey() {
        let cols: Vec<[u8; 3]> = (1..=20).map(group_colour).collect();
        for (i, a) in cols.iter().enumerate() {
            assert!(a.iter().max().unwrap() - a.iter().min().unwrap() > 100, "{a:?}");
            for b in &cols[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn overlay_colours_groups_and_noise() {
        let pts = [pt(5, 5, 0.0, 0.0), pt(6, 5, 0.0, 0.0), pt(7, 5, 0.0, 0.0), pt(7, 5, 1.0, 0.0)];
        let img = render_clusters(&pts, &[1, 2, 0, 1]).unwrap();
        assert_eq!((img.width, img.height, img.channels), (7, 5, 3));
        let at = |x: usize, y: usize| -> Vec<u16> { img.samples[(y * 7 + x) * 3..][..3].to_vec() };
        let to16 = |c: [u8; 3]| c.map(u16::from).to_vec();
        assert_eq!(at(2, 2), to16(group_colour(1)));
        assert_eq!(at(3, 2), to16(group_colour(2)));
        // Shared by noise and group 1: the group wins.
        assert_eq!(at(4, 2), to16(group_colour(1)));
        assert_eq!(at(0, 0), vec![0, 0, 0]);
        let grey = render_clusters(&pts[..1], &[0]).unwrap();
        assert_eq!(grey.samples[(2 * 5 + 2) * 3..][..3], [128, 128, 128]);
    }

    #[test]
    fn curvature_scale_is_symmetric() {
        assert_eq!(curvature_colour(0.1, 0.1), [255, 0, 0]);
        assert_eq!(curvature_colour(-0.1, 0.1), [0, 0, 255]);
        assert_eq!(curvature_colour(0.0, 0.1), [255, 255, 255]);
        assert_eq!(curvature_colour(0.3, 0.0), [255, 255, 255]);
    }

    #[test]
    fn orientation_hue_wraps_over_pi() {
        assert_eq!(orientation_colour(-PI / 2.0), orientation_colour(PI / 2.0));
        assert_ne!(orientation_colour(0.0), orientation_colour(-PI / 2.0));
    }
}
