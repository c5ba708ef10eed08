//! Naive junction finder: skeleton branch points.
//!
//! Only a stand-in for a real junction detector; callers that have curated
//! junction coordinates should use those.

use crate::liftspace::image::SegmentationMask;

/// Clockwise 8-neighbourhood starting north, as (dx, dy).
const RING: [(i64, i64); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

/// Radius within which branch points are merged into one junction.
pub const MERGE_RADIUS: f64 = 5.0;

fn ring(img: &[u8], w: usize, h: usize, x: usize, y: usize) -> [u8; 8] {
    let mut r = [0u8; 8];
    for (i, (dx, dy)) in RING.iter().enumerate() {
        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
        if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
            r[i] = img[ny as usize * w + nx as usize];
        }
    }
    r
}

fn transitions(r: &[u8; 8]) -> usize {
    (0..8).filter(|&i| r[i] == 0 && r[(i + 1) % 8] == 1).count()
}

/// Zhang–Suen thinning to a one-pixel-wide, 8-connected skeleton.
pub fn skeletonize(mask: &SegmentationMask) -> SegmentationMask {
    let (w, h) = (mask.width, mask.height);
    let mut img = mask.data.clone();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            let mut remove = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    if img[y * w + x] == 0 {
                        continue;
                    }
                    let r = ring(&img, w, h, x, y);
                    let b: usize = r.iter().map(|&v| v as usize).sum();
                    if !(2..=6).contains(&b) || transitions(&r) != 1 {
                        continue;
                    }
                    // r = [P2, P3, P4, P5, P6, P7, P8, P9]
                    let ok = if pass == 0 {
                        r[0] * r[2] * r[4] == 0 && r[2] * r[4] * r[6] == 0
                    } else {
                        r[0] * r[2] * r[6] == 0 && r[0] * r[4] * r[6] == 0
                    };
                    if ok {
                        remove.push(y * w + x);
                    }
                }
            }
            changed |= !remove.is_empty();
            for i in remove {
                img[i] = 0;
            }
        }
        if !changed {
            break;
        }
    }
    SegmentationMask { width: w, height: h, data: img }
}

/// Skeleton branch points merged within [`MERGE_RADIUS`], row-major by first member.
///
/// A branch point has at least three skeleton neighbours that belong to
/// distinct branches (three or more 0→1 transitions around it); the
/// transition count keeps thick corners of the skeleton from qualifying.
pub fn fallback_junctions(mask: &SegmentationMask) -> Vec<(usize, usize)> {
    let skel = skeletonize(mask);
    let (w, h) = (skel.width, skel.height);
    let mut branch = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if skel.data[y * w + x] == 0 {
                continue;
            }
            let r = ring(&skel.data, w, h, x, y);
            let neighbours = r.iter().filter(|&&v| v == 1).count();
            if neighbours >= 3 && transitions(&r) >= 3 {
                branch.push((x as f64, y as f64));
            }
        }
    }
    // Single-linkage grouping, then the rounded centroid of each group.
    let mut group: Vec<usize> = (0..branch.len()).collect();
    fn root(g: &mut [usize], mut i: usize) -> usize {
        while g[i] != i {
            g[i] = g[g[i]];
            i = g[i];
        }
        i
    }
    for i in 0..branch.len() {
        for j in 0..i {
            let d = (branch[i].0 - branch[j].0).hypot(branch[i].1 - branch[j].1);
            if d <= MERGE_RADIUS {
                let (a, b) = (root(&mut group, i), root(&mut group, j));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out = Vec::new();
    for i in 0..branch.len() {
        if root(&mut group, i) != i {
            continue;
        }
        let members: Vec<_> = (0..branch.len()).filter(|&j| root(&mut group, j) == i).collect();
        let n = members.len() as f64;
        let cx = members.iter().map(|&j| branch[j].0).sum::<f64>() / n;
        let cy = members.iter().map(|&j| branch[j].1).sum::<f64>() / n;
        out.push((cx.round() as usize, cy.round() as usize));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thick_segment(mask: &mut SegmentationMask, a: (f64, f64), b: (f64, f64), half_width: f64) {
        for y in 0..mask.height {
            for x in 0..mask.width {
                let (px, py) = (x as f64, y as f64);
                let (vx, vy) = (b.0 - a.0, b.1 - a.1);
                let t = (((px - a.0) * vx + (py - a.1) * vy) / (vx * vx + vy * vy)).clamp(0.0, 1.0);
                let d = (px - a.0 - t * vx).hypot(py - a.1 - t * vy);
                if d <= half_width {
                    mask.set(x, y, true);
                }
            }
        }
    }

    #[test]
    fn straight_bar_has_no_junction() {
        let mut m = SegmentationMask::empty(60, 30);
        thick_segment(&mut m, (5.0, 15.0), (54.0, 15.0), 2.0);
        assert!(fallback_junctions(&m).is_empty());
    }

    #[test]
    fn plus_has_one_central_junction() {
        let mut m = SegmentationMask::empty(61, 61);
        thick_segment(&mut m, (5.0, 30.0), (55.0, 30.0), 2.0);
        thick_segment(&mut m, (30.0, 5.0), (30.0, 55.0), 2.0);
        let j = fallback_junctions(&m);
        assert_eq!(j.len(), 1, "{j:?}");
        assert!((j[0].0 as f64 - 30.0).hypot(j[0].1 as f64 - 30.0) <= 3.0);
    }

    #[test]
    fn y_has_one_junction() {
        let mut m = SegmentationMask::empty(61, 61);
        thick_segment(&mut m, (30.0, 32.0), (30.0, 58.0), 1.5);
        thick_segment(&mut m, (30.0, 32.0), (8.0, 6.0), 1.5);
        thick_segment(&mut m, (30.0, 32.0), (52.0, 6.0), 1.5);
        let j = fallback_junctions(&m);
        assert_eq!(j.len(), 1, "{j:?}");
        assert!((j[0].0 as f64 - 30.0).hypot(j[0].1 as f64 - 32.0) <= 3.0);
    }

    #[test]
    fn skeleton_of_bar_is_thin() {
        let mut m = SegmentationMask::empty(40, 20);
        thick_segment(&mut m, (5.0, 10.0), (34.0, 10.0), 3.0);
        let s = skeletonize(&m);
        for x in 10..30 {
            assert_eq!((0..20).filter(|&y| s.get(x, y)).count(), 1);
        }
    }
}
