//! Orientation scores and dominant orientation.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::liftspace::fft::{smooth_size, Fft2};
use crate::liftspace::image::Image2D;
use crate::liftspace::wavelet::{bin_theta, FilterBank};

/// U(x, θ_k), stored as `values[k][y * width + x]`.
#[derive(Debug, Clone)]
pub struct OrientationScore {
    pub width: usize,
    pub height: usize,
    pub n_theta: usize,
    pub values: Vec<Vec<Complex64>>,
}

impl OrientationScore {
    /// Re(−U) for orientation bin `k`: the dark-ridge response.
    pub fn ridge(&self, k: usize) -> Vec<f64> {
        self.values[k].iter().map(|v| -v.re).collect()
    }
}

fn mirror_index(i: i64, n: usize) -> usize {
    let n = n as i64;
    if n == 1 {
        return 0;
    }
    let period = 2 * n - 2;
    let j = i.rem_euclid(period);
    (if j >= n { period - j } else { j }) as usize
}

/// Correlates the image with every filter of the bank.
///
/// The image is mirror-padded by the filter radius, so the result near the
/// border sees a reflected continuation instead of a step to zero.
pub fn orientation_score(image: &Image2D, bank: &FilterBank) -> OrientationScore {
    let (w, h) = (image.width, image.height);
    let s = bank.spatial_size;
    let r = (s / 2) as i64;
    let pw = smooth_size(w + s - 1);
    let ph = smooth_size(h + s - 1);
    let fft = Fft2::new(pw, ph);

    let mut img_hat: Vec<Complex64> = (0..pw * ph)
        .map(|i| {
            let px = (i % pw) as i64 - r;
            let py = (i / pw) as i64 - r;
            Complex64::new(image.get(mirror_index(px, w), mirror_index(py, h)), 0.0)
        })
        .collect();
    fft.forward(&mut img_hat);

    let values = (0..bank.n_theta)
        .into_par_iter()
        .map(|k| {
            // U = conj(ψ) ⋆ I has spectrum conj(ψ̂)·Î, with ψ̂ taken on the padded grid.
            let mut ker = vec![Complex64::new(0.0, 0.0); pw * ph];
            for y in 0..s {
                for x in 0..s {
                    let dx = (x as i64 - r).rem_euclid(pw as i64) as usize;
                    let dy = (y as i64 - r).rem_euclid(ph as i64) as usize;
                    ker[dy * pw + dx] = bank.kernels[k][y * s + x];
                }
            }
            fft.forward(&mut ker);
            for (kv, iv) in ker.iter_mut().zip(&img_hat) {
                *kv = kv.conj() * iv;
            }
            fft.inverse(&mut ker);
            let mut out = Vec::with_capacity(w * h);
            for y in 0..h {
                let row = (y as i64 + r) as usize * pw;
                for x in 0..w {
                    out.push(ker[row + x + r as usize]);
                }
            }
            out
        })
        .collect();
    OrientationScore { width: w, height: h, n_theta: bank.n_theta, values }
}

/// Per-pixel bin index of the dominant line orientation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationMap {
    pub width: usize,
    pub height: usize,
    pub n_theta: usize,
    pub bins: Vec<u16>,
}

impl OrientationMap {
    pub fn theta_at(&self, x: usize, y: usize) -> f64 {
        bin_theta(self.n_theta, self.bins[y * self.width + x] as usize)
    }
}

/// Argmax over bins of Re(−U); near-ties resolve to the smallest bin.
///
/// Responses closer than 10⁻⁹ of the score's peak magnitude count as ties,
/// so numerically zero responses (a constant image) all land in bin 0.
pub fn dominant_orientation(score: &OrientationScore) -> OrientationMap {
    let peak = score.values.iter().flatten().fold(0.0f64, |m, v| m.max(v.norm()));
    let tol = (1e-9 * peak).max(1e-12);
    let n = score.width * score.height;
    let bins = (0..n)
        .map(|i| {
            let best = (0..score.n_theta).map(|k| -score.values[k][i].re).fold(f64::NEG_INFINITY, f64::max);
            (0..score.n_theta).find(|&k| -score.values[k][i].re >= best - tol).unwrap_or(0) as u16
        })
        .collect();
    OrientationMap { width: score.width, height: score.height, n_theta: score.n_theta, bins }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liftspace::wavelet::CakeParams;

    fn bank() -> FilterBank {
        FilterBank::new(18, 41, CakeParams::default()).unwrap()
    }

    #[test]
    fn zero_image_has_zero_score() {
        let s = orientation_score(&Image2D::filled(30, 20, 0.0), &bank());
        assert!(s.values.iter().flatten().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn constant_image_falls_back_to_bin_zero() {
        let s = orientation_score(&Image2D::filled(30, 20, 0.7), &bank());
        assert!(dominant_orientation(&s).bins.iter().all(|&b| b == 0));
    }

    #[test]
    fn horizontal_dark_bar_selects_theta_zero() {
        let img = Image2D::from_fn(61, 61, |_, y| if (29..=31).contains(&y) { 0.0 } else { 1.0 });
        let map = dominant_orientation(&orientation_score(&img, &bank()));
        assert_eq!(map.bins[30 * 61 + 30], 9);
        assert!(map.theta_at(30, 30).abs() < 1e-12);
    }

    #[test]
    fn score_is_linear() {
        let b = bank();
        let a = Image2D::from_fn(25, 25, |x, y| ((x * 3 + y) % 5) as f64);
        let c = Image2D::from_fn(25, 25, |x, y| ((x + 2 * y) % 7) as f64);
        let sum = Image2D::from_fn(25, 25, |x, y| 2.0 * a.get(x, y) - c.get(x, y));
        let (ua, uc, us) = (orientation_score(&a, &b), orientation_score(&c, &b), orientation_score(&sum, &b));
        for k in 0..18 {
            for i in 0..625 {
                assert!((us.values[k][i] - (ua.values[k][i] * 2.0 - uc.values[k][i])).norm() < 1e-9);
            }
        }
    }
}
