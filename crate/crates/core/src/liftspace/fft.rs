//! In-place 2D FFT over row-major complex buffers.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct Fft2 {
    pub width: usize,
    pub height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(width: usize, height: usize) -> Self {
        let mut p = FftPlanner::new();
        Fft2 {
            width,
            height,
            row_fwd: p.plan_fft_forward(width),
            row_inv: p.plan_fft_inverse(width),
            col_fwd: p.plan_fft_forward(height),
            col_inv: p.plan_fft_inverse(height),
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_fwd, &self.col_fwd);
    }

    /// Inverse transform including the 1/(width·height) factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_inv, &self.col_inv);
        let s = 1.0 / (self.width * self.height) as f64;
        buf.iter_mut().for_each(|v| *v *= s);
    }

    fn run(&self, buf: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        let (w, h) = (self.width, self.height);
        assert_eq!(buf.len(), w * h);
        rows.process(buf);
        let mut col = vec![Complex64::new(0.0, 0.0); h];
        for x in 0..w {
            for y in 0..h {
                col[y] = buf[y * w + x];
            }
            cols.process(&mut col);
            for y in 0..h {
                buf[y * w + x] = col[y];
            }
        }
    }
}

/// Signed frequency index of DFT bin `k` out of `n`.
#[inline]
pub fn signed_freq(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Smallest m ≥ n whose prime factors are all in {2, 3, 5}.
pub fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = Fft2::new(6, 5);
        let orig: Vec<Complex64> = (0..30).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        let mut buf = orig.clone();
        f.forward(&mut buf);
        f.inverse(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(251), 256);
        assert_eq!(smooth_size(7), 8);
        assert_eq!(smooth_size(243), 243);
    }
}
