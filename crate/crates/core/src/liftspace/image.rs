//! Dense single-channel grids: intensity images and binary masks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major real-valued image, `data[y * width + x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Image2D {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Image2D {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!("image dimensions {width}x{height} must be positive")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "image buffer holds {} values, expected {}",
                data.len(),
                width * height
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite pixel at ({}, {})", i % width, i / width)));
        }
        Ok(Image2D { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Image2D { width, height, data: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Image2D { width, height, data }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Bilinear sample with coordinates clamped to the image.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let tx = x - x0 as f64;
        let ty = y - y0 as f64;
        let top = self.get(x0, y0) * (1.0 - tx) + self.get(x1, y0) * tx;
        let bottom = self.get(x0, y1) * (1.0 - tx) + self.get(x1, y1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

/// Binary vessel mask; every value is 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationMask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl SegmentationMask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "mask buffer of {} values does not match {width}x{height}",
                data.len()
            )));
        }
        if data.iter().any(|&v| v > 1) {
            return Err(Error::InvalidInput("mask values must be 0 or 1".into()));
        }
        Ok(SegmentationMask { width, height, data })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        SegmentationMask { width, height, data: vec![0; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                m.data[y * width + x] = f(x, y) as u8;
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.data[y * self.width + x] = on as u8;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }
}

/// Sampled 1D Gaussian derivative of the given order (0, 1 or 2), radius ⌈4σ⌉.
///
/// Order 0 has unit sum. Orders 1 and 2 annihilate constants and give the
/// exact derivative of x and x² respectively, so sampling bias does not leak
/// into curvature estimates.
pub fn gaussian_kernel(sigma: f64, order: u8) -> Vec<f64> {
    assert!(sigma > 0.0);
    let r = (4.0 * sigma).ceil() as i64;
    let s2 = sigma * sigma;
    let g: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * s2)).exp()).collect();
    let norm: f64 = g.iter().sum();
    let g: Vec<f64> = g.iter().map(|v| v / norm).collect();
    match order {
        0 => g,
        1 => {
            let mut k: Vec<f64> = (-r..=r).zip(&g).map(|(i, v)| -(i as f64) / s2 * v).collect();
            // Unit response to f(x) = x under correlation.
            let m1: f64 = (-r..=r).zip(&k).map(|(i, v)| i as f64 * v).sum();
            k.iter_mut().for_each(|v| *v /= m1);
            k
        }
        2 => {
            let mut k: Vec<f64> = (-r..=r).zip(&g).map(|(i, v)| ((i * i) as f64 / s2 - 1.0) / s2 * v).collect();
            let mean = k.iter().sum::<f64>() / k.len() as f64;
            k.iter_mut().for_each(|v| *v -= mean);
            // Response 2 to f(x) = x², i.e. d²/dx² of x².
            let m2: f64 = (-r..=r).zip(&k).map(|(i, v)| (i * i) as f64 * v).sum();
            k.iter_mut().for_each(|v| *v *= 2.0 / m2);
            k
        }
        _ => panic!("gaussian_kernel supports orders 0..=2"),
    }
}

#[inline]
fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    if n == 1 {
        return 0;
    }
    let period = 2 * n - 2;
    let mut j = i.rem_euclid(period);
    if j >= n {
        j = period - j;
    }
    j as usize
}

/// Separable correlation `out(x,y) = Σ kx[i] ky[j] in(x+i-r, y+j-r)` with mirror boundaries.
pub fn separable_filter(src: &[f64], width: usize, height: usize, kx: &[f64], ky: &[f64]) -> Vec<f64> {
    let rx = (kx.len() / 2) as i64;
    let ry = (ky.len() / 2) as i64;
    let mut tmp = vec![0.0; width * height];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (i, k) in kx.iter().enumerate() {
                acc += k * row[reflect(x as i64 + i as i64 - rx, width)];
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for (j, k) in ky.iter().enumerate() {
            let sy = reflect(y as i64 + j as i64 - ry, height);
            let srow = &tmp[sy * width..(sy + 1) * width];
            let orow = &mut out[y * width..(y + 1) * width];
            for x in 0..width {
                orow[x] += k * srow[x];
            }
        }
    }
    out
}
