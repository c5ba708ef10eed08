//! Luminosity/contrast normalization and two-channel intensity combination.

use crate::error::{Error, Result};
use crate::liftspace::image::{gaussian_kernel, separable_filter, Image2D};

/// Gaussian window of the local mean/std normalization, in pixels.
pub const SIGMA_NORM: f64 = 16.0;
/// Local z-scores are clipped to ±CLIP before being mapped to [0, 1].
pub const CLIP: f64 = 3.0;

/// Local z-score normalization mapped affinely from [-3, 3] to [0, 1].
///
/// A locally constant region has zero spread and maps to 0.5.
pub fn normalize_channel(channel: &Image2D) -> Image2D {
    let (w, h) = (channel.width, channel.height);
    let g = gaussian_kernel(SIGMA_NORM, 0);
    let mean = separable_filter(&channel.data, w, h, &g, &g);
    let sq: Vec<f64> = channel.data.iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)).collect();
    let var = separable_filter(&sq, w, h, &g, &g);
    let data = channel
        .data
        .iter()
        .zip(mean.iter().zip(&var))
        .map(|(&v, (&m, &s2))| {
            let s = s2.max(0.0).sqrt();
            let z = if s > 1e-12 { ((v - m) / s).clamp(-CLIP, CLIP) } else { 0.0 };
            (z + CLIP) / (2.0 * CLIP)
        })
        .collect();
    Image2D { width: w, height: h, data }
}

/// Pixelwise √(g² + r²) of two normalized channels, before rescaling.
pub fn combine(green: &Image2D, red: &Image2D) -> Result<Image2D> {
    if green.width != red.width || green.height != red.height {
        return Err(Error::InvalidInput(format!(
            "channel dimensions differ: {}x{} vs {}x{}",
            green.width, green.height, red.width, red.height
        )));
    }
    let data = green.data.iter().zip(&red.data).map(|(g, r)| g.hypot(*r)).collect();
    Ok(Image2D { width: green.width, height: green.height, data })
}

/// Normalizes each channel, combines them and rescales the result to [0, 1].
///
/// Both channels in [0, 1] bound the combination by √2, which is the fixed
/// rescale divisor; this keeps intensities comparable across images.
pub fn preprocess(green: &Image2D, red: &Image2D) -> Result<Image2D> {
    for (name, ch) in [("green", green), ("red", red)] {
        if ch.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} channel contains a non-finite pixel")));
        }
    }
    let mut out = combine(&normalize_channel(green), &normalize_channel(red))?;
    out.data.iter_mut().for_each(|v| *v = (*v / std::f64::consts::SQRT_2).clamp(0.0, 1.0));
    Ok(out)
}

/// Single-channel inputs serve as both green and red.
pub fn preprocess_gray(gray: &Image2D) -> Result<Image2D> {
    preprocess(gray, gray)
}
