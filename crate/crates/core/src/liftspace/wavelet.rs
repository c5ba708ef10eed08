//! Cake wavelets: oriented quadrature filters whose spectra tile the Fourier plane.
//!
//! Filter `k` covers the angular wedge centred on the frequency direction
//! `φ_k = kπ/n`, which is normal to line orientation `θ_k = φ_k − π/2`.
//! The n filters cover one half-plane; their point reflections, which are
//! the spectra of the complex conjugate filters, cover the other. Over all
//! 2n wedges the squared angular profiles sum to one exactly, so the
//! squared magnitudes cover the plane with the radial envelope M².

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::liftspace::fft::{signed_freq, Fft2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CakeParams {
    /// Taylor order of the truncated-Gaussian radial envelope.
    pub radial_order: u32,
    /// Inflection of the radial envelope as a fraction of Nyquist (π rad/px).
    pub cutoff_fraction: f64,
    /// Angular B-spline scale in units of the wedge spacing π/n. Wedges much
    /// wider than the spacing keep Re(−U) smooth in θ along curved strokes.
    pub angular_width: f64,
}

impl Default for CakeParams {
    fn default() -> Self {
        CakeParams { radial_order: 8, cutoff_fraction: 0.8, angular_width: 3.0 }
    }
}

#[derive(Debug, Clone)]
pub struct FilterBank {
    pub n_theta: usize,
    pub spatial_size: usize,
    pub params: CakeParams,
    /// Spatial kernels, `kernels[k][y * size + x]`, origin at the centre cell.
    pub kernels: Vec<Vec<Complex64>>,
    /// Spectra on the `size × size` DFT grid in FFT order (DC at index 0).
    pub spectra: Vec<Vec<f64>>,
}

/// Cubic B-spline supported on [-2, 2].
pub fn bspline3(u: f64) -> f64 {
    let a = u.abs();
    if a < 1.0 {
        2.0 / 3.0 - a * a + 0.5 * a * a * a
    } else if a < 2.0 {
        let t = 2.0 - a;
        t * t * t / 6.0
    } else {
        0.0
    }
}

fn wrap_pi(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Angular profile of wedge `j` out of `2n`, normalized so that
/// `Σ_j profile(j, φ)² = 1` for every φ.
pub fn angular_profile(n_theta: usize, width: f64, j: usize, phi: f64) -> f64 {
    let step = PI / n_theta as f64;
    let b = |i: usize| bspline3(wrap_pi(phi - i as f64 * step) / (width * step));
    let total = 2 * n_theta;
    // Wedges farther than 2·width steps from φ vanish.
    let reach = (2.0 * width).ceil() as i64;
    let sum_sq: f64 = if 2 * reach + 1 >= total as i64 {
        (0..total).map(|i| b(i).powi(2)).sum()
    } else {
        let base = (phi.rem_euclid(2.0 * PI) / step).floor() as i64;
        (-reach..=reach + 1).map(|d| b((base + d).rem_euclid(total as i64) as usize).powi(2)).sum()
    };
    b(j) / sum_sq.sqrt()
}

/// Truncated-Taylor Gaussian, ≈1 below the cutoff and smoothly decaying past it.
pub fn radial_envelope(params: &CakeParams, rho: f64) -> f64 {
    let n = params.radial_order as f64;
    let rho_c = params.cutoff_fraction * PI;
    let t2 = 2.0 * rho_c * rho_c / (1.0 + 2.0 * n);
    let q = rho * rho / t2;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=params.radial_order {
        term *= q / k as f64;
        sum += term;
    }
    (-q).exp() * sum
}

impl FilterBank {
    pub fn new(n_theta: usize, spatial_size: usize, params: CakeParams) -> Result<Self> {
        if n_theta < 2 {
            return Err(Error::param("n_theta", format!("{n_theta} < 2")));
        }
        if spatial_size.is_multiple_of(2) || spatial_size < 3 {
            return Err(Error::param("spatial_size", format!("{spatial_size} must be odd and ≥ 3")));
        }
        if !(params.cutoff_fraction > 0.0) || params.radial_order == 0 || !(params.angular_width >= 0.5) {
            return Err(Error::param("cake_params", "cutoff must be positive, order ≥ 1 and angular width ≥ 0.5"));
        }
        let s = spatial_size;
        let fft = Fft2::new(s, s);
        let half = (s / 2) as i64;
        let mut kernels = Vec::with_capacity(n_theta);
        let mut spectra = Vec::with_capacity(n_theta);
        for k in 0..n_theta {
            let spec: Vec<f64> = (0..s * s)
                .map(|i| {
                    let wx = 2.0 * PI * signed_freq(i % s, s) as f64 / s as f64;
                    let wy = 2.0 * PI * signed_freq(i / s, s) as f64 / s as f64;
                    spectrum_at(n_theta, &params, k, wx, wy)
                })
                .collect();
            let mut buf: Vec<Complex64> = spec.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft.inverse(&mut buf);
            // Shift the origin from index 0 to the centre cell.
            let mut centred = vec![Complex64::new(0.0, 0.0); s * s];
            for y in 0..s {
                for x in 0..s {
                    let sx = (x as i64 - half).rem_euclid(s as i64) as usize;
                    let sy = (y as i64 - half).rem_euclid(s as i64) as usize;
                    centred[y * s + x] = buf[sy * s + sx];
                }
            }
            kernels.push(centred);
            spectra.push(spec);
        }
        Ok(FilterBank { n_theta, spatial_size, params, kernels, spectra })
    }

    /// Line orientation of bin `k`: −π/2 + kπ/n.
    pub fn theta(&self, k: usize) -> f64 {
        bin_theta(self.n_theta, k)
    }

    /// Σ over the n filters and their conjugates of |ψ̂|² at DFT cell `i`.
    pub fn coverage_at(&self, i: usize) -> f64 {
        let s = self.spatial_size;
        let (u, v) = (i % s, i / s);
        let mirror = ((s - u) % s) + ((s - v) % s) * s;
        self.spectra.iter().map(|sp| sp[i] * sp[i] + sp[mirror] * sp[mirror]).sum()
    }

    /// Radius below which the radial envelope squared stays within 1% of one.
    pub fn passband_radius(&self) -> f64 {
        let (mut lo, mut hi) = (0.0, PI * std::f64::consts::SQRT_2);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if radial_envelope(&self.params, mid).powi(2) >= 0.99 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

pub fn bin_theta(n_theta: usize, k: usize) -> f64 {
    -PI / 2.0 + k as f64 * PI / n_theta as f64
}

/// Analytic spectrum of filter `k` at frequency (ωx, ωy); zero at DC.
pub fn spectrum_at(n_theta: usize, params: &CakeParams, k: usize, wx: f64, wy: f64) -> f64 {
    let rho = wx.hypot(wy);
    if rho == 0.0 {
        return 0.0;
    }
    angular_profile(n_theta, params.angular_width, k, wy.atan2(wx)) * radial_envelope(params, rho)
}
