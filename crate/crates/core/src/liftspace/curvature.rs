//! Curvature and ridge confidence from exponential-curve fits on the orientation score.
//!
//! Works on W = Re(−U) smoothed with a Gaussian in space (σ) and in θ.
//! The Hessian is taken in the left-invariant frame A1 = (cosθ, sinθ, 0),
//! A2 = (−sinθ, cosθ, 0), A3 = ∂θ, symmetrized, and balanced by β so that
//! the angular axis is measured in pixels (t = θ/β). The eigenvector with
//! the smallest |λ| is the tangent c of the best-fitting exponential curve,
//! and its spatial projection bends at κ = β·c3/c1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::liftspace::image::{gaussian_kernel, separable_filter};
use crate::liftspace::score::OrientationScore;
use crate::liftspace::wavelet::bin_theta;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureParams {
    /// Angular-to-spatial balance, rad/px.
    pub beta: f64,
    /// |κ| bound, 1/px.
    pub kappa_cap: f64,
    /// Angular smoothing is `angular_factor · β · σ` radians.
    pub angular_factor: f64,
    /// Fixed-point passes of the off-ridge gradient correction; 0 disables it.
    pub ridge_iterations: u32,
}

impl Default for CurvatureParams {
    fn default() -> Self {
        CurvatureParams { beta: 0.1, kappa_cap: 0.5, angular_factor: 1.0, ridge_iterations: 8 }
    }
}

/// Values per (orientation bin, pixel): `values[k][y * width + x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedField {
    pub width: usize,
    pub height: usize,
    pub n_theta: usize,
    pub values: Vec<Vec<f64>>,
}

impl LiftedField {
    pub fn at(&self, x: usize, y: usize, k: usize) -> f64 {
        self.values[k][y * self.width + x]
    }
}

pub type CurvatureMap = LiftedField;
pub type ConfidenceMap = LiftedField;

/// Real circulant operator on π-periodic samples: Gaussian smoothing (σθ)
/// followed by the `order`-th θ-derivative, computed spectrally.
fn angular_operator(n: usize, sigma_theta: f64, order: u32) -> Vec<f64> {
    let mut op = vec![0.0; n * n];
    let dtheta = PI / n as f64;
    for j in 0..n {
        for l in 0..n {
            let d = (j as f64 - l as f64) * dtheta;
            let mut acc = 0.0;
            for m in 0..n {
                let f = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                let nyquist = n.is_multiple_of(2) && m == n / 2;
                if nyquist && order % 2 == 1 {
                    continue;
                }
                // Harmonic e^{i2fθ} of a π-periodic signal.
                let w = 2.0 * f;
                let gain = (-0.5 * w * w * sigma_theta * sigma_theta).exp();
                // Re[(iw)^order e^{iwd}]
                let phase = w * d + order as f64 * PI / 2.0;
                acc += gain * w.powi(order as i32) * phase.cos();
            }
            op[j * n + l] = acc / n as f64;
        }
    }
    op
}

fn apply_angular(op: &[f64], fields: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = fields.len();
    let len = fields[0].len();
    let mut out = vec![vec![0.0; len]; n];
    for (j, row) in out.iter_mut().enumerate() {
        for (l, f) in fields.iter().enumerate() {
            let c = op[j * n + l];
            if c != 0.0 {
                for (o, v) in row.iter_mut().zip(f) {
                    *o += c * v;
                }
            }
        }
    }
    out
}

/// Eigen-decomposition of a symmetric 3×3 matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and eigenvectors as columns `v[row][col]`.
pub fn symmetric_eigen3(mut a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..50 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        let scale = a[0][0].abs() + a[1][1].abs() + a[2][2].abs() + off;
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for r in 0..3 {
                let (arp, arq) = (a[r][p], a[r][q]);
                a[r][p] = c * arp - s * arq;
                a[r][q] = s * arp + c * arq;
            }
            for r in 0..3 {
                let (apr, aqr) = (a[p][r], a[q][r]);
                a[p][r] = c * apr - s * aqr;
                a[q][r] = s * apr + c * aqr;
            }
            for row in v.iter_mut() {
                let (vp, vq) = (row[p], row[q]);
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Signed curvature from a fitted tangent (c1, c2, c3) in balanced units.
pub fn kappa_from_tangent(c: [f64; 3], beta: f64, cap: f64) -> f64 {
    if c[0].abs() < 1e-12 {
        let sign = if c[0] == 0.0 { c[2].signum() } else { (c[2] * c[0]).signum() };
        return sign * cap;
    }
    (beta * c[2] / c[0]).clamp(-cap, cap)
}

/// Gaussian-derivative responses of W at one scale, all smoothed in θ.
/// Each field is indexed `[k][y * width + x]`.
pub struct DerivativeFields {
    pub width: usize,
    pub height: usize,
    pub n_theta: usize,
    pub sigma: f64,
    pub beta: f64,
    pub wx: Vec<Vec<f64>>,
    pub wy: Vec<Vec<f64>>,
    pub wxx: Vec<Vec<f64>>,
    pub wxy: Vec<Vec<f64>>,
    pub wyy: Vec<Vec<f64>>,
    pub wtt: Vec<Vec<f64>>,
    pub wxt: Vec<Vec<f64>>,
    pub wyt: Vec<Vec<f64>>,
}

impl DerivativeFields {
    pub fn new(score: &OrientationScore, sigma: f64, params: &CurvatureParams) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::param("sigma", format!("{sigma} must be positive")));
        }
        let (w, h, n) = (score.width, score.height, score.n_theta);
        let g0 = gaussian_kernel(sigma, 0);
        let g1 = gaussian_kernel(sigma, 1);
        let g2 = gaussian_kernel(sigma, 2);
        // Per bin: W, Wx, Wy, Wxx, Wxy, Wyy after spatial smoothing.
        let spatial: Vec<[Vec<f64>; 6]> = (0..n)
            .into_par_iter()
            .map(|k| {
                let r = score.ridge(k);
                [
                    separable_filter(&r, w, h, &g0, &g0),
                    separable_filter(&r, w, h, &g1, &g0),
                    separable_filter(&r, w, h, &g0, &g1),
                    separable_filter(&r, w, h, &g2, &g0),
                    separable_filter(&r, w, h, &g1, &g1),
                    separable_filter(&r, w, h, &g0, &g2),
                ]
            })
            .collect();
        let field = |i: usize| -> Vec<Vec<f64>> { spatial.iter().map(|f| f[i].clone()).collect() };
        let sigma_theta = params.angular_factor * params.beta * sigma;
        let s0 = angular_operator(n, sigma_theta, 0);
        let s1 = angular_operator(n, sigma_theta, 1);
        let s2 = angular_operator(n, sigma_theta, 2);
        Ok(DerivativeFields {
            width: w,
            height: h,
            n_theta: n,
            sigma,
            beta: params.beta,
            wx: apply_angular(&s0, &field(1)),
            wy: apply_angular(&s0, &field(2)),
            wxx: apply_angular(&s0, &field(3)),
            wxy: apply_angular(&s0, &field(4)),
            wyy: apply_angular(&s0, &field(5)),
            wtt: apply_angular(&s2, &field(0)),
            wxt: apply_angular(&s1, &field(1)),
            wyt: apply_angular(&s1, &field(2)),
        })
    }

    /// Symmetrized left-invariant Hessian in balanced units at pixel `i`, bin `k`.
    pub fn hessian(&self, i: usize, k: usize) -> [[f64; 3]; 3] {
        let th = bin_theta(self.n_theta, k);
        let (c, s) = (th.cos(), th.sin());
        let beta = self.beta;
        let (xx, xy, yy) = (self.wxx[k][i], self.wxy[k][i], self.wyy[k][i]);
        let a1 = c * self.wx[k][i] + s * self.wy[k][i];
        let a2 = -s * self.wx[k][i] + c * self.wy[k][i];
        let h11 = c * c * xx + 2.0 * c * s * xy + s * s * yy;
        let h22 = s * s * xx - 2.0 * c * s * xy + c * c * yy;
        let h12 = -c * s * xx + (c * c - s * s) * xy + c * s * yy;
        let h33 = beta * beta * self.wtt[k][i];
        let h13 = beta * (c * self.wxt[k][i] + s * self.wyt[k][i] + 0.5 * a2);
        let h23 = beta * (-s * self.wxt[k][i] + c * self.wyt[k][i] - 0.5 * a1);
        [[h11, h12, h13], [h12, h22, h23], [h13, h23, h33]]
    }

    /// A2·W at pixel `i`, bin `k`.
    pub fn lateral_gradient(&self, i: usize, k: usize) -> f64 {
        let th = bin_theta(self.n_theta, k);
        -th.sin() * self.wx[k][i] + th.cos() * self.wy[k][i]
    }

    /// Curvature of the best exponential-curve fit at pixel `i`, bin `k`.
    ///
    /// With `ridge_iterations > 0` the fit is refined for points beside the
    /// ridge centre of W. There a circle-like ridge contributes κ·P'·A to
    /// H11 and ½β·P'·A to H13 (P'·A = −A2·W), which tilts the null vector;
    /// both terms are removed using the current κ estimate and the fit is
    /// repeated. On the model ridge the fixed point is exact. Where the
    /// iteration does not settle (far out on a ridge flank) the estimate
    /// falls back to the fixed point of the (A1, A3) rows alone,
    /// κ = β(½β·A2W − H13)/H33.
    pub fn kappa(&self, i: usize, k: usize, params: &CurvatureParams) -> f64 {
        let h = self.hessian(i, k);
        let mut kappa = smallest_tangent_kappa(h, params);
        if params.ridge_iterations == 0 {
            return kappa;
        }
        let g = self.lateral_gradient(i, k);
        let mut step = 0.0f64;
        for _ in 0..params.ridge_iterations {
            let mut hc = h;
            hc[0][0] += kappa * g;
            hc[0][2] -= 0.5 * self.beta * g;
            hc[2][0] = hc[0][2];
            let next = smallest_tangent_kappa(hc, params);
            step = (next - kappa).abs();
            kappa = next;
        }
        let settled = step <= 0.05 * kappa.abs() + 1e-4 && kappa.abs() < params.kappa_cap;
        if settled {
            return kappa;
        }
        let row = self.beta * (0.5 * self.beta * g - h[0][2]) / h[2][2];
        if row.is_finite() {
            row.clamp(-params.kappa_cap, params.kappa_cap)
        } else {
            kappa
        }
    }

    /// Scale-normalized negative spatial Laplacian, floored at zero.
    pub fn confidence(&self, i: usize, k: usize) -> f64 {
        (-self.sigma * self.sigma * (self.wxx[k][i] + self.wyy[k][i])).max(0.0)
    }
}

fn smallest_tangent_kappa(h: [[f64; 3]; 3], params: &CurvatureParams) -> f64 {
    let (vals, vecs) = symmetric_eigen3(h);
    let j = (0..3).min_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs())).unwrap();
    kappa_from_tangent([vecs[0][j], vecs[1][j], vecs[2][j]], params.beta, params.kappa_cap)
}

/// Curvature and confidence at one spatial scale σ.
pub fn curvature_confidence(
    score: &OrientationScore,
    sigma: f64,
    params: &CurvatureParams,
) -> Result<(CurvatureMap, ConfidenceMap)> {
    let fields = DerivativeFields::new(score, sigma, params)?;
    let (w, h, n) = (score.width, score.height, score.n_theta);
    let per_bin: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut kap = vec![0.0; w * h];
            let mut conf = vec![0.0; w * h];
            for i in 0..w * h {
                kap[i] = fields.kappa(i, k, params);
                conf[i] = fields.confidence(i, k);
            }
            (kap, conf)
        })
        .collect();
    let (kappa, confidence): (Vec<_>, Vec<_>) = per_bin.into_iter().unzip();
    Ok((
        LiftedField { width: w, height: h, n_theta: n, values: kappa },
        LiftedField { width: w, height: h, n_theta: n, values: confidence },
    ))
}

/// Multiscale curvature plus, per (bin, pixel), the index of the chosen scale.
pub fn multiscale_curvature_with_selection(
    score: &OrientationScore,
    scales: &[f64],
    params: &CurvatureParams,
) -> Result<(CurvatureMap, LiftedField)> {
    if scales.is_empty() {
        return Err(Error::param("scales", "at least one scale is required"));
    }
    let mut best: Option<(CurvatureMap, ConfidenceMap, LiftedField)> = None;
    for (si, &sigma) in scales.iter().enumerate() {
        let (kap, conf) = curvature_confidence(score, sigma, params)?;
        match best.as_mut() {
            None => {
                let sel = LiftedField {
                    width: kap.width,
                    height: kap.height,
                    n_theta: kap.n_theta,
                    values: vec![vec![0.0; kap.width * kap.height]; kap.n_theta],
                };
                best = Some((kap, conf, sel));
            }
            Some((bk, bc, bs)) => {
                for k in 0..kap.n_theta {
                    for i in 0..kap.width * kap.height {
                        // Strictly larger wins: ties stay with the smaller scale.
                        if conf.values[k][i] > bc.values[k][i] {
                            bc.values[k][i] = conf.values[k][i];
                            bk.values[k][i] = kap.values[k][i];
                            bs.values[k][i] = si as f64;
                        }
                    }
                }
            }
        }
    }
    let (k, _, s) = best.expect("nonempty scales");
    Ok((k, s))
}

/// κ_map(x, θ) = κ at the scale of maximal confidence.
pub fn multiscale_curvature(
    score: &OrientationScore,
    scales: &[f64],
    params: &CurvatureParams,
) -> Result<CurvatureMap> {
    multiscale_curvature_with_selection(score, scales, params).map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::num_complex::Complex64;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn jacobi_matches_known_spectrum() {
        let a = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        let (vals, vecs) = symmetric_eigen3(a);
        let mut sorted = vals;
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[0] - 1.0).abs() < 1e-12 && (sorted[1] - 3.0).abs() < 1e-12 && (sorted[2] - 5.0).abs() < 1e-12);
        for j in 0..3 {
            for r in 0..3 {
                let av: f64 = (0..3).map(|c| a[r][c] * vecs[c][j]).sum();
                assert!((av - vals[j] * vecs[r][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn angular_operators_differentiate_harmonics() {
        let n = 18;
        let op1 = angular_operator(n, 0.0, 1);
        let op2 = angular_operator(n, 0.0, 2);
        let f: Vec<Vec<f64>> = (0..n).map(|k| vec![(2.0 * bin_theta(n, k)).sin()]).collect();
        let d1 = apply_angular(&op1, &f);
        let d2 = apply_angular(&op2, &f);
        for k in 0..n {
            let t = bin_theta(n, k);
            assert!((d1[k][0] - 2.0 * (2.0 * t).cos()).abs() < 1e-10);
            assert!((d2[k][0] + 4.0 * (2.0 * t).sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn tangent_to_kappa() {
        assert!((kappa_from_tangent([1.0, 0.0, 0.2], 0.1, 0.5) - 0.02).abs() < 1e-15);
        assert!((kappa_from_tangent([-1.0, 0.0, -0.2], 0.1, 0.5) - 0.02).abs() < 1e-15);
        assert_eq!(kappa_from_tangent([0.0, 0.3, -1.0], 0.1, 0.5), -0.5);
        assert_eq!(kappa_from_tangent([0.01, 0.0, 1.0], 0.1, 0.5), 0.5);
    }

    /// W = P(d)·A(θ − φ) for a ring: P over the distance to the ring, A over
    /// the angle to the tangent.
    fn ring_score(size: usize, n: usize, r: f64) -> OrientationScore {
        let c = (size / 2) as f64;
        let values = (0..n)
            .map(|k| {
                let th = bin_theta(n, k);
                (0..size * size)
                    .map(|i| {
                        let (x, y) = ((i % size) as f64 - c, (i / size) as f64 - c);
                        let d = x.hypot(y) - r;
                        let phi = y.atan2(x) + FRAC_PI_2;
                        let w = (-d * d / 8.0).exp() * (-(th - phi).sin().powi(2) / (2.0 * 0.3f64.powi(2))).exp();
                        Complex64::new(-w, 0.0)
                    })
                    .collect()
            })
            .collect();
        OrientationScore { width: size, height: size, n_theta: n, values }
    }

    #[test]
    fn ridge_correction_recovers_off_centre_curvature() {
        let (size, n, r) = (81, 36, 25.0);
        let score = ring_score(size, n, r);
        let plain = CurvatureParams { ridge_iterations: 0, ..Default::default() };
        let fitted = CurvatureParams::default();
        let fields = DerivativeFields::new(&score, 2.0, &fitted).unwrap();
        // Pixel straight below the centre, one pixel outside the ring; the
        // tangent there is horizontal, bin n/2.
        let c = size / 2;
        for off in [-1i64, 1] {
            let i = (c as i64 + 25 + off) as usize * size + c;
            let truth = 1.0 / (r + off as f64);
            let k_plain = fields.kappa(i, n / 2, &plain).abs();
            let k_fit = fields.kappa(i, n / 2, &fitted).abs();
            assert!((k_fit - truth).abs() < 0.1 * truth, "offset {off}: {k_fit} vs {truth}");
            assert!((k_fit - truth).abs() < (k_plain - truth).abs());
        }
    }
}
