//! Parametric curve elements with analytic tangent and curvature.
//!
//! All quantities are in pixel coordinates (x right, y down). θ is the
//! direction of travel, atan2(dy, dx), and κ = dθ/ds in the same frame.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// (t, a·sin(ωt + φ)) for t ∈ [−L/2, L/2], rotated by `rotation` and
    /// moved to `center`. L is measured along the axis, not the curve.
    Sine {
        center: (f64, f64),
        rotation: f64,
        amplitude: f64,
        frequency: f64,
        phase: f64,
        length: f64,
    },
    /// Arc from angle `start` through `sweep` radians (positive sweeps run
    /// with increasing angle).
    Circle {
        center: (f64, f64),
        radius: f64,
        start: f64,
        sweep: f64,
    },
    /// κ(s) = κ₀ + c·s for s ∈ [0, L], starting at `start` with `heading`.
    EulerSpiral {
        start: (f64, f64),
        heading: f64,
        kappa0: f64,
        slope: f64,
        length: f64,
    },
    Segment {
        from: (f64, f64),
        to: (f64, f64),
    },
}

/// Arclength pattern: `on` pixels drawn, then `off` skipped, repeating from s = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dash {
    pub on: f64,
    pub off: f64,
}

impl Default for Dash {
    fn default() -> Self {
        Dash { on: 8.0, off: 5.0 }
    }
}

impl Dash {
    pub fn draws(&self, s: f64) -> bool {
        s.rem_euclid(self.on + self.off) < self.on
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub kappa: f64,
    /// Arclength from the first sample.
    pub s: f64,
}

/// Signed curvature of y = a·sin(ωx + φ), from (x'y'' − y'x'')/(x'² + y'²)^{3/2}.
pub fn sine_curvature(amplitude: f64, frequency: f64, phase: f64, t: f64) -> f64 {
    let (s, c) = (frequency * t + phase).sin_cos();
    let slope = amplitude * frequency * c;
    -amplitude * frequency * frequency * s / (1.0 + slope * slope).powf(1.5)
}

/// Largest |κ| of a sine element, attained at the crests.
pub fn sine_peak_curvature(amplitude: f64, frequency: f64) -> f64 {
    amplitude * frequency * frequency
}

fn finite(vals: &[f64]) -> bool {
    vals.iter().all(|v| v.is_finite())
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape::Sine { center, rotation, amplitude, frequency, phase, length } => {
                finite(&[center.0, center.1, rotation, amplitude, frequency, phase, length])
                    && length > 0.0
                    && amplitude >= 0.0
                    && frequency >= 0.0
            }
            Shape::Circle { center, radius, start, sweep } => {
                finite(&[center.0, center.1, radius, start, sweep]) && radius > 0.0 && sweep != 0.0
            }
            Shape::EulerSpiral { start, heading, kappa0, slope, length } => {
                finite(&[start.0, start.1, heading, kappa0, slope, length]) && length > 0.0
            }
            Shape::Segment { from, to } => finite(&[from.0, from.1, to.0, to.1]) && from != to,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param("shape", format!("degenerate or non-finite element {self:?}")))
        }
    }

    /// Samples no more than `step` pixels of arclength apart.
    pub fn samples(&self, step: f64) -> Vec<CurveSample> {
        match *self {
            Shape::Sine { center, rotation, amplitude, frequency, phase, length } => {
                let max_slope = amplitude * frequency;
                let n = (length * (1.0 + max_slope * max_slope).sqrt() / step).ceil().max(1.0) as usize;
                let (rs, rc) = rotation.sin_cos();
                let mut out = Vec::with_capacity(n + 1);
                let mut s = 0.0;
                for i in 0..=n {
                    let t = -length / 2.0 + length * i as f64 / n as f64;
                    let y = amplitude * (frequency * t + phase).sin();
                    let (x, yy) = (center.0 + rc * t - rs * y, center.1 + rs * t + rc * y);
                    if let Some(p) = out.last() {
                        let p: &CurveSample = p;
                        s += (x - p.x).hypot(yy - p.y);
                    }
                    let slope = amplitude * frequency * (frequency * t + phase).cos();
                    out.push(CurveSample {
                        x,
                        y: yy,
                        theta: rotation + slope.atan(),
                        kappa: sine_curvature(amplitude, frequency, phase, t),
                        s,
                    });
                }
                out
            }
            Shape::Circle { center, radius, start, sweep } => {
                let n = (radius * sweep.abs() / step).ceil().max(1.0) as usize;
                let dir = sweep.signum();
                (0..=n)
                    .map(|i| {
                        let phi = start + sweep * i as f64 / n as f64;
                        let (s, c) = phi.sin_cos();
                        CurveSample {
                            x: center.0 + radius * c,
                            y: center.1 + radius * s,
                            theta: phi + dir * PI / 2.0,
                            kappa: dir / radius,
                            s: radius * (phi - start).abs(),
                        }
                    })
                    .collect()
            }
            Shape::EulerSpiral { start, heading, kappa0, slope, length } => {
                let n = (length / step).ceil().max(1.0) as usize;
                let ds = length / n as f64;
                let theta_at = |s: f64| heading + kappa0 * s + 0.5 * slope * s * s;
                let (mut x, mut y) = start;
                let mut out = Vec::with_capacity(n + 1);
                for i in 0..=n {
                    let s = i as f64 * ds;
                    out.push(CurveSample { x, y, theta: theta_at(s), kappa: kappa0 + slope * s, s });
                    // Midpoint rule: second order in ds.
                    let (ts, tc) = theta_at(s + 0.5 * ds).sin_cos();
                    x += ds * tc;
                    y += ds * ts;
                }
                out
            }
            Shape::Segment { from, to } => {
                let len = (to.0 - from.0).hypot(to.1 - from.1);
                let n = (len / step).ceil().max(1.0) as usize;
                let theta = (to.1 - from.1).atan2(to.0 - from.0);
                (0..=n)
                    .map(|i| {
                        let u = i as f64 / n as f64;
                        CurveSample {
                            x: from.0 + u * (to.0 - from.0),
                            y: from.1 + u * (to.1 - from.1),
                            theta,
                            kappa: 0.0,
                            s: u * len,
                        }
                    })
                    .collect()
            }
        }
    }

    /// Position and direction at the curve point nearest to arclength `s`.
    pub fn point_at(&self, s: f64) -> CurveSample {
        let samples = self.samples(0.05);
        let i = samples.partition_point(|p| p.s < s).min(samples.len() - 1);
        samples[i]
    }
}

/// One drawn element: a curve, the ground-truth unit it belongs to and an optional dash.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub shape: Shape,
    pub unit: u32,
    #[serde(default)]
    pub dash: Option<Dash>,
}

/// Ground truth left by one element on one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub element: usize,
    pub unit: u32,
    pub theta: f64,
    pub kappa: f64,
    /// Distance from the pixel centre to the element's nearest drawn sample.
    pub dist: f64,
}

/// Sampling step along the curve, in pixels.
pub const SAMPLE_STEP: f64 = 0.1;

/// Pixels within `width / 2` of a drawn sample, each tagged with the
/// tangent and curvature of its nearest drawn sample. Returned row-major;
/// pixels outside the canvas are dropped.
pub fn render_element(
    element: &Element,
    index: usize,
    width: f64,
    canvas: (usize, usize),
) -> Result<Vec<(usize, usize, Hit)>> {
    element.shape.validate()?;
    if !(width >= 1.0 && width.is_finite()) {
        return Err(Error::param("stroke_width", format!("must be at least 1 px, got {width}")));
    }
    if let Some(d) = element.dash {
        if !(d.on > 0.0 && d.off >= 0.0 && d.on.is_finite() && d.off.is_finite()) {
            return Err(Error::param("dash", format!("need on > 0 and off ≥ 0, got {}/{}", d.on, d.off)));
        }
    }
    let (cw, ch) = canvas;
    let r = width / 2.0;
    let mut best: Vec<Option<(f64, Hit)>> = vec![None; cw * ch];
    for p in element.shape.samples(SAMPLE_STEP) {
        if element.dash.is_some_and(|d| !d.draws(p.s)) {
            continue;
        }
        let (x0, x1) = ((p.x - r).ceil().max(0.0), (p.x + r).floor().min(cw as f64 - 1.0));
        let (y0, y1) = ((p.y - r).ceil().max(0.0), (p.y + r).floor().min(ch as f64 - 1.0));
        if x0 > x1 || y0 > y1 {
            continue;
        }
        for py in y0 as usize..=y1 as usize {
            for px in x0 as usize..=x1 as usize {
                let d2 = (px as f64 - p.x).powi(2) + (py as f64 - p.y).powi(2);
                if d2 > r * r {
                    continue;
                }
                let slot = &mut best[py * cw + px];
                if slot.is_none_or(|(b, _)| d2 < b) {
                    *slot = Some((
                        d2,
                        Hit { element: index, unit: element.unit, theta: p.theta, kappa: p.kappa, dist: d2.sqrt() },
                    ));
                }
            }
        }
    }
    Ok(best.into_iter().enumerate().filter_map(|(i, h)| h.map(|(_, hit)| (i % cw, i / cw, hit))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_has_constant_curvature() {
        let c = Shape::Circle { center: (50.0, 50.0), radius: 20.0, start: 0.0, sweep: 2.0 * PI };
        for p in c.samples(0.5) {
            assert_eq!(p.kappa, 0.05);
            assert!(((p.x - 50.0).hypot(p.y - 50.0) - 20.0).abs() < 1e-9);
        }
        let back = Shape::Circle { center: (50.0, 50.0), radius: 20.0, start: 0.0, sweep: -PI };
        assert!(back.samples(0.5).iter().all(|p| p.kappa == -0.05));
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let shapes = [
            Shape::Sine {
                center: (100.0, 90.0),
                rotation: 0.7,
                amplitude: 15.0,
                frequency: 0.06,
                phase: 0.4,
                length: 150.0,
            },
            Shape::Circle { center: (0.0, 0.0), radius: 12.0, start: 1.0, sweep: -4.0 },
            Shape::EulerSpiral { start: (3.0, 4.0), heading: -0.5, kappa0: 0.01, slope: 4e-4, length: 120.0 },
        ];
        for shape in shapes {
            let s = shape.samples(0.01);
            for w in s.windows(3).step_by(97) {
                let dir = (w[2].y - w[0].y).atan2(w[2].x - w[0].x);
                let diff = (dir - w[1].theta).rem_euclid(2.0 * PI);
                assert!(diff.min(2.0 * PI - diff) < 1e-3, "{shape:?}");
            }
        }
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(Shape::Circle { center: (0.0, 0.0), radius: 0.0, start: 0.0, sweep: 1.0 }.validate().is_err());
        assert!(Shape::Segment { from: (1.0, 1.0), to: (1.0, 1.0) }.validate().is_err());
        let e = Element { shape: Shape::Segment { from: (0.0, 0.0), to: (5.0, 0.0) }, unit: 1, dash: None };
        assert!(render_element(&e, 0, 0.5, (10, 10)).is_err());
    }

    #[test]
    fn horizontal_stroke_is_three_rows() {
        let e = Element { shape: Shape::Segment { from: (2.0, 5.0), to: (12.0, 5.0) }, unit: 1, dash: None };
        let px = render_element(&e, 0, 3.0, (20, 11)).unwrap();
        let rows: std::collections::BTreeSet<usize> = px.iter().map(|p| p.1).collect();
        assert_eq!(rows.into_iter().collect::<Vec<_>>(), vec![4, 5, 6]);
        assert!(px.iter().all(|p| p.2.kappa == 0.0 && p.2.theta == 0.0));
    }

    #[test]
    fn dashes_leave_gaps() {
        let solid = Element { shape: Shape::Segment { from: (0.0, 5.0), to: (100.0, 5.0) }, unit: 1, dash: None };
        let dashed = Element { dash: Some(Dash::default()), ..solid };
        assert_eq!(render_element(&solid, 0, 1.0, (101, 11)).unwrap().len(), 101);
        // A pixel centre within 0.5 px of an 8 px dash: nine of every thirteen.
        let xs: Vec<usize> = render_element(&dashed, 0, 1.0, (101, 11)).unwrap().iter().map(|p| p.0).collect();
        assert_eq!(xs, (0..=100).filter(|x| x % 13 <= 8).collect::<Vec<_>>());
    }
}
