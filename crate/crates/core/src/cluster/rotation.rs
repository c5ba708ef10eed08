//! Eigenvector alignment by Givens rotations.
//!
//! The cost of a rotated matrix Z is J = Σᵢ Σⱼ Z²ᵢⱼ / Mᵢ², with Mᵢ the largest
//! magnitude in row i. Rotations keep row norms, so J = Σᵢ ‖zᵢ‖² / Mᵢ² and
//! J ≥ N with equality iff every row has a single nonzero entry. A rotation
//! of one column pair only moves the maxima of the rows it touches, which
//! makes each pair update O(N·K).
//!
//! A row with (numerically) zero norm carries no direction; it is charged
//! the worst case K rather than nothing, so degenerate eigenvectors cannot
//! lower J by vanishing on a group.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSettings {
    pub max_sweeps: usize,
    /// Gradient step on J/N per pair angle.
    pub step: f64,
    /// A sweep that lowers J/N by less than this ends the descent.
    pub tolerance: f64,
    /// Angles tried per pair in (−π/4, π/4] besides the gradient step.
    pub probes: usize,
}

impl Default for RotationSettings {
    fn default() -> Self {
        RotationSettings { max_sweeps: 200, step: 0.1, tolerance: 1e-8, probes: 16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// J at the end of the descent.
    pub cost: f64,
    /// J before any rotation.
    pub initial_cost: f64,
    /// Rotated matrix, row-major N×K.
    pub z: Vec<f64>,
    /// Column of the largest magnitude per row; ties go to the lower column.
    pub assignments: Vec<usize>,
    pub converged: bool,
    pub sweeps: usize,
}

fn row_max(z: &[f64], k: usize, i: usize) -> f64 {
    z[i * k..(i + 1) * k].iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Squared row norms at or below this fraction of the largest count as zero.
pub const ZERO_ROW: f64 = 1e-20;

fn row_norms(z: &[f64], n: usize, k: usize) -> Vec<f64> {
    (0..n).map(|i| z[i * k..(i + 1) * k].iter().map(|v| v * v).sum()).collect()
}

fn zero_floor(norms: &[f64]) -> f64 {
    ZERO_ROW * norms.iter().cloned().fold(0.0, f64::max)
}

/// Total cost J.
pub fn cost(z: &[f64], n: usize, k: usize) -> f64 {
    let norms = row_norms(z, n, k);
    let floor = zero_floor(&norms);
    (0..n)
        .map(|i| {
            let m = row_max(z, k, i);
            if norms[i] > floor && m > 0.0 {
                norms[i] / (m * m)
            } else {
                k as f64
            }
        })
        .sum()
}

/// Per-row data for rotating columns `a` and `b`.
struct PairView {
    /// Rows with zero norm are dropped; each adds `k` to every cost.
    zero_rows: f64,
    norm: Vec<f64>,
    other: Vec<f64>,
    za: Vec<f64>,
    zb: Vec<f64>,
}

impl PairView {
    fn new(z: &[f64], norms: &[f64], floor: f64, k: usize, a: usize, b: usize) -> Self {
        let n = norms.len();
        let mut v = PairView {
            zero_rows: 0.0,
            norm: Vec::with_capacity(n),
            other: Vec::with_capacity(n),
            za: Vec::with_capacity(n),
            zb: Vec::with_capacity(n),
        };
        for i in 0..n {
            if norms[i] <= floor {
                v.zero_rows += k as f64;
                continue;
            }
            let row = &z[i * k..(i + 1) * k];
            v.norm.push(norms[i]);
            v.other.push(
                row.iter().enumerate().filter(|&(j, _)| j != a && j != b).fold(0.0f64, |m, (_, x)| m.max(x.abs())),
            );
            v.za.push(row[a]);
            v.zb.push(row[b]);
        }
        v
    }

    fn cost_at(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        let mut j = self.zero_rows;
        for i in 0..self.norm.len() {
            let ra = c * self.za[i] - s * self.zb[i];
            let rb = s * self.za[i] + c * self.zb[i];
            let m = self.other[i].max(ra.abs()).max(rb.abs());
            j += self.norm[i] / (m * m);
        }
        j
    }

    /// dJ/dφ at φ = 0, using the first column that attains each row maximum.
    fn gradient(&self) -> f64 {
        let mut g = 0.0;
        for i in 0..self.norm.len() {
            let (a, b, o) = (self.za[i].abs(), self.zb[i].abs(), self.other[i]);
            let m = o.max(a).max(b);
            if m == 0.0 || (o >= a && o >= b) {
                continue;
            }
            let dm = if a >= b { -self.za[i].signum() * self.zb[i] } else { self.zb[i].signum() * self.za[i] };
            g += -2.0 * self.norm[i] / (m * m * m) * dm;
        }
        g
    }
}

/// Golden-section search of the pair cost on [centre − h, centre + h].
fn golden_refine(view: &PairView, centre: f64, h: f64, at_centre: f64) -> (f64, f64) {
    const R: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (centre - h, centre + h);
    let mut x1 = hi - R * (hi - lo);
    let mut x2 = lo + R * (hi - lo);
    let (mut f1, mut f2) = (view.cost_at(x1), view.cost_at(x2));
    for _ in 0..24 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - R * (hi - lo);
            f1 = view.cost_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + R * (hi - lo);
            f2 = view.cost_at(x2);
        }
    }
    let (x, f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if f < at_centre {
        (x, f)
    } else {
        (centre, at_centre)
    }
}

fn rotate_columns(z: &mut [f64], n: usize, k: usize, a: usize, b: usize, phi: f64) {
    let (s, c) = phi.sin_cos();
    for i in 0..n {
        let (za, zb) = (z[i * k + a], z[i * k + b]);
        z[i * k + a] = c * za - s * zb;
        z[i * k + b] = s * za + c * zb;
    }
}

/// Minimizes J over rotations of the K columns of `v` (row-major N×K).
///
/// Each sweep visits every column pair once. A pair takes a gradient step
/// on J/N with backtracking; separately, a coarse grid of angles over one
/// period of the pair cost is probed and its best angle refined by golden
/// section. Whichever lowers J most is applied. Starts from
/// the identity rotation, so the result is deterministic.
pub fn alignment_cost(v: &[f64], n: usize, k: usize, settings: &RotationSettings) -> Alignment {
    assert_eq!(v.len(), n * k, "matrix shape");
    let mut z = v.to_vec();
    let initial_cost = cost(&z, n, k);
    let mut current = initial_cost;
    // Rotations preserve row norms.
    let norms = row_norms(&z, n, k);
    let floor = zero_floor(&norms);
    let scale = 1.0 / n.max(1) as f64;
    let mut converged = k < 2 || n == 0;
    let mut sweeps = 0;
    while !converged && sweeps < settings.max_sweeps {
        sweeps += 1;
        let before = current;
        for a in 0..k {
            for b in a + 1..k {
                let view = PairView::new(&z, &norms, floor, k, a, b);
                let base = view.cost_at(0.0);
                let (mut best_phi, mut best) = (0.0, base);
                let g = view.gradient() * scale;
                if g != 0.0 {
                    let mut phi = (-settings.step * g).clamp(-FRAC_PI_4, FRAC_PI_4);
                    for _ in 0..30 {
                        let j = view.cost_at(phi);
                        if j < best {
                            best = j;
                            best_phi = phi;
                            break;
                        }
                        phi *= 0.5;
                    }
                }
                let mut probe_phi = 0.0;
                let mut probe_best = base;
                for p in 1..=settings.probes {
                    let phi = -FRAC_PI_4 + 2.0 * FRAC_PI_4 * p as f64 / settings.probes as f64;
                    let j = view.cost_at(phi);
                    if j < probe_best {
                        probe_best = j;
                        probe_phi = phi;
                    }
                }
                let (phi, j) = golden_refine(&view, probe_phi, FRAC_PI_4 / settings.probes as f64 * 2.0, probe_best);
                if j < best {
                    best_phi = phi;
                }
                if best_phi != 0.0 {
                    rotate_columns(&mut z, n, k, a, b, best_phi);
                }
            }
        }
        current = cost(&z, n, k);
        if (before - current) * scale < settings.tolerance {
            converged = true;
        }
    }
    let assignments = (0..n)
        .map(|i| {
            let row = &z[i * k..(i + 1) * k];
            let m = row_max(&z, k, i);
            row.iter().position(|x| x.abs() == m).unwrap_or(0)
        })
        .collect();
    Alignment { cost: current, initial_cost, z, assignments, converged, sweeps }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indicator(n: usize, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; n * k];
        for i in 0..n {
            v[i * k + i % k] = 1.0 + (i % 7) as f64 * 0.1;
        }
        v
    }

    #[test]
    fn indicator_is_already_optimal() {
        let v = indicator(30, 4);
        let a = alignment_cost(&v, 30, 4, &RotationSettings::default());
        assert_eq!(a.initial_cost, 30.0);
        assert_eq!(a.cost, 30.0);
        assert_eq!(a.z, v);
    }

    #[test]
    fn forty_five_degrees_in_two_columns() {
        let n = 20;
        let v: Vec<f64> = (0..n).flat_map(|i| if i % 2 == 0 { [1.0, 1.0] } else { [1.0, -1.0] }).collect();
        let a = alignment_cost(&v, n, 2, &RotationSettings::default());
        assert!((a.initial_cost - 2.0 * n as f64).abs() < 1e-12);
        assert!((a.cost - n as f64).abs() < 1e-9, "{}", a.cost);
        for i in 0..n {
            assert_eq!(a.assignments[i], a.assignments[i % 2]);
        }
        assert_ne!(a.assignments[0], a.assignments[1]);
    }

    #[test]
    fn zero_rows_cost_k() {
        let v = vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        assert_eq!(cost(&v, 3, 2), 4.0);
        let a = alignment_cost(&v, 3, 2, &RotationSettings::default());
        assert_eq!(a.cost, 4.0);
    }

    #[test]
    fn cost_is_at_least_row_count() {
        let v: Vec<f64> = (0..60).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let a = alignment_cost(&v, 20, 3, &RotationSettings::default());
        assert!(a.cost >= 20.0 - 1e-12 && a.cost <= a.initial_cost);
    }
}
