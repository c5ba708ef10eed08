//! Self-tuning spectral clustering.
//!
//! The affinity is normalized as L = D^{−1/2} A D^{−1/2}; for each candidate
//! K the top-K eigenvectors are rotated towards axis alignment, and the K
//! with the flattest (lowest) alignment cost wins. Labels are 1..=K; 0 marks
//! noise (isolated points and groups below the size floor).

pub mod rotation;

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::affinity::AffinityMatrix;
use crate::error::{Error, Result};
pub use rotation::{alignment_cost, Alignment, RotationSettings};

pub const NOISE: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KRule {
    /// Largest K whose J/N is within `tolerance` of the minimum.
    Plateau { tolerance: f64 },
    /// Smallest K attaining the minimum J/N.
    Argmin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralParams {
    /// Largest candidate K.
    pub n_c: usize,
    /// Groups smaller than this become noise; `None` means max(5, ⌈0.01·N⌉).
    pub min_cluster_size: Option<usize>,
    pub k_rule: KRule,
    pub rotation: RotationSettings,
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams {
            n_c: 20,
            min_cluster_size: None,
            k_rule: KRule::Plateau { tolerance: 0.01 },
            rotation: RotationSettings::default(),
        }
    }
}

impl SpectralParams {
    pub fn min_size_for(&self, n: usize) -> usize {
        self.min_cluster_size.unwrap_or_else(|| 5.max((0.01 * n as f64).ceil() as usize))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_c < 2 {
            return Err(Error::param("n_c", format!("must be at least 2, got {}", self.n_c)));
        }
        if self.min_cluster_size == Some(0) {
            return Err(Error::param("min_cluster_size", "must be at least 1"));
        }
        if let KRule::Plateau { tolerance } = self.k_rule {
            if !(tolerance >= 0.0) {
                return Err(Error::param("k_rule", "plateau tolerance must be ≥ 0"));
            }
        }
        Ok(())
    }
}

/// Top eigenpairs of the normalized affinity over the points with nonzero degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Original indices of the rows that took part.
    pub active: Vec<usize>,
    /// Eigenvalues, largest first.
    pub values: Vec<f64>,
    /// Row-major `active.len() × values.len()`; column j belongs to `values[j]`.
    pub vectors: Vec<f64>,
}

/// The `m` largest eigenpairs of L. The matrix is first divided by its
/// largest entry, which L cancels anyway, so the spectrum does not depend
/// on the overall scale of A.
pub fn normalized_spectrum(a: &AffinityMatrix, m: usize) -> Result<Spectrum> {
    let n = a.n;
    let dense = a.to_dense();
    let max = dense.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(Spectrum { active: Vec::new(), values: Vec::new(), vectors: Vec::new() });
    }
    let dense: Vec<f64> = dense.iter().map(|v| v / max).collect();
    let degree: Vec<f64> = (0..n).map(|i| dense[i * n..(i + 1) * n].iter().sum()).collect();
    let active: Vec<usize> = (0..n).filter(|&i| degree[i] > 0.0).collect();
    let na = active.len();
    let inv_sqrt: Vec<f64> = active.iter().map(|&i| 1.0 / degree[i].sqrt()).collect();
    let l = Mat::<f64>::from_fn(na, na, |r, c| dense[active[r] * n + active[c]] * inv_sqrt[r] * inv_sqrt[c]);
    let evd = l
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::InvalidInput(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let m = m.min(na);
    let mut values = Vec::with_capacity(m);
    let mut vectors = vec![0.0; na * m];
    for j in 0..m {
        let src = na - 1 - j;
        values.push(s[src]);
        // Sign convention: the first entry of largest magnitude is positive.
        let mut pivot = 0;
        for r in 0..na {
            if u[(r, src)].abs() > u[(pivot, src)].abs() {
                pivot = r;
            }
        }
        let sign = if u[(pivot, src)] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..na {
            vectors[r * m + j] = sign * u[(r, src)];
        }
    }
    Ok(Spectrum { active, values, vectors })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    /// Per point: group id in 1..=K, or [`NOISE`].
    pub labels: Vec<u32>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "Q_clust")]
    pub q_clust: f64,
    /// Indices of the points labelled noise.
    pub noise: Vec<usize>,
    /// Alignment cost J per candidate K.
    pub costs: BTreeMap<usize, f64>,
    /// K picked by the cost rule, before noise removal.
    pub selected_k: usize,
    /// Active point count N behind the costs.
    pub n_active: usize,
    /// Candidates whose rotation descent hit the sweep limit.
    pub unconverged: Vec<usize>,
}

/// Relabels groups below `min_size` as noise and numbers the rest 1.. in
/// order of their first member.
fn finalize(mut labels: Vec<u32>, min_size: usize) -> (Vec<u32>, usize) {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &l in labels.iter().filter(|&&l| l != NOISE) {
        *counts.entry(l).or_default() += 1;
    }
    let mut rename: BTreeMap<u32, u32> = BTreeMap::new();
    for l in labels.iter_mut() {
        if *l == NOISE {
            continue;
        }
        if counts[l] < min_size {
            *l = NOISE;
            continue;
        }
        let next = rename.len() as u32 + 1;
        *l = *rename.entry(*l).or_insert(next);
    }
    let k = rename.len();
    (labels, k)
}

pub fn select_k_and_cluster(a: &AffinityMatrix, params: &SpectralParams) -> Result<ClusterResult> {
    params.validate()?;
    let n = a.n;
    let min_size = params.min_size_for(n);
    let spectrum = normalized_spectrum(a, params.n_c)?;
    let na = spectrum.active.len();
    // K groups of at least min_size need K·min_size points. Larger K would
    // only be dissolved into noise, and at K = N the rotation is trivially
    // perfect, so such candidates would win the cost rule for nothing.
    let max_k = spectrum.values.len().min(na / min_size);
    let mut labels = vec![NOISE; n];
    let mut costs = BTreeMap::new();
    let mut unconverged = Vec::new();
    let (selected_k, q_clust) = if na == 0 {
        (0, 0.0)
    } else if max_k < 2 {
        for &i in &spectrum.active {
            labels[i] = 1;
        }
        (1, 1.0)
    } else {
        let m = spectrum.values.len();
        let candidates: Vec<(usize, Alignment)> = (2..=max_k)
            .into_par_iter()
            .map(|k| {
                let v: Vec<f64> = (0..na).flat_map(|r| spectrum.vectors[r * m..r * m + k].to_vec()).collect();
                (k, alignment_cost(&v, na, k, &params.rotation))
            })
            .collect();
        for (k, al) in &candidates {
            costs.insert(*k, al.cost);
            if !al.converged {
                unconverged.push(*k);
            }
        }
        let normalized: Vec<f64> = candidates.iter().map(|(_, al)| al.cost / na as f64).collect();
        let best = normalized.iter().cloned().fold(f64::INFINITY, f64::min);
        let pick = match params.k_rule {
            KRule::Plateau { tolerance } => normalized.iter().rposition(|&c| c <= best + tolerance),
            KRule::Argmin => normalized.iter().position(|&c| c == best),
        }
        .expect("at least one candidate");
        let (k, al) = &candidates[pick];
        for (r, &i) in spectrum.active.iter().enumerate() {
            labels[i] = al.assignments[r] as u32 + 1;
        }
        (*k, (2.0 - normalized[pick]).clamp(0.0, 1.0))
    };
    let (labels, k) = finalize(labels, min_size);
    let noise = (0..n).filter(|&i| labels[i] == NOISE).collect();
    Ok(ClusterResult { labels, k, q_clust, noise, costs, selected_k, n_active: na, unconverged })
}
