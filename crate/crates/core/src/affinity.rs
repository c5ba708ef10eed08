//! Pairwise affinities over a lifted patch.
//!
//! Each unordered pair is evaluated once and written to both triangles, so
//! the matrix is bitwise symmetric. The diagonal is zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::{connectivity_weight, KernelBank, KernelWeights};
use crate::liftspace::{LiftedPatch, LiftedPoint};

/// Largest N stored densely; larger matrices keep only entries ≥ 10⁻¹²·max.
pub const DENSE_LIMIT: usize = 4000;
pub const SPARSE_RELATIVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Dense(Vec<f64>),
    /// Compressed rows; column indices ascending within a row.
    Sparse {
        row_start: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    pub n: usize,
    pub storage: Storage,
    /// Point behind each row; empty for matrices built from raw values.
    pub points: Vec<LiftedPoint>,
}

impl AffinityMatrix {
    /// Wraps a row-major matrix after checking symmetry, sign and diagonal.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidInput(format!("{} values for a {n}x{n} matrix", data.len())));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let v = data[i * n + j];
                if !(v.is_finite() && v >= 0.0) || v != data[j * n + i] {
                    return Err(Error::InvalidInput(format!("entry ({i}, {j}) is negative, non-finite or asymmetric")));
                }
            }
        }
        Ok(AffinityMatrix { n, storage: Storage::Dense(data), points: Vec::new() })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d[i * self.n + j],
            Storage::Sparse { row_start, cols, vals } => {
                let (a, b) = (row_start[i], row_start[i + 1]);
                cols[a..b].binary_search(&j).map(|k| vals[a + k]).unwrap_or(0.0)
            }
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Sparse { row_start, cols, vals } => {
                let mut d = vec![0.0; self.n * self.n];
                for i in 0..self.n {
                    for k in row_start[i]..row_start[i + 1] {
                        d[i * self.n + cols[k]] = vals[k];
                    }
                }
                d
            }
        }
    }

    /// Every entry times `c`; symmetry is preserved bitwise.
    pub fn scaled(&self, c: f64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(d) => Storage::Dense(d.iter().map(|v| v * c).collect()),
            Storage::Sparse { row_start, cols, vals } => Storage::Sparse {
                row_start: row_start.clone(),
                cols: cols.clone(),
                vals: vals.iter().map(|v| v * c).collect(),
            },
        };
        AffinityMatrix { n: self.n, storage, points: self.points.clone() }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Raw row-major f64 (little-endian) plus a JSON sidecar with N and the point table.
    pub fn dump(&self, matrix_path: &Path, sidecar_path: &Path) -> Result<()> {
        let bytes: Vec<u8> = self.to_dense().iter().flat_map(|v| v.to_le_bytes()).collect();
        std::fs::write(matrix_path, bytes).map_err(|e| Error::io(matrix_path, e))?;
        let sidecar = Sidecar { n: self.n, points: self.points.clone() };
        let json = serde_json::to_vec_pretty(&sidecar)?;
        std::fs::write(sidecar_path, json).map_err(|e| Error::io(sidecar_path, e))
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    n: usize,
    points: Vec<LiftedPoint>,
}

/// Upper-triangle weights, row by row: `upper[i][j - i - 1] = w(p_i, p_j)`.
fn upper_triangle(points: &[LiftedPoint], bank: &KernelBank, weights: &KernelWeights) -> Vec<Vec<f64>> {
    (0..points.len())
        .into_par_iter()
        .map(|i| points[i + 1..].iter().map(|q| connectivity_weight(&points[i], q, bank, weights)).collect())
        .collect()
}

pub fn build_affinity(patch: &LiftedPatch, bank: &KernelBank, weights: &KernelWeights) -> Result<AffinityMatrix> {
    build_affinity_from_points(&patch.map.points, bank, weights)
}

pub fn build_affinity_from_points(
    points: &[LiftedPoint],
    bank: &KernelBank,
    weights: &KernelWeights,
) -> Result<AffinityMatrix> {
    if points.is_empty() {
        return Err(Error::InvalidInput("cannot build an affinity matrix for an empty patch".into()));
    }
    weights.validate()?;
    let n = points.len();
    let upper = upper_triangle(points, bank, weights);
    let storage = if n <= DENSE_LIMIT {
        let mut d = vec![0.0; n * n];
        for (i, row) in upper.iter().enumerate() {
            for (o, &w) in row.iter().enumerate() {
                let j = i + 1 + o;
                d[i * n + j] = w;
                d[j * n + i] = w;
            }
        }
        Storage::Dense(d)
    } else {
        let max = upper.iter().flatten().cloned().fold(0.0, f64::max);
        let floor = SPARSE_RELATIVE_FLOOR * max;
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in upper.iter().enumerate() {
            for (o, &w) in row.iter().enumerate() {
                if w > 0.0 && w >= floor {
                    let j = i + 1 + o;
                    rows[i].push((j, w));
                    rows[j].push((i, w));
                }
            }
        }
        let mut row_start = vec![0];
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (j, w) in r {
                cols.push(j);
                vals.push(w);
            }
            row_start.push(cols.len());
        }
        Storage::Sparse { row_start, cols, vals }
    };
    Ok(AffinityMatrix { n, storage, points: points.to_vec() })
}
