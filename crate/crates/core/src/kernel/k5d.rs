//! `.k5d` kernel-bank files.
//!
//! Little-endian: magic `K5D1`; header `u32` version, n_x, n_y, n_theta, n_κ,
//! `f64` κ_min, Δκ, Δs, `u32` H, `u64` n, `f64` σ_κ_diff, `u64` seed; then n_κ
//! grids of `f64` in x-fastest order; then a CRC32 of everything before it.
//! Spill counts are not stored; they are recovered from each grid's mass.

use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::sim::{GridDims, KappaLattice, KernelBank, KernelGrid, PathParams};

const MAGIC: &[u8; 4] = b"K5D1";
pub const VERSION: u32 = 1;
const HEADER: usize = 4 + 5 * 4 + 3 * 8 + 4 + 8 + 8 + 8;

pub fn encode(bank: &KernelBank) -> Vec<u8> {
    let d = bank.dims;
    let mut out = Vec::with_capacity(HEADER + bank.grids.len() * d.cells() * 8 + 4);
    out.extend_from_slice(MAGIC);
    for v in [VERSION, d.nx as u32, d.ny as u32, d.n_theta as u32, bank.lattice.count as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [bank.lattice.min, bank.lattice.step, bank.params.step] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(bank.params.steps as u32).to_le_bytes());
    out.extend_from_slice(&(bank.params.paths as u64).to_le_bytes());
    out.extend_from_slice(&bank.params.sigma_kappa_diff.to_le_bytes());
    out.extend_from_slice(&bank.params.seed.to_le_bytes());
    for g in &bank.grids {
        for v in &g.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let v = self.b[self.pos..self.pos + N].try_into().unwrap();
        self.pos += N;
        v
    }
    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }
    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take())
    }
    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
}

pub fn decode(bytes: &[u8]) -> Result<KernelBank> {
    if bytes.len() < HEADER + 4 || &bytes[..4] != MAGIC {
        return Err(Error::format("k5d", "missing K5D1 header"));
    }
    let body = &bytes[..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    if crc32fast::hash(body) != stored {
        return Err(Error::format("k5d", "CRC32 mismatch"));
    }
    let mut r = Reader { b: body, pos: 4 };
    let version = r.u32();
    if version != VERSION {
        return Err(Error::format("k5d", format!("unsupported version {version}")));
    }
    let (nx, ny, n_theta, n_kappa) = (r.u32() as usize, r.u32() as usize, r.u32() as usize, r.u32() as usize);
    let (kappa_min, kappa_step, step) = (r.f64(), r.f64(), r.f64());
    let steps = r.u32() as usize;
    let paths = r.u64() as usize;
    let sigma = r.f64();
    let seed = r.u64();
    let dims = GridDims { nx, ny, n_theta };
    let params = PathParams { step, steps, paths, sigma_kappa_diff: sigma, seed };
    dims.validate().map_err(|e| Error::format("k5d", e.to_string()))?;
    params.validate().map_err(|e| Error::format("k5d", e.to_string()))?;
    if n_kappa == 0 || !(kappa_step > 0.0) || !kappa_min.is_finite() {
        return Err(Error::format("k5d", "bad curvature lattice"));
    }
    let expected = HEADER + n_kappa * dims.cells() * 8;
    if body.len() != expected {
        return Err(Error::format("k5d", format!("{} payload bytes, expected {expected}", body.len())));
    }
    let lattice = KappaLattice { min: kappa_min, step: kappa_step, count: n_kappa };
    let total = (paths * steps) as u64;
    let mut grids = Vec::with_capacity(n_kappa);
    for i in 0..n_kappa {
        let values: Vec<f64> = (0..dims.cells()).map(|_| r.f64()).collect();
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::format("k5d", format!("slice {i} has a negative or non-finite cell")));
        }
        let mass: f64 = values.iter().sum();
        let spill = (total as f64 * (1.0 - mass)).round().max(0.0) as u64;
        grids.push(KernelGrid { kappa0: lattice.value(i), dims, values, spill, total });
    }
    Ok(KernelBank { lattice, params, dims, grids })
}

pub fn write(path: &Path, bank: &KernelBank) -> Result<()> {
    std::fs::write(path, encode(bank)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<KernelBank> {
    decode(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::sim::build_bank;

    fn small_bank() -> KernelBank {
        let p = PathParams { step: 1.0, steps: 6, paths: 500, sigma_kappa_diff: 0.02, seed: 4 };
        let dims = GridDims { nx: 9, ny: 9, n_theta: 6 };
        build_bank(KappaLattice::new(-0.1, 0.1, 0.05).unwrap(), dims, &p).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let bank = small_bank();
        let bytes = encode(&bank);
        let back = decode(&bytes).unwrap();
        assert_eq!(back, bank);
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn detects_corruption() {
        let mut bytes = encode(&small_bank());
        let mid = bytes.len() / 2;
        bytes[mid] ^= 1;
        assert!(matches!(decode(&bytes), Err(Error::Format { .. })));
        assert!(decode(&bytes[..10]).is_err());
    }
}
