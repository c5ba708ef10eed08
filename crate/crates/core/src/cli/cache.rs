//! Kernel banks cached on disk under the SHA-256 of their parameters.

use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernel::{build_bank, k5d, GridDims, KappaLattice, KernelBank, PathParams};

/// Hex digest over the format version and every value that determines the bank.
pub fn bank_key(lattice: &KappaLattice, dims: &GridDims, params: &PathParams) -> String {
    let mut h = Sha256::new();
    h.update(b"grouping5d-bank");
    h.update(k5d::VERSION.to_le_bytes());
    for v in [dims.nx, dims.ny, dims.n_theta, lattice.count, params.steps, params.paths] {
        h.update((v as u64).to_le_bytes());
    }
    for v in [lattice.min, lattice.step, params.step, params.sigma_kappa_diff] {
        h.update(v.to_bits().to_le_bytes());
    }
    h.update(params.seed.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.k5d"))
}

/// Loads the cached bank or builds and stores it. Returns the bank and
/// whether it came from the cache. A corrupt cache entry is rebuilt.
pub fn cached_bank(
    dir: &Path,
    lattice: KappaLattice,
    dims: GridDims,
    params: &PathParams,
) -> Result<(KernelBank, bool)> {
    let path = cache_path(dir, &bank_key(&lattice, &dims, params));
    if path.exists() {
        if let Ok(bank) = k5d::read(&path) {
            if bank.lattice == lattice && bank.dims == dims && bank.params == *params {
                return Ok((bank, true));
            }
        }
    }
    let bank = build_bank(lattice, dims, params)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::param("cache_dir", format!("{}: {e}", dir.display())))?;
    super::write_atomic(&path, &k5d::encode(&bank))?;
    Ok((bank, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_tracks_every_parameter() {
        let l = KappaLattice::default();
        let p = PathParams { paths: 100, ..PathParams::default() };
        let d = GridDims::for_paths(&p, 18);
        let k = bank_key(&l, &d, &p);
        assert_eq!(k.len(), 64);
        assert_eq!(k, bank_key(&l, &d, &p));
        assert_ne!(k, bank_key(&l, &d, &PathParams { seed: 2, ..p }));
        assert_ne!(k, bank_key(&l, &d, &PathParams { sigma_kappa_diff: 0.002, ..p }));
        assert_ne!(k, bank_key(&KappaLattice { step: 0.01, ..l }, &d, &p));
        assert_ne!(k, bank_key(&l, &GridDims { n_theta: 16, ..d }, &p));
    }

    #[test]
    fn second_request_hits_the_cache() {
        let dir = tempfile::tempdir().unwrap();
        let l = KappaLattice::new(0.0, 0.05, 0.05).unwrap();
        let p = PathParams { paths: 200, steps: 5, ..PathParams::default() };
        let d = GridDims::for_paths(&p, 8);
        let (a, hit_a) = cached_bank(dir.path(), l, d, &p).unwrap();
        let (b, hit_b) = cached_bank(dir.path(), l, d, &p).unwrap();
        assert!(!hit_a && hit_b);
        assert_eq!(a, b);
        std::fs::write(cache_path(dir.path(), &bank_key(&l, &d, &p)), b"junk").unwrap();
        let (c, hit_c) = cached_bank(dir.path(), l, d, &p).unwrap();
        assert!(!hit_c);
        assert_eq!(a, c);
    }
}
