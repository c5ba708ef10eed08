//! `.l5d` binary lifted maps.
//!
//! Layout, all little-endian: magic `L5D1`; `u32` width, height, n_theta and
//! point count; then per point `u16` x, y, θ-bin followed by `f64` f and κ.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::liftspace::lift::{LiftedFeatureMap, LiftedPoint};
use crate::liftspace::wavelet::bin_theta;

const MAGIC: &[u8; 4] = b"L5D1";
const HEADER: usize = 4 + 4 * 4;
const RECORD: usize = 3 * 2 + 2 * 8;

pub fn encode(map: &LiftedFeatureMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + RECORD * map.len());
    out.extend_from_slice(MAGIC);
    for v in [map.width, map.height, map.n_theta, map.len()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for p in &map.points {
        out.extend_from_slice(&p.x.to_le_bytes());
        out.extend_from_slice(&p.y.to_le_bytes());
        out.extend_from_slice(&p.theta_bin.to_le_bytes());
        out.extend_from_slice(&p.f.to_le_bytes());
        out.extend_from_slice(&p.kappa.to_le_bytes());
    }
    out
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> usize {
    u32::from_le_bytes(b[i..i + 4].try_into().unwrap()) as usize
}

fn f64_at(b: &[u8], i: usize) -> f64 {
    f64::from_le_bytes(b[i..i + 8].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<LiftedFeatureMap> {
    if bytes.len() < HEADER || &bytes[..4] != MAGIC {
        return Err(Error::format("l5d", "missing L5D1 header"));
    }
    let (width, height, n_theta, count) = (u32_at(bytes, 4), u32_at(bytes, 8), u32_at(bytes, 12), u32_at(bytes, 16));
    if width == 0 || height == 0 || n_theta < 2 {
        return Err(Error::format("l5d", format!("bad header {width}x{height}, n_theta {n_theta}")));
    }
    let expected = HEADER + RECORD * count;
    if bytes.len() != expected {
        return Err(Error::format("l5d", format!("{} bytes for {count} points, expected {expected}", bytes.len())));
    }
    let mut seen = HashSet::with_capacity(count);
    let mut points = Vec::with_capacity(count);
    for r in 0..count {
        let o = HEADER + r * RECORD;
        let (x, y, bin) = (u16_at(bytes, o), u16_at(bytes, o + 2), u16_at(bytes, o + 4));
        let (f, kappa) = (f64_at(bytes, o + 6), f64_at(bytes, o + 14));
        if x as usize >= width || y as usize >= height || bin as usize >= n_theta {
            return Err(Error::format("l5d", format!("point {r} out of range")));
        }
        if !(0.0..=1.0).contains(&f) || !kappa.is_finite() {
            return Err(Error::format("l5d", format!("point {r} has f = {f}, kappa = {kappa}")));
        }
        if !seen.insert((x, y)) {
            return Err(Error::format("l5d", format!("duplicate point ({x}, {y})")));
        }
        points.push(LiftedPoint { x, y, theta_bin: bin, theta: bin_theta(n_theta, bin as usize), f, kappa });
    }
    Ok(LiftedFeatureMap { width, height, n_theta, points })
}

pub fn write(path: &Path, map: &LiftedFeatureMap) -> Result<()> {
    std::fs::write(path, encode(map)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<LiftedFeatureMap> {
    decode(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LiftedFeatureMap {
        let points = (0..5u16)
            .map(|i| LiftedPoint {
                x: i * 3,
                y: 7 - i,
                theta_bin: i,
                theta: bin_theta(6, i as usize),
                f: i as f64 / 4.0,
                kappa: -0.01 * i as f64,
            })
            .collect();
        LiftedFeatureMap { width: 20, height: 9, n_theta: 6, points }
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample();
        let bytes = encode(&m);
        assert_eq!(bytes.len(), HEADER + 5 * RECORD);
        assert_eq!(decode(&bytes).unwrap(), m);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = encode(&sample());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut dup = bytes.clone();
        dup[HEADER + RECORD..HEADER + RECORD + 4].copy_from_slice(&bytes[HEADER..HEADER + 4]);
        assert!(decode(&dup).is_err());
        let mut oob = bytes;
        oob[HEADER + 4..HEADER + 6].copy_from_slice(&6u16.to_le_bytes());
        assert!(decode(&oob).is_err());
    }
}
