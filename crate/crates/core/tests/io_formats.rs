//! Byte-level checks of the on-disk formats against hand-assembled files.

use std::collections::BTreeMap;

use grouping5d::eval::{ClassMap, UnitMap};
use grouping5d::kernel::{build_bank, k5d, GridDims, KappaLattice, PathParams};
use grouping5d::liftspace::wavelet::bin_theta;
use grouping5d::liftspace::{l5d, netpbm, LiftedFeatureMap, LiftedPoint};

fn le_u32(v: u32) -> [u8; 4] {
    v.to_le_bytes()
}

/// An `.l5d` file written field by field, independent of the encoder.
fn handmade_l5d(width: u32, height: u32, n_theta: u32, pts: &[(u16, u16, u16, f64, f64)]) -> Vec<u8> {
    let mut b = b"L5D1".to_vec();
    for v in [width, height, n_theta, pts.len() as u32] {
        b.extend(le_u32(v));
    }
    for &(x, y, t, f, k) in pts {
        b.extend(x.to_le_bytes());
        b.extend(y.to_le_bytes());
        b.extend(t.to_le_bytes());
        b.extend(f.to_le_bytes());
        b.extend(k.to_le_bytes());
    }
    b
}

#[test]
fn l5d_matches_the_documented_layout() {
    let pts = [(3u16, 4u16, 0u16, 0.25, -0.03), (10, 2, 7, 1.0, 0.1), (0, 0, 17, 0.0, 0.0)];
    let bytes = handmade_l5d(20, 8, 18, &pts);
    assert_eq!(bytes.len(), 20 + 3 * 22);
    let map = l5d::decode(&bytes).unwrap();
    assert_eq!((map.width, map.height, map.n_theta, map.len()), (20, 8, 18, 3));
    for (p, &(x, y, t, f, k)) in map.points.iter().zip(&pts) {
        assert_eq!((p.x, p.y, p.theta_bin, p.f, p.kappa), (x, y, t, f, k));
        assert_eq!(p.theta, bin_theta(18, t as usize));
    }
    assert_eq!(l5d::encode(&map), bytes);
}

#[test]
fn l5d_rejects_broken_files() {
    let good = handmade_l5d(20, 8, 18, &[(3, 4, 0, 0.5, 0.0), (4, 4, 1, 0.5, 0.0)]);
    assert!(l5d::decode(&good).is_ok());
    let bad: Vec<(&str, Vec<u8>)> = vec![
        ("magic", [b"L5D2", &good[4..]].concat()),
        ("truncated", good[..good.len() - 1].to_vec()),
        ("trailing", [&good[..], &[0u8][..]].concat()),
        ("x outside", handmade_l5d(20, 8, 18, &[(20, 4, 0, 0.5, 0.0)])),
        ("bin outside", handmade_l5d(20, 8, 18, &[(1, 4, 18, 0.5, 0.0)])),
        ("f above 1", handmade_l5d(20, 8, 18, &[(1, 4, 0, 1.5, 0.0)])),
        ("nan kappa", handmade_l5d(20, 8, 18, &[(1, 4, 0, 0.5, f64::NAN)])),
        ("duplicate", handmade_l5d(20, 8, 18, &[(1, 4, 0, 0.5, 0.0), (1, 4, 3, 0.2, 0.0)])),
        ("one orientation", handmade_l5d(20, 8, 1, &[])),
    ];
    for (what, bytes) in bad {
        assert!(l5d::decode(&bytes).is_err(), "{what}");
    }
}

#[test]
fn l5d_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.l5d");
    let points = (0..40u16)
        .map(|i| LiftedPoint {
            x: i % 9,
            y: i / 9,
            theta_bin: i % 12,
            theta: bin_theta(12, (i % 12) as usize),
            f: i as f64 / 40.0,
            kappa: (i as f64 - 20.0) * 1e-3,
        })
        .collect();
    let map = LiftedFeatureMap { width: 9, height: 5, n_theta: 12, points };
    l5d::write(&path, &map).unwrap();
    assert_eq!(l5d::read(&path).unwrap(), map);
}

fn small_bank() -> grouping5d::kernel::KernelBank {
    let p = PathParams { step: 1.0, steps: 6, paths: 300, sigma_kappa_diff: 0.01, seed: 11 };
    build_bank(KappaLattice::new(-0.1, 0.1, 0.1).unwrap(), GridDims::for_paths(&p, 6), &p).unwrap()
}

#[test]
fn k5d_header_fields_sit_where_documented() {
    let bank = small_bank();
    let b = k5d::encode(&bank);
    let u32_at = |i: usize| u32::from_le_bytes(b[i..i + 4].try_into().unwrap());
    let f64_at = |i: usize| f64::from_le_bytes(b[i..i + 8].try_into().unwrap());
    let u64_at = |i: usize| u64::from_le_bytes(b[i..i + 8].try_into().unwrap());
    assert_eq!(&b[..4], b"K5D1");
    assert_eq!([u32_at(4), u32_at(8), u32_at(12), u32_at(16), u32_at(20)], [1, 13, 13, 6, 3]);
    assert_eq!([f64_at(24), f64_at(32), f64_at(40)], [-0.1, 0.1, 1.0]);
    assert_eq!(u32_at(48), 6);
    assert_eq!(u64_at(52), 300);
    assert_eq!(f64_at(60), 0.01);
    assert_eq!(u64_at(68), 11);
    let cells = 13 * 13 * 6;
    assert_eq!(b.len(), 76 + 3 * cells * 8 + 4);
    // First payload value is slice 0, cell (0, 0, 0).
    assert_eq!(f64_at(76), bank.grids[0].values[0]);
    assert_eq!(u32_at(b.len() - 4), crc32fast::hash(&b[..b.len() - 4]));
}

#[test]
fn k5d_round_trip_recovers_spill() {
    // A grid narrower than the paths' reach, so some deposits spill.
    let p = PathParams { step: 1.0, steps: 6, paths: 300, sigma_kappa_diff: 0.01, seed: 11 };
    let bank =
        build_bank(KappaLattice::new(-0.1, 0.1, 0.1).unwrap(), GridDims { nx: 7, ny: 7, n_theta: 6 }, &p).unwrap();
    let back = k5d::decode(&k5d::encode(&bank)).unwrap();
    assert_eq!(back, bank);
    for g in &back.grids {
        // Spill is not stored: deposits plus spill must still be n·H exactly.
        let deposits: u64 = g.values.iter().map(|v| (v * g.total as f64).round() as u64).sum();
        assert_eq!(deposits + g.spill, g.total);
        assert!(g.spill > 0);
    }
}

#[test]
fn k5d_detects_corruption() {
    let b = k5d::encode(&small_bank());
    for i in [0, 5, 30, 100, b.len() - 1] {
        let mut c = b.clone();
        c[i] ^= 0x40;
        assert!(k5d::decode(&c).is_err(), "flip at byte {i}");
    }
    assert!(k5d::decode(&b[..b.len() - 8]).is_err());
}

#[test]
fn netpbm_reads_comments_and_wide_samples() {
    let mut p5 = b"P5\n# a comment\n3 2 # trailing\n65535\n".to_vec();
    for v in [0u16, 1, 256, 65535, 1000, 7] {
        p5.extend(v.to_be_bytes());
    }
    let img = netpbm::decode(&p5).unwrap();
    assert_eq!((img.width, img.height, img.channels, img.maxval), (3, 2, 1, 65535));
    assert_eq!(img.samples, vec![0, 1, 256, 65535, 1000, 7]);
    // Re-encoding drops the comments but keeps the samples.
    assert_eq!(netpbm::decode(&netpbm::encode(&img)).unwrap(), img);

    let p6 = [b"P6 2 1 255\n".to_vec(), vec![10, 20, 30, 40, 50, 60]].concat();
    let rgb = netpbm::decode(&p6).unwrap();
    assert_eq!(rgb.channel(1).data, vec![20.0 / 255.0, 50.0 / 255.0]);
    assert_eq!(netpbm::encode(&rgb), b"P6\n2 1\n255\n\x0a\x14\x1e\x28\x32\x3c".to_vec());
}

#[test]
fn netpbm_rejects_broken_files() {
    for bytes in [
        b"P2\n1 1\n255\n\x00".to_vec(),
        b"P5\n0 1\n255\n".to_vec(),
        b"P5\n2 2\n255\n\x00\x00\x00".to_vec(),
        b"P5\n1 1\n100\n\xff".to_vec(),
        b"P5\n1 1\n70000\n\x00\x00".to_vec(),
    ] {
        assert!(netpbm::decode(&bytes).is_err(), "{:?}", String::from_utf8_lossy(&bytes));
    }
}

#[test]
fn label_image_and_class_map_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("av.pgm");
    let classes = dir.path().join("classes.json");
    #[rustfmt::skip]
    let codes: Vec<u16> = vec![
        1, 1, 0, 2,
        0, 0, 0, 2,
        1, 0, 0, 0,
    ];
    netpbm::write(&labels, &netpbm::Pnm { width: 4, height: 3, channels: 1, maxval: 255, samples: codes }).unwrap();
    std::fs::write(&classes, r#"{"classes": {"artery": [1], "vein": [2]}}"#).unwrap();
    let map = UnitMap::read(&labels, &classes).unwrap();
    // The lone artery pixel at (0, 2) does not touch the first artery.
    assert_eq!(map.units, vec![1, 1, 0, 2, 0, 0, 0, 2, 3, 0, 0, 0]);
    assert_eq!(map.unit_class, BTreeMap::from([(1, "artery".into()), (2, "vein".into()), (3, "artery".into())]));
    let pt = |x, y| LiftedPoint { x, y, theta_bin: 0, theta: 0.0, f: 0.5, kappa: 0.0 };
    assert_eq!(map.labels_for(&[pt(1, 0), pt(3, 1), pt(2, 2)]).unwrap(), vec![vec![1], vec![2], vec![]]);

    std::fs::write(&classes, r#"{"classes": {"artery": [1], "vein": [1]}}"#).unwrap();
    assert!(ClassMap::read(&classes).is_err());
}
