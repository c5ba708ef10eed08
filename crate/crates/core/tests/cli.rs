//! End-to-end runs of the `grouping5d` binary.

use std::path::Path;
use std::process::{Command, Output};

use grouping5d::cli::RunConfig;
use grouping5d::cluster::ClusterResult;
use grouping5d::eval::PartitionMatch;
use grouping5d::kernel::k5d;
use grouping5d::liftspace::{crop_patch, l5d, netpbm};

/// Small but complete bank settings shared by the tests below.
const FAST: [&str; 4] = ["--paths", "3000", "--seed", "5"];

fn grouping5d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grouping5d")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) {
    let o = grouping5d(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
}

fn fails(args: &[&str]) -> (i32, String) {
    let o = grouping5d(args);
    assert!(!o.status.success(), "{args:?} should fail");
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn kernel_flags_give_a_nine_slice_bank() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bank.k5d");
    ok(&[
        "kernel",
        "--kappa-min",
        "-0.2",
        "--kappa-max",
        "0.2",
        "--kappa-step",
        "0.05",
        "--paths",
        "2000",
        "--sigma-kappa-diff",
        "0.001",
        "--seed",
        "1",
        "--out",
        s(&out),
    ]);
    let bank = k5d::read(&out).unwrap();
    assert_eq!(bank.grids.len(), 9);
    assert_eq!((bank.dims.nx, bank.dims.ny, bank.dims.n_theta), (35, 35, 18));
    let cfg = RunConfig::read(&dir.path().join("bank.run_config.json")).unwrap();
    assert_eq!(cfg.subcommand, "kernel");
    assert_eq!(cfg.params.paths, 2000);
    assert_eq!(cfg.outputs["out"], out);
}

#[test]
fn run_config_reproduces_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.k5d");
    ok(&["kernel", "--paths", "500", "--steps", "6", "--seed", "3", "--out", s(&a)]);
    let cfg = dir.path().join("a.run_config.json");
    let original = std::fs::read(&a).unwrap();

    // Replaying the config alone rewrites the same artifact.
    std::fs::remove_file(&a).unwrap();
    ok(&["kernel", "--config", s(&cfg)]);
    assert_eq!(std::fs::read(&a).unwrap(), original);

    // Same config, a different output: identical bank.
    let b = dir.path().join("b.k5d");
    ok(&["kernel", "--config", s(&cfg), "--out", s(&b)]);
    assert_eq!(std::fs::read(&b).unwrap(), original);

    // A flag wins over the file and is recorded.
    let c = dir.path().join("c.k5d");
    ok(&["kernel", "--config", s(&cfg), "--seed", "4", "--out", s(&c)]);
    assert_ne!(std::fs::read(&c).unwrap(), original);
    let written = RunConfig::read(&dir.path().join("c.run_config.json")).unwrap();
    assert_eq!((written.params.seed, written.params.paths, written.params.steps()), (4, 500, 6));
}

#[test]
fn diagnostics_name_the_offending_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.k5d");
    let missing = dir.path().join("nope.l5d");
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["kernel", "--sigma-int", "-1", "--out", s(&out)], "`sigma_int`"),
        (vec!["kernel", "--paths", "0", "--out", s(&out)], "`paths`"),
        (vec!["kernel", "--kappa-min", "0.3", "--kappa-max", "0.1", "--out", s(&out)], "`kappa_range`"),
        (vec!["kernel"], "`out`"),
        (vec!["cluster", "--patch", s(&missing), "--bank", s(&out), "--out", s(&out)], "`patch`"),
        (vec!["phantom", "--category", "Z9", "--out-dir", s(dir.path())], "`category`"),
        (vec!["render", "--patch", s(&missing), "--out", s(&out)], "`mode`"),
    ];
    for (args, name) in cases {
        let (code, err) = fails(&args);
        assert_eq!(code, 1, "{args:?}");
        assert!(err.contains(name), "{args:?}: {err}");
        assert!(err.starts_with("grouping5d: error: invalid parameter"), "{err}");
    }
    // Nothing was written by any failed run.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    let (code, _) = fails(&["kernel", "--paths", "lots"]);
    assert_eq!(code, 2);
}

#[test]
fn corrupt_bank_is_blamed_on_the_bank_flag() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["phantom", "--three-circles", "--out-dir", s(dir.path())]);
    let bank = dir.path().join("bank.k5d");
    std::fs::write(&bank, b"not a bank").unwrap();
    let out = dir.path().join("r.json");
    let truth = dir.path().join("truth.l5d");
    let (code, err) = fails(&["cluster", "--patch", s(&truth), "--bank", s(&bank), "--out", s(&out)]);
    assert_eq!(code, 1);
    assert!(err.contains("`bank`"), "{err}");
    assert!(!out.exists());
}

#[test]
fn pipeline_matches_the_individual_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ph = d.join("phantom");
    ok(&["phantom", "--three-circles", "--out-dir", s(&ph)]);
    let bank = d.join("bank.k5d");
    ok(&[&["kernel", "--out", s(&bank)][..], &FAST].concat());

    // Upper crossing of the first two circles; a small patch keeps this quick.
    let truth = ph.join("truth.l5d");
    let labels = ph.join("truth_labels.json");
    let centre = "102,51";
    let half = ["--half-size", "12"];
    let result = d.join("cluster.json");
    ok(&[&["cluster", "--patch", s(&truth), "--bank", s(&bank), "--center", centre, "--out", s(&result)][..], &half]
        .concat());
    let piped = d.join("pipe");
    ok(&[
        &[
            "pipeline",
            "--patch",
            s(&truth),
            "--bank",
            s(&bank),
            "--center",
            centre,
            "--truth",
            s(&labels),
            "--out-dir",
            s(&piped),
        ][..],
        &half,
    ]
    .concat());

    assert_eq!(std::fs::read(&result).unwrap(), std::fs::read(piped.join("result.json")).unwrap());

    let full = l5d::read(&truth).unwrap();
    let patch = l5d::read(&piped.join("patch.l5d")).unwrap();
    assert_eq!(patch, crop_patch(&full, (102, 51), 12).unwrap().map);

    for mode in ["clusters", "orientation", "curvature"] {
        let img = d.join(format!("{mode}.ppm"));
        ok(&[
            "render",
            "--mode",
            mode,
            "--patch",
            s(&piped.join("patch.l5d")),
            "--result",
            s(&result),
            "--out",
            s(&img),
        ]);
        assert_eq!(std::fs::read(&img).unwrap(), std::fs::read(piped.join(format!("{mode}.ppm"))).unwrap(), "{mode}");
    }

    // The eval subcommand on the cropped labels agrees with the pipeline's match.
    let m: PartitionMatch = serde_json::from_slice(&std::fs::read(piped.join("match.json")).unwrap()).unwrap();
    let r: ClusterResult = serde_json::from_slice(&std::fs::read(&result).unwrap()).unwrap();
    assert_eq!(r.labels.len(), patch.len());
    assert_eq!(m.units.len(), 2);
    for f in ["timings.json", "run_config.json"] {
        assert!(piped.join(f).is_file(), "{f}");
    }
    let cfg = RunConfig::read(&piped.join("run_config.json")).unwrap();
    assert_eq!(cfg.params.half_size, 12);
    assert_eq!(cfg.options["center"], centre);
}

#[test]
fn eval_scores_a_result_against_truth() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Perfect prediction for a two-unit truth with one crossing point.
    let truth = d.join("truth.json");
    std::fs::write(&truth, "[[1],[1],[1],[1],[1],[1,2],[2],[2],[2],[2],[2]]").unwrap();
    let result = ClusterResult {
        labels: vec![2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1],
        k: 2,
        q_clust: 1.0,
        noise: vec![],
        costs: Default::default(),
        selected_k: 2,
        n_active: 11,
        unconverged: vec![],
    };
    let rpath = d.join("result.json");
    std::fs::write(&rpath, serde_json::to_vec(&result).unwrap()).unwrap();
    let out = d.join("match.json");
    ok(&["eval", "--result", s(&rpath), "--truth", s(&truth), "--out", s(&out)]);
    let m: PartitionMatch = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(m.correct);
    assert!(m.units.iter().all(|u| u.jaccard == 1.0));
    let (code, err) = fails(&["eval", "--result", s(&rpath), "--suite", "--out", s(&out)]);
    assert_eq!(code, 1);
    assert!(err.contains("exactly one"), "{err}");
}

#[test]
fn render_kernel_mode_writes_a_greymap() {
    let dir = tempfile::tempdir().unwrap();
    let bank = dir.path().join("bank.k5d");
    ok(&["kernel", "--paths", "800", "--steps", "9", "--out", s(&bank)]);
    let img = dir.path().join("k.pgm");
    ok(&["render", "--mode", "kernel", "--bank", s(&bank), "--kappa", "-0.05", "--out", s(&img)]);
    let pnm = netpbm::read(&img).unwrap();
    assert_eq!((pnm.width, pnm.height, pnm.channels), (19, 19, 1));
    assert_eq!(pnm.samples.iter().max(), Some(&255));
}

#[test]
fn phantom_writes_its_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["phantom", "--category", "b1", "--seed", "7", "--out-dir", s(dir.path())]);
    for f in ["stimulus.pgm", "mask.pgm", "truth.l5d", "truth_labels.json", "spec.json", "run_config.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let truth = grouping5d::cli::read_phantom_truth(dir.path()).unwrap();
    let mask = netpbm::read(&dir.path().join("mask.pgm")).unwrap().to_mask();
    assert_eq!(truth.map.len(), mask.count());
}

#[test]
fn dataset_batch_from_a_manifest() {
    use grouping5d::eval::CaseOutcome;
    use grouping5d::phantom::{generate, Category, PhantomSpec};

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // A crossing phantom posing as a retinal image: unit 1 an artery, unit 2 a vein.
    let case = generate(&PhantomSpec::for_category(Category::A, 2)).unwrap();
    netpbm::write(&d.join("img.pgm"), &netpbm::Pnm::from_image(&case.image, 255)).unwrap();
    netpbm::write(&d.join("mask.pgm"), &netpbm::Pnm::from_mask(&case.mask())).unwrap();
    let mut codes = vec![0u16; case.image.width * case.image.height];
    let (mut sx, mut sy, mut n) = (0, 0, 0);
    for px in &case.pixels {
        let nearest = px.hits.iter().min_by(|a, b| a.dist.total_cmp(&b.dist)).unwrap();
        codes[px.y as usize * case.image.width + px.x as usize] = nearest.unit as u16;
        if px.labels().len() > 1 {
            (sx, sy, n) = (sx + px.x as usize, sy + px.y as usize, n + 1);
        }
    }
    let crossing = (sx / n, sy / n);
    let labels =
        netpbm::Pnm { width: case.image.width, height: case.image.height, channels: 1, maxval: 255, samples: codes };
    netpbm::write(&d.join("av.pgm"), &labels).unwrap();
    std::fs::write(d.join("classes.json"), r#"{"classes": {"artery": [1], "vein": [2]}}"#).unwrap();
    let manifest = serde_json::json!({
        "classes": "classes.json",
        "images": [
            {"id": "given", "image": "img.pgm", "mask": "mask.pgm", "labels": "av.pgm",
             "junctions": [{"x": crossing.0, "y": crossing.1, "category": "crossing"}]},
            {"id": "found", "image": "img.pgm", "mask": "mask.pgm", "labels": "av.pgm"}
        ]
    });
    std::fs::write(d.join("manifest.json"), manifest.to_string()).unwrap();

    let out = d.join("out");
    ok(&[&["eval", "--dataset", s(&d.join("manifest.json")), "--half-size", "20", "--out-dir", s(&out)][..], &FAST]
        .concat());
    let outcomes: Vec<CaseOutcome> =
        serde_json::from_slice(&std::fs::read(out.join("outcomes.json")).unwrap()).unwrap();
    assert_eq!(outcomes[0].id, "given-0");
    assert_eq!(outcomes[0].category, "crossing");
    // The skeleton of a single crossing has branch points near its centre.
    assert!(outcomes.iter().any(|o| o.id.starts_with("found-") && o.category == "junction"));
    for o in &outcomes {
        assert!((0.0..=1.0).contains(&o.q_clust) && o.points > 0);
        assert!(out.join(&o.id).join("result.json").is_file() && out.join(&o.id).join("match.json").is_file());
    }
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("crossing") && report.contains("t_kernel"), "{report}");
}
