//! Command-line front end: one subcommand per stage plus `pipeline`.
//!
//! Every run resolves a [`RunConfig`] (defaults, then `--config`, then
//! flags), checks it before touching the disk, and writes it beside its
//! outputs. Files are written through a temporary sibling and renamed, so a
//! failed run leaves no half-written artifact. Timings go to their own file
//! so results stay byte-identical across runs.

pub mod cache;
pub mod config;
pub mod pipeline;
pub mod render;

use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::affinity::build_affinity_from_points;
use crate::cluster::ClusterResult;
use crate::error::{Error, Result};
use crate::eval::{match_partition, CaseOutcome, Report};
use crate::kernel::{k5d, KernelBank};
use crate::liftspace::{crop_patch, fallback_junctions, l5d, lift_image, netpbm, LiftedFeatureMap};
use crate::phantom::{generate, Category, GroundTruth, PhantomSpec};
pub use config::{ParamArgs, Params, RunConfig};
use pipeline::{load_image, run_patch, BankSource, CaseRecord};

#[derive(Debug, Parser)]
#[command(name = "grouping5d", version, about = "Group curvilinear structures with a 5D connectivity kernel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic stimulus with lifted ground truth.
    Phantom(PhantomArgs),
    /// Lift an image and vessel mask to a 5D feature map.
    Lift(LiftArgs),
    /// Simulate a kernel bank over a curvature lattice.
    Kernel(KernelArgs),
    /// Build affinities for a lifted patch and group it.
    Cluster(ClusterArgs),
    /// Score results, summarize outcomes, or run a batch.
    Eval(EvalArgs),
    /// Draw groups, orientations, curvatures or a kernel slice.
    Render(RenderArgs),
    /// Lift (or load) a patch, get a cached bank, cluster and render.
    Pipeline(PipelineArgs),
}

#[derive(Debug, clap::Args)]
pub struct PhantomArgs {
    /// One of A, B, C, D, E, A1, B1, C1, D1, E1.
    #[arg(long)]
    pub category: Option<String>,
    /// The three crossing circles stimulus.
    #[arg(long)]
    pub three_circles: bool,
    /// A phantom specification JSON instead of a generated layout.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, clap::Args)]
pub struct LiftArgs {
    /// P5 or P6 image; colour images use their green and red channels.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// P5 vessel mask; nonzero pixels are lifted.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Skip the local contrast normalization.
    #[arg(long)]
    pub raw: bool,
    /// Keep only the (2·half_size + 1)² window around `x,y`.
    #[arg(long, value_parser = parse_point)]
    pub center: Option<(usize, usize)>,
    /// Also write the skeleton branch points of the mask as JSON.
    #[arg(long)]
    pub junctions_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, clap::Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reuse or fill a bank cache keyed by the parameter hash.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, clap::Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub patch: Option<PathBuf>,
    #[arg(long)]
    pub bank: Option<PathBuf>,
    #[arg(long, value_parser = parse_point)]
    pub center: Option<(usize, usize)>,
    /// Result JSON; timings go beside it as `<stem>.timings.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dense affinity dump (f64 little-endian) with a JSON sidecar.
    #[arg(long)]
    pub affinity_out: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    /// A cluster result to score against `--truth`.
    #[arg(long)]
    pub result: Option<PathBuf>,
    /// Ground-truth label sets per lifted point (JSON list of lists).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Outcome lists (JSON) to merge into one report.
    #[arg(long, num_args = 1..)]
    pub outcomes: Vec<PathBuf>,
    /// Run the ten-category phantom suite.
    #[arg(long)]
    pub suite: bool,
    /// Run a retinal dataset described by a manifest JSON.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Output file for `--result` or `--outcomes`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output directory for `--suite` or `--dataset`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderMode {
    Clusters,
    Orientation,
    Curvature,
    Kernel,
}

#[derive(Debug, clap::Args)]
pub struct RenderArgs {
    #[arg(long, value_enum)]
    pub mode: Option<RenderMode>,
    #[arg(long)]
    pub patch: Option<PathBuf>,
    /// Cluster result; required for `clusters`.
    #[arg(long)]
    pub result: Option<PathBuf>,
    /// Kernel bank; required for `kernel`.
    #[arg(long)]
    pub bank: Option<PathBuf>,
    /// Curvature of the slice drawn in `kernel` mode (nearest lattice value).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub kappa: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, clap::Args)]
pub struct PipelineArgs {
    /// A lifted map (.l5d); alternatively `--image` with `--mask`.
    #[arg(long)]
    pub patch: Option<PathBuf>,
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub raw: bool,
    #[arg(long, value_parser = parse_point)]
    pub center: Option<(usize, usize)>,
    /// A prebuilt bank; otherwise one is taken from the cache.
    #[arg(long)]
    pub bank: Option<PathBuf>,
    #[arg(long, default_value = ".grouping5d-cache")]
    pub cache_dir: PathBuf,
    /// Build the bank without reading or filling the cache.
    #[arg(long)]
    pub no_cache: bool,
    /// Ground-truth label sets; adds `match.json`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

fn parse_point(s: &str) -> std::result::Result<(usize, usize), String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(x)?, p(y)?))
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let name = path.file_name().ok_or_else(|| Error::InvalidInput(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// `dir/stem.suffix` for an output file `dir/stem.ext`.
pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn read_json<T: serde::de::DeserializeOwned>(name: &'static str, path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| Error::param(name, format!("{}: {e}", path.display())))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::param(name, format!("{}: {e}", path.display())))
}

/// Reads an input file, blaming the flag that named it.
fn existing(name: &'static str, path: PathBuf) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::param(name, format!("{} does not exist or is not a file", path.display())))
    }
}

fn read_map(name: &'static str, path: &Path) -> Result<LiftedFeatureMap> {
    l5d::read(path).map_err(|e| Error::param(name, format!("{}: {e}", path.display())))
}

fn read_bank(name: &'static str, path: &Path) -> Result<KernelBank> {
    k5d::read(path).map_err(|e| Error::param(name, format!("{}: {e}", path.display())))
}

/// Parses `argv` (program name first), runs it and returns the exit status:
/// 0 on success, 1 on a failed run, 2 on a usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("grouping5d: error: {e}");
            1
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Phantom(a) => phantom(a),
        Command::Lift(a) => lift(a),
        Command::Kernel(a) => kernel(a),
        Command::Cluster(a) => cluster(a),
        Command::Eval(a) => eval(a),
        Command::Render(a) => render_cmd(a),
        Command::Pipeline(a) => pipeline_cmd(a),
    }
}

fn phantom(a: PhantomArgs) -> Result<()> {
    let mut cfg = RunConfig::resolve("phantom", &a.params)?;
    let out = cfg.output("out_dir", &a.out_dir)?;
    let category = cfg.option("category", a.category);
    let three = cfg.option("three_circles", a.three_circles.then(|| "true".to_string())).is_some();
    let spec_path = cfg.optional_input("spec", &a.spec);
    let spec = match (category, three, spec_path) {
        (Some(c), false, None) => {
            let cat: Category = c.parse().map_err(|e: Error| Error::param("category", e.to_string()))?;
            PhantomSpec::for_category(cat, cfg.params.seed)
        }
        (None, true, None) => PhantomSpec::three_circles(),
        (None, false, Some(p)) => read_json("spec", &existing("spec", p)?)?,
        _ => return Err(Error::param("category", "give exactly one of --category, --three-circles or --spec")),
    };
    let case = generate(&spec)?;
    let truth = case.lifted_truth(cfg.params.n_theta, 1.0)?;
    let mask = case.mask();
    write_atomic(&out.join("stimulus.pgm"), &netpbm::encode(&netpbm::Pnm::from_image(&case.image, 255)))?;
    write_atomic(&out.join("mask.pgm"), &netpbm::encode(&netpbm::Pnm::from_mask(&mask)))?;
    write_atomic(&out.join("truth.l5d"), &l5d::encode(&truth.map))?;
    write_atomic(&out.join("truth_labels.json"), &serde_json::to_vec(&truth.labels)?)?;
    write_atomic(&out.join("spec.json"), &json(&spec)?)?;
    write_atomic(&out.join("run_config.json"), &cfg.to_json()?)
}

fn lift(a: LiftArgs) -> Result<()> {
    let mut cfg = RunConfig::resolve("lift", &a.params)?;
    let image_path = existing("image", cfg.input("image", &a.image)?)?;
    let mask_path = existing("mask", cfg.input("mask", &a.mask)?)?;
    let out = cfg.output("out", &a.out)?;
    let raw = cfg.option("raw", a.raw.then(|| "true".to_string())).is_some();
    let center = cfg.option("center", a.center.map(|(x, y)| format!("{x},{y}")));
    let center = center.map(|c| parse_point(&c).map_err(|e| Error::param("center", e))).transpose()?;
    let junctions_out = a.junctions_out.clone();
    if let Some(j) = &junctions_out {
        cfg.outputs.insert("junctions_out".into(), j.clone());
    }

    let image = load_image(&image_path, !raw)?;
    let mask = netpbm::read(&mask_path)?.to_mask();
    if (mask.width, mask.height) != (image.width, image.height) {
        return Err(Error::param(
            "mask",
            format!("{}x{} mask for a {}x{} image", mask.width, mask.height, image.width, image.height),
        ));
    }
    let mut map = lift_image(&image, &mask, &cfg.params.lift_config())?.lifted;
    if let Some(c) = center {
        map = crop_patch(&map, c, cfg.params.half_size)?.map;
    }
    write_atomic(&out, &l5d::encode(&map))?;
    if let Some(j) = junctions_out {
        write_atomic(&j, &json(&fallback_junctions(&mask))?)?;
    }
    write_atomic(&sidecar(&out, "run_config.json"), &cfg.to_json()?)
}

fn kernel(a: KernelArgs) -> Result<()> {
    let mut cfg = RunConfig::resolve("kernel", &a.params)?;
    let out = cfg.output("out", &a.out)?;
    let cache = cfg.optional_input("cache_dir", &a.cache_dir);
    let (bank, _) = pipeline::timed_bank(&cfg.params, cache.as_deref())?;
    write_atomic(&out, &k5d::encode(&bank))?;
    write_atomic(&sidecar(&out, "run_config.json"), &cfg.to_json()?)
}

fn cluster(a: ClusterArgs) -> Result<()> {
    let mut cfg = RunConfig::resolve("cluster", &a.params)?;
    let patch_path = existing("patch", cfg.input("patch", &a.patch)?)?;
    let bank_path = existing("bank", cfg.input("bank", &a.bank)?)?;
    let out = cfg.output("out", &a.out)?;
    let center = cfg.option("center", a.center.map(|(x, y)| format!("{x},{y}")));
    let center = center.map(|c| parse_point(&c).map_err(|e| Error::param("center", e))).transpose()?;
    if let Some(p) = &a.affinity_out {
        cfg.outputs.insert("affinity_out".into(), p.clone());
    }
    let map = read_map("patch", &patch_path)?;
    let run = run_patch(&map, center, BankSource::File(bank_path.clone()), &cfg.params)
        .map_err(|e| reblame(e, "bank", &bank_path))?;
    write_atomic(&out, &json(&run.result)?)?;
    write_atomic(&sidecar(&out, "timings.json"), &json(&run.timings)?)?;
    if let Some(p) = &a.affinity_out {
        let bank = run.bank.as_ref().expect("file banks are owned");
        let aff = build_affinity_from_points(&run.points, bank, &cfg.params.kernel_weights())?;
        aff.dump(p, &sidecar(p, "json"))?;
    }
    write_atomic(&sidecar(&out, "run_config.json"), &cfg.to_json()?)
}

/// Format errors from reading a bank name the `--bank` flag.
fn reblame(e: Error, name: &'static str, path: &Path) -> Error {
    match e {
        Error::Format { .. } | Error::Io { .. } => Error::param(name, format!("{}: {e}", path.display())),
        other => other,
    }
}

fn eval(a: EvalArgs) -> Result<()> {
    let mut cfg = RunConfig::resolve("eval", &a.params)?;
    let modes = [a.result.is_some(), !a.outcomes.is_empty(), a.suite, a.dataset.is_some()];
    if modes.iter().filter(|m| **m).count() != 1 {
        return Err(Error::param("result", "give exactly one of --result, --outcomes, --suite or --dataset"));
    }
    if let Some(r) = a.result.clone() {
        let result_path = existing("result", cfg.input("result", &Some(r))?)?;
        let truth_path = existing("truth", cfg.input("truth", &a.truth)?)?;
        let out = cfg.output("out", &a.out)?;
        let result: ClusterResult = read_json("result", &result_path)?;
        let truth: Vec<Vec<u32>> = read_json("truth", &truth_path)?;
        let m = match_partition(&result.labels, &truth, cfg.params.jaccard)?;
        write_atomic(&out, &json(&m)?)?;
        return write_atomic(&sidecar(&out, "run_config.json"), &cfg.to_json()?);
    }
    if !a.outcomes.is_empty() {
        let out = cfg.output("out", &a.out)?;
        let mut all: Vec<CaseOutcome> = Vec::new();
        for (i, p) in a.outcomes.iter().enumerate() {
            cfg.inputs.insert(format!("outcomes_{i}"), p.clone());
            all.extend(read_json::<Vec<CaseOutcome>>("outcomes", &existing("outcomes", p.clone())?)?);
        }
        let report = Report::new(&all)?;
        write_atomic(&out, &json(&report)?)?;
        write_atomic(&out.with_extension("txt"), report.to_text().as_bytes())?;
        return write_atomic(&sidecar(&out, "run_config.json"), &cfg.to_json()?);
    }
    let out_dir = cfg.output("out_dir", &a.out_dir)?;
    let cache = cfg.optional_input("cache_dir", &a.cache_dir);
    let (bank, seconds) = pipeline::timed_bank(&cfg.params, cache.as_deref())?;
    let records = if a.suite {
        cfg.options.insert("suite".into(), "true".into());
        pipeline::run_phantom_suite(cfg.params.seed, &bank, seconds, &cfg.params)?
    } else {
        let manifest = existing("dataset", cfg.input("dataset", &a.dataset)?)?;
        pipeline::run_dataset(&manifest, &bank, seconds, &cfg.params)?
    };
    write_batch(&out_dir, &records)?;
    write_atomic(&out_dir.join("run_config.json"), &cfg.to_json()?)
}

/// Per-case result and match files, then the merged outcomes and report.
/// Timings live only in `outcomes.json` and the report.
pub fn write_batch(dir: &Path, records: &[CaseRecord]) -> Result<()> {
    for r in records {
        let case_dir = dir.join(&r.outcome.id);
        write_atomic(&case_dir.join("result.json"), &json(&r.result)?)?;
        write_atomic(&case_dir.join("match.json"), &json(&r.matching)?)?;
    }
    let outcomes: Vec<&CaseOutcome> = records.iter().map(|r| &r.outcome).collect();
    write_atomic(&dir.join("outcomes.json"), &json(&outcomes)?)?;
    let owned: Vec<CaseOutcome> = outcomes.into_iter().cloned().collect();
    let report = Report::new(&owned)?;
    write_atomic(&dir.join("report.json"), &json(&report)?)?;
    write_atomic(&dir.join("report.txt"), report.to_text().as_bytes())
}

fn render_cmd(a: RenderArgs) -> Result<()> {
    let mut cfg = RunConfig::resolve("render", &a.params)?;
    let mode = a.mode.ok_or_else(|| Error::param("mode", "missing; pass --mode"))?;
    cfg.options.insert("mode".into(), format!("{mode:?}").to_lowercase());
    let out = cfg.output("out", &a.out)?;
    let pnm = if mode == RenderMode::Kernel {
        let bank_path = existing("bank", cfg.input("bank", &a.bank)?)?;
        if !a.kappa.is_finite() {
            return Err(Error::param("kappa", "must be finite"));
        }
        cfg.options.insert("kappa".into(), a.kappa.to_string());
        render::render_kernel(read_bank("bank", &bank_path)?.slice_for(a.kappa))
    } else {
        let patch_path = existing("patch", cfg.input("patch", &a.patch)?)?;
        let map = read_map("patch", &patch_path)?;
        match mode {
            RenderMode::Clusters => {
                let result_path = existing("result", cfg.input("result", &a.result)?)?;
                let result: ClusterResult = read_json("result", &result_path)?;
                render::render_clusters(&map.points, &result.labels)?
            }
            RenderMode::Orientation => render::render_orientation(&map.points)?,
            _ => render::render_curvature(&map.points)?,
        }
    };
    write_atomic(&out, &netpbm::encode(&pnm))?;
    write_atomic(&sidecar(&out, "run_config.json"), &cfg.to_json()?)
}

fn pipeline_cmd(a: PipelineArgs) -> Result<()> {
    let mut cfg = RunConfig::resolve("pipeline", &a.params)?;
    let out_dir = cfg.output("out_dir", &a.out_dir)?;
    let patch = cfg.optional_input("patch", &a.patch);
    let image = cfg.optional_input("image", &a.image);
    let mask = cfg.optional_input("mask", &a.mask);
    let bank = cfg.optional_input("bank", &a.bank);
    let truth = cfg.optional_input("truth", &a.truth);
    let raw = cfg.option("raw", a.raw.then(|| "true".to_string())).is_some();
    let center = cfg.option("center", a.center.map(|(x, y)| format!("{x},{y}")));
    let center = center.map(|c| parse_point(&c).map_err(|e| Error::param("center", e))).transpose()?;

    let t = Instant::now();
    let (map, lifted) = match (patch, image, mask) {
        (Some(p), None, None) => (read_map("patch", &existing("patch", p)?)?, false),
        (None, Some(i), Some(m)) => {
            let image = load_image(&existing("image", i)?, !raw)?;
            let mask = netpbm::read(&existing("mask", m)?)?.to_mask();
            if (mask.width, mask.height) != (image.width, image.height) {
                return Err(Error::param("mask", "mask and image sizes differ"));
            }
            (lift_image(&image, &mask, &cfg.params.lift_config())?.lifted, true)
        }
        _ => return Err(Error::param("patch", "give either --patch or both --image and --mask")),
    };
    let t_lift = t.elapsed().as_secs_f64();
    if map.n_theta != cfg.params.n_theta {
        return Err(Error::param("n_theta", format!("the lifted map has {} orientations", map.n_theta)));
    }

    let source = match bank {
        Some(b) => BankSource::File(existing("bank", b)?),
        None if a.no_cache => BankSource::Fresh,
        None => {
            cfg.inputs.insert("cache_dir".into(), a.cache_dir.clone());
            BankSource::Cache(a.cache_dir.clone())
        }
    };
    let run = run_patch(&map, center, source, &cfg.params)?;
    let patch_map = LiftedFeatureMap { points: run.points.clone(), ..map.clone() };

    if lifted {
        write_atomic(&out_dir.join("lifted.l5d"), &l5d::encode(&map))?;
    }
    write_atomic(&out_dir.join("patch.l5d"), &l5d::encode(&patch_map))?;
    write_atomic(&out_dir.join("result.json"), &json(&run.result)?)?;
    let mut timings = serde_json::to_value(&run.timings)?;
    timings["t_lift"] = t_lift.into();
    write_atomic(&out_dir.join("timings.json"), &json(&timings)?)?;
    write_atomic(
        &out_dir.join("clusters.ppm"),
        &netpbm::encode(&render::render_clusters(&run.points, &run.result.labels)?),
    )?;
    write_atomic(&out_dir.join("orientation.ppm"), &netpbm::encode(&render::render_orientation(&run.points)?))?;
    write_atomic(&out_dir.join("curvature.ppm"), &netpbm::encode(&render::render_curvature(&run.points)?))?;
    if let Some(t) = truth {
        let labels: Vec<Vec<u32>> = read_json("truth", &existing("truth", t)?)?;
        let labels = if center.is_some() { crop_labels(&map, &patch_map, labels)? } else { labels };
        let m = match_partition(&run.result.labels, &labels, cfg.params.jaccard)?;
        write_atomic(&out_dir.join("match.json"), &json(&m)?)?;
    }
    write_atomic(&out_dir.join("run_config.json"), &cfg.to_json()?)
}

/// Restricts per-point labels of `full` to the points kept in `patch`
/// (a crop preserves point order).
fn crop_labels(full: &LiftedFeatureMap, patch: &LiftedFeatureMap, labels: Vec<Vec<u32>>) -> Result<Vec<Vec<u32>>> {
    if labels.len() != full.len() {
        return Err(Error::param("truth", format!("{} label sets for {} points", labels.len(), full.len())));
    }
    let mut out = Vec::with_capacity(patch.len());
    let mut it = full.points.iter().zip(labels);
    for p in &patch.points {
        let (_, l) = it.find(|(q, _)| *q == p).expect("crop keeps a subsequence");
        out.push(l);
    }
    Ok(out)
}

/// Ground truth of a phantom directory written by the `phantom` subcommand.
pub fn read_phantom_truth(dir: &Path) -> Result<GroundTruth> {
    GroundTruth::load(&dir.join("truth.l5d"), &dir.join("truth_labels.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_and_sidecars() {
        assert_eq!(parse_point("12, 40"), Ok((12, 40)));
        assert!(parse_point("12").is_err());
        assert_eq!(sidecar(Path::new("out/result.json"), "timings.json"), PathBuf::from("out/result.timings.json"));
    }

    #[test]
    fn atomic_write_leaves_no_partial() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/a.bin");
        write_atomic(&p, b"abc").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"abc");
        let names: Vec<_> = std::fs::read_dir(p.parent().unwrap()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["grouping5d", "bogus"]), 2);
        assert_eq!(run(["grouping5d", "kernel", "--paths", "many"]), 2);
        assert_eq!(run(["grouping5d", "kernel", "--paths", "0", "--out", "/nonexistent/x.k5d"]), 1);
    }
}
