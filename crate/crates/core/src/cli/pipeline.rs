//! The staged pipeline with per-stage timings, and the batch runners built on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::cache::cached_bank;
use super::config::Params;
use crate::affinity::build_affinity_from_points;
use crate::cluster::{select_k_and_cluster, ClusterResult};
use crate::error::{Error, Result};
use crate::eval::{match_partition, CaseOutcome, PartitionMatch, StageTimes, StageWeights, UnitMap};
use crate::kernel::{build_bank, k5d, KernelBank};
use crate::liftspace::{
    crop_patch, fallback_junctions, lift_image, netpbm, preprocess, preprocess_gray, Image2D, LiftedFeatureMap,
    LiftedPoint,
};
use crate::phantom::{generate, Category, PhantomSpec};

/// Sizes the weighted stage timings are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    /// Extent of the points in x and y, in pixels.
    pub nx: usize,
    pub ny: usize,
    pub n_theta: usize,
    /// Lattice values spanning the points' curvature range.
    pub n_kappa: usize,
    pub kappa_range: (f64, f64),
}

pub fn discretize(points: &[LiftedPoint], n_theta: usize, kappa_step: f64) -> Result<Discretization> {
    if points.is_empty() {
        return Err(Error::InvalidInput("empty patch".into()));
    }
    let span = |f: fn(&LiftedPoint) -> u16| {
        let (lo, hi) = points.iter().fold((u16::MAX, 0), |(lo, hi), p| (lo.min(f(p)), hi.max(f(p))));
        (hi - lo) as usize + 1
    };
    let (klo, khi) =
        points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.kappa), hi.max(p.kappa)));
    let (klo, khi) = ((klo / kappa_step).floor() * kappa_step, (khi / kappa_step).ceil() * kappa_step);
    Ok(Discretization {
        nx: span(|p| p.x),
        ny: span(|p| p.y),
        n_theta,
        n_kappa: ((khi - klo) / kappa_step).round() as usize + 1,
        kappa_range: (klo, khi),
    })
}

impl Discretization {
    pub fn weights(&self, points: usize) -> StageWeights {
        StageWeights::from_sizes(self.nx, self.ny, self.n_theta, self.n_kappa, points)
    }
}

/// Per-stage timings of one run, written as `timings.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub t_disc: f64,
    pub t_kernel: f64,
    pub t_affinity: f64,
    /// Raw clustering time over all candidate K.
    pub t_clust: f64,
    pub n_c: usize,
    pub kernel_cached: bool,
    pub weights: StageWeights,
}

impl Timings {
    pub fn stage_times(&self) -> StageTimes {
        StageTimes { disc: self.t_disc, kernel: self.t_kernel, affinity: self.t_affinity, clust: self.t_clust }
    }
}

/// Where the kernel bank comes from.
pub enum BankSource<'a> {
    /// Already in memory; `build_seconds` is charged as the kernel time.
    Shared {
        bank: &'a KernelBank,
        build_seconds: f64,
    },
    File(PathBuf),
    Cache(PathBuf),
    Fresh,
}

pub struct PatchRun {
    pub points: Vec<LiftedPoint>,
    pub disc: Discretization,
    pub result: ClusterResult,
    pub timings: Timings,
    /// The bank when it was loaded or built here.
    pub bank: Option<KernelBank>,
}

/// Crop (when `center` is set), discretize, obtain the bank, build the
/// affinity and cluster, timing each stage.
pub fn run_patch(
    map: &LiftedFeatureMap,
    center: Option<(usize, usize)>,
    source: BankSource,
    params: &Params,
) -> Result<PatchRun> {
    let t = Instant::now();
    let points = match center {
        Some(c) => crop_patch(map, c, params.half_size)?.map.points,
        None => map.points.clone(),
    };
    if points.is_empty() {
        return Err(Error::InvalidInput("the patch holds no lifted points".into()));
    }
    let disc = discretize(&points, map.n_theta, params.kappa_step)?;
    let t_disc = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let secs = |t: Instant| t.elapsed().as_secs_f64();
    let (shared, owned, t_kernel, cached) = match source {
        BankSource::Shared { bank, build_seconds } => (Some(bank), None, build_seconds, false),
        BankSource::File(path) => {
            let b = k5d::read(&path)?;
            (None, Some(b), secs(t), false)
        }
        BankSource::Cache(dir) => {
            let (b, hit) = cached_bank(&dir, params.lattice()?, params.grid_dims(), &params.path_params())?;
            (None, Some(b), secs(t), hit)
        }
        BankSource::Fresh => {
            let b = build_bank(params.lattice()?, params.grid_dims(), &params.path_params())?;
            (None, Some(b), secs(t), false)
        }
    };
    let bank = shared.unwrap_or_else(|| owned.as_ref().expect("one of the two is set"));
    if bank.dims.n_theta != map.n_theta {
        return Err(Error::param(
            "n_theta",
            format!("bank has {} orientations, the lifted map {}", bank.dims.n_theta, map.n_theta),
        ));
    }

    let t = Instant::now();
    let a = build_affinity_from_points(&points, bank, &params.kernel_weights())?;
    let t_affinity = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let result = select_k_and_cluster(&a, &params.spectral())?;
    let t_clust = t.elapsed().as_secs_f64();

    let timings = Timings {
        t_disc,
        t_kernel,
        t_affinity,
        t_clust,
        n_c: result.costs.len().max(1),
        kernel_cached: cached,
        weights: disc.weights(points.len()),
    };
    Ok(PatchRun { points, disc, result, timings, bank: owned })
}

/// One scored case of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub outcome: CaseOutcome,
    pub matching: PartitionMatch,
    pub result: ClusterResult,
}

pub fn score_case(id: &str, category: &str, run: &PatchRun, truth: &[Vec<u32>], params: &Params) -> Result<CaseRecord> {
    let matching = match_partition(&run.result.labels, truth, params.jaccard)?;
    let outcome = CaseOutcome {
        id: id.to_string(),
        category: category.to_string(),
        correct: matching.correct,
        q_clust: run.result.q_clust,
        points: run.points.len(),
        sigma_kappa_diff: params.sigma_kappa_diff,
        sigma_int: params.sigma_int,
        n_c: run.timings.n_c,
        times: run.timings.stage_times(),
        weights: run.timings.weights,
    };
    Ok(CaseRecord { outcome, matching, result: run.result.clone() })
}

/// One case per category (A–E, A1–E1) from `seed`, all sharing one bank.
/// Cases run concurrently; the output keeps category order.
pub fn run_phantom_suite(seed: u64, bank: &KernelBank, build_seconds: f64, params: &Params) -> Result<Vec<CaseRecord>> {
    Category::ALL
        .par_iter()
        .map(|&cat| {
            let case = generate(&PhantomSpec::for_category(cat, seed))?;
            let truth = case.lifted_truth(params.n_theta, 1.0)?;
            let run = run_patch(&truth.map, None, BankSource::Shared { bank, build_seconds }, params)?;
            score_case(&format!("{cat}-seed{seed}"), &cat.to_string(), &run, &truth.labels, params)
        })
        .collect()
}

/// A retinal dataset converted to netpbm: per image a colour or grey image,
/// a vessel mask, an artery/vein code map, and optional junctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    /// Path of the class map JSON (class name → codes), relative to the manifest.
    pub classes: PathBuf,
    pub images: Vec<DatasetImage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetImage {
    pub id: String,
    pub image: PathBuf,
    pub mask: PathBuf,
    pub labels: PathBuf,
    /// Patch centres; when absent the skeleton branch points are used.
    #[serde(default)]
    pub junctions: Option<Vec<Junction>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub x: usize,
    pub y: usize,
    #[serde(default = "default_category")]
    pub category: String,
}

fn default_category() -> String {
    "junction".into()
}

/// Colour images use the green and red channels; grey images are used directly.
pub fn load_image(path: &Path, normalize: bool) -> Result<Image2D> {
    let pnm = netpbm::read(path)?;
    match (pnm.channels, normalize) {
        (3, true) => preprocess(&pnm.channel(1), &pnm.channel(0)),
        (3, false) => Ok(pnm.channel(1)),
        (_, true) => preprocess_gray(&pnm.channel(0)),
        (_, false) => Ok(pnm.channel(0)),
    }
}

/// Lifts every image once, crops a patch per junction and scores it
/// against the artery/vein units. Patches without annotated points are skipped.
pub fn run_dataset(
    manifest_path: &Path,
    bank: &KernelBank,
    build_seconds: f64,
    params: &Params,
) -> Result<Vec<CaseRecord>> {
    let bytes = std::fs::read(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: DatasetManifest = serde_json::from_slice(&bytes)?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let classes = root.join(&manifest.classes);
    let per_image: Vec<Vec<CaseRecord>> = manifest
        .images
        .par_iter()
        .map(|img| {
            let image = load_image(&root.join(&img.image), true)?;
            let mask = netpbm::read(&root.join(&img.mask))?.to_mask();
            let units = UnitMap::read(&root.join(&img.labels), &classes)?;
            let lifted = lift_image(&image, &mask, &params.lift_config())?.lifted;
            let junctions = img.junctions.clone().unwrap_or_else(|| {
                fallback_junctions(&mask)
                    .into_iter()
                    .map(|(x, y)| Junction { x, y, category: default_category() })
                    .collect()
            });
            let mut out = Vec::new();
            for (j, junction) in junctions.iter().enumerate() {
                let patch = crop_patch(&lifted, (junction.x, junction.y), params.half_size)?;
                let truth = units.labels_for(&patch.map.points)?;
                if truth.iter().all(|t| t.is_empty()) {
                    continue;
                }
                let run = run_patch(&patch.map, None, BankSource::Shared { bank, build_seconds }, params)?;
                out.push(score_case(&format!("{}-{j}", img.id), &junction.category, &run, &truth, params)?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_image.into_iter().flatten().collect())
}

/// Builds a bank (or reads it from `cache`), returning it with the seconds spent.
pub fn timed_bank(params: &Params, cache: Option<&Path>) -> Result<(KernelBank, f64)> {
    let t = Instant::now();
    let bank = match cache {
        Some(dir) => cached_bank(dir, params.lattice()?, params.grid_dims(), &params.path_params())?.0,
        None => build_bank(params.lattice()?, params.grid_dims(), &params.path_params())?,
    };
    Ok((bank, t.elapsed().as_secs_f64()))
}
