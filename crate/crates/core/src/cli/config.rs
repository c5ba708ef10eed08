//! The resolved run configuration: defaults, then a JSON file, then flags.

use clap::Args;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::cluster::SpectralParams;
use crate::error::{Error, Result};
use crate::kernel::{GridDims, KappaLattice, KernelWeights, PathParams};
use crate::liftspace::LiftConfig;

/// Every numeric parameter of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub n_theta: usize,
    /// Gaussian scales σ for multiscale curvature, in pixels.
    pub scales: Vec<f64>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_step: f64,
    /// Δs of the random paths, in pixels.
    pub step_size: f64,
    /// States per path H; `None` means a third of the patch side, rounded.
    pub steps: Option<usize>,
    pub paths: usize,
    pub sigma_kappa_diff: f64,
    pub sigma_kappa_exp: f64,
    pub sigma_int: f64,
    /// Patch half size s_o; patches are (2·s_o + 1) px square.
    pub half_size: usize,
    pub seed: u64,
    /// Largest candidate cluster count n_c.
    pub max_k: usize,
    pub min_cluster_size: Option<usize>,
    pub jaccard: f64,
}

impl Default for Params {
    fn default() -> Self {
        let lift = LiftConfig::default();
        let path = PathParams::default();
        let lattice = KappaLattice::default();
        let weights = KernelWeights::default();
        let spectral = SpectralParams::default();
        Params {
            n_theta: lift.n_theta,
            scales: lift.scales,
            kappa_min: lattice.min,
            kappa_max: lattice.value(lattice.count - 1),
            kappa_step: lattice.step,
            step_size: path.step,
            steps: None,
            paths: path.paths,
            sigma_kappa_diff: path.sigma_kappa_diff,
            sigma_kappa_exp: weights.sigma_kappa_exp,
            sigma_int: weights.sigma_int,
            half_size: 25,
            seed: path.seed,
            max_k: spectral.n_c,
            min_cluster_size: None,
            jaccard: crate::eval::DEFAULT_JACCARD,
        }
    }
}

impl Params {
    /// H: the explicit value, else round((2·s_o + 1)/3).
    pub fn steps(&self) -> usize {
        self.steps.unwrap_or_else(|| (((2 * self.half_size + 1) as f64) / 3.0).round().max(1.0) as usize)
    }

    pub fn lattice(&self) -> Result<KappaLattice> {
        KappaLattice::new(self.kappa_min, self.kappa_max, self.kappa_step)
    }

    pub fn path_params(&self) -> PathParams {
        PathParams {
            step: self.step_size,
            steps: self.steps(),
            paths: self.paths,
            sigma_kappa_diff: self.sigma_kappa_diff,
            seed: self.seed,
        }
    }

    pub fn grid_dims(&self) -> GridDims {
        GridDims::for_paths(&self.path_params(), self.n_theta)
    }

    pub fn kernel_weights(&self) -> KernelWeights {
        KernelWeights { sigma_kappa_exp: self.sigma_kappa_exp, sigma_int: self.sigma_int }
    }

    pub fn spectral(&self) -> SpectralParams {
        SpectralParams { n_c: self.max_k, min_cluster_size: self.min_cluster_size, ..SpectralParams::default() }
    }

    pub fn lift_config(&self) -> LiftConfig {
        LiftConfig { n_theta: self.n_theta, scales: self.scales.clone(), ..LiftConfig::default() }
    }

    /// Checks every parameter against the range its module accepts.
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 2 {
            return Err(Error::param("n_theta", format!("must be at least 2, got {}", self.n_theta)));
        }
        if self.scales.is_empty() || self.scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::param("scales", format!("need one or more positive scales, got {:?}", self.scales)));
        }
        self.lattice()?;
        self.path_params().validate()?;
        self.kernel_weights().validate()?;
        self.spectral().validate()?;
        if self.half_size == 0 {
            return Err(Error::param("half_size", "must be at least 1"));
        }
        if !(self.jaccard > 0.0 && self.jaccard <= 1.0) {
            return Err(Error::param("jaccard", format!("must lie in (0, 1], got {}", self.jaccard)));
        }
        Ok(())
    }
}

/// Flag overrides shared by every subcommand. Real-valued flags accept a
/// leading minus so range checks, not the parser, report bad signs.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// JSON run configuration; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Comma-separated curvature scales in pixels.
    #[arg(long, value_delimiter = ',')]
    pub scales: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_step: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub step_size: Option<f64>,
    /// States per random path (H).
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma_kappa_diff: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma_kappa_exp: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma_int: Option<f64>,
    #[arg(long)]
    pub half_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest candidate number of clusters.
    #[arg(long)]
    pub max_k: Option<usize>,
    #[arg(long)]
    pub min_cluster_size: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub jaccard: Option<f64>,
}

impl ParamArgs {
    fn apply(&self, p: &mut Params) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { p.$f = v; } )* };
        }
        set!(n_theta, scales, kappa_min, kappa_max, kappa_step, step_size, paths);
        set!(sigma_kappa_diff, sigma_kappa_exp, sigma_int, half_size, seed, max_k, jaccard);
        if self.steps.is_some() {
            p.steps = self.steps;
        }
        if self.min_cluster_size.is_some() {
            p.min_cluster_size = self.min_cluster_size;
        }
    }
}

/// What a run did and with which inputs; written as `run_config.json`
/// beside the outputs and accepted back through `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(default)]
    pub inputs: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub outputs: BTreeMap<String, PathBuf>,
    /// Non-numeric options such as a phantom category or render mode.
    #[serde(default)]
    pub options: BTreeMap<String, String>,
    #[serde(default)]
    pub params: Params,
}

impl RunConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::param("config", format!("{}: {e}", path.display())))?;
        serde_json::from_slice(&bytes).map_err(|e| Error::param("config", format!("{}: {e}", path.display())))
    }

    /// Defaults, then the `--config` file, then explicit flags.
    pub fn resolve(subcommand: &str, args: &ParamArgs) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(path) => {
                let mut c = RunConfig::read(path)?;
                if c.subcommand != subcommand {
                    // Paths and options belong to the subcommand that wrote them.
                    c.inputs.clear();
                    c.outputs.clear();
                    c.options.clear();
                }
                c.subcommand = subcommand.to_string();
                c
            }
            None => RunConfig {
                subcommand: subcommand.to_string(),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                options: BTreeMap::new(),
                params: Params::default(),
            },
        };
        args.apply(&mut cfg.params);
        cfg.params.validate()?;
        Ok(cfg)
    }

    /// The flag value if given, else the config's; records the choice.
    pub fn input(&mut self, name: &'static str, flag: &Option<PathBuf>) -> Result<PathBuf> {
        Self::pick(&mut self.inputs, name, flag)
    }

    pub fn output(&mut self, name: &'static str, flag: &Option<PathBuf>) -> Result<PathBuf> {
        Self::pick(&mut self.outputs, name, flag)
    }

    pub fn optional_input(&mut self, name: &str, flag: &Option<PathBuf>) -> Option<PathBuf> {
        if let Some(p) = flag {
            self.inputs.insert(name.to_string(), p.clone());
        }
        self.inputs.get(name).cloned()
    }

    pub fn option(&mut self, name: &str, flag: Option<String>) -> Option<String> {
        if let Some(v) = flag {
            self.options.insert(name.to_string(), v);
        }
        self.options.get(name).cloned()
    }

    fn pick(map: &mut BTreeMap<String, PathBuf>, name: &'static str, flag: &Option<PathBuf>) -> Result<PathBuf> {
        if let Some(p) = flag {
            map.insert(name.to_string(), p.clone());
        }
        map.get(name).cloned().ok_or_else(|| Error::param(name, format!("missing; pass --{}", name.replace('_', "-"))))
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }
}
