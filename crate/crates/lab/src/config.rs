//! Run configurations: command line flags and the versioned JSON form.
//!
//! Every job is a [`Job`] variant. The same structs back both the flags of
//! a subcommand and the `params` object of a [`RunConfig`] file; missing
//! JSON fields take the flag defaults.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, FromArgMatches, Subcommand};
use serde::{Deserialize, Serialize};
use speclab_core::DomainSpec;

use crate::formats;

/// Version of the [`RunConfig`] JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

fn flag_defaults<T: Args + FromArgMatches>() -> T {
    let cmd = T::augment_args(clap::Command::new("defaults"));
    let m = cmd.get_matches_from(["defaults"]);
    T::from_arg_matches(&m).expect("flag defaults are valid")
}

macro_rules! defaults_from_flags {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                flag_defaults()
            }
        }
    )*};
}

/// Seed and output location shared by every job.
#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default)]
pub struct Common {
    /// Master seed; every work item derives its own stream from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for artifacts and the run manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Domain `R^m x T^n` with a uniform grid.
#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default)]
pub struct DomainArgs {
    /// Number of line axes.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Number of circle axes.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Truncation length L of every line axis.
    #[arg(long, default_value_t = 8.0 * PI)]
    pub box_length: f64,
    /// Grid points per axis.
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    /// Period of every circle axis.
    #[arg(long, default_value_t = 2.0 * PI)]
    pub period: f64,
    /// Domain JSON file; replaces the flags above.
    #[arg(long)]
    pub domain: Option<PathBuf>,
}

impl DomainArgs {
    pub fn spec(&self) -> Result<DomainSpec> {
        if let Some(path) = &self.domain {
            return formats::read_domain(path);
        }
        Ok(DomainSpec::new(
            self.m,
            self.n,
            vec![self.period; self.n],
            vec![self.box_length; self.m],
            vec![self.grid; self.m + self.n],
        )?)
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default)]
pub struct ScanArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Dyadic frequency scales.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0])]
    pub lambdas: Vec<f64>,
    /// Thickness rule: `all` (every dyadic mu <= lambda), `equal`, or a dyadic number.
    #[arg(long, default_value = "all")]
    pub mu: String,
    /// Rectangles per (lambda, mu) cell.
    #[arg(long, default_value_t = 8)]
    pub rects: usize,
    /// Random starts per rectangle.
    #[arg(long, default_value_t = 16)]
    pub trials: usize,
    /// Time nodes on [0, t_end].
    #[arg(long, default_value_t = 64)]
    pub n_t: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Space-time Lebesgue exponent.
    #[arg(long, default_value_t = 4.0)]
    pub q: f64,
    /// Ascent iterations per start.
    #[arg(long, default_value_t = 200)]
    pub max_steps: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default)]
pub struct BilinearArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Dyadic high-frequency scales.
    #[arg(long, value_delimiter = ',', default_values_t = [16.0, 32.0])]
    pub lambdas: Vec<f64>,
    /// Low-frequency rule: `all`, `equal`, or a dyadic number.
    #[arg(long, default_value = "all")]
    pub mu: String,
    #[arg(long, default_value_t = 8)]
    pub trials: usize,
    /// Largest number of lattice modes per factor.
    #[arg(long, default_value_t = 200)]
    pub modes: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default)]
pub struct OrthoArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// `lambda:mu` pairs.
    #[arg(long, value_delimiter = ',', default_values_t = ["16:4".to_string(), "32:4".to_string(), "32:8".to_string()])]
    pub pairs: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 200)]
    pub modes: usize,
    /// Accepted range [1/bound, bound] of the orthogonality ratio.
    #[arg(long, default_value_t = 8.0)]
    pub ratio_bound: f64,
    /// Largest accepted time-frequency constant c.
    #[arg(long, default_value_t = 8.0)]
    pub c_bound: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default)]
pub struct CountArgs {
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub d: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub e: f64,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    /// Run the sup scan over `ks` instead of a single query.
    #[arg(long)]
    pub scan: bool,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0, 8.0, 16.0])]
    pub ks: Vec<f64>,
    /// Seeded (c, e) samples per k.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Random queries compared against Monte Carlo (scan mode).
    #[arg(long, default_value_t = 50)]
    pub mc_queries: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_points: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default)]
pub struct MeasureArgs {
    /// Number of line axes.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Number of circle axes.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [8.0, 16.0, 32.0])]
    pub lambdas: Vec<f64>,
    /// `all` or a dyadic number.
    #[arg(long, default_value = "all")]
    pub mu: String,
    /// Random (tau, xi, a) samples per cell, on top of the axis-aligned ones.
    #[arg(long, default_value_t = 512)]
    pub samples: usize,
    #[arg(long, default_value_t = 1.0)]
    pub cutoff: f64,
    /// Line-axis resolution as a fraction of lambda.
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub resolution: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default)]
pub struct VariationArgs {
    /// Time series file (frequency data); without it a seeded linear
    /// solution on `times` is used.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 0.25, 0.5, 1.0])]
    pub times: Vec<f64>,
    /// Variation exponent.
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Sobolev regularity of the cube norms.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default)]
pub struct NlsArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Initial datum: `plane-wave` or `random`.
    #[arg(long, default_value = "plane-wave")]
    pub preset: String,
    /// Plane-wave amplitude, or H^s norm of random data.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Plane-wave vector in lattice units.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [1, 0, 0, 0])]
    pub wave: Vec<i64>,
    /// Frequency band of random data.
    #[arg(long, default_value_t = 2.0)]
    pub band: f64,
    /// Regularity used to normalize random data.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// +1 defocusing, -1 focusing.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sign: f64,
    #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Apply the 2/3 rule after every kick.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub dealias: bool,
    #[arg(long, default_value_t = 10)]
    pub record_every: usize,
    /// Write every recorded state as a field file.
    #[arg(long)]
    pub snapshots: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default)]
pub struct SmallDataArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0])]
    pub amplitudes: Vec<f64>,
    /// Regularity of the normalization (at least 1).
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub band: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sign: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub dealias: bool,
    #[arg(long, default_value_t = 10)]
    pub record_every: usize,
    #[command(flatten)]
    pub common: Common,
}

defaults_from_flags!(
    Common,
    DomainArgs,
    ScanArgs,
    BilinearArgs,
    OrthoArgs,
    CountArgs,
    MeasureArgs,
    VariationArgs,
    NlsArgs,
    SmallDataArgs
);

#[derive(Subcommand, Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Job {
    /// Maximize frequency-localized Strichartz ratios over a dyadic scan.
    StrichartzScan(ScanArgs),
    /// Bilinear ratios and strip orthogonality over (lambda, mu) cells.
    BilinearScan(BilinearArgs),
    /// Almost-orthogonality and time-frequency containment checks.
    OrthoCheck(OrthoArgs),
    /// Annulus measure of the counting lemma, or its sup scan.
    CountLemma(CountArgs),
    /// Measures of the convolution sets A and B with normalized ratios.
    MeasureAb(MeasureArgs),
    /// Variation and cube norms of a sampled path.
    VariationNorm(VariationArgs),
    /// Split-step cubic NLS run with conservation diagnostics.
    NlsRun(NlsArgs),
    /// H^1 growth of small random data across amplitudes.
    SmallData(SmallDataArgs),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::StrichartzScan(_) => "strichartz-scan",
            Job::BilinearScan(_) => "bilinear-scan",
            Job::OrthoCheck(_) => "ortho-check",
            Job::CountLemma(_) => "count-lemma",
            Job::MeasureAb(_) => "measure-ab",
            Job::VariationNorm(_) => "variation-norm",
            Job::NlsRun(_) => "nls-run",
            Job::SmallData(_) => "small-data",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Job::StrichartzScan(a) => &a.common,
            Job::BilinearScan(a) => &a.common,
            Job::OrthoCheck(a) => &a.common,
            Job::CountLemma(a) => &a.common,
            Job::MeasureAb(a) => &a.common,
            Job::VariationNorm(a) => &a.common,
            Job::NlsRun(a) => &a.common,
            Job::SmallData(a) => &a.common,
        }
    }

    pub fn common_mut(&mut self) -> &mut Common {
        match self {
            Job::StrichartzScan(a) => &mut a.common,
            Job::BilinearScan(a) => &mut a.common,
            Job::OrthoCheck(a) => &mut a.common,
            Job::CountLemma(a) => &mut a.common,
            Job::MeasureAb(a) => &mut a.common,
            Job::VariationNorm(a) => &mut a.common,
            Job::NlsRun(a) => &mut a.common,
            Job::SmallData(a) => &mut a.common,
        }
    }
}

/// A job with its schema version, as stored in config files and manifests.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(flatten)]
    pub job: Job,
}

impl RunConfig {
    pub fn new(job: Job) -> Self {
        Self { schema_version: SCHEMA_VERSION, job }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("invalid run config")?;
        if cfg.schema_version != SCHEMA_VERSION {
            bail!("run config schema version {} is not supported (expected {SCHEMA_VERSION})", cfg.schema_version);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }
}

/// Parses a thickness rule: `all`, `equal`, or a number.
pub fn parse_mu(text: &str) -> Result<MuSpec> {
    match text {
        "all" => Ok(MuSpec::All),
        "equal" => Ok(MuSpec::Equal),
        other => {
            let v: f64 =
                other.parse().with_context(|| format!("mu rule {other:?} is not `all`, `equal` or a number"))?;
            Ok(MuSpec::Fixed(v))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MuSpec {
    All,
    Equal,
    Fixed(f64),
}

/// Parses `lambda:mu`.
pub fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let (l, m) = text.split_once(':').with_context(|| format!("pair {text:?} is not of the form lambda:mu"))?;
    Ok((
        l.trim().parse().with_context(|| format!("bad lambda in {text:?}"))?,
        m.trim().parse().with_context(|| format!("bad mu in {text:?}"))?,
    ))
}
