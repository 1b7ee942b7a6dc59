//! Run settings from flags and an optional JSON file. Keys in the file are
//! the long flag names (`"M"`, `"label-col"`, `"budget-secs"`, ...); flags
//! given on the command line override the file.

use std::path::{Path, PathBuf};

use clap::Args;
use optree_core::baseline::GreedyConfig;
use optree_core::data::Encoding;
use optree_core::mcts::Variant;
use serde::Deserialize;

use crate::csvio::LabelColumn;
use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA_GRID: [f64; 4] = [0.1, 0.01, 0.0025, 0.0001];
pub const DEFAULT_BUDGET_SECS: f64 = 600.0;

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Algorithms to run: tsdt, fast, greedy (comma separated).
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub algo: Option<Vec<String>>,
    /// MCTS variant used when `algo` is `mcts`.
    #[arg(long)]
    pub variant: Option<String>,
    /// Number of binary attributes of the XOR stream.
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Search iterations.
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub iterations: Option<usize>,
    /// Samples per simulation.
    #[arg(long = "m")]
    #[serde(rename = "m")]
    pub samples: Option<usize>,
    /// Split cost; a comma separated list for a grid.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub lambda: Option<Vec<f64>>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Held-out CSV scored with the training categories.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Label column name, or zero-based index. Defaults to the last column.
    #[arg(long)]
    pub label_col: Option<String>,
    /// none, drop_first or drop_last.
    #[arg(long)]
    pub encoding: Option<String>,
    /// Folds for crossval.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Wall-clock budget per run.
    #[arg(long)]
    pub budget_secs: Option<f64>,
    #[arg(long)]
    pub max_splits: Option<usize>,
    /// Hoeffding confidence for greedy.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub grace_period: Option<u64>,
    /// Hoeffding tie threshold for greedy.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Option<Vec<T>>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(Some(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    }))
}

impl Settings {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Field-wise override: values set in `over` win.
    pub fn overridden_by(self, over: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            algo,
            variant,
            q,
            reps,
            iterations,
            samples,
            lambda,
            gamma,
            dataset,
            test,
            label_col,
            encoding,
            k,
            seed,
            budget_secs,
            max_splits,
            delta,
            grace_period,
            tau,
            max_depth,
            out
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synth,
    Fit,
    Crossval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Mcts(Variant),
    Greedy,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mcts(_) => "mcts",
            Algorithm::Greedy => "greedy",
        }
    }

    pub fn variant(self) -> &'static str {
        match self {
            Algorithm::Mcts(v) => v.as_str(),
            Algorithm::Greedy => "hoeffding",
        }
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub algorithms: Vec<Algorithm>,
    pub q: Option<usize>,
    pub reps: usize,
    pub iterations: usize,
    pub samples: usize,
    pub lambdas: Vec<f64>,
    pub gamma: f64,
    pub dataset: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub label_col: LabelColumn,
    pub encoding: Encoding,
    pub k: usize,
    pub seed: u64,
    pub budget_secs: Option<f64>,
    pub max_splits: Option<usize>,
    pub greedy: GreedyConfig,
    pub out: PathBuf,
}

/// Reads the optional config file, applies flag overrides and validates.
pub fn load_config(command: Command, file: Option<&Path>, flags: Settings) -> Result<RunSpec> {
    let base = match file {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    RunSpec::resolve(command, base.overridden_by(flags))
}

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn parse_variant(s: &str) -> Result<Variant> {
    match s {
        "tsdt" => Ok(Variant::Tsdt),
        "fast" => Ok(Variant::Fast),
        other => bad(format!(
            "variant: unknown value `{other}` (expected tsdt or fast)"
        )),
    }
}

fn parse_encoding(s: &str) -> Result<Encoding> {
    match s {
        "none" => Ok(Encoding::None),
        "drop_first" => Ok(Encoding::DropFirst),
        "drop_last" => Ok(Encoding::DropLast),
        other => bad(format!(
            "encoding: unknown value `{other}` (expected none, drop_first or drop_last)"
        )),
    }
}

impl RunSpec {
    pub fn resolve(command: Command, s: Settings) -> Result<RunSpec> {
        let variant = s.variant.as_deref().map(parse_variant).transpose()?;
        let names = s.algo.unwrap_or_else(|| vec!["mcts".to_string()]);
        if names.is_empty() {
            return bad("algo: empty list");
        }
        let mut algorithms = Vec::new();
        for name in &names {
            let a = match name.as_str() {
                "mcts" => Algorithm::Mcts(variant.unwrap_or(Variant::Fast)),
                "greedy" => Algorithm::Greedy,
                v @ ("tsdt" | "fast") => Algorithm::Mcts(parse_variant(v)?),
                other => {
                    return bad(format!(
                        "algo: unknown value `{other}` (expected mcts, tsdt, fast or greedy)"
                    ))
                }
            };
            if !algorithms.contains(&a) {
                algorithms.push(a);
            }
        }

        let lambdas = match s.lambda {
            Some(l) if l.is_empty() => return bad("lambda: empty list"),
            Some(l) => l,
            None if command == Command::Crossval => DEFAULT_LAMBDA_GRID.to_vec(),
            None => vec![0.05],
        };
        if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return bad(format!("lambda: {l} is not a finite non-negative number"));
        }
        let gamma = s.gamma.unwrap_or(0.75);
        if !(gamma > 0.0 && gamma <= 1.0) {
            return bad(format!("gamma: {gamma} is outside (0, 1]"));
        }
        let iterations = s.iterations.unwrap_or(400);
        if iterations == 0 {
            return bad("M: must be at least 1");
        }
        let samples = s.samples.unwrap_or(100);
        if samples == 0 {
            return bad("m: must be at least 1");
        }
        let reps = s.reps.unwrap_or(1);
        if reps == 0 {
            return bad("reps: must be at least 1");
        }
        let k = s.k.unwrap_or(5);
        if k < 2 {
            return bad("k: need at least 2 folds");
        }
        let budget_secs = match (s.budget_secs, command) {
            (Some(b), _) if !(b.is_finite() && b > 0.0) => {
                return bad(format!("budget-secs: {b} must be positive"))
            }
            (Some(b), _) => Some(b),
            (None, Command::Synth) => None,
            (None, _) => Some(DEFAULT_BUDGET_SECS),
        };
        let defaults = GreedyConfig::default();
        let greedy = GreedyConfig {
            delta: s.delta.unwrap_or(defaults.delta),
            grace_period: s.grace_period.unwrap_or(defaults.grace_period),
            tie_threshold: s.tau.unwrap_or(defaults.tie_threshold),
            max_depth: s.max_depth.or(defaults.max_depth),
        };
        greedy.validate()?;

        match command {
            Command::Synth => match s.q {
                None => return bad("q: required for synth"),
                Some(q) if q < 2 => return bad("q: XOR needs at least 2 attributes"),
                _ => {}
            },
            Command::Fit | Command::Crossval if s.dataset.is_none() => {
                return bad("dataset: required for fit and crossval")
            }
            _ => {}
        }

        Ok(RunSpec {
            command,
            algorithms,
            q: s.q,
            reps,
            iterations,
            samples,
            lambdas,
            gamma,
            dataset: s.dataset,
            test: s.test,
            label_col: s
                .label_col
                .as_deref()
                .map_or(LabelColumn::Last, LabelColumn::parse),
            encoding: s
                .encoding
                .as_deref()
                .map_or(Ok(Encoding::None), parse_encoding)?,
            k,
            seed: s.seed.unwrap_or(0),
            budget_secs,
            max_splits: s.max_splits,
            greedy,
            out: s.out.unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    /// Stream samples available to each run.
    pub fn sample_budget(&self) -> u64 {
        self.iterations as u64 * self.samples as u64
    }
}
