//! Executes resolved [`RunSpec`]s and writes their artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use optree_core::baseline::greedy_fit;
use optree_core::data::{kfold, one_hot_encode, Dataset, Instance};
use optree_core::dtree::{NodeStore, TreeState};
use optree_core::eval::{evaluate, is_perfect_xor};
use optree_core::mcts::{fit_with_clock, Clock, ExperimentConfig, TraceRow};
use optree_core::stream::{replay_stream, xor_stream, StreamSource};
use rayon::prelude::*;

use crate::config::{Algorithm, Command, RunSpec};
use crate::csvio::parse_csv;
use crate::error::{Error, Result};
use crate::export::{render_dot, render_text, SavedTree};

/// Fresh XOR samples used to score synthetic runs.
pub const XOR_HOLDOUT: usize = 10_000;

#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed_ms(&self) -> u64 {
        self.0.elapsed().as_millis() as u64
    }
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResultRow {
    pub algo: &'static str,
    pub variant: &'static str,
    pub dataset: String,
    pub encoding: &'static str,
    pub lambda: f64,
    pub seed: u64,
    pub fold: Option<usize>,
    #[serde(rename = "M")]
    pub iterations: usize,
    #[serde(rename = "m")]
    pub samples: usize,
    pub gamma: f64,
    pub leaves: usize,
    pub splits: usize,
    pub train_acc: Option<f64>,
    pub test_acc: Option<f64>,
    pub perfect: Option<bool>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone)]
pub enum Source {
    Xor {
        q: usize,
    },
    Data {
        name: String,
        train: Arc<Dataset>,
        test: Option<Arc<Dataset>>,
    },
}

#[derive(Debug, Clone)]
pub struct Job {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub seed: u64,
    pub fold: Option<usize>,
    pub source: Source,
}

impl Job {
    pub fn name(&self) -> String {
        let mut s = format!("{}_{}", self.algorithm.name(), self.algorithm.variant());
        match &self.source {
            Source::Xor { q } => s += &format!("_q{q}"),
            Source::Data { name, .. } => s += &format!("_{name}"),
        }
        s += &format!("_l{}", self.lambda);
        if let Some(f) = self.fold {
            s += &format!("_f{f}");
        }
        s + &format!("_s{}", self.seed)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub name: String,
    pub row: ResultRow,
    pub trace: Option<Vec<TraceRow>>,
    pub tree: SavedTree,
}

fn fit_tree<S: StreamSource>(
    spec: &RunSpec,
    job: &Job,
    stream: S,
) -> Result<(NodeStore, TreeState, Option<Vec<TraceRow>>)> {
    match job.algorithm {
        Algorithm::Mcts(variant) => {
            let cfg = ExperimentConfig {
                iterations: spec.iterations,
                samples_per_iteration: spec.samples,
                lambda: job.lambda,
                gamma: spec.gamma,
                variant,
                seed: job.seed,
                max_splits: spec.max_splits,
                budget_ms: spec.budget_secs.map(|s| (s * 1000.0) as u64),
            };
            let res = fit_with_clock(stream, &cfg, &WallClock::start())?;
            Ok((res.search.store().clone(), res.tree, Some(res.trace)))
        }
        Algorithm::Greedy => {
            let res = greedy_fit(stream, &spec.greedy, spec.sample_budget())?;
            Ok((res.store, res.tree, None))
        }
    }
}

pub fn run_job(spec: &RunSpec, job: &Job) -> Result<RunOutput> {
    let clock = WallClock::start();
    let (store, tree, trace, train_acc, test_acc, perfect, dataset) = match &job.source {
        Source::Xor { q } => {
            let stream = xor_stream(*q, job.seed)?;
            let (store, tree, trace) = fit_tree(spec, job, stream)?;
            let mut holdout = xor_stream(*q, !job.seed)?;
            let rows = (0..XOR_HOLDOUT)
                .map(|_| holdout.next_instance())
                .collect::<std::result::Result<Vec<Instance>, _>>()?;
            let test = Dataset::new(holdout.schema().clone(), rows)?;
            let acc = evaluate(&store, &tree, &test, job.lambda)?.accuracy;
            let perfect = is_perfect_xor(&store, &tree);
            (
                store,
                tree,
                trace,
                None,
                Some(acc),
                Some(perfect),
                format!("xor_q{q}"),
            )
        }
        Source::Data { name, train, test } => {
            let stream = replay_stream((**train).clone(), job.seed, true)?;
            let (store, tree, trace) = fit_tree(spec, job, stream)?;
            let train_acc = evaluate(&store, &tree, train, job.lambda)?.accuracy;
            let test_acc = test
                .as_ref()
                .map(|t| evaluate(&store, &tree, t, job.lambda).map(|m| m.accuracy))
                .transpose()?;
            (
                store,
                tree,
                trace,
                Some(train_acc),
                test_acc,
                None,
                name.clone(),
            )
        }
    };
    let row = ResultRow {
        algo: job.algorithm.name(),
        variant: job.algorithm.variant(),
        dataset,
        encoding: spec.encoding.as_str(),
        lambda: job.lambda,
        seed: job.seed,
        fold: job.fold,
        iterations: spec.iterations,
        samples: spec.samples,
        gamma: spec.gamma,
        leaves: tree.num_leaves(),
        splits: tree.splits(),
        train_acc,
        test_acc,
        perfect,
        elapsed_ms: clock.elapsed_ms(),
    };
    Ok(RunOutput {
        name: job.name(),
        row,
        trace,
        tree: SavedTree::from_tree(&store, &tree),
    })
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into())
}

/// Loads and encodes the training set and the optional test set.
fn load_data(spec: &RunSpec) -> Result<(String, Dataset, Option<Dataset>)> {
    let path = spec
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Config("dataset: required".into()))?;
    let train = parse_csv(path, &spec.label_col, None)?;
    let test = spec
        .test
        .as_ref()
        .map(|p| parse_csv(p, &spec.label_col, Some(&train.categories)))
        .transpose()?;
    let train_enc = one_hot_encode(&train.dataset, spec.encoding)?;
    let test_enc = test
        .map(|t| one_hot_encode(&t.dataset, spec.encoding))
        .transpose()?;
    Ok((dataset_name(path), train_enc, test_enc))
}

/// Expands the spec into independent jobs, in output order.
pub fn plan(spec: &RunSpec) -> Result<Vec<Job>> {
    let mut jobs = Vec::new();
    let mut push = |source: &Source, seed: u64, fold: Option<usize>| {
        for &algorithm in &spec.algorithms {
            for &lambda in &spec.lambdas {
                jobs.push(Job {
                    algorithm,
                    lambda,
                    seed,
                    fold,
                    source: source.clone(),
                });
            }
        }
    };
    match spec.command {
        Command::Synth => {
            let q = spec
                .q
                .ok_or_else(|| Error::Config("q: required for synth".into()))?;
            for r in 0..spec.reps as u64 {
                push(&Source::Xor { q }, spec.seed + r, None);
            }
        }
        Command::Fit => {
            let (name, train, test) = load_data(spec)?;
            let source = Source::Data {
                name,
                train: Arc::new(train),
                test: test.map(Arc::new),
            };
            for r in 0..spec.reps as u64 {
                push(&source, spec.seed + r, None);
            }
        }
        Command::Crossval => {
            let (name, data, _) = load_data(spec)?;
            for r in 0..spec.reps as u64 {
                let seed = spec.seed + r;
                for (f, (train, test)) in kfold(&data, spec.k, seed)?.into_iter().enumerate() {
                    let source = Source::Data {
                        name: name.clone(),
                        train: Arc::new(train),
                        test: Some(Arc::new(test)),
                    };
                    push(&source, seed, Some(f));
                }
            }
        }
    }
    Ok(jobs)
}

/// Runs every job in parallel; outputs keep the order of `jobs`.
pub fn run_all(spec: &RunSpec, jobs: &[Job]) -> Result<Vec<RunOutput>> {
    jobs.par_iter().map(|j| run_job(spec, j)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algo: &'static str,
    pub variant: &'static str,
    pub dataset: String,
    pub lambda: f64,
    pub runs: usize,
    /// Only for synthetic runs.
    pub perfect: Option<usize>,
    pub mean_leaves: f64,
    pub mean_train_acc: Option<f64>,
    pub mean_test_acc: Option<f64>,
    pub mean_elapsed_ms: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

/// Aggregates rows per (algorithm, variant, dataset, lambda).
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for row in rows {
        let same = |s: &&SummaryRow| {
            s.algo == row.algo
                && s.variant == row.variant
                && s.dataset == row.dataset
                && s.lambda == row.lambda
        };
        if out.iter().any(|s| same(&s)) {
            continue;
        }
        let group: Vec<&ResultRow> = rows
            .iter()
            .filter(|r| {
                r.algo == row.algo
                    && r.variant == row.variant
                    && r.dataset == row.dataset
                    && r.lambda == row.lambda
            })
            .collect();
        out.push(SummaryRow {
            algo: row.algo,
            variant: row.variant,
            dataset: row.dataset.clone(),
            lambda: row.lambda,
            runs: group.len(),
            perfect: group
                .iter()
                .any(|r| r.perfect.is_some())
                .then(|| group.iter().filter(|r| r.perfect == Some(true)).count()),
            mean_leaves: mean(group.iter().map(|r| r.leaves as f64)).unwrap_or(0.0),
            mean_train_acc: mean(group.iter().filter_map(|r| r.train_acc)),
            mean_test_acc: mean(group.iter().filter_map(|r| r.test_acc)),
            mean_elapsed_ms: mean(group.iter().map(|r| r.elapsed_ms as f64)).unwrap_or(0.0),
        });
    }
    out
}

impl SummaryRow {
    pub fn line(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        format!(
            "{} {} {} lambda={} runs={}{} leaves={:.2} train_acc={} test_acc={} elapsed_ms={:.0}",
            self.algo,
            self.variant,
            self.dataset,
            self.lambda,
            self.runs,
            self.perfect
                .map_or(String::new(), |p| format!(" perfect={p}/{}", self.runs)),
            self.mean_leaves,
            opt(self.mean_train_acc),
            opt(self.mean_test_acc),
            self.mean_elapsed_ms
        )
    }
}

/// Crossval check: on each fold, the largest lambda should not give more
/// leaves than the smallest.
pub fn lambda_sanity(rows: &[ResultRow]) -> Vec<(String, bool)> {
    let (Some(hi), Some(lo)) = (
        rows.iter().map(|r| r.lambda).reduce(f64::max),
        rows.iter().map(|r| r.lambda).reduce(f64::min),
    ) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for a in rows.iter().filter(|r| r.lambda == hi) {
        if let Some(b) = rows.iter().find(|b| {
            b.lambda == lo
                && b.algo == a.algo
                && b.variant == a.variant
                && b.seed == a.seed
                && b.fold == a.fold
        }) {
            let key = format!(
                "{}_{} seed={} fold={}: {} leaves at lambda={}, {} at lambda={}",
                a.algo,
                a.variant,
                a.seed,
                a.fold.map_or("-".into(), |f| f.to_string()),
                a.leaves,
                hi,
                b.leaves,
                lo
            );
            out.push((key, a.leaves <= b.leaves));
        }
    }
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.into(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.into(),
        source,
    }
}

pub fn write_trace(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record([
        "iteration",
        "root_mu",
        "root_var",
        "episode_depth",
        "samples_total",
        "elapsed_ms",
    ])
    .map_err(csv_err(path))?;
    for t in trace {
        w.write_record([
            t.iteration.to_string(),
            t.root_mu.to_string(),
            t.root_var.to_string(),
            t.episode_depth.to_string(),
            t.samples_total.to_string(),
            t.elapsed_ms.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_tree(dir: &Path, stem: &str, tree: &SavedTree) -> Result<()> {
    tree.save(&dir.join(format!("{stem}.json")))?;
    let txt = dir.join(format!("{stem}.txt"));
    fs::write(&txt, render_text(tree)).map_err(io_err(&txt))?;
    let dot = dir.join(format!("{stem}.dot"));
    fs::write(&dot, render_dot(tree)).map_err(io_err(&dot))
}

/// Writes `results.csv`, `summary.txt`, per-run traces and trees.
pub fn write_outputs(dir: &Path, outputs: &[RunOutput]) -> Result<Vec<SummaryRow>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let results = dir.join("results.csv");
    let mut w = csv::Writer::from_path(&results).map_err(csv_err(&results))?;
    for o in outputs {
        w.serialize(&o.row).map_err(csv_err(&results))?;
    }
    w.flush().map_err(io_err(&results))?;
    for o in outputs {
        if let Some(trace) = &o.trace {
            write_trace(&dir.join(format!("trace_{}.csv", o.name)), trace)?;
        }
        write_tree(dir, &format!("tree_{}", o.name), &o.tree)?;
    }
    let rows: Vec<ResultRow> = outputs.iter().map(|o| o.row.clone()).collect();
    let summary = summarize(&rows);
    let path = dir.join("summary.txt");
    let text: String = summary.iter().map(|s| s.line() + "\n").collect();
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(summary)
}

/// Plans, runs and writes one command. Returns the lines to print.
pub fn execute(spec: &RunSpec) -> Result<Vec<String>> {
    let jobs = plan(spec)?;
    let outputs = run_all(spec, &jobs)?;
    let summary = write_outputs(&spec.out, &outputs)?;
    let mut lines: Vec<String> = summary.iter().map(SummaryRow::line).collect();
    if spec.command == Command::Crossval && spec.lambdas.len() > 1 {
        let rows: Vec<ResultRow> = outputs.iter().map(|o| o.row.clone()).collect();
        let checks = lambda_sanity(&rows);
        let path = spec.out.join("lambda_sanity.txt");
        let text: String = checks
            .iter()
            .map(|(k, ok)| format!("{} {k}\n", if *ok { "ok" } else { "NOT-MONOTONE" }))
            .collect();
        fs::write(&path, text).map_err(io_err(&path))?;
        let bad = checks.iter().filter(|(_, ok)| !ok).count();
        lines.push(format!(
            "lambda sanity: {}/{} folds monotone",
            checks.len() - bad,
            checks.len()
        ));
    }
    Ok(lines)
}

/// `export-tree`: renders a saved JSON tree as text and DOT next to `out`.
pub fn export_tree(input: &Path, out: Option<&Path>) -> Result<(PathBuf, PathBuf)> {
    let tree = SavedTree::load(input)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| input.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let stem = dataset_name(input);
    let txt = dir.join(format!("{stem}.txt"));
    let dot = dir.join(format!("{stem}.dot"));
    fs::write(&txt, render_text(&tree)).map_err(io_err(&txt))?;
    fs::write(&dot, render_dot(&tree)).map_err(io_err(&dot))?;
    Ok((txt, dot))
}
