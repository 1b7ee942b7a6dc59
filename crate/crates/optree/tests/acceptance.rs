//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::Path;
use std::time::Instant;

use optree::config::{load_config, Command, Settings};
use optree::runner::{plan, run_all, write_trace};
use optree_core::baseline::{greedy_fit, GreedyConfig};
use optree_core::data::AttributeSchema;
use optree_core::dtree::{split, NodeStore, RegionId, TreeState};
use optree_core::eval::{is_perfect_xor, TreeShape};
use optree_core::mcts::{fit, ExperimentConfig, SearchTree, Variant};
use optree_core::posterior::{
    beta_moments, clark_max, fold_max, thompson_select, BetaParams, ChildPosterior, Gaussian,
};
use optree_core::stream::{xor_stream, StreamSource};
use optree_core::SeededRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, ok: bool, what: &str, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!(
            "criterion {id} {} {what}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

fn xor_cfg(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        iterations: 400,
        samples_per_iteration: 100,
        lambda: 0.05,
        gamma: 0.75,
        variant: Variant::Fast,
        seed,
        max_splits: None,
        budget_ms: None,
    }
}

fn fast_perfect(q: usize) -> usize {
    (0..20u64)
        .into_par_iter()
        .filter(|&seed| {
            let r = fit(xor_stream(q, seed).unwrap(), &xor_cfg(seed)).unwrap();
            is_perfect_xor(r.store(), &r.tree)
        })
        .count()
}

fn greedy_perfect(q: usize) -> usize {
    (0..20u64)
        .into_par_iter()
        .filter(|&seed| {
            let r = greedy_fit(
                xor_stream(q, seed).unwrap(),
                &GreedyConfig::default(),
                40_000,
            )
            .unwrap();
            is_perfect_xor(&r.store, &r.tree)
        })
        .count()
}

fn synthetic(rep: &mut Report) {
    let f5 = fast_perfect(5);
    let f20 = fast_perfect(20);
    rep.line(
        1,
        f5 >= 18 && f20 >= 16,
        "fast XOR perfect convergence (q=5 >= 18/20, q=20 >= 16/20)",
        format!("q=5 {f5}/20, q=20 {f20}/20"),
    );
    let g20 = greedy_perfect(20);
    let g100 = greedy_perfect(100);
    rep.line(
        2,
        g20 < f20 && g100 <= 4,
        "greedy at 40000 samples (q=20 below fast, q=100 <= 4/20)",
        format!("greedy q=20 {g20}/20 vs fast {f20}/20, greedy q=100 {g100}/20"),
    );
}

fn monk1(rep: &mut Report) {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/monk1_train.csv");
    let out = std::env::temp_dir().join("optree-acceptance-monk1");
    let flags = Settings {
        algo: Some(vec!["fast".into()]),
        dataset: Some(data),
        label_col: Some("class".into()),
        encoding: Some("drop_last".into()),
        iterations: Some(1000),
        samples: Some(100),
        lambda: Some(vec![0.01]),
        reps: Some(5),
        budget_secs: Some(600.0),
        out: Some(out),
        ..Settings::default()
    };
    let spec = load_config(Command::Fit, None, flags).unwrap();
    let outputs = run_all(&spec, &plan(&spec).unwrap()).unwrap();
    let hits = outputs
        .iter()
        .filter(|o| {
            o.row.leaves == 8 && o.row.train_acc == Some(1.0) && o.row.elapsed_ms <= 600_000
        })
        .count();
    let detail: Vec<String> = outputs
        .iter()
        .map(|o| {
            format!(
                "seed {}: {} leaves, train {:.4}, {} ms",
                o.row.seed,
                o.row.leaves,
                o.row.train_acc.unwrap(),
                o.row.elapsed_ms
            )
        })
        .collect();
    rep.line(
        3,
        hits >= 3,
        "MONK1 drop_last 8-leaf optimum (>= 3/5 seeds, 600 s budget)",
        format!("{hits}/5 [{}]", detail.join("; ")),
    );
}

/// Mean, variance and their standard errors of the max of `gs` from `n` draws.
fn mc_moments(gs: &[Gaussian], n: u64, seed: u64, center: f64) -> (f64, f64, f64, f64) {
    let mut rng = SeededRng::seed_from_u64(seed);
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let m = gs
            .iter()
            .map(|g| g.sample(&mut rng))
            .fold(f64::NEG_INFINITY, f64::max);
        let d = m - center;
        let d2 = d * d;
        s1 += d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    let nf = n as f64;
    let (e1, e2, e3, e4) = (s1 / nf, s2 / nf, s3 / nf, s4 / nf);
    let var = e2 - e1 * e1;
    let m4 = e4 - 4.0 * e3 * e1 + 6.0 * e2 * e1 * e1 - 3.0 * e1.powi(4);
    (
        center + e1,
        var,
        (var / nf).sqrt(),
        ((m4 - var * var) / nf).sqrt(),
    )
}

fn random_gaussian(rng: &mut SeededRng) -> Gaussian {
    Gaussian::new(rng.random_range(-1.0..=1.0), rng.random_range(1e-4..=1.0))
}

fn clark(rep: &mut Report) {
    let mut rng = SeededRng::seed_from_u64(2024);
    let pairs: Vec<(Gaussian, Gaussian)> = (0..50)
        .map(|_| (random_gaussian(&mut rng), random_gaussian(&mut rng)))
        .collect();
    let results: Vec<(f64, f64)> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let c = clark_max(a, b);
            let (mean, var, se_mean, se_var) =
                mc_moments(&[a, b], 10_000_000, 1000 + i as u64, c.mu);
            ((c.mu - mean).abs() / se_mean, (c.var - var).abs() / se_var)
        })
        .collect();
    let worst_mu = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_var = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let pair_ok = worst_mu <= 3.0 && worst_var <= 3.0;

    let sets: Vec<Vec<Gaussian>> = (0..30)
        .map(|i| (0..3 + i % 3).map(|_| random_gaussian(&mut rng)).collect())
        .collect();
    let errs: Vec<f64> = sets
        .par_iter()
        .enumerate()
        .map(|(i, gs)| {
            let f = fold_max(gs).unwrap();
            let (mean, ..) = mc_moments(gs, 1_000_000, 5000 + i as u64, f.mu);
            (f.mu - mean).abs()
        })
        .collect();
    let worst_fold = errs.iter().copied().fold(0.0, f64::max);
    rep.line(
        4,
        pair_ok && worst_fold <= 0.02,
        "Clark moments vs 1e7-sample Monte Carlo (3 SE), fold of 3-5 within 0.02",
        format!(
            "worst |mean err| {worst_mu:.2} SE, worst |var err| {worst_var:.2} SE over 50 pairs; worst fold mean err {worst_fold:.4} over 30 sets"
        ),
    );
}

fn variance_bounds(rep: &mut Report) {
    let mut violations = 0;
    let mut checked = 0;
    for n in 0..=200u64 {
        let nf = n as f64;
        let lo = (1.0 + nf) / ((2.0 + nf) * (2.0 + nf) * (3.0 + nf));
        let hi = 1.0 / (4.0 * (nf + 3.0));
        for c in 0..=n {
            let var = beta_moments(BetaParams::from_counts(c, n)).var;
            checked += 1;
            if !(lo <= var && var <= hi) {
                violations += 1;
            }
        }
    }
    rep.line(
        5,
        violations == 0,
        "Beta posterior variance bounds for n <= 200 (exact)",
        format!("{violations} violations in {checked} (n, c) pairs"),
    );
}

fn chain_rule(rep: &mut Report) {
    let mut store = NodeStore::new(AttributeSchema::binary(3));
    let t = TreeState::root(&store);
    let t = split(&mut store, &t, RegionId::ROOT, 0).unwrap();
    let left = t.nodes()[1].region;
    let t = split(&mut store, &t, left, 1).unwrap();
    let mut stream = xor_stream(3, 77).unwrap();
    for _ in 0..100_000 {
        let x = stream.next_instance().unwrap();
        t.observe(&mut store, &x);
    }
    let leaf = t
        .leaves()
        .into_iter()
        .find(|&l| store.key(l).constraints() == [(0, 0), (1, 0)])
        .unwrap();
    let p = t.p_hat(&store, leaf).unwrap();

    let mut s = SearchTree::new(AttributeSchema::binary(5), 0.75);
    let mut stream = xor_stream(5, 78).unwrap();
    let mut rng = SeededRng::seed_from_u64(79);
    let mut worst: f64 = 0.0;
    for step in 0..300 {
        let node = s.ids().nth(rng.random_range(0..s.nodes().len())).unwrap();
        s.simulate(node, &mut stream, 1 + step % 13, 0.75).unwrap();
        if !s.node(node).is_fully_expanded() {
            s.expand(node, 0.75, Some(5)).unwrap();
        }
        for n in s.nodes() {
            let total: f64 = n
                .state()
                .leaf_probabilities(s.store())
                .iter()
                .map(|(_, p)| p)
                .sum();
            worst = worst.max((total - 1.0).abs());
        }
    }
    rep.line(
        6,
        (p - 0.25).abs() <= 0.02 && worst <= 1e-9,
        "chain-rule estimator (|p - 0.25| <= 0.02, sums 1 +- 1e-9)",
        format!(
            "p_hat {p:.4} after 1e5 samples; worst |sum - 1| {worst:.1e} over {} search nodes",
            s.nodes().len()
        ),
    );
}

fn thompson(rep: &mut Report) {
    let mut rng = SeededRng::seed_from_u64(31);
    let same = [
        ChildPosterior::split(Gaussian::new(0.7, 0.004)),
        ChildPosterior::split(Gaussian::new(0.7, 0.004)),
    ];
    let n = 100_000;
    let first = (0..n)
        .filter(|_| thompson_select(&same, 0.05, &mut rng).unwrap() == 0)
        .count();
    let freq = first as f64 / n as f64;
    let (va, vb) = (0.003, 0.001);
    let gap = 8.0 * f64::sqrt(va + vb);
    let apart = [
        ChildPosterior::split(Gaussian::new(0.2, va)),
        ChildPosterior::split(Gaussian::new(0.2 + gap, vb)),
    ];
    let wins = (0..10_000)
        .filter(|_| thompson_select(&apart, 0.05, &mut rng).unwrap() == 1)
        .count();
    rep.line(
        7,
        (freq - 0.5).abs() <= 0.01 && wins == 10_000,
        "Thompson symmetry (0.5 +- 0.01) and 8-sd separation (10^4/10^4)",
        format!("identical pair: {freq:.4}; separated: {wins}/10000"),
    );
}

fn root_value(rep: &mut Report) {
    let rows: Vec<(f64, f64, f64)> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let r = fit(xor_stream(3, seed).unwrap(), &xor_cfg(seed)).unwrap();
            let last = r.trace.last().unwrap();
            (last.root_mu, last.root_var, r.trace[39].root_var)
        })
        .collect();
    let near = rows.iter().filter(|r| (r.0 - 0.85).abs() <= 0.05).count();
    let shrank = rows.iter().filter(|r| r.1 < r.2).count();
    let mus: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.0)).collect();
    rep.line(
        8,
        near >= 18 && shrank == 20,
        "XOR q=3 root posterior near 1 - 3 lambda (>= 18/20), variance decays (20/20)",
        format!(
            "within 0.05: {near}/20, var(400) < var(40): {shrank}/20, mu [{}]",
            mus.join(" ")
        ),
    );
}

fn trace_bytes(trace: &[optree_core::mcts::TraceRow]) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    write_trace(&path, trace).unwrap();
    std::fs::read(path).unwrap()
}

fn determinism(rep: &mut Report) {
    let mut same = 0;
    let mut total = 0;
    for (q, variant, seed) in [
        (5, Variant::Fast, 4),
        (5, Variant::Tsdt, 4),
        (12, Variant::Fast, 9),
    ] {
        let cfg = ExperimentConfig {
            variant,
            ..xor_cfg(seed)
        };
        let a = fit(xor_stream(q, seed).unwrap(), &cfg).unwrap();
        let b = fit(xor_stream(q, seed).unwrap(), &cfg).unwrap();
        total += 1;
        if trace_bytes(&a.trace) == trace_bytes(&b.trace)
            && a.tree == b.tree
            && TreeShape::of(a.store(), &a.tree) == TreeShape::of(b.store(), &b.tree)
        {
            same += 1;
        }
    }
    rep.line(
        9,
        same == total,
        "determinism (byte-identical traces, identical trees)",
        format!("{same}/{total} configurations reproduced"),
    );
}

fn main() {
    let start = Instant::now();
    let mut rep = Report { failed: 0 };
    synthetic(&mut rep);
    monk1(&mut rep);
    clark(&mut rep);
    variance_bounds(&mut rep);
    chain_rule(&mut rep);
    thompson(&mut rep);
    root_value(&mut rep);
    determinism(&mut rep);
    println!(
        "acceptance: {} of 9 criteria passed in {:.1} s",
        9 - rep.failed,
        start.elapsed().as_secs_f64()
    );
    if rep.failed > 0 {
        std::process::exit(1);
    }
}
