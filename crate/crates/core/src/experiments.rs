//! Seeded Monte Carlo campaigns: connectivity of vertex-sampled subgraphs,
//! connectivity thresholds, merge dynamics of the packing builder, and
//! packing size across graph sizes.
//!
//! Trial `i` of a campaign seeded with `s` uses ChaCha8 seeded with `s` on
//! stream `i`, so results do not depend on how trials are scheduled.

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use statrs::statistics::{Data, OrderStatistics, Statistics};

use crate::error::{domain, Error, Result};
use crate::flow::vertex_connectivity;
use crate::generators::{clique_chain, complete, cycle, harary, sanders_graph};
use crate::graph::{induced_subgraph, is_connected_subset, Graph, NodeSet};
use crate::packing::{build_packing, BuildParams};

pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Each node independently with probability `p`.
pub fn sample_vertices<R: Rng + ?Sized>(g: &Graph, p: f64, rng: &mut R) -> Result<NodeSet> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("p must lie in [0, 1], got {p}"));
    }
    let mut s = NodeSet::new(g.n());
    for v in 0..g.n() {
        if p >= 1.0 || rng.random::<f64>() < p {
            s.insert(v);
        }
    }
    Ok(s)
}

/// Vertex connectivity of `g[s]`, 0 when fewer than two nodes survive.
pub fn sampled_connectivity(g: &Graph, s: &NodeSet) -> Result<usize> {
    if s.len() < 2 {
        return Ok(0);
    }
    let (h, _) = induced_subgraph(g, s)?;
    vertex_connectivity(&h)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub q10: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q90: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                std_dev: f64::NAN,
                min: f64::NAN,
                q10: f64::NAN,
                q25: f64::NAN,
                median: f64::NAN,
                q75: f64::NAN,
                q90: f64::NAN,
                max: f64::NAN,
            };
        }
        let mut data = Data::new(values.to_vec());
        Self {
            count,
            mean: values.mean(),
            std_dev: if count > 1 { values.std_dev() } else { 0.0 },
            min: values.min(),
            q10: data.quantile(0.1),
            q25: data.lower_quartile(),
            median: data.median(),
            q75: data.upper_quartile(),
            q90: data.quantile(0.9),
            max: values.max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectivityStats {
    pub p: f64,
    pub k: usize,
    pub values: Vec<usize>,
    pub summary: Summary,
}

/// Exact connectivity of `g[S]` over `trials` independent samples.
pub fn sampled_connectivity_experiment(g: &Graph, k: usize, p: f64, trials: usize, seed: u64) -> Result<ConnectivityStats> {
    if trials == 0 {
        return domain("need at least one trial");
    }
    let values = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let s = sample_vertices(g, p, &mut rng)?;
            sampled_connectivity(g, &s)
        })
        .collect::<Result<Vec<usize>>>()?;
    let as_f64: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    Ok(ConnectivityStats {
        p,
        k,
        summary: Summary::of(&as_f64),
        values,
    })
}

/// Wilson score interval for `successes` out of `trials` at `z = 1.96`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96_f64;
    let n = trials as f64;
    let phat = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (phat + z * z / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z * z / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Weighted isotonic (non-decreasing) regression by pool-adjacent-violators.
pub fn isotonic_fit(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (v2, w2, c2) = blocks[blocks.len() - 1];
            let (v1, w1, c1) = blocks[blocks.len() - 2];
            if v1 <= v2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let w = w1 + w2;
            let v = if w > 0.0 { (v1 * w1 + v2 * w2) / w } else { (v1 + v2) / 2.0 };
            blocks.push((v, w, c1 + c2));
        }
    }
    blocks.into_iter().flat_map(|(v, _, c)| std::iter::repeat_n(v, c)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub alpha: f64,
    pub p: f64,
    pub trials: usize,
    pub connected: usize,
    pub probability: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub smoothed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdCurve {
    pub points: Vec<ThresholdPoint>,
    /// Consecutive points never contradict monotonicity beyond their
    /// confidence intervals.
    pub isotone: bool,
    /// Smallest grid `alpha` whose empirical probability is at least 0.9.
    pub alpha_90: Option<f64>,
}

/// `p = min(1, alpha * log2(n) / sqrt(k))`.
pub fn threshold_probability(n: usize, k: usize, alpha: f64) -> f64 {
    (alpha * (n as f64).log2() / (k as f64).sqrt()).min(1.0)
}

/// Probability that `g[S]` is connected at each `p`, with all points of one
/// trial sharing the same per-node uniforms.
pub fn connectivity_curve(g: &Graph, ps: &[f64], trials: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if trials == 0 {
        return domain("need at least one trial");
    }
    if let Some(&p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return domain(format!("p must lie in [0, 1], got {p}"));
    }
    let per_trial: Vec<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let u: Vec<f64> = (0..g.n()).map(|_| rng.random::<f64>()).collect();
            ps.iter()
                .map(|&p| {
                    let s = NodeSet::from_members(g.n(), (0..g.n()).filter(|&v| p >= 1.0 || u[v] < p))
                        .expect("ids in range");
                    is_connected_subset(g, &s)
                })
                .collect()
        })
        .collect();
    Ok((0..ps.len())
        .map(|j| (per_trial.iter().filter(|r| r[j]).count(), trials))
        .collect())
}

pub fn threshold_experiment(g: &Graph, k: usize, alpha_grid: &[f64], trials: usize, seed: u64) -> Result<ThresholdCurve> {
    let ps: Vec<f64> = alpha_grid.iter().map(|&a| threshold_probability(g.n(), k, a)).collect();
    let counts = connectivity_curve(g, &ps, trials, seed)?;
    let probs: Vec<f64> = counts.iter().map(|&(c, t)| c as f64 / t as f64).collect();
    let weights: Vec<f64> = counts.iter().map(|&(_, t)| t as f64).collect();
    let smoothed = isotonic_fit(&probs, &weights);
    let points: Vec<ThresholdPoint> = (0..ps.len())
        .map(|j| {
            let (ci_low, ci_high) = wilson_interval(counts[j].0, counts[j].1);
            ThresholdPoint {
                alpha: alpha_grid[j],
                p: ps[j],
                trials: counts[j].1,
                connected: counts[j].0,
                probability: probs[j],
                ci_low,
                ci_high,
                smoothed: smoothed[j],
            }
        })
        .collect();
    let isotone = points.windows(2).all(|w| w[0].ci_low <= w[1].ci_high);
    let alpha_90 = points.iter().find(|pt| pt.probability >= 0.9).map(|pt| pt.alpha);
    Ok(ThresholdCurve {
        points,
        isotone,
        alpha_90,
    })
}

/// Sampling probability at which a chain of `n / k` cliques of size `k`
/// disconnects with probability at least one half.
pub fn chain_fragility_probability(n: usize, k: usize) -> f64 {
    ((n as f64 / (2.0 * k as f64)).log2() / (2.0 * k as f64)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MergerRun {
    pub seed: u64,
    pub t: usize,
    pub layers: usize,
    pub dominating_classes: usize,
    pub all_dominate: bool,
    pub monotone: bool,
    pub final_excess: usize,
    pub m_trace: Vec<usize>,
    /// Layers with positive excess before the step.
    pub events: usize,
    /// Of those, steps shrinking the excess to at most 5/6 of it.
    pub fast_events: usize,
    pub size: f64,
    pub valid: bool,
    /// `Some(false)` if the size exceeded the exact connectivity.
    pub within_upper_bound: Option<bool>,
    pub overlap_reduced: bool,
    pub components_at_cap: usize,
    pub components: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MergerStats {
    pub k: usize,
    pub n: usize,
    pub runs: Vec<MergerRun>,
    /// Fraction of (run, class) pairs dominating after the jump-start.
    pub domination_rate: f64,
    pub final_zero_rate: f64,
    /// Every run whose classes all dominate has non-increasing excess.
    pub monotone_when_dominating: bool,
    pub fast_merger_rate: Option<f64>,
    pub layer_events: usize,
    /// Fraction of components that found the full connector budget.
    pub abundance_rate: Option<f64>,
}

/// Per-trial seed derived from the campaign seed.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    trial_rng(seed, trial).next_u64()
}

fn merger_run(g: &Graph, k: usize, params: &BuildParams, upper_bound: Option<usize>) -> Result<MergerRun> {
    let out = build_packing(g, k, params)?;
    let a = &out.assignment;
    let (mut events, mut fast_events) = (0, 0);
    for w in a.m_trace.windows(2) {
        if w[0] > 0 {
            events += 1;
            if 6 * w[1] <= 5 * w[0] {
                fast_events += 1;
            }
        }
    }
    let size = out.packing.size();
    Ok(MergerRun {
        seed: params.seed,
        t: a.t,
        layers: a.layers,
        dominating_classes: a.dominating_after_jump_start.iter().filter(|&&d| d).count(),
        all_dominate: a.all_dominate(),
        monotone: a.merging_monotone(),
        final_excess: a.final_excess(),
        m_trace: a.m_trace.clone(),
        events,
        fast_events,
        size,
        valid: out.valid,
        within_upper_bound: upper_bound.map(|k| size <= k as f64 + crate::verify::WEIGHT_TOLERANCE),
        overlap_reduced: out.overlap_reduced,
        components_at_cap: a.layer_stats.iter().map(|s| s.components_at_cap).sum(),
        components: a.layer_stats.iter().map(|s| s.components).sum(),
    })
}

/// Runs the packing builder `trials` times and summarises the merge trace.
/// `exact_k`, when given, is checked as an upper bound on every size.
pub fn merger_trace_experiment(
    g: &Graph,
    k: usize,
    params: &BuildParams,
    trials: usize,
    exact_k: Option<usize>,
) -> Result<MergerStats> {
    if trials == 0 {
        return domain("need at least one trial");
    }
    let bound = if g.is_complete() { None } else { exact_k };
    let runs = (0..trials)
        .into_par_iter()
        .map(|i| {
            let p = BuildParams {
                seed: trial_seed(params.seed, i),
                ..params.clone()
            };
            merger_run(g, k, &p, bound)
        })
        .collect::<Result<Vec<_>>>()?;
    let class_total: usize = runs.iter().map(|r| r.t).sum();
    let dominating: usize = runs.iter().map(|r| r.dominating_classes).sum();
    let events: usize = runs.iter().map(|r| r.events).sum();
    let fast: usize = runs.iter().map(|r| r.fast_events).sum();
    let comps: usize = runs.iter().map(|r| r.components).sum();
    let at_cap: usize = runs.iter().map(|r| r.components_at_cap).sum();
    Ok(MergerStats {
        k,
        n: g.n(),
        domination_rate: dominating as f64 / class_total as f64,
        final_zero_rate: runs.iter().filter(|r| r.final_excess == 0).count() as f64 / trials as f64,
        monotone_when_dominating: runs.iter().filter(|r| r.all_dominate).all(|r| r.monotone),
        fast_merger_rate: (events > 0).then(|| fast as f64 / events as f64),
        layer_events: events,
        abundance_rate: (comps > 0).then(|| at_cap as f64 / comps as f64),
        runs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub k: usize,
    pub n: usize,
    pub trials: usize,
    pub t: usize,
    pub valid_rate: f64,
    pub upper_bound_rate: f64,
    pub size: Summary,
    /// Mean of `size / (k / log2 n)`.
    pub normalized: f64,
    /// Fraction of runs with `size >= floor_constant * k / log2 n`.
    pub above_floor_rate: f64,
    pub domination_rate: f64,
    pub final_zero_rate: f64,
    pub monotone_when_dominating: bool,
    /// Runs in which every class dominated after the jump-start.
    pub all_dominating_runs: usize,
}

/// Packing size on Harary graphs across `(k, n)` cases.
pub fn scaling_experiment(cases: &[(usize, usize)], params: &BuildParams, trials: usize, floor_constant: f64) -> Result<Vec<ScalingRow>> {
    cases
        .iter()
        .map(|&(k, n)| {
            let g = harary(k, n)?;
            let stats = merger_trace_experiment(&g, k, params, trials, Some(k))?;
            let scale = k as f64 / (n as f64).log2();
            let sizes: Vec<f64> = stats.runs.iter().map(|r| r.size).collect();
            let rate = |f: &dyn Fn(&MergerRun) -> bool| stats.runs.iter().filter(|r| f(r)).count() as f64 / trials as f64;
            Ok(ScalingRow {
                k,
                n,
                trials,
                t: stats.runs[0].t,
                valid_rate: rate(&|r| r.valid),
                upper_bound_rate: rate(&|r| r.within_upper_bound != Some(false)),
                normalized: sizes.iter().sum::<f64>() / trials as f64 / scale,
                above_floor_rate: rate(&|r| r.size >= floor_constant * scale),
                size: Summary::of(&sizes),
                domination_rate: stats.domination_rate,
                final_zero_rate: stats.final_zero_rate,
                monotone_when_dominating: stats.monotone_when_dominating,
                all_dominating_runs: stats.runs.iter().filter(|r| r.all_dominate).count(),
            })
        })
        .collect()
}

/// Key/value configuration with typed lookups.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Parses `key=value` items; later keys override earlier ones.
    pub fn parse<'a>(items: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for item in items {
            let item = item.trim();
            if item.is_empty() || item.starts_with('#') {
                continue;
            }
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("expected key=value, got {item:?}")))?;
            entries.insert(k.trim().to_string(), v.trim().trim_matches('"').to_string());
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Domain(format!("cannot parse {key}={v}"))),
        }
    }

    pub fn string_or(&self, key: &str, default: &str) -> String {
        self.entries.get(key).cloned().unwrap_or_else(|| default.to_string())
    }

    /// Comma- or space-separated list.
    pub fn list_or<T: std::str::FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split([',', ' '])
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| Error::Domain(format!("cannot parse {key} item {s:?}"))))
                .collect(),
        }
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// SHA-256 of the sorted `key=value` lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.entries {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Builds a named family instance.
pub fn family_graph(family: &str, n: usize, k: usize) -> Result<Graph> {
    match family {
        "harary" => harary(k, n),
        "clique-chain" => clique_chain(n, k),
        "sanders" => sanders_graph(k),
        "complete" => Ok(complete(n)),
        "cycle" if n >= 3 => Ok(cycle(n)),
        _ => domain(format!("unknown or unsupported family {family:?} (n = {n}, k = {k})")),
    }
}

/// One CSV row: a statistic of one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub point: String,
    pub statistic: String,
    pub value: f64,
    pub trials: usize,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub config_hash: String,
    pub version: String,
    pub rows: usize,
    pub details: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<Row>,
    pub manifest: Manifest,
}

impl ExperimentOutput {
    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Invariant(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Invariant(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
    }

    pub fn manifest_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.manifest).map_err(|e| Error::Invariant(e.to_string()))
    }

    pub fn value(&self, point: &str, statistic: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.point == point && r.statistic == statistic)
            .map(|r| r.value)
    }
}

fn row(experiment: &str, point: &str, statistic: &str, value: f64, trials: usize) -> Row {
    Row {
        experiment: experiment.into(),
        point: point.into(),
        statistic: statistic.into(),
        value,
        trials,
        ci_low: None,
        ci_high: None,
    }
}

fn rate_row(experiment: &str, point: &str, statistic: &str, successes: usize, trials: usize) -> Row {
    let (lo, hi) = wilson_interval(successes, trials);
    Row {
        ci_low: Some(lo),
        ci_high: Some(hi),
        ..row(experiment, point, statistic, if trials == 0 { f64::NAN } else { successes as f64 / trials as f64 }, trials)
    }
}

fn summary_rows(experiment: &str, point: &str, s: &Summary) -> Vec<Row> {
    [
        ("mean", s.mean),
        ("std_dev", s.std_dev),
        ("min", s.min),
        ("q10", s.q10),
        ("q25", s.q25),
        ("median", s.median),
        ("q75", s.q75),
        ("q90", s.q90),
        ("max", s.max),
    ]
    .into_iter()
    .map(|(name, v)| row(experiment, point, name, v, s.count))
    .collect()
}

fn build_params(cfg: &Config, seed: u64) -> Result<BuildParams> {
    let d = BuildParams::default();
    Ok(BuildParams {
        lambda: cfg.get_or("lambda", d.lambda)?,
        delta: cfg.get_or("delta", d.delta)?,
        p: cfg.get_or("p", d.p)?,
        seed,
        reduce_overlap: cfg.get_or("reduce_overlap", d.reduce_overlap)?,
        classes: match cfg.get_or("classes", 0usize)? {
            0 => None,
            t => Some(t),
        },
        ..d
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Invariant(e.to_string()))
}

const EXPERIMENTS: [&str; 4] = ["sampled-conn", "threshold", "merger", "scaling"];

/// Runs a named experiment. `workers` sizes the thread pool; results do not
/// depend on it.
pub fn run_experiment(name: &str, cfg: &Config, workers: Option<usize>) -> Result<ExperimentOutput> {
    if !EXPERIMENTS.contains(&name) {
        return domain(format!("unknown experiment {name:?}; expected one of {EXPERIMENTS:?}"));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Invariant(e.to_string()))?;
    pool.install(|| run_in_pool(name, cfg))
}

fn run_in_pool(name: &str, cfg: &Config) -> Result<ExperimentOutput> {
    let seed: u64 = cfg.get_or("seed", 1)?;
    let mut rows = Vec::new();
    let details = match name {
        "sampled-conn" => {
            let family = cfg.string_or("family", "clique-chain");
            let n: usize = cfg.get_or("n", 800)?;
            let k: usize = cfg.get_or("k", 20)?;
            let trials: usize = cfg.get_or("trials", 200)?;
            let ps: Vec<f64> = cfg.list_or("p", &[0.4, 0.5, 0.7])?;
            let g = family_graph(&family, n, k)?;
            let mut all = Vec::new();
            for &p in &ps {
                let stats = sampled_connectivity_experiment(&g, k, p, trials, seed)?;
                let point = format!("p={p}");
                rows.extend(summary_rows(name, &point, &stats.summary));
                let expected = k as f64 * p * p;
                rows.push(row(name, &point, "k_p2", expected, trials));
                rows.push(row(name, &point, "mean_over_k_p2", stats.summary.mean / expected, trials));
                all.push(stats);
            }
            to_json(&all)?
        }
        "threshold" => {
            let family = cfg.string_or("family", "harary");
            let n: usize = cfg.get_or("n", 4096)?;
            let k: usize = cfg.get_or("k", 64)?;
            let trials: usize = cfg.get_or("trials", 200)?;
            let g = family_graph(&family, n, k)?;
            let default_grid: Vec<f64> = (1..=13).map(|i| f64::from(i) / 20.0).collect();
            let alphas: Vec<f64> = cfg.list_or("alphas", &default_grid)?;
            let curve = threshold_experiment(&g, k, &alphas, trials, seed)?;
            for pt in &curve.points {
                let point = format!("alpha={}", pt.alpha);
                rows.push(row(name, &point, "p", pt.p, pt.trials));
                rows.push(rate_row(name, &point, "connected", pt.connected, pt.trials));
                rows.push(row(name, &point, "smoothed", pt.smoothed, pt.trials));
            }
            rows.push(row(name, "curve", "isotone", f64::from(u8::from(curve.isotone)), trials));
            rows.push(row(name, "curve", "alpha_90", curve.alpha_90.unwrap_or(f64::NAN), trials));
            let mut extra = serde_json::Map::new();
            extra.insert("curve".into(), to_json(&curve)?);
            if family == "clique-chain" {
                let p = chain_fragility_probability(n, k);
                let (connected, t) = connectivity_curve(&g, &[p], trials, seed ^ 0x6f62)?[0];
                let point = format!("fragile_p={p}");
                rows.push(rate_row(name, &point, "disconnected", t - connected, t));
                extra.insert("fragile_p".into(), to_json(&p)?);
                extra.insert("disconnected".into(), to_json(&(t - connected))?);
            }
            serde_json::Value::Object(extra)
        }
        "merger" => {
            let family = cfg.string_or("family", "harary");
            let n: usize = cfg.get_or("n", 1024)?;
            let k: usize = cfg.get_or("k", 32)?;
            let trials: usize = cfg.get_or("trials", 50)?;
            let g = family_graph(&family, n, k)?;
            let params = build_params(cfg, seed)?;
            let exact = cfg.get_or("exact_k", k)?;
            let stats = merger_trace_experiment(&g, k, &params, trials, Some(exact))?;
            let point = format!("k={k},n={n},p={}", params.p);
            let count = |f: &dyn Fn(&MergerRun) -> bool| stats.runs.iter().filter(|r| f(r)).count();
            let classes: usize = stats.runs.iter().map(|r| r.t).sum();
            let dominating: usize = stats.runs.iter().map(|r| r.dominating_classes).sum();
            rows.push(rate_row(name, &point, "domination", dominating, classes));
            rows.push(rate_row(name, &point, "final_zero", count(&|r| r.final_excess == 0), trials));
            rows.push(rate_row(
                name,
                &point,
                "monotone_given_domination",
                count(&|r| r.all_dominate && r.monotone),
                count(&|r| r.all_dominate),
            ));
            let fast: usize = stats.runs.iter().map(|r| r.fast_events).sum();
            rows.push(rate_row(name, &point, "fast_merger", fast, stats.layer_events));
            rows.push(rate_row(name, &point, "valid", count(&|r| r.valid), trials));
            let sizes: Vec<f64> = stats.runs.iter().map(|r| r.size).collect();
            rows.extend(summary_rows(name, &format!("{point},size"), &Summary::of(&sizes)));
            let max_layers = stats.runs.iter().map(|r| r.m_trace.len()).max().unwrap_or(0);
            for step in 0..max_layers {
                let ms: Vec<f64> = stats.runs.iter().filter_map(|r| r.m_trace.get(step)).map(|&m| m as f64).collect();
                rows.push(row(name, &format!("{point},step={step}"), "mean_excess", ms.iter().mean(), ms.len()));
            }
            to_json(&stats)?
        }
        "scaling" => {
            let cases: Vec<String> = cfg.list_or("cases", &["16x256".to_string(), "32x1024".into(), "64x4096".into()])?;
            let cases: Vec<(usize, usize)> = cases
                .iter()
                .map(|c| {
                    let (k, n) = c
                        .split_once('x')
                        .ok_or_else(|| Error::Domain(format!("case {c:?} is not KxN")))?;
                    let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::Domain(format!("bad case {c:?}")));
                    Ok((parse(k)?, parse(n)?))
                })
                .collect::<Result<_>>()?;
            let trials: usize = cfg.get_or("trials", 50)?;
            let floor: f64 = cfg.get_or("floor", 0.05)?;
            let params = build_params(cfg, seed)?;
            let table = scaling_experiment(&cases, &params, trials, floor)?;
            for r in &table {
                let point = format!("k={},n={}", r.k, r.n);
                rows.extend(summary_rows(name, &format!("{point},size"), &r.size));
                rows.push(row(name, &point, "t", r.t as f64, trials));
                rows.push(row(name, &point, "normalized_size", r.normalized, trials));
                rows.push(row(name, &point, "valid_rate", r.valid_rate, trials));
                rows.push(row(name, &point, "upper_bound_rate", r.upper_bound_rate, trials));
                rows.push(row(name, &point, "above_floor_rate", r.above_floor_rate, trials));
                rows.push(row(name, &point, "domination_rate", r.domination_rate, trials));
                rows.push(row(name, &point, "final_zero_rate", r.final_zero_rate, trials));
                rows.push(row(
                    name,
                    &point,
                    "monotone_when_dominating",
                    f64::from(u8::from(r.monotone_when_dominating)),
                    r.all_dominating_runs,
                ));
            }
            let norms: Vec<f64> = table.iter().map(|r| r.normalized).collect();
            let spread = norms.iter().copied().fold(f64::MIN, f64::max) / norms.iter().copied().fold(f64::MAX, f64::min);
            rows.push(row(name, "trend", "max_over_min_normalized", spread, trials));
            to_json(&table)?
        }
        _ => unreachable!("checked above"),
    };
    let manifest = Manifest {
        experiment: name.to_string(),
        seed,
        config: cfg.entries().clone(),
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rows: rows.len(),
        details,
    };
    Ok(ExperimentOutput { rows, manifest })
}
