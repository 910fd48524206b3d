//! Sensitivity sweeps over budget, distance, friend count and weight skew.
//!
//! An [`ExperimentSpec`] is read from `key = value` lines:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `graph` | `synthetic` or `file:<path>` | `synthetic` |
//! | `undirected` | expand file edges to both directions | `false` |
//! | `nodes`, `avg_degree` | synthetic graph size | `10000`, `5` |
//! | `alpha`, `ranks`, `w_max` | Zipf weight grid | `1`, `10`, `0.9` |
//! | `sweep` | `budget`, `distance`, `friend_count` or `alpha` | required |
//! | `values` | comma-separated sweep values | required |
//! | `pairs_per_point` | sampled `(s, t)` pairs per value | `20` |
//! | `seed` | master seed | `0` |
//! | `algorithms` | comma-separated planner names | `rg,sitina` |
//! | `budget`, `distance` | fixed when not swept | `10`, `4` |
//! | `friend_band` | relative width of the friend-count band | `0.2` |
//! | `homophily` | `none`, `constant:<h>` or `zipf` | `none` |
//! | `theta` | path probability threshold | `0` |
//!
//! Text from `#` to the end of a line is a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{BenchError, GraphError};
use crate::graph::{
    bfs_from, generate_synthetic, load_edge_list, FriendSet, HomophilyModel, NodeId, SocialGraph,
    ZipfWeightConfig,
};
use crate::miia::{build_miia, Arborescence, TreeBuilder};
use crate::planner::{backtrack, run_planner, sitina_tables, Algorithm, PlanRequest};

/// Attempts allowed before [`sample_pair`] gives up.
pub const SAMPLE_RETRIES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    File {
        path: PathBuf,
        undirected: bool,
    },
    Synthetic {
        nodes: usize,
        avg_degree: f64,
        alpha: f64,
        ranks: usize,
        w_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Budget,
    Distance,
    FriendCount,
    Alpha,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Budget => "budget",
            SweepVar::Distance => "distance",
            SweepVar::FriendCount => "friend_count",
            SweepVar::Alpha => "alpha",
        }
    }
}

impl std::str::FromStr for SweepVar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "budget" => Ok(SweepVar::Budget),
            "distance" => Ok(SweepVar::Distance),
            "friend_count" => Ok(SweepVar::FriendCount),
            "alpha" => Ok(SweepVar::Alpha),
            other => Err(format!("unknown sweep variable {other:?}")),
        }
    }
}

/// Homophily probabilities fed to the tree builder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchHomophily {
    None,
    Constant(f64),
    /// One draw per node from the same rank grid and skew as the edges.
    Zipf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub graph: GraphSource,
    pub sweep: SweepVar,
    pub values: Vec<f64>,
    pub pairs_per_point: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub budget: usize,
    pub distance: usize,
    pub friend_band: f64,
    pub homophily: BenchHomophily,
    pub theta: f64,
}

impl ExperimentSpec {
    /// A synthetic-graph experiment with default settings.
    pub fn synthetic(sweep: SweepVar, values: Vec<f64>) -> Self {
        ExperimentSpec {
            graph: GraphSource::Synthetic {
                nodes: 10_000,
                avg_degree: 5.0,
                alpha: 1.0,
                ranks: 10,
                w_max: 0.9,
            },
            sweep,
            values,
            pairs_per_point: 20,
            seed: 0,
            algorithms: vec![Algorithm::Rg, Algorithm::Sitina],
            budget: 10,
            distance: 4,
            friend_band: 0.2,
            homophily: BenchHomophily::None,
            theta: 0.0,
        }
    }

    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(BenchError::Spec {
                    line: i + 1,
                    reason: "expected key = value".into(),
                });
            };
            let key = k.trim().to_string();
            if kv
                .insert(key.clone(), (i + 1, v.trim().to_string()))
                .is_some()
            {
                return Err(BenchError::Spec {
                    line: i + 1,
                    reason: format!("duplicate key {key:?}"),
                });
            }
        }

        fn take<T: std::str::FromStr>(
            kv: &mut BTreeMap<String, (usize, String)>,
            key: &str,
            default: Option<T>,
        ) -> Result<T, BenchError>
        where
            T::Err: fmt::Display,
        {
            match kv.remove(key) {
                Some((line, v)) => v.parse().map_err(|e: T::Err| BenchError::Spec {
                    line,
                    reason: format!("{key}: {e}"),
                }),
                None => default.ok_or_else(|| BenchError::Invalid(format!("missing key {key:?}"))),
            }
        }
        fn list<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>, BenchError>
        where
            T::Err: fmt::Display,
        {
            v.split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|e: T::Err| BenchError::Spec {
                        line,
                        reason: format!("{key}: {e}"),
                    })
                })
                .collect()
        }

        let mut spec = ExperimentSpec::synthetic(take(&mut kv, "sweep", None)?, Vec::new());
        let (line, values) = kv
            .remove("values")
            .ok_or_else(|| BenchError::Invalid("missing key \"values\"".into()))?;
        spec.values = list(line, "values", &values)?;
        if let Some((line, algs)) = kv.remove("algorithms") {
            spec.algorithms = list(line, "algorithms", &algs)?;
        }
        let graph: String = take(&mut kv, "graph", Some("synthetic".to_string()))?;
        let undirected = take(&mut kv, "undirected", Some(false))?;
        let nodes = take(&mut kv, "nodes", Some(10_000usize))?;
        let avg_degree = take(&mut kv, "avg_degree", Some(5.0))?;
        let alpha = take(&mut kv, "alpha", Some(1.0))?;
        let ranks = take(&mut kv, "ranks", Some(10usize))?;
        let w_max = take(&mut kv, "w_max", Some(0.9))?;
        spec.graph = match graph.as_str() {
            "synthetic" => GraphSource::Synthetic {
                nodes,
                avg_degree,
                alpha,
                ranks,
                w_max,
            },
            other => match other.strip_prefix("file:") {
                Some(path) => GraphSource::File {
                    path: PathBuf::from(path.trim()),
                    undirected,
                },
                None => {
                    return Err(BenchError::Invalid(format!(
                        "graph must be `synthetic` or `file:<path>`, got {other:?}"
                    )))
                }
            },
        };
        spec.pairs_per_point = take(&mut kv, "pairs_per_point", Some(spec.pairs_per_point))?;
        spec.seed = take(&mut kv, "seed", Some(0))?;
        spec.budget = take(&mut kv, "budget", Some(spec.budget))?;
        spec.distance = take(&mut kv, "distance", Some(spec.distance))?;
        spec.friend_band = take(&mut kv, "friend_band", Some(spec.friend_band))?;
        spec.theta = take(&mut kv, "theta", Some(0.0))?;
        let homophily: String = take(&mut kv, "homophily", Some("none".to_string()))?;
        spec.homophily = match homophily.as_str() {
            "none" => BenchHomophily::None,
            "zipf" => BenchHomophily::Zipf,
            other => other
                .strip_prefix("constant:")
                .and_then(|h| h.trim().parse().ok())
                .map(BenchHomophily::Constant)
                .ok_or_else(|| {
                    BenchError::Invalid(format!(
                        "homophily must be `none`, `constant:<h>` or `zipf`, got {other:?}"
                    ))
                })?,
        };
        if let Some((key, (line, _))) = kv.into_iter().next() {
            return Err(BenchError::Spec {
                line,
                reason: format!("unknown key {key:?}"),
            });
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Invalid(m));
        if self.values.is_empty() {
            return bad("value list is empty".into());
        }
        if self.pairs_per_point == 0 {
            return bad("pairs_per_point must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms given".into());
        }
        if let BenchHomophily::Constant(h) = self.homophily {
            if !(0.0..=1.0).contains(&h) {
                return bad(format!("homophily {h} outside [0, 1]"));
            }
        }
        if self.homophily == BenchHomophily::Zipf && matches!(self.graph, GraphSource::File { .. })
        {
            return bad("zipf homophily needs a synthetic graph".into());
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad(format!("theta {} outside [0, 1]", self.theta));
        }
        for &v in &self.values {
            let integral = v >= 0.0 && v.fract() == 0.0;
            let ok = match self.sweep {
                SweepVar::Budget => integral && v >= 1.0,
                SweepVar::Distance => integral && v >= 2.0,
                SweepVar::FriendCount => integral && v >= 1.0,
                SweepVar::Alpha => v >= 0.0 && v.is_finite(),
            };
            if !ok {
                return bad(format!("{} is not a valid {} value", v, self.sweep.name()));
            }
        }
        if self.sweep == SweepVar::Alpha && matches!(self.graph, GraphSource::File { .. }) {
            return bad("an alpha sweep needs a synthetic graph".into());
        }
        if self.sweep != SweepVar::Distance && self.distance < 2 {
            return bad("distance must be at least 2".into());
        }
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        Ok(())
    }

    fn zipf(&self, alpha_override: Option<f64>) -> Option<(usize, f64, ZipfWeightConfig)> {
        match self.graph {
            GraphSource::Synthetic {
                nodes,
                avg_degree,
                alpha,
                ranks,
                w_max,
            } => Some((
                nodes,
                avg_degree,
                ZipfWeightConfig {
                    alpha: alpha_override.unwrap_or(alpha),
                    ranks,
                    w_max,
                    seed: self.seed,
                },
            )),
            GraphSource::File { .. } => None,
        }
    }

    /// Homophily for one graph. Zipf draws use the graph's skew and a stream
    /// of their own, so they never perturb the edge weights.
    fn homophily_model(
        &self,
        graph: &SocialGraph,
        alpha: Option<f64>,
    ) -> Result<HomophilyModel, BenchError> {
        Ok(match self.homophily {
            BenchHomophily::None => HomophilyModel::Absent,
            BenchHomophily::Constant(h) => HomophilyModel::Constant(h),
            BenchHomophily::Zipf => {
                let (_, _, zipf) = self.zipf(alpha).expect("validated as synthetic");
                let sampler = zipf.sampler()?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(u64::MAX);
                HomophilyModel::PerNode(
                    graph
                        .node_ids()
                        .iter()
                        .map(|&v| (v, sampler.sample(&mut rng)))
                        .collect(),
                )
            }
        })
    }

    fn load_graph(&self, alpha: Option<f64>) -> Result<SocialGraph, BenchError> {
        match &self.graph {
            GraphSource::File { path, undirected } => {
                let file = std::fs::File::open(path)
                    .map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))?;
                Ok(load_edge_list(std::io::BufReader::new(file), *undirected)?)
            }
            GraphSource::Synthetic { .. } => {
                let (n, d, zipf) = self.zipf(alpha).expect("synthetic source");
                Ok(generate_synthetic(n, d, &zipf)?)
            }
        }
    }
}

/// Restriction on sampled `(s, t)` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairConstraint {
    /// `t` exactly this many hops from `s`.
    Distance(usize),
    /// `s` has between `lo` and `hi` friends and `t` is `distance` hops away.
    FriendBand {
        lo: usize,
        hi: usize,
        distance: usize,
    },
}

impl fmt::Display for PairConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairConstraint::Distance(d) => write!(f, "d(s,t) = {d}"),
            PairConstraint::FriendBand { lo, hi, distance } => {
                write!(f, "{lo} <= |S| - 1 <= {hi}, d(s,t) = {distance}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledPair {
    pub initiator: NodeId,
    pub target: NodeId,
    pub friends: FriendSet,
}

/// Draws `s` uniformly, then `t` uniformly among the nodes meeting `constraint`.
pub fn sample_pair<R: Rng + ?Sized>(
    graph: &SocialGraph,
    constraint: PairConstraint,
    rng: &mut R,
) -> Result<SampledPair, BenchError> {
    let n = graph.node_count();
    let (distance, band) = match constraint {
        PairConstraint::Distance(d) => (d, None),
        PairConstraint::FriendBand { lo, hi, distance } => (distance, Some((lo, hi))),
    };
    if n > 0 {
        for _ in 0..SAMPLE_RETRIES {
            let s = rng.gen_range(0..n);
            if let Some((lo, hi)) = band {
                let deg = graph.out_edges(s).len();
                if deg < lo || deg > hi {
                    continue;
                }
            }
            let dist = bfs_from(graph, s);
            let at: Vec<usize> = (0..n).filter(|&v| dist[v] == Some(distance)).collect();
            if let Some(&t) = at.choose(rng) {
                let initiator = graph.id_of(s);
                return Ok(SampledPair {
                    initiator,
                    target: graph.id_of(t),
                    friends: FriendSet::from_out_neighbors(graph, initiator),
                });
            }
        }
    }
    Err(BenchError::Sampling {
        constraint: constraint.to_string(),
        retries: SAMPLE_RETRIES,
    })
}

/// Aggregated outcome of one algorithm at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_var: SweepVar,
    pub sweep_value: f64,
    pub algorithm: Algorithm,
    pub n_pairs: usize,
    pub failures: usize,
    pub mean_objective: f64,
    pub stddev_objective: f64,
    pub mean_runtime_ms: f64,
    pub mean_longest_path: f64,
    pub mean_build_ms: f64,
}

pub const CSV_HEADER: &str =
    "sweep_var,sweep_value,algorithm,n_pairs,failures,mean_objective,stddev_objective,mean_runtime_ms,mean_longest_path,mean_build_ms";

pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.10},{:.10},{:.6},{:.4},{:.6}",
            r.sweep_var.name(),
            r.sweep_value,
            r.algorithm,
            r.n_pairs,
            r.failures,
            r.mean_objective,
            r.stddev_objective,
            r.mean_runtime_ms,
            r.mean_longest_path,
            r.mean_build_ms
        )?;
    }
    Ok(())
}

#[derive(Default)]
struct Samples {
    objective: Vec<f64>,
    runtime_ms: Vec<f64>,
    longest: Vec<f64>,
    build_ms: Vec<f64>,
    failures: usize,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn run_point(
    spec: &ExperimentSpec,
    base: Option<&SocialGraph>,
    index: usize,
) -> Result<Vec<ResultRow>, BenchError> {
    let value = spec.values[index];
    let owned;
    let graph = match (spec.sweep, base) {
        (SweepVar::Alpha, _) | (_, None) => {
            owned = spec.load_graph((spec.sweep == SweepVar::Alpha).then_some(value))?;
            &owned
        }
        (_, Some(g)) => g,
    };
    let budget = if spec.sweep == SweepVar::Budget {
        value as usize
    } else {
        spec.budget
    };
    let constraint = match spec.sweep {
        SweepVar::Distance => PairConstraint::Distance(value as usize),
        SweepVar::FriendCount => {
            let lo = value as usize;
            let hi = ((value * (1.0 + spec.friend_band)).floor() as usize).max(lo);
            PairConstraint::FriendBand {
                lo,
                hi,
                distance: spec.distance,
            }
        }
        _ => PairConstraint::Distance(spec.distance),
    };
    let homophily =
        spec.homophily_model(graph, (spec.sweep == SweepVar::Alpha).then_some(value))?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64 + 1);
    let mut samples: Vec<Samples> = spec.algorithms.iter().map(|_| Samples::default()).collect();
    let mut pairs = 0;
    let mut attempts = 0;
    while pairs < spec.pairs_per_point {
        attempts += 1;
        if attempts > SAMPLE_RETRIES {
            return Err(BenchError::Sampling {
                constraint: constraint.to_string(),
                retries: SAMPLE_RETRIES,
            });
        }
        let pair = sample_pair(graph, constraint, &mut rng)?;
        let request = PlanRequest::new(pair.initiator, pair.target, pair.friends, budget)
            .with_theta(spec.theta);
        let start = Instant::now();
        let tree = match build_miia(graph, &request, &homophily) {
            Ok(t) => t,
            Err(e) => {
                log::warn!(
                    "{}={value}: skipping pair ({}, {}): {e}",
                    spec.sweep.name(),
                    pair.initiator,
                    pair.target
                );
                continue;
            }
        };
        let build_ms = start.elapsed().as_secs_f64() * 1e3;
        pairs += 1;
        for (alg, acc) in spec.algorithms.iter().zip(samples.iter_mut()) {
            let start = Instant::now();
            match run_planner(&tree, *alg, budget) {
                Ok(plan) => {
                    acc.runtime_ms.push(start.elapsed().as_secs_f64() * 1e3);
                    acc.objective.push(plan.objective);
                    acc.longest.push(plan.longest_path() as f64);
                    acc.build_ms.push(build_ms);
                }
                Err(e) => {
                    log::warn!(
                        "{}={value}: {alg} failed on ({}, {}): {e}",
                        spec.sweep.name(),
                        request.initiator,
                        request.target
                    );
                    acc.failures += 1;
                }
            }
        }
    }
    Ok(spec
        .algorithms
        .iter()
        .zip(samples)
        .map(|(&algorithm, s)| {
            if s.failures > 0 {
                log::warn!(
                    "{}={value}: {algorithm} failed on {} of {} pairs",
                    spec.sweep.name(),
                    s.failures,
                    pairs
                );
            }
            ResultRow {
                sweep_var: spec.sweep,
                sweep_value: value,
                algorithm,
                n_pairs: s.objective.len(),
                failures: s.failures,
                mean_objective: mean(&s.objective),
                stddev_objective: stddev(&s.objective),
                mean_runtime_ms: mean(&s.runtime_ms),
                mean_longest_path: mean(&s.longest),
                mean_build_ms: mean(&s.build_ms),
            }
        })
        .collect())
}

/// Runs every sweep point and returns `|values| * |algorithms|` rows in
/// sweep order. Points run on the rayon pool when `parallel` is set; the
/// non-timing columns do not depend on it.
pub fn run_experiment(spec: &ExperimentSpec, parallel: bool) -> Result<Vec<ResultRow>, BenchError> {
    spec.validate()?;
    let base = if spec.sweep == SweepVar::Alpha {
        None
    } else {
        Some(spec.load_graph(None)?)
    };
    let points: Vec<Result<Vec<ResultRow>, BenchError>> = if parallel {
        (0..spec.values.len())
            .into_par_iter()
            .map(|i| run_point(spec, base.as_ref(), i))
            .collect()
    } else {
        (0..spec.values.len())
            .map(|i| run_point(spec, base.as_ref(), i))
            .collect()
    };
    let mut rows = Vec::with_capacity(spec.values.len() * spec.algorithms.len());
    for p in points {
        rows.extend(p?);
    }
    Ok(rows)
}

/// Caterpillar arborescence with `spine` non-friend nodes for timing runs.
///
/// Spine node `i` has the next spine node as its first child and one friend
/// leaf, so every DP fold over the first child spans the whole budget.
pub fn caterpillar_tree(spine: usize, seed: u64) -> Arborescence {
    assert!(spine >= 1, "caterpillar needs at least one spine node");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spine as NodeId;
    let mut b = TreeBuilder::new(0);
    for i in 0..n {
        if i + 1 < n {
            b.member(i + 1, i, rng.gen_range(0.05..0.95));
        }
        b.friend(n + i, i, rng.gen_range(0.05..0.95));
    }
    b.build().expect("caterpillar is a valid tree")
}

/// Chain of `nodes - 1` members under the target with one friend at the
/// bottom. Every subtree is larger than any small budget, so each node pays
/// the full quadratic split cost: the worst case for the SITINA tables.
pub fn path_tree(nodes: usize, seed: u64) -> Arborescence {
    assert!(nodes >= 2, "path needs a target and a friend");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = TreeBuilder::new(0);
    let last = nodes as NodeId - 1;
    for i in 0..last {
        let w = rng.gen_range(0.05..0.95);
        if i + 1 < last {
            b.member(i + 1, i, w);
        } else {
            b.friend(i + 1, i, w);
        }
    }
    b.build().expect("path is a valid tree")
}

/// Best-of-`repeats` wall time, in milliseconds, of filling the SITINA
/// tables and backtracking the invited set.
pub fn time_sitina(tree: &Arborescence, budget: usize, repeats: usize) -> f64 {
    (0..repeats.max(1))
        .map(|_| {
            let start = Instant::now();
            let tables = sitina_tables(tree, budget);
            let selected = backtrack(&tables, tree);
            std::hint::black_box(selected);
            start.elapsed().as_secs_f64() * 1e3
        })
        .fold(f64::INFINITY, f64::min)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn power_law_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
