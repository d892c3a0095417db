//! Running configured experiments and scoring the results.

use std::io::Write;
use std::time::Instant;

use pace_core::gale::run_gale;
use pace_core::graph::{generate_sbm, induced_subgraph, largest_connected_component, non_leaf_nodes, Graph};
use pace_core::linalg::DenseMatrix;
use pace_core::membership::{
    clustering_matrix, misclustering_fraction, misclustering_fraction_extended, tilde_delta,
};
use pace_core::pace::run_pace;
use pace_core::{rng, MembershipMatrix};

use crate::config::{EdgeListSource, ExperimentConfig, Method, Source};
use crate::error::{Error, Result};
use crate::io;

/// Agreement of an estimate with the truth. `delta` is `δ` (twice the fraction of
/// misclustered nodes); the `misclustered` fields are the node fractions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricRow {
    /// Absent when the estimate has a different label count or unassigned nodes.
    pub delta: Option<f64>,
    pub misclustered: Option<f64>,
    /// Over bijections of the estimate's labels padded to the truth's (at most
    /// one extra label).
    pub delta_extended: Option<f64>,
    pub misclustered_extended: Option<f64>,
    pub tilde_delta: Option<f64>,
}

pub fn evaluate(
    membership: &MembershipMatrix,
    truth: &MembershipMatrix,
    c_true: Option<&DenseMatrix>,
) -> Result<MetricRow> {
    let comparable = membership.k() == truth.k() && membership.is_fully_assigned();
    let delta = if comparable { Some(misclustering_fraction(membership, truth)?) } else { None };
    let delta_extended = if membership.k() <= truth.k() + 1 {
        Some(misclustering_fraction_extended(membership, truth)?)
    } else {
        None
    };
    let tilde = match c_true {
        Some(c) if membership.is_fully_assigned() => Some(tilde_delta(&clustering_matrix(membership)?, c)?),
        _ => None,
    };
    Ok(MetricRow {
        delta,
        misclustered: delta.map(|d| d / 2.0),
        delta_extended,
        misclustered_extended: delta_extended.map(|d| d / 2.0),
        tilde_delta: tilde,
    })
}

/// `δ̃(Ẑ Ẑᵀ, Z Zᵀ)` from the labels alone.
fn pair_tilde_delta(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut joint = vec![0f64; ka * kb];
    let mut ra = vec![0f64; ka];
    let mut rb = vec![0f64; kb];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * kb + y] += 1.0;
        ra[x] += 1.0;
        rb[y] += 1.0;
    }
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    (sq(&ra) + sq(&rb) - 2.0 * sq(&joint)) / (n as f64 * n as f64)
}

/// `δ̃(Ĉ, Z Zᵀ)` without forming `Z Zᵀ`.
fn chat_tilde_delta(chat: &DenseMatrix, truth: &[usize]) -> f64 {
    let n = truth.len();
    let mut sum = 0.0;
    for (i, &ti) in truth.iter().enumerate() {
        for (&c, &tj) in chat.row(i).iter().zip(truth) {
            let d = c - if ti == tj { 1.0 } else { 0.0 };
            sum += d * d;
        }
    }
    sum / (n as f64 * n as f64)
}

/// One row of a report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub seed: u64,
    pub method: String,
    pub base: String,
    pub n: usize,
    pub k: usize,
    pub mean_degree: f64,
    pub metrics: MetricRow,
    pub tau: Option<f64>,
    /// PACE: fraction of node pairs with `N_ij ≥ τ`; GALE: fraction of nodes
    /// with `N_i ≥ τ`; whole-graph runs: 1.
    pub coverage: f64,
    pub uncovered_nodes: Option<usize>,
    pub sampling_s: f64,
    pub base_clustering_s: f64,
    pub stitching_s: f64,
    pub recovery_s: f64,
    pub total_s: f64,
}

const METRIC_COLUMNS: [&str; 14] = [
    "seed",
    "method",
    "base",
    "n",
    "k",
    "mean_degree",
    "delta",
    "misclustered",
    "delta_extended",
    "misclustered_extended",
    "tilde_delta",
    "tau",
    "coverage",
    "uncovered_nodes",
];

const TIMING_COLUMNS: [&str; 5] = ["sampling_s", "base_clustering_s", "stitching_s", "recovery_s", "total_s"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl ReportRow {
    fn metric_fields(&self) -> Vec<String> {
        let m = &self.metrics;
        vec![
            self.seed.to_string(),
            self.method.clone(),
            self.base.clone(),
            self.n.to_string(),
            self.k.to_string(),
            self.mean_degree.to_string(),
            opt(m.delta),
            opt(m.misclustered),
            opt(m.delta_extended),
            opt(m.misclustered_extended),
            opt(m.tilde_delta),
            opt(self.tau),
            self.coverage.to_string(),
            opt(self.uncovered_nodes),
        ]
    }

    fn timing_fields(&self) -> Vec<String> {
        [self.sampling_s, self.base_clustering_s, self.stitching_s, self.recovery_s, self.total_s]
            .iter()
            .map(f64::to_string)
            .collect()
    }
}

/// One row per seed, in seed order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
}

impl RunReport {
    /// Full report: metric columns followed by per-phase seconds.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write(writer, true)
    }

    /// Metric columns only; identical across worker counts for a fixed config.
    pub fn write_metrics_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write(writer, false)
    }

    fn write<W: Write>(&self, writer: W, timings: bool) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = METRIC_COLUMNS.to_vec();
        if timings {
            header.extend(TIMING_COLUMNS);
        }
        out.write_record(&header)?;
        for row in &self.rows {
            let mut fields = row.metric_fields();
            if timings {
                fields.extend(row.timing_fields());
            }
            out.write_record(&fields)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn metrics_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_metrics_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// The graph a seed runs on, with its planted labels when known.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: Graph,
    pub truth: Option<Vec<usize>>,
}

fn load_edge_list_instance(source: &EdgeListSource) -> Result<Instance> {
    let el = io::read_edge_list(&source.path)?;
    let mut graph = el.graph;
    let mut truth = match &source.labels {
        Some(path) => {
            let labels = io::read_labels(path)?;
            let per_node = el
                .ids
                .iter()
                .map(|&id| {
                    let label = usize::try_from(id).ok().and_then(|i| labels.get(i).copied().flatten());
                    match label {
                        Some(l) if l >= source.k => {
                            Err(Error::Usage(format!("node {id}: label {l} is not below K = {}", source.k)))
                        }
                        other => Ok(other),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Some(per_node)
        }
        None => None,
    };
    let mut ids = el.ids;
    let mut restrict = |graph: &mut Graph, nodes: Vec<usize>| -> Result<()> {
        *graph = induced_subgraph(graph, &nodes)?.graph;
        ids = nodes.iter().map(|&u| ids[u]).collect();
        if let Some(t) = &mut truth {
            *t = nodes.iter().map(|&u| t[u]).collect();
        }
        Ok(())
    };
    if source.largest_component {
        let nodes = largest_connected_component(&graph);
        restrict(&mut graph, nodes)?;
    }
    if source.drop_leaves {
        let nodes = non_leaf_nodes(&graph);
        restrict(&mut graph, nodes)?;
    }
    // Only the nodes that survive filtering need a label.
    let truth = match truth {
        Some(labels) => Some(
            labels
                .iter()
                .zip(&ids)
                .map(|(l, id)| l.ok_or_else(|| Error::Usage(format!("node {id} has no label"))))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    Ok(Instance { graph, truth })
}

/// Builds the graph for `seed` (simulated sources draw a fresh graph per seed).
pub fn load_instance(config: &ExperimentConfig, seed: u64) -> Result<Instance> {
    match &config.source {
        Source::Sbm(s) => {
            let lg = generate_sbm(&config.sbm_params()?, s.n, seed)?;
            Ok(Instance { graph: lg.graph, truth: Some(lg.labels) })
        }
        Source::EdgeList(e) => load_edge_list_instance(e),
    }
}

/// Everything one seed produced.
#[derive(Clone, Debug)]
pub struct SeedOutcome {
    pub row: ReportRow,
    pub membership: MembershipMatrix,
    /// The clustering-matrix estimate of a PACE run.
    pub chat: Option<DenseMatrix>,
}

/// Runs the configured method once on `instance`.
pub fn run_seed(config: &ExperimentConfig, instance: &Instance, seed: u64) -> Result<SeedOutcome> {
    let k = config.k();
    let graph = &instance.graph;
    let base = config.base.build()?;
    let method_seed = rng::derive(seed, 1);
    let start = Instant::now();
    let mut row = ReportRow {
        seed,
        method: config.method.name().into(),
        base: config.base.name.clone(),
        n: graph.n(),
        k,
        mean_degree: graph.mean_degree(),
        metrics: MetricRow::default(),
        tau: None,
        coverage: 1.0,
        uncovered_nodes: None,
        sampling_s: 0.0,
        base_clustering_s: 0.0,
        stitching_s: 0.0,
        recovery_s: 0.0,
        total_s: 0.0,
    };
    let mut chat = None;
    let membership = match &config.method {
        Method::BaseOnly {} => {
            let z = base.cluster(graph, k, method_seed)?;
            row.base_clustering_s = start.elapsed().as_secs_f64();
            z
        }
        Method::Pace(pc) => {
            let res = run_pace(graph, k, pc, base.as_ref(), method_seed)?;
            row.tau = Some(res.tau);
            row.coverage = res.coverage;
            row.sampling_s = res.timings.sampling;
            row.base_clustering_s = res.timings.base_clustering;
            row.stitching_s = res.timings.stitching;
            row.recovery_s = res.timings.recovery;
            chat = Some(res.chat);
            res.membership
        }
        Method::Gale(gc) => {
            let res = run_gale(graph, k, gc, base.as_ref(), method_seed)?;
            row.tau = Some(res.tau);
            row.uncovered_nodes = Some(res.uncovered);
            row.coverage = 1.0 - res.uncovered as f64 / graph.n().max(1) as f64;
            row.sampling_s = res.timings.sampling;
            row.base_clustering_s = res.timings.base_clustering;
            row.stitching_s = res.timings.stitching;
            res.membership
        }
    };
    row.total_s = start.elapsed().as_secs_f64();

    if let Some(truth) = &instance.truth {
        let truth_z = MembershipMatrix::from_labels(k, truth)?;
        let mut metrics = evaluate(&membership, &truth_z, None)?;
        metrics.tilde_delta = match (&chat, membership.hard_labels()) {
            (Some(c), _) => Some(chat_tilde_delta(c, truth)),
            (None, Some(labels)) => Some(pair_tilde_delta(&labels, truth)),
            (None, None) => None,
        };
        row.metrics = metrics;
    }
    Ok(SeedOutcome { row, membership, chat })
}

/// Runs every seed on a pool of `workers` threads, handing each outcome to
/// `on_seed` before moving on.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    workers: usize,
    mut on_seed: impl FnMut(&SeedOutcome) -> Result<()>,
) -> Result<RunReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {workers} workers: {e}")))?;
    let mut report = RunReport::default();
    for &seed in &config.seeds {
        let outcome = pool.install(|| -> Result<SeedOutcome> {
            let instance = load_instance(config, seed)?;
            run_seed(config, &instance, seed)
        })?;
        on_seed(&outcome)?;
        report.rows.push(outcome.row);
    }
    Ok(report)
}

pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<RunReport> {
    run_experiment_with(config, workers, |_| Ok(()))
}

/// Worker count: explicit request, then the config, then `PACE_WORKERS`, then
/// the number of available cores.
pub fn resolve_workers(requested: Option<usize>, config: &ExperimentConfig) -> Result<usize> {
    if let Some(w) = requested.or(config.workers) {
        return Ok(w);
    }
    if let Ok(value) = std::env::var("PACE_WORKERS") {
        return value
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| Error::Usage(format!("PACE_WORKERS = `{value}` is not a positive integer")));
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}
