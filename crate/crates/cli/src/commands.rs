//! The five subcommands. Each returns after writing its outputs; errors
//! carry the exit-code class.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hglfr::analysis::omega_matrix;
use hglfr::io::{self, NodeLabels};
use hglfr::{gamma_sweep, Graph, Method, OmegaMatrix, Partition};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Cell, RunConfig};
use crate::error::{CliError, CliResult, ErrorKind};
use crate::experiment::{self, binned_means, level_stats, mean_ci, Outcome};
use crate::store::{self, NetworkRecord, NETWORK_SCHEMA};

/// Writes `rows` under an explicit header so that empty tables still carry
/// their columns.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::validation(format!("cannot create {}: {e}", dir.display())))
}

fn pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config(format!("--workers: {e}")))
}

/// Parses `--methods "lp,mod"`.
pub fn parse_methods(list: &str) -> CliResult<Vec<Method>> {
    let methods: Vec<Method> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Method::parse(s).map_err(|e| CliError::config(format!("--methods: {e}"))))
        .collect::<CliResult<_>>()?;
    if methods.is_empty() {
        return Err(CliError::config("--methods: list at least one method"));
    }
    Ok(methods)
}

/// Parses a comma-separated list of numbers; empty input gives an empty list.
pub fn parse_list<T: std::str::FromStr>(flag: &str, list: &str) -> CliResult<Vec<T>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::config(format!("{flag}: cannot parse {s:?}"))))
        .collect()
}

/// Applies command-line overrides to a loaded config.
pub fn apply_overrides(cfg: &mut RunConfig, out: Option<PathBuf>, seed: Option<u64>, gamma_grid: Option<String>) -> CliResult<PathBuf> {
    if let Some(seed) = seed {
        cfg.base_seed = seed;
        cfg.seeds = None;
    }
    if let Some(grid) = gamma_grid {
        hglfr::analysis::parse_gamma_grid(&grid).map_err(|e| CliError::config(format!("--gamma-grid: {e}")))?;
        cfg.gamma_grid = Some(grid);
    }
    if let Some(out) = out {
        cfg.out = Some(out);
    }
    cfg.out.clone().ok_or_else(|| CliError::config("out: no output directory (set `out` or pass --out)"))
}

fn tasks(cells: &[Cell], seeds: &[u64]) -> Vec<(usize, usize, u64)> {
    (0..cells.len())
        .flat_map(|c| seeds.iter().enumerate().map(move |(r, &s)| (c, r, s)))
        .collect()
}

fn record(cell: &Cell, realization: usize, net: &hglfr::GeneratedNetwork) -> CliResult<NetworkRecord> {
    let stats = level_stats(&net.graph, net.ground_truth())?;
    Ok(NetworkRecord {
        schema: NETWORK_SCHEMA.to_string(),
        cell: cell.name.clone(),
        realization,
        generator: cell.generator.clone(),
        hierarchy: cell.hierarchy_for(realization),
        generation: net.metadata.clone(),
        window: stats.distance.map(|distance| hglfr::ResolutionWindow {
            lower: stats.lower.unwrap_or_default(),
            upper: stats.upper.unwrap_or_default(),
            distance,
        }),
    })
}

fn tag_failure(cell: &Cell, realization: usize, seed: u64, e: CliError) -> Failure {
    Failure {
        cell: cell.name.clone(),
        realization,
        seed,
        exit_code: e.exit_code(),
        message: e.message,
    }
}

/// A realization that could not be produced or measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub cell: String,
    pub realization: usize,
    pub seed: u64,
    pub exit_code: i32,
    pub message: String,
}

fn failure_error(failures: &[Failure], total: usize) -> CliResult<()> {
    let Some(first) = failures.first() else { return Ok(()) };
    let kind = if failures.iter().any(|f| f.exit_code == 3) { ErrorKind::Generation } else { ErrorKind::Validation };
    let list: Vec<String> = failures.iter().map(|f| format!("{} seed {}", f.cell, f.seed)).collect();
    Err(CliError {
        kind,
        message: format!(
            "{} of {total} realizations failed ({}); first: {}",
            failures.len(),
            list.join(", "),
            first.message
        ),
    })
}

/// Generates every (cell, realization) into `<out>/<cell>/<r###-s<seed>>/`.
pub fn cmd_generate(cfg: &RunConfig, out: &Path, workers: usize) -> CliResult<Vec<PathBuf>> {
    let cells = cfg.cells()?;
    let seeds = cfg.seeds();
    create_dir(out)?;
    let jobs = tasks(&cells, &seeds);
    let results: Vec<Result<PathBuf, Failure>> = pool(workers)?.install(|| {
        jobs.par_iter()
            .map(|&(c, r, seed)| {
                let cell = &cells[c];
                let run = || -> CliResult<PathBuf> {
                    let net = hglfr::generate(&cell.generator, cell.hierarchy_for(r).as_ref(), seed)
                        .map_err(|e| CliError::from(e).with_context(&format!("cell {} seed {seed}", cell.name)))?;
                    let dir = out.join(&cell.name).join(store::network_dir_name(r, seed));
                    store::write_network(&dir, &net, &record(cell, r, &net)?)?;
                    Ok(dir)
                };
                run().map_err(|e| tag_failure(cell, r, seed, e))
            })
            .collect()
    });
    let mut dirs = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(d) => dirs.push(d),
            Err(f) => failures.push(f),
        }
    }
    failure_error(&failures, jobs.len())?;
    Ok(dirs)
}

/// One row of the analysis table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub network: String,
    pub level: usize,
    pub communities: usize,
    /// Empty when the input is a bare Ω matrix.
    pub achieved_mu: Option<f64>,
    pub q_gamma1: Option<f64>,
    pub window_defined: bool,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub distance: Option<f64>,
    pub min_omega_ii: f64,
}

pub const ANALYSIS_HEADER: &[&str] = &[
    "network",
    "level",
    "communities",
    "achieved_mu",
    "q_gamma1",
    "window_defined",
    "lower",
    "upper",
    "distance",
    "min_omega_ii",
];

/// Input to `analyze`: a stored network, a bare edge list with partitions,
/// or a dense Ω matrix in the format of `omega_l<i>.csv`.
pub enum AnalysisInput {
    NetworkDir(PathBuf),
    Files { edges: PathBuf, partitions: Vec<PathBuf> },
    Omega(PathBuf),
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))
}

fn load_levels(input: &AnalysisInput) -> CliResult<(String, Graph, NodeLabels, Vec<Partition>)> {
    match input {
        AnalysisInput::NetworkDir(dir) => {
            let net = store::read_network(dir)?;
            Ok((net.id, net.graph, net.labels, net.hierarchy.levels().to_vec()))
        }
        AnalysisInput::Files { edges, partitions } => {
            if partitions.is_empty() {
                return Err(CliError::config("--partition: give at least one partition file"));
            }
            let (graph, labels) =
                io::parse_edge_list(&read_text(edges)?, 0).map_err(|e| CliError::validation(format!("{}: {e}", edges.display())))?;
            let levels = partitions
                .iter()
                .map(|p| {
                    io::parse_partition(&read_text(p)?, &labels)
                        .map_err(|e| CliError::validation(format!("{}: {e}", p.display())))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let id = edges.file_stem().map_or_else(|| "network".into(), |s| s.to_string_lossy().into_owned());
            Ok((id, graph, labels, levels))
        }
        AnalysisInput::Omega(_) => unreachable!("handled by cmd_analyze"),
    }
}

/// Reads a dense Ω matrix written by [`write_omega`].
pub fn read_omega(path: &Path) -> CliResult<OmegaMatrix> {
    let bad = |msg: String| CliError::validation(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path)?;
    let dim = r.headers()?.len().saturating_sub(1);
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != dim + 1 {
            return Err(bad(format!("row {i} has {} fields, expected {}", rec.len(), dim + 1)));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad(format!("row {i}: {v:?} is not a number"))))
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.len() != dim {
        return Err(bad(format!("{} rows for {dim} columns", rows.len())));
    }
    OmegaMatrix::from_rows(rows).map_err(|e| bad(e.to_string()))
}

fn omega_row(network: String, omega: &OmegaMatrix) -> AnalysisRow {
    let window = hglfr::resolution_window(omega).ok();
    AnalysisRow {
        network,
        level: 0,
        communities: omega.dim(),
        achieved_mu: None,
        q_gamma1: None,
        window_defined: window.is_some(),
        lower: window.map(|w| w.lower),
        upper: window.map(|w| w.upper),
        distance: window.map(|w| w.distance),
        min_omega_ii: omega.diagonal().into_iter().fold(f64::INFINITY, f64::min),
    }
}

fn write_omega(path: &Path, omega: &OmegaMatrix) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["community".to_string()];
    header.extend((0..omega.dim()).map(|c| c.to_string()));
    w.write_record(&header)?;
    for (r, row) in omega.rows().iter().enumerate() {
        let mut rec = vec![r.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Ω, window and modularity of every level. With `out`, writes
/// `analysis.csv` and `omega_l<i>.csv`.
pub fn cmd_analyze(input: &AnalysisInput, out: Option<&Path>) -> CliResult<Vec<AnalysisRow>> {
    if let Some(out) = out {
        create_dir(out)?;
    }
    if let AnalysisInput::Omega(path) = input {
        let id = path.file_stem().map_or_else(|| "omega".into(), |s| s.to_string_lossy().into_owned());
        let rows = vec![omega_row(id, &read_omega(path)?)];
        if let Some(out) = out {
            write_csv(&out.join("analysis.csv"), ANALYSIS_HEADER, &rows)?;
        }
        return Ok(rows);
    }
    let (id, graph, _labels, levels) = load_levels(input)?;
    let mut rows = Vec::new();
    for (i, p) in levels.iter().enumerate() {
        let stats = level_stats(&graph, p)?;
        if let Some(out) = out {
            write_omega(&out.join(format!("omega_l{i}.csv")), &omega_matrix(&graph, p)?)?;
        }
        rows.push(AnalysisRow {
            network: id.clone(),
            level: i,
            communities: stats.communities,
            achieved_mu: Some(stats.achieved_mu),
            q_gamma1: Some(stats.q_gamma1),
            window_defined: stats.distance.is_some(),
            lower: stats.lower,
            upper: stats.upper,
            distance: stats.distance,
            min_omega_ii: stats.min_omega_ii,
        });
    }
    if let Some(out) = out {
        write_csv(&out.join("analysis.csv"), ANALYSIS_HEADER, &rows)?;
    }
    Ok(rows)
}

pub const DETECTION_HEADER: &[&str] = &["network_id", "method", "gamma", "seed", "nmi", "Q", "communities"];

/// Mean and CI of NMI per (method, gamma).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSummary {
    pub method: Method,
    pub gamma: Option<f64>,
    pub runs: usize,
    pub mean_nmi: f64,
    pub ci95: f64,
    pub mean_q: f64,
}

pub const DETECTION_SUMMARY_HEADER: &[&str] = &["method", "gamma", "runs", "mean_nmi", "ci95", "mean_q"];

/// Groups detection rows by (method, gamma) in order of first appearance.
pub fn summarize_detections(rows: &[experiment::DetectionRow]) -> Vec<DetectionSummary> {
    let mut keys: Vec<(Method, Option<f64>)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.method, r.gamma)) {
            keys.push((r.method, r.gamma));
        }
    }
    keys.into_iter()
        .map(|(method, gamma)| {
            let sel: Vec<&experiment::DetectionRow> = rows.iter().filter(|r| r.method == method && r.gamma == gamma).collect();
            let nmis: Vec<f64> = sel.iter().map(|r| r.nmi).collect();
            let qs: Vec<f64> = sel.iter().map(|r| r.q).collect();
            let (mean_nmi, ci95) = mean_ci(&nmis);
            DetectionSummary { method, gamma, runs: sel.len(), mean_nmi, ci95, mean_q: mean_ci(&qs).0 }
        })
        .collect()
}

/// Runs the methods on a stored network against its ground truth, once per
/// seed. Writes `detections.csv` and `detection_summary.csv`.
pub fn cmd_detect(
    dir: &Path,
    methods: &[Method],
    gammas: &[f64],
    seeds: &[u64],
    out: Option<&Path>,
) -> CliResult<(Vec<experiment::DetectionRow>, Vec<DetectionSummary>)> {
    if methods.contains(&Method::Modularity) && gammas.is_empty() {
        return Err(CliError::config("--gammas: modularity needs at least one resolution"));
    }
    if seeds.is_empty() {
        return Err(CliError::config("--seeds: list at least one seed"));
    }
    let net = store::read_network(dir)?;
    let mut rows = Vec::new();
    for &seed in seeds {
        rows.extend(experiment::run_detection(&net.id, &net.graph, net.hierarchy.ground_truth(), methods, gammas, seed)?);
    }
    let summary = summarize_detections(&rows);
    if let Some(out) = out {
        create_dir(out)?;
        write_csv(&out.join("detections.csv"), DETECTION_HEADER, &rows)?;
        write_csv(&out.join("detection_summary.csv"), DETECTION_SUMMARY_HEADER, &summary)?;
    }
    Ok((rows, summary))
}

/// One row of the envelope table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub partition_id: usize,
    #[serde(rename = "Q")]
    pub q: f64,
    pub is_argmax: bool,
}

pub const SWEEP_HEADER: &[&str] = &["gamma", "partition_id", "Q", "is_argmax"];
pub const INTERVAL_HEADER: &[&str] = &["level", "communities", "wins", "gamma_lo", "gamma_hi"];

/// Modularity of every hierarchy level across the grid. Writes `sweep.csv`
/// and `intervals.csv`.
pub fn cmd_sweep(dir: &Path, grid: &[f64], out: Option<&Path>) -> CliResult<(Vec<SweepRow>, Vec<experiment::LevelInterval>)> {
    let net = store::read_network(dir)?;
    // the top level is the whole network, so a flat network has two levels
    if net.hierarchy.len() < 3 {
        return Err(CliError::validation(format!(
            "{}: sweep needs a hierarchical network; this one has a single grouping level",
            net.id
        )));
    }
    let sweep = gamma_sweep(&net.graph, net.hierarchy.levels(), grid)?;
    let mut rows = Vec::new();
    for (j, &gamma) in sweep.gammas.iter().enumerate() {
        for (i, q) in sweep.q.iter().enumerate() {
            rows.push(SweepRow { gamma, partition_id: i, q: q[j], is_argmax: sweep.argmax[j] == i });
        }
    }
    let intervals = experiment::level_intervals(&net.graph, &net.hierarchy, grid)?;
    if let Some(out) = out {
        create_dir(out)?;
        write_csv(&out.join("sweep.csv"), SWEEP_HEADER, &rows)?;
        write_csv(&out.join("intervals.csv"), INTERVAL_HEADER, &intervals)?;
    }
    Ok((rows, intervals))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeRow {
    pub curve: String,
    pub cell: String,
    pub degree: usize,
    pub target_count: usize,
    pub realized_count: usize,
}

pub const DEGREE_HEADER: &[&str] = &["curve", "cell", "degree", "target_count", "realized_count"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub generator: String,
    pub cell: String,
    pub seed: u64,
    pub mu: f64,
    pub min_omega_ii: f64,
    #[serde(rename = "D")]
    pub distance: Option<f64>,
}

pub const DISTANCE_HEADER: &[&str] = &["generator", "cell", "seed", "mu", "min_omega_ii", "D"];

/// One detection run with the network's mixing and window distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRun {
    pub curve: String,
    pub cell: String,
    pub seed: u64,
    pub achieved_mu: f64,
    #[serde(rename = "D")]
    pub distance: Option<f64>,
    pub method: Method,
    pub gamma: Option<f64>,
    pub nmi: f64,
}

pub const SCORED_HEADER: &[&str] = &["curve", "cell", "seed", "achieved_mu", "D", "method", "gamma", "nmi"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRow {
    pub curve: String,
    pub method: Method,
    pub gamma: Option<f64>,
    pub mu_bin: f64,
    pub realizations: usize,
    pub mean_nmi: f64,
    pub ci95: f64,
}

pub const BIN_HEADER: &[&str] = &["curve", "method", "gamma", "mu_bin", "realizations", "mean_nmi", "ci95"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRow {
    pub cell: String,
    pub seed: u64,
    #[serde(rename = "D")]
    pub distance: Option<f64>,
    pub level: usize,
    pub communities: usize,
    pub wins: usize,
    pub gamma_lo: Option<f64>,
    pub gamma_hi: Option<f64>,
}

pub const ENVELOPE_HEADER: &[&str] = &["cell", "seed", "D", "level", "communities", "wins", "gamma_lo", "gamma_hi"];

pub const NETWORK_HEADER: &[&str] = &[
    "curve",
    "cell",
    "realization",
    "seed",
    "mode",
    "merge_probability",
    "nodes",
    "edges",
    "communities",
    "hierarchy_levels",
    "attempts",
    "achieved_mu",
    "target_mean_degree",
    "mean_degree",
    "degree_within_two",
    "dropped_internal_stubs",
    "dropped_external_stubs",
    "moved_up_stubs",
    "moved_internal_stubs",
    "min_omega_ii",
    "lower",
    "upper",
    "distance",
];

pub const FAILURE_HEADER: &[&str] = &["cell", "realization", "seed", "exit_code", "message"];

/// Mean NMI per (curve, method, gamma, bin) from scored runs, in input order.
pub fn bin_scored_runs(runs: &[ScoredRun]) -> Vec<BinRow> {
    let mut groups: BTreeMap<(String, Method, String), (Option<f64>, Vec<(f64, f64)>)> = BTreeMap::new();
    for r in runs {
        let gamma_key = r.gamma.map_or_else(String::new, |g| format!("{g:020.10}"));
        groups
            .entry((r.curve.clone(), r.method, gamma_key))
            .or_insert_with(|| (r.gamma, Vec::new()))
            .1
            .push((r.achieved_mu, r.nmi));
    }
    let mut rows = Vec::new();
    for ((curve, method, _), (gamma, points)) in groups {
        for b in binned_means(&points, usize::MAX, 1) {
            rows.push(BinRow {
                curve: curve.clone(),
                method,
                gamma,
                mu_bin: b.mu_bin,
                realizations: b.realizations,
                mean_nmi: b.mean,
                ci95: b.ci95,
            });
        }
    }
    rows
}

/// Everything a batch run produced.
#[derive(Debug, Clone, Default)]
pub struct BatchReport {
    pub networks: Vec<experiment::NetworkSummary>,
    pub failures: Vec<Failure>,
}

/// Runs every cell and realization, then writes the experiment tables.
/// Failed realizations are logged to `failures.csv` and turn the exit code
/// nonzero after all outputs are written.
pub fn cmd_batch(cfg: &RunConfig, out: &Path, workers: usize) -> CliResult<BatchReport> {
    let cells = cfg.cells()?;
    let seeds = cfg.seeds();
    let methods: Vec<Method> = cfg
        .detection
        .methods
        .iter()
        .map(|m| Method::parse(m).map_err(CliError::from))
        .collect::<CliResult<_>>()?;
    let grid = experiment::sweep_grid(cfg.gamma_grid.as_deref())?;
    create_dir(out)?;
    let jobs = tasks(&cells, &seeds);
    let results: Vec<Result<Outcome, Failure>> = pool(workers)?.install(|| {
        jobs.par_iter()
            .map(|&(c, r, seed)| {
                let cell = &cells[c];
                let run = || -> CliResult<Outcome> {
                    let (net, outcome) = experiment::evaluate(cell, r, seed, &methods, &cfg.detection.gammas, &grid)
                        .map_err(|e| e.with_context(&format!("cell {} seed {seed}", cell.name)))?;
                    if cfg.write_networks {
                        let dir = out.join("networks").join(&cell.name).join(store::network_dir_name(r, seed));
                        store::write_network(&dir, &net, &record(cell, r, &net)?)?;
                    }
                    Ok(outcome)
                };
                run().map_err(|e| tag_failure(cell, r, seed, e))
            })
            .collect()
    });

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err(f) => failures.push(f),
        }
    }

    let mut degree_hist: BTreeMap<(String, String), BTreeMap<usize, (usize, usize)>> = BTreeMap::new();
    let mut distances = Vec::new();
    let mut scored = Vec::new();
    let mut detections = Vec::new();
    let mut envelope = Vec::new();
    for o in &outcomes {
        let s = &o.summary;
        let hist = degree_hist.entry((s.curve.clone(), s.cell.clone())).or_default();
        for (&k, &(t, r)) in &o.degrees {
            let e = hist.entry(k).or_default();
            e.0 += t;
            e.1 += r;
        }
        distances.push(DistanceRow {
            generator: s.curve.clone(),
            cell: s.cell.clone(),
            seed: s.seed,
            mu: s.achieved_mu,
            min_omega_ii: s.min_omega_ii,
            distance: s.distance,
        });
        for d in &o.detections {
            scored.push(ScoredRun {
                curve: s.curve.clone(),
                cell: s.cell.clone(),
                seed: s.seed,
                achieved_mu: s.achieved_mu,
                distance: s.distance,
                method: d.method,
                gamma: d.gamma,
                nmi: d.nmi,
            });
        }
        detections.extend(o.detections.iter().cloned());
        if let Some(intervals) = &o.intervals {
            for iv in intervals {
                envelope.push(IntervalRow {
                    cell: s.cell.clone(),
                    seed: s.seed,
                    distance: s.distance,
                    level: iv.level,
                    communities: iv.communities,
                    wins: iv.wins,
                    gamma_lo: iv.gamma_lo,
                    gamma_hi: iv.gamma_hi,
                });
            }
        }
    }
    let degrees: Vec<DegreeRow> = degree_hist
        .into_iter()
        .flat_map(|((curve, cell), hist)| {
            hist.into_iter().map(move |(degree, (target_count, realized_count))| DegreeRow {
                curve: curve.clone(),
                cell: cell.clone(),
                degree,
                target_count,
                realized_count,
            })
        })
        .collect();
    let networks: Vec<experiment::NetworkSummary> = outcomes.into_iter().map(|o| o.summary).collect();

    write_csv(&out.join("networks.csv"), NETWORK_HEADER, &networks)?;
    write_csv(&out.join("degree_histogram.csv"), DEGREE_HEADER, &degrees)?;
    write_csv(&out.join("distance_by_mu.csv"), DISTANCE_HEADER, &distances)?;
    write_csv(&out.join("detection_by_mu.csv"), BIN_HEADER, &bin_scored_runs(&scored))?;
    write_csv(&out.join("detection_runs.csv"), SCORED_HEADER, &scored)?;
    write_csv(&out.join("hierarchy_envelope.csv"), ENVELOPE_HEADER, &envelope)?;
    write_csv(&out.join("detections.csv"), DETECTION_HEADER, &detections)?;
    write_csv(&out.join("failures.csv"), FAILURE_HEADER, &failures)?;

    failure_error(&failures, jobs.len())?;
    Ok(BatchReport { networks, failures })
}

