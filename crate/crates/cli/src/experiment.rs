//! Per-network measurements and the aggregations behind the batch CSVs.

use std::collections::BTreeMap;

use hglfr::analysis::{achieved_mu, crossing_point, default_gamma_grid, mu_bin, mu_bin_center, omega_matrix, resolution_window};
use hglfr::detection::detect;
use hglfr::{gamma_sweep, modularity, nmi, GeneratedNetwork, Graph, Hierarchy, Method, Mode, Partition, ResolutionWindow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Cell;
use crate::error::CliResult;

/// Curve a cell contributes to: LFR and GLFR cells pool by mode, HGLFR
/// cells stay separate per parametrization.
pub fn curve_name(cell: &Cell) -> String {
    match cell.generator.mode {
        Mode::Hglfr => cell.name.clone(),
        mode => mode.as_str().to_string(),
    }
}

/// Window statistics of a partition, with `None` fields when the window is
/// undefined (one community).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub communities: usize,
    pub achieved_mu: f64,
    pub q_gamma1: f64,
    pub min_omega_ii: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub distance: Option<f64>,
}

pub fn level_stats(g: &Graph, p: &Partition) -> CliResult<LevelStats> {
    let omega = omega_matrix(g, p)?;
    let window: Option<ResolutionWindow> = resolution_window(&omega).ok();
    Ok(LevelStats {
        communities: p.community_count(),
        achieved_mu: achieved_mu(g, p)?,
        q_gamma1: modularity(g, p, 1.0)?,
        min_omega_ii: omega.diagonal().into_iter().fold(f64::INFINITY, f64::min),
        lower: window.map(|w| w.lower),
        upper: window.map(|w| w.upper),
        distance: window.map(|w| w.distance),
    })
}

/// One row of `networks.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub curve: String,
    pub cell: String,
    pub realization: usize,
    pub seed: u64,
    pub mode: Mode,
    pub merge_probability: Option<f64>,
    pub nodes: usize,
    pub edges: usize,
    pub communities: usize,
    pub hierarchy_levels: usize,
    pub attempts: usize,
    pub achieved_mu: f64,
    pub target_mean_degree: f64,
    pub mean_degree: f64,
    /// Fraction of nodes whose realized degree is within 2 of the target.
    pub degree_within_two: f64,
    pub dropped_internal_stubs: usize,
    pub dropped_external_stubs: usize,
    pub moved_up_stubs: usize,
    pub moved_internal_stubs: usize,
    pub min_omega_ii: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub distance: Option<f64>,
}

pub fn summarize(cell: &Cell, realization: usize, seed: u64, net: &GeneratedNetwork) -> CliResult<NetworkSummary> {
    let g = &net.graph;
    let stats = level_stats(g, net.ground_truth())?;
    let target = net.target_degrees.as_slice();
    let within = (0..g.node_count()).filter(|&v| g.degree(v).abs_diff(target[v]) <= 2).count();
    let m = &net.metadata;
    Ok(NetworkSummary {
        curve: curve_name(cell),
        cell: cell.name.clone(),
        realization,
        seed,
        mode: cell.generator.mode,
        merge_probability: cell.hierarchy_for(realization).filter(|_| cell.generator.mode == Mode::Hglfr).map(|h| h.merge_probability),
        nodes: g.node_count(),
        edges: g.edge_count(),
        communities: m.communities,
        hierarchy_levels: net.hierarchy.len(),
        attempts: m.attempts,
        achieved_mu: stats.achieved_mu,
        target_mean_degree: net.target_degrees.mean(),
        mean_degree: 2.0 * g.edge_count() as f64 / g.node_count() as f64,
        degree_within_two: within as f64 / g.node_count() as f64,
        dropped_internal_stubs: m.dropped_internal_stubs,
        dropped_external_stubs: m.dropped_external_stubs,
        moved_up_stubs: m.ledger.moved_up,
        moved_internal_stubs: m.ledger.moved_internal,
        min_omega_ii: stats.min_omega_ii,
        lower: stats.lower,
        upper: stats.upper,
        distance: stats.distance,
    })
}

/// One detection run scored against the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub network_id: String,
    pub method: Method,
    pub gamma: Option<f64>,
    pub seed: u64,
    pub nmi: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub communities: usize,
}

/// Runs every method (modularity once per gamma, label propagation once)
/// with a generator seeded by `seed`.
pub fn run_detection(
    network_id: &str,
    g: &Graph,
    truth: &Partition,
    methods: &[Method],
    gammas: &[f64],
    seed: u64,
) -> CliResult<Vec<DetectionRow>> {
    let mut rows = Vec::new();
    for &method in methods {
        let gammas: Vec<Option<f64>> = match method {
            Method::LabelPropagation => vec![None],
            Method::Modularity => gammas.iter().copied().map(Some).collect(),
        };
        for gamma in gammas {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = detect(g, method, gamma.unwrap_or(1.0), &mut rng)?;
            rows.push(DetectionRow {
                network_id: network_id.to_string(),
                method,
                gamma,
                seed,
                nmi: nmi(&r.partition, truth)?,
                q: r.modularity,
                communities: r.partition.community_count(),
            });
        }
    }
    Ok(rows)
}

/// Where one hierarchy level sits on the modularity envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelInterval {
    pub level: usize,
    pub communities: usize,
    pub wins: usize,
    pub gamma_lo: Option<f64>,
    pub gamma_hi: Option<f64>,
}

pub fn level_intervals(g: &Graph, h: &Hierarchy, grid: &[f64]) -> CliResult<Vec<LevelInterval>> {
    let sweep = gamma_sweep(g, h.levels(), grid)?;
    Ok((0..h.len())
        .map(|i| {
            let interval = sweep.interval(i);
            LevelInterval {
                level: i,
                communities: h.level(i).community_count(),
                wins: sweep.wins(i),
                gamma_lo: interval.map(|iv| iv.0),
                gamma_hi: interval.map(|iv| iv.1),
            }
        })
        .collect())
}

/// Degree histogram of targets and realized degrees.
pub fn degree_histogram(net: &GeneratedNetwork) -> BTreeMap<usize, (usize, usize)> {
    let mut hist: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for &k in net.target_degrees.as_slice() {
        hist.entry(k).or_default().0 += 1;
    }
    for k in net.graph.degrees() {
        hist.entry(k).or_default().1 += 1;
    }
    hist
}

/// Everything measured on one realization.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: NetworkSummary,
    pub detections: Vec<DetectionRow>,
    pub intervals: Option<Vec<LevelInterval>>,
    pub degrees: BTreeMap<usize, (usize, usize)>,
}

/// Generates, measures and scores one realization of a cell.
pub fn evaluate(
    cell: &Cell,
    realization: usize,
    seed: u64,
    methods: &[Method],
    gammas: &[f64],
    grid: &[f64],
) -> CliResult<(GeneratedNetwork, Outcome)> {
    let hierarchy = cell.hierarchy_for(realization);
    let net = hglfr::generate(&cell.generator, hierarchy.as_ref(), seed)?;
    let summary = summarize(cell, realization, seed, &net)?;
    let id = format!("{}/{}", cell.name, crate::store::network_dir_name(realization, seed));
    let detections = run_detection(&id, &net.graph, net.ground_truth(), methods, gammas, seed)?;
    let intervals = if net.hierarchy.len() >= 3 {
        Some(level_intervals(&net.graph, &net.hierarchy, grid)?)
    } else {
        None
    };
    let degrees = degree_histogram(&net);
    Ok((net, Outcome { summary, detections, intervals, degrees }))
}

/// Default resolution grid for sweeps.
pub fn sweep_grid(spec: Option<&str>) -> CliResult<Vec<f64>> {
    match spec {
        Some(s) => Ok(hglfr::analysis::parse_gamma_grid(s)?),
        None => Ok(default_gamma_grid()),
    }
}

/// Mean and normal-approximation 95% half-width. The half-width is 0 for
/// fewer than two values.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

/// Mean of a value per achieved-mixing bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedMean {
    pub mu_bin: f64,
    pub realizations: usize,
    pub mean: f64,
    pub ci95: f64,
}

/// Bins `(achieved_mu, value)` points in input order, keeping at most `cap`
/// points per bin and dropping bins with fewer than `min_count`.
pub fn binned_means(points: &[(f64, f64)], cap: usize, min_count: usize) -> Vec<BinnedMean> {
    let mut bins: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &(mu, v) in points {
        if let Some(b) = mu_bin(mu) {
            let values = bins.entry(b).or_default();
            if values.len() < cap {
                values.push(v);
            }
        }
    }
    bins.into_iter()
        .filter(|(_, v)| v.len() >= min_count.max(1))
        .map(|(b, v)| {
            let (mean, ci95) = mean_ci(&v);
            BinnedMean { mu_bin: mu_bin_center(b), realizations: v.len(), mean, ci95 }
        })
        .collect()
}

/// First achieved mixing at which a binned performance curve falls below
/// the midpoint of its own maximum and minimum.
pub fn half_performance_crossing(curve: &[BinnedMean]) -> Option<f64> {
    let max = curve.iter().map(|b| b.mean).fold(f64::NEG_INFINITY, f64::max);
    let min = curve.iter().map(|b| b.mean).fold(f64::INFINITY, f64::min);
    if !(max > min) {
        return None;
    }
    let points: Vec<(f64, f64)> = curve.iter().map(|b| (b.mu_bin, b.mean)).collect();
    crossing_point(&points, (max + min) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_ci_basics() {
        assert_eq!(mean_ci(&[2.0]), (2.0, 0.0));
        let (m, h) = mean_ci(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((h - 1.96 * (2.0f64 / 2.0).sqrt()).abs() < 1e-12);
        assert!(mean_ci(&[]).0.is_nan());
    }

    #[test]
    fn binning_caps_and_filters() {
        let pts = [(0.05, 1.0), (0.051, 0.0), (0.06, 0.5), (0.2, 0.3), (0.99, 0.0)];
        let b = binned_means(&pts, 2, 1);
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].realizations, 2);
        assert_eq!(b[0].mean, 0.5);
        assert!((b[1].mu_bin - 0.2).abs() < 1e-12);
        assert_eq!(binned_means(&pts, 2, 2).len(), 1);
    }

    #[test]
    fn crossing_uses_curve_range() {
        let curve: Vec<BinnedMean> = [(0.1, 0.9), (0.2, 0.9), (0.3, 0.7), (0.4, 0.5)]
            .iter()
            .map(|&(mu, mean)| BinnedMean { mu_bin: mu, realizations: 20, mean, ci95: 0.0 })
            .collect();
        assert!((half_performance_crossing(&curve).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(half_performance_crossing(&curve[..2]), None);
    }
}
