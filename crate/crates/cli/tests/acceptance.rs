//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 7 is reported but only fails the run when
//! `HGLFR_STRICT_ACCEPTANCE=1` is set.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use hglfr::analysis::{default_gamma_grid, mu_bin};
use hglfr::{
    gamma_sweep, generate, inter_community_edge_counts, maximize_modularity, modularity, nmi, omega_matrix,
    resolution_window, GeneratedNetwork, GeneratorParams, Graph, HierarchyParams, Mode, OmegaMatrix, Partition,
};
use hglfr_cli::config::{benchmark_generator, default_merge_probabilities, parametrization, RunConfig};
use hglfr_cli::experiment::{binned_means, half_performance_crossing, BinnedMean};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BENCHMARK_MU: [f64; 19] = [
    0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95,
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Structural checks applied to every network the statistical criteria
/// generate, computed from the raw edge list rather than library helpers.
#[derive(Default)]
struct InvariantLog {
    checked: Mutex<usize>,
    violations: Mutex<Vec<String>>,
}

impl InvariantLog {
    fn record(&self, label: &str, net: &GeneratedNetwork) {
        *self.checked.lock().unwrap() += 1;
        if let Err(e) = structural_check(net) {
            self.violations.lock().unwrap().push(format!("{label}: {e}"));
        }
    }
}

fn structural_check(net: &GeneratedNetwork) -> Result<(), String> {
    net.check_invariants().map_err(|e| e.to_string())?;
    let g = &net.graph;
    let n = g.node_count();

    let mut seen = HashSet::new();
    let mut degree = vec![0usize; n];
    for &(u, v) in g.edges() {
        if u == v {
            return Err(format!("self-loop at {u}"));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(format!("duplicate edge {u}-{v}"));
        }
        degree[u] += 1;
        degree[v] += 1;
    }
    if (0..n).any(|v| degree[v] != g.degree(v)) {
        return Err("adjacency disagrees with the edge list".into());
    }

    let levels = net.hierarchy.levels();
    for (i, w) in levels.windows(2).enumerate() {
        let mut parent: HashMap<usize, usize> = HashMap::new();
        for v in 0..n {
            let p = *parent.entry(w[0].community_of(v)).or_insert(w[1].community_of(v));
            if p != w[1].community_of(v) {
                return Err(format!("level {} does not coarsen level {i}", i + 1));
            }
        }
        if w[1].community_count() >= w[0].community_count() {
            return Err(format!("level {} is not strictly coarser", i + 1));
        }
    }
    if levels.last().map(Partition::community_count) != Some(1) {
        return Err("top level is not the whole network".into());
    }

    let s = &net.schedule;
    for c in 0..s.community_count() {
        let row: f64 = (0..s.level_count()).map(|l| s.mu(c, l)).sum();
        if !(row < 1.0) {
            return Err(format!("community {c} mixing row sums to {row}"));
        }
    }

    let gt = net.ground_truth();
    let sizes = gt.community_sizes();
    for v in 0..n {
        let c = gt.community_of(v);
        let internal_share: f64 = 1.0 - (0..s.level_count()).map(|l| s.mu(c, l)).sum::<f64>();
        let k = net.target_degrees.as_slice()[v] as f64;
        if !(k * internal_share < (sizes[c] - 1) as f64) {
            return Err(format!("node {v} expects more internal links than community {c} can hold"));
        }
        let realized = g.neighbors(v).iter().filter(|&&u| gt.community_of(u) == c).count();
        if realized + 1 > sizes[c] {
            return Err(format!("node {v} has {realized} internal links in a community of {}", sizes[c]));
        }
    }

    for (i, level) in levels.iter().enumerate() {
        let counts = inter_community_edge_counts(g, level).map_err(|e| e.to_string())?;
        let mut total = 0u64;
        for r in 0..counts.dim() {
            for t in r..counts.dim() {
                total += counts.get(r, t);
            }
        }
        if total != g.edge_count() as u64 {
            return Err(format!("edge counts of level {i} sum to {total}, not {}", g.edge_count()));
        }
    }
    Ok(())
}

fn hierarchy(name: &str, s: f64) -> HierarchyParams {
    let (mu, delta) = parametrization(name).unwrap();
    HierarchyParams { levels: mu.len(), merge_probability: s, mu, delta }
}

/// Merge probability of realization `r` of a hierarchical cell.
fn cycled_s(r: usize) -> f64 {
    let s = default_merge_probabilities();
    s[r % s.len()]
}

fn hglfr_params() -> GeneratorParams {
    benchmark_generator(Mode::Hglfr, 0.0, 0.0)
}

fn window_distance(g: &Graph, p: &Partition) -> f64 {
    resolution_window(&omega_matrix(g, p).unwrap()).unwrap().distance
}

fn mod_nmi(net: &GeneratedNetwork, seed: u64) -> f64 {
    let r = maximize_modularity(&net.graph, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    nmi(&r.partition, net.ground_truth()).unwrap()
}

// ---------------------------------------------------------------- criterion 1

fn brute_force_q(g: &Graph, p: &Partition, gamma: f64) -> f64 {
    let n = g.node_count();
    let two_m = 2.0 * g.edge_count() as f64;
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if p.community_of(i) != p.community_of(j) {
                continue;
            }
            let a = if g.has_edge(i, j) { 1.0 } else { 0.0 };
            q += a - gamma * (g.degree(i) * g.degree(j)) as f64 / two_m;
        }
    }
    q / two_m
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut graphs = 0;
    while graphs < 200 {
        let n = rng.random_range(2..=12);
        let p_edge: f64 = rng.random_range(0.1..0.9);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p_edge) {
                    edges.push((u, v));
                }
            }
        }
        if edges.is_empty() {
            continue;
        }
        let g = Graph::from_simple_edges(n, &edges).unwrap();
        let k = rng.random_range(1..=n);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let p = Partition::from_labels(&labels).unwrap();
        for gamma in [0.5, 1.0, 2.0] {
            let diff = (modularity(&g, &p, gamma).unwrap() - brute_force_q(&g, &p, gamma)).abs();
            worst = worst.max(diff);
        }
        graphs += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-12 && secs < 10.0, format!("{graphs} graphs, max |dQ| = {worst:.2e}, {secs:.2}s"))
}

// ---------------------------------------------------------------- criterion 2

fn criterion_2(log: &InvariantLog) -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for seed in 0..50u64 {
        let net = match seed % 3 {
            0 => generate(&benchmark_generator(Mode::Lfr, BENCHMARK_MU[seed as usize % 12], 0.0), None, seed),
            1 => generate(&benchmark_generator(Mode::Glfr, BENCHMARK_MU[seed as usize % 12], 0.3), None, seed),
            _ => {
                let name = ["Low", "Medium", "High"][seed as usize % 3];
                generate(&hglfr_params(), Some(&hierarchy(name, cycled_s(seed as usize))), seed)
            }
        }
        .unwrap();
        log.record(&format!("c2 seed {seed}"), &net);
        let g = &net.graph;
        let p = net.ground_truth();
        let c = p.community_count();
        let m = g.edge_count() as f64;
        let mut within = vec![0.0; c];
        let mut degree = vec![0.0; c];
        for &(u, v) in g.edges() {
            let (cu, cv) = (p.community_of(u), p.community_of(v));
            degree[cu] += 1.0;
            degree[cv] += 1.0;
            if cu == cv {
                within[cu] += 1.0;
            }
        }
        let identity: f64 = (0..c)
            .map(|r| {
                let omega_rr = within[r] / (degree[r] * degree[r] / (4.0 * m));
                (degree[r] / (2.0 * m)).powi(2) * (omega_rr - 1.0)
            })
            .sum();
        worst = worst.max((modularity(g, p, 1.0).unwrap() - identity).abs());
        count += 1;
    }
    outcome(worst <= 1e-9, format!("{count} networks, max |Q - identity| = {worst:.2e}"))
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3() -> Outcome {
    let omega = OmegaMatrix::from_rows(vec![
        vec![6.31, 1.75, 0.15, 0.13],
        vec![1.75, 7.38, 0.68, 0.08],
        vec![0.15, 0.68, 7.43, 0.26],
        vec![0.13, 0.08, 0.26, 1.36],
    ])
    .unwrap();
    let w = resolution_window(&omega).unwrap();
    let pass = (w.lower - 1.75).abs() <= 1e-12 && (w.upper - 1.36).abs() <= 1e-12 && (w.distance + 0.39).abs() <= 1e-12;
    outcome(pass, format!("lower {}, upper {}, D {}", w.lower, w.upper, w.distance))
}

// ---------------------------------------------------------------- criterion 4

fn criterion_4(log: &InvariantLog) -> Outcome {
    let start = Instant::now();
    let mut cells: Vec<(String, GeneratorParams, Option<&str>)> = Vec::new();
    for &mu in &BENCHMARK_MU {
        cells.push((format!("LFR mu={mu}"), benchmark_generator(Mode::Lfr, mu, 0.0), None));
        cells.push((format!("GLFR mu={mu}"), benchmark_generator(Mode::Glfr, mu, 0.3), None));
    }
    for name in ["Low", "Medium", "High"] {
        cells.push((format!("HGLFR {name}"), hglfr_params(), Some(name)));
    }
    let mut worst_mean = 0.0f64;
    let mut worst_within = 1.0f64;
    let mut failures = Vec::new();
    for (label, params, h) in &cells {
        for r in 0..20usize {
            let seed = 400 + r as u64;
            let hp = h.map(|name| hierarchy(name, cycled_s(r)));
            let net = generate(params, hp.as_ref(), seed).unwrap();
            log.record(&format!("c4 {label} seed {seed}"), &net);
            let g = &net.graph;
            let n = g.node_count();
            let mean = 2.0 * g.edge_count() as f64 / n as f64;
            let target = net.target_degrees.as_slice();
            let within = (0..n).filter(|&v| g.degree(v).abs_diff(target[v]) <= 2).count() as f64 / n as f64;
            let rel = (mean - 14.0).abs() / 14.0;
            worst_mean = worst_mean.max(rel);
            worst_within = worst_within.min(within);
            if rel > 0.10 || within < 0.95 {
                failures.push(format!("{label} seed {seed}: mean {mean:.2}, within {within:.3}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let networks = cells.len() * 20;
    outcome(
        failures.is_empty() && secs < 60.0,
        format!(
            "{networks} networks, worst mean-degree error {:.1}%, worst within-2 share {:.3}, {secs:.1}s{}",
            100.0 * worst_mean,
            worst_within,
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

// ---------------------------------------------------------------- criteria 5 and 6

/// LFR realizations of every benchmark mixing value: (achieved mu, D, NMI).
fn lfr_curve(log: &InvariantLog) -> Vec<(f64, f64, f64)> {
    let mut points = Vec::new();
    for (i, &mu) in BENCHMARK_MU.iter().enumerate() {
        for r in 0..20u64 {
            let seed = 1000 + 100 * i as u64 + r;
            let net = generate(&benchmark_generator(Mode::Lfr, mu, 0.0), None, seed).unwrap();
            log.record(&format!("c5/6 LFR mu={mu} seed {seed}"), &net);
            let gt = net.ground_truth();
            points.push((net.metadata.achieved_mu, window_distance(&net.graph, gt), mod_nmi(&net, seed)));
        }
    }
    points
}

fn criterion_5(lfr: &[(f64, f64, f64)], log: &InvariantLog) -> Outcome {
    let assortative: Vec<_> = lfr.iter().filter(|p| p.0 <= 0.4).collect();
    let lfr_negative = assortative.iter().filter(|p| p.1 < 0.0).count();

    let realizations = 400;
    let mut hits = 0;
    for r in 0..realizations {
        let seed = 5000 + r as u64;
        let net = generate(&hglfr_params(), Some(&hierarchy("High", cycled_s(r))), seed).unwrap();
        log.record(&format!("c5 High seed {seed}"), &net);
        let mu = net.metadata.achieved_mu;
        if mu < 0.5 && window_distance(&net.graph, net.ground_truth()) < 0.0 {
            hits += 1;
        }
    }
    let share = hits as f64 / realizations as f64;
    outcome(
        lfr.len() >= 100 && lfr_negative == 0 && share >= 0.10,
        format!(
            "(a) LFR: {lfr_negative} of {} networks with mu <= 0.4 have D < 0 ({} realizations); \
             (b) High: {hits}/{realizations} = {:.1}% with mu < 0.5 and D < 0",
            assortative.len(),
            lfr.len(),
            100.0 * share
        ),
    )
}

fn curve_text(curve: &[BinnedMean]) -> String {
    curve.iter().map(|b| format!("{:.2}:{:.3}", b.mu_bin, b.mean)).collect::<Vec<_>>().join(" ")
}

fn criterion_6(lfr: &[(f64, f64, f64)], log: &InvariantLog) -> Outcome {
    let low: Vec<f64> = lfr.iter().filter(|p| p.0 < 0.125).map(|p| p.2).collect();
    let low_mean = low.iter().sum::<f64>() / low.len() as f64;

    let lfr_points: Vec<(f64, f64)> = lfr.iter().map(|p| (p.0, p.2)).collect();
    let lfr_curve = binned_means(&lfr_points, 20, 20);

    // realizations in seed order until every populated bin holds 20, within a budget
    let mut per_bin: BTreeMap<usize, usize> = BTreeMap::new();
    let mut medium = Vec::new();
    for r in 0..1500usize {
        let seed = 20_000 + r as u64;
        let net = generate(&hglfr_params(), Some(&hierarchy("Medium", cycled_s(r))), seed).unwrap();
        log.record(&format!("c6 Medium seed {seed}"), &net);
        let mu = net.metadata.achieved_mu;
        let Some(bin) = mu_bin(mu) else { continue };
        let count = per_bin.entry(bin).or_default();
        if *count >= 20 {
            continue;
        }
        *count += 1;
        medium.push((mu, mod_nmi(&net, seed)));
        if r >= 400 && per_bin.values().all(|&c| c >= 20) {
            break;
        }
    }
    let medium_curve = binned_means(&medium, 20, 20);
    let lfr_cross = half_performance_crossing(&lfr_curve);
    let medium_cross = half_performance_crossing(&medium_curve);
    let ordered = matches!((medium_cross, lfr_cross), (Some(h), Some(l)) if h < l);
    outcome(
        low_mean >= 0.95 && ordered,
        format!(
            "LFR mu 0.05-0.1 mean NMI {low_mean:.3} over {} runs; half-performance crossing Medium {} vs LFR {}; \
             Medium curve [{}]; LFR curve [{}]",
            low.len(),
            medium_cross.map_or("none".into(), |x| format!("{x:.3}")),
            lfr_cross.map_or("none".into(), |x| format!("{x:.3}")),
            curve_text(&medium_curve),
            curve_text(&lfr_curve)
        ),
    )
}

// ---------------------------------------------------------------- criterion 7

fn criterion_7(log: &InvariantLog) -> Outcome {
    const WANT: usize = 20;
    const BUDGET: usize = 2500;
    // assortative networks grouped by mixing bin, split by window sign
    let mut negative: BTreeMap<usize, Vec<(u64, f64)>> = BTreeMap::new();
    let mut positive: BTreeMap<usize, Vec<(u64, f64)>> = BTreeMap::new();
    let mut nets: HashMap<u64, GeneratedNetwork> = HashMap::new();
    let matched = |neg: &BTreeMap<usize, Vec<(u64, f64)>>, pos: &BTreeMap<usize, Vec<(u64, f64)>>| -> usize {
        neg.iter().map(|(b, v)| v.len().min(pos.get(b).map_or(0, Vec::len))).sum()
    };
    let mut generated = 0;
    for r in 0..BUDGET {
        let seed = 40_000 + r as u64;
        let name = if r % 2 == 0 { "Low" } else { "Medium" };
        let net = generate(&hglfr_params(), Some(&hierarchy(name, cycled_s(r / 2))), seed).unwrap();
        log.record(&format!("c7 {name} seed {seed}"), &net);
        generated += 1;
        let mu = net.metadata.achieved_mu;
        if mu >= 0.2 {
            continue;
        }
        let Some(bin) = mu_bin(mu) else { continue };
        let d = window_distance(&net.graph, net.ground_truth());
        let side = if d < 0.0 { &mut negative } else { &mut positive };
        let list = side.entry(bin).or_default();
        list.push((seed, d));
        nets.insert(seed, net);
        if matched(&negative, &positive) >= WANT {
            break;
        }
    }
    let mut neg_nmi = Vec::new();
    let mut pos_nmi = Vec::new();
    for (bin, neg) in &negative {
        let Some(pos) = positive.get(bin) else { continue };
        for (a, b) in neg.iter().zip(pos) {
            if neg_nmi.len() == WANT {
                break;
            }
            neg_nmi.push(mod_nmi(&nets[&a.0], a.0));
            pos_nmi.push(mod_nmi(&nets[&b.0], b.0));
        }
    }
    let total_negative: usize = negative.values().map(Vec::len).sum();
    let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    let (neg_mean, pos_mean) = (mean(&neg_nmi), mean(&pos_nmi));
    let gap = pos_mean - neg_mean;
    outcome(
        neg_nmi.len() == WANT && gap >= 0.05,
        format!(
            "{generated} Low/Medium networks generated, {total_negative} with mu < 0.2 and D < 0; \
             {} matched pairs; mean NMI D<0 {neg_mean:.3} vs D>0 {pos_mean:.3} (gap {gap:.3}, need >= 0.05)",
            neg_nmi.len()
        ),
    )
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8(log: &InvariantLog) -> Outcome {
    let grid = default_gamma_grid();
    let mut ok = 0;
    let mut used = 0;
    let mut r = 0usize;
    while used < 20 && r < 200 {
        let seed = 60_000 + r as u64;
        let hp = HierarchyParams {
            levels: 2,
            merge_probability: cycled_s(r),
            mu: vec![0.3, 0.05],
            delta: vec![0.05, 0.02],
        };
        r += 1;
        let net = generate(&hglfr_params(), Some(&hp), seed).unwrap();
        log.record(&format!("c8 seed {seed}"), &net);
        if net.hierarchy.len() != 3 || window_distance(&net.graph, net.ground_truth()) <= 0.0 {
            continue;
        }
        used += 1;
        let sweep = gamma_sweep(&net.graph, net.hierarchy.levels(), &grid).unwrap();
        if sweep.wins(0) > 0 && sweep.wins(1) > 0 {
            ok += 1;
        }
    }
    outcome(
        used == 20 && ok * 10 >= used * 9,
        format!("{ok}/{used} two-level D > 0 networks have both levels on the envelope ({} grid points)", grid.len()),
    )
}

// ---------------------------------------------------------------- criterion 9

const DETERMINISM_CONFIG: &str = r#"
schema = "hglfr-config/1"
realizations = 2
base_seed = 77
gamma_grid = "0.05:20:50:log"

[generator]
nodes = 1000
avg_degree = 14.0
max_degree = 100
tau1 = 2.5
tau2 = 1.5
min_community = 50
max_community = 200
mode = "LFR"

[hierarchy]
levels = 3
mu = [0.4, 0.2, 0.1]
delta = [0.1, 0.1, 0.1]

[grid]
modes = ["LFR", "GLFR", "HGLFR"]
mu = [0.1]
parametrizations = ["Medium"]
"#;

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::TempDir::new().unwrap();
    let cfg = RunConfig::parse(DETERMINISM_CONFIG).unwrap();
    let mut trees = Vec::new();
    for run in 0..2 {
        let gen_dir = tmp.path().join(format!("generate{run}"));
        let batch_dir = tmp.path().join(format!("batch{run}"));
        hglfr_cli::commands::cmd_generate(&cfg, &gen_dir, 1 + run).unwrap();
        hglfr_cli::commands::cmd_batch(&cfg, &batch_dir, 1 + run).unwrap();
        trees.push((tree(&gen_dir), tree(&batch_dir)));
    }
    let files = trees[0].0.len() + trees[0].1.len();
    let edge_lists = trees[0].0.keys().filter(|p| p.ends_with("edges.txt")).count();
    let same = trees[0] == trees[1] && files > 0;
    outcome(same, format!("{files} files ({edge_lists} edge lists, partitions, metadata, batch CSVs) compared byte for byte"))
}

// ---------------------------------------------------------------- driver

fn main() {
    let strict = std::env::var("HGLFR_STRICT_ACCEPTANCE").is_ok_and(|v| v == "1");
    let log = InvariantLog::default();
    let mut results: Vec<(u32, &str, Outcome, bool)> = Vec::new();
    let mut run = |id: u32, name: &'static str, gating: bool, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        println!(
            "criterion {id:>2} {name}: {} ({:.1}s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
        results.push((id, name, o, gating));
    };

    run(1, "modularity oracle equivalence", true, &mut criterion_1);
    run(2, "Q-Omega identity", true, &mut || criterion_2(&log));
    run(3, "window of the four-community example", true, &mut criterion_3);
    run(4, "degree fidelity", true, &mut || criterion_4(&log));
    let lfr = lfr_curve(&log);
    run(5, "D-regime separation", true, &mut || criterion_5(&lfr, &log));
    run(6, "detection by mixing", true, &mut || criterion_6(&lfr, &log));
    run(7, "detection by window distance", strict, &mut || criterion_7(&log));
    run(8, "hierarchy detectability", true, &mut || criterion_8(&log));
    run(9, "determinism", true, &mut criterion_9);
    run(10, "structural invariants", true, &mut || {
        let checked = *log.checked.lock().unwrap();
        let violations = log.violations.lock().unwrap();
        outcome(
            violations.is_empty() && checked > 0,
            format!(
                "{checked} networks checked, {} violations{}",
                violations.len(),
                violations.first().map_or(String::new(), |v| format!("; first: {v}"))
            ),
        )
    });

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    let gating: Vec<u32> = results.iter().filter(|r| !r.2.pass && r.3).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!("; failing: {failed:?}") }
    );
    if !gating.is_empty() {
        std::process::exit(1);
    }
}
