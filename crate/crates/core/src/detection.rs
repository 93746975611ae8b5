//! Community-detection baselines and partition similarity.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::modularity;
use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};

/// Sweep cap for label propagation.
pub const MAX_LPA_SWEEPS: usize = 100;

const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "lp")]
    LabelPropagation,
    #[serde(rename = "mod")]
    Modularity,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::LabelPropagation => "lp",
            Method::Modularity => "mod",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        match tag.trim() {
            "lp" | "label_propagation" => Ok(Method::LabelPropagation),
            "mod" | "modularity" => Ok(Method::Modularity),
            other => Err(Error::Parameter(format!("unknown detection method {other:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub partition: Partition,
    pub method: Method,
    /// Resolution used; `None` for label propagation.
    pub gamma: Option<f64>,
    /// Sweeps (label propagation) or aggregation levels (modularity).
    pub iterations: usize,
    /// Modularity of the result at `gamma`, or at 1 when no resolution applies.
    /// Zero for graphs without edges.
    pub modularity: f64,
}

fn score(g: &Graph, p: &Partition, gamma: f64) -> Result<f64> {
    if g.edge_count() == 0 {
        Ok(0.0)
    } else {
        modularity(g, p, gamma)
    }
}

/// Asynchronous label propagation. Nodes visited in random order take the
/// most frequent label among their neighbors, breaking ties uniformly.
/// Stops once every label is modal in its neighborhood, or after
/// [`MAX_LPA_SWEEPS`] sweeps.
pub fn label_propagation<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Result<DetectionResult> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::UndefinedInput("graph has no nodes".into()));
    }
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut counts = vec![0usize; n];
    let mut best = Vec::new();
    let modal = |v: usize, labels: &[usize], counts: &mut [usize], best: &mut Vec<usize>| {
        best.clear();
        let mut top = 0;
        for &u in g.neighbors(v) {
            counts[labels[u]] += 1;
        }
        for &u in g.neighbors(v) {
            let c = counts[labels[u]];
            if c > top {
                top = c;
                best.clear();
            }
            if c == top && !best.contains(&labels[u]) {
                best.push(labels[u]);
            }
        }
        for &u in g.neighbors(v) {
            counts[labels[u]] = 0;
        }
    };
    let mut sweeps = 0;
    while sweeps < MAX_LPA_SWEEPS {
        sweeps += 1;
        order.shuffle(rng);
        for &v in &order {
            modal(v, &labels, &mut counts, &mut best);
            if let Some(&l) = best.choose(rng) {
                labels[v] = l;
            }
        }
        let settled = (0..n).all(|v| {
            modal(v, &labels, &mut counts, &mut best);
            best.is_empty() || best.contains(&labels[v])
        });
        if settled {
            break;
        }
    }
    let partition = Partition::from_labels(&labels)?;
    let q = score(g, &partition, 1.0)?;
    Ok(DetectionResult {
        partition,
        method: Method::LabelPropagation,
        gamma: None,
        iterations: sweeps,
        modularity: q,
    })
}

/// Weighted graph with self-loops, used for aggregation levels.
struct WeightedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    strength: Vec<f64>,
}

impl WeightedGraph {
    fn from_graph(g: &Graph) -> Self {
        let adjacency: Vec<Vec<(usize, f64)>> = (0..g.node_count())
            .map(|v| g.neighbors(v).iter().map(|&u| (u, 1.0)).collect())
            .collect();
        let strength = (0..g.node_count()).map(|v| g.degree(v) as f64).collect();
        Self {
            adjacency,
            self_loops: vec![0.0; g.node_count()],
            strength,
        }
    }

    fn len(&self) -> usize {
        self.adjacency.len()
    }

    fn aggregate(&self, community: &[usize], count: usize) -> Self {
        let mut self_loops = vec![0.0; count];
        let mut strength = vec![0.0; count];
        let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); count];
        for v in 0..self.len() {
            let cv = community[v];
            strength[cv] += self.strength[v];
            self_loops[cv] += self.self_loops[v];
            for &(u, w) in &self.adjacency[v] {
                let cu = community[u];
                if cu == cv {
                    // each internal edge is seen from both ends
                    self_loops[cv] += w / 2.0;
                } else {
                    *maps[cv].entry(cu).or_insert(0.0) += w;
                }
            }
        }
        let adjacency = maps
            .into_iter()
            .map(|m| {
                let mut row: Vec<(usize, f64)> = m.into_iter().collect();
                row.sort_by_key(|e| e.0);
                row
            })
            .collect();
        Self {
            adjacency,
            self_loops,
            strength,
        }
    }
}

/// One round of local moves; returns whether any node moved.
fn local_moves<R: Rng + ?Sized>(
    wg: &WeightedGraph,
    community: &mut [usize],
    gamma: f64,
    two_m: f64,
    rng: &mut R,
) -> bool {
    let n = wg.len();
    let mut total: Vec<f64> = vec![0.0; n];
    for v in 0..n {
        total[community[v]] += wg.strength[v];
    }
    let mut weight_to = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    let mut any = false;
    loop {
        order.shuffle(rng);
        let mut moved = false;
        for &v in &order {
            let own = community[v];
            let k = wg.strength[v];
            for &(u, w) in &wg.adjacency[v] {
                let c = community[u];
                if weight_to[c] == 0.0 {
                    touched.push(c);
                }
                weight_to[c] += w;
            }
            total[own] -= k;
            let gain = |c: usize, w: f64| w - gamma * k * total[c] / two_m;
            let stay = gain(own, weight_to[own]);
            let mut best = own;
            let mut best_gain = stay;
            // only strict improvements move a node; ties keep the earlier candidate
            for &c in &touched {
                let gc = gain(c, weight_to[c]);
                if c != own && gc > best_gain + GAIN_EPS {
                    best = c;
                    best_gain = gc;
                }
            }
            total[best] += k;
            community[v] = best;
            if best != own {
                moved = true;
            }
            for &c in &touched {
                weight_to[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
        any = true;
    }
    any
}

fn renumber(labels: &mut [usize]) -> usize {
    let mut map = HashMap::new();
    for l in labels.iter_mut() {
        let next = map.len();
        *l = *map.entry(*l).or_insert(next);
    }
    map.len()
}

/// Splits every community into its connected components.
pub fn split_disconnected(g: &Graph, p: &Partition) -> Result<Partition> {
    let n = g.node_count();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &u in g.neighbors(v) {
                if label[u] == usize::MAX && p.community_of(u) == p.community_of(s) {
                    label[u] = next;
                    stack.push(u);
                }
            }
        }
        next += 1;
    }
    Partition::from_labels(&label)
}

/// Louvain-style maximization of generalized modularity at `gamma`, followed
/// by a refinement that splits every community into connected components.
/// The result is never worse than the one-community or singleton partition.
pub fn maximize_modularity<R: Rng + ?Sized>(
    g: &Graph,
    gamma: f64,
    rng: &mut R,
) -> Result<DetectionResult> {
    if g.edge_count() == 0 {
        return Err(Error::UndefinedInput("graph has no edges".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!("resolution must be positive, got {gamma}")));
    }
    let two_m = 2.0 * g.edge_count() as f64;
    let mut node_comm: Vec<usize> = (0..g.node_count()).collect();
    let mut wg = WeightedGraph::from_graph(g);
    let mut levels = 0;
    loop {
        let mut comm: Vec<usize> = (0..wg.len()).collect();
        let moved = local_moves(&wg, &mut comm, gamma, two_m, rng);
        if !moved {
            break;
        }
        levels += 1;
        let count = renumber(&mut comm);
        for c in node_comm.iter_mut() {
            *c = comm[*c];
        }
        if count == wg.len() {
            break;
        }
        wg = wg.aggregate(&comm, count);
    }
    let found = split_disconnected(g, &Partition::from_labels(&node_comm)?)?;
    let mut best = (modularity(g, &found, gamma)?, found);
    for baseline in [Partition::whole(g.node_count()), Partition::singletons(g.node_count())] {
        let q = modularity(g, &baseline, gamma)?;
        if q > best.0 {
            best = (q, baseline);
        }
    }
    Ok(DetectionResult {
        partition: best.1,
        method: Method::Modularity,
        gamma: Some(gamma),
        iterations: levels,
        modularity: best.0,
    })
}

/// Runs `method`; `gamma` only affects modularity maximization.
pub fn detect<R: Rng + ?Sized>(g: &Graph, method: Method, gamma: f64, rng: &mut R) -> Result<DetectionResult> {
    match method {
        Method::LabelPropagation => label_propagation(g, rng),
        Method::Modularity => maximize_modularity(g, gamma, rng),
    }
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with arithmetic-mean normalization.
pub fn nmi(a: &Partition, b: &Partition) -> Result<f64> {
    if a.node_count() != b.node_count() {
        return Err(Error::Validation(format!(
            "partitions cover {} and {} nodes",
            a.node_count(),
            b.node_count()
        )));
    }
    let n = a.node_count() as f64;
    let ha = entropy(a.community_sizes().iter().copied(), n);
    let hb = entropy(b.community_sizes().iter().copied(), n);
    match (ha == 0.0, hb == 0.0) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    // ordered so the floating-point sum is reproducible
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for v in 0..a.node_count() {
        *joint.entry((a.community_of(v), b.community_of(v))).or_insert(0) += 1;
    }
    let (sa, sb) = (a.community_sizes(), b.community_sizes());
    let mi: f64 = joint
        .iter()
        .map(|(&(r, s), &c)| {
            let c = c as f64;
            c / n * (c * n / (sa[r] as f64 * sb[s] as f64)).ln()
        })
        .sum();
    Ok((2.0 * mi / (ha + hb)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn clique_edges(start: usize, size: usize, edges: &mut Vec<(usize, usize)>) {
        for i in 0..size {
            for j in i + 1..size {
                edges.push((start + i, start + j));
            }
        }
    }

    fn disjoint_cliques(count: usize, size: usize) -> (Graph, Partition) {
        let mut edges = Vec::new();
        for c in 0..count {
            clique_edges(c * size, size, &mut edges);
        }
        let truth = Partition::new((0..count * size).map(|v| v / size).collect()).unwrap();
        (Graph::build(count * size, &edges).unwrap(), truth)
    }

    fn ring_of_cliques(count: usize, size: usize) -> (Graph, Partition) {
        let mut edges = Vec::new();
        for c in 0..count {
            clique_edges(c * size, size, &mut edges);
            edges.push((c * size, ((c + 1) % count) * size + 1));
        }
        let truth = Partition::new((0..count * size).map(|v| v / size).collect()).unwrap();
        (Graph::build(count * size, &edges).unwrap(), truth)
    }

    fn is_connected_within(g: &Graph, p: &Partition) -> bool {
        split_disconnected(g, p).unwrap().community_count() == p.community_count()
    }

    #[test]
    fn lpa_finds_disjoint_cliques() {
        let (g, truth) = disjoint_cliques(2, 6);
        for seed in 0..20 {
            let r = label_propagation(&g, &mut rng(seed)).unwrap();
            assert_eq!(nmi(&r.partition, &truth).unwrap(), 1.0);
            assert_eq!(r.partition.community_count(), 2);
        }
    }

    #[test]
    fn lpa_on_complete_graph() {
        let (g, _) = disjoint_cliques(1, 8);
        for seed in 0..20 {
            let r = label_propagation(&g, &mut rng(seed)).unwrap();
            assert_eq!(r.partition.community_count(), 1);
        }
    }

    #[test]
    fn modularity_finds_equal_cliques() {
        let (g, truth) = disjoint_cliques(2, 5);
        let r = maximize_modularity(&g, 1.0, &mut rng(3)).unwrap();
        assert_eq!(nmi(&r.partition, &truth).unwrap(), 1.0);
        assert!((r.modularity - 0.5).abs() < 1e-12);
        assert!((r.modularity - modularity(&g, &r.partition, 1.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn tiny_resolution_gives_one_community() {
        let (g, _) = ring_of_cliques(4, 5);
        let r = maximize_modularity(&g, 1e-4, &mut rng(1)).unwrap();
        assert_eq!(r.partition.community_count(), 1);
    }

    #[test]
    fn ring_of_cliques_matches_best_clique_grouping() {
        let (g, truth) = ring_of_cliques(4, 5);
        // brute force over all groupings of the four cliques
        let mut best = f64::NEG_INFINITY;
        for code in 0..4usize.pow(4) {
            let labels: Vec<usize> = (0..4).map(|c| (code / 4usize.pow(c as u32)) % 4).collect();
            let p = Partition::from_labels(&(0..20).map(|v| labels[v / 5]).collect::<Vec<_>>()).unwrap();
            best = best.max(modularity(&g, &p, 1.0).unwrap());
        }
        let q_truth = modularity(&g, &truth, 1.0).unwrap();
        assert!((best - q_truth).abs() < 1e-12);
        for seed in 0..10 {
            let r = maximize_modularity(&g, 1.0, &mut rng(seed)).unwrap();
            assert_eq!(nmi(&r.partition, &truth).unwrap(), 1.0, "seed {seed}");
        }
    }

    #[test]
    fn result_beats_baselines_and_is_connected() {
        let (g, _) = ring_of_cliques(6, 4);
        for gamma in [0.1, 0.5, 1.0, 2.0, 8.0, 50.0] {
            let r = maximize_modularity(&g, gamma, &mut rng(9)).unwrap();
            assert!(r.modularity >= modularity(&g, &Partition::whole(24), gamma).unwrap() - 1e-12);
            assert!(r.modularity >= modularity(&g, &Partition::singletons(24), gamma).unwrap() - 1e-12);
            assert!(is_connected_within(&g, &r.partition));
        }
    }

    #[test]
    fn split_separates_components() {
        let g = Graph::build(4, &[(0, 1), (2, 3)]).unwrap();
        let p = split_disconnected(&g, &Partition::whole(4)).unwrap();
        assert_eq!(p.community_count(), 2);
    }

    #[test]
    fn invalid_modularity_inputs() {
        let g = Graph::build(2, &[]).unwrap();
        assert!(maximize_modularity(&g, 1.0, &mut rng(0)).is_err());
        let g = Graph::build(2, &[(0, 1)]).unwrap();
        assert!(maximize_modularity(&g, 0.0, &mut rng(0)).is_err());
    }

    #[test]
    fn nmi_cases() {
        let p = Partition::new(vec![0, 0, 1, 1]).unwrap();
        let q = Partition::new(vec![0, 1, 0, 1]).unwrap();
        assert_eq!(nmi(&p, &p).unwrap(), 1.0);
        assert!(nmi(&p, &q).unwrap().abs() < 1e-12);
        assert_eq!(nmi(&Partition::whole(4), &p).unwrap(), 0.0);
        assert_eq!(nmi(&p, &Partition::whole(4)).unwrap(), 0.0);
        assert_eq!(nmi(&Partition::whole(4), &Partition::whole(4)).unwrap(), 1.0);
        assert!(nmi(&p, &Partition::whole(3)).is_err());
        let relabelled = Partition::new(vec![1, 1, 0, 0]).unwrap();
        assert_eq!(nmi(&p, &relabelled).unwrap(), 1.0);
    }

    #[test]
    fn nmi_is_symmetric() {
        let a = Partition::new(vec![0, 0, 1, 1, 2, 2, 2]).unwrap();
        let b = Partition::new(vec![0, 1, 1, 1, 0, 2, 2]).unwrap();
        let (x, y) = (nmi(&a, &b).unwrap(), nmi(&b, &a).unwrap());
        assert!((x - y).abs() < 1e-15 && x > 0.0 && x < 1.0);
    }

    #[test]
    fn method_tags_round_trip() {
        for m in [Method::LabelPropagation, Method::Modularity] {
            assert_eq!(Method::parse(m.tag()).unwrap(), m);
        }
        assert!(Method::parse("infomap").is_err());
    }
}
