//! Edge realization: internal configuration-model wiring per community,
//! hierarchy-weighted external wiring per grouping level, and the full
//! generation pipeline.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{inter_community_edge_counts, Graph, Hierarchy, Partition};
use crate::sampling::{
    assign_mixing, assign_nodes, fits_community, sample_community_sizes, sample_hierarchy,
    sample_power_law_degrees, shuffle_groups, DegreeSequence, GeneratorParams, GroupingChain,
    HierarchyParams, MixingSchedule, Mode, DEFAULT_PLACEMENT_SWEEPS,
};

/// Rewiring rounds a colliding stub pair gets before it is dropped.
pub const REPAIR_ROUNDS: usize = 2;

/// Whole-pipeline attempts before generation reports failure.
pub const MAX_ATTEMPTS: usize = 10;

/// Bound on hierarchy shuffling swaps.
pub const MAX_SHUFFLE_SWAPS: usize = 1000;

fn canonical(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Stubs moved or discarded while making the level budgets matchable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerAdjustments {
    /// Stubs moved to the next level at which the community gains siblings.
    pub moved_up: usize,
    /// Stubs moved from the top level into the internal budget.
    pub moved_internal: usize,
    /// Stubs that could be placed nowhere.
    pub dropped: usize,
}

/// Per-node stub budgets, internal and per grouping level, with residuals
/// that wiring consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct StubLedger {
    internal: Vec<usize>,
    external: Vec<Vec<usize>>,
    residual_internal: Vec<usize>,
    residual_external: Vec<Vec<usize>>,
    adjustments: LedgerAdjustments,
}

impl StubLedger {
    /// Ledger with explicit budgets; `external[v][level]`.
    pub fn from_budgets(internal: Vec<usize>, external: Vec<Vec<usize>>) -> Result<Self> {
        if internal.len() != external.len() {
            return Err(Error::Validation("internal and external budgets disagree on node count".into()));
        }
        Ok(Self {
            residual_internal: internal.clone(),
            residual_external: external.clone(),
            internal,
            external,
            adjustments: LedgerAdjustments::default(),
        })
    }

    /// Splits each node's target degree into internal and per-level budgets.
    ///
    /// Rounding is largest-remainder: each node's budgets sum to its degree
    /// and the community's column totals track `mu(c, i) * K_c`. Afterwards,
    /// each merging group at each level is made matchable: a subgroup holding
    /// more than half of the group's level stubs passes its excess to the
    /// next level where its community gains siblings, or into the internal
    /// budget at the top, and odd group totals lose one stub the same way.
    pub fn plan<R: Rng + ?Sized>(
        degrees: &DegreeSequence,
        partition: &Partition,
        chain: &GroupingChain,
        schedule: &MixingSchedule,
        rng: &mut R,
    ) -> Result<Self> {
        let n = degrees.len();
        let levels = chain.level_count();
        if partition.node_count() != n
            || schedule.community_count() != partition.community_count()
            || chain.community_count() != partition.community_count()
            || schedule.level_count() != levels
        {
            return Err(Error::Validation("ledger inputs disagree on node, community or level counts".into()));
        }
        let k = degrees.as_slice();
        let mut internal = vec![0usize; n];
        let mut external = vec![vec![0usize; levels]; n];

        for (c, nodes) in partition.members().iter().enumerate() {
            let mut fractions = vec![schedule.internal_fraction(c)];
            fractions.extend_from_slice(schedule.row(c));
            let budgets = round_community(nodes.iter().map(|&v| k[v]).collect(), &fractions, rng);
            for (row, &v) in budgets.into_iter().zip(nodes) {
                internal[v] = row[0];
                external[v].copy_from_slice(&row[1..]);
            }
        }

        let sizes = partition.community_sizes();
        let mut adjustments = LedgerAdjustments::default();
        // Cap internal budgets at |c| - 1; the excess cannot be wired anywhere.
        for v in 0..n {
            let cap = sizes[partition.community_of(v)] - 1;
            if internal[v] > cap {
                adjustments.dropped += internal[v] - cap;
                internal[v] = cap;
            }
        }

        for level in 0..levels {
            for group in chain.members(level) {
                // stub lists per subgroup
                let mut subs: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
                for &c in &group {
                    subs.entry(chain.subgroup_of(level, c)).or_default();
                }
                if subs.len() < 2 {
                    continue;
                }
                let totals: Vec<(usize, usize)> = subs
                    .keys()
                    .map(|&s| {
                        let t = group
                            .iter()
                            .filter(|&&c| chain.subgroup_of(level, c) == s)
                            .map(|&c| {
                                partition.members()[c].iter().map(|&v| external[v][level]).sum::<usize>()
                            })
                            .sum();
                        (s, t)
                    })
                    .collect();
                let sum: usize = totals.iter().map(|t| t.1).sum();
                let &(heavy, max) = totals.iter().max_by_key(|t| (t.1, std::cmp::Reverse(t.0))).unwrap();
                let mut excess = (2 * max).saturating_sub(sum);
                if (sum - excess) % 2 == 1 {
                    excess += 1;
                }
                if excess == 0 {
                    continue;
                }
                let mut stubs: Vec<usize> = group
                    .iter()
                    .filter(|&&c| chain.subgroup_of(level, c) == heavy)
                    .flat_map(|&c| partition.members()[c].clone())
                    .flat_map(|v| std::iter::repeat_n(v, external[v][level]))
                    .collect();
                stubs.shuffle(rng);
                for &v in stubs.iter().take(excess) {
                    external[v][level] -= 1;
                    let c = partition.community_of(v);
                    match (level + 1..levels).find(|&j| schedule.mu(c, j) > 0.0) {
                        Some(j) => {
                            external[v][j] += 1;
                            adjustments.moved_up += 1;
                        }
                        None if internal[v] < sizes[c] - 1 => {
                            internal[v] += 1;
                            adjustments.moved_internal += 1;
                        }
                        None => adjustments.dropped += 1,
                    }
                }
            }
        }

        // even internal totals per community
        for nodes in partition.members() {
            let total: usize = nodes.iter().map(|&v| internal[v]).sum();
            if total % 2 == 1 {
                let holders: Vec<usize> = nodes.iter().copied().filter(|&v| internal[v] > 0).collect();
                let v = holders[rng.random_range(0..holders.len())];
                internal[v] -= 1;
                adjustments.dropped += 1;
            }
        }

        let mut ledger = Self::from_budgets(internal, external)?;
        ledger.adjustments = adjustments;
        Ok(ledger)
    }

    pub fn node_count(&self) -> usize {
        self.internal.len()
    }

    pub fn level_count(&self) -> usize {
        self.external.first().map_or(0, Vec::len)
    }

    pub fn internal(&self, v: usize) -> usize {
        self.internal[v]
    }

    pub fn external(&self, v: usize, level: usize) -> usize {
        self.external[v][level]
    }

    pub fn total(&self, v: usize) -> usize {
        self.internal[v] + self.external[v].iter().sum::<usize>()
    }

    pub fn residual_internal(&self, v: usize) -> usize {
        self.residual_internal[v]
    }

    pub fn residual_external(&self, v: usize, level: usize) -> usize {
        self.residual_external[v][level]
    }

    pub fn adjustments(&self) -> LedgerAdjustments {
        self.adjustments
    }
}

/// Largest-remainder rounding of `degree * fraction` for a community.
///
/// Rows (nodes) always sum to the node's degree; columns get as close to the
/// rounded community total as the row constraint allows. Columns with a zero
/// fraction never receive stubs.
fn round_community<R: Rng + ?Sized>(
    degrees: Vec<usize>,
    fractions: &[f64],
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let cols = fractions.len();
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(degrees.len());
    let mut node_deficit = Vec::with_capacity(degrees.len());
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    let mut col_exact = vec![0.0; cols];
    let mut col_floor = vec![0usize; cols];
    for (i, &k) in degrees.iter().enumerate() {
        let mut row = Vec::with_capacity(cols);
        for (j, &f) in fractions.iter().enumerate() {
            let x = k as f64 * f;
            let fl = x.floor() as usize;
            row.push(fl);
            col_exact[j] += x;
            col_floor[j] += fl;
            if f > 0.0 {
                cells.push((i, j, x - fl as f64));
            }
        }
        node_deficit.push(k - row.iter().sum::<usize>());
        rows.push(row);
    }
    let k_total: usize = degrees.iter().sum();
    // rounded column targets that add up to the community's total degree
    let mut col_target: Vec<usize> = col_exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| {
        let ra = col_exact[a] - col_exact[a].floor();
        let rb = col_exact[b] - col_exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut short = k_total.saturating_sub(col_target.iter().sum());
    for &j in order.iter().cycle().take(cols * 2) {
        if short == 0 {
            break;
        }
        if fractions[j] > 0.0 {
            col_target[j] += 1;
            short -= 1;
        }
    }
    let mut col_deficit: Vec<usize> = (0..cols)
        .map(|j| col_target[j].saturating_sub(col_floor[j]))
        .collect();

    cells.shuffle(rng);
    cells.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());
    for &(i, j, _) in &cells {
        if node_deficit[i] > 0 && col_deficit[j] > 0 {
            rows[i][j] += 1;
            node_deficit[i] -= 1;
            col_deficit[j] -= 1;
        }
    }
    // whatever the greedy pass stranded goes to the node's largest fraction
    let fallback = (0..cols)
        .max_by(|&a, &b| fractions[a].partial_cmp(&fractions[b]).unwrap().then(b.cmp(&a)))
        .unwrap();
    for (i, deficit) in node_deficit.iter().enumerate() {
        if *deficit > 0 {
            let j = (0..cols)
                .find(|&j| col_deficit[j] > 0 && fractions[j] > 0.0)
                .unwrap_or(fallback);
            rows[i][j] += deficit;
            col_deficit[j] = col_deficit[j].saturating_sub(*deficit);
        }
    }
    rows
}

/// Edges produced by one wiring call and the stubs it had to discard.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Wired {
    pub edges: Vec<(usize, usize)>,
    pub dropped_stubs: usize,
}

/// Tries to replace a colliding pair `(u, v)` by swapping endpoints with an
/// accepted edge. `allowed` decides whether a new pair may exist.
fn try_swap<R: Rng + ?Sized>(
    u: usize,
    v: usize,
    accepted: &mut Vec<(usize, usize)>,
    present: &mut HashSet<(usize, usize)>,
    allowed: &dyn Fn(usize, usize) -> bool,
    rng: &mut R,
) -> bool {
    if accepted.is_empty() {
        return false;
    }
    let start = rng.random_range(0..accepted.len());
    for offset in 0..accepted.len() {
        let idx = (start + offset) % accepted.len();
        let (x, y) = accepted[idx];
        present.remove(&(x, y));
        for (a, b, c, d) in [(u, x, v, y), (u, y, v, x)] {
            let (e1, e2) = (canonical(a, b), canonical(c, d));
            if a != b
                && c != d
                && e1 != e2
                && allowed(a, b)
                && allowed(c, d)
                && !present.contains(&e1)
                && !present.contains(&e2)
            {
                accepted.swap_remove(idx);
                present.insert(e1);
                present.insert(e2);
                accepted.push(e1);
                accepted.push(e2);
                return true;
            }
        }
        present.insert((x, y));
    }
    false
}

/// Accepts pairs that form new simple edges and repairs the rest by
/// rewiring for [`REPAIR_ROUNDS`] rounds; leftovers are dropped.
fn settle_pairs<R: Rng + ?Sized>(
    pairs: Vec<(usize, usize)>,
    present: &mut HashSet<(usize, usize)>,
    allowed: &dyn Fn(usize, usize) -> bool,
    rng: &mut R,
) -> Wired {
    let mut accepted = Vec::with_capacity(pairs.len());
    let mut pending = Vec::new();
    for (u, v) in pairs {
        let e = canonical(u, v);
        if u != v && !present.contains(&e) {
            present.insert(e);
            accepted.push(e);
        } else {
            pending.push((u, v));
        }
    }
    let mut unpaired = 0;
    for _ in 0..REPAIR_ROUNDS {
        if pending.is_empty() {
            break;
        }
        // rematch the colliding stubs among themselves, then swap the rest
        // into already accepted edges
        let mut stubs: Vec<usize> = pending.drain(..).flat_map(|(u, v)| [u, v]).collect();
        stubs.shuffle(rng);
        while let Some(u) = stubs.pop() {
            let fits = |v: usize| u != v && allowed(u, v) && !present.contains(&canonical(u, v));
            if let Some(i) = stubs.iter().rposition(|&v| fits(v)) {
                let e = canonical(u, stubs.swap_remove(i));
                present.insert(e);
                accepted.push(e);
            } else if let Some(v) = stubs.pop() {
                if !try_swap(u, v, &mut accepted, present, allowed, rng) {
                    pending.push((u, v));
                }
            } else {
                unpaired += 1;
            }
        }
    }
    Wired {
        dropped_stubs: 2 * pending.len() + unpaired,
        edges: accepted,
    }
}

/// Configuration-model wiring of one community's internal stubs.
pub fn wire_internal<R: Rng + ?Sized>(
    nodes: &[usize],
    ledger: &mut StubLedger,
    rng: &mut R,
) -> Result<Wired> {
    if nodes.len() == 1 && ledger.residual_internal[nodes[0]] > 0 {
        return Err(Error::Generation(format!(
            "node {} is alone in its community but has {} internal stubs",
            nodes[0], ledger.residual_internal[nodes[0]]
        )));
    }
    let mut stubs: Vec<usize> = nodes
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, ledger.residual_internal[v]))
        .collect();
    let mut dropped = 0;
    if stubs.len() % 2 == 1 {
        let i = rng.random_range(0..stubs.len());
        let v = stubs.swap_remove(i);
        ledger.residual_internal[v] -= 1;
        dropped += 1;
    }
    stubs.shuffle(rng);
    let pairs: Vec<(usize, usize)> = stubs.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    let mut present = HashSet::with_capacity(pairs.len());
    let mut wired = settle_pairs(pairs, &mut present, &|_, _| true, rng);
    for &(u, v) in &wired.edges {
        ledger.residual_internal[u] -= 1;
        ledger.residual_internal[v] -= 1;
    }
    wired.dropped_stubs += dropped;
    Ok(wired)
}

/// Wires every level's external stubs.
///
/// At each level, the stubs of a merging group are matched across its
/// subgroups only, so communities that first share a group at level `i`
/// are connected exclusively from their level-`i` budgets. Each pairing
/// draws one stub from the subgroup with the most remaining stubs and a
/// uniformly random stub from the other subgroups.
pub fn wire_external<R: Rng + ?Sized>(
    partition: &Partition,
    chain: &GroupingChain,
    schedule: &MixingSchedule,
    ledger: &mut StubLedger,
    rng: &mut R,
) -> Result<Wired> {
    if chain.level_count() != ledger.level_count() || schedule.level_count() != ledger.level_count() {
        return Err(Error::Validation("ledger and hierarchy disagree on level count".into()));
    }
    let members = partition.members();
    let mut present = HashSet::new();
    let mut out = Wired::default();
    for level in 0..chain.level_count() {
        for group in chain.members(level) {
            let mut sub_ids: Vec<usize> = group.iter().map(|&c| chain.subgroup_of(level, c)).collect();
            sub_ids.sort_unstable();
            sub_ids.dedup();
            if sub_ids.len() < 2 {
                continue;
            }
            let mut pools: Vec<Vec<usize>> = vec![Vec::new(); sub_ids.len()];
            for &c in &group {
                let s = sub_ids.binary_search(&chain.subgroup_of(level, c)).unwrap();
                for &v in &members[c] {
                    pools[s].extend(std::iter::repeat_n(v, ledger.residual_external[v][level]));
                }
            }
            let total: usize = pools.iter().map(Vec::len).sum();
            if total == 0 {
                continue;
            }
            if pools.iter().filter(|p| !p.is_empty()).count() < 2 {
                return Err(Error::Generation(format!(
                    "grouping level {level}: {total} external stubs have no counterpart stubs"
                )));
            }
            for p in pools.iter_mut() {
                p.shuffle(rng);
            }
            let mut pairs = Vec::with_capacity(total / 2);
            loop {
                let (heavy, heavy_len) = pools
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, p.len()))
                    .max_by_key(|&(i, len)| (len, std::cmp::Reverse(i)))
                    .unwrap();
                let others: usize = pools.iter().map(Vec::len).sum::<usize>() - heavy_len;
                if heavy_len == 0 || others == 0 {
                    break;
                }
                let mut pick = rng.random_range(0..others);
                let partner = (0..pools.len())
                    .filter(|&i| i != heavy)
                    .find(|&i| {
                        if pick < pools[i].len() {
                            true
                        } else {
                            pick -= pools[i].len();
                            false
                        }
                    })
                    .unwrap();
                let u = pools[heavy].pop().unwrap();
                let v = pools[partner].pop().unwrap();
                pairs.push((u, v));
            }
            let leftover: usize = pools.iter().map(Vec::len).sum();
            let sub_of_node = |v: usize| chain.subgroup_of(level, partition.community_of(v));
            let allowed = |a: usize, b: usize| sub_of_node(a) != sub_of_node(b);
            let wired = settle_pairs(pairs, &mut present, &allowed, rng);
            for &(u, v) in &wired.edges {
                ledger.residual_external[u][level] -= 1;
                ledger.residual_external[v][level] -= 1;
            }
            out.dropped_stubs += wired.dropped_stubs + leftover;
            out.edges.extend(wired.edges);
        }
    }
    Ok(out)
}

/// Bookkeeping serialized next to every generated network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationMetadata {
    pub mode: Mode,
    pub seed: u64,
    /// Pipeline attempts used, including the successful one.
    pub attempts: usize,
    pub nodes: usize,
    pub edges: usize,
    pub communities: usize,
    /// Group counts per grouping level.
    pub groups_per_level: Vec<usize>,
    pub target_degree_sum: usize,
    pub dropped_internal_stubs: usize,
    pub dropped_external_stubs: usize,
    pub ledger: LedgerAdjustments,
    pub shuffle_swaps: usize,
    pub rescaled_mixing_rows: usize,
    pub achieved_mu: f64,
}

/// A generated benchmark network with its ground truth and provenance.
#[derive(Debug, Clone)]
pub struct GeneratedNetwork {
    pub graph: Graph,
    /// Ground truth followed by one partition per grouping level.
    pub hierarchy: Hierarchy,
    pub chain: GroupingChain,
    pub schedule: MixingSchedule,
    pub target_degrees: DegreeSequence,
    pub metadata: GenerationMetadata,
}

impl GeneratedNetwork {
    pub fn ground_truth(&self) -> &Partition {
        self.hierarchy.ground_truth()
    }

    /// Structural checks every generated network must pass.
    pub fn check_invariants(&self) -> Result<()> {
        self.graph.check_invariants()?;
        self.hierarchy.check_invariants()?;
        self.chain.check_invariants()?;
        self.schedule.check_invariants()?;
        let gt = self.ground_truth();
        for c in 0..self.schedule.community_count() {
            if self.schedule.external_fraction(c) >= 1.0 {
                return Err(Error::Validation(format!("community {c} mixing row sums to 1 or more")));
            }
        }
        let sizes = gt.community_sizes();
        for (v, &k) in self.target_degrees.as_slice().iter().enumerate() {
            let c = gt.community_of(v);
            if !fits_community(k, self.schedule.internal_fraction(c), sizes[c]) {
                return Err(Error::Validation(format!(
                    "node {v} (degree {k}) violates the internal-degree constraint of community {c}"
                )));
            }
        }
        for level in self.hierarchy.levels() {
            let counts = inter_community_edge_counts(&self.graph, level)?;
            let mut total = 0u64;
            for r in 0..counts.dim() {
                for s in r..counts.dim() {
                    total += counts.get(r, s);
                }
            }
            if total != self.graph.edge_count() as u64 {
                return Err(Error::Validation("edge-count matrix does not conserve m".into()));
            }
        }
        Ok(())
    }
}

/// Derives the seed of pipeline attempt `attempt` from a base seed.
pub fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    if attempt == 0 {
        return seed;
    }
    // splitmix64 finalizer
    let mut z = seed ^ (attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs the full pipeline from a seed, retrying with fresh derived seeds up
/// to [`MAX_ATTEMPTS`] times. Parameter errors are not retried.
pub fn generate(
    params: &GeneratorParams,
    hierarchy: Option<&HierarchyParams>,
    seed: u64,
) -> Result<GeneratedNetwork> {
    params.validate()?;
    let hp = match (params.mode, hierarchy) {
        (Mode::Hglfr, Some(h)) => {
            h.validate()?;
            h.clone()
        }
        (Mode::Hglfr, None) => {
            return Err(Error::Parameter("HGLFR mode requires hierarchy parameters".into()))
        }
        (_, Some(_)) => {
            return Err(Error::Parameter(format!(
                "{} mode does not take hierarchy parameters",
                params.mode
            )))
        }
        (_, None) => params.flat_hierarchy(),
    };
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed(seed, attempt));
        match generate_once(params, &hp, &mut rng) {
            Ok(mut net) => {
                net.metadata.seed = seed;
                net.metadata.attempts = attempt + 1;
                return Ok(net);
            }
            Err(e @ Error::Parameter(_)) => return Err(e),
            Err(e) => last = Some(e),
        }
    }
    Err(Error::Generation(format!(
        "seed {seed}: all {MAX_ATTEMPTS} attempts failed; last error: {}",
        last.unwrap()
    )))
}

/// One pass of the six-step pipeline on the given random stream.
pub fn generate_once<R: Rng + ?Sized>(
    params: &GeneratorParams,
    hp: &HierarchyParams,
    rng: &mut R,
) -> Result<GeneratedNetwork> {
    // 1-2: degrees and community sizes
    let degrees = sample_power_law_degrees(params, rng)?;
    let sizes = sample_community_sizes(params, rng)?;

    // 3: grouping hierarchy, shuffled toward matchable level demands
    let mut chain = sample_hierarchy(sizes.len(), hp, rng)?;
    let expected: Vec<f64> = sizes.iter().map(|&s| s as f64 * params.avg_degree).collect();
    let swaps = shuffle_groups(&mut chain, &hp.mu, &expected, MAX_SHUFFLE_SWAPS, rng);

    // 4: mixing fractions and node placement
    let schedule = assign_mixing(&chain, hp, rng)?;
    let partition = assign_nodes(&degrees, &sizes, &schedule, DEFAULT_PLACEMENT_SWEEPS, rng)?;

    // 5: internal edges
    let mut ledger = StubLedger::plan(&degrees, &partition, &chain, &schedule, rng)?;
    let mut edges = Vec::with_capacity(degrees.sum() / 2);
    let mut dropped_internal = 0;
    for nodes in partition.members() {
        let wired = wire_internal(&nodes, &mut ledger, rng)?;
        dropped_internal += wired.dropped_stubs;
        edges.extend(wired.edges);
    }

    // 6: external edges by level
    let wired = wire_external(&partition, &chain, &schedule, &mut ledger, rng)?;
    let dropped_external = wired.dropped_stubs;
    edges.extend(wired.edges);

    let graph = Graph::from_simple_edges(params.nodes, &edges)?;
    let hierarchy = node_hierarchy(&partition, &chain)?;
    let achieved_mu = crate::analysis::achieved_mu(&graph, &partition)?;
    let metadata = GenerationMetadata {
        mode: params.mode,
        seed: 0,
        attempts: 1,
        nodes: params.nodes,
        edges: graph.edge_count(),
        communities: partition.community_count(),
        groups_per_level: (0..chain.level_count()).map(|i| chain.group_count(i)).collect(),
        target_degree_sum: degrees.sum(),
        dropped_internal_stubs: dropped_internal,
        dropped_external_stubs: dropped_external,
        ledger: ledger.adjustments(),
        shuffle_swaps: swaps,
        rescaled_mixing_rows: schedule.rescaled_rows(),
        achieved_mu,
    };
    Ok(GeneratedNetwork {
        graph,
        hierarchy,
        chain,
        schedule,
        target_degrees: degrees,
        metadata,
    })
}

/// Lifts a community grouping chain to node-level partitions on top of the
/// ground truth. Levels that do not shrink (a lone community) are skipped.
pub fn node_hierarchy(partition: &Partition, chain: &GroupingChain) -> Result<Hierarchy> {
    let mut maps = Vec::new();
    let mut below: Vec<usize> = (0..chain.community_count()).collect();
    let mut below_count = chain.community_count();
    for level in chain.levels() {
        if level.iter().max().unwrap() + 1 >= below_count {
            continue;
        }
        let mut map = vec![0usize; below_count];
        for (c, &g) in level.iter().enumerate() {
            map[below[c]] = g;
        }
        below_count = level.iter().max().unwrap() + 1;
        below = level.clone();
        maps.push(map);
    }
    Hierarchy::from_parent_maps(partition.clone(), maps)
}
