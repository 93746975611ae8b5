//! Stochastic pre-wiring steps: degree sequence, community sizes, grouping
//! hierarchy, per-level mixing fractions and node placement.

use std::collections::VecDeque;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Partition;

/// Upper clamp for every sampled mixing fraction and for a community's total.
pub const MAX_MIXING: f64 = 0.99;

/// Default bound on node-placement sweeps before giving up.
pub const DEFAULT_PLACEMENT_SWEEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Lfr,
    Glfr,
    Hglfr,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Lfr => "LFR",
            Mode::Glfr => "GLFR",
            Mode::Hglfr => "HGLFR",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Degree, community-size and (for LFR/GLFR) mixing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    pub nodes: usize,
    pub avg_degree: f64,
    pub max_degree: usize,
    pub tau1: f64,
    pub tau2: f64,
    pub min_community: usize,
    pub max_community: usize,
    pub mode: Mode,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub delta_mu: f64,
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Parameter(msg));
        if self.nodes < 2 {
            return fail(format!("nodes must be at least 2, got {}", self.nodes));
        }
        if !(self.avg_degree.is_finite() && self.avg_degree > 0.0) {
            return fail(format!("avg_degree must be positive, got {}", self.avg_degree));
        }
        if self.max_degree == 0 || self.max_degree >= self.nodes {
            return fail(format!(
                "max_degree must be in [1, nodes), got {} for {} nodes",
                self.max_degree, self.nodes
            ));
        }
        if (self.max_degree as f64) < self.avg_degree {
            return fail(format!(
                "max_degree {} is below avg_degree {}",
                self.max_degree, self.avg_degree
            ));
        }
        if !(self.tau1 > 1.0) || !(self.tau2 > 1.0) {
            return fail(format!("tau1 and tau2 must exceed 1, got {} and {}", self.tau1, self.tau2));
        }
        if self.min_community == 0 || self.min_community > self.max_community {
            return fail(format!(
                "community bounds must satisfy 1 <= min_community <= max_community, got [{}, {}]",
                self.min_community, self.max_community
            ));
        }
        if self.nodes < self.min_community {
            return fail(format!(
                "nodes {} is smaller than min_community {}",
                self.nodes, self.min_community
            ));
        }
        if self.mode != Mode::Hglfr {
            if !(0.0..1.0).contains(&self.mu) {
                return fail(format!("mu must be in [0, 1), got {}", self.mu));
            }
            if !(self.delta_mu >= 0.0) {
                return fail(format!("delta_mu must be non-negative, got {}", self.delta_mu));
            }
            if self.mode == Mode::Lfr && self.delta_mu != 0.0 {
                return fail("LFR mode requires delta_mu = 0".into());
            }
            clamped_interval(self.mu, self.delta_mu).map(|_| ())?;
        }
        Ok(())
    }

    /// The single-level schedule parameters LFR and GLFR reduce to.
    pub fn flat_hierarchy(&self) -> HierarchyParams {
        HierarchyParams {
            levels: 1,
            merge_probability: 1.0,
            mu: vec![self.mu],
            delta: vec![if self.mode == Mode::Lfr { 0.0 } else { self.delta_mu }],
        }
    }
}

/// Shape of the community grouping hierarchy and its per-level mixing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyParams {
    /// Number of grouping levels above the ground-truth communities; the last
    /// one is always the whole network.
    pub levels: usize,
    /// Probability that a group merges into another while building a level.
    pub merge_probability: f64,
    /// Nominal mixing fraction per level.
    pub mu: Vec<f64>,
    /// Half-width of the per-community sampling interval per level.
    pub delta: Vec<f64>,
}

impl HierarchyParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Parameter(msg));
        if self.levels == 0 {
            return fail("hierarchy needs at least one level".into());
        }
        if self.mu.len() != self.levels || self.delta.len() != self.levels {
            return fail(format!(
                "mu and delta must both have {} entries, got {} and {}",
                self.levels,
                self.mu.len(),
                self.delta.len()
            ));
        }
        if !(self.merge_probability > 0.0 && self.merge_probability <= 1.0) {
            return fail(format!(
                "merge_probability must be in (0, 1], got {}",
                self.merge_probability
            ));
        }
        for (i, (&mu, &delta)) in self.mu.iter().zip(&self.delta).enumerate() {
            if !(0.0..1.0).contains(&mu) {
                return fail(format!("mu[{i}] must be in [0, 1), got {mu}"));
            }
            if !(delta >= 0.0) {
                return fail(format!("delta[{i}] must be non-negative, got {delta}"));
            }
            clamped_interval(mu, delta)
                .map_err(|_| Error::Parameter(format!("level {i}: clamped mixing interval is empty")))?;
        }
        Ok(())
    }
}

/// `[mu - delta, mu + delta]` intersected with `[0, MAX_MIXING]`.
pub fn clamped_interval(mu: f64, delta: f64) -> Result<(f64, f64)> {
    let lo = (mu - delta).max(0.0);
    let hi = (mu + delta).min(MAX_MIXING);
    if lo > hi {
        return Err(Error::Parameter(format!(
            "mixing interval [{}, {}] does not meet [0, {MAX_MIXING}]",
            mu - delta,
            mu + delta
        )));
    }
    Ok((lo, hi))
}

/// Integer power law obtained by binning the density `x^-tau` on
/// `[x_min, hi + 1)` into unit cells `[k, k + 1)`.
///
/// A real-valued `x_min` lets the mean vary continuously, so it can be solved
/// for a target average exactly.
#[derive(Debug, Clone)]
pub struct DiscretePowerLaw {
    lo: usize,
    cdf: Vec<f64>,
    mean: f64,
}

impl DiscretePowerLaw {
    pub fn new(x_min: f64, hi: usize, tau: f64) -> Self {
        assert!(tau > 1.0 && x_min >= 1.0 && x_min <= hi as f64);
        let antiderivative = |x: f64| x.powf(1.0 - tau) / (tau - 1.0);
        let lo = x_min.floor() as usize;
        let mut mass: Vec<f64> = (lo..=hi)
            .map(|k| antiderivative((k as f64).max(x_min)) - antiderivative(k as f64 + 1.0))
            .collect();
        let total: f64 = mass.iter().sum();
        let mean = mass
            .iter()
            .enumerate()
            .map(|(i, m)| (lo + i) as f64 * m)
            .sum::<f64>()
            / total;
        let mut acc = 0.0;
        for m in mass.iter_mut() {
            acc += *m / total;
            *m = acc;
        }
        *mass.last_mut().unwrap() = 1.0;
        Self { lo, cdf: mass, mean }
    }

    /// Solves for the `x_min` whose distribution on `[x_min, hi]` has mean `target`.
    pub fn with_mean(target: f64, hi: usize, tau: f64) -> Result<Self> {
        let hi_f = hi as f64;
        let at_floor = Self::new(1.0, hi, tau);
        if target < at_floor.mean * (1.0 - 1e-12) || target > hi_f {
            return Err(Error::Parameter(format!(
                "average {target} is unreachable: a power law with exponent {tau} on [1, {hi}] \
                 has mean between {:.4} and {hi}",
                at_floor.mean
            )));
        }
        if target >= hi_f {
            return Ok(Self::new(hi_f, hi, tau));
        }
        let (mut a, mut b) = (1.0f64, hi_f);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if Self::new(mid, hi, tau).mean < target {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-12 {
                break;
            }
        }
        Ok(Self::new(0.5 * (a + b), hi, tau))
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn support(&self) -> (usize, usize) {
        (self.lo, self.lo + self.cdf.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1);
        self.lo + idx
    }
}

/// Per-node target degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence(pub Vec<usize>);

impl DegreeSequence {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() as f64 / self.0.len() as f64
    }
}

/// Draws `N` degrees from a power law whose lower cutoff is solved so the
/// distribution mean equals `avg_degree`, then makes the sum even.
pub fn sample_power_law_degrees<R: Rng + ?Sized>(
    params: &GeneratorParams,
    rng: &mut R,
) -> Result<DegreeSequence> {
    let law = DiscretePowerLaw::with_mean(params.avg_degree, params.max_degree, params.tau1)?;
    let mut degrees: Vec<usize> = (0..params.nodes).map(|_| law.sample(rng)).collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        let below: Vec<usize> = (0..degrees.len())
            .filter(|&v| degrees[v] < params.max_degree)
            .collect();
        match below.choose(rng) {
            Some(&v) => degrees[v] += 1,
            None => {
                // every node sits at max_degree
                let v = rng.random_range(0..degrees.len());
                degrees[v] -= 1;
            }
        }
    }
    Ok(DegreeSequence(degrees))
}

const SIZE_RESAMPLES: usize = 1000;

/// Draws community sizes on `[min_community, max_community]` until they
/// cover `nodes` exactly.
pub fn sample_community_sizes<R: Rng + ?Sized>(
    params: &GeneratorParams,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let (n, c_min, c_max) = (params.nodes, params.min_community, params.max_community);
    if n < c_min {
        return Err(Error::Parameter(format!(
            "nodes {n} is smaller than min_community {c_min}"
        )));
    }
    let law = DiscretePowerLaw::new(c_min as f64, c_max, params.tau2);
    for _ in 0..SIZE_RESAMPLES {
        let mut sizes = Vec::new();
        let mut total = 0;
        while total < n {
            let s = law.sample(rng);
            sizes.push(s);
            total += s;
        }
        let last = sizes.pop().unwrap();
        let adjusted = last - (total - n);
        if adjusted >= c_min {
            sizes.push(adjusted);
            return Ok(sizes);
        }
        // Spread the short remainder over communities that still have room.
        let mut leftover = adjusted;
        let mut open: Vec<usize> = (0..sizes.len()).filter(|&i| sizes[i] < c_max).collect();
        while leftover > 0 && !open.is_empty() {
            let slot = rng.random_range(0..open.len());
            let i = open[slot];
            sizes[i] += 1;
            leftover -= 1;
            if sizes[i] == c_max {
                open.swap_remove(slot);
            }
        }
        if leftover == 0 {
            return Ok(sizes);
        }
    }
    Err(Error::Parameter(format!(
        "no community-size sequence in [{c_min}, {c_max}] sums to {n}"
    )))
}

/// Community groupings per level: `levels[i][c]` is the group of community
/// `c` at grouping level `i`. The last level is a single group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingChain {
    levels: Vec<Vec<usize>>,
}

impl GroupingChain {
    pub fn from_levels(levels: Vec<Vec<usize>>) -> Result<Self> {
        let chain = Self { levels };
        chain.check_invariants()?;
        Ok(chain)
    }

    pub fn community_count(&self) -> usize {
        self.levels.first().map_or(0, Vec::len)
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn group_of(&self, level: usize, community: usize) -> usize {
        self.levels[level][community]
    }

    pub fn group_count(&self, level: usize) -> usize {
        self.levels[level].iter().max().map_or(0, |g| g + 1)
    }

    /// The group one level below `level` (the community itself below level 0).
    pub fn subgroup_of(&self, level: usize, community: usize) -> usize {
        if level == 0 {
            community
        } else {
            self.levels[level - 1][community]
        }
    }

    fn subgroup_count(&self, level: usize) -> usize {
        if level == 0 {
            self.community_count()
        } else {
            self.group_count(level - 1)
        }
    }

    /// Whether `community` acquires sibling communities at `level` that it
    /// did not share a group with one level below.
    pub fn gains_siblings(&self, level: usize, community: usize) -> bool {
        let group = self.levels[level][community];
        let sub = self.subgroup_of(level, community);
        (0..self.community_count())
            .any(|c| self.levels[level][c] == group && self.subgroup_of(level, c) != sub)
    }

    /// Communities in each group at `level`.
    pub fn members(&self, level: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.group_count(level)];
        for (c, &g) in self.levels[level].iter().enumerate() {
            out[g].push(c);
        }
        out
    }

    /// Nesting, dense ids, strictly shrinking group counts, single top group.
    pub fn check_invariants(&self) -> Result<()> {
        let c = self.community_count();
        if self.levels.is_empty() || c == 0 {
            return Err(Error::Validation("grouping chain is empty".into()));
        }
        for (i, level) in self.levels.iter().enumerate() {
            if level.len() != c {
                return Err(Error::Validation(format!("grouping level {i} has the wrong length")));
            }
            let count = self.group_count(i);
            let mut used = vec![false; count];
            for &g in level {
                used[g] = true;
            }
            if used.iter().any(|u| !u) {
                return Err(Error::Validation(format!("grouping level {i} has non-dense ids")));
            }
            let below = self.subgroup_count(i);
            if count >= below && !(c == 1 && count == 1) {
                return Err(Error::Validation(format!(
                    "grouping level {i} has {count} groups, not fewer than {below}"
                )));
            }
            let mut parent = vec![usize::MAX; below];
            for (comm, &g) in level.iter().enumerate() {
                let s = self.subgroup_of(i, comm);
                if parent[s] == usize::MAX {
                    parent[s] = g;
                } else if parent[s] != g {
                    return Err(Error::Validation(format!(
                        "subgroup {s} is split at grouping level {i}"
                    )));
                }
            }
        }
        if self.group_count(self.levels.len() - 1) != 1 {
            return Err(Error::Validation("top grouping level must be a single group".into()));
        }
        Ok(())
    }

    fn renumber(level: &mut [usize]) {
        let mut map = std::collections::HashMap::new();
        for g in level.iter_mut() {
            let next = map.len();
            *g = *map.entry(*g).or_insert(next);
        }
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = x;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

/// Builds `hp.levels` grouping levels over `community_count` communities.
///
/// Each intermediate level visits every current group once in random order
/// and, with probability `S`, merges it into another uniformly chosen group.
/// A level with no merge gets one forced merge. Merging stops early when
/// further merges would leave too few groups for the remaining levels to
/// shrink strictly. The last level is the whole network.
pub fn sample_hierarchy<R: Rng + ?Sized>(
    community_count: usize,
    hp: &HierarchyParams,
    rng: &mut R,
) -> Result<GroupingChain> {
    hp.validate()?;
    let l = hp.levels;
    if community_count == 0 {
        return Err(Error::Parameter("no communities to group".into()));
    }
    if l >= 2 && community_count <= l {
        return Err(Error::Parameter(format!(
            "{l} strictly shrinking grouping levels need more than {l} communities, got {community_count}"
        )));
    }
    let mut levels: Vec<Vec<usize>> = Vec::with_capacity(l);
    let mut current: Vec<usize> = (0..community_count).collect();
    for i in 0..l.saturating_sub(1) {
        let groups = current.iter().max().unwrap() + 1;
        // levels i+1..l-1 each need one strict decrease, ending at one group
        let floor = l - i;
        let mut parent: Vec<usize> = (0..groups).collect();
        let mut remaining = groups;
        let mut order: Vec<usize> = (0..groups).collect();
        order.shuffle(rng);
        for &g in &order {
            if remaining <= floor {
                break;
            }
            if rng.random::<f64>() < hp.merge_probability {
                let own = find(&mut parent, g);
                let roots: Vec<usize> = (0..groups)
                    .filter(|&h| parent[h] == h && h != own)
                    .collect();
                let target = *roots.choose(rng).unwrap();
                parent[own] = target;
                remaining -= 1;
            }
        }
        if remaining == groups {
            let a = rng.random_range(0..groups);
            let mut b = rng.random_range(0..groups - 1);
            if b >= a {
                b += 1;
            }
            parent[a] = b;
        }
        let mut next: Vec<usize> = current.iter().map(|&g| find(&mut parent, g)).collect();
        GroupingChain::renumber(&mut next);
        levels.push(next.clone());
        current = next;
    }
    levels.push(vec![0; community_count]);
    GroupingChain::from_levels(levels)
}

/// Total demand mismatch: for every group with at least two subgroups, how
/// far the heaviest subgroup's level stubs exceed the rest of the group.
fn level_violation(chain: &GroupingChain, level: usize, demand: &[f64]) -> f64 {
    let mut totals: std::collections::BTreeMap<usize, std::collections::BTreeMap<usize, f64>> =
        Default::default();
    for c in 0..chain.community_count() {
        *totals
            .entry(chain.group_of(level, c))
            .or_default()
            .entry(chain.subgroup_of(level, c))
            .or_default() += demand[c];
    }
    totals
        .values()
        .filter(|subs| subs.len() >= 2)
        .map(|subs| {
            let sum: f64 = subs.values().sum();
            let max = subs.values().cloned().fold(0.0, f64::max);
            (2.0 * max - sum).max(0.0)
        })
        .sum()
}

fn total_violation(chain: &GroupingChain, rates: &[f64], community_degree: &[f64]) -> f64 {
    (0..chain.level_count())
        .map(|i| {
            let demand: Vec<f64> = community_degree.iter().map(|k| k * rates[i]).collect();
            level_violation(chain, i, &demand)
        })
        .sum()
}

/// Greedy repair of external-stub feasibility.
///
/// While some group has a subgroup whose expected level demand
/// (`rate * expected community degree`) exceeds what the rest of the group
/// can absorb, swap that subgroup with a random subgroup of the largest other
/// group at the same level. A swap is kept only if the total mismatch over
/// all levels drops. Returns the number of kept swaps.
pub fn shuffle_groups<R: Rng + ?Sized>(
    chain: &mut GroupingChain,
    rates: &[f64],
    community_degree: &[f64],
    max_swaps: usize,
    rng: &mut R,
) -> usize {
    let mut kept = 0;
    let mut current = total_violation(chain, rates, community_degree);
    for _ in 0..max_swaps {
        if current <= 0.0 {
            break;
        }
        // worst group over the swappable levels
        let mut worst: Option<(usize, usize, usize, f64)> = None; // (level, group, subgroup, excess)
        for level in 0..chain.level_count().saturating_sub(1) {
            let mut subs: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
            for c in 0..chain.community_count() {
                *subs
                    .entry((chain.group_of(level, c), chain.subgroup_of(level, c)))
                    .or_default() += community_degree[c] * rates[level];
            }
            let mut by_group: std::collections::BTreeMap<usize, Vec<(usize, f64)>> = Default::default();
            for (&(g, s), &d) in &subs {
                by_group.entry(g).or_default().push((s, d));
            }
            for (g, list) in by_group {
                if list.len() < 2 {
                    continue;
                }
                let sum: f64 = list.iter().map(|x| x.1).sum();
                let (s, max) = list
                    .iter()
                    .cloned()
                    .fold((usize::MAX, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
                let excess = 2.0 * max - sum;
                if excess > 0.0 && worst.is_none_or(|w| excess > w.3) {
                    worst = Some((level, g, s, excess));
                }
            }
        }
        let Some((level, group, heavy, _)) = worst else {
            break;
        };
        let members = chain.members(level);
        let Some(target) = (0..members.len())
            .filter(|&g| g != group)
            .max_by_key(|&g| (members[g].len(), std::cmp::Reverse(g)))
        else {
            break;
        };
        let mut partner_subs: Vec<usize> = members[target]
            .iter()
            .map(|&c| chain.subgroup_of(level, c))
            .collect();
        partner_subs.sort_unstable();
        partner_subs.dedup();
        let partner = *partner_subs.choose(rng).unwrap();

        let heavy_members: Vec<usize> = (0..chain.community_count())
            .filter(|&c| chain.group_of(level, c) == group && chain.subgroup_of(level, c) == heavy)
            .collect();
        let partner_members: Vec<usize> = members[target]
            .iter()
            .copied()
            .filter(|&c| chain.subgroup_of(level, c) == partner)
            .collect();
        let before = chain.clone();
        let (h0, p0) = (heavy_members[0], partner_members[0]);
        for i in level..chain.level_count() {
            let (gh, gp) = (before.levels[i][h0], before.levels[i][p0]);
            for &c in &heavy_members {
                chain.levels[i][c] = gp;
            }
            for &c in &partner_members {
                chain.levels[i][c] = gh;
            }
        }
        let after = total_violation(chain, rates, community_degree);
        if after < current {
            current = after;
            kept += 1;
        } else {
            *chain = before;
        }
    }
    kept
}

/// Realized per-community, per-level mixing fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingSchedule {
    mu: Vec<Vec<f64>>,
    rescaled: usize,
}

impl MixingSchedule {
    pub fn from_rows(mu: Vec<Vec<f64>>) -> Result<Self> {
        let s = Self { mu, rescaled: 0 };
        s.check_invariants()?;
        Ok(s)
    }

    pub fn community_count(&self) -> usize {
        self.mu.len()
    }

    pub fn level_count(&self) -> usize {
        self.mu.first().map_or(0, Vec::len)
    }

    pub fn mu(&self, community: usize, level: usize) -> f64 {
        self.mu[community][level]
    }

    pub fn row(&self, community: usize) -> &[f64] {
        &self.mu[community]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.mu
    }

    pub fn external_fraction(&self, community: usize) -> f64 {
        self.mu[community].iter().sum()
    }

    pub fn internal_fraction(&self, community: usize) -> f64 {
        1.0 - self.external_fraction(community)
    }

    /// Communities whose sampled total exceeded [`MAX_MIXING`] and were scaled down.
    pub fn rescaled_rows(&self) -> usize {
        self.rescaled
    }

    pub fn check_invariants(&self) -> Result<()> {
        for (c, row) in self.mu.iter().enumerate() {
            if row.iter().any(|&m| !(0.0..1.0).contains(&m)) {
                return Err(Error::Validation(format!("community {c} has a mixing value outside [0, 1)")));
            }
            let f = 1.0 - row.iter().sum::<f64>();
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Validation(format!(
                    "community {c} has internal fraction {f} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Samples `mu(c, i)` uniformly from the clamped level interval wherever
/// community `c` gains siblings at level `i`, zero elsewhere.
///
/// A community's total is scaled down to [`MAX_MIXING`] when the sampled
/// levels add up to more, keeping its internal fraction positive.
pub fn assign_mixing<R: Rng + ?Sized>(
    chain: &GroupingChain,
    hp: &HierarchyParams,
    rng: &mut R,
) -> Result<MixingSchedule> {
    hp.validate()?;
    if chain.level_count() != hp.levels {
        return Err(Error::Validation(format!(
            "grouping chain has {} levels but the parameters describe {}",
            chain.level_count(),
            hp.levels
        )));
    }
    let intervals: Vec<(f64, f64)> = hp
        .mu
        .iter()
        .zip(&hp.delta)
        .map(|(&m, &d)| clamped_interval(m, d))
        .collect::<Result<_>>()?;
    let mut rescaled = 0;
    let mut mu = Vec::with_capacity(chain.community_count());
    for c in 0..chain.community_count() {
        let mut row: Vec<f64> = intervals
            .iter()
            .enumerate()
            .map(|(i, &(lo, hi))| {
                if !chain.gains_siblings(i, c) {
                    0.0
                } else if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect();
        let total: f64 = row.iter().sum();
        if total > MAX_MIXING {
            let scale = MAX_MIXING / total;
            row.iter_mut().for_each(|m| *m *= scale);
            rescaled += 1;
        }
        mu.push(row);
    }
    Ok(MixingSchedule { mu, rescaled })
}

/// Whether a node of degree `k` can realize its internal degree in a
/// community of `size` nodes with internal fraction `internal`.
pub fn fits_community(k: usize, internal: f64, size: usize) -> bool {
    (k as f64) * internal < size as f64 - 1.0
}

/// Places nodes into communities of the given sizes, respecting the
/// internal-degree constraint, evicting a random resident when every
/// admissible community is full.
pub fn assign_nodes<R: Rng + ?Sized>(
    degrees: &DegreeSequence,
    sizes: &[usize],
    schedule: &MixingSchedule,
    max_sweeps: usize,
    rng: &mut R,
) -> Result<Partition> {
    let n = degrees.len();
    if sizes.iter().sum::<usize>() != n {
        return Err(Error::Validation(format!(
            "community sizes sum to {} but there are {n} nodes",
            sizes.iter().sum::<usize>()
        )));
    }
    if schedule.community_count() != sizes.len() {
        return Err(Error::Validation("mixing schedule and size list disagree on community count".into()));
    }
    let k = degrees.as_slice();
    let internal: Vec<f64> = (0..sizes.len()).map(|c| schedule.internal_fraction(c)).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.sort_by(|a, b| k[*b].cmp(&k[*a]));
    let mut queue: VecDeque<usize> = order.into();

    let mut room = sizes.to_vec();
    let mut members: Vec<Vec<usize>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
    let mut assignment = vec![usize::MAX; n];
    let budget = max_sweeps.saturating_mul(n);
    let mut placements = 0usize;

    while let Some(v) = queue.pop_front() {
        placements += 1;
        if placements > budget {
            return Err(Error::Generation(format!(
                "node {v} with degree {} could not be placed after {max_sweeps} sweeps",
                k[v]
            )));
        }
        let admissible: Vec<usize> = (0..sizes.len())
            .filter(|&c| fits_community(k[v], internal[c], sizes[c]))
            .collect();
        if admissible.is_empty() {
            return Err(Error::Generation(format!(
                "node {v} with degree {} fits no community",
                k[v]
            )));
        }
        let open: Vec<usize> = admissible.iter().copied().filter(|&c| room[c] > 0).collect();
        let c = if let Some(&c) = open.choose(rng) {
            room[c] -= 1;
            c
        } else {
            let &c = admissible.choose(rng).unwrap();
            let slot = rng.random_range(0..members[c].len());
            let evicted = members[c].swap_remove(slot);
            assignment[evicted] = usize::MAX;
            queue.push_back(evicted);
            c
        };
        members[c].push(v);
        assignment[v] = c;
    }
    Partition::new(assignment)
}
