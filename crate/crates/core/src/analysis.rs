//! Generalized modularity, the community density matrix, resolution
//! windows, achieved mixing and resolution sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{inter_community_edge_counts, Graph, Partition, SquareMatrix};

fn edge_total(g: &Graph) -> Result<f64> {
    match g.edge_count() {
        0 => Err(Error::UndefinedInput("graph has no edges".into())),
        m => Ok(m as f64),
    }
}

/// Generalized modularity at resolution `gamma`, from community aggregates:
/// `Q = sum_r [e_r / m - gamma * (K_r / 2m)^2]`.
pub fn modularity(g: &Graph, p: &Partition, gamma: f64) -> Result<f64> {
    let m = edge_total(g)?;
    let counts = inter_community_edge_counts(g, p)?;
    let k = p.community_degrees(g)?;
    Ok((0..counts.dim())
        .map(|r| {
            let a = k[r] as f64 / (2.0 * m);
            counts.get(r, r) as f64 / m - gamma * a * a
        })
        .sum())
}

/// Slope of `Q(gamma)`: `-sum_r (K_r / 2m)^2`.
pub fn modularity_slope(g: &Graph, p: &Partition) -> Result<f64> {
    let m = edge_total(g)?;
    let k = p.community_degrees(g)?;
    Ok(-k.iter().map(|&kr| (kr as f64 / (2.0 * m)).powi(2)).sum::<f64>())
}

/// Ratio of actual to configuration-model expected edge counts between
/// every pair of communities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaMatrix {
    values: Vec<Vec<f64>>,
}

impl OmegaMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = SquareMatrix::from_rows(&rows)?;
        for r in 0..m.dim() {
            for s in 0..m.dim() {
                let v = m.get(r, s);
                if !(v >= 0.0) || v != m.get(s, r) {
                    return Err(Error::Validation(format!(
                        "omega entry ({r}, {s}) must be non-negative and symmetric"
                    )));
                }
            }
        }
        Ok(Self { values: rows })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.values[r][s]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|r| self.values[r][r]).collect()
    }
}

/// Computes the community density matrix. Within-community expectation is
/// `K_r^2 / 4m`, between-community `K_r K_s / 2m`.
pub fn omega_matrix(g: &Graph, p: &Partition) -> Result<OmegaMatrix> {
    let m = edge_total(g)?;
    let counts = inter_community_edge_counts(g, p)?;
    let k = p.community_degrees(g)?;
    if let Some(community) = k.iter().position(|&kr| kr == 0) {
        return Err(Error::DegenerateCommunity { community });
    }
    let c = counts.dim();
    let mut rows = vec![vec![0.0; c]; c];
    for r in 0..c {
        for s in 0..c {
            let (kr, ks) = (k[r] as f64, k[s] as f64);
            let expected = if r == s { kr * kr / (4.0 * m) } else { kr * ks / (2.0 * m) };
            rows[r][s] = counts.get(r, s) as f64 / expected;
        }
    }
    Ok(OmegaMatrix { values: rows })
}

/// Range of resolutions over which a partition can be recovered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionWindow {
    /// Largest between-community density.
    pub lower: f64,
    /// Smallest within-community density.
    pub upper: f64,
    /// `upper - lower`; negative under the resolution limit.
    pub distance: f64,
}

pub fn resolution_window(omega: &OmegaMatrix) -> Result<ResolutionWindow> {
    let c = omega.dim();
    if c < 2 {
        return Err(Error::UndefinedWindow);
    }
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for r in 0..c {
        upper = upper.min(omega.get(r, r));
        for s in 0..c {
            if r != s {
                lower = lower.max(omega.get(r, s));
            }
        }
    }
    Ok(ResolutionWindow {
        lower,
        upper,
        distance: upper - lower,
    })
}

/// Fraction of edges whose endpoints lie in different communities.
pub fn achieved_mu(g: &Graph, p: &Partition) -> Result<f64> {
    let m = edge_total(g)?;
    p.check_universe(g)?;
    let a = p.assignment();
    let external = g.edges().iter().filter(|&&(u, v)| a[u] != a[v]).count();
    Ok(external as f64 / m)
}

/// Per-community external degree over total degree. Communities with zero
/// total degree report 0.
pub fn community_mu(g: &Graph, p: &Partition) -> Result<Vec<f64>> {
    edge_total(g)?;
    let k = p.community_degrees(g)?;
    let a = p.assignment();
    let mut external = vec![0usize; p.community_count()];
    for &(u, v) in g.edges() {
        if a[u] != a[v] {
            external[a[u]] += 1;
            external[a[v]] += 1;
        }
    }
    Ok(external
        .iter()
        .zip(&k)
        .map(|(&e, &kr)| if kr == 0 { 0.0 } else { e as f64 / kr as f64 })
        .collect())
}

/// `points` values spaced evenly between `start` and `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points)
            .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// `points` values spaced evenly in log scale between `start` and `stop`.
pub fn log_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    linear_grid(start.ln(), stop.ln(), points)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// 200 log-spaced resolutions in `[0.05, 20]`.
pub fn default_gamma_grid() -> Vec<f64> {
    log_grid(0.05, 20.0, 200)
}

/// Parses `start:stop:points:log|lin`.
pub fn parse_gamma_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Parameter(format!("gamma grid {spec:?}: {why}"));
    let parts: Vec<&str> = spec.trim().split(':').collect();
    if parts.len() != 4 {
        return Err(bad("expected start:stop:points:log|lin"));
    }
    let start: f64 = parts[0].parse().map_err(|_| bad("start is not a number"))?;
    let stop: f64 = parts[1].parse().map_err(|_| bad("stop is not a number"))?;
    let points: usize = parts[2].parse().map_err(|_| bad("points is not a count"))?;
    if points == 0 {
        return Err(bad("points must be positive"));
    }
    if !(start > 0.0 && stop >= start && stop.is_finite()) {
        return Err(bad("need 0 < start <= stop"));
    }
    match parts[3] {
        "log" => Ok(log_grid(start, stop, points)),
        "lin" => Ok(linear_grid(start, stop, points)),
        _ => Err(bad("scale must be log or lin")),
    }
}

/// Modularity of every candidate partition over a resolution grid, with
/// the upper envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSweep {
    pub gammas: Vec<f64>,
    /// `q[partition][gamma_index]`.
    pub q: Vec<Vec<f64>>,
    /// Winning partition per resolution.
    pub argmax: Vec<usize>,
}

impl GammaSweep {
    /// Resolutions where `partition` is on the envelope, as the first and
    /// last winning grid values.
    pub fn interval(&self, partition: usize) -> Option<(f64, f64)> {
        let wins: Vec<f64> = self
            .argmax
            .iter()
            .zip(&self.gammas)
            .filter(|(&a, _)| a == partition)
            .map(|(_, &g)| g)
            .collect();
        Some((*wins.first()?, *wins.last()?))
    }

    /// Number of grid points won by `partition`.
    pub fn wins(&self, partition: usize) -> usize {
        self.argmax.iter().filter(|&&a| a == partition).count()
    }
}

/// Evaluates every partition at every resolution. Ties go to the partition
/// with fewer communities, then to the earlier one.
pub fn gamma_sweep(g: &Graph, partitions: &[Partition], gammas: &[f64]) -> Result<GammaSweep> {
    if partitions.is_empty() {
        return Err(Error::Validation("gamma sweep needs at least one partition".into()));
    }
    if gammas.is_empty() {
        return Err(Error::Validation("gamma sweep needs a nonempty grid".into()));
    }
    // Q is affine in gamma; evaluate the intercept and slope once.
    let lines: Vec<(f64, f64)> = partitions
        .iter()
        .map(|p| Ok((modularity(g, p, 0.0)?, modularity_slope(g, p)?)))
        .collect::<Result<_>>()?;
    let q: Vec<Vec<f64>> = lines
        .iter()
        .map(|&(q0, slope)| gammas.iter().map(|&gm| q0 + slope * gm).collect())
        .collect();
    let argmax = (0..gammas.len())
        .map(|j| {
            let mut best = 0;
            for i in 1..partitions.len() {
                let (qi, qb) = (q[i][j], q[best][j]);
                let tie = (qi - qb).abs() <= 1e-12 * qi.abs().max(qb.abs()).max(1.0);
                let coarser = partitions[i].community_count() < partitions[best].community_count();
                if (!tie && qi > qb) || (tie && coarser) {
                    best = i;
                }
            }
            best
        })
        .collect();
    Ok(GammaSweep {
        gammas: gammas.to_vec(),
        q,
        argmax,
    })
}

/// Bin index `k` of an achieved mixing value, where bin `k` is centred on
/// `0.05 * k` and covers `[0.05k - 0.025, 0.05k + 0.025)`. Values outside
/// `[0.025, 0.975)` have no bin.
pub fn mu_bin(mu: f64) -> Option<usize> {
    if !(0.025..0.975).contains(&mu) {
        return None;
    }
    // nudge so that bin edges computed in floating point stay left-closed
    Some(((mu + 0.025) / 0.05 + 1e-9).floor() as usize)
}

pub fn mu_bin_center(bin: usize) -> f64 {
    bin as f64 * 0.05
}

/// First `x` at which a curve sampled at increasing `x` falls below
/// `level`, linearly interpolated between samples. `None` if it never does.
pub fn crossing_point(points: &[(f64, f64)], level: f64) -> Option<f64> {
    let first = points.first()?;
    if first.1 < level {
        return Some(first.0);
    }
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        (y0 >= level && y1 < level).then(|| x0 + (x1 - x0) * (y0 - level) / (y0 - y1))
    })
}
