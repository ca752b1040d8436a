use super::{
    build_er_graph, build_knn_graph, build_range_graph, critical_range, is_connected,
    place_uniform, Domain,
};
use crate::numerics::{Pcg32, UnionFind};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which random graph family a Monte Carlo experiment draws from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConnectivityModel {
    Range { r: f64 },
    Knn { k: usize },
    Er { p: f64 },
}

/// Monte Carlo connectivity estimate with a 95% Wilson interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectivityEstimate {
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

const Z95: f64 = 1.959963984540054;

impl ConnectivityEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        assert!(trials > 0 && successes <= trials);
        let t = trials as f64;
        let p = successes as f64 / t;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / t;
        let center = (p + z2 / (2.0 * t)) / denom;
        let half = Z95 * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
        // mathematically the Wilson interval brackets p; clamp away roundoff
        ConnectivityEstimate {
            trials,
            successes,
            p_hat: p,
            ci_low: (center - half).max(0.0).min(p),
            ci_high: (center + half).min(1.0).max(p),
        }
    }
}

/// Estimates the probability that one fresh random graph is connected.
/// Trial `t` draws from the sub-seed `seed ^ t`, so the trial loop is
/// order-independent and parallel.
pub fn connectivity_probability(
    model: ConnectivityModel,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<ConnectivityEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    // validate the parameter once up front
    match model {
        ConnectivityModel::Range { r } => {
            if r < 0.0 || !r.is_finite() {
                return Err(Error::InvalidArgument(format!("invalid range {r}")));
            }
        }
        ConnectivityModel::Knn { k } => {
            if k == 0 || k > n.saturating_sub(1) {
                return Err(Error::InvalidArgument(format!("invalid k {k} for n {n}")));
            }
        }
        ConnectivityModel::Er { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("invalid probability {p}")));
            }
        }
    }
    let results: Result<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sub = seed ^ t;
            let graph = match model {
                ConnectivityModel::Range { r } => {
                    build_range_graph(&place_uniform(n, Domain::UnitAreaDisk, sub)?, r)?
                }
                ConnectivityModel::Knn { k } => {
                    build_knn_graph(&place_uniform(n, Domain::UnitAreaDisk, sub)?, k)?
                }
                ConnectivityModel::Er { p } => build_er_graph(n, p, sub)?,
            };
            is_connected(&graph)
        })
        .collect();
    let successes = results?.iter().filter(|&&c| c).count() as u64;
    Ok(ConnectivityEstimate::from_counts(successes, trials))
}

/// Incremental connectivity over a nondecreasing sequence of edge batches:
/// `batches[i]` are the edges that first appear at grid index `i`.
fn connectivity_profile(n: usize, batches: &[Vec<(usize, usize)>]) -> Vec<bool> {
    let mut uf = UnionFind::new(n);
    let mut out = Vec::with_capacity(batches.len());
    for batch in batches {
        for &(a, b) in batch {
            uf.union(a, b);
        }
        out.push(uf.components() == 1);
    }
    out
}

fn estimates_from_profiles(trials: u64, hits: Vec<u64>) -> Vec<ConnectivityEstimate> {
    hits.into_iter()
        .map(|h| ConnectivityEstimate::from_counts(h, trials))
        .collect()
}

/// Range-model sweep over `c` with common random numbers: every grid point
/// reuses the same per-trial placement, so `p_hat` is exactly nondecreasing
/// in `c`. Returns one estimate per entry of `cs` (which must be sorted
/// ascending).
pub fn sweep_range_over_c(
    n: usize,
    cs: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<ConnectivityEstimate>> {
    if trials == 0 || cs.is_empty() {
        return Err(Error::InvalidArgument("empty sweep".into()));
    }
    if cs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("c grid must be sorted ascending".into()));
    }
    let radii: Vec<f64> = cs
        .iter()
        .map(|&c| critical_range(n, c))
        .collect::<Result<_>>()?;
    let r2: Vec<f64> = radii.iter().map(|r| r * r).collect();
    let per_trial: Vec<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let placement = place_uniform(n, Domain::UnitAreaDisk, seed ^ t).unwrap();
            let pts = placement.points();
            let mut batches: Vec<Vec<(usize, usize)>> = vec![Vec::new(); cs.len()];
            for i in 0..n {
                for j in (i + 1)..n {
                    let dx = pts[i].0 - pts[j].0;
                    let dy = pts[i].1 - pts[j].1;
                    let d2 = dx * dx + dy * dy;
                    // first grid index whose radius exceeds this distance
                    let idx = r2.partition_point(|&rr| rr <= d2);
                    if idx < cs.len() {
                        batches[idx].push((i, j));
                    }
                }
            }
            connectivity_profile(n, &batches)
        })
        .collect();
    let mut hits = vec![0u64; cs.len()];
    for profile in &per_trial {
        for (h, &c) in hits.iter_mut().zip(profile) {
            *h += c as u64;
        }
    }
    Ok(estimates_from_profiles(trials, hits))
}

/// kNN-model sweep over `k` with common random numbers (shared placements).
pub fn sweep_knn_over_k(
    n: usize,
    ks: &[usize],
    trials: u64,
    seed: u64,
) -> Result<Vec<ConnectivityEstimate>> {
    if trials == 0 || ks.is_empty() {
        return Err(Error::InvalidArgument("empty sweep".into()));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("k grid must be strictly increasing".into()));
    }
    let max_k = *ks.last().unwrap();
    if ks[0] == 0 || max_k > n.saturating_sub(1) {
        return Err(Error::InvalidArgument(format!("k grid out of [1, n-1] for n={n}")));
    }
    let per_trial: Vec<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let placement = place_uniform(n, Domain::UnitAreaDisk, seed ^ t).unwrap();
            let lists = super::knn_lists(&placement, max_k);
            // rank (1-based) at which each undirected edge first appears
            let mut first_rank: std::collections::HashMap<(usize, usize), usize> =
                std::collections::HashMap::new();
            for (i, list) in lists.iter().enumerate() {
                for (pos, &j) in list.iter().enumerate() {
                    let key = if i < j { (i, j) } else { (j, i) };
                    let rank = pos + 1;
                    first_rank
                        .entry(key)
                        .and_modify(|r| *r = (*r).min(rank))
                        .or_insert(rank);
                }
            }
            let mut batches: Vec<Vec<(usize, usize)>> = vec![Vec::new(); ks.len()];
            for (&(a, b), &rank) in &first_rank {
                let idx = ks.partition_point(|&k| k < rank);
                if idx < ks.len() {
                    batches[idx].push((a, b));
                }
            }
            // sort batches for reproducibility of the union order
            for batch in &mut batches {
                batch.sort_unstable();
            }
            connectivity_profile(n, &batches)
        })
        .collect();
    let mut hits = vec![0u64; ks.len()];
    for profile in &per_trial {
        for (h, &c) in hits.iter_mut().zip(profile) {
            *h += c as u64;
        }
    }
    Ok(estimates_from_profiles(trials, hits))
}

/// Erdos-Renyi sweep over `c` (mapped through `p = (ln n + c)/n`, clamped to
/// [0,1]) with common random numbers: each pair draws one uniform variate
/// shared by all grid points.
pub fn sweep_er_over_c(
    n: usize,
    cs: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<ConnectivityEstimate>> {
    if trials == 0 || cs.is_empty() {
        return Err(Error::InvalidArgument("empty sweep".into()));
    }
    if cs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("c grid must be sorted ascending".into()));
    }
    let ln_n = (n as f64).ln();
    let ps: Vec<f64> = cs
        .iter()
        .map(|&c| ((ln_n + c) / n as f64).clamp(0.0, 1.0))
        .collect();
    let per_trial: Vec<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = Pcg32::seeded(seed ^ t);
            let mut batches: Vec<Vec<(usize, usize)>> = vec![Vec::new(); cs.len()];
            for i in 0..n {
                for j in (i + 1)..n {
                    let u = rng.next_f64();
                    // first grid index with p > u keeps the edge coupled in p
                    let idx = ps.partition_point(|&p| p <= u);
                    if idx < cs.len() {
                        batches[idx].push((i, j));
                    }
                }
            }
            connectivity_profile(n, &batches)
        })
        .collect();
    let mut hits = vec![0u64; cs.len()];
    for profile in &per_trial {
        for (h, &c) in hits.iter_mut().zip(profile) {
            *h += c as u64;
        }
    }
    Ok(estimates_from_profiles(trials, hits))
}

/// Expands `lo:hi:step` into an inclusive grid.
pub fn parse_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if step <= 0.0 || hi < lo {
        return Err(Error::InvalidArgument(format!("bad grid {lo}:{hi}:{step}")));
    }
    let mut out = Vec::new();
    let count = ((hi - lo) / step).round() as i64;
    for i in 0..=count {
        let v = lo + i as f64 * step;
        if v <= hi + 1e-12 {
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_interval_brackets_p_hat() {
        for (s, t) in [(0u64, 10u64), (10, 10), (3, 10), (499, 500)] {
            let e = ConnectivityEstimate::from_counts(s, t);
            assert!(0.0 <= e.ci_low && e.ci_low <= e.p_hat);
            assert!(e.p_hat <= e.ci_high && e.ci_high <= 1.0);
            assert!((e.p_hat - s as f64 / t as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn trivial_probabilities() {
        let diam = crate::rgg::Domain::UnitAreaDisk.diameter();
        let full = connectivity_probability(
            ConnectivityModel::Range { r: diam + 0.01 },
            2,
            20,
            5,
        )
        .unwrap();
        assert_eq!(full.p_hat, 1.0);
        let empty = connectivity_probability(ConnectivityModel::Er { p: 0.0 }, 50, 20, 5).unwrap();
        assert_eq!(empty.p_hat, 0.0);
    }

    #[test]
    fn probability_deterministic_per_seed() {
        let a = connectivity_probability(ConnectivityModel::Er { p: 0.08 }, 40, 64, 9).unwrap();
        let b = connectivity_probability(ConnectivityModel::Er { p: 0.08 }, 40, 64, 9).unwrap();
        assert_eq!(a.successes, b.successes);
    }

    #[test]
    fn range_sweep_monotone_and_matches_direct() {
        let cs = [-2.0, 0.0, 2.0, 4.0];
        let est = sweep_range_over_c(100, &cs, 40, 11).unwrap();
        for w in est.windows(2) {
            assert!(w[0].p_hat <= w[1].p_hat + 1e-15);
        }
        // cross-check one grid point against the direct estimator with the
        // same sub-seeds
        let r = critical_range(100, 4.0).unwrap();
        let direct =
            connectivity_probability(ConnectivityModel::Range { r }, 100, 40, 11).unwrap();
        assert_eq!(est[3].successes, direct.successes);
    }

    #[test]
    fn knn_sweep_monotone() {
        let ks = [1usize, 2, 4, 8];
        let est = sweep_knn_over_k(80, &ks, 30, 13).unwrap();
        for w in est.windows(2) {
            assert!(w[0].p_hat <= w[1].p_hat + 1e-15);
        }
    }

    #[test]
    fn knn_sweep_matches_direct_build() {
        let ks = [1usize, 3, 5];
        let est = sweep_knn_over_k(40, &ks, 25, 17).unwrap();
        for (gi, &k) in ks.iter().enumerate() {
            let mut hits = 0u64;
            for t in 0..25u64 {
                let p = place_uniform(40, Domain::UnitAreaDisk, 17 ^ t).unwrap();
                let g = build_knn_graph(&p, k).unwrap();
                hits += is_connected(&g).unwrap() as u64;
            }
            assert_eq!(est[gi].successes, hits, "k = {k}");
        }
    }

    #[test]
    fn er_sweep_monotone() {
        let cs = [-4.0, -1.0, 2.0, 5.0];
        let est = sweep_er_over_c(120, &cs, 50, 23).unwrap();
        for w in est.windows(2) {
            assert!(w[0].p_hat <= w[1].p_hat + 1e-15);
        }
    }

    #[test]
    fn grid_parser() {
        let g = parse_grid(-6.0, 6.0, 2.0).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], -6.0);
        assert_eq!(g[6], 6.0);
        assert!(parse_grid(1.0, 0.0, 1.0).is_err());
    }
}
