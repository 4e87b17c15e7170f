//! Upper bounds on what any edge-removal partition of the tree can score:
//! exhaustive enumeration for small `k`, tabu local search beyond that.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::divisive::check_k;
use crate::error::{Error, Result};
use crate::external::{choose2, PairSums};
use crate::mst::{EdgeId, Mst, RootedForest};
use crate::partition::{Partition, NOISE};

/// Default cap on the number of subsets [`exhaustive_max_ar`] will visit.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Best partition found: its score (max AR over the references) and the
/// deleted edges in increasing id order.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_ar: f64,
    pub removed: Vec<EdgeId>,
    /// Per-restart outcomes of a local search; empty for enumeration.
    pub restarts: Vec<RestartTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub restart: usize,
    pub best_ar: f64,
    pub sweeps: usize,
}

/// Local search settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Sweeps during which a restored edge may not be deleted again;
    /// `None` means `round(√(n − 1))`.
    pub tabu_tenure: Option<usize>,
    /// Consecutive sweeps without a new best before a restart gives up.
    pub stall_limit: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 10,
            tabu_tenure: None,
            stall_limit: 10,
            seed: 0,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::config("restarts must be at least 1"));
        }
        if self.stall_limit == 0 {
            return Err(Error::config("stall limit must be at least 1"));
        }
        Ok(())
    }
}

/// `C(n, r)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n − i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn check_refs(mst: &Mst, refs: &[Partition]) -> Result<()> {
    if refs.is_empty() {
        return Err(Error::config("at least one reference labeling is required"));
    }
    if let Some(r) = refs.iter().find(|r| r.n() != mst.n()) {
        return Err(Error::domain(format!(
            "reference has {} labels, tree has {} vertices",
            r.n(),
            mst.n()
        )));
    }
    Ok(())
}

/// Per-reference pair counts of a partition given as dense cluster ids.
struct Scorer<'a> {
    refs: &'a [Partition],
    /// Σ C(row sum, 2) and effective n per reference; fixed.
    rows: Vec<(u128, u64)>,
}

impl<'a> Scorer<'a> {
    fn new(refs: &'a [Partition]) -> Self {
        let rows = refs
            .iter()
            .map(|r| {
                let sizes = r.sizes();
                let a = sizes.as_slice().iter().map(|&c| choose2(c as u64)).sum();
                (a, (r.n() - r.noise_count()) as u64)
            })
            .collect();
        Scorer { refs, rows }
    }

    fn ar(&self, i: usize, joint: u128, cols: u128) -> f64 {
        let (rows, n) = self.rows[i];
        PairSums { n, joint, rows, cols }.adjusted_rand().value
    }

    fn best(&self, pairs: &[(u128, u128)]) -> f64 {
        pairs
            .iter()
            .enumerate()
            .map(|(i, &(j, c))| self.ar(i, j, c))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(joint, cols)` pair sums per reference for `cluster` ids in `0..l`.
    fn pair_sums(&self, cluster: &[usize], l: usize) -> Vec<(u128, u128)> {
        self.refs
            .iter()
            .map(|r| {
                let rl = r.num_clusters();
                let mut counts = vec![0u64; rl * l];
                let mut col = vec![0u64; l];
                for (&x, &c) in r.labels().iter().zip(cluster) {
                    if x != NOISE {
                        counts[(x - 1) * l + c] += 1;
                        col[c] += 1;
                    }
                }
                (
                    counts.iter().map(|&c| choose2(c)).sum(),
                    col.iter().map(|&c| choose2(c)).sum(),
                )
            })
            .collect()
    }

    fn score(&self, mst: &Mst, removed: &[bool]) -> f64 {
        let (ids, l) = component_ids(mst, removed);
        self.best(&self.pair_sums(&ids, l))
    }
}

fn component_ids(mst: &Mst, removed: &[bool]) -> (Vec<usize>, usize) {
    let ids = mst.component_ids(removed);
    let l = ids.iter().max().map_or(0, |m| m + 1);
    (ids, l)
}

/// Maximum over all `(k − 1)`-subsets of tree edges of the best AR against
/// `refs`, with the default budget.
pub fn exhaustive_max_ar(mst: &Mst, refs: &[Partition], k: usize) -> Result<OracleResult> {
    exhaustive_max_ar_with_budget(mst, refs, k, DEFAULT_BUDGET)
}

/// [`exhaustive_max_ar`] refusing to start when more than `budget` subsets
/// would be visited. Among optimal subsets the lexicographically smallest
/// is returned.
pub fn exhaustive_max_ar_with_budget(
    mst: &Mst,
    refs: &[Partition],
    k: usize,
    budget: u128,
) -> Result<OracleResult> {
    check_k(mst.n(), k)?;
    check_refs(mst, refs)?;
    let m = mst.num_edges();
    let r = k - 1;
    let required = binomial(m as u64, r as u64);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let scorer = Scorer::new(refs);
    let mut subset: Vec<usize> = (0..r).collect();
    let mut removed = vec![false; m];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        removed.iter_mut().for_each(|x| *x = false);
        for &e in &subset {
            removed[e] = true;
        }
        let ar = scorer.score(mst, &removed);
        if best.as_ref().is_none_or(|(b, _)| ar > *b) {
            best = Some((ar, subset.clone()));
        }
        // next combination in lexicographic order
        let Some(i) = (0..r).rev().find(|&i| subset[i] < m - r + i) else {
            break;
        };
        subset[i] += 1;
        for j in i + 1..r {
            subset[j] = subset[j - 1] + 1;
        }
    }
    let (best_ar, removed) = best.expect("at least one subset is visited");
    Ok(OracleResult {
        best_ar,
        removed,
        restarts: Vec::new(),
    })
}

/// Tabu steepest-ascent over `(k − 1)`-subsets with random restarts.
///
/// Each restart begins from a uniformly random subset. A sweep scores every
/// swap (restore one deleted edge, delete one kept edge) and moves to the
/// best one whose deleted edge is not tabu, even when it does not improve;
/// a tabu move is allowed only if it beats the restart's best so far. The
/// restored edge becomes tabu for `tabu_tenure` sweeps. A restart stops
/// after `stall_limit` sweeps without a new best. Equal scores resolve to
/// the smallest `(restored, deleted)` pair, so results depend only on the
/// seed.
pub fn local_search_max_ar(mst: &Mst, refs: &[Partition], k: usize, cfg: &SearchConfig) -> Result<OracleResult> {
    let n = mst.n();
    if k < 2 || k > n {
        return Err(Error::domain(format!("local search needs 2 <= k <= {n}, got {k}")));
    }
    check_refs(mst, refs)?;
    cfg.validate()?;
    let tenure = cfg
        .tabu_tenure
        .unwrap_or_else(|| ((n - 1) as f64).sqrt().round() as usize);
    let scorer = Scorer::new(refs);
    let runs: Vec<(f64, Vec<usize>, usize)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| search_once(mst, &scorer, k, tenure, cfg, restart))
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut traces = Vec::with_capacity(runs.len());
    for (restart, (ar, removed, sweeps)) in runs.into_iter().enumerate() {
        traces.push(RestartTrace {
            restart,
            best_ar: ar,
            sweeps,
        });
        let better = match &best {
            None => true,
            Some((b, r)) => ar > *b || (ar == *b && removed < *r),
        };
        if better {
            best = Some((ar, removed));
        }
    }
    let (best_ar, removed) = best.expect("restarts >= 1");
    Ok(OracleResult {
        best_ar,
        removed,
        restarts: traces,
    })
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn search_once(
    mst: &Mst,
    scorer: &Scorer<'_>,
    k: usize,
    tenure: usize,
    cfg: &SearchConfig,
    restart: usize,
) -> (f64, Vec<usize>, usize) {
    let m = mst.num_edges();
    let mut rng = restart_rng(cfg.seed, restart);
    let mut removed = vec![false; m];
    for e in rand::seq::index::sample(&mut rng, m, k - 1) {
        removed[e] = true;
    }
    let mut current = scorer.score(mst, &removed);
    let mut best = (current, removed_ids(&removed));
    // sweep index until which an edge may not be deleted
    let mut tabu_until = vec![0usize; m];
    let mut stall = 0;
    let mut sweep = 0;
    while stall < cfg.stall_limit {
        sweep += 1;
        let mut chosen: Option<(f64, usize, usize)> = None;
        for (r, e, ar) in swap_scores(mst, scorer, &removed) {
            let allowed = tabu_until[e] < sweep || ar > best.0;
            if !allowed {
                continue;
            }
            // candidates arrive in increasing (r, e) order
            if chosen.is_none_or(|(b, _, _)| ar > b) {
                chosen = Some((ar, r, e));
            }
        }
        let Some((ar, r, e)) = chosen else { break };
        removed[r] = false;
        removed[e] = true;
        tabu_until[r] = sweep + tenure;
        current = ar;
        if current > best.0 {
            best = (current, removed_ids(&removed));
            stall = 0;
        } else {
            stall += 1;
        }
    }
    (best.0, best.1, sweep)
}

fn removed_ids(removed: &[bool]) -> Vec<usize> {
    (0..removed.len()).filter(|&e| removed[e]).collect()
}

/// Scores of every swap neighbour `(restored, deleted, AR)`, in increasing
/// `(restored, deleted)` order, by updating pair sums instead of rebuilding
/// the confusion matrices.
fn swap_scores(mst: &Mst, scorer: &Scorer<'_>, removed: &[bool]) -> Vec<(usize, usize, f64)> {
    let refs = scorer.refs;
    let n = mst.n();
    // label offsets so one count row per vertex covers every reference
    let offsets: Vec<usize> = refs
        .iter()
        .scan(0, |acc, r| {
            let o = *acc;
            *acc += r.num_clusters();
            Some(o)
        })
        .collect();
    let width: usize = refs.iter().map(|r| r.num_clusters()).sum();
    let (ids, l) = component_ids(mst, removed);
    let base = scorer.pair_sums(&ids, l);
    let restorable: Vec<usize> = removed_ids(removed);

    restorable
        .par_iter()
        .flat_map_iter(|&r| {
            let mut without = removed.to_vec();
            without[r] = false;
            let forest = RootedForest::new(mst, &without);
            // subtree label counts per reference
            let mut sub = vec![0u64; n * width];
            for v in 0..n {
                for (i, rf) in refs.iter().enumerate() {
                    let x = rf.labels()[v];
                    if x != NOISE {
                        sub[v * width + offsets[i] + x - 1] += 1;
                    }
                }
            }
            for &v in forest.order.iter().rev() {
                let p = forest.parent[v];
                if p != usize::MAX {
                    for j in 0..width {
                        sub[p * width + j] += sub[v * width + j];
                    }
                }
            }
            let mut root = vec![usize::MAX; forest.num_components];
            for v in 0..n {
                if forest.parent[v] == usize::MAX {
                    root[forest.component[v]] = v;
                }
            }
            // restoring r merges the two clusters it separated
            let edge = mst.edge(r);
            let merged_root = root[forest.component[edge.u]];
            let a_side = forest.child_of(mst, r);
            let after_merge: Vec<(u128, u128)> = refs
                .iter()
                .enumerate()
                .map(|(i, rf)| {
                    let (mut joint, mut cols) = base[i];
                    let (mut sa, mut sb) = (0u64, 0u64);
                    for x in 0..rf.num_clusters() {
                        let j = offsets[i] + x;
                        let a = sub[a_side * width + j];
                        let b = sub[merged_root * width + j] - a;
                        joint += (a * b) as u128;
                        sa += a;
                        sb += b;
                    }
                    cols += (sa * sb) as u128;
                    (joint, cols)
                })
                .collect();

            let mut out = Vec::new();
            let mut pairs = vec![(0u128, 0u128); refs.len()];
            for (e, &gone) in without.iter().enumerate() {
                if gone || e == r {
                    continue;
                }
                let s = forest.child_of(mst, e);
                let c = root[forest.component[s]];
                for (i, rf) in refs.iter().enumerate() {
                    let (mut joint, mut cols) = after_merge[i];
                    let (mut ns, mut nc) = (0u64, 0u64);
                    for x in 0..rf.num_clusters() {
                        let j = offsets[i] + x;
                        let si = sub[s * width + j];
                        let ci = sub[c * width + j];
                        joint -= (si * (ci - si)) as u128;
                        ns += si;
                        nc += ci;
                    }
                    cols -= (ns * (nc - ns)) as u128;
                    pairs[i] = (joint, cols);
                }
                out.push((r, e, scorer.best(&pairs)));
            }
            out
        })
        .collect()
}
