//! Agglomerative schemes over the MST: start from singletons (or a warm
//! start) and consume tree edges one at a time until `k` clusters remain.

use rayon::prelude::*;

use crate::dataset::{squared_distance, Dataset};
use crate::disjoint_sets::DisjointSets;
use crate::divisive::check_k;
use crate::error::{Error, Result};
use crate::greedy::{select, Evaluation, GreedyRun, GreedyStep, TiePreference};
use crate::mst::{EdgeId, Mst};
use crate::partition::Partition;
use crate::validity::{evaluate_objective, ic_term, score_candidate, EvalContext, Objective, SizeTracker};

/// Greedy agglomerative maximisation of `objective`, starting from
/// singletons (IcA when the objective is the information criterion).
///
/// Each of the `n − k` steps consumes the unconsumed tree edge whose merge
/// gives the largest objective value; equal values go to the lighter edge,
/// and so does the step when no candidate can be scored.
pub fn agglomerative_maximize(
    mst: &Mst,
    ctx: &EvalContext<'_>,
    objective: &Objective,
    k: usize,
) -> Result<Partition> {
    Ok(agglomerative_run(mst, ctx, objective, k, None, Evaluation::default())?.partition)
}

/// [`agglomerative_maximize`] with an optional warm start (a mask of
/// already consumed edges), an explicit evaluation strategy, and the trace.
pub fn agglomerative_run(
    mst: &Mst,
    ctx: &EvalContext<'_>,
    objective: &Objective,
    k: usize,
    warm_start: Option<&[bool]>,
    evaluation: Evaluation,
) -> Result<GreedyRun> {
    let n = mst.n();
    check_k(n, k)?;
    if ctx.dataset.n() != n {
        return Err(Error::domain("tree and dataset sizes differ"));
    }
    objective.check_context(ctx)?;
    let consumed = start_mask(mst, warm_start, k)?;
    let incremental = evaluation == Evaluation::Incremental;
    match objective {
        Objective::InfoCriterion if incremental => Ok(ic_agglomerate(mst, ctx.dataset.d(), consumed, k)),
        Objective::NegWcss if incremental => Ok(wcss_agglomerate(mst, ctx.dataset, consumed, k)),
        _ => naive_agglomerate(mst, ctx, objective, consumed, k),
    }
}

fn start_mask(mst: &Mst, warm_start: Option<&[bool]>, k: usize) -> Result<Vec<bool>> {
    let mask = match warm_start {
        Some(m) if m.len() != mst.num_edges() => {
            return Err(Error::domain("warm-start mask does not match the tree"))
        }
        Some(m) => m.to_vec(),
        None => vec![false; mst.num_edges()],
    };
    let used = mask.iter().filter(|&&c| c).count();
    if used > mst.n() - k {
        return Err(Error::domain(format!(
            "warm start already has fewer than {k} clusters"
        )));
    }
    Ok(mask)
}

fn naive_agglomerate(
    mst: &Mst,
    ctx: &EvalContext<'_>,
    objective: &Objective,
    mut consumed: Vec<bool>,
    k: usize,
) -> Result<GreedyRun> {
    let mut done = consumed.iter().filter(|&&c| c).count();
    let mut steps = Vec::new();
    while done < mst.n() - k {
        let candidates = naive_merge_candidates(mst, ctx, objective, &consumed)?;
        let step = select(&candidates, TiePreference::SmallerKey).expect("an unconsumed edge remains");
        consumed[step.edge] = true;
        steps.push(step);
        done += 1;
    }
    Ok(GreedyRun {
        partition: mst.components(|id| consumed[id]),
        steps,
    })
}

fn naive_merge_candidates(
    mst: &Mst,
    ctx: &EvalContext<'_>,
    objective: &Objective,
    consumed: &[bool],
) -> Result<Vec<(EdgeId, f64)>> {
    (0..mst.num_edges())
        .into_par_iter()
        .filter(|&e| !consumed[e])
        .map(|e| {
            let p = mst.components(|id| id == e || consumed[id]);
            Ok((e, score_candidate(objective, ctx, &p)?))
        })
        .collect()
}

/// Union-find over the consumed edges of a warm start.
fn sets_from(mst: &Mst, consumed: &[bool]) -> DisjointSets {
    let mut sets = DisjointSets::new(mst.n());
    for (id, e) in mst.edges().iter().enumerate() {
        if consumed[id] {
            sets.union(e.u, e.v);
        }
    }
    sets
}

/// Information-criterion agglomeration with O(1) merge deltas.
fn ic_agglomerate(mst: &Mst, dim: usize, mut consumed: Vec<bool>, k: usize) -> GreedyRun {
    let n = mst.n();
    let mut sets = sets_from(mst, &consumed);
    let mut size = vec![0usize; n];
    let mut weight = vec![0.0f64; n];
    for v in 0..n {
        size[sets.find(v)] += 1;
    }
    for (id, e) in mst.edges().iter().enumerate() {
        if consumed[id] {
            weight[sets.find(e.u)] += e.weight;
        }
    }
    let mut total: f64 = (0..n)
        .filter(|&v| sets.find(v) == v)
        .map(|v| ic_term(size[v], weight[v], n, dim))
        .sum();
    let mut done = consumed.iter().filter(|&&c| c).count();
    let mut steps = Vec::new();
    let mut candidates = Vec::with_capacity(mst.num_edges());
    while done < n - k {
        candidates.clear();
        for (id, e) in mst.edges().iter().enumerate() {
            if consumed[id] {
                continue;
            }
            let (a, b) = (sets.find(e.u), sets.find(e.v));
            let merged = ic_term(size[a] + size[b], weight[a] + weight[b] + e.weight, n, dim);
            let value = total - ic_term(size[a], weight[a], n, dim) - ic_term(size[b], weight[b], n, dim)
                + merged;
            candidates.push((id, value));
        }
        let step = select(&candidates, TiePreference::SmallerKey).expect("an unconsumed edge remains");
        let e = mst.edge(step.edge);
        let (a, b) = (sets.find(e.u), sets.find(e.v));
        let (sa, sb, wa, wb) = (size[a], size[b], weight[a], weight[b]);
        let r = sets.union(a, b).expect("tree edges join distinct clusters");
        size[r] = sa + sb;
        weight[r] = wa + wb + e.weight;
        total += ic_term(size[r], weight[r], n, dim) - ic_term(sa, wa, n, dim) - ic_term(sb, wb, n, dim);
        consumed[step.edge] = true;
        steps.push(step);
        done += 1;
    }
    GreedyRun {
        partition: mst.components(|id| consumed[id]),
        steps,
    }
}

/// Negated-WCSS agglomeration: merging `A` and `B` raises the WCSS by
/// `|A||B|/(|A|+|B|)·‖μ_A − μ_B‖²` (Ward's increment).
fn wcss_agglomerate(mst: &Mst, ds: &Dataset, mut consumed: Vec<bool>, k: usize) -> GreedyRun {
    let n = mst.n();
    let d = ds.d();
    let mut sets = sets_from(mst, &consumed);
    let mut size = vec![0usize; n];
    let mut sum = vec![0.0f64; n * d];
    for v in 0..n {
        let r = sets.find(v);
        size[r] += 1;
        for (j, x) in ds.point(v).iter().enumerate() {
            sum[r * d + j] += x;
        }
    }
    let ctx = EvalContext::new(ds);
    let mut total = evaluate_objective(&Objective::NegWcss, &ctx, &mst.components(|id| consumed[id]))
        .expect("WCSS is defined on every partition");
    let mean = |sum: &[f64], r: usize, s: usize| -> Vec<f64> {
        sum[r * d..(r + 1) * d].iter().map(|x| x / s as f64).collect()
    };
    let mut done = consumed.iter().filter(|&&c| c).count();
    let mut steps = Vec::new();
    let mut candidates = Vec::with_capacity(mst.num_edges());
    while done < n - k {
        candidates.clear();
        for (id, e) in mst.edges().iter().enumerate() {
            if consumed[id] {
                continue;
            }
            let (a, b) = (sets.find(e.u), sets.find(e.v));
            let gap = squared_distance(&mean(&sum, a, size[a]), &mean(&sum, b, size[b]));
            let inc = (size[a] * size[b]) as f64 / (size[a] + size[b]) as f64 * gap;
            candidates.push((id, total - inc));
        }
        let step = select(&candidates, TiePreference::SmallerKey).expect("an unconsumed edge remains");
        let e = mst.edge(step.edge);
        let (a, b) = (sets.find(e.u), sets.find(e.v));
        let r = sets.union(a, b).expect("tree edges join distinct clusters");
        let other = if r == a { b } else { a };
        size[r] += size[other];
        for j in 0..d {
            sum[r * d + j] += sum[other * d + j];
        }
        total = step.value;
        consumed[step.edge] = true;
        steps.push(step);
        done += 1;
    }
    GreedyRun {
        partition: mst.components(|id| consumed[id]),
        steps,
    }
}

/// Re-scores every candidate of every recorded agglomerative step from
/// scratch, returning the best attainable value per step.
pub fn recompute_merge_maxima(
    mst: &Mst,
    ctx: &EvalContext<'_>,
    objective: &Objective,
    warm_start: Option<&[bool]>,
    steps: &[GreedyStep],
) -> Result<Vec<f64>> {
    let mut consumed = start_mask(mst, warm_start, 1)?;
    let mut out = Vec::with_capacity(steps.len());
    for s in steps {
        let best = naive_merge_candidates(mst, ctx, objective, &consumed)?
            .into_iter()
            .map(|(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(best);
        consumed[s.edge] = true;
    }
    Ok(out)
}

/// Threshold and target size for [`genie`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenieParams {
    pub gini_threshold: f64,
    pub k: usize,
}

impl GenieParams {
    pub fn new(gini_threshold: f64, k: usize) -> Result<Self> {
        if !(gini_threshold > 0.0 && gini_threshold <= 1.0) {
            return Err(Error::domain(format!(
                "Gini threshold must be in (0, 1], got {gini_threshold}"
            )));
        }
        if k == 0 {
            return Err(Error::domain("number of clusters must be positive"));
        }
        Ok(GenieParams { gini_threshold, k })
    }
}

/// One Genie merge: the edge consumed, the Gini index of the cluster sizes
/// before the merge, and whether the size constraint was in force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenieStep {
    pub edge: EdgeId,
    pub gini: f64,
    pub constrained: bool,
}

/// Genie: single linkage with an inequality guard.
///
/// While the Gini index of the current cluster sizes is below the
/// threshold, the lightest unconsumed edge is merged. Otherwise only edges
/// touching a smallest cluster are eligible, and the lightest of those is
/// merged.
pub fn genie(mst: &Mst, params: &GenieParams) -> Result<Partition> {
    Ok(genie_with_trace(mst, params)?.0)
}

pub fn genie_with_trace(mst: &Mst, params: &GenieParams) -> Result<(Partition, Vec<GenieStep>)> {
    let (consumed, trace) = genie_consumed(mst, params)?;
    Ok((mst.components(|id| consumed[id]), trace))
}

fn genie_consumed(mst: &Mst, params: &GenieParams) -> Result<(Vec<bool>, Vec<GenieStep>)> {
    let n = mst.n();
    check_k(n, params.k)?;
    let m = mst.num_edges();
    let mut sets = DisjointSets::new(n);
    let mut sizes = SizeTracker::singletons(n);
    let mut consumed = vec![false; m];
    // next_unconsumed[i]: smallest unconsumed id >= i (m if none), path-compressed
    let mut next_free: Vec<usize> = (0..=m).collect();
    fn first_free(next: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while next[r] != r {
            r = next[r];
        }
        let mut c = i;
        while next[c] != r {
            let t = next[c];
            next[c] = r;
            c = t;
        }
        r
    }
    let mut trace = Vec::with_capacity(n - params.k);
    for _ in 0..(n - params.k) {
        let gini = sizes.gini();
        let constrained = gini >= params.gini_threshold;
        let mut e = first_free(&mut next_free, 0);
        if constrained {
            let smallest = sizes.min_size();
            while e < m {
                let edge = mst.edge(e);
                if sets.set_size(edge.u) == smallest || sets.set_size(edge.v) == smallest {
                    break;
                }
                e = first_free(&mut next_free, e + 1);
            }
        }
        debug_assert!(e < m, "a smallest cluster always has an incident unconsumed edge");
        let edge = mst.edge(e);
        let (a, b) = (sets.set_size(edge.u), sets.set_size(edge.v));
        sets.union(edge.u, edge.v);
        sizes.merge(a, b);
        consumed[e] = true;
        next_free[e] = e + 1;
        trace.push(GenieStep {
            edge: e,
            gini,
            constrained,
        });
    }
    Ok((consumed, trace))
}

/// Parameters of [`genie_plus_ic`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeniePlusIcParams {
    /// Gini thresholds of the warm-start Genie runs.
    pub thresholds: Vec<f64>,
    /// How many clusters beyond `k` the warm-start runs aim for.
    pub extra: usize,
    pub k: usize,
    /// Dimensionality of the data, used by the information criterion.
    pub dim: usize,
}

impl GeniePlusIcParams {
    /// Thresholds {0.1, 0.3, 0.5, 0.7}.
    pub fn with_default_thresholds(k: usize, extra: usize, dim: usize) -> Self {
        GeniePlusIcParams {
            thresholds: vec![0.1, 0.3, 0.5, 0.7],
            extra,
            k,
            dim,
        }
    }
}

/// Genie+Ic: information-criterion agglomeration warm-started from the
/// common refinement of several Genie partitions into `k + extra` clusters.
///
/// On a tree, two points share a cluster in every Genie run exactly when
/// the path between them was consumed in every run, so the warm start is
/// the intersection of the runs' consumed-edge sets.
pub fn genie_plus_ic(mst: &Mst, params: &GeniePlusIcParams) -> Result<Partition> {
    Ok(genie_plus_ic_run(mst, params)?.partition)
}

pub fn genie_plus_ic_run(mst: &Mst, params: &GeniePlusIcParams) -> Result<GreedyRun> {
    let n = mst.n();
    check_k(n, params.k)?;
    if params.thresholds.is_empty() {
        return Err(Error::domain("at least one Gini threshold is required"));
    }
    if params.dim == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let target = params.k + params.extra;
    if target > n {
        return Err(Error::domain(format!(
            "k + extra = {target} exceeds the number of points {n}"
        )));
    }
    let masks = params
        .thresholds
        .par_iter()
        .map(|&g| Ok(genie_consumed(mst, &GenieParams::new(g, target)?)?.0))
        .collect::<Result<Vec<_>>>()?;
    let warm: Vec<bool> = (0..mst.num_edges())
        .map(|e| masks.iter().all(|m| m[e]))
        .collect();
    Ok(ic_agglomerate(mst, params.dim, warm, params.k))
}

/// Consumed-edge mask of the Genie+Ic warm start.
pub fn genie_plus_ic_warm_start(mst: &Mst, params: &GeniePlusIcParams) -> Result<Vec<bool>> {
    let target = params.k + params.extra;
    check_k(mst.n(), target)?;
    let mut warm = vec![true; mst.num_edges()];
    for &g in &params.thresholds {
        let (m, _) = genie_consumed(mst, &GenieParams::new(g, target)?)?;
        for (w, c) in warm.iter_mut().zip(m) {
            *w &= c;
        }
    }
    Ok(warm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisive::single_linkage_cut;
    use crate::mst::build_mst;
    use crate::tests_support::{blobs, random_dataset};

    #[test]
    fn cut_weight_reproduces_single_linkage() {
        for seed in 0..10 {
            let ds = random_dataset(seed, 20, 2);
            let t = build_mst(&ds);
            let ctx = EvalContext::new(&ds).with_mst(&t);
            for k in [1, 2, 5, 20] {
                let p = agglomerative_maximize(&t, &ctx, &Objective::CutWeight, k).unwrap();
                assert_eq!(p, single_linkage_cut(&t, k).unwrap());
            }
        }
        let ds = Dataset::from_1d(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let t = build_mst(&ds);
        let ctx = EvalContext::new(&ds).with_mst(&t);
        for k in 1..=5 {
            assert_eq!(
                agglomerative_maximize(&t, &ctx, &Objective::CutWeight, k).unwrap(),
                single_linkage_cut(&t, k).unwrap()
            );
        }
    }

    #[test]
    fn ica_on_small_line() {
        let ds = Dataset::from_1d(&[0.0, 1.0, 2.0, 10.0]).unwrap();
        let t = build_mst(&ds);
        let ctx = EvalContext::new(&ds).with_mst(&t);
        let run = agglomerative_run(&t, &ctx, &Objective::InfoCriterion, 2, None, Evaluation::Naive).unwrap();
        assert_eq!(run.partition.labels(), &[1, 1, 1, 2]);
        // both unit edges tie on the first merge; the lighter key (0,1) goes first
        assert_eq!(run.steps.iter().map(|s| s.edge).collect::<Vec<_>>(), vec![0, 1]);
        let fast = agglomerative_maximize(&t, &ctx, &Objective::InfoCriterion, 2).unwrap();
        assert_eq!(fast, run.partition);
        let all = agglomerative_maximize(&t, &ctx, &Objective::InfoCriterion, 4).unwrap();
        assert_eq!(all, Partition::singletons(4));
    }

    #[test]
    fn incremental_paths_agree_with_naive() {
        for seed in 0..6 {
            let ds = blobs(seed, 10, &[[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]], 1.2);
            let t = build_mst(&ds);
            let ctx = EvalContext::new(&ds).with_mst(&t);
            for o in [Objective::InfoCriterion, Objective::NegWcss] {
                let fast = agglomerative_run(&t, &ctx, &o, 3, None, Evaluation::Incremental).unwrap();
                let slow = agglomerative_run(&t, &ctx, &o, 3, None, Evaluation::Naive).unwrap();
                assert_eq!(fast.partition, slow.partition, "{o}");
                for (a, b) in fast.steps.iter().zip(&slow.steps) {
                    assert_eq!(a.edge, b.edge);
                    assert!((a.value - b.value).abs() <= 1e-9 * b.value.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn genie_hand_trace() {
        let ds = Dataset::from_1d(&[0.0, 1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        let t = build_mst(&ds);
        let (p, trace) = genie_with_trace(&t, &GenieParams::new(0.3, 2).unwrap()).unwrap();
        assert_eq!(p.labels(), &[1, 1, 1, 1, 1, 2]);
        let ginis: Vec<f64> = trace.iter().map(|s| s.gini).collect();
        assert_eq!(ginis, vec![0.0, 1.0 / 6.0, 1.0 / 3.0, 0.5]);
        let flags: Vec<bool> = trace.iter().map(|s| s.constrained).collect();
        assert_eq!(flags, vec![false, false, true, true]);
    }

    #[test]
    fn genie_prefers_small_clusters() {
        // a tight pair, a loose chain, and an outlier; the guard stops the
        // chain from absorbing everything before the pair grows
        let ds = Dataset::from_1d(&[0.0, 0.1, 5.0, 6.0, 7.0, 8.0, 9.0, 30.0]).unwrap();
        let t = build_mst(&ds);
        let plain = single_linkage_cut(&t, 2).unwrap();
        let g = genie(&t, &GenieParams::new(0.2, 2).unwrap()).unwrap();
        assert_eq!(plain.labels(), &[1, 1, 1, 1, 1, 1, 1, 2]);
        assert_eq!(g.labels(), &[1, 1, 2, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn genie_without_guard_is_single_linkage() {
        for seed in 0..20 {
            let ds = random_dataset(seed, 30, 2);
            let t = build_mst(&ds);
            for k in [1, 2, 4, 30] {
                assert_eq!(
                    genie(&t, &GenieParams::new(1.0, k).unwrap()).unwrap(),
                    single_linkage_cut(&t, k).unwrap()
                );
            }
        }
    }

    #[test]
    fn genie_params_validation() {
        assert!(GenieParams::new(0.0, 2).is_err());
        assert!(GenieParams::new(1.5, 2).is_err());
        assert!(GenieParams::new(0.3, 0).is_err());
        let t = build_mst(&Dataset::from_1d(&[0.0, 1.0]).unwrap());
        assert!(genie(&t, &GenieParams::new(0.3, 3).unwrap()).is_err());
        assert_eq!(
            genie(&t, &GenieParams::new(0.3, 2).unwrap()).unwrap(),
            Partition::singletons(2)
        );
    }

    #[test]
    fn genie_plus_ic_reductions() {
        let ds = Dataset::from_1d(&[0.0, 1.0, 2.0, 10.0]).unwrap();
        let t = build_mst(&ds);
        let p = genie_plus_ic(&t, &GeniePlusIcParams::with_default_thresholds(2, 0, 1)).unwrap();
        assert_eq!(p.labels(), &[1, 1, 1, 2]);

        for seed in 0..10 {
            let ds = random_dataset(seed, 25, 2);
            let t = build_mst(&ds);
            let ctx = EvalContext::new(&ds).with_mst(&t);
            // one threshold, no extra clusters: the warm start is the answer
            let single = GeniePlusIcParams {
                thresholds: vec![0.3],
                extra: 0,
                k: 3,
                dim: 2,
            };
            assert_eq!(
                genie_plus_ic(&t, &single).unwrap(),
                genie(&t, &GenieParams::new(0.3, 3).unwrap()).unwrap()
            );
            // warm start at n clusters: plain IcA
            let cold = GeniePlusIcParams::with_default_thresholds(3, 22, 2);
            assert_eq!(
                genie_plus_ic(&t, &cold).unwrap(),
                agglomerative_maximize(&t, &ctx, &Objective::InfoCriterion, 3).unwrap()
            );
        }
        let t = build_mst(&Dataset::from_1d(&[0.0, 1.0, 2.0]).unwrap());
        assert!(genie_plus_ic(&t, &GeniePlusIcParams::with_default_thresholds(2, 2, 1)).is_err());
    }

    #[test]
    fn warm_start_refines_every_run() {
        for seed in 0..15 {
            let ds = blobs(seed, 15, &[[0.0, 0.0], [2.0, 0.0], [0.0, 3.0], [5.0, 5.0]], 1.0);
            let t = build_mst(&ds);
            let params = GeniePlusIcParams::with_default_thresholds(4, 5, 2);
            let warm = genie_plus_ic_warm_start(&t, &params).unwrap();
            let start = t.components(|id| warm[id]);
            for &g in &params.thresholds {
                let run = genie(&t, &GenieParams::new(g, 9).unwrap()).unwrap();
                // every warm-start cluster sits inside one cluster of the run
                for members in start.members() {
                    let first = run.labels()[members[0]];
                    assert!(members.iter().all(|&i| run.labels()[i] == first));
                }
            }
            let p = genie_plus_ic(&t, &params).unwrap();
            assert_eq!(p.num_clusters(), 4);
        }
    }
}
