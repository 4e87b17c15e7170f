//! Divisive partitioning: start from the whole tree and greedily delete
//! the edge whose removal gives the best-scoring partition.

use rayon::prelude::*;

use crate::dataset::{squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::greedy::{select, Evaluation, GreedyRun, GreedyStep, TiePreference};
use crate::knn::NeighbourTable;
use crate::mst::{EdgeId, Mst, RootedForest};
use crate::partition::Partition;
use crate::validity::{evaluate_objective, ic_term, score_candidate, EvalContext, Objective};

pub(crate) fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::domain(format!(
            "number of clusters must be in 1..={n}, got {k}"
        )));
    }
    Ok(())
}

/// Single linkage: delete the `k − 1` heaviest tree edges (the last `k − 1`
/// in key order).
pub fn single_linkage_cut(mst: &Mst, k: usize) -> Result<Partition> {
    check_k(mst.n(), k)?;
    let keep = mst.num_edges() + 1 - k;
    Ok(mst.components(|id| id < keep))
}

/// Greedy divisive maximisation of `objective` over the tree (ITM when the
/// objective is the information criterion).
///
/// At each of the `k − 1` steps every remaining edge is tried and the one
/// whose deletion yields the largest objective value is removed. Equal
/// values go to the heavier edge, and when no candidate can be scored at
/// all the heaviest remaining edge is removed.
pub fn divisive_maximize(
    mst: &Mst,
    ds: &Dataset,
    objective: &Objective,
    k: usize,
    neighbours: Option<&NeighbourTable>,
) -> Result<Partition> {
    let mut ctx = EvalContext::new(ds).with_mst(mst);
    ctx.neighbours = neighbours;
    Ok(divisive_run(mst, &ctx, objective, k, Evaluation::default())?.partition)
}

/// [`divisive_maximize`] with an explicit evaluation strategy and the
/// per-step trace.
pub fn divisive_run(
    mst: &Mst,
    ctx: &EvalContext<'_>,
    objective: &Objective,
    k: usize,
    evaluation: Evaluation,
) -> Result<GreedyRun> {
    let n = mst.n();
    check_k(n, k)?;
    if ctx.dataset.n() != n {
        return Err(Error::domain("tree and dataset sizes differ"));
    }
    objective.check_context(ctx)?;
    let mut removed = vec![false; mst.num_edges()];
    let mut steps = Vec::with_capacity(k - 1);
    let incremental = evaluation == Evaluation::Incremental
        && matches!(objective, Objective::NegWcss | Objective::InfoCriterion);

    for _ in 1..k {
        let candidates = if incremental {
            split_deltas(mst, ctx.dataset, objective, &removed)?
        } else {
            naive_candidates(mst, ctx, objective, &removed)?
        };
        let step = select(&candidates, TiePreference::LargerKey).expect("an edge remains while l < k <= n");
        removed[step.edge] = true;
        steps.push(step);
    }
    Ok(GreedyRun {
        partition: mst.components(|id| !removed[id]),
        steps,
    })
}

fn naive_candidates(
    mst: &Mst,
    ctx: &EvalContext<'_>,
    objective: &Objective,
    removed: &[bool],
) -> Result<Vec<(EdgeId, f64)>> {
    (0..mst.num_edges())
        .into_par_iter()
        .filter(|&e| !removed[e])
        .map(|e| {
            let p = mst.components(|id| id != e && !removed[id]);
            Ok((e, score_candidate(objective, ctx, &p)?))
        })
        .collect()
}

/// Scores every single-edge split from per-subtree aggregates: `O(n·d)`
/// per step instead of one full evaluation per candidate.
fn split_deltas(
    mst: &Mst,
    ds: &Dataset,
    objective: &Objective,
    removed: &[bool],
) -> Result<Vec<(EdgeId, f64)>> {
    let n = ds.n();
    let d = ds.d();
    let forest = RootedForest::new(mst, removed);
    let current = mst.components(|id| !removed[id]);
    let ctx = EvalContext::new(ds).with_mst(mst);
    let base = evaluate_objective(objective, &ctx, &current)?;

    // subtree aggregates, filled bottom-up
    let mut size = vec![1usize; n];
    let mut weight = vec![0.0f64; n];
    let centre = global_mean(ds);
    let mut sum = vec![0.0f64; n * d];
    for v in 0..n {
        for (j, x) in ds.point(v).iter().enumerate() {
            sum[v * d + j] = x - centre[j];
        }
    }
    for &v in forest.order.iter().rev() {
        let p = forest.parent[v];
        if p == usize::MAX {
            continue;
        }
        size[p] += size[v];
        weight[p] += weight[v] + mst.edge(forest.parent_edge[v]).weight;
        for j in 0..d {
            sum[p * d + j] += sum[v * d + j];
        }
    }
    let root_of_component: Vec<usize> = {
        let mut r = vec![usize::MAX; forest.num_components];
        for v in 0..n {
            if forest.parent[v] == usize::MAX {
                r[forest.component[v]] = v;
            }
        }
        r
    };

    let mut out = Vec::with_capacity(mst.num_edges());
    let mut mean_s = vec![0.0; d];
    let mut mean_r = vec![0.0; d];
    for e in (0..mst.num_edges()).filter(|&e| !removed[e]) {
        let child = forest.child_of(mst, e);
        let root = root_of_component[forest.component[child]];
        let (n_c, n_s) = (size[root], size[child]);
        let n_r = n_c - n_s;
        let value = match objective {
            Objective::NegWcss => {
                for j in 0..d {
                    let total = sum[root * d + j];
                    let part = sum[child * d + j];
                    mean_s[j] = part / n_s as f64;
                    mean_r[j] = (total - part) / n_r as f64;
                }
                // WCSS(C) − WCSS(S) − WCSS(C∖S) = |S||C∖S|/|C| · ‖μ_S − μ_{C∖S}‖²
                base + (n_s * n_r) as f64 / n_c as f64 * squared_distance(&mean_s, &mean_r)
            }
            Objective::InfoCriterion => {
                let l_c = weight[root];
                let l_s = weight[child];
                let mut l_r = l_c - l_s - mst.edge(e).weight;
                if l_r <= l_c * 1e-12 {
                    l_r = 0.0;
                }
                base - ic_term(n_c, l_c, n, d) + ic_term(n_s, l_s, n, d) + ic_term(n_r, l_r, n, d)
            }
            _ => unreachable!("incremental path only for WCSS and IC"),
        };
        out.push((e, value));
    }
    Ok(out)
}

fn global_mean(ds: &Dataset) -> Vec<f64> {
    let mut m = vec![0.0; ds.d()];
    for i in 0..ds.n() {
        for (a, x) in m.iter_mut().zip(ds.point(i)) {
            *a += x;
        }
    }
    m.iter_mut().for_each(|a| *a /= ds.n() as f64);
    m
}

/// Re-scores every candidate of every recorded step from scratch and
/// returns, per step, the best attainable value. Used by tests to check
/// that each chosen edge was a true argmax.
pub fn recompute_step_maxima(
    mst: &Mst,
    ctx: &EvalContext<'_>,
    objective: &Objective,
    steps: &[GreedyStep],
) -> Result<Vec<f64>> {
    let mut removed = vec![false; mst.num_edges()];
    let mut out = Vec::with_capacity(steps.len());
    for s in steps {
        let best = naive_candidates(mst, ctx, objective, &removed)?
            .into_iter()
            .map(|(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(best);
        removed[s.edge] = true;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knn::knn_table;
    use crate::mst::build_mst;
    use crate::tests_support::{blobs, random_dataset};

    fn line() -> (Dataset, Mst) {
        let ds = Dataset::from_1d(&[0.0, 1.0, 2.0, 10.0]).unwrap();
        let t = build_mst(&ds);
        (ds, t)
    }

    #[test]
    fn single_linkage_examples() {
        let (_, t) = line();
        assert_eq!(single_linkage_cut(&t, 2).unwrap().labels(), &[1, 1, 1, 2]);
        assert_eq!(single_linkage_cut(&t, 1).unwrap(), Partition::single(4));
        assert_eq!(single_linkage_cut(&t, 4).unwrap(), Partition::singletons(4));
        assert!(single_linkage_cut(&t, 5).is_err());
        assert!(single_linkage_cut(&t, 0).is_err());
    }

    #[test]
    fn hand_checked_objectives() {
        let (ds, t) = line();
        // exhaustive over the three cuts
        let ctx = EvalContext::new(&ds).with_mst(&t);
        for o in [Objective::NegWcss, Objective::InfoCriterion] {
            let mut best = (f64::NEG_INFINITY, 0);
            for e in 0..3 {
                let p = t.components(|id| id != e);
                let v = evaluate_objective(&o, &ctx, &p).unwrap();
                if v > best.0 {
                    best = (v, e);
                }
            }
            assert_eq!(best.1, 2, "{o}");
            let p = divisive_maximize(&t, &ds, &o, 2, None).unwrap();
            assert_eq!(p.labels(), &[1, 1, 1, 2], "{o}");
        }
        assert_eq!(
            divisive_maximize(&t, &ds, &Objective::Silhouette, 1, None).unwrap(),
            Partition::single(4)
        );
    }

    #[test]
    fn cut_weight_is_single_linkage() {
        for seed in 0..15 {
            let ds = random_dataset(seed, 25, 2);
            let t = build_mst(&ds);
            for k in [1, 2, 3, 7, 25] {
                let p = divisive_maximize(&t, &ds, &Objective::CutWeight, k, None).unwrap();
                assert_eq!(p, single_linkage_cut(&t, k).unwrap());
            }
        }
        // equal weights everywhere
        let ds = Dataset::from_1d(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let t = build_mst(&ds);
        for k in 1..=5 {
            assert_eq!(
                divisive_maximize(&t, &ds, &Objective::CutWeight, k, None).unwrap(),
                single_linkage_cut(&t, k).unwrap()
            );
        }
    }

    #[test]
    fn incremental_agrees_with_naive() {
        for seed in 0..8 {
            let ds = blobs(seed, 12, &[[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]], 1.5);
            let t = build_mst(&ds);
            let ctx = EvalContext::new(&ds).with_mst(&t);
            for o in [Objective::NegWcss, Objective::InfoCriterion] {
                let fast = divisive_run(&t, &ctx, &o, 5, Evaluation::Incremental).unwrap();
                let slow = divisive_run(&t, &ctx, &o, 5, Evaluation::Naive).unwrap();
                assert_eq!(fast.partition, slow.partition, "{o} seed {seed}");
                for (a, b) in fast.steps.iter().zip(&slow.steps) {
                    assert!((a.value - b.value).abs() <= 1e-9 * b.value.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn chosen_steps_are_argmax() {
        let ds = random_dataset(77, 30, 2);
        let t = build_mst(&ds);
        let nt = knn_table(&ds, 25).unwrap();
        let ctx = EvalContext::new(&ds).with_mst(&t).with_neighbours(&nt);
        for o in Objective::catalogue() {
            let run = divisive_run(&t, &ctx, &o, 4, Evaluation::default()).unwrap();
            assert_eq!(run.partition.num_clusters(), 4);
            let maxima = recompute_step_maxima(&t, &ctx, &o, &run.steps).unwrap();
            for (s, m) in run.steps.iter().zip(maxima) {
                if m.is_finite() {
                    assert!((s.value - m).abs() <= 1e-9 * m.abs().max(1.0), "{o}");
                } else {
                    assert_eq!(s.value, m, "{o}");
                }
            }
        }
    }

    #[test]
    fn missing_neighbours_is_config_error() {
        let (ds, t) = line();
        let o = Objective::Wcnn { m: 2 };
        assert!(matches!(divisive_maximize(&t, &ds, &o, 2, None), Err(Error::Config(_))));
    }
}
