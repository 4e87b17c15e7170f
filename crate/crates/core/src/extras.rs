//! Two further tree heuristics: HEMST (edge-weight spread reduction) and
//! CTCEHC (degree-seeded regions merged by medoid tree distance).

use std::collections::VecDeque;

use crate::divisive::{check_k, single_linkage_cut};
use crate::error::Result;
use crate::mst::{vertex_degrees, EdgeId, Mst};
use crate::partition::Partition;
use crate::Dataset;

/// HEMST: `k − 1` times, delete the remaining edge whose removal leaves
/// the smallest population standard deviation of the remaining weights.
/// Ties go to the heavier edge, then the larger key.
pub fn hemst(mst: &Mst, k: usize) -> Result<Partition> {
    let removed = hemst_steps(mst, k)?;
    Ok(mst.components(|id| !removed.contains(&id)))
}

/// Edges deleted by [`hemst`], in order.
pub fn hemst_steps(mst: &Mst, k: usize) -> Result<Vec<EdgeId>> {
    check_k(mst.n(), k)?;
    let mut present = vec![true; mst.num_edges()];
    let mut out = Vec::with_capacity(k - 1);
    for _ in 1..k {
        let weights = || (0..mst.num_edges()).filter(|&e| present[e]).map(|e| mst.edge(e).weight);
        let m = weights().count() as f64;
        // shift by the current mean to keep the sums well conditioned
        let shift = weights().sum::<f64>() / m;
        let (s1, s2) = weights().fold((0.0, 0.0), |(a, b), w| (a + (w - shift), b + (w - shift) * (w - shift)));
        let mut best: Option<(f64, EdgeId)> = None;
        for e in (0..mst.num_edges()).filter(|&e| present[e]) {
            let x = mst.edge(e).weight - shift;
            let var = if m > 1.0 {
                let mean = (s1 - x) / (m - 1.0);
                ((s2 - x * x) / (m - 1.0) - mean * mean).max(0.0)
            } else {
                0.0
            };
            // ids follow key order, so a later id is never lighter
            if best.is_none_or(|(v, _)| var <= v) {
                best = Some((var, e));
            }
        }
        let (_, e) = best.expect("an edge remains while l < k");
        present[e] = false;
        out.push(e);
    }
    Ok(out)
}

/// Population standard deviation of the weights of the edges not in
/// `removed`, computed directly.
pub fn remaining_weight_std(mst: &Mst, removed: &[EdgeId]) -> f64 {
    let w: Vec<f64> = (0..mst.num_edges())
        .filter(|e| !removed.contains(e))
        .map(|e| mst.edge(e).weight)
        .collect();
    if w.is_empty() {
        return 0.0;
    }
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    (w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / w.len() as f64).sqrt()
}

/// CTCEHC.
///
/// Phase 1: every vertex of tree degree at least 3 seeds a region and the
/// other vertices join the seed nearest along the tree (ties to the lower
/// seed index). Without seeds this is [`single_linkage_cut`]. With fewer
/// regions than `k`, the heaviest region-internal edges are cut.
///
/// Phase 2: while more than `k` regions remain, the two tree-adjacent
/// regions whose medoids are closest along the tree are merged (ties to
/// the lighter connecting edge). A medoid is the region vertex with the
/// smallest summed tree distance to the rest of its region, lowest index on
/// ties.
pub fn ctcehc(mst: &Mst, ds: &Dataset, k: usize) -> Result<Partition> {
    let n = mst.n();
    check_k(n, k)?;
    if ds.n() != n {
        return Err(crate::Error::domain("tree and dataset sizes differ"));
    }
    let seeds: Vec<usize> = vertex_degrees(mst)
        .iter()
        .enumerate()
        .filter(|(_, &d)| d >= 3)
        .map(|(v, _)| v)
        .collect();
    if seeds.is_empty() {
        return single_linkage_cut(mst, k);
    }
    let region = nearest_seed(mst, &seeds);
    let mut cut: Vec<bool> = mst.edges().iter().map(|e| region[e.u] != region[e.v]).collect();
    let mut regions = seeds.len();

    if regions < k {
        for e in (0..mst.num_edges()).rev() {
            if regions == k {
                break;
            }
            if !cut[e] {
                cut[e] = true;
                regions += 1;
            }
        }
        return Ok(mst.components(|id| !cut[id]));
    }

    let mut label = mst.components(|id| !cut[id]).labels().to_vec();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); regions + 1];
    for (v, &l) in label.iter().enumerate() {
        members[l].push(v);
    }
    let mut to_medoid = vec![0.0f64; n];
    for region in &members[1..] {
        settle_medoid(mst, &label, region, &mut to_medoid);
    }
    while regions > k {
        let mut best: Option<(f64, EdgeId)> = None;
        for (e, edge) in mst.edges().iter().enumerate() {
            if !cut[e] || label[edge.u] == label[edge.v] {
                continue;
            }
            let d = to_medoid[edge.u] + edge.weight + to_medoid[edge.v];
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, e));
            }
        }
        let (_, e) = best.expect("a forest with several regions has a crossing edge");
        let edge = mst.edge(e);
        let (keep, gone) = {
            let (a, b) = (label[edge.u], label[edge.v]);
            (a.min(b), a.max(b))
        };
        let moved = std::mem::take(&mut members[gone]);
        for &v in &moved {
            label[v] = keep;
        }
        members[keep].extend(moved);
        cut[e] = false;
        regions -= 1;
        settle_medoid(mst, &label, &members[keep], &mut to_medoid);
    }
    Ok(mst.components(|id| !cut[id]))
}

/// Multi-source shortest paths on the tree; each vertex gets the index
/// (into `seeds`) of its nearest seed under the `(distance, seed)` order.
fn nearest_seed(mst: &Mst, seeds: &[usize]) -> Vec<usize> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Key(f64, usize);
    impl Eq for Key {}
    impl PartialOrd for Key {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Key {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
        }
    }

    let n = mst.n();
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    for (i, &s) in seeds.iter().enumerate() {
        best[s] = Some((0.0, i));
        heap.push(Reverse((Key(0.0, i), s)));
    }
    let mut done = vec![false; n];
    while let Some(Reverse((Key(d, i), v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(w, e) in mst.neighbours(v) {
            let cand = (d + mst.edge(e).weight, i);
            let better = match best[w] {
                None => true,
                Some(cur) => Key(cand.0, cand.1) < Key(cur.0, cur.1),
            };
            if !done[w] && better {
                best[w] = Some(cand);
                heap.push(Reverse((Key(cand.0, cand.1), w)));
            }
        }
    }
    best.into_iter().map(|b| b.expect("tree is connected").1).collect()
}

/// Finds the medoid of a connected region and stores every member's tree
/// distance to it in `to_medoid`.
fn settle_medoid(mst: &Mst, label: &[usize], members: &[usize], to_medoid: &mut [f64]) {
    let root = members[0];
    let order = region_order(mst, label, root);
    let mut sub = vec![0usize; mst.n()];
    let mut dist = vec![0.0f64; mst.n()];
    for &(v, p, w) in &order {
        if p != usize::MAX {
            dist[v] = dist[p] + w;
        }
    }
    for &(v, p, _) in order.iter().rev() {
        sub[v] += 1;
        if p != usize::MAX {
            sub[p] += sub[v];
        }
    }
    let size = members.len();
    let mut total = vec![0.0f64; mst.n()];
    // rerooting: moving the root across an edge of weight w brings `sub`
    // vertices closer and the rest further
    total[root] = order.iter().map(|&(v, _, _)| dist[v]).sum();
    for &(v, p, w) in &order {
        if p != usize::MAX {
            total[v] = total[p] + w * (size as f64 - 2.0 * sub[v] as f64);
        }
    }
    let medoid = members
        .iter()
        .copied()
        .min_by(|&a, &b| total[a].total_cmp(&total[b]).then(a.cmp(&b)))
        .expect("regions are non-empty");
    for (v, d) in distances_within(mst, label, medoid) {
        to_medoid[v] = d;
    }
}

/// Preorder `(vertex, parent, edge weight to parent)` of the region holding
/// `root`.
fn region_order(mst: &Mst, label: &[usize], root: usize) -> Vec<(usize, usize, f64)> {
    let l = label[root];
    let mut order = Vec::new();
    let mut stack = vec![(root, usize::MAX, 0.0)];
    while let Some((v, p, w)) = stack.pop() {
        order.push((v, p, w));
        for &(x, e) in mst.neighbours(v) {
            if x != p && label[x] == l {
                stack.push((x, v, mst.edge(e).weight));
            }
        }
    }
    order
}

fn distances_within(mst: &Mst, label: &[usize], source: usize) -> Vec<(usize, f64)> {
    let l = label[source];
    let mut out = vec![(source, 0.0)];
    let mut queue = VecDeque::from([(source, usize::MAX, 0.0)]);
    while let Some((v, p, d)) = queue.pop_front() {
        for &(x, e) in mst.neighbours(v) {
            if x != p && label[x] == l {
                let dx = d + mst.edge(e).weight;
                out.push((x, dx));
                queue.push_back((x, v, dx));
            }
        }
    }
    out
}
