//! Euclidean minimum spanning trees and the queries the clustering
//! algorithms run against them.

use std::cmp::Ordering;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::disjoint_sets::DisjointSets;
use crate::error::{Error, Result};
use crate::partition::Partition;

/// Position of an edge in [`Mst::edges`].
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    /// Total order on edges: weight first, then endpoints.
    pub fn key_cmp(&self, other: &Edge) -> Ordering {
        cmp_key((self.weight, self.u, self.v), (other.weight, other.u, other.v))
    }
}

#[inline]
fn cmp_key(a: (f64, usize, usize), b: (f64, usize, usize)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.cmp(&b.1))
        .then(a.2.cmp(&b.2))
}

/// A minimum spanning tree over `n` points.
///
/// Edges are stored in strictly increasing `(weight, u, v)` order and are
/// referred to by their position in that sequence. Because edge ids follow
/// the key order, comparing two ids is the same as comparing their keys.
#[derive(Debug, Clone)]
pub struct Mst {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, EdgeId)>>,
    total_weight: f64,
}

impl Mst {
    /// Assembles a tree from edges already known to span `n` vertices.
    pub fn from_edges(n: usize, mut edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("a tree needs at least one vertex"));
        }
        if edges.len() + 1 != n {
            return Err(Error::domain(format!(
                "{} edges cannot span {n} vertices",
                edges.len()
            )));
        }
        let mut check = DisjointSets::new(n);
        for e in edges.iter_mut() {
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
            }
            if e.v >= n || e.u == e.v {
                return Err(Error::domain(format!("invalid edge ({}, {})", e.u, e.v)));
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(Error::domain(format!("invalid edge weight {}", e.weight)));
            }
            if check.union(e.u, e.v).is_none() {
                return Err(Error::domain("edge set contains a cycle"));
            }
        }
        edges.sort_by(Edge::key_cmp);
        let mut adjacency = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        let total_weight = edges.iter().map(|e| e.weight).sum();
        Ok(Mst {
            n,
            edges,
            adjacency,
            total_weight,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Neighbours of `v` together with the id of the connecting edge.
    #[inline]
    pub fn neighbours(&self, v: usize) -> &[(usize, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Connected components of the forest made of the edges for which
    /// `keep` is true, labelled canonically.
    pub fn components(&self, keep: impl Fn(EdgeId) -> bool) -> Partition {
        let mut sets = DisjointSets::new(self.n);
        for (id, e) in self.edges.iter().enumerate() {
            if keep(id) {
                sets.union(e.u, e.v);
            }
        }
        let ids = sets.set_ids();
        Partition::canonical(&ids)
    }

    /// Component index (zero-based, canonical) of every vertex, given a
    /// per-edge removal mask.
    pub(crate) fn component_ids(&self, removed: &[bool]) -> Vec<usize> {
        let mut ids = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if ids[start] != usize::MAX {
                continue;
            }
            ids[start] = next;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(w, e) in &self.adjacency[v] {
                    if !removed[e] && ids[w] == usize::MAX {
                        ids[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        ids
    }

    /// Tree-path distances from `source` to every vertex.
    pub fn path_lengths_from(&self, source: usize) -> Vec<f64> {
        let mut dist = vec![f64::NAN; self.n];
        dist[source] = 0.0;
        let mut stack = vec![source];
        while let Some(v) = stack.pop() {
            for &(w, e) in &self.adjacency[v] {
                if dist[w].is_nan() {
                    dist[w] = dist[v] + self.edges[e].weight;
                    stack.push(w);
                }
            }
        }
        dist
    }
}

/// The forest left after deleting some tree edges, each component rooted
/// at its smallest vertex.
#[derive(Debug, Clone)]
pub(crate) struct RootedForest {
    /// Vertices in preorder; every parent precedes its children.
    pub order: Vec<usize>,
    pub parent: Vec<usize>,
    /// Edge to the parent, `usize::MAX` at roots.
    pub parent_edge: Vec<EdgeId>,
    /// Canonical zero-based component of every vertex.
    pub component: Vec<usize>,
    pub num_components: usize,
}

impl RootedForest {
    pub fn new(mst: &Mst, removed: &[bool]) -> Self {
        let n = mst.n();
        let mut order = Vec::with_capacity(n);
        let mut parent = vec![usize::MAX; n];
        let mut parent_edge = vec![usize::MAX; n];
        let mut component = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for root in 0..n {
            if component[root] != usize::MAX {
                continue;
            }
            component[root] = next;
            stack.push(root);
            while let Some(v) = stack.pop() {
                order.push(v);
                for &(w, e) in mst.neighbours(v) {
                    if !removed[e] && component[w] == usize::MAX {
                        component[w] = next;
                        parent[w] = v;
                        parent_edge[w] = e;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        RootedForest {
            order,
            parent,
            parent_edge,
            component,
            num_components: next,
        }
    }

    /// Child endpoint of a kept edge.
    pub fn child_of(&self, mst: &Mst, e: EdgeId) -> usize {
        let edge = mst.edge(e);
        if self.parent_edge[edge.v] == e {
            edge.v
        } else {
            debug_assert_eq!(self.parent_edge[edge.u], e);
            edge.u
        }
    }
}

/// Builds the Euclidean MST with Prim's algorithm in `O(n²)` time and
/// `O(n)` memory; distances are computed on the fly.
///
/// Equal weights are resolved by the `(weight, u, v)` key, which makes
/// the tree unique for every input.
pub fn build_mst(ds: &Dataset) -> Mst {
    let n = ds.n();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n > 1 {
        let mut in_tree = vec![false; n];
        // best known connection of each outside vertex: (weight, tree endpoint)
        let mut best: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); n];
        let key = |w: f64, p: usize, v: usize| (w, p.min(v), p.max(v));
        let mut cur = 0;
        in_tree[0] = true;
        for _ in 1..n {
            let mut next = usize::MAX;
            for v in 0..n {
                if in_tree[v] {
                    continue;
                }
                let w = ds.distance(cur, v);
                let (bw, bp) = best[v];
                if bp == usize::MAX || cmp_key(key(w, cur, v), key(bw, bp, v)) == Ordering::Less {
                    best[v] = (w, cur);
                }
                if next == usize::MAX {
                    next = v;
                } else {
                    let (nw, np) = best[next];
                    let (vw, vp) = best[v];
                    if cmp_key(key(vw, vp, v), key(nw, np, next)) == Ordering::Less {
                        next = v;
                    }
                }
            }
            let (w, p) = best[next];
            in_tree[next] = true;
            edges.push(Edge {
                u: p.min(next),
                v: p.max(next),
                weight: w,
            });
            cur = next;
        }
    }
    Mst::from_edges(n, edges).expect("Prim's algorithm yields a spanning tree")
}

/// Builds the MST of a copy of `ds` perturbed by uniform noise in
/// `[-scale, scale]` on every coordinate. Useful for probing how sensitive
/// a result is to tie-breaking.
pub fn build_mst_jittered(ds: &Dataset, seed: u64, scale: f64) -> Result<Mst> {
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::domain(format!("jitter scale must be >= 0, got {scale}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = ds
        .points()
        .iter()
        .map(|&x| if scale > 0.0 { x + rng.gen_range(-scale..=scale) } else { x })
        .collect();
    let jittered = Dataset::new(points, ds.n(), ds.d())?;
    Ok(build_mst(&jittered))
}

/// Partition obtained by deleting the given edges from the tree.
pub fn components_after_removal(mst: &Mst, removed: &[EdgeId]) -> Result<Partition> {
    let mut mask = vec![false; mst.num_edges()];
    for &id in removed {
        if id >= mst.num_edges() {
            return Err(Error::domain(format!(
                "edge id {id} is not in a tree with {} edges",
                mst.num_edges()
            )));
        }
        mask[id] = true;
    }
    Ok(mst.components(|id| !mask[id]))
}

pub fn vertex_degrees(mst: &Mst) -> Vec<usize> {
    (0..mst.n()).map(|v| mst.neighbours(v).len()).collect()
}

/// Sum of edge weights along the unique tree path from `a` to `b`.
pub fn tree_path_length(mst: &Mst, a: usize, b: usize) -> f64 {
    assert!(a < mst.n() && b < mst.n(), "vertex index out of bounds");
    if a == b {
        return 0.0;
    }
    let mut dist = vec![f64::NAN; mst.n()];
    dist[a] = 0.0;
    let mut stack = vec![a];
    while let Some(v) = stack.pop() {
        for &(w, e) in mst.neighbours(v) {
            if dist[w].is_nan() {
                dist[w] = dist[v] + mst.edge(e).weight;
                if w == b {
                    return dist[w];
                }
                stack.push(w);
            }
        }
    }
    unreachable!("a spanning tree is connected")
}

/// Writes `u v weight` lines in stored order; weights carry 17 significant
/// digits so they parse back bit for bit.
pub fn write_mst(mst: &Mst, mut out: impl Write) -> std::io::Result<()> {
    for e in mst.edges() {
        writeln!(out, "{} {} {:.16e}", e.u, e.v, e.weight)?;
    }
    Ok(())
}
