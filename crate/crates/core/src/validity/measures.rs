//! Internal cluster validity measures in their natural orientation.
//!
//! The wrappers in the parent module flip the sign of the measures that
//! are minimised, so that every objective is "larger is better".

use crate::dataset::{squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::knn::NeighbourTable;
use crate::mst::Mst;
use crate::partition::Partition;

use super::{Aggregation, Diameter, Separation};

/// Zero-based cluster of every point; noise is not allowed here.
pub(crate) fn assignment(p: &Partition) -> Result<Vec<usize>> {
    p.zero_based()
        .map(|c| c.ok_or_else(|| Error::domain("validity measures need noise-free partitions")))
        .collect()
}

fn check_len(ds: &Dataset, p: &Partition) -> Result<()> {
    if ds.n() != p.n() {
        return Err(Error::domain(format!(
            "partition has {} labels for {} points",
            p.n(),
            ds.n()
        )));
    }
    Ok(())
}

fn need_two(p: &Partition, what: &str) -> Result<()> {
    if p.num_clusters() < 2 {
        return Err(Error::domain(format!("{what} needs at least two clusters")));
    }
    Ok(())
}

/// Per-cluster summaries: size, within-cluster tree weight `L_i`, centroid
/// and scatter (sum of squared distances to the centroid).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub sizes: Vec<usize>,
    pub tree_weights: Vec<f64>,
    pub centroids: Vec<Vec<f64>>,
    pub scatter: Vec<f64>,
}

impl ClusterStats {
    /// `mst` may be omitted when the tree weights are not needed; they are
    /// then reported as zero.
    pub fn compute(ds: &Dataset, mst: Option<&Mst>, p: &Partition) -> Result<Self> {
        check_len(ds, p)?;
        let a = assignment(p)?;
        let l = p.num_clusters();
        let d = ds.d();
        let mut sizes = vec![0usize; l];
        let mut centroids = vec![vec![0.0; d]; l];
        for (i, &c) in a.iter().enumerate() {
            sizes[c] += 1;
            for (m, x) in centroids[c].iter_mut().zip(ds.point(i)) {
                *m += x;
            }
        }
        for (m, &s) in centroids.iter_mut().zip(&sizes) {
            for x in m.iter_mut() {
                *x /= s as f64;
            }
        }
        let mut scatter = vec![0.0; l];
        for (i, &c) in a.iter().enumerate() {
            scatter[c] += squared_distance(ds.point(i), &centroids[c]);
        }
        let mut tree_weights = vec![0.0; l];
        if let Some(t) = mst {
            if t.n() != ds.n() {
                return Err(Error::domain("tree and dataset sizes differ"));
            }
            for e in t.edges() {
                if a[e.u] == a[e.v] {
                    tree_weights[a[e.u]] += e.weight;
                }
            }
        }
        Ok(ClusterStats {
            sizes,
            tree_weights,
            centroids,
            scatter,
        })
    }

    pub fn num_clusters(&self) -> usize {
        self.sizes.len()
    }
}

/// Within-cluster sum of squared distances to the centroids.
pub fn wcss(ds: &Dataset, p: &Partition) -> Result<f64> {
    Ok(ClusterStats::compute(ds, None, p)?.scatter.iter().sum())
}

/// Contribution of one cluster to the information criterion.
///
/// Clusters whose tree weight is zero (singletons, or coincident points)
/// contribute nothing to the `log(L_i / n_i)` part.
#[inline]
pub(crate) fn ic_term(size: usize, tree_weight: f64, n: usize, d: usize) -> f64 {
    let frac = size as f64 / n as f64;
    let spread = if size >= 2 && tree_weight > 0.0 {
        -(d as f64) * frac * (tree_weight / size as f64).ln()
    } else {
        0.0
    };
    spread - frac * frac.ln()
}

/// Entropy-style information criterion over tree-induced clusters:
/// `−d Σ (n_i/n) log(L_i/n_i) − Σ (n_i/n) log(n_i/n)`.
///
/// Terms are summed in sorted order, so the value depends only on the
/// multiset of `(n_i, L_i)` pairs.
pub fn info_criterion(stats: &ClusterStats, n: usize, d: usize) -> f64 {
    let mut terms: Vec<f64> = stats
        .sizes
        .iter()
        .zip(&stats.tree_weights)
        .map(|(&s, &w)| ic_term(s, w, n, d))
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Per-point silhouette widths; singletons get 0.
pub fn silhouette_values(ds: &Dataset, p: &Partition) -> Result<Vec<f64>> {
    check_len(ds, p)?;
    need_two(p, "the silhouette")?;
    let a = assignment(p)?;
    let l = p.num_clusters();
    let sizes = p.sizes();
    let sizes = sizes.as_slice();
    let n = ds.n();
    let mut sums = vec![0.0; n * l];
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = ds.distance(i, j);
            sums[i * l + a[j]] += dij;
            sums[j * l + a[i]] += dij;
        }
    }
    Ok((0..n)
        .map(|i| {
            let own = a[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let within = sums[i * l + own] / (sizes[own] - 1) as f64;
            let nearest = (0..l)
                .filter(|&c| c != own)
                .map(|c| sums[i * l + c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = within.max(nearest);
            if denom > 0.0 {
                (nearest - within) / denom
            } else {
                0.0
            }
        })
        .collect())
}

/// Mean silhouette width over all points.
pub fn silhouette_mean(ds: &Dataset, p: &Partition) -> Result<f64> {
    let s = silhouette_values(ds, p)?;
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

/// Unweighted mean of the per-cluster average silhouette widths.
pub fn silhouette_clusterwise(ds: &Dataset, p: &Partition) -> Result<f64> {
    let s = silhouette_values(ds, p)?;
    let l = p.num_clusters();
    let mut sum = vec![0.0; l];
    let mut cnt = vec![0usize; l];
    for (v, c) in s.iter().zip(assignment(p)?) {
        sum[c] += v;
        cnt[c] += 1;
    }
    Ok(sum.iter().zip(&cnt).map(|(s, &c)| s / c as f64).sum::<f64>() / l as f64)
}

/// Davies–Bouldin index (smaller is better). Coincident centroids make it
/// infinite.
pub fn davies_bouldin(ds: &Dataset, p: &Partition) -> Result<f64> {
    need_two(p, "Davies-Bouldin")?;
    let st = ClusterStats::compute(ds, None, p)?;
    let a = assignment(p)?;
    let l = st.num_clusters();
    let mut spread = vec![0.0; l];
    for (i, &c) in a.iter().enumerate() {
        spread[c] += squared_distance(ds.point(i), &st.centroids[c]).sqrt();
    }
    for (s, &n) in spread.iter_mut().zip(&st.sizes) {
        *s /= n as f64;
    }
    let mut total = 0.0;
    for i in 0..l {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..l {
            if i == j {
                continue;
            }
            let gap = squared_distance(&st.centroids[i], &st.centroids[j]).sqrt();
            if gap == 0.0 {
                return Ok(f64::INFINITY);
            }
            worst = worst.max((spread[i] + spread[j]) / gap);
        }
        total += worst;
    }
    Ok(total / l as f64)
}

/// Ball–Hall index: mean within-cluster scatter per point (smaller is better).
pub fn ball_hall(ds: &Dataset, p: &Partition) -> Result<f64> {
    let st = ClusterStats::compute(ds, None, p)?;
    let l = st.num_clusters();
    Ok(st
        .scatter
        .iter()
        .zip(&st.sizes)
        .map(|(s, &n)| s / n as f64)
        .sum::<f64>()
        / l as f64)
}

/// Caliński–Harabasz variance ratio; infinite when the within-cluster
/// scatter vanishes.
pub fn calinski_harabasz(ds: &Dataset, p: &Partition) -> Result<f64> {
    need_two(p, "Calinski-Harabasz")?;
    let st = ClusterStats::compute(ds, None, p)?;
    let n = ds.n();
    let l = st.num_clusters();
    let mut mean = vec![0.0; ds.d()];
    for i in 0..n {
        for (m, x) in mean.iter_mut().zip(ds.point(i)) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let between: f64 = st
        .centroids
        .iter()
        .zip(&st.sizes)
        .map(|(c, &s)| s as f64 * squared_distance(c, &mean))
        .sum();
    let within: f64 = st.scatter.iter().sum();
    if within == 0.0 {
        return Ok(if between > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY });
    }
    Ok((between / (l - 1) as f64) / (within / (n - l) as f64))
}

/// Generalised Dunn index `min δ(X_i, X_j) / max Δ(X_m)`.
///
/// Separations δ between clusters `S` and `T`:
/// 1. `min d(x, y)`, x ∈ S, y ∈ T
/// 2. `max d(x, y)`
/// 3. mean of `d(x, y)` over all `|S|·|T|` pairs
/// 4. `d(μ_S, μ_T)`
/// 5. `(Σ_{x∈S} d(x, μ_T) + Σ_{y∈T} d(y, μ_S)) / (|S| + |T|)`
///
/// Diameters Δ of a cluster `S`:
/// 1. `max d(x, y)`, x, y ∈ S
/// 2. mean of `d(x, y)` over the `|S|(|S|−1)/2` unordered pairs (0 for singletons)
/// 3. `2 · mean d(x, μ_S)`
///
/// A vanishing denominator yields `+∞` when the numerator is positive and
/// `−∞` otherwise.
pub fn generalized_dunn(
    ds: &Dataset,
    p: &Partition,
    between: Separation,
    within: Diameter,
) -> Result<f64> {
    need_two(p, "the generalised Dunn index")?;
    let st = ClusterStats::compute(ds, None, p)?;
    let a = assignment(p)?;
    let l = st.num_clusters();
    let n = ds.n();
    let members = p.members();

    let needs_pairs = matches!(
        between,
        Separation::MinDistance | Separation::MaxDistance | Separation::MeanDistance
    ) || matches!(within, Diameter::Max | Diameter::MeanPairwise);
    // pairwise aggregates: [c1 * l + c2] for c1 <= c2
    let mut pmin = vec![f64::INFINITY; l * l];
    let mut pmax = vec![0.0f64; l * l];
    let mut psum = vec![0.0f64; l * l];
    if needs_pairs {
        for i in 0..n {
            for j in (i + 1)..n {
                let (c1, c2) = (a[i].min(a[j]), a[i].max(a[j]));
                let dij = ds.distance(i, j);
                let k = c1 * l + c2;
                pmin[k] = pmin[k].min(dij);
                pmax[k] = pmax[k].max(dij);
                psum[k] += dij;
            }
        }
    }
    let to_centroid = |x: usize, c: usize| squared_distance(ds.point(x), &st.centroids[c]).sqrt();

    let mut num = f64::INFINITY;
    for i in 0..l {
        for j in (i + 1)..l {
            let k = i * l + j;
            let (ni, nj) = (st.sizes[i] as f64, st.sizes[j] as f64);
            let delta = match between {
                Separation::MinDistance => pmin[k],
                Separation::MaxDistance => pmax[k],
                Separation::MeanDistance => psum[k] / (ni * nj),
                Separation::CentroidDistance => {
                    squared_distance(&st.centroids[i], &st.centroids[j]).sqrt()
                }
                Separation::MeanToOtherCentroid => {
                    let s: f64 = members[i].iter().map(|&x| to_centroid(x, j)).sum::<f64>()
                        + members[j].iter().map(|&y| to_centroid(y, i)).sum::<f64>();
                    s / (ni + nj)
                }
            };
            num = num.min(delta);
        }
    }

    let mut den = 0.0f64;
    for c in 0..l {
        let nc = st.sizes[c];
        let diam = match within {
            Diameter::Max => {
                if nc > 1 {
                    pmax[c * l + c]
                } else {
                    0.0
                }
            }
            Diameter::MeanPairwise => {
                if nc > 1 {
                    psum[c * l + c] / (nc * (nc - 1) / 2) as f64
                } else {
                    0.0
                }
            }
            Diameter::TwiceMeanToCentroid => {
                2.0 * members[c].iter().map(|&x| to_centroid(x, c)).sum::<f64>() / nc as f64
            }
        };
        den = den.max(diam);
    }
    Ok(ratio(num, den))
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

fn check_table(nt: &NeighbourTable, m: usize, n: usize) -> Result<usize> {
    if nt.n() != n {
        return Err(Error::config("neighbour table built for a different dataset"));
    }
    let width = m.min(n - 1);
    if nt.width() < width {
        return Err(Error::config(format!(
            "neighbour table has {} columns, measure needs {width}",
            nt.width()
        )));
    }
    Ok(width)
}

/// Near-neighbour Dunn-type index: the `numerator` aggregate of distances
/// from each point to those of its `M` nearest neighbours lying in other
/// clusters, over the `denominator` aggregate of distances to neighbours in
/// the same cluster. Either pair set being empty yields `−∞`.
pub fn dunn_nn(
    p: &Partition,
    nt: &NeighbourTable,
    m: usize,
    numerator: Aggregation,
    denominator: Aggregation,
) -> Result<f64> {
    let a = assignment(p)?;
    let width = check_table(nt, m, p.n())?;
    let mut cross = Aggregator::new(numerator);
    let mut same = Aggregator::new(denominator);
    for (i, &ci) in a.iter().enumerate() {
        for (&j, &dij) in nt.neighbours(i).iter().zip(nt.distances(i)).take(width) {
            if a[j] == ci {
                same.push(dij);
            } else {
                cross.push(dij);
            }
        }
    }
    match (cross.value(), same.value()) {
        (Some(num), Some(den)) => Ok(ratio(num, den)),
        _ => Ok(f64::NEG_INFINITY),
    }
}

/// Fraction of `M`-nearest-neighbour relations that stay within a cluster.
pub fn wcnn(p: &Partition, nt: &NeighbourTable, m: usize) -> Result<f64> {
    let a = assignment(p)?;
    let width = check_table(nt, m, p.n())?;
    if width == 0 {
        return Ok(1.0);
    }
    let same: usize = a
        .iter()
        .enumerate()
        .map(|(i, &ci)| nt.neighbours(i)[..width].iter().filter(|&&j| a[j] == ci).count())
        .sum();
    Ok(same as f64 / (a.len() * width) as f64)
}

struct Aggregator {
    how: Aggregation,
    acc: f64,
    count: usize,
}

impl Aggregator {
    fn new(how: Aggregation) -> Self {
        let acc = match how {
            Aggregation::Min => f64::INFINITY,
            Aggregation::Max => f64::NEG_INFINITY,
            Aggregation::Mean => 0.0,
        };
        Aggregator { how, acc, count: 0 }
    }

    fn push(&mut self, x: f64) {
        self.count += 1;
        match self.how {
            Aggregation::Min => self.acc = self.acc.min(x),
            Aggregation::Max => self.acc = self.acc.max(x),
            Aggregation::Mean => self.acc += x,
        }
    }

    fn value(&self) -> Option<f64> {
        if self.count == 0 {
            return None;
        }
        Some(match self.how {
            Aggregation::Mean => self.acc / self.count as f64,
            _ => self.acc,
        })
    }
}

/// Total weight of the tree edges joining different clusters.
pub fn cut_weight(mst: &Mst, p: &Partition) -> Result<f64> {
    let a = assignment(p)?;
    if a.len() != mst.n() {
        return Err(Error::domain("tree and partition sizes differ"));
    }
    Ok(mst
        .edges()
        .iter()
        .filter(|e| a[e.u] != a[e.v])
        .map(|e| e.weight)
        .sum())
}
