use std::collections::BTreeMap;

use crate::error::Result;
use crate::partition::ClusterSizes;

/// Normalised Gini index of a size vector:
/// `Σ_{i=1..l} (l − 2i + 1)·c_(i) / ((l − 1)·Σ c_i)`, with `c_(i)` sorted
/// decreasingly. It is 0 for equal sizes and approaches 1 as one cluster
/// takes all the mass; a single cluster has index 0.
pub fn gini_index(sizes: &ClusterSizes) -> f64 {
    let mut c: Vec<usize> = sizes.as_slice().to_vec();
    let l = c.len();
    if l <= 1 {
        return 0.0;
    }
    c.sort_unstable_by(|a, b| b.cmp(a));
    let num: i128 = c
        .iter()
        .enumerate()
        .map(|(i, &ci)| (l as i128 - 2 * (i as i128 + 1) + 1) * ci as i128)
        .sum();
    let den = (l as i128 - 1) * sizes.total() as i128;
    num as f64 / den as f64
}

/// Convenience wrapper validating raw sizes first.
pub fn gini_of(sizes: &[usize]) -> Result<f64> {
    Ok(gini_index(&ClusterSizes::new(sizes.to_vec())?))
}

/// Size multiset with an incrementally maintained Gini index.
///
/// The numerator is kept as the exact integer `Σ_{i<j} |c_i − c_j|`, which
/// equals the sorted-weights form used by [`gini_index`], so both agree
/// bit for bit. Each update costs `O(number of distinct sizes)`.
#[derive(Debug, Clone)]
pub struct SizeTracker {
    counts: BTreeMap<usize, usize>,
    clusters: usize,
    total: usize,
    abs_diff_sum: i128,
}

impl SizeTracker {
    /// `n` singletons.
    pub fn singletons(n: usize) -> Self {
        let mut counts = BTreeMap::new();
        if n > 0 {
            counts.insert(1, n);
        }
        SizeTracker {
            counts,
            clusters: n,
            total: n,
            abs_diff_sum: 0,
        }
    }

    pub fn from_sizes(sizes: &[usize]) -> Self {
        let mut t = SizeTracker {
            counts: BTreeMap::new(),
            clusters: 0,
            total: 0,
            abs_diff_sum: 0,
        };
        for &s in sizes {
            t.insert(s);
        }
        t
    }

    fn spread(&self, s: usize) -> i128 {
        self.counts
            .iter()
            .map(|(&t, &c)| c as i128 * (s as i128 - t as i128).abs())
            .sum()
    }

    fn insert(&mut self, s: usize) {
        self.abs_diff_sum += self.spread(s);
        *self.counts.entry(s).or_insert(0) += 1;
        self.clusters += 1;
        self.total += s;
    }

    fn remove(&mut self, s: usize) {
        let c = self.counts.get_mut(&s).expect("size present in tracker");
        *c -= 1;
        if *c == 0 {
            self.counts.remove(&s);
        }
        self.clusters -= 1;
        self.total -= s;
        self.abs_diff_sum -= self.spread(s);
    }

    /// Records the merge of two clusters of sizes `a` and `b`.
    pub fn merge(&mut self, a: usize, b: usize) {
        self.remove(a);
        self.remove(b);
        self.insert(a + b);
    }

    pub fn gini(&self) -> f64 {
        if self.clusters <= 1 {
            return 0.0;
        }
        self.abs_diff_sum as f64 / ((self.clusters as i128 - 1) * self.total as i128) as f64
    }

    pub fn min_size(&self) -> usize {
        self.counts.keys().next().copied().unwrap_or(0)
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters
    }
}
