//! Cluster label vectors.

use std::io::BufRead;
use std::path::Path;

use crate::dataset::open_text;
use crate::error::{Error, Result};

/// Label used by reference labelings for points that belong to no cluster.
pub const NOISE: usize = 0;

/// An assignment of `n` points to clusters `1..=l`.
///
/// Reference labelings may additionally mark points with [`NOISE`];
/// partitions produced by the algorithms in this crate never do, and are
/// always canonical: clusters are numbered in order of their smallest
/// member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    l: usize,
}

impl Partition {
    /// Validates a labeling whose clusters are `1..=max`, optionally with noise.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let l = labels.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; l + 1];
        for &x in &labels {
            seen[x] = true;
        }
        if let Some(gap) = (1..=l).find(|&c| !seen[c]) {
            return Err(Error::Validation(format!(
                "label {gap} is absent while the largest label is {l}"
            )));
        }
        Ok(Partition { labels, l })
    }

    /// Like [`Partition::new`] but rejects noise points.
    pub fn without_noise(labels: Vec<usize>) -> Result<Self> {
        if labels.contains(&NOISE) {
            return Err(Error::domain("partition must not contain noise labels"));
        }
        Partition::new(labels)
    }

    /// Renumbers arbitrary cluster identifiers as `1..=l` by first occurrence.
    pub fn canonical<T: Copy + Eq + std::hash::Hash>(ids: &[T]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = ids
            .iter()
            .map(|id| {
                let next = map.len() + 1;
                *map.entry(*id).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            l: map.len(),
        }
    }

    /// All points in one cluster.
    pub fn single(n: usize) -> Self {
        Partition {
            labels: vec![1; n],
            l: usize::from(n > 0),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            labels: (1..=n).collect(),
            l: n,
        }
    }

    #[inline]
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of clusters, `l`.
    #[inline]
    pub fn num_clusters(&self) -> usize {
        self.l
    }

    pub fn has_noise(&self) -> bool {
        self.labels.contains(&NOISE)
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&x| x == NOISE).count()
    }

    pub fn sizes(&self) -> ClusterSizes {
        let mut sizes = vec![0; self.l];
        for &x in &self.labels {
            if x != NOISE {
                sizes[x - 1] += 1;
            }
        }
        ClusterSizes(sizes)
    }

    /// Zero-based cluster index of every point; noise maps to `None`.
    pub fn zero_based(&self) -> impl Iterator<Item = Option<usize>> + '_ {
        self.labels.iter().map(|&x| x.checked_sub(1))
    }

    /// Members of each cluster, in increasing point order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.l];
        for (i, &x) in self.labels.iter().enumerate() {
            if x != NOISE {
                out[x - 1].push(i);
            }
        }
        out
    }

    /// True when both partitions group the points identically, ignoring
    /// the actual label values.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.n() == other.n()
            && Partition::canonical(&self.labels) == Partition::canonical(&other.labels)
    }
}

/// Sizes of the clusters of a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSizes(Vec<usize>);

impl ClusterSizes {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::domain("at least one cluster size is required"));
        }
        if sizes.contains(&0) {
            return Err(Error::domain("cluster sizes must be positive"));
        }
        Ok(ClusterSizes(sizes))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Reads a label vector, one non-negative integer per line (0 = noise).
pub fn load_labels(path: impl AsRef<Path>) -> Result<Partition> {
    let path = path.as_ref();
    parse_labels(open_text(path)?, path)
}

pub(crate) fn parse_labels(reader: impl BufRead, path: &Path) -> Result<Partition> {
    let mut labels = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        let value: i64 = token.parse().map_err(|_| Error::Parse {
            path: path.to_owned(),
            line: lineno + 1,
            token: token.to_owned(),
        })?;
        if value < 0 {
            return Err(Error::domain(format!(
                "{}:{}: negative label {value}",
                path.display(),
                lineno + 1
            )));
        }
        labels.push(value as usize);
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput {
            path: path.to_owned(),
        });
    }
    Partition::new(labels)
}

/// Writes one label per line.
pub fn write_labels(p: &Partition, mut out: impl std::io::Write) -> std::io::Result<()> {
    for x in p.labels() {
        writeln!(out, "{x}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<Partition> {
        parse_labels(Cursor::new(text), Path::new("mem"))
    }

    #[test]
    fn noise_is_preserved() {
        let p = parse("1\n1\n2\n0\n").unwrap();
        assert_eq!(p.labels(), &[1, 1, 2, 0]);
        assert_eq!(p.num_clusters(), 2);
        assert!(p.has_noise());
        assert_eq!(p.sizes().as_slice(), &[2, 1]);
    }

    #[test]
    fn gap_is_rejected() {
        assert!(matches!(parse("1\n3\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn negative_is_rejected() {
        assert!(matches!(parse("1\n-1\n"), Err(Error::Domain(_))));
    }

    #[test]
    fn single_cluster() {
        let p = parse("1\n1\n1\n").unwrap();
        assert_eq!(p.num_clusters(), 1);
    }

    #[test]
    fn canonical_relabeling() {
        let p = Partition::canonical(&[7, 7, 3, 9, 3]);
        assert_eq!(p.labels(), &[1, 1, 2, 3, 2]);
        assert!(p.same_grouping(&Partition::new(vec![2, 2, 1, 3, 1]).unwrap()));
        assert!(!p.same_grouping(&Partition::new(vec![1, 1, 1, 2, 2]).unwrap()));
    }

    #[test]
    fn without_noise_rejects_zero() {
        assert!(Partition::without_noise(vec![1, 0]).is_err());
    }

    #[test]
    fn cluster_sizes_validation() {
        assert!(ClusterSizes::new(vec![2, 0]).is_err());
        assert!(ClusterSizes::new(vec![]).is_err());
        assert_eq!(ClusterSizes::new(vec![2, 3]).unwrap().total(), 5);
    }
}
