use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// The `M` nearest other points of every point, closest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighbourTable {
    n: usize,
    m: usize,
    width: usize,
    indices: Vec<usize>,
    distances: Vec<f64>,
}

impl NeighbourTable {
    /// Requested neighbour count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Actual row length, `min(M, n - 1)`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.indices[i * self.width..(i + 1) * self.width]
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.width..(i + 1) * self.width]
    }
}

/// Exact brute-force `M`-nearest-neighbour table; equal distances are
/// ordered by point index.
pub fn knn_table(ds: &Dataset, m: usize) -> Result<NeighbourTable> {
    if m == 0 {
        return Err(Error::domain("neighbour count must be positive"));
    }
    let n = ds.n();
    let width = m.min(n - 1);
    if width == 0 {
        return Ok(NeighbourTable {
            n,
            m,
            width,
            indices: Vec::new(),
            distances: Vec::new(),
        });
    }
    let rows: Vec<Vec<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (ds.distance(i, j), j))
                .collect();
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if width < cand.len() {
                cand.select_nth_unstable_by(width - 1, cmp);
                cand.truncate(width);
            }
            cand.sort_by(cmp);
            cand
        })
        .collect();
    let mut indices = Vec::with_capacity(n * width);
    let mut distances = Vec::with_capacity(n * width);
    for row in rows {
        for (d, j) in row {
            indices.push(j);
            distances.push(d);
        }
    }
    Ok(NeighbourTable {
        n,
        m,
        width,
        indices,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tests_support::random_dataset;

    #[test]
    fn one_dimensional() {
        let ds = Dataset::from_1d(&[0.0, 1.0, 10.0]).unwrap();
        let t = knn_table(&ds, 1).unwrap();
        let firsts: Vec<_> = (0..3).map(|i| t.neighbours(i)[0]).collect();
        assert_eq!(firsts, vec![1, 0, 1]);
    }

    #[test]
    fn saturates_at_n_minus_one() {
        let ds = Dataset::from_1d(&[0.0, 1.0, 10.0]).unwrap();
        let t = knn_table(&ds, 5).unwrap();
        assert_eq!(t.width(), 2);
        assert_eq!(t.neighbours(2), &[1, 0]);
        assert_eq!(t.n(), 3);
    }

    #[test]
    fn duplicates_are_mutual_first_neighbours() {
        let ds = Dataset::from_rows(&[[0.0, 0.0], [5.0, 5.0], [1.0, 1.0], [5.0, 5.0]]).unwrap();
        let t = knn_table(&ds, 2).unwrap();
        assert_eq!((t.neighbours(1)[0], t.distances(1)[0]), (3, 0.0));
        assert_eq!((t.neighbours(3)[0], t.distances(3)[0]), (1, 0.0));
    }

    #[test]
    fn matches_full_sort() {
        for seed in 0..10 {
            let ds = random_dataset(seed, 25, 2);
            let t = knn_table(&ds, 6).unwrap();
            for i in 0..ds.n() {
                let mut all: Vec<_> = (0..ds.n()).filter(|&j| j != i).collect();
                all.sort_by(|&a, &b| ds.distance(i, a).total_cmp(&ds.distance(i, b)).then(a.cmp(&b)));
                assert_eq!(t.neighbours(i), &all[..6]);
                assert!(t.distances(i).windows(2).all(|w| w[0] <= w[1]));
                assert!(!t.neighbours(i).contains(&i));
            }
        }
    }

    #[test]
    fn single_point_and_zero_m() {
        let ds = Dataset::from_1d(&[3.0]).unwrap();
        let t = knn_table(&ds, 3).unwrap();
        assert_eq!((t.width(), t.n()), (0, 1));
        assert!(knn_table(&ds, 0).is_err());
    }
}
