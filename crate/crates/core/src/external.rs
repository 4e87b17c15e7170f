//! Agreement between a computed partition and reference labelings.
//!
//! Points labelled [`NOISE`] in a reference are dropped before anything is
//! counted.

use crate::error::{Error, Result};
use crate::partition::{Partition, NOISE};

/// Contingency table: `counts[i][j]` is the number of points of reference
/// cluster `i` placed in predicted cluster `j`, over non-noise points only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    n: u64,
}

impl ConfusionMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.cols + j]
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    /// Number of points that entered the table.
    pub fn effective_n(&self) -> u64 {
        self.n
    }

    /// Dense rows, convenient for assertions.
    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.cols.max(1)).take(self.rows).map(<[u64]>::to_vec).collect()
    }

    /// Pair sums `(Σ C(c_ij, 2), Σ C(c_i·, 2), Σ C(c_·j, 2))`.
    pub fn pair_sums(&self) -> PairSums {
        PairSums {
            n: self.n,
            joint: self.counts.iter().map(|&c| choose2(c)).sum(),
            rows: self.row_sums.iter().map(|&c| choose2(c)).sum(),
            cols: self.col_sums.iter().map(|&c| choose2(c)).sum(),
        }
    }
}

#[inline]
pub(crate) fn choose2(c: u64) -> u128 {
    let c = c as u128;
    c * c.saturating_sub(1) / 2
}

/// Pair counts from which the adjusted Rand index follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSums {
    pub n: u64,
    pub joint: u128,
    pub rows: u128,
    pub cols: u128,
}

/// Why an adjusted Rand value was fixed by convention rather than computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArWarning {
    /// Fewer than two non-noise points.
    TooFewPoints,
    /// Zero denominator: both sides all singletons, or both one cluster.
    DegenerateDenominator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustedRand {
    pub value: f64,
    pub warning: Option<ArWarning>,
}

impl PairSums {
    /// Adjusted Rand index with all pair counts in exact integer arithmetic
    /// and a single final division.
    pub fn adjusted_rand(&self) -> AdjustedRand {
        if self.n < 2 {
            return AdjustedRand {
                value: 0.0,
                warning: Some(ArWarning::TooFewPoints),
            };
        }
        let total = choose2(self.n) as i128;
        let (s, a, b) = (self.joint as i128, self.rows as i128, self.cols as i128);
        // both sides doubled to keep the ½ in the expected index integral
        let num = 2 * (total * s - a * b);
        let den = total * (a + b) - 2 * a * b;
        if den == 0 {
            // only happens when both partitions are all singletons or both a
            // single cluster, i.e. when they coincide
            return AdjustedRand {
                value: 1.0,
                warning: Some(ArWarning::DegenerateDenominator),
            };
        }
        AdjustedRand {
            value: num as f64 / den as f64,
            warning: None,
        }
    }
}

/// Builds the contingency table of `reference` (rows) against `predicted`.
pub fn confusion_matrix(reference: &Partition, predicted: &Partition) -> Result<ConfusionMatrix> {
    if reference.n() != predicted.n() {
        return Err(Error::domain(format!(
            "label vectors differ in length: {} vs {}",
            reference.n(),
            predicted.n()
        )));
    }
    if predicted.has_noise() {
        return Err(Error::domain("predicted partition must not contain noise labels"));
    }
    let rows = reference.num_clusters();
    let cols = predicted.num_clusters();
    let mut counts = vec![0u64; rows * cols];
    let mut row_sums = vec![0u64; rows];
    let mut col_sums = vec![0u64; cols];
    let mut n = 0;
    for (&r, &p) in reference.labels().iter().zip(predicted.labels()) {
        if r == NOISE {
            continue;
        }
        counts[(r - 1) * cols + (p - 1)] += 1;
        row_sums[r - 1] += 1;
        col_sums[p - 1] += 1;
        n += 1;
    }
    Ok(ConfusionMatrix {
        rows,
        cols,
        counts,
        row_sums,
        col_sums,
        n,
    })
}

/// Adjusted Rand index together with any degenerate-case warning.
pub fn adjusted_rand_detailed(reference: &Partition, predicted: &Partition) -> Result<AdjustedRand> {
    let ar = confusion_matrix(reference, predicted)?.pair_sums().adjusted_rand();
    if let Some(w) = ar.warning {
        log::warn!("adjusted Rand index set to {} by convention ({w:?})", ar.value);
    }
    Ok(ar)
}

/// Adjusted Rand index of `predicted` with respect to `reference`,
/// ignoring the reference's noise points.
pub fn adjusted_rand(reference: &Partition, predicted: &Partition) -> Result<f64> {
    Ok(adjusted_rand_detailed(reference, predicted)?.value)
}

/// Best adjusted Rand index over several reference labelings.
pub fn best_ar_over_references(references: &[Partition], predicted: &Partition) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::config("at least one reference labeling is required"));
    }
    references
        .iter()
        .map(|r| adjusted_rand(r, predicted))
        .try_fold(f64::NEG_INFINITY, |best, ar| Ok(best.max(ar?)))
}
