//! Bookkeeping shared by the greedy edge-selection schemes.

use crate::mst::EdgeId;
use crate::partition::Partition;

/// How candidate moves are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluation {
    /// Rebuild the candidate partition and evaluate the objective from
    /// scratch for every candidate edge.
    Naive,
    /// Use per-cluster deltas where the objective supports them (WCSS and
    /// the information criterion); other objectives fall back to `Naive`.
    #[default]
    Incremental,
}

/// One greedy step: the edge acted on and the objective value it produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyStep {
    pub edge: EdgeId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyRun {
    pub partition: Partition,
    pub steps: Vec<GreedyStep>,
}

/// Which end of the key order wins among equally good candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TiePreference {
    /// Divisive moves: the heaviest edge (largest key) goes first.
    LargerKey,
    /// Agglomerative moves: the lightest edge (smallest key) goes first.
    SmallerKey,
}

/// Best `(edge, value)` pair; NaN counts as `−∞`. Edge ids follow the key
/// order, so ties resolve by id.
pub(crate) fn select(candidates: &[(EdgeId, f64)], tie: TiePreference) -> Option<GreedyStep> {
    let mut best: Option<GreedyStep> = None;
    for &(edge, value) in candidates {
        let value = if value.is_nan() { f64::NEG_INFINITY } else { value };
        let better = match best {
            None => true,
            Some(b) => {
                value > b.value
                    || (value == b.value
                        && match tie {
                            TiePreference::LargerKey => edge > b.edge,
                            TiePreference::SmallerKey => edge < b.edge,
                        })
            }
        };
        if better {
            best = Some(GreedyStep { edge, value });
        }
    }
    best
}
