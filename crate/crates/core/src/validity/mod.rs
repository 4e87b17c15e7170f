//! Cluster validity objectives, all oriented so that larger is better.
//!
//! Sentinels: `−∞` marks a partition the measure cannot score (it is never
//! preferred over a finite value), `+∞` marks a degenerate best case such
//! as a Dunn index with all-zero diameters.

mod gini;
mod measures;

use std::fmt;
use std::str::FromStr;

pub use gini::{gini_index, gini_of, SizeTracker};
pub(crate) use measures::ic_term;
pub use measures::{
    ball_hall, calinski_harabasz, cut_weight, davies_bouldin, dunn_nn, generalized_dunn,
    info_criterion, silhouette_clusterwise, silhouette_mean, silhouette_values, wcnn, wcss,
    ClusterStats,
};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::NeighbourTable;
use crate::mst::Mst;
use crate::partition::Partition;

/// Between-cluster separation used by the generalised Dunn index (`d1`..`d5`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Separation {
    MinDistance,
    MaxDistance,
    MeanDistance,
    CentroidDistance,
    MeanToOtherCentroid,
}

/// Within-cluster spread used by the generalised Dunn index (`D1`..`D3`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Diameter {
    Max,
    MeanPairwise,
    TwiceMeanToCentroid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregation {
    Min,
    Mean,
    Max,
}

impl Separation {
    pub const ALL: [Separation; 5] = [
        Separation::MinDistance,
        Separation::MaxDistance,
        Separation::MeanDistance,
        Separation::CentroidDistance,
        Separation::MeanToOtherCentroid,
    ];

    fn index(self) -> usize {
        Separation::ALL.iter().position(|&s| s == self).unwrap() + 1
    }
}

impl Diameter {
    pub const ALL: [Diameter; 3] = [Diameter::Max, Diameter::MeanPairwise, Diameter::TwiceMeanToCentroid];

    fn index(self) -> usize {
        Diameter::ALL.iter().position(|&s| s == self).unwrap() + 1
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Min => "Min",
            Aggregation::Mean => "Mean",
            Aggregation::Max => "Max",
        })
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Min" => Ok(Aggregation::Min),
            "Mean" => Ok(Aggregation::Mean),
            "Max" => Ok(Aggregation::Max),
            _ => Err(Error::config(format!("unknown aggregation {s:?}"))),
        }
    }
}

/// A cluster validity objective `F`, to be maximised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Negated within-cluster sum of squares.
    NegWcss,
    /// Information criterion over MST subtrees.
    InfoCriterion,
    /// Negated Ball–Hall index.
    BallHall,
    CalinskiHarabasz,
    /// Negated Davies–Bouldin index.
    DaviesBouldin,
    Silhouette,
    /// Mean of per-cluster mean silhouette widths.
    SilhouetteW,
    GDunn {
        between: Separation,
        within: Diameter,
    },
    DuNN {
        m: usize,
        numerator: Aggregation,
        denominator: Aggregation,
    },
    Wcnn {
        m: usize,
    },
    /// Total weight of MST edges between clusters; maximising it greedily
    /// reproduces single linkage.
    CutWeight,
}

impl Objective {
    pub fn needs_mst(&self) -> bool {
        matches!(self, Objective::InfoCriterion | Objective::CutWeight)
    }

    /// Neighbour count the objective needs a table for, if any.
    pub fn neighbours_needed(&self) -> Option<usize> {
        match *self {
            Objective::DuNN { m, .. } | Objective::Wcnn { m } => Some(m),
            _ => None,
        }
    }

    /// Every objective from the study's list, with the default `M = 25`.
    pub fn catalogue() -> Vec<Objective> {
        let mut out = vec![
            Objective::InfoCriterion,
            Objective::BallHall,
            Objective::CalinskiHarabasz,
            Objective::DaviesBouldin,
            Objective::Silhouette,
            Objective::SilhouetteW,
        ];
        for between in Separation::ALL {
            for within in Diameter::ALL {
                out.push(Objective::GDunn { between, within });
            }
        }
        for (numerator, denominator) in [
            (Aggregation::Min, Aggregation::Max),
            (Aggregation::Mean, Aggregation::Mean),
            (Aggregation::Max, Aggregation::Min),
        ] {
            out.push(Objective::DuNN {
                m: 25,
                numerator,
                denominator,
            });
        }
        out.push(Objective::Wcnn { m: 25 });
        out
    }

    /// Checks that `ctx` carries what this objective needs.
    pub fn check_context(&self, ctx: &EvalContext<'_>) -> Result<()> {
        if self.needs_mst() && ctx.mst.is_none() {
            return Err(Error::config(format!("{self} needs the spanning tree")));
        }
        if let Some(m) = self.neighbours_needed() {
            match ctx.neighbours {
                None => return Err(Error::config(format!("{self} needs a neighbour table"))),
                Some(nt) if nt.width() < m.min(ctx.dataset.n() - 1) => {
                    return Err(Error::config(format!(
                        "{self} needs {m} neighbours, table has {}",
                        nt.width()
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::NegWcss => f.write_str("WCSS"),
            Objective::InfoCriterion => f.write_str("IC"),
            Objective::BallHall => f.write_str("BallHall"),
            Objective::CalinskiHarabasz => f.write_str("CalinskiHarabasz"),
            Objective::DaviesBouldin => f.write_str("DaviesBouldin"),
            Objective::Silhouette => f.write_str("Silhouette"),
            Objective::SilhouetteW => f.write_str("SilhouetteW"),
            Objective::GDunn { between, within } => {
                write!(f, "GDunn_d{}_D{}", between.index(), within.index())
            }
            Objective::DuNN {
                m,
                numerator,
                denominator,
            } => write!(f, "DuNN_{m}_{numerator}_{denominator}"),
            Objective::Wcnn { m } => write!(f, "WCNN_{m}"),
            Objective::CutWeight => f.write_str("CutWeight"),
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("unknown objective {s:?}"));
        let simple = match s {
            "WCSS" | "NegWCSS" => Some(Objective::NegWcss),
            "IC" | "InfoCriterion" => Some(Objective::InfoCriterion),
            "BallHall" => Some(Objective::BallHall),
            "CalinskiHarabasz" => Some(Objective::CalinskiHarabasz),
            "DaviesBouldin" => Some(Objective::DaviesBouldin),
            "Silhouette" => Some(Objective::Silhouette),
            "SilhouetteW" => Some(Objective::SilhouetteW),
            "CutWeight" => Some(Objective::CutWeight),
            _ => None,
        };
        if let Some(o) = simple {
            return Ok(o);
        }
        let parts: Vec<&str> = s.split('_').collect();
        let positive = |t: &str| -> Result<usize> {
            t.parse::<usize>().ok().filter(|&m| m > 0).ok_or_else(bad)
        };
        match parts.as_slice() {
            ["GDunn", lo, hi] => {
                let between = lo
                    .strip_prefix('d')
                    .and_then(|x| x.parse::<usize>().ok())
                    .and_then(|i| i.checked_sub(1))
                    .and_then(|i| Separation::ALL.get(i).copied())
                    .ok_or_else(bad)?;
                let within = hi
                    .strip_prefix('D')
                    .and_then(|x| x.parse::<usize>().ok())
                    .and_then(|i| i.checked_sub(1))
                    .and_then(|i| Diameter::ALL.get(i).copied())
                    .ok_or_else(bad)?;
                Ok(Objective::GDunn { between, within })
            }
            ["DuNN", m, num, den] => Ok(Objective::DuNN {
                m: positive(m)?,
                numerator: num.parse()?,
                denominator: den.parse()?,
            }),
            ["WCNN", m] => Ok(Objective::Wcnn { m: positive(m)? }),
            _ => Err(bad()),
        }
    }
}

/// Everything an objective may need besides the partition itself.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext<'a> {
    pub dataset: &'a Dataset,
    pub mst: Option<&'a Mst>,
    pub neighbours: Option<&'a NeighbourTable>,
}

impl<'a> EvalContext<'a> {
    pub fn new(dataset: &'a Dataset) -> Self {
        EvalContext {
            dataset,
            mst: None,
            neighbours: None,
        }
    }

    pub fn with_mst(mut self, mst: &'a Mst) -> Self {
        self.mst = Some(mst);
        self
    }

    pub fn with_neighbours(mut self, nt: &'a NeighbourTable) -> Self {
        self.neighbours = Some(nt);
        self
    }
}

/// Value of `objective` on `p`, larger meaning better.
pub fn evaluate_objective(objective: &Objective, ctx: &EvalContext<'_>, p: &Partition) -> Result<f64> {
    objective.check_context(ctx)?;
    let ds = ctx.dataset;
    if p.n() != ds.n() {
        return Err(Error::domain(format!(
            "partition has {} labels for {} points",
            p.n(),
            ds.n()
        )));
    }
    match *objective {
        Objective::NegWcss => Ok(-wcss(ds, p)?),
        Objective::InfoCriterion => {
            let stats = ClusterStats::compute(ds, ctx.mst, p)?;
            Ok(info_criterion(&stats, ds.n(), ds.d()))
        }
        Objective::BallHall => Ok(-ball_hall(ds, p)?),
        Objective::CalinskiHarabasz => calinski_harabasz(ds, p),
        Objective::DaviesBouldin => Ok(-davies_bouldin(ds, p)?),
        Objective::Silhouette => silhouette_mean(ds, p),
        Objective::SilhouetteW => silhouette_clusterwise(ds, p),
        Objective::GDunn { between, within } => generalized_dunn(ds, p, between, within),
        Objective::DuNN {
            m,
            numerator,
            denominator,
        } => dunn_nn(p, ctx.neighbours.unwrap(), m, numerator, denominator),
        Objective::Wcnn { m } => wcnn(p, ctx.neighbours.unwrap(), m),
        Objective::CutWeight => cut_weight(ctx.mst.unwrap(), p),
    }
}

/// Like [`evaluate_objective`] but maps partitions the measure is not
/// defined on (e.g. a single cluster for the silhouette) to `−∞`.
pub(crate) fn score_candidate(objective: &Objective, ctx: &EvalContext<'_>, p: &Partition) -> Result<f64> {
    match evaluate_objective(objective, ctx, p) {
        Ok(v) if v.is_nan() => Ok(f64::NEG_INFINITY),
        Ok(v) => Ok(v),
        Err(Error::Domain(_)) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knn::knn_table;
    use crate::mst::{build_mst, components_after_removal};
    use crate::tests_support::random_dataset;

    #[test]
    fn names_round_trip() {
        for o in Objective::catalogue().into_iter().chain([Objective::NegWcss, Objective::CutWeight]) {
            let name = o.to_string();
            assert_eq!(name.parse::<Objective>().unwrap(), o, "{name}");
        }
        assert_eq!(
            "GDunn_d2_D3".parse::<Objective>().unwrap(),
            Objective::GDunn {
                between: Separation::MaxDistance,
                within: Diameter::TwiceMeanToCentroid
            }
        );
        assert_eq!(Objective::catalogue().len(), 6 + 15 + 3 + 1);
        for bad in ["GDunn_d6_D1", "GDunn_d1_D4", "DuNN_0_Min_Max", "WCNN_x", "Foo"] {
            assert!(bad.parse::<Objective>().is_err(), "{bad}");
        }
    }

    #[test]
    fn dispatch_examples() {
        let ds = Dataset::from_1d(&[0.0, 1.0, 10.0, 11.0]).unwrap();
        let t = build_mst(&ds);
        let ctx = EvalContext::new(&ds).with_mst(&t);
        let single = Partition::singletons(4);
        assert_eq!(evaluate_objective(&Objective::NegWcss, &ctx, &single).unwrap(), 0.0);
        let p = Partition::new(vec![1, 1, 2, 2]).unwrap();
        let ic = evaluate_objective(&Objective::InfoCriterion, &ctx, &p).unwrap();
        assert!((ic - 1.3863).abs() < 1e-4);
        let gd: Objective = "GDunn_d1_D1".parse().unwrap();
        assert_eq!(evaluate_objective(&gd, &ctx, &p).unwrap(), 9.0);
    }

    #[test]
    fn missing_context_is_a_configuration_error() {
        let ds = Dataset::from_1d(&[0.0, 1.0, 10.0]).unwrap();
        let ctx = EvalContext::new(&ds);
        let p = Partition::new(vec![1, 1, 2]).unwrap();
        assert!(matches!(
            evaluate_objective(&Objective::InfoCriterion, &ctx, &p),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            evaluate_objective(&Objective::Wcnn { m: 2 }, &ctx, &p),
            Err(Error::Config(_))
        ));
        let nt = knn_table(&ds, 1).unwrap();
        let ctx = ctx.with_neighbours(&nt);
        assert!(matches!(
            evaluate_objective(&Objective::Wcnn { m: 2 }, &ctx, &p),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn evaluation_is_pure() {
        let ds = random_dataset(9, 40, 2);
        let t = build_mst(&ds);
        let nt = knn_table(&ds, 25).unwrap();
        let ctx = EvalContext::new(&ds).with_mst(&t).with_neighbours(&nt);
        let p = components_after_removal(&t, &[38, 37, 20]).unwrap();
        for o in Objective::catalogue() {
            let a = evaluate_objective(&o, &ctx, &p).unwrap();
            let b = evaluate_objective(&o, &ctx, &p).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "{o}");
        }
    }

    #[test]
    fn calinski_harabasz_ranks_like_wcss() {
        for seed in 0..10 {
            let ds = random_dataset(100 + seed, 30, 2);
            let t = build_mst(&ds);
            let ctx = EvalContext::new(&ds).with_mst(&t);
            let base = [t.num_edges() - 1];
            let argmax = |o: Objective| {
                let mut best = (f64::NEG_INFINITY, usize::MAX);
                for e in 0..t.num_edges() - 1 {
                    let p = components_after_removal(&t, &[base[0], e]).unwrap();
                    let v = evaluate_objective(&o, &ctx, &p).unwrap();
                    if v > best.0 {
                        best = (v, e);
                    }
                }
                best.1
            };
            assert_eq!(argmax(Objective::NegWcss), argmax(Objective::CalinskiHarabasz));
        }
    }
}
