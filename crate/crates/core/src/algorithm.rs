//! Named algorithms, as used on the command line and in benchmark configs.

use std::fmt;
use std::str::FromStr;

use crate::agglomerative::{agglomerative_maximize, genie, genie_plus_ic, GenieParams, GeniePlusIcParams};
use crate::dataset::Dataset;
use crate::divisive::{divisive_maximize, single_linkage_cut};
use crate::error::{Error, Result};
use crate::extras::{ctcehc, hemst};
use crate::knn::{knn_table, NeighbourTable};
use crate::mst::Mst;
use crate::partition::Partition;
use crate::validity::{EvalContext, Objective};

#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    /// `single`
    Single,
    /// `Genie_G<g>`
    Genie { gini_threshold: f64 },
    /// `IcA`
    Ica,
    /// `Genie+Ic(k+<extra>)`
    GeniePlusIc { extra: usize },
    /// `ITM` for the information criterion, `MST/D_<measure>` otherwise.
    Divisive(Objective),
    /// `HEMST`
    Hemst,
    /// `CTCEHC`
    Ctcehc,
}

impl Algorithm {
    /// The methods compared in the default benchmark grid.
    pub fn standard_set() -> Vec<Algorithm> {
        let mut out = vec![Algorithm::Single];
        for g in [0.1, 0.3, 0.5, 0.7] {
            out.push(Algorithm::Genie { gini_threshold: g });
        }
        out.push(Algorithm::Ica);
        for extra in [0, 5, 10] {
            out.push(Algorithm::GeniePlusIc { extra });
        }
        out.extend(Objective::catalogue().into_iter().map(Algorithm::Divisive));
        out.push(Algorithm::Hemst);
        out.push(Algorithm::Ctcehc);
        out
    }

    /// Neighbourhood size this algorithm needs precomputed, if any.
    pub fn neighbours_needed(&self) -> Option<usize> {
        match self {
            Algorithm::Divisive(o) => o.neighbours_needed(),
            _ => None,
        }
    }

    /// Runs the algorithm on `ds` (whose MST is `mst`) for `k` clusters.
    /// A missing neighbour table is computed on demand.
    pub fn run(
        &self,
        ds: &Dataset,
        mst: &Mst,
        k: usize,
        neighbours: Option<&NeighbourTable>,
    ) -> Result<Partition> {
        match self {
            Algorithm::Single => single_linkage_cut(mst, k),
            Algorithm::Genie { gini_threshold } => genie(mst, &GenieParams::new(*gini_threshold, k)?),
            Algorithm::Ica => {
                let ctx = EvalContext::new(ds).with_mst(mst);
                agglomerative_maximize(mst, &ctx, &Objective::InfoCriterion, k)
            }
            Algorithm::GeniePlusIc { extra } => {
                // small inputs: start from singletons rather than fail
                let extra = (*extra).min(ds.n().saturating_sub(k));
                let params = GeniePlusIcParams::with_default_thresholds(k, extra, ds.d());
                genie_plus_ic(mst, &params)
            }
            Algorithm::Divisive(o) => {
                let owned;
                let nt = match (o.neighbours_needed(), neighbours) {
                    (Some(m), Some(nt)) if nt.m() >= m => Some(nt),
                    (Some(m), _) => {
                        owned = knn_table(ds, m)?;
                        Some(&owned)
                    }
                    (None, _) => None,
                };
                divisive_maximize(mst, ds, o, k, nt)
            }
            Algorithm::Hemst => hemst(mst, k),
            Algorithm::Ctcehc => ctcehc(mst, ds, k),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Single => f.write_str("single"),
            Algorithm::Genie { gini_threshold } => write!(f, "Genie_G{gini_threshold}"),
            Algorithm::Ica => f.write_str("IcA"),
            Algorithm::GeniePlusIc { extra } => write!(f, "Genie+Ic(k+{extra})"),
            Algorithm::Divisive(Objective::InfoCriterion) => f.write_str("ITM"),
            Algorithm::Divisive(o) => write!(f, "MST/D_{o}"),
            Algorithm::Hemst => f.write_str("HEMST"),
            Algorithm::Ctcehc => f.write_str("CTCEHC"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::config(format!("unknown algorithm {s:?}"));
        match s {
            "single" | "Single" => return Ok(Algorithm::Single),
            "IcA" | "ICA" => return Ok(Algorithm::Ica),
            "ITM" => return Ok(Algorithm::Divisive(Objective::InfoCriterion)),
            "HEMST" => return Ok(Algorithm::Hemst),
            "CTCEHC" => return Ok(Algorithm::Ctcehc),
            _ => {}
        }
        if let Some(g) = s.strip_prefix("Genie_G") {
            let g: f64 = g.parse().map_err(|_| bad())?;
            GenieParams::new(g, 1)?;
            return Ok(Algorithm::Genie { gini_threshold: g });
        }
        if let Some(rest) = s.strip_prefix("Genie+Ic(k+") {
            let extra = rest.strip_suffix(')').ok_or_else(bad)?;
            return Ok(Algorithm::GeniePlusIc {
                extra: extra.parse().map_err(|_| bad())?,
            });
        }
        if let Some(m) = s.strip_prefix("MST/D_") {
            return Ok(Algorithm::Divisive(m.parse()?));
        }
        Err(bad())
    }
}
