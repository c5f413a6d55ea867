//! Benders decomposition driven by decision diagrams.
//!
//! A problem plugs in through two traits. [`MasterOracle`] compiles exact,
//! restricted and relaxed diagrams of the master problem below a partial
//! assignment; [`SubproblemOracle`] evaluates a full master assignment and
//! returns cuts. [`dd_bd_solve`] runs the branch-and-bound loop over them.

mod cost_tuple;
mod cutset;
mod engine;
pub mod mip;
mod naive;

pub use cost_tuple::cost_tuple_reward;
pub use cutset::{exact_cutset, prefixes_to_layer, ExactCutset, Prefix};
pub use engine::dd_bd_solve;
pub use naive::naive_bd_solve;

use crate::dd::{CutRow, DdError, DecisionDiagram, RefineMode};
use crate::lp::LpError;
use crate::Sense;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::time::Duration;
use thiserror::Error;

/// Tolerance for `z` matching the subproblem value.
pub const VALUE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum BendersError {
    #[error(transparent)]
    Dd(#[from] DdError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("no progress: {0}")]
    Stalled(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// A restricted diagram, together with whether no node was dropped.
#[derive(Debug, Clone)]
pub struct Restricted {
    pub dd: DecisionDiagram,
    pub exact: bool,
}

/// Compiles master diagrams. Every diagram has one point layer per master
/// variable followed by a continuous `z` layer with slope 1, so a path value
/// is the master objective plus `z`.
pub trait MasterOracle {
    fn sense(&self) -> Sense;
    fn num_vars(&self) -> usize;
    /// The values variable `var` may take, in increasing order.
    fn domain(&self, var: usize) -> Vec<f64>;
    fn build_exact_dd(&self, partial: &[f64]) -> Result<DecisionDiagram, BendersError>;
    fn build_restricted_dd(&self, partial: &[f64], width: usize) -> Result<Restricted, BendersError>;
    fn build_relaxed_dd(&self, partial: &[f64], width: usize) -> Result<DecisionDiagram, BendersError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Evaluation {
    /// The subproblem has no solution at the queried point; each cut removes it.
    Infeasible { cuts: Vec<CutRow> },
    /// Optimal value and a cut that is tight at the queried point.
    Optimal { value: f64, cut: CutRow },
}

pub trait SubproblemOracle: Sync {
    fn evaluate(&self, x: &[f64]) -> Result<Evaluation, BendersError>;
    /// LP solves behind one call to `evaluate`.
    fn lp_solves_per_evaluation(&self) -> usize {
        1
    }
}

/// Cuts collected over the whole search, without duplicates.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    cuts: Vec<CutRow>,
    keys: HashSet<Vec<i64>>,
    feasibility: usize,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the cut unless an equal one is present; returns whether it was added.
    pub fn insert(&mut self, cut: CutRow) -> bool {
        if !self.keys.insert(cut.dedup_key()) {
            return false;
        }
        if cut.is_feasibility() {
            self.feasibility += 1;
        }
        self.cuts.push(cut);
        true
    }

    pub fn cuts(&self) -> &[CutRow] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn feasibility_count(&self) -> usize {
        self.feasibility
    }

    pub fn optimality_count(&self) -> usize {
        self.cuts.len() - self.feasibility
    }
}

/// How children are generated from the last exact layer of a relaxed diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStrategy {
    /// One child per distinct root-to-node prefix.
    AllPrefixes,
    /// One child per node, using a single optimal root-to-node prefix.
    LongestPrefix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub width: usize,
    pub time_limit: Option<Duration>,
    pub relaxed_cuts: bool,
    /// Subproblem calls per node in the relaxed phase.
    pub relaxed_cut_cap: usize,
    /// Skip the relaxed phase when the restricted diagram was exact.
    pub skip_relaxed_when_exact: bool,
    /// Times the restricted width may double at one node when it runs out of candidates.
    pub max_width_doublings: u32,
    pub branching: BranchStrategy,
    /// Cap on enumerated prefixes per branching step.
    pub prefix_cap: usize,
    pub trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            width: 2,
            time_limit: None,
            relaxed_cuts: true,
            relaxed_cut_cap: 20,
            skip_relaxed_when_exact: true,
            max_width_doublings: 4,
            branching: BranchStrategy::AllPrefixes,
            prefix_cap: 100_000,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped early; `gap` is the distance between the best open bound and the incumbent.
    TimeLimit { gap: f64 },
    Infeasible,
}

impl SolveStatus {
    pub fn name(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimit { .. } => "time_limit",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TracePhase {
    /// Objective of a candidate confirmed by the subproblem in a restricted diagram.
    RestrictedCandidate,
    /// Optimal path value of a refined relaxed diagram.
    RelaxedBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub partial: Vec<f64>,
    pub phase: TracePhase,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub sense: Sense,
    pub x: Option<Vec<f64>>,
    pub z: Option<f64>,
    pub value: Option<f64>,
    pub feasibility_cuts: usize,
    pub optimality_cuts: usize,
    pub branches: usize,
    pub nodes: usize,
    pub lp_calls: usize,
    pub seconds: f64,
    /// Cut pool at termination, in insertion order.
    #[serde(default)]
    pub cuts: Vec<CutRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
}

pub const CSV_VERSION: u32 = 1;

impl SolveReport {
    /// Report for a model found infeasible before any search.
    pub fn infeasible(sense: Sense) -> Self {
        SolveReport {
            status: SolveStatus::Infeasible,
            sense,
            x: None,
            z: None,
            value: None,
            feasibility_cuts: 0,
            optimality_cuts: 0,
            branches: 0,
            nodes: 0,
            lp_calls: 0,
            seconds: 0.0,
            cuts: Vec::new(),
            trace: Vec::new(),
        }
    }

    pub fn csv_header() -> &'static str {
        "version,instance,method,status,value,time,f_cuts,o_cuts,branches,lp_calls"
    }

    pub fn csv_row(&self, instance: &str, method: &str) -> String {
        let value = self.value.map(|v| format!("{v:.9}")).unwrap_or_default();
        format!(
            "{CSV_VERSION},{instance},{method},{},{value},{:.6},{},{},{},{}",
            self.status.name(),
            self.seconds,
            self.feasibility_cuts,
            self.optimality_cuts,
            self.branches,
            self.lp_calls
        )
    }
}

/// The root master diagram followed by one diagram per cut of `cuts`,
/// each refined exactly by every cut up to it. Stops early if a cut empties
/// the diagram.
pub fn refinement_snapshots<M: MasterOracle>(master: &M, cuts: &[CutRow]) -> Result<Vec<DecisionDiagram>, BendersError> {
    let mut dd = master.build_exact_dd(&[])?;
    let mut out = vec![dd.clone()];
    for c in cuts {
        match dd.refine_with_cut(c, RefineMode::Exact) {
            Ok(d) => dd = d,
            Err(DdError::InfeasibleDiagram) => break,
            Err(e) => return Err(e.into()),
        }
        out.push(dd.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_rejects_duplicates_after_rounding() {
        let mut pool = CutPool::new();
        assert!(pool.insert(CutRow::feasibility(vec![2.0 / 3.0, 1.0], 1.0)));
        assert!(!pool.insert(CutRow::feasibility(vec![2.0 / 3.0 + 1e-12, 1.0], 1.0)));
        assert!(pool.insert(CutRow::upper_bound(&[2.0 / 3.0, 0.0], 2.0)));
        assert_eq!((pool.feasibility_count(), pool.optimality_count()), (1, 1));
    }

    #[test]
    fn csv_row_has_header_arity() {
        let r = SolveReport {
            status: SolveStatus::Optimal,
            sense: Sense::Max,
            x: None,
            z: None,
            value: Some(1.0),
            feasibility_cuts: 1,
            optimality_cuts: 2,
            branches: 0,
            nodes: 1,
            lp_calls: 3,
            seconds: 0.0,
            trace: Vec::new(),
            cuts: Vec::new(),
        };
        let n = SolveReport::csv_header().split(',').count();
        assert_eq!(r.csv_row("a", "dd-bd").split(',').count(), n);
    }
}
