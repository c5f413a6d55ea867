//! Brute-force reference solvers. Every master assignment is enumerated and
//! its second stage solved from scratch; nothing is pruned.

use crate::benders::mip::MipInstance;
use crate::lp::{self, LpError, LpOutcome};
use crate::ucp::{build_subproblem, master_cost, schedule_feasible, UcpError, UcpInstance};
use crate::Sense;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

/// Largest number of binary master variables enumerated.
pub const MAX_BINARY_VARS: usize = 24;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{count} master assignments exceed the enumeration limit of {limit}")]
    TooLarge { count: u128, limit: u128 },
    #[error(transparent)]
    Ucp(#[from] UcpError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// One enumerated master assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub x: Vec<f64>,
    /// Whether the second stage is feasible in every scenario.
    pub feasible: bool,
    pub master_cost: f64,
    /// Expected second-stage cost, when feasible.
    pub second_stage: Option<f64>,
}

impl TableRow {
    pub fn total(&self) -> Option<f64> {
        self.second_stage.map(|v| self.master_cost + v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub sense: Sense,
    pub best_x: Option<Vec<f64>>,
    pub best_cost: Option<f64>,
    /// Every assignment allowed by the master constraints, in lexicographic order.
    pub table: Vec<TableRow>,
}

impl OracleResult {
    fn from_table(sense: Sense, table: Vec<TableRow>) -> Self {
        let mut best: Option<&TableRow> = None;
        for row in &table {
            if let Some(v) = row.total() {
                let better = match best.and_then(TableRow::total) {
                    None => true,
                    Some(b) => match sense {
                        Sense::Min => v < b,
                        Sense::Max => v > b,
                    },
                };
                if better {
                    best = Some(row);
                }
            }
        }
        OracleResult {
            sense,
            best_x: best.map(|r| r.x.clone()),
            best_cost: best.and_then(TableRow::total),
            table,
        }
    }

    /// The table as CSV with one row per assignment.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("x,feasible,master_cost,second_stage,total\n");
        for r in &self.table {
            let x: Vec<String> = r.x.iter().map(|v| format!("{v}")).collect();
            let opt = |v: Option<f64>| v.map(|v| format!("{v:.9}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{:.9},{},{}",
                x.join(" "),
                r.feasible,
                r.master_cost,
                opt(r.second_stage),
                opt(r.total())
            );
        }
        out
    }
}

/// Recomputes one table row of a unit-commitment instance from scratch.
pub fn evaluate_schedule(inst: &UcpInstance, x: &[f64]) -> Result<TableRow, OracleError> {
    let mut expected = 0.0;
    let mut feasible = true;
    for (s, sc) in inst.scenarios.iter().enumerate() {
        match lp::solve(&build_subproblem(inst, x, s))? {
            LpOutcome::Optimal { objective, .. } => expected += sc.prob * objective,
            LpOutcome::Infeasible { .. } => feasible = false,
            LpOutcome::Unbounded { .. } => return Err(OracleError::Invalid("unbounded dispatch".into())),
        }
    }
    Ok(TableRow {
        x: x.to_vec(),
        feasible,
        master_cost: master_cost(inst, x),
        second_stage: feasible.then_some(expected),
    })
}

/// Exact optimum of a unit-commitment instance by enumerating all schedules.
pub fn brute_force_solve(inst: &UcpInstance) -> Result<OracleResult, OracleError> {
    inst.validate()?;
    let n = inst.num_vars();
    if n > MAX_BINARY_VARS {
        return Err(OracleError::TooLarge { count: 1u128 << n, limit: 1u128 << MAX_BINARY_VARS });
    }
    let schedules: Vec<Vec<f64>> = (0..1u64 << n)
        .map(|k| (0..n).map(|j| ((k >> (n - 1 - j)) & 1) as f64).collect())
        .filter(|x: &Vec<f64>| schedule_feasible(inst, x))
        .collect();
    let table = schedules.par_iter().map(|x| evaluate_schedule(inst, x)).collect::<Result<Vec<_>, _>>()?;
    Ok(OracleResult::from_table(Sense::Min, table))
}

/// Exact optimum of a generic MIP by enumerating the integer box.
pub fn brute_force_mip(inst: &MipInstance) -> Result<OracleResult, OracleError> {
    let limit = 1u128 << MAX_BINARY_VARS;
    let mut count: u128 = 1;
    for v in &inst.integer_vars {
        count = count.saturating_mul((v.hi - v.lo + 1) as u128);
    }
    if count > limit {
        return Err(OracleError::TooLarge { count, limit });
    }
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for v in &inst.integer_vars {
        points = points
            .into_iter()
            .flat_map(|p| {
                (v.lo..=v.hi).map(move |k| {
                    let mut q = p.clone();
                    q.push(k as f64);
                    q
                })
            })
            .collect();
    }
    let sub = inst.subproblem();
    let table = points
        .par_iter()
        .filter(|x| inst.master_feasible(x))
        .map(|x| {
            let second_stage = match lp::solve(&sub.instantiate(x))? {
                LpOutcome::Optimal { objective, .. } => Some(objective),
                LpOutcome::Infeasible { .. } => None,
                LpOutcome::Unbounded { .. } => return Err(OracleError::Invalid("unbounded subproblem".into())),
            };
            Ok(TableRow { x: x.clone(), feasible: second_stage.is_some(), master_cost: inst.master_cost(x), second_stage })
        })
        .collect::<Result<Vec<_>, OracleError>>()?;
    Ok(OracleResult::from_table(inst.sense, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ucp::{gen_random_instance, GenConfig, GenParams};

    const TWO_VAR_MIP: &str = r#"{
        "kind": "mip", "sense": "max",
        "integer_vars": [{"lo": 0, "hi": 1, "obj": 1}, {"lo": 0, "hi": 1, "obj": 1}],
        "continuous_vars": [{"obj": 2}, {"obj": 1}],
        "rows": [
            {"x": [1, 1], "sense": ">=", "rhs": 1},
            {"x": [-1, -1], "y": [1, 1], "sense": ">=", "rhs": 0},
            {"x": [-0.1, 0], "y": [0.3, 0.7], "sense": "<=", "rhs": 0.3}
        ]
    }"#;

    #[test]
    fn two_var_mip_optimum() {
        let r = brute_force_mip(&MipInstance::from_json(TWO_VAR_MIP).unwrap()).unwrap();
        assert!((r.best_cost.unwrap() - 11.0 / 3.0).abs() < 1e-9);
        assert_eq!(r.best_x, Some(vec![1.0, 0.0]));
        assert_eq!(r.table.len(), 3);
    }

    #[test]
    fn zero_demand_runs_nothing() {
        let mut inst = gen_random_instance(GenParams { units: 2, periods: 3, scenarios: 2, seed: 7 }, &GenConfig::default());
        for sc in &mut inst.scenarios {
            sc.demand.iter_mut().for_each(|d| *d = 0.0);
            sc.reserve.iter_mut().for_each(|d| *d = 0.0);
        }
        let r = brute_force_solve(&inst).unwrap();
        assert_eq!(r.best_cost, Some(0.0));
        assert_eq!(r.best_x, Some(vec![0.0; 6]));
    }

    #[test]
    fn rows_recompute_identically() {
        let inst = gen_random_instance(GenParams { units: 2, periods: 2, scenarios: 2, seed: 3 }, &GenConfig::default());
        let r = brute_force_solve(&inst).unwrap();
        for row in &r.table {
            assert_eq!(&evaluate_schedule(&inst, &row.x).unwrap(), row);
        }
        assert_eq!(r.table_csv().lines().count(), r.table.len() + 1);
    }

    #[test]
    fn too_large_is_rejected() {
        let inst = gen_random_instance(GenParams { units: 5, periods: 5, scenarios: 1, seed: 0 }, &GenConfig::default());
        assert!(matches!(brute_force_solve(&inst), Err(OracleError::TooLarge { .. })));
    }
}
