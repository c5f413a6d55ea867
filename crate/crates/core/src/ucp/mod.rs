//! Two-stage stochastic unit commitment.
//!
//! The master decides on/off status `x[i][t]` per unit and period and pays
//! fixed and start-up costs. The second stage dispatches power per demand
//! scenario at minimum production cost. Master variables are ordered
//! unit-major: variable `i * T + t` is unit `i` in period `t`.

mod gen;
mod master;
mod solve;
mod sub;

pub use gen::{gen_random_instance, GenConfig, GenParams};
pub use master::{
    build_master_dd, build_relaxed_master_dd, build_restricted_master_dd, master_cost, schedule_feasible,
    MasterState, INF,
};
pub use solve::{solve_ucp, solve_ucp_naive, ucp_snapshots, UcpMaster, UcpSubproblem};
pub use sub::{
    build_subproblem, build_subproblem_with_transitions, compute_gamma, evaluate_subproblems, parametric_subproblem,
    GammaBounds,
};

use crate::benders::BendersError;
use crate::lp::LpError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const INSTANCE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum UcpError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("the relaxation of the second stage is infeasible")]
    Infeasible,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Benders(#[from] BendersError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    /// Cost per period while up.
    #[serde(rename = "c_f")]
    pub fixed_cost: f64,
    /// Cost per MW produced.
    #[serde(rename = "c_g")]
    pub unit_cost: f64,
    #[serde(rename = "m")]
    pub min_output: f64,
    #[serde(rename = "M")]
    pub max_output: f64,
    #[serde(rename = "L")]
    pub min_up: u32,
    #[serde(rename = "l")]
    pub min_down: u32,
    #[serde(rename = "RU")]
    pub ramp_up: f64,
    #[serde(rename = "RD")]
    pub ramp_down: f64,
    #[serde(rename = "SU")]
    pub startup_ramp: f64,
    #[serde(rename = "SD")]
    pub shutdown_ramp: f64,
    /// Start-up cost after `k` periods down, for `k = 1, 2, ...`; the last
    /// entry also covers longer down times.
    #[serde(rename = "K")]
    pub startup_costs: Vec<f64>,
    /// Start-up cost for a unit that has been down since before the horizon.
    #[serde(rename = "K_inf")]
    pub first_startup_cost: f64,
}

impl Generator {
    /// Start-up cost after `down` periods down; `None` means down since the start.
    pub fn startup_cost(&self, down: Option<u32>) -> f64 {
        match down {
            None => self.first_startup_cost,
            Some(_) if self.startup_costs.is_empty() => self.first_startup_cost,
            Some(k) => self.startup_costs[(k.max(1) as usize).min(self.startup_costs.len()) - 1],
        }
    }

    fn validate(&self, idx: usize) -> Result<(), UcpError> {
        let bad = |msg: &str| Err(UcpError::Invalid(format!("generator {idx}: {msg}")));
        let nums = [
            self.fixed_cost,
            self.unit_cost,
            self.min_output,
            self.max_output,
            self.ramp_up,
            self.ramp_down,
            self.startup_ramp,
            self.shutdown_ramp,
            self.first_startup_cost,
        ];
        if nums.iter().chain(&self.startup_costs).any(|v| !v.is_finite() || *v < 0.0) {
            return bad("costs, outputs and rates must be finite and non-negative");
        }
        if self.min_output > self.max_output {
            return bad("m exceeds M");
        }
        if self.min_up < 1 || self.min_down < 1 {
            return bad("minimum up and down times must be at least 1");
        }
        if self.startup_ramp > self.ramp_up {
            return bad("SU exceeds RU");
        }
        if self.shutdown_ramp > self.ramp_down {
            return bad("SD exceeds RD");
        }
        if self.startup_costs.windows(2).any(|w| w[0] > w[1]) {
            return bad("start-up costs must not decrease with down time");
        }
        if self.startup_costs.iter().any(|&k| k > self.first_startup_cost) {
            return bad("K_inf must be the largest start-up cost");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub prob: f64,
    #[serde(rename = "D")]
    pub demand: Vec<f64>,
    #[serde(rename = "R")]
    pub reserve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcpInstance {
    pub version: u32,
    #[serde(rename = "T")]
    pub periods: usize,
    pub generators: Vec<Generator>,
    pub scenarios: Vec<Scenario>,
}

impl UcpInstance {
    pub fn num_units(&self) -> usize {
        self.generators.len()
    }

    pub fn num_vars(&self) -> usize {
        self.generators.len() * self.periods
    }

    pub fn var(&self, unit: usize, period: usize) -> usize {
        unit * self.periods + period
    }

    pub fn validate(&self) -> Result<(), UcpError> {
        if self.version != INSTANCE_VERSION {
            return Err(UcpError::Invalid(format!("unsupported version {}", self.version)));
        }
        if self.periods == 0 {
            return Err(UcpError::Invalid("T must be at least 1".into()));
        }
        if self.generators.is_empty() {
            return Err(UcpError::Invalid("no generators".into()));
        }
        if self.scenarios.is_empty() {
            return Err(UcpError::Invalid("no scenarios".into()));
        }
        for (i, g) in self.generators.iter().enumerate() {
            g.validate(i)?;
        }
        let mut total = 0.0;
        for (s, sc) in self.scenarios.iter().enumerate() {
            if sc.demand.len() != self.periods || sc.reserve.len() != self.periods {
                return Err(UcpError::Invalid(format!("scenario {s}: D and R need T entries")));
            }
            if sc.demand.iter().chain(&sc.reserve).any(|v| !v.is_finite() || *v < 0.0) {
                return Err(UcpError::Invalid(format!("scenario {s}: demand and reserve must be non-negative")));
            }
            if !(sc.prob.is_finite() && sc.prob >= 0.0) {
                return Err(UcpError::Invalid(format!("scenario {s}: bad probability")));
            }
            total += sc.prob;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(UcpError::Invalid(format!("probabilities sum to {total}")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, UcpError> {
        let inst: UcpInstance = serde_json::from_str(text).map_err(|e| UcpError::Invalid(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    /// Total capacity of all units.
    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.max_output).sum()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn unit(c_f: f64, c_g: f64, m: f64, big_m: f64, min_up: u32, min_down: u32) -> Generator {
        Generator {
            fixed_cost: c_f,
            unit_cost: c_g,
            min_output: m,
            max_output: big_m,
            min_up,
            min_down,
            ramp_up: big_m,
            ramp_down: big_m,
            startup_ramp: big_m,
            shutdown_ramp: big_m,
            startup_costs: vec![10.0, 20.0],
            first_startup_cost: 30.0,
        }
    }

    pub(crate) fn instance(gens: Vec<Generator>, periods: usize, demand: Vec<Vec<f64>>) -> UcpInstance {
        let s = demand.len() as f64;
        UcpInstance {
            version: INSTANCE_VERSION,
            periods,
            generators: gens,
            scenarios: demand
                .into_iter()
                .map(|d| Scenario { prob: 1.0 / s, reserve: vec![0.0; d.len()], demand: d })
                .collect(),
        }
    }

    #[test]
    fn startup_cost_lookup() {
        let g = unit(1.0, 1.0, 0.0, 10.0, 1, 1);
        assert_eq!(g.startup_cost(None), 30.0);
        assert_eq!(g.startup_cost(Some(1)), 10.0);
        assert_eq!(g.startup_cost(Some(5)), 20.0);
    }

    #[test]
    fn validation_rejects_su_above_ru() {
        let mut g = unit(1.0, 1.0, 0.0, 10.0, 1, 1);
        g.startup_ramp = 11.0;
        assert!(instance(vec![g], 1, vec![vec![0.0]]).validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let inst = instance(vec![unit(1.0, 2.0, 0.0, 10.0, 2, 1)], 2, vec![vec![1.0, 2.0]]);
        assert_eq!(UcpInstance::from_json(&inst.to_json()).unwrap(), inst);
    }
}
