use super::{
    build_master_dd, build_relaxed_master_dd, build_restricted_master_dd, compute_gamma, evaluate_subproblems,
    parametric_subproblem, GammaBounds, UcpError, UcpInstance,
};
use crate::benders::{
    dd_bd_solve, naive_bd_solve, refinement_snapshots, BendersError, EngineConfig, Evaluation, MasterOracle, Restricted, SolveReport,
    SubproblemOracle,
};
use crate::dd::{CutRow, DecisionDiagram};
use crate::lp::ParametricLp;
use crate::Sense;

/// Master side of unit commitment: schedules with fixed and start-up costs.
pub struct UcpMaster<'a> {
    inst: &'a UcpInstance,
    gamma: GammaBounds,
}

impl<'a> UcpMaster<'a> {
    pub fn new(inst: &'a UcpInstance, gamma: GammaBounds) -> Self {
        UcpMaster { inst, gamma }
    }
}

impl MasterOracle for UcpMaster<'_> {
    fn sense(&self) -> Sense {
        Sense::Min
    }

    fn num_vars(&self) -> usize {
        self.inst.num_vars()
    }

    fn domain(&self, _var: usize) -> Vec<f64> {
        vec![0.0, 1.0]
    }

    fn build_exact_dd(&self, partial: &[f64]) -> Result<DecisionDiagram, BendersError> {
        Ok(build_master_dd(self.inst, partial, self.gamma)?)
    }

    fn build_restricted_dd(&self, partial: &[f64], width: usize) -> Result<Restricted, BendersError> {
        let (dd, exact) = build_restricted_master_dd(self.inst, partial, self.gamma, width)?;
        Ok(Restricted { dd, exact })
    }

    fn build_relaxed_dd(&self, partial: &[f64], width: usize) -> Result<DecisionDiagram, BendersError> {
        Ok(build_relaxed_master_dd(self.inst, partial, self.gamma, width)?)
    }
}

/// Expected dispatch cost over all scenarios.
pub struct UcpSubproblem {
    lps: Vec<ParametricLp>,
    probs: Vec<f64>,
}

impl UcpSubproblem {
    pub fn new(inst: &UcpInstance) -> Self {
        UcpSubproblem {
            lps: inst.scenarios.iter().map(|s| parametric_subproblem(inst, s)).collect(),
            probs: inst.scenarios.iter().map(|s| s.prob).collect(),
        }
    }
}

impl SubproblemOracle for UcpSubproblem {
    fn evaluate(&self, x: &[f64]) -> Result<Evaluation, BendersError> {
        Ok(evaluate_subproblems(&self.lps, &self.probs, x)?)
    }

    fn lp_solves_per_evaluation(&self) -> usize {
        self.lps.len()
    }
}

fn with_gamma(
    inst: &UcpInstance,
    run: impl FnOnce(&UcpMaster, &UcpSubproblem) -> Result<SolveReport, BendersError>,
) -> Result<SolveReport, UcpError> {
    inst.validate()?;
    let gamma = match compute_gamma(inst) {
        Ok(g) => g,
        Err(UcpError::Infeasible) => return Ok(SolveReport::infeasible(Sense::Min)),
        Err(e) => return Err(e),
    };
    Ok(run(&UcpMaster::new(inst, gamma), &UcpSubproblem::new(inst))?)
}

/// Solves an instance with decision-diagram Benders decomposition.
pub fn solve_ucp(inst: &UcpInstance, cfg: &EngineConfig) -> Result<SolveReport, UcpError> {
    with_gamma(inst, |m, s| dd_bd_solve(m, s, cfg))
}

/// Master diagrams after each cut of `cuts`, starting from the root diagram.
pub fn ucp_snapshots(inst: &UcpInstance, cuts: &[CutRow]) -> Result<Vec<DecisionDiagram>, UcpError> {
    inst.validate()?;
    match compute_gamma(inst) {
        Ok(gamma) => Ok(refinement_snapshots(&UcpMaster::new(inst, gamma), cuts)?),
        Err(UcpError::Infeasible) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// Solves an instance by enumerating the exact master diagram each iteration.
pub fn solve_ucp_naive(inst: &UcpInstance) -> Result<SolveReport, UcpError> {
    with_gamma(inst, |m, s| naive_bd_solve(m, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benders::SolveStatus;
    use crate::ucp::tests::{instance, unit};

    #[test]
    fn single_unit_must_run_when_demand_is_positive() {
        let inst = instance(vec![unit(5.0, 2.0, 0.0, 10.0, 1, 1)], 2, vec![vec![3.0, 4.0]]);
        let r = solve_ucp(&inst, &EngineConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.x.as_deref(), Some(&[1.0, 1.0][..]));
        // Fixed 10, first start 30, dispatch 2 * 7.
        assert!((r.value.unwrap() - 54.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn demand_above_capacity_is_infeasible() {
        let inst = instance(vec![unit(5.0, 2.0, 0.0, 10.0, 1, 1)], 1, vec![vec![11.0]]);
        let r = solve_ucp(&inst, &EngineConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn naive_and_dd_agree_on_small_instance() {
        let inst = instance(
            vec![unit(5.0, 2.0, 1.0, 10.0, 2, 1), unit(3.0, 4.0, 0.0, 8.0, 1, 2)],
            3,
            vec![vec![3.0, 12.0, 4.0], vec![6.0, 9.0, 0.0]],
        );
        let a = solve_ucp(&inst, &EngineConfig::default()).unwrap();
        let b = solve_ucp_naive(&inst).unwrap();
        assert!((a.value.unwrap() - b.value.unwrap()).abs() < 1e-6, "{a:?} {b:?}");
    }
}
