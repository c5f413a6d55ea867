use super::{Scenario, UcpError, UcpInstance};
use crate::benders::mip::normalize_feasibility_cut;
use crate::benders::Evaluation;
use crate::dd::CutRow;
use crate::lp::{self, AffineFn, LinearProgram, LpError, LpOutcome, ParametricLp, ParametricOutcome};
use crate::{Cmp, Sense};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Bounds on the expected second-stage cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaBounds {
    pub lo: f64,
    pub hi: f64,
}

/// Second stage of one scenario over `(p, pbar)` with right-hand sides affine
/// in the schedule `x`. Ramping rows use the schedule directly, so no
/// start-up or shut-down indicators appear.
pub fn parametric_subproblem(inst: &UcpInstance, scenario: &Scenario) -> ParametricLp {
    let nv = inst.num_vars();
    let t_len = inst.periods;
    let p = |i: usize, t: usize| i * t_len + t;
    let pbar = |i: usize, t: usize| nv + i * t_len + t;
    let mut obj = vec![0.0; 2 * nv];
    for (i, g) in inst.generators.iter().enumerate() {
        for t in 0..t_len {
            obj[p(i, t)] = g.unit_cost;
        }
    }
    let mut lp = ParametricLp::new(Sense::Min, obj, nv);
    let row = |entries: &[(usize, f64)]| {
        let mut r = vec![0.0; 2 * nv];
        for &(j, v) in entries {
            r[j] += v;
        }
        r
    };
    let affine = |entries: &[(usize, f64)], constant: f64| {
        let mut f = AffineFn::constant(constant, nv);
        for &(j, v) in entries {
            f.coeffs[j] += v;
        }
        f
    };
    for (i, g) in inst.generators.iter().enumerate() {
        for t in 0..t_len {
            let x = inst.var(i, t);
            let (up_rhs, down_rhs, up_row, down_row) = if t == 0 {
                (
                    affine(&[(x, g.startup_ramp)], 0.0),
                    affine(&[(x, g.ramp_down - g.shutdown_ramp)], 0.0),
                    row(&[(p(i, 0), 1.0)]),
                    row(&[(p(i, 0), -1.0)]),
                )
            } else {
                let prev = inst.var(i, t - 1);
                (
                    affine(&[(prev, g.ramp_up - g.startup_ramp), (x, g.startup_ramp)], 0.0),
                    affine(&[(x, g.ramp_down - g.shutdown_ramp), (prev, g.shutdown_ramp)], 0.0),
                    row(&[(p(i, t), 1.0), (p(i, t - 1), -1.0)]),
                    row(&[(p(i, t - 1), 1.0), (p(i, t), -1.0)]),
                )
            };
            lp.add_row(up_row, Cmp::Le, up_rhs);
            lp.add_row(down_row, Cmp::Le, down_rhs);
            lp.add_row(row(&[(p(i, t), 1.0)]), Cmp::Ge, affine(&[(x, g.min_output)], 0.0));
            lp.add_row(row(&[(pbar(i, t), 1.0), (p(i, t), -1.0)]), Cmp::Ge, AffineFn::zero(nv));
            lp.add_row(row(&[(pbar(i, t), 1.0)]), Cmp::Le, affine(&[(x, g.max_output)], 0.0));
        }
    }
    for t in 0..t_len {
        let all_p: Vec<(usize, f64)> = (0..inst.num_units()).map(|i| (p(i, t), 1.0)).collect();
        let all_pbar: Vec<(usize, f64)> = (0..inst.num_units()).map(|i| (pbar(i, t), 1.0)).collect();
        lp.add_row(row(&all_p), Cmp::Ge, AffineFn::constant(scenario.demand[t], nv));
        lp.add_row(row(&all_pbar), Cmp::Ge, AffineFn::constant(scenario.demand[t] + scenario.reserve[t], nv));
    }
    lp
}

/// The second-stage LP of one scenario at a fixed schedule.
pub fn build_subproblem(inst: &UcpInstance, x: &[f64], scenario: usize) -> LinearProgram {
    parametric_subproblem(inst, &inst.scenarios[scenario]).instantiate(x)
}

/// The second-stage LP written with start-up and shut-down indicators derived
/// from the schedule, as in the formulation with `y` and `ybar`.
pub fn build_subproblem_with_transitions(inst: &UcpInstance, x: &[f64], scenario: usize) -> LinearProgram {
    let mut lp = build_subproblem(inst, x, scenario);
    let t_len = inst.periods;
    // The first two rows of each (unit, period) block are the ramping rows.
    let block = 5;
    for (i, g) in inst.generators.iter().enumerate() {
        for t in 0..t_len {
            let xt = x[inst.var(i, t)];
            let xp = if t == 0 { 0.0 } else { x[inst.var(i, t - 1)] };
            let start = (xt - xp).max(0.0);
            let stop = (xp - xt).max(0.0);
            let r = (i * t_len + t) * block;
            lp.rows[r].rhs = g.ramp_up * xp + g.startup_ramp * start;
            lp.rows[r + 1].rhs = g.ramp_down * xt + g.shutdown_ramp * stop;
        }
    }
    lp
}

/// Per-scenario evaluation at `x`. Scenarios are solved in parallel and
/// combined in scenario order.
pub fn evaluate_subproblems(lps: &[ParametricLp], probs: &[f64], x: &[f64]) -> Result<Evaluation, LpError> {
    let outcomes: Vec<Result<ParametricOutcome, LpError>> = lps.par_iter().map(|lp| lp.solve_at(x)).collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    let infeasible: Vec<CutRow> = outcomes
        .iter()
        .filter_map(|o| match o {
            ParametricOutcome::Infeasible { cut, .. } => Some(normalize_feasibility_cut(cut)),
            _ => None,
        })
        .collect();
    if !infeasible.is_empty() {
        return Ok(Evaluation::Infeasible { cuts: infeasible });
    }
    let mut value = 0.0;
    let mut bound = AffineFn::zero(x.len());
    for (o, &prob) in outcomes.iter().zip(probs) {
        if let ParametricOutcome::Optimal { value: v, bound: b, .. } = o {
            value += prob * v;
            bound.add_scaled(b, prob);
        }
    }
    Ok(Evaluation::Optimal { value, cut: CutRow::lower_bound(&bound.coeffs, bound.constant) })
}

/// Bounds from minimizing and maximizing the production cost over the linear
/// relaxation of the full model, per scenario, weighted by probability.
/// Start-up cost variables only bound themselves from below and are left out.
pub fn compute_gamma(inst: &UcpInstance) -> Result<GammaBounds, UcpError> {
    let nv = inst.num_vars();
    let t_len = inst.periods;
    // Layout: x, y (start), ybar (stop), p, pbar.
    let (xo, yo, zo, po, qo) = (0, nv, 2 * nv, 3 * nv, 4 * nv);
    let mut lo = 0.0;
    let mut hi = 0.0;
    for sc in &inst.scenarios {
        let mut base = LinearProgram::new(Sense::Min, vec![0.0; 5 * nv]);
        for j in 0..3 * nv {
            base.set_bounds(j, 0.0, 1.0);
        }
        let row = |entries: &[(usize, f64)]| {
            let mut r = vec![0.0; 5 * nv];
            for &(j, v) in entries {
                r[j] += v;
            }
            r
        };
        for (i, g) in inst.generators.iter().enumerate() {
            for t in 0..t_len {
                let k = inst.var(i, t);
                let prev = (t > 0).then(|| inst.var(i, t - 1));
                let mut logical = vec![(yo + k, 1.0), (zo + k, -1.0), (xo + k, -1.0)];
                if let Some(pk) = prev {
                    logical.push((xo + pk, 1.0));
                }
                base.add_row(row(&logical), Cmp::Eq, 0.0);
                let up_from = (t + 1).saturating_sub(g.min_up as usize);
                let mut up: Vec<(usize, f64)> = (up_from..=t).map(|s| (yo + inst.var(i, s), 1.0)).collect();
                up.push((xo + k, -1.0));
                base.add_row(row(&up), Cmp::Le, 0.0);
                let down_from = (t + 1).saturating_sub(g.min_down as usize);
                let mut down: Vec<(usize, f64)> = (down_from..=t).map(|s| (zo + inst.var(i, s), 1.0)).collect();
                down.push((xo + k, 1.0));
                base.add_row(row(&down), Cmp::Le, 1.0);
                let mut ramp_up = vec![(po + k, 1.0), (yo + k, -g.startup_ramp)];
                let mut ramp_down = vec![(po + k, -1.0), (xo + k, -g.ramp_down), (zo + k, -g.shutdown_ramp)];
                if let Some(pk) = prev {
                    ramp_up.extend([(po + pk, -1.0), (xo + pk, -g.ramp_up)]);
                    ramp_down.push((po + pk, 1.0));
                }
                base.add_row(row(&ramp_up), Cmp::Le, 0.0);
                base.add_row(row(&ramp_down), Cmp::Le, 0.0);
                base.add_row(row(&[(po + k, 1.0), (xo + k, -g.min_output)]), Cmp::Ge, 0.0);
                base.add_row(row(&[(qo + k, 1.0), (po + k, -1.0)]), Cmp::Ge, 0.0);
                base.add_row(row(&[(qo + k, 1.0), (xo + k, -g.max_output)]), Cmp::Le, 0.0);
            }
        }
        for t in 0..t_len {
            let ps: Vec<(usize, f64)> = (0..inst.num_units()).map(|i| (po + inst.var(i, t), 1.0)).collect();
            let qs: Vec<(usize, f64)> = (0..inst.num_units()).map(|i| (qo + inst.var(i, t), 1.0)).collect();
            base.add_row(row(&ps), Cmp::Ge, sc.demand[t]);
            base.add_row(row(&qs), Cmp::Ge, sc.demand[t] + sc.reserve[t]);
        }
        for (i, g) in inst.generators.iter().enumerate() {
            for t in 0..t_len {
                base.objective[po + inst.var(i, t)] = g.unit_cost;
            }
        }
        let mut bounds = [0.0; 2];
        for (slot, sense) in [Sense::Min, Sense::Max].into_iter().enumerate() {
            let mut prog = base.clone();
            prog.sense = sense;
            match lp::solve(&prog)? {
                LpOutcome::Optimal { objective, .. } => bounds[slot] = objective,
                LpOutcome::Infeasible { .. } => return Err(UcpError::Infeasible),
                LpOutcome::Unbounded { .. } => {
                    return Err(UcpError::Invalid("production cost is unbounded over the relaxation".into()))
                }
            }
        }
        lo += sc.prob * bounds[0];
        hi += sc.prob * bounds[1];
    }
    Ok(GammaBounds { lo, hi })
}
