use super::{BendersError, CutPool, Evaluation, MasterOracle, SolveReport, SolveStatus, SubproblemOracle, VALUE_TOL};
use crate::dd::{CutRow, DdError, CUT_TOL};
use crate::Sense;
use std::collections::BTreeMap;
use std::time::Instant;

const ENUMERATION_CAP: usize = 1 << 22;

/// Best `z` allowed at `x` by the optimality cuts and the interval, or `None`
/// when a feasibility cut or an empty interval excludes `x`.
fn z_at(sense: Sense, cuts: &[CutRow], x: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let (mut zlo, mut zhi) = (lo, hi);
    for c in cuts {
        let c = c.as_le();
        let ax: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        if c.z_coeff == 0.0 {
            if ax > c.rhs + CUT_TOL {
                return None;
            }
        } else if c.z_coeff > 0.0 {
            zhi = zhi.min((c.rhs - ax) / c.z_coeff);
        } else {
            zlo = zlo.max((c.rhs - ax) / c.z_coeff);
        }
    }
    if zlo > zhi + CUT_TOL {
        return None;
    }
    Some(match sense {
        Sense::Min => zlo,
        Sense::Max => zhi,
    })
}

/// Classic Benders decomposition whose master is solved by enumerating every
/// master solution of the exact diagram. Serves as a cross-check.
pub fn naive_bd_solve<M: MasterOracle, S: SubproblemOracle>(master: &M, sub: &S) -> Result<SolveReport, BendersError> {
    let start = Instant::now();
    let sense = master.sense();
    let n = master.num_vars();
    let mut report = SolveReport::infeasible(sense);
    let dd = match master.build_exact_dd(&[]) {
        Ok(d) => d,
        Err(BendersError::Dd(DdError::EmptyDiagram)) => return Ok(report),
        Err(e) => return Err(e),
    };
    let mut costs: BTreeMap<Vec<u64>, (Vec<f64>, f64)> = BTreeMap::new();
    let (mut zlo, mut zhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (sol, w) in dd.enumerate_weighted(ENUMERATION_CAP)? {
        let z = sol[n];
        zlo = zlo.min(z);
        zhi = zhi.max(z);
        let x = sol[..n].to_vec();
        let key: Vec<u64> = x.iter().map(|v| (v + 0.0).to_bits()).collect();
        costs.insert(key, (x, w - z));
    }
    let mut candidates: Vec<(Vec<f64>, f64)> = costs.into_values().collect();
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut pool = CutPool::new();
    loop {
        report.nodes += 1;
        let mut best: Option<(usize, f64, f64)> = None;
        for (i, (x, cost)) in candidates.iter().enumerate() {
            let Some(z) = z_at(sense, pool.cuts(), x, zlo, zhi) else { continue };
            let v = cost + z;
            if best.is_none_or(|(_, bv, _)| sense.better(v, bv, 1e-9 * (1.0 + bv.abs()))) {
                best = Some((i, v, z));
            }
        }
        let Some((i, _, z)) = best else { break };
        let (x, cost) = candidates[i].clone();
        report.lp_calls += sub.lp_solves_per_evaluation();
        let added = match sub.evaluate(&x)? {
            Evaluation::Infeasible { cuts } => cuts.into_iter().fold(false, |acc, c| pool.insert(c) | acc),
            Evaluation::Optimal { value: rho, cut } => {
                let done = match sense {
                    Sense::Min => z >= rho - VALUE_TOL,
                    Sense::Max => z <= rho + VALUE_TOL,
                };
                if done {
                    report.status = SolveStatus::Optimal;
                    report.x = Some(x);
                    report.z = Some(rho);
                    report.value = Some(cost + rho);
                    break;
                }
                pool.insert(cut)
            }
        };
        if !added {
            return Err(BendersError::Stalled(format!("master keeps proposing {x:?}")));
        }
    }
    report.feasibility_cuts = pool.feasibility_count();
    report.optimality_cuts = pool.optimality_count();
    report.cuts = pool.cuts().to_vec();
    report.seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
