use super::{
    exact_cutset, prefixes_to_layer, BendersError, BranchStrategy, CutPool, EngineConfig, Evaluation, MasterOracle,
    SolveReport, SolveStatus, SubproblemOracle, TraceEntry, TracePhase, VALUE_TOL,
};
use crate::dd::{CutRow, DdError, DecisionDiagram, PathSolution, RefineMode};
use crate::Sense;
use log::{debug, info};
use std::collections::HashMap;
use std::time::Instant;

struct OpenNode {
    partial: Vec<f64>,
    bound: f64,
}

struct Incumbent {
    x: Vec<f64>,
    z: f64,
    value: f64,
}

struct Search<'a, M, S> {
    master: &'a M,
    sub: &'a S,
    cfg: &'a EngineConfig,
    sense: Sense,
    start: Instant,
    pool: CutPool,
    memo: HashMap<Vec<u64>, Evaluation>,
    lp_calls: usize,
    incumbent: Option<Incumbent>,
    trace: Vec<TraceEntry>,
    timed_out: bool,
}

fn prune_tol(v: f64) -> f64 {
    if v.is_finite() {
        1e-9 * (1.0 + v.abs())
    } else {
        0.0
    }
}

fn split(path: &PathSolution, n: usize) -> (Vec<f64>, f64) {
    (path.assignment[..n].to_vec(), path.assignment[n])
}

/// Runs decision-diagram Benders decomposition to optimality, infeasibility
/// or the time limit.
pub fn dd_bd_solve<M: MasterOracle, S: SubproblemOracle>(
    master: &M,
    sub: &S,
    cfg: &EngineConfig,
) -> Result<SolveReport, BendersError> {
    if cfg.width == 0 {
        return Err(BendersError::InvalidModel("width must be at least 1".into()));
    }
    let mut search = Search {
        master,
        sub,
        cfg,
        sense: master.sense(),
        start: Instant::now(),
        pool: CutPool::new(),
        memo: HashMap::new(),
        lp_calls: 0,
        incumbent: None,
        trace: Vec::new(),
        timed_out: false,
    };
    let sense = search.sense;
    let mut stack = vec![OpenNode { partial: Vec::new(), bound: -sense.worst() }];
    let mut branches = 0;
    let mut nodes = 0;
    while let Some(node) = stack.pop() {
        if search.out_of_time() {
            stack.push(node);
            break;
        }
        if !search.improves(node.bound) {
            continue;
        }
        nodes += 1;
        debug!("node {:?} bound {}", node.partial, node.bound);
        let (exact, width) = search.restricted_phase(&node.partial)?;
        if search.timed_out {
            stack.push(node);
            break;
        }
        if exact && cfg.skip_relaxed_when_exact {
            continue;
        }
        let children = search.relaxed_phase(&node, width)?;
        if search.timed_out {
            stack.push(node);
            break;
        }
        branches += children.len();
        stack.extend(children.into_iter().rev());
    }
    let status = if search.timed_out {
        let open = stack.iter().map(|n| n.bound).fold(sense.worst(), |a, b| sense.flip().pick(a, b));
        let gap = match &search.incumbent {
            Some(inc) => (open - inc.value).abs(),
            None => f64::INFINITY,
        };
        SolveStatus::TimeLimit { gap }
    } else if search.incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    };
    let inc = search.incumbent.as_ref();
    Ok(SolveReport {
        status,
        sense,
        x: inc.map(|i| i.x.clone()),
        z: inc.map(|i| i.z),
        value: inc.map(|i| i.value),
        feasibility_cuts: search.pool.feasibility_count(),
        optimality_cuts: search.pool.optimality_count(),
        branches,
        nodes,
        lp_calls: search.lp_calls,
        seconds: search.start.elapsed().as_secs_f64(),
        cuts: search.pool.cuts().to_vec(),
        trace: search.trace,
    })
}

impl<'a, M: MasterOracle, S: SubproblemOracle> Search<'a, M, S> {
    fn out_of_time(&mut self) -> bool {
        if let Some(limit) = self.cfg.time_limit {
            if self.start.elapsed() >= limit {
                self.timed_out = true;
            }
        }
        self.timed_out
    }

    fn incumbent_value(&self) -> f64 {
        self.incumbent.as_ref().map_or(self.sense.worst(), |i| i.value)
    }

    /// Whether a bound leaves room for a strictly better solution.
    fn improves(&self, bound: f64) -> bool {
        let w = self.incumbent_value();
        self.sense.better(bound, w, prune_tol(w))
    }

    fn record(&mut self, partial: &[f64], phase: TracePhase, value: f64) {
        if self.cfg.trace {
            self.trace.push(TraceEntry { partial: partial.to_vec(), phase, value });
        }
    }

    fn offer(&mut self, x: Vec<f64>, z: f64, value: f64) {
        let take = match &self.incumbent {
            None => true,
            Some(inc) => {
                self.sense.better(value, inc.value, prune_tol(inc.value))
                    || ((value - inc.value).abs() <= prune_tol(inc.value) && x < inc.x)
            }
        };
        if take {
            debug!("incumbent {x:?} value {value}");
            self.incumbent = Some(Incumbent { x, z, value });
        }
    }

    /// Whether the diagram's `z` already accounts for the subproblem value.
    fn settled(&self, z: f64, rho: f64) -> bool {
        match self.sense {
            Sense::Min => z >= rho - VALUE_TOL,
            Sense::Max => z <= rho + VALUE_TOL,
        }
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<Evaluation, BendersError> {
        let key: Vec<u64> = x.iter().map(|v| (v + 0.0).to_bits()).collect();
        if let Some(e) = self.memo.get(&key) {
            return Ok(e.clone());
        }
        self.lp_calls += self.sub.lp_solves_per_evaluation();
        let e = self.sub.evaluate(x)?;
        // Optimality cuts join the pool only once they refine a diagram.
        if let Evaluation::Infeasible { cuts } = &e {
            for c in cuts {
                self.pool.insert(c.clone());
            }
        }
        self.memo.insert(key, e.clone());
        Ok(e)
    }

    /// Refines with every cut in order; `None` when no path survives.
    fn refine_all(dd: DecisionDiagram, cuts: &[CutRow]) -> Result<Option<DecisionDiagram>, BendersError> {
        let mut dd = dd;
        for c in cuts {
            match dd.refine_with_cut(c, RefineMode::Exact) {
                Ok(d) => dd = d,
                Err(DdError::InfeasibleDiagram) => return Ok(None),
                Err(e) => return Err(e.into()),
            }
        }
        Ok((!dd.is_empty()).then_some(dd))
    }

    fn replay(&self, dd: DecisionDiagram) -> Result<Option<DecisionDiagram>, BendersError> {
        if dd.is_empty() {
            return Ok(None);
        }
        Self::refine_all(dd, self.pool.cuts())
    }

    /// Builds restricted diagrams below `partial` until one yields a candidate,
    /// is exact, or the width budget runs out. Returns whether the last
    /// restricted diagram was exact, and the width it used.
    fn restricted_phase(&mut self, partial: &[f64]) -> Result<(bool, usize), BendersError> {
        let mut width = self.cfg.width;
        let mut doublings = 0;
        loop {
            let (dd, exact) = match self.master.build_restricted_dd(partial, width) {
                Ok(r) => (Some(r.dd), r.exact),
                Err(BendersError::Dd(DdError::EmptyDiagram)) => (None, false),
                Err(e) => return Err(e),
            };
            let dd = match dd {
                Some(d) => self.replay(d)?,
                None => None,
            };
            let found = match dd {
                Some(d) => self.settle_paths(d, partial)?,
                None => false,
            };
            if found || exact || self.timed_out || doublings >= self.cfg.max_width_doublings {
                return Ok((exact, width));
            }
            width *= 2;
            doublings += 1;
            info!("restricted diagram below {partial:?} ran out of candidates; width raised to {width}");
        }
    }

    /// Repeatedly takes an optimal path and refines with its cuts until a path
    /// whose `z` matches the subproblem value appears. That path becomes an
    /// incumbent candidate. Returns false when the diagram runs out of paths.
    fn settle_paths(&mut self, mut dd: DecisionDiagram, partial: &[f64]) -> Result<bool, BendersError> {
        let n = self.master.num_vars();
        let mut last: Option<(Vec<f64>, f64)> = None;
        loop {
            if self.out_of_time() {
                return Ok(false);
            }
            let path = dd.optimal_path(self.sense)?;
            let (x, z) = split(&path, n);
            if last.as_ref() == Some(&(x.clone(), z)) {
                return Err(BendersError::Stalled(format!("path {x:?} survived its own cuts")));
            }
            let cuts = match self.evaluate(&x)? {
                Evaluation::Infeasible { cuts } => cuts,
                Evaluation::Optimal { value: rho, cut } => {
                    if self.settled(z, rho) {
                        let w = path.value - z + rho;
                        self.record(partial, TracePhase::RestrictedCandidate, w);
                        self.offer(x, rho, w);
                        return Ok(true);
                    }
                    self.pool.insert(cut.clone());
                    vec![cut]
                }
            };
            match Self::refine_all(dd, &cuts)? {
                Some(d) => dd = d,
                None => return Ok(false),
            }
            last = Some((x, z));
        }
    }

    /// Bounds the node with a relaxed diagram and returns the children to explore.
    fn relaxed_phase(&mut self, node: &OpenNode, width: usize) -> Result<Vec<OpenNode>, BendersError> {
        let n = self.master.num_vars();
        let partial = &node.partial;
        let dd = match self.master.build_relaxed_dd(partial, width) {
            Ok(d) => d,
            Err(BendersError::Dd(DdError::EmptyDiagram)) => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        let Some(mut dd) = self.replay(dd)? else { return Ok(Vec::new()) };
        let mut iterations = 0;
        let mut last: Option<(Vec<f64>, f64)> = None;
        let bound = loop {
            if self.out_of_time() {
                return Ok(Vec::new());
            }
            let path = dd.optimal_path(self.sense)?;
            self.record(partial, TracePhase::RelaxedBound, path.value);
            if !self.improves(path.value) {
                return Ok(Vec::new());
            }
            if !self.cfg.relaxed_cuts || iterations >= self.cfg.relaxed_cut_cap {
                break path.value;
            }
            iterations += 1;
            let (x, z) = split(&path, n);
            if last.as_ref() == Some(&(x.clone(), z)) {
                break path.value;
            }
            let cuts = match self.evaluate(&x)? {
                Evaluation::Infeasible { cuts } => cuts,
                Evaluation::Optimal { value: rho, cut } => {
                    if self.settled(z, rho) {
                        break path.value;
                    }
                    self.pool.insert(cut.clone());
                    vec![cut]
                }
            };
            match Self::refine_all(dd, &cuts)? {
                Some(d) => dd = d,
                None => return Ok(Vec::new()),
            }
            last = Some((x, z));
        };

        if dd.first_merged_layer().is_none() {
            // Nothing was merged, so this diagram is exact below the node.
            self.settle_paths(dd, partial)?;
            return Ok(Vec::new());
        }
        let cutset = exact_cutset(&dd);
        let mut children = Vec::new();
        if cutset.layer <= partial.len() {
            let var = partial.len();
            for v in self.master.domain(var) {
                let mut p = partial.clone();
                p.push(v);
                children.push(OpenNode { partial: p, bound });
            }
        } else {
            let down = dd.values_to_terminal(self.sense);
            let mut prefixes = prefixes_to_layer(&dd, cutset.layer, self.cfg.prefix_cap)?;
            if self.cfg.branching == BranchStrategy::LongestPrefix {
                let mut best: HashMap<usize, usize> = HashMap::new();
                for (i, p) in prefixes.iter().enumerate() {
                    match best.get(&p.node) {
                        Some(&j) if !self.sense.better(p.value, prefixes[j].value, 0.0) => {}
                        _ => {
                            best.insert(p.node, i);
                        }
                    }
                }
                let keep: Vec<usize> = {
                    let mut v: Vec<usize> = best.into_values().collect();
                    v.sort_unstable();
                    v
                };
                prefixes = keep.into_iter().map(|i| prefixes[i].clone()).collect();
            }
            for p in prefixes {
                let b = p.value + down[cutset.layer][p.node];
                if self.improves(b) {
                    children.push(OpenNode { partial: p.labels, bound: b });
                }
            }
        }
        let sense = self.sense;
        children.sort_by(|a, b| {
            let ord = if sense.better(a.bound, b.bound, 0.0) {
                std::cmp::Ordering::Less
            } else if sense.better(b.bound, a.bound, 0.0) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            };
            ord.then_with(|| a.partial.partial_cmp(&b.partial).unwrap())
        });
        Ok(children)
    }
}
