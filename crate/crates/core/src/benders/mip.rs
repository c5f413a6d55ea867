//! Bounded mixed-integer programs split into an integer master and a linear
//! subproblem over the continuous variables.

use super::{
    dd_bd_solve, naive_bd_solve, refinement_snapshots, BendersError, EngineConfig, Evaluation, MasterOracle, Restricted, SolveReport,
    SubproblemOracle,
};
use crate::dd::{Arc, CutRow, DdError, DecisionDiagram, Label, Node};
use crate::lp::{self, AffineFn, LinearProgram, LpOutcome, ParametricLp, ParametricOutcome};
use crate::{Cmp, Sense};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

const ROW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerVar {
    pub lo: i64,
    pub hi: i64,
    #[serde(default)]
    pub obj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousVar {
    #[serde(default)]
    pub obj: f64,
}

/// `x . coeffs_x + y . coeffs_y (sense) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipRow {
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub y: Vec<f64>,
    pub sense: Cmp,
    pub rhs: f64,
}

/// `opt obj_x . x + obj_y . y` over integer `x` in boxes and `y >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MipInstance {
    pub kind: MipKind,
    pub sense: Sense,
    pub integer_vars: Vec<IntegerVar>,
    #[serde(default)]
    pub continuous_vars: Vec<ContinuousVar>,
    #[serde(default)]
    pub rows: Vec<MipRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MipKind {
    Mip,
}

impl MipInstance {
    pub fn from_json(text: &str) -> Result<Self, BendersError> {
        let mut inst: MipInstance =
            serde_json::from_str(text).map_err(|e| BendersError::InvalidModel(e.to_string()))?;
        inst.normalize()?;
        Ok(inst)
    }

    /// Pads short coefficient rows with zeros and checks the data.
    pub fn normalize(&mut self) -> Result<(), BendersError> {
        let (nx, ny) = (self.integer_vars.len(), self.continuous_vars.len());
        if nx == 0 {
            return Err(BendersError::InvalidModel("at least one integer variable is required".into()));
        }
        for v in &self.integer_vars {
            if v.lo > v.hi {
                return Err(BendersError::InvalidModel(format!("empty domain [{}, {}]", v.lo, v.hi)));
            }
        }
        for (i, r) in self.rows.iter_mut().enumerate() {
            if r.x.len() > nx || r.y.len() > ny {
                return Err(BendersError::InvalidModel(format!("row {i} has too many coefficients")));
            }
            if !r.rhs.is_finite() || r.x.iter().chain(&r.y).any(|v| !v.is_finite()) {
                return Err(BendersError::InvalidModel(format!("row {i} has a non-finite entry")));
            }
            r.x.resize(nx, 0.0);
            r.y.resize(ny, 0.0);
        }
        Ok(())
    }

    pub fn num_integer(&self) -> usize {
        self.integer_vars.len()
    }

    fn is_master_row(r: &MipRow) -> bool {
        r.y.iter().all(|&v| v == 0.0)
    }

    pub fn master_rows(&self) -> impl Iterator<Item = &MipRow> {
        self.rows.iter().filter(|r| Self::is_master_row(r))
    }

    pub fn master_cost(&self, x: &[f64]) -> f64 {
        self.integer_vars.iter().zip(x).map(|(v, x)| v.obj * x).sum()
    }

    pub fn master_feasible(&self, x: &[f64]) -> bool {
        self.master_rows().all(|r| r.sense.holds(lp::dot(&r.x, x), r.rhs, ROW_TOL))
    }

    /// The subproblem in `y` with right-hand sides affine in `x`.
    pub fn subproblem(&self) -> ParametricLp {
        let nx = self.num_integer();
        let obj = self.continuous_vars.iter().map(|v| v.obj).collect();
        let mut p = ParametricLp::new(self.sense, obj, nx);
        for r in self.rows.iter().filter(|r| !Self::is_master_row(r)) {
            let rhs = AffineFn { constant: r.rhs, coeffs: r.x.iter().map(|a| -a).collect() };
            p.add_row(r.y.clone(), r.sense, rhs);
        }
        p
    }

    /// Bounds on the subproblem value from the relaxation over `x` in its box.
    pub fn value_bounds(&self) -> Result<Option<(f64, f64)>, BendersError> {
        let (nx, ny) = (self.num_integer(), self.continuous_vars.len());
        if ny == 0 {
            return Ok(Some((0.0, 0.0)));
        }
        let mut obj = vec![0.0; nx];
        obj.extend(self.continuous_vars.iter().map(|v| v.obj));
        let mut out = [0.0; 2];
        for (slot, sense) in [Sense::Min, Sense::Max].into_iter().enumerate() {
            let mut prog = LinearProgram::new(sense, obj.clone());
            for (j, v) in self.integer_vars.iter().enumerate() {
                prog.set_bounds(j, v.lo as f64, v.hi as f64);
            }
            for r in &self.rows {
                let mut coeffs = r.x.clone();
                coeffs.extend(&r.y);
                prog.add_row(coeffs, r.sense, r.rhs);
            }
            match lp::solve(&prog)? {
                LpOutcome::Optimal { objective, .. } => out[slot] = objective,
                LpOutcome::Infeasible { .. } => return Ok(None),
                LpOutcome::Unbounded { .. } => {
                    return Err(BendersError::InvalidModel("the continuous part has an unbounded objective".into()))
                }
            }
        }
        Ok(Some((out[0], out[1])))
    }
}

/// Node state: per master row, the range of accumulated left-hand sides.
#[derive(Debug, Clone, PartialEq)]
struct RowState {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl RowState {
    fn key(&self) -> Vec<i64> {
        self.lo.iter().chain(&self.hi).map(|v| (v * 1e9).round() as i64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Width {
    Exact,
    Restricted(usize),
    Relaxed(usize),
}

pub struct MipMaster {
    inst: MipInstance,
    rows: Vec<MipRow>,
    zlo: f64,
    zhi: f64,
}

impl MipMaster {
    /// `z_bounds` must contain every attainable subproblem value.
    pub fn new(inst: &MipInstance, z_bounds: (f64, f64)) -> Self {
        MipMaster { inst: inst.clone(), rows: inst.master_rows().cloned().collect(), zlo: z_bounds.0, zhi: z_bounds.1 }
    }

    fn domain_of(&self, var: usize) -> Vec<f64> {
        let v = &self.inst.integer_vars[var];
        (v.lo..=v.hi).map(|k| k as f64).collect()
    }

    /// Smallest and largest remaining contribution of each row after `layer` variables.
    fn completion(&self, layer: usize) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .map(|r| {
                r.x[layer..].iter().zip(&self.inst.integer_vars[layer..]).fold((0.0, 0.0), |(lo, hi), (a, v)| {
                    let (p, q) = (a * v.lo as f64, a * v.hi as f64);
                    (lo + p.min(q), hi + p.max(q))
                })
            })
            .collect()
    }

    fn can_complete(&self, s: &RowState, comp: &[(f64, f64)]) -> bool {
        self.rows.iter().enumerate().all(|(i, r)| {
            let (lo, hi) = (s.lo[i] + comp[i].0, s.hi[i] + comp[i].1);
            match r.sense {
                Cmp::Le => lo <= r.rhs + ROW_TOL,
                Cmp::Ge => hi >= r.rhs - ROW_TOL,
                Cmp::Eq => lo <= r.rhs + ROW_TOL && hi >= r.rhs - ROW_TOL,
            }
        })
    }

    fn compile(&self, partial: &[f64], width: Width) -> Result<(DecisionDiagram, bool), BendersError> {
        let nx = self.inst.num_integer();
        let sense = self.inst.sense;
        let nr = self.rows.len();
        let mut exact = true;
        let mut nodes: Vec<Vec<Node>> = vec![vec![Node::default()]];
        let mut arcs: Vec<Vec<Arc>> = Vec::new();
        let mut layer: Vec<(RowState, f64, bool)> = vec![(RowState { lo: vec![0.0; nr], hi: vec![0.0; nr] }, 0.0, false)];
        for k in 0..nx {
            let comp = self.completion(k + 1);
            let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
            let mut next: Vec<(RowState, f64, bool)> = Vec::new();
            let mut layer_arcs = Vec::new();
            let values = match partial.get(k) {
                Some(&v) => vec![v],
                None => self.domain_of(k),
            };
            for (u, (s, dist, _)) in layer.iter().enumerate() {
                for &v in &values {
                    let t = RowState {
                        lo: s.lo.iter().zip(&self.rows).map(|(l, r)| l + r.x[k] * v).collect(),
                        hi: s.hi.iter().zip(&self.rows).map(|(h, r)| h + r.x[k] * v).collect(),
                    };
                    if !self.can_complete(&t, &comp) {
                        continue;
                    }
                    let w = self.inst.integer_vars[k].obj * v;
                    let d = dist + w;
                    let head = *index.entry(t.key()).or_insert_with(|| {
                        next.push((t.clone(), d, false));
                        next.len() - 1
                    });
                    if sense.better(d, next[head].1, 0.0) {
                        next[head].1 = d;
                    }
                    layer_arcs.push(Arc { tail: u, head, label: Label::Point(v), weight: w });
                }
            }
            let last = k + 1 == nx;
            let cap = match width {
                Width::Exact => usize::MAX,
                Width::Restricted(w) | Width::Relaxed(w) => w.max(1),
            };
            if !last && next.len() > cap {
                exact = false;
                let mut order: Vec<usize> = (0..next.len()).collect();
                order.sort_by(|&a, &b| {
                    let (da, db) = (next[a].1, next[b].1);
                    if sense.better(da, db, 0.0) {
                        std::cmp::Ordering::Less
                    } else if sense.better(db, da, 0.0) {
                        std::cmp::Ordering::Greater
                    } else {
                        a.cmp(&b)
                    }
                });
                let mut map = vec![usize::MAX; next.len()];
                let mut kept: Vec<(RowState, f64, bool)> = Vec::new();
                match width {
                    Width::Restricted(_) => {
                        for &i in order.iter().take(cap) {
                            map[i] = kept.len();
                            kept.push(next[i].clone());
                        }
                    }
                    _ => {
                        for &i in order.iter().take(cap - 1) {
                            map[i] = kept.len();
                            kept.push(next[i].clone());
                        }
                        let rest = &order[cap - 1..];
                        let mut merged = next[rest[0]].clone();
                        for &i in rest {
                            for r in 0..nr {
                                merged.0.lo[r] = merged.0.lo[r].min(next[i].0.lo[r]);
                                merged.0.hi[r] = merged.0.hi[r].max(next[i].0.hi[r]);
                            }
                            merged.1 = sense.pick(merged.1, next[i].1);
                            map[i] = kept.len();
                        }
                        merged.2 = true;
                        kept.push(merged);
                    }
                }
                layer_arcs = layer_arcs
                    .into_iter()
                    .filter(|a| map[a.head] != usize::MAX)
                    .map(|a| Arc { head: map[a.head], ..a })
                    .collect();
                next = kept;
            }
            if last {
                for a in &mut layer_arcs {
                    a.head = 0;
                }
                nodes.push(vec![Node::default()]);
            } else {
                nodes.push(next.iter().map(|(_, _, m)| Node { merged: *m, state: None }).collect());
            }
            arcs.push(layer_arcs);
            if next.is_empty() {
                return Err(DdError::EmptyDiagram.into());
            }
            layer = if last { vec![(next[0].0.clone(), 0.0, false)] } else { next };
        }
        let dd = DecisionDiagram::from_parts(nodes, arcs, false)?;
        if dd.is_empty() {
            return Err(DdError::EmptyDiagram.into());
        }
        Ok((dd.append_z_layer(self.zlo, self.zhi, 1.0)?, exact))
    }
}

impl MasterOracle for MipMaster {
    fn sense(&self) -> Sense {
        self.inst.sense
    }

    fn num_vars(&self) -> usize {
        self.inst.num_integer()
    }

    fn domain(&self, var: usize) -> Vec<f64> {
        self.domain_of(var)
    }

    fn build_exact_dd(&self, partial: &[f64]) -> Result<DecisionDiagram, BendersError> {
        Ok(self.compile(partial, Width::Exact)?.0)
    }

    fn build_restricted_dd(&self, partial: &[f64], width: usize) -> Result<Restricted, BendersError> {
        let (dd, exact) = self.compile(partial, Width::Restricted(width))?;
        Ok(Restricted { dd, exact })
    }

    fn build_relaxed_dd(&self, partial: &[f64], width: usize) -> Result<DecisionDiagram, BendersError> {
        Ok(self.compile(partial, Width::Relaxed(width))?.0)
    }
}

/// Scales a feasibility cut so its largest `|x|` coefficient is 1.
pub fn normalize_feasibility_cut(cut: &AffineFn) -> CutRow {
    let scale = cut.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let scale = if scale > 0.0 { scale } else { cut.constant.abs().max(1.0) };
    CutRow::feasibility(cut.coeffs.iter().map(|c| c / scale).collect(), -cut.constant / scale)
}

pub struct MipSubproblem {
    lp: ParametricLp,
}

impl MipSubproblem {
    pub fn new(inst: &MipInstance) -> Self {
        MipSubproblem { lp: inst.subproblem() }
    }
}

impl SubproblemOracle for MipSubproblem {
    fn evaluate(&self, x: &[f64]) -> Result<Evaluation, BendersError> {
        Ok(match self.lp.solve_at(x)? {
            ParametricOutcome::Optimal { value, bound, .. } => {
                let cut = match self.lp.sense {
                    Sense::Min => CutRow::lower_bound(&bound.coeffs, bound.constant),
                    Sense::Max => CutRow::upper_bound(&bound.coeffs, bound.constant),
                };
                Evaluation::Optimal { value, cut }
            }
            ParametricOutcome::Infeasible { cut, .. } => Evaluation::Infeasible { cuts: vec![normalize_feasibility_cut(&cut)] },
        })
    }
}

/// Solves a MIP with decision-diagram Benders decomposition.
pub fn solve_mip(inst: &MipInstance, cfg: &EngineConfig) -> Result<SolveReport, BendersError> {
    match inst.value_bounds()? {
        None => Ok(SolveReport::infeasible(inst.sense)),
        Some(bounds) => dd_bd_solve(&MipMaster::new(inst, bounds), &MipSubproblem::new(inst), cfg),
    }
}

/// Solves a MIP by enumerating the exact master diagram each iteration.
pub fn solve_mip_naive(inst: &MipInstance) -> Result<SolveReport, BendersError> {
    match inst.value_bounds()? {
        None => Ok(SolveReport::infeasible(inst.sense)),
        Some(bounds) => naive_bd_solve(&MipMaster::new(inst, bounds), &MipSubproblem::new(inst)),
    }
}

/// Master diagrams after each cut of `cuts`, starting from the root diagram.
pub fn mip_snapshots(inst: &MipInstance, cuts: &[CutRow]) -> Result<Vec<DecisionDiagram>, BendersError> {
    match inst.value_bounds()? {
        None => Ok(Vec::new()),
        Some(bounds) => refinement_snapshots(&MipMaster::new(inst, bounds), cuts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TWO_VAR_MIP: &str = r#"{
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
    fn master_paths_respect_master_rows() {
        let inst = MipInstance::from_json(TWO_VAR_MIP).unwrap();
        let master = MipMaster::new(&inst, (0.0, 1.0));
        let dd = master.build_exact_dd(&[]).unwrap();
        let mut xs: Vec<Vec<f64>> = dd.enumerate_solutions(100).unwrap().into_iter().map(|s| s[..2].to_vec()).collect();
        xs.dedup();
        assert_eq!(xs, vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn value_bounds_of_two_var_mip() {
        let inst = MipInstance::from_json(TWO_VAR_MIP).unwrap();
        let (_, hi) = inst.value_bounds().unwrap().unwrap();
        assert!((hi - 8.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn feasibility_cut_is_scaled_to_unit_max() {
        let inst = MipInstance::from_json(TWO_VAR_MIP).unwrap();
        match MipSubproblem::new(&inst).evaluate(&[1.0, 1.0]).unwrap() {
            Evaluation::Infeasible { cuts } => {
                let c = &cuts[0];
                assert!((c.coeffs[0] - 2.0 / 3.0).abs() < 1e-9);
                assert!((c.coeffs[1] - 1.0).abs() < 1e-9);
                assert!((c.rhs - 1.0).abs() < 1e-9);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn snapshots_shrink_with_each_cut() {
        let inst = MipInstance::from_json(TWO_VAR_MIP).unwrap();
        let report = solve_mip(&inst, &EngineConfig::default()).unwrap();
        let snaps = mip_snapshots(&inst, &report.cuts).unwrap();
        assert_eq!(snaps.len(), report.cuts.len() + 1);
        let counts: Vec<usize> = snaps.iter().map(|d| d.enumerate_solutions(1000).unwrap().len()).collect();
        assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
    }
}
