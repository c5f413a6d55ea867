use super::{Arc, CutRow, DdError, DecisionDiagram, Label, Node, CUT_TOL};
use crate::Cmp;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineMode {
    /// Split nodes on the accumulated left-hand side so the cut is enforced exactly.
    Exact,
    /// Keep the node set and filter with left-hand-side ranges.
    Relaxed,
}

/// Accumulated left-hand side of a split node; `None` once the cut holds for
/// every completion.
type Lhs = Option<f64>;

fn lhs_key(v: Lhs) -> i64 {
    match v {
        None => i64::MAX,
        Some(v) => (v * 1e9).round().clamp(-9.0e18, 9.0e18) as i64,
    }
}

impl DecisionDiagram {
    fn check_cut(&self, cut: &CutRow) -> Result<CutRow, DdError> {
        if cut.sense == Cmp::Eq {
            return Err(DdError::Malformed("equality cuts are not supported".into()));
        }
        let cut = cut.as_le();
        if cut.z_coeff != 0.0 && !self.continuous_terminal {
            return Err(DdError::NoContinuousLayer);
        }
        if cut.coeffs.iter().skip(self.num_point_layers()).any(|c| *c != 0.0) {
            return Err(DdError::Malformed("cut refers to variables beyond the diagram".into()));
        }
        Ok(cut)
    }

    /// Range of the cut contribution of one arc.
    fn contribution(cut: &CutRow, layer: usize, label: &Label) -> (f64, f64) {
        match *label {
            Label::Point(v) => {
                let c = cut.coeff(layer) * v;
                (c, c)
            }
            Label::Interval { lo, hi } => {
                let (a, b) = (cut.z_coeff * lo, cut.z_coeff * hi);
                (a.min(b), a.max(b))
            }
        }
    }

    /// Minimum and maximum cut contribution from each node to the terminal.
    fn completion_ranges(&self, cut: &CutRow) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let m = self.num_arc_layers();
        let mut lo: Vec<Vec<f64>> = self.nodes.iter().map(|l| vec![f64::INFINITY; l.len()]).collect();
        let mut hi: Vec<Vec<f64>> = self.nodes.iter().map(|l| vec![f64::NEG_INFINITY; l.len()]).collect();
        lo[m][0] = 0.0;
        hi[m][0] = 0.0;
        for k in (0..m).rev() {
            for a in &self.arcs[k] {
                let (cmin, cmax) = Self::contribution(cut, k, &a.label);
                lo[k][a.tail] = lo[k][a.tail].min(cmin + lo[k + 1][a.head]);
                hi[k][a.tail] = hi[k][a.tail].max(cmax + hi[k + 1][a.head]);
            }
        }
        (lo, hi)
    }

    /// Tightens an interval label against `lhs + z_coeff * z <= rhs`.
    fn tighten(cut: &CutRow, lhs: f64, label: Label) -> Option<Label> {
        let Label::Interval { mut lo, mut hi } = label else { return Some(label) };
        if cut.z_coeff == 0.0 {
            return (lhs <= cut.rhs + CUT_TOL).then_some(label);
        }
        let bound = (cut.rhs - lhs) / cut.z_coeff;
        if cut.z_coeff > 0.0 {
            hi = hi.min(bound);
        } else {
            lo = lo.max(bound);
        }
        if lo > hi + CUT_TOL {
            return None;
        }
        if lo > hi {
            // Within tolerance: collapse onto the tightened endpoint.
            if cut.z_coeff > 0.0 {
                lo = hi;
            } else {
                hi = lo;
            }
        }
        Some(Label::Interval { lo, hi })
    }

    /// Enforces a cut on the diagram.
    pub fn refine_with_cut(&self, cut: &CutRow, mode: RefineMode) -> Result<DecisionDiagram, DdError> {
        let cut = self.check_cut(cut)?;
        let refined = match mode {
            RefineMode::Exact => self.refine_exact(&cut)?,
            RefineMode::Relaxed => self.refine_relaxed(&cut)?,
        };
        if refined.is_empty() {
            return Err(DdError::InfeasibleDiagram);
        }
        Ok(refined.reduce())
    }

    fn refine_relaxed(&self, cut: &CutRow) -> Result<DecisionDiagram, DdError> {
        let m = self.num_arc_layers();
        let (bot, _) = self.completion_ranges(cut);
        let mut top: Vec<Vec<f64>> = self.nodes.iter().map(|l| vec![f64::INFINITY; l.len()]).collect();
        top[0][0] = 0.0;
        let mut arcs: Vec<Vec<Arc>> = Vec::with_capacity(m);
        for k in 0..m {
            let mut layer = Vec::new();
            for a in &self.arcs[k] {
                let base = top[k][a.tail];
                if !base.is_finite() {
                    continue;
                }
                let (cmin, _) = Self::contribution(cut, k, &a.label);
                if base + cmin + bot[k + 1][a.head] > cut.rhs + CUT_TOL {
                    continue;
                }
                let label = match a.label {
                    Label::Interval { .. } => match Self::tighten(cut, base, a.label) {
                        Some(l) => l,
                        None => continue,
                    },
                    l => l,
                };
                top[k + 1][a.head] = top[k + 1][a.head].min(base + cmin);
                layer.push(Arc { label, ..*a });
            }
            arcs.push(layer);
        }
        DecisionDiagram::from_parts(self.nodes.clone(), arcs, self.continuous_terminal)
    }

    fn refine_exact(&self, cut: &CutRow) -> Result<DecisionDiagram, DdError> {
        let m = self.num_arc_layers();
        let (bot_lo, bot_hi) = self.completion_ranges(cut);
        let outgoing: Vec<Vec<Vec<usize>>> = (0..m).map(|k| self.outgoing(k)).collect();
        let feasibility = cut.z_coeff == 0.0;

        // Split nodes: (original node, accumulated lhs).
        let mut layer_nodes: Vec<(usize, Lhs)> = vec![(0, Some(0.0))];
        let mut nodes: Vec<Vec<Node>> = vec![vec![self.nodes[0][0].clone()]];
        let mut arcs: Vec<Vec<Arc>> = Vec::with_capacity(m);
        for k in 0..m {
            let last = k + 1 == m;
            let mut index: HashMap<(usize, i64), usize> = HashMap::new();
            let mut next: Vec<(usize, Lhs)> = Vec::new();
            let mut layer_arcs = Vec::new();
            for (tail, &(orig, lhs)) in layer_nodes.iter().enumerate() {
                for &ai in &outgoing[k][orig] {
                    let a = &self.arcs[k][ai];
                    let (label, new_lhs) = match (lhs, a.label) {
                        (None, l) => (l, None),
                        (Some(v), Label::Interval { .. }) => match Self::tighten(cut, v, a.label) {
                            Some(l) => (l, None),
                            None => continue,
                        },
                        (Some(v), Label::Point(_)) => {
                            let (c, _) = Self::contribution(cut, k, &a.label);
                            let nv = v + c;
                            if nv + bot_lo[k + 1][a.head] > cut.rhs + CUT_TOL {
                                continue;
                            }
                            if feasibility && nv + bot_hi[k + 1][a.head] <= cut.rhs + CUT_TOL {
                                (a.label, None)
                            } else {
                                (a.label, Some(nv))
                            }
                        }
                    };
                    let head = if last {
                        0
                    } else {
                        let key = (a.head, lhs_key(new_lhs));
                        *index.entry(key).or_insert_with(|| {
                            next.push((a.head, new_lhs));
                            next.len() - 1
                        })
                    };
                    layer_arcs.push(Arc { tail, head, label, weight: a.weight });
                }
            }
            arcs.push(layer_arcs);
            if last {
                nodes.push(vec![self.nodes[m][0].clone()]);
            } else {
                nodes.push(next.iter().map(|(orig, _)| self.nodes[k + 1][*orig].clone()).collect());
                layer_nodes = next;
            }
        }
        DecisionDiagram::from_parts(nodes, arcs, self.continuous_terminal)
    }
}
