use crate::dd::{CutRow, DdError, DecisionDiagram, Label};

/// Best value of `max z` over the diagram's solutions subject to cuts
/// `z <= alpha . x + alpha0`, computed by per-cut reward propagation.
///
/// Every non-terminal node must have exactly one incoming arc. The terminal
/// may have several; each arc into it closes a separate path.
pub fn cost_tuple_reward(dd: &DecisionDiagram, cuts: &[CutRow]) -> Result<f64, DdError> {
    if dd.has_continuous_terminal() {
        return Err(DdError::Malformed("expected a diagram without a z layer".into()));
    }
    if dd.is_empty() {
        return Err(DdError::EmptyDiagram);
    }
    let mut alphas = Vec::with_capacity(cuts.len());
    for c in cuts {
        let c = c.as_le();
        if c.z_coeff <= 0.0 {
            return Err(DdError::PropertyViolation("cost tuples need cuts of the form z <= alpha x + alpha0".into()));
        }
        let alpha: Vec<f64> = c.coeffs.iter().map(|a| -a / c.z_coeff).collect();
        alphas.push((alpha, c.rhs / c.z_coeff));
    }
    let m = dd.num_arc_layers();
    for k in 1..m {
        let mut incoming = vec![0usize; dd.nodes(k).len()];
        for a in dd.arcs(k - 1) {
            incoming[a.head] += 1;
        }
        if let Some(i) = incoming.iter().position(|&c| c >= 2) {
            return Err(DdError::PropertyViolation(format!("node {i} of layer {k} has {} incoming arcs", incoming[i])));
        }
    }
    let coef = |alpha: &Vec<f64>, k: usize| alpha.get(k).copied().unwrap_or(0.0);
    let label = |l: &Label| match *l {
        Label::Point(v) => v,
        Label::Interval { .. } => unreachable!("checked above"),
    };
    let mut reward: Vec<Vec<f64>> = vec![alphas.iter().map(|(_, a0)| *a0).collect()];
    for k in 0..m - 1 {
        let mut next = vec![Vec::new(); dd.nodes(k + 1).len()];
        for a in dd.arcs(k) {
            next[a.head] = alphas
                .iter()
                .enumerate()
                .map(|(j, (alpha, _))| reward[a.tail][j] + coef(alpha, k) * label(&a.label))
                .collect();
        }
        reward = next;
    }
    let mut best = f64::NEG_INFINITY;
    for a in dd.arcs(m - 1) {
        let acc = alphas
            .iter()
            .enumerate()
            .map(|(j, (alpha, _))| reward[a.tail][j] + coef(alpha, m - 1) * label(&a.label))
            .fold(f64::INFINITY, f64::min);
        best = best.max(acc);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::{Arc, Node};

    #[test]
    fn single_path_single_constant_cut() {
        let dd = DecisionDiagram::single_path(&[Label::Point(1.0), Label::Point(0.0)], &[0.0, 0.0], false).unwrap();
        let r = cost_tuple_reward(&dd, &[CutRow::upper_bound(&[0.0, 0.0], 5.0)]).unwrap();
        assert_eq!(r, 5.0);
    }

    #[test]
    fn shared_node_is_rejected() {
        let dd = DecisionDiagram::from_paths(&[vec![0.0, 0.0], vec![1.0, 0.0]], |_, _| 0.0).unwrap();
        assert_eq!(dd.nodes(1).len(), 1);
        assert!(matches!(
            cost_tuple_reward(&dd, &[CutRow::upper_bound(&[1.0, 1.0], 0.0)]),
            Err(DdError::PropertyViolation(_))
        ));
    }

    #[test]
    fn lower_bound_cut_is_rejected() {
        let nodes = vec![vec![Node::default()], vec![Node::default()]];
        let arcs = vec![vec![Arc { tail: 0, head: 0, label: Label::Point(0.0), weight: 0.0 }]];
        let dd = DecisionDiagram::from_parts(nodes, arcs, false).unwrap();
        assert!(cost_tuple_reward(&dd, &[CutRow::lower_bound(&[1.0], 0.0)]).is_err());
    }
}
