use super::{DdError, DecisionDiagram, Label};
use crate::Sense;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct PathSolution {
    /// One label per arc layer; interval arcs report the chosen endpoint.
    pub assignment: Vec<f64>,
    pub value: f64,
}

/// The endpoint chosen on an interval arc and its contribution.
pub(crate) fn arc_choice(label: &Label, weight: f64, sense: Sense) -> (f64, f64) {
    match *label {
        Label::Point(v) => (v, weight),
        Label::Interval { lo, hi } => {
            let (a, b) = (weight * lo, weight * hi);
            if sense.better(b, a, 0.0) {
                (hi, b)
            } else {
                (lo, a)
            }
        }
    }
}

fn tol(v: f64) -> f64 {
    1e-9 * (1.0 + v.abs())
}

impl DecisionDiagram {
    /// Best value from every node to the terminal.
    pub fn values_to_terminal(&self, sense: Sense) -> Vec<Vec<f64>> {
        let m = self.num_arc_layers();
        let mut down: Vec<Vec<f64>> = self.nodes.iter().map(|l| vec![sense.worst(); l.len()]).collect();
        down[m][0] = 0.0;
        for k in (0..m).rev() {
            for a in &self.arcs[k] {
                let (_, w) = arc_choice(&a.label, a.weight, sense);
                let cand = w + down[k + 1][a.head];
                if sense.better(cand, down[k][a.tail], 0.0) {
                    down[k][a.tail] = cand;
                }
            }
        }
        down
    }

    /// Best value from the root to every node.
    pub fn values_from_root(&self, sense: Sense) -> Vec<Vec<f64>> {
        let m = self.num_arc_layers();
        let mut up: Vec<Vec<f64>> = self.nodes.iter().map(|l| vec![sense.worst(); l.len()]).collect();
        up[0][0] = 0.0;
        for k in 0..m {
            for a in &self.arcs[k] {
                let (_, w) = arc_choice(&a.label, a.weight, sense);
                let cand = up[k][a.tail] + w;
                if sense.better(cand, up[k + 1][a.head], 0.0) {
                    up[k + 1][a.head] = cand;
                }
            }
        }
        up
    }

    /// An optimal root-terminal path. Among optimal paths the lexicographically
    /// smallest assignment is returned.
    pub fn optimal_path(&self, sense: Sense) -> Result<PathSolution, DdError> {
        if self.is_empty() {
            return Err(DdError::EmptyDiagram);
        }
        let down = self.values_to_terminal(sense);
        let opt = down[0][0];
        let mut frontier: BTreeMap<usize, f64> = BTreeMap::new();
        frontier.insert(0, 0.0);
        let mut assignment = Vec::with_capacity(self.num_arc_layers());
        for k in 0..self.num_arc_layers() {
            let mut best_label: Option<f64> = None;
            let mut next: BTreeMap<usize, f64> = BTreeMap::new();
            for a in &self.arcs[k] {
                let Some(&prefix) = frontier.get(&a.tail) else { continue };
                let (label, w) = arc_choice(&a.label, a.weight, sense);
                let total = prefix + w + down[k + 1][a.head];
                if (total - opt).abs() > tol(opt) {
                    continue;
                }
                match best_label {
                    Some(b) if label > b => continue,
                    Some(b) if label < b => next.clear(),
                    _ => {}
                }
                best_label = Some(label);
                let val = prefix + w;
                next.entry(a.head)
                    .and_modify(|v| {
                        if sense.better(val, *v, 0.0) {
                            *v = val
                        }
                    })
                    .or_insert(val);
            }
            let label = best_label.ok_or_else(|| DdError::Malformed("optimal path lost during tracing".into()))?;
            assignment.push(label);
            frontier = next;
        }
        let value = frontier.get(&0).copied().unwrap_or(opt);
        Ok(PathSolution { assignment, value })
    }

    /// All path encodings; interval arcs contribute both endpoints.
    pub fn enumerate_solutions(&self, cap: usize) -> Result<Vec<Vec<f64>>, DdError> {
        Ok(self.enumerate_weighted(cap)?.into_iter().map(|(s, _)| s).collect())
    }

    /// All path encodings with their weights (interval endpoints scaled by the slope).
    pub fn enumerate_weighted(&self, cap: usize) -> Result<Vec<(Vec<f64>, f64)>, DdError> {
        if self.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut labels = Vec::with_capacity(self.num_arc_layers());
        let outgoing: Vec<Vec<Vec<usize>>> = (0..self.num_arc_layers()).map(|k| self.outgoing(k)).collect();
        self.dfs(0, 0, 0.0, &outgoing, &mut labels, &mut out, cap)?;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        layer: usize,
        node: usize,
        acc: f64,
        outgoing: &[Vec<Vec<usize>>],
        labels: &mut Vec<f64>,
        out: &mut Vec<(Vec<f64>, f64)>,
        cap: usize,
    ) -> Result<(), DdError> {
        if layer == self.num_arc_layers() {
            if out.len() >= cap {
                return Err(DdError::PathExplosion(cap));
            }
            out.push((labels.clone(), acc));
            return Ok(());
        }
        for &ai in &outgoing[layer][node] {
            let a = &self.arcs[layer][ai];
            let choices: Vec<f64> = match a.label {
                Label::Point(v) => vec![v],
                Label::Interval { lo, hi } if lo == hi => vec![lo],
                Label::Interval { lo, hi } => vec![lo, hi],
            };
            for l in choices {
                let w = match a.label {
                    Label::Point(_) => a.weight,
                    Label::Interval { .. } => a.weight * l,
                };
                labels.push(l);
                self.dfs(layer + 1, a.head, acc + w, outgoing, labels, out, cap)?;
                labels.pop();
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Arc, Node};
    use super::*;

    #[test]
    fn zero_path_has_zero_value() {
        let dd = DecisionDiagram::single_path(&[Label::Point(0.0), Label::Point(0.0)], &[0.0, 0.0], false).unwrap();
        let p = dd.optimal_path(Sense::Max).unwrap();
        assert_eq!(p.assignment, vec![0.0, 0.0]);
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn ties_break_lexicographically() {
        let dd = DecisionDiagram::from_paths(&[vec![1.0, 0.0], vec![0.0, 1.0]], |_, _| 1.0).unwrap();
        assert_eq!(dd.optimal_path(Sense::Max).unwrap().assignment, vec![0.0, 1.0]);
        assert_eq!(dd.optimal_path(Sense::Min).unwrap().assignment, vec![0.0, 1.0]);
    }

    #[test]
    fn interval_endpoint_follows_sense() {
        let nodes = vec![vec![Node::default()], vec![Node::default()], vec![Node::default()]];
        let arcs = vec![
            vec![Arc { tail: 0, head: 0, label: Label::Point(1.0), weight: 1.0 }],
            vec![Arc { tail: 0, head: 0, label: Label::Interval { lo: -2.0, hi: 3.0 }, weight: 1.0 }],
        ];
        let dd = DecisionDiagram::from_parts(nodes, arcs, true).unwrap();
        assert_eq!(dd.optimal_path(Sense::Max).unwrap().value, 4.0);
        assert_eq!(dd.optimal_path(Sense::Min).unwrap().value, -1.0);
        assert_eq!(dd.enumerate_solutions(10).unwrap(), vec![vec![1.0, -2.0], vec![1.0, 3.0]]);
    }

    #[test]
    fn enumeration_cap() {
        let dd = DecisionDiagram::from_paths(&[vec![0.0], vec![1.0]], |_, _| 0.0).unwrap();
        assert_eq!(dd.enumerate_solutions(1), Err(DdError::PathExplosion(1)));
    }
}
