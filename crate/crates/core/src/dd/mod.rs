//! Layered weighted decision diagrams.
//!
//! A diagram with `m` arc layers has `m + 1` node layers. Layer 0 holds only
//! the root and layer `m` only the terminal. Arc layer `k` assigns the value
//! of variable `k`. When the diagram has a continuous terminal layer, its last
//! arc layer carries interval labels for the value variable `z` and its
//! weights act as per-unit slopes on the chosen endpoint.

mod cut;
mod io;
mod path;
mod refine;

pub use cut::{CutRow, CUT_TOL};
pub use io::{DdFile, DD_JSON_VERSION};
pub use path::PathSolution;
pub use refine::RefineMode;

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DdError {
    #[error("diagram has no root-terminal path")]
    EmptyDiagram,
    #[error("refinement removed every path")]
    InfeasibleDiagram,
    #[error("path count exceeds cap {0}")]
    PathExplosion(usize),
    #[error("malformed diagram: {0}")]
    Malformed(String),
    #[error("diagram property violated: {0}")]
    PropertyViolation(String),
    #[error("cut has a z term but the diagram has no continuous layer")]
    NoContinuousLayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Point(f64),
    Interval { lo: f64, hi: f64 },
}

impl Label {
    fn key(&self) -> (u8, u64, u64) {
        match *self {
            Label::Point(v) => (0, norm_bits(v), 0),
            Label::Interval { lo, hi } => (1, norm_bits(lo), norm_bits(hi)),
        }
    }
}

pub(crate) fn norm_bits(v: f64) -> u64 {
    if v == 0.0 {
        0.0_f64.to_bits()
    } else {
        v.to_bits()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub label: Label,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Node {
    /// Set on nodes produced by a relaxation merge.
    pub merged: bool,
    /// Optional human-readable state, shown in exports.
    pub state: Option<String>,
}

impl Node {
    pub fn with_state(state: impl Into<String>) -> Self {
        Node { merged: false, state: Some(state.into()) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionDiagram {
    nodes: Vec<Vec<Node>>,
    arcs: Vec<Vec<Arc>>,
    continuous_terminal: bool,
}

impl DecisionDiagram {
    /// Assembles a diagram and removes nodes that lie on no root-terminal path.
    pub fn from_parts(nodes: Vec<Vec<Node>>, arcs: Vec<Vec<Arc>>, continuous_terminal: bool) -> Result<Self, DdError> {
        if arcs.is_empty() {
            return Err(DdError::Malformed("a diagram needs at least one arc layer".into()));
        }
        if nodes.len() != arcs.len() + 1 {
            return Err(DdError::Malformed("node layers must be one more than arc layers".into()));
        }
        if nodes[0].len() != 1 || nodes[arcs.len()].len() != 1 {
            return Err(DdError::Malformed("root and terminal layers must hold one node".into()));
        }
        let m = arcs.len();
        for (k, layer) in arcs.iter().enumerate() {
            for a in layer {
                if a.tail >= nodes[k].len() || a.head >= nodes[k + 1].len() {
                    return Err(DdError::Malformed(format!("arc endpoint out of range on layer {k}")));
                }
                if !a.weight.is_finite() {
                    return Err(DdError::Malformed(format!("non-finite weight on layer {k}")));
                }
                match a.label {
                    Label::Point(v) if !v.is_finite() => {
                        return Err(DdError::Malformed(format!("non-finite label on layer {k}")));
                    }
                    Label::Interval { lo, hi } => {
                        if !(continuous_terminal && k == m - 1) {
                            return Err(DdError::Malformed(format!("interval label on discrete layer {k}")));
                        }
                        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                            return Err(DdError::Malformed(format!("bad interval [{lo}, {hi}]")));
                        }
                    }
                    _ => {}
                }
            }
        }
        let mut dd = DecisionDiagram { nodes, arcs, continuous_terminal };
        dd.cleanup();
        Ok(dd)
    }

    /// A single path with the given labels and weights.
    pub fn single_path(labels: &[Label], weights: &[f64], continuous_terminal: bool) -> Result<Self, DdError> {
        let m = labels.len();
        let nodes = (0..=m).map(|_| vec![Node::default()]).collect();
        let arcs = (0..m)
            .map(|k| vec![Arc { tail: 0, head: 0, label: labels[k], weight: weights[k] }])
            .collect();
        Self::from_parts(nodes, arcs, continuous_terminal)
    }

    /// Builds a reduced diagram whose paths are exactly `paths`.
    pub fn from_paths(paths: &[Vec<f64>], weight: impl Fn(usize, f64) -> f64) -> Result<Self, DdError> {
        let boxes: Vec<(Vec<f64>, Vec<f64>)> = paths.iter().map(|p| (p.clone(), p.clone())).collect();
        Self::from_boxes(&boxes, weight)
    }

    /// Builds a reduced diagram with one chain per box. Each coordinate of a
    /// box becomes parallel arcs labelled with its two endpoints.
    pub fn from_boxes(boxes: &[(Vec<f64>, Vec<f64>)], weight: impl Fn(usize, f64) -> f64) -> Result<Self, DdError> {
        let m = boxes.first().map(|b| b.0.len()).ok_or_else(|| DdError::Malformed("no boxes".into()))?;
        if m == 0 || boxes.iter().any(|(lo, hi)| lo.len() != m || hi.len() != m) {
            return Err(DdError::Malformed("boxes must share a positive dimension".into()));
        }
        let mut nodes: Vec<Vec<Node>> = vec![vec![Node::default()]];
        for _ in 1..m {
            nodes.push(vec![Node::default(); boxes.len()]);
        }
        nodes.push(vec![Node::default()]);
        let mut arcs: Vec<Vec<Arc>> = vec![Vec::new(); m];
        for (b, (lo, hi)) in boxes.iter().enumerate() {
            for k in 0..m {
                let tail = if k == 0 { 0 } else { b };
                let head = if k == m - 1 { 0 } else { b };
                let mut labels = vec![lo[k]];
                if hi[k] != lo[k] {
                    labels.push(hi[k]);
                }
                for l in labels {
                    arcs[k].push(Arc { tail, head, label: Label::Point(l), weight: weight(k, l) });
                }
            }
        }
        Ok(Self::from_parts(nodes, arcs, false)?.reduce())
    }

    pub fn num_arc_layers(&self) -> usize {
        self.arcs.len()
    }

    /// Number of layers carrying point labels.
    pub fn num_point_layers(&self) -> usize {
        self.arcs.len() - usize::from(self.continuous_terminal)
    }

    pub fn has_continuous_terminal(&self) -> bool {
        self.continuous_terminal
    }

    pub fn nodes(&self, layer: usize) -> &[Node] {
        &self.nodes[layer]
    }

    pub fn arcs(&self, layer: usize) -> &[Arc] {
        &self.arcs[layer]
    }

    pub fn width(&self) -> usize {
        self.nodes.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.iter().map(Vec::len).sum()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.iter().any(Vec::is_empty)
    }

    /// Index of the first node layer containing a merged node.
    pub fn first_merged_layer(&self) -> Option<usize> {
        self.nodes.iter().position(|layer| layer.iter().any(|n| n.merged))
    }

    /// Number of root-terminal paths, with interval arcs counted once.
    pub fn path_count(&self) -> f64 {
        let mut count = vec![1.0];
        for (k, layer) in self.arcs.iter().enumerate() {
            let mut next = vec![0.0; self.nodes[k + 1].len()];
            for a in layer {
                next[a.head] += count[a.tail];
            }
            count = next;
        }
        count[0]
    }

    /// Removes nodes that are unreachable from the root or cannot reach the terminal.
    pub fn cleanup(&mut self) {
        let m = self.arcs.len();
        let mut fwd: Vec<Vec<bool>> = self.nodes.iter().map(|l| vec![false; l.len()]).collect();
        fwd[0][0] = true;
        for k in 0..m {
            for a in &self.arcs[k] {
                if fwd[k][a.tail] {
                    fwd[k + 1][a.head] = true;
                }
            }
        }
        let mut bwd: Vec<Vec<bool>> = self.nodes.iter().map(|l| vec![false; l.len()]).collect();
        bwd[m][0] = true;
        for k in (0..m).rev() {
            for a in &self.arcs[k] {
                if bwd[k + 1][a.head] {
                    bwd[k][a.tail] = true;
                }
            }
        }
        let mut remap: Vec<Vec<Option<usize>>> = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let mut map = vec![None; self.nodes[k].len()];
            let mut kept = Vec::new();
            for (i, node) in self.nodes[k].iter().enumerate() {
                let keep = k == 0 || k == m || (fwd[k][i] && bwd[k][i]);
                if keep {
                    map[i] = Some(kept.len());
                    kept.push(node.clone());
                }
            }
            self.nodes[k] = kept;
            remap.push(map);
        }
        let connected = fwd[m][0];
        for k in 0..m {
            let layer = std::mem::take(&mut self.arcs[k]);
            self.arcs[k] = if connected {
                layer
                    .into_iter()
                    .filter_map(|a| {
                        let t = remap[k][a.tail]?;
                        let h = remap[k + 1][a.head]?;
                        (fwd[k][a.tail] && bwd[k + 1][a.head]).then_some(Arc { tail: t, head: h, ..a })
                    })
                    .collect()
            } else {
                Vec::new()
            };
        }
    }

    /// Merges nodes with identical outgoing structure, bottom-up. The solution
    /// set and all path weights are unchanged.
    pub fn reduce(&self) -> Self {
        let mut dd = self.clone();
        let m = dd.arcs.len();
        for k in (1..m).rev() {
            let n = dd.nodes[k].len();
            let mut out: Vec<Vec<(u8, u64, u64, u64, usize)>> = vec![Vec::new(); n];
            for a in &dd.arcs[k] {
                let (t, l1, l2) = a.label.key();
                out[a.tail].push((t, l1, l2, norm_bits(a.weight), a.head));
            }
            let mut groups: HashMap<(bool, Vec<(u8, u64, u64, u64, usize)>), usize> = HashMap::new();
            let mut map = vec![0; n];
            let mut kept: Vec<Node> = Vec::new();
            for (i, mut sig) in out.into_iter().enumerate() {
                sig.sort_unstable();
                sig.dedup();
                let key = (dd.nodes[k][i].merged, sig);
                match groups.get(&key) {
                    Some(&g) => {
                        map[i] = g;
                        if kept[g].state != dd.nodes[k][i].state {
                            kept[g].state = None;
                        }
                    }
                    None => {
                        map[i] = kept.len();
                        groups.insert(key, kept.len());
                        kept.push(dd.nodes[k][i].clone());
                    }
                }
            }
            if kept.len() == n {
                continue;
            }
            let mut is_rep = vec![false; n];
            let mut claimed = vec![false; kept.len()];
            for i in 0..n {
                if !claimed[map[i]] {
                    claimed[map[i]] = true;
                    is_rep[i] = true;
                }
            }
            let new_out: Vec<Arc> =
                dd.arcs[k].iter().filter(|a| is_rep[a.tail]).map(|a| Arc { tail: map[a.tail], ..*a }).collect();
            dd.arcs[k] = new_out;
            let mut seen_in = std::collections::HashSet::new();
            let mut new_in = Vec::new();
            for a in &dd.arcs[k - 1] {
                let head = map[a.head];
                if seen_in.insert((a.tail, a.label.key(), norm_bits(a.weight), head)) {
                    new_in.push(Arc { head, ..*a });
                }
            }
            dd.arcs[k - 1] = new_in;
            dd.nodes[k] = kept;
        }
        dd
    }

    /// Keeps, for every node pair on the given layers, only the arcs with the
    /// smallest and the largest point label.
    pub fn reduce_interval_arcs(&self, layers: &[usize]) -> Self {
        let mut dd = self.clone();
        for &k in layers {
            if k >= dd.arcs.len() {
                continue;
            }
            let mut extremes: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
            for (idx, a) in dd.arcs[k].iter().enumerate() {
                let Label::Point(v) = a.label else { continue };
                let e = extremes.entry((a.tail, a.head)).or_insert((idx, idx));
                let lo = match dd.arcs[k][e.0].label {
                    Label::Point(x) => x,
                    _ => unreachable!(),
                };
                let hi = match dd.arcs[k][e.1].label {
                    Label::Point(x) => x,
                    _ => unreachable!(),
                };
                if v < lo {
                    e.0 = idx;
                }
                if v > hi {
                    e.1 = idx;
                }
            }
            let layer = std::mem::take(&mut dd.arcs[k]);
            dd.arcs[k] = layer
                .into_iter()
                .enumerate()
                .filter(|(idx, a)| match a.label {
                    Label::Interval { .. } => true,
                    Label::Point(_) => {
                        let e = extremes[&(a.tail, a.head)];
                        e.0 == *idx || e.1 == *idx
                    }
                })
                .map(|(_, a)| a)
                .collect();
        }
        dd
    }

    /// Replaces a group of nodes in one layer by a single merged node. Returns
    /// the new diagram and the state vector of that layer after the merge.
    pub fn merge_nodes<S: Clone>(
        &self,
        layer: usize,
        group: &[usize],
        layer_states: &[S],
        state_merge: impl FnOnce(&[S]) -> S,
    ) -> Result<(Self, Vec<S>), DdError> {
        let m = self.arcs.len();
        if layer == 0 || layer >= m {
            return Err(DdError::Malformed("cannot merge the root or terminal".into()));
        }
        let n = self.nodes[layer].len();
        if layer_states.len() != n || group.is_empty() || group.iter().any(|&g| g >= n) {
            return Err(DdError::Malformed("merge group does not match the layer".into()));
        }
        let in_group = |i: usize| group.contains(&i);
        let target = *group.iter().min().unwrap();
        let mut map = vec![0; n];
        let mut kept_nodes = Vec::new();
        let mut kept_states = Vec::new();
        let merged_state = state_merge(&group.iter().map(|&g| layer_states[g].clone()).collect::<Vec<_>>());
        for i in 0..n {
            if in_group(i) && i != target {
                continue;
            }
            map[i] = kept_nodes.len();
            if i == target {
                kept_nodes.push(Node { merged: true, state: None });
                kept_states.push(merged_state.clone());
            } else {
                kept_nodes.push(self.nodes[layer][i].clone());
                kept_states.push(layer_states[i].clone());
            }
        }
        for &g in group {
            map[g] = map[target];
        }
        let mut dd = self.clone();
        dd.nodes[layer] = kept_nodes;
        dd.arcs[layer - 1] = dedup_arcs(self.arcs[layer - 1].iter().map(|a| Arc { head: map[a.head], ..*a }));
        dd.arcs[layer] = dedup_arcs(self.arcs[layer].iter().map(|a| Arc { tail: map[a.tail], ..*a }));
        Ok((dd, kept_states))
    }

    /// Turns the terminal into an ordinary node and appends a continuous
    /// terminal layer carrying `[lo, hi]` with the given slope.
    pub fn append_z_layer(&self, lo: f64, hi: f64, slope: f64) -> Result<Self, DdError> {
        if self.continuous_terminal {
            return Err(DdError::Malformed("diagram already has a continuous layer".into()));
        }
        let mut nodes = self.nodes.clone();
        let mut arcs = self.arcs.clone();
        nodes.push(vec![Node::default()]);
        arcs.push(vec![Arc { tail: 0, head: 0, label: Label::Interval { lo, hi }, weight: slope }]);
        Self::from_parts(nodes, arcs, true)
    }

    /// For each node, the arcs leaving it, by arc index.
    pub(crate) fn outgoing(&self, layer: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes[layer].len()];
        for (i, a) in self.arcs[layer].iter().enumerate() {
            out[a.tail].push(i);
        }
        out
    }
}

fn dedup_arcs(arcs: impl Iterator<Item = Arc>) -> Vec<Arc> {
    let mut seen = std::collections::HashSet::new();
    arcs.filter(|a| seen.insert((a.tail, a.head, a.label.key(), norm_bits(a.weight)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_paths() -> DecisionDiagram {
        DecisionDiagram::from_paths(&[vec![0.0, 0.0], vec![1.0, 1.0]], |_, l| l).unwrap()
    }

    #[test]
    fn from_paths_round_trip() {
        let paths = vec![vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]];
        let dd = DecisionDiagram::from_paths(&paths, |_, _| 0.0).unwrap();
        let mut sols = dd.enumerate_solutions(100).unwrap();
        sols.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect = paths.clone();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(sols, expect);
    }

    #[test]
    fn reduce_merges_equal_suffixes() {
        let dd = DecisionDiagram::from_paths(&[vec![0.0, 0.0], vec![1.0, 0.0]], |_, _| 0.0).unwrap();
        assert_eq!(dd.width(), 1);
    }

    #[test]
    fn parallel_arcs_keep_extremes() {
        let nodes = vec![vec![Node::default()], vec![Node::default()], vec![Node::default()]];
        let mk = |l: f64| Arc { tail: 0, head: 0, label: Label::Point(l), weight: l };
        let arcs = vec![vec![mk(0.0), mk(0.5), mk(1.0)], vec![mk(2.0)]];
        let dd = DecisionDiagram::from_parts(nodes, arcs, false).unwrap();
        let red = dd.reduce_interval_arcs(&[0]);
        let labels: Vec<Label> = red.arcs(0).iter().map(|a| a.label).collect();
        assert_eq!(labels, vec![Label::Point(0.0), Label::Point(1.0)]);
        assert_eq!(red.arcs(1).len(), 1);
    }

    #[test]
    fn merge_whole_layer_keeps_paths() {
        let dd = two_paths();
        assert_eq!(dd.width(), 2);
        let (merged, states) = dd.merge_nodes(1, &[0, 1], &[1u32, 2u32], |s| s.iter().copied().max().unwrap()).unwrap();
        assert_eq!(merged.nodes(1).len(), 1);
        assert_eq!(states, vec![2]);
        let sols = merged.enumerate_solutions(100).unwrap();
        assert!(sols.contains(&vec![0.0, 0.0]));
        assert!(sols.contains(&vec![1.0, 1.0]));
        assert_eq!(merged.first_merged_layer(), Some(1));
    }

    #[test]
    fn cleanup_removes_dangling() {
        let nodes = vec![vec![Node::default()], vec![Node::default(), Node::default()], vec![Node::default()]];
        let arcs = vec![
            vec![
                Arc { tail: 0, head: 0, label: Label::Point(0.0), weight: 0.0 },
                Arc { tail: 0, head: 1, label: Label::Point(1.0), weight: 0.0 },
            ],
            vec![Arc { tail: 0, head: 0, label: Label::Point(0.0), weight: 0.0 }],
        ];
        let dd = DecisionDiagram::from_parts(nodes, arcs, false).unwrap();
        assert_eq!(dd.nodes(1).len(), 1);
        assert_eq!(dd.arcs(0).len(), 1);
    }

    #[test]
    fn interval_rejected_on_discrete_layer() {
        let r = DecisionDiagram::single_path(&[Label::Interval { lo: 0.0, hi: 1.0 }], &[1.0], false);
        assert!(r.is_err());
    }
}
