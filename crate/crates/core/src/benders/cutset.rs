use crate::dd::{DdError, DecisionDiagram, Label};

/// The deepest node layer above every merged node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCutset {
    pub layer: usize,
    pub nodes: Vec<usize>,
}

/// Last exact layer of a diagram. Without merged nodes this is the last node
/// layer before the terminal.
pub fn exact_cutset(dd: &DecisionDiagram) -> ExactCutset {
    let layer = match dd.first_merged_layer() {
        Some(k) => k.saturating_sub(1),
        None => dd.num_arc_layers().saturating_sub(1),
    };
    ExactCutset { layer, nodes: (0..dd.nodes(layer).len()).collect() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prefix {
    pub node: usize,
    pub labels: Vec<f64>,
    pub value: f64,
}

/// Every distinct root-to-node label sequence ending in `layer`.
pub fn prefixes_to_layer(dd: &DecisionDiagram, layer: usize, cap: usize) -> Result<Vec<Prefix>, DdError> {
    if dd.is_empty() || layer == 0 {
        return Ok(if dd.is_empty() { Vec::new() } else { vec![Prefix { node: 0, labels: Vec::new(), value: 0.0 }] });
    }
    let mut frontier = vec![Prefix { node: 0, labels: Vec::new(), value: 0.0 }];
    for k in 0..layer {
        let mut next = Vec::new();
        for p in &frontier {
            for a in dd.arcs(k).iter().filter(|a| a.tail == p.node) {
                let Label::Point(v) = a.label else {
                    return Err(DdError::Malformed("prefix crosses the continuous layer".into()));
                };
                let mut labels = p.labels.clone();
                labels.push(v);
                next.push(Prefix { node: a.head, labels, value: p.value + a.weight });
                if next.len() > cap {
                    return Err(DdError::PathExplosion(cap));
                }
            }
        }
        frontier = next;
    }
    frontier.sort_by(|a, b| a.labels.partial_cmp(&b.labels).unwrap().then(a.node.cmp(&b.node)));
    frontier.dedup_by(|a, b| a.labels == b.labels && a.node == b.node);
    Ok(frontier)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::{Arc, Node};

    #[test]
    fn exact_dd_cutset_is_last_layer_before_terminal() {
        let dd = DecisionDiagram::from_paths(&[vec![0.0, 1.0], vec![1.0, 0.0]], |_, v| v).unwrap();
        assert_eq!(exact_cutset(&dd).layer, 1);
    }

    #[test]
    fn fully_merged_width_one_gives_root() {
        let nodes = vec![vec![Node::default()], vec![Node { merged: true, state: None }], vec![Node::default()]];
        let p = |v: f64| Label::Point(v);
        let arcs = vec![
            vec![Arc { tail: 0, head: 0, label: p(0.0), weight: 0.0 }, Arc { tail: 0, head: 0, label: p(1.0), weight: 1.0 }],
            vec![Arc { tail: 0, head: 0, label: p(0.0), weight: 0.0 }],
        ];
        let dd = DecisionDiagram::from_parts(nodes, arcs, false).unwrap();
        assert_eq!(exact_cutset(&dd), ExactCutset { layer: 0, nodes: vec![0] });
        let pre = prefixes_to_layer(&dd, 1, 10).unwrap();
        assert_eq!(pre.len(), 2);
        assert_eq!(pre[1].labels, vec![1.0]);
        assert_eq!(pre[1].value, 1.0);
    }
}
