use super::{Arc, DdError, DecisionDiagram, Label, Node};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

pub const DD_JSON_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdFile {
    pub version: u32,
    pub continuous_terminal: bool,
    pub layers: Vec<LayerFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerFile {
    pub nodes: Vec<NodeFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFile {
    pub id: usize,
    pub merged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    /// Arcs leaving this node.
    pub arcs: Vec<ArcFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcFile {
    pub tail: usize,
    pub head: usize,
    pub label: Label,
    pub weight: f64,
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.6}").trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

impl DecisionDiagram {
    pub fn to_file(&self) -> DdFile {
        let m = self.num_arc_layers();
        let layers = (0..=m)
            .map(|k| {
                let outgoing = if k < m { self.outgoing(k) } else { vec![Vec::new(); 1] };
                LayerFile {
                    nodes: self.nodes[k]
                        .iter()
                        .enumerate()
                        .map(|(i, n)| NodeFile {
                            id: i,
                            merged: n.merged,
                            state: n.state.clone(),
                            arcs: outgoing[i]
                                .iter()
                                .map(|&ai| {
                                    let a = &self.arcs[k][ai];
                                    ArcFile { tail: a.tail, head: a.head, label: a.label, weight: a.weight }
                                })
                                .collect(),
                        })
                        .collect(),
                }
            })
            .collect();
        DdFile { version: DD_JSON_VERSION, continuous_terminal: self.continuous_terminal, layers }
    }

    pub fn from_file(file: &DdFile) -> Result<Self, DdError> {
        if file.version != DD_JSON_VERSION {
            return Err(DdError::Malformed(format!("unsupported version {}", file.version)));
        }
        if file.layers.len() < 2 {
            return Err(DdError::Malformed("need at least two node layers".into()));
        }
        let nodes: Vec<Vec<Node>> = file
            .layers
            .iter()
            .map(|l| l.nodes.iter().map(|n| Node { merged: n.merged, state: n.state.clone() }).collect())
            .collect();
        let arcs: Vec<Vec<Arc>> = file.layers[..file.layers.len() - 1]
            .iter()
            .map(|l| {
                l.nodes
                    .iter()
                    .flat_map(|n| n.arcs.iter().map(|a| Arc { tail: a.tail, head: a.head, label: a.label, weight: a.weight }))
                    .collect()
            })
            .collect();
        Self::from_parts(nodes, arcs, file.continuous_terminal)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("diagram serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, DdError> {
        let file: DdFile = serde_json::from_str(text).map_err(|e| DdError::Malformed(e.to_string()))?;
        Self::from_file(&file)
    }

    /// Graphviz export. Zero-labelled arcs are dashed.
    pub fn to_dot(&self) -> String {
        let m = self.num_arc_layers();
        let mut s = String::from("digraph dd {\n  rankdir=TB;\n  node [shape=ellipse];\n");
        let name = |k: usize, i: usize| format!("n{k}_{i}");
        let _ = writeln!(s, "  {} [label=\"r\"];", name(0, 0));
        if self.is_empty() {
            s.push_str("}\n");
            return s;
        }
        for k in 1..=m {
            for (i, n) in self.nodes[k].iter().enumerate() {
                let text = if k == m {
                    "t".to_string()
                } else {
                    n.state.clone().unwrap_or_else(|| format!("u{k}_{i}"))
                };
                let style = if n.merged { ", style=filled, fillcolor=lightgray" } else { "" };
                let _ = writeln!(s, "  {} [label=\"{}\"{}];", name(k, i), text, style);
            }
        }
        for k in 0..m {
            for a in &self.arcs[k] {
                let (label, dashed) = match a.label {
                    Label::Point(v) => (fmt_num(v), v == 0.0),
                    Label::Interval { lo, hi } => (format!("[{}, {}]", fmt_num(lo), fmt_num(hi)), false),
                };
                let style = if dashed { ", style=dashed" } else { "" };
                let _ = writeln!(
                    s,
                    "  {} -> {} [label=\"{} / {}\"{}];",
                    name(k, a.tail),
                    name(k + 1, a.head),
                    label,
                    fmt_num(a.weight),
                    style
                );
            }
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let dd = DecisionDiagram::from_paths(&[vec![0.0, 1.0], vec![1.0, 1.0]], |k, l| k as f64 + l)
            .unwrap()
            .append_z_layer(-1.0, 1.0, 1.0)
            .unwrap();
        let back = DecisionDiagram::from_json(&dd.to_json()).unwrap();
        assert_eq!(back, dd);
    }

    #[test]
    fn dot_is_stable() {
        let dd = DecisionDiagram::from_paths(&[vec![0.0, 1.0], vec![1.0, 0.0]], |_, _| 1.0).unwrap();
        assert_eq!(dd.to_dot(), dd.to_dot());
        assert!(dd.to_dot().contains("style=dashed"));
    }
}
