use super::{GammaBounds, Generator, UcpInstance};
use crate::dd::{Arc, DdError, DecisionDiagram, Label, Node};
use std::cmp::Ordering;
use std::collections::HashMap;

/// Counter value standing for "never".
pub const INF: u32 = u32::MAX;

/// Periods since the last start-up, since the last shut-down, and the
/// shut-down counter used for start-up costs (smaller after merges).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MasterState {
    pub plus: u32,
    pub minus: u32,
    pub eq: u32,
}

impl MasterState {
    pub const ROOT: MasterState = MasterState { plus: INF, minus: INF, eq: INF };

    pub fn is_down(&self) -> bool {
        self.plus >= self.minus
    }

    /// Componentwise max, max, min.
    pub fn merge(states: &[MasterState]) -> MasterState {
        states.iter().fold(MasterState { plus: 0, minus: 0, eq: INF }, |a, s| MasterState {
            plus: a.plus.max(s.plus),
            minus: a.minus.max(s.minus),
            eq: a.eq.min(s.eq),
        })
    }

    fn fmt_counter(v: u32) -> String {
        if v == INF {
            "inf".into()
        } else {
            v.to_string()
        }
    }

    pub fn label(&self, with_eq: bool) -> String {
        if with_eq {
            format!("({},{},{})", Self::fmt_counter(self.plus), Self::fmt_counter(self.minus), Self::fmt_counter(self.eq))
        } else {
            format!("({},{})", Self::fmt_counter(self.plus), Self::fmt_counter(self.minus))
        }
    }

    /// Outgoing arcs as `(label, next state, weight)`.
    pub fn transitions(&self, g: &Generator) -> Vec<(f64, MasterState, f64)> {
        let inc = |v: u32| v.saturating_add(1);
        let mut out = Vec::with_capacity(2);
        if self.is_down() {
            out.push((0.0, MasterState { plus: inc(self.plus), minus: inc(self.minus), eq: inc(self.eq) }, 0.0));
            if self.minus >= g.min_down {
                let down = (self.eq != INF).then_some(self.eq);
                let w = g.fixed_cost + g.startup_cost(down);
                out.push((1.0, MasterState { plus: 1, minus: inc(self.minus), eq: inc(self.eq) }, w));
            }
        } else {
            if self.plus >= g.min_up {
                out.push((0.0, MasterState { plus: inc(self.plus), minus: 1, eq: 1 }, 0.0));
            }
            out.push((1.0, MasterState { plus: inc(self.plus), minus: inc(self.minus), eq: inc(self.eq) }, g.fixed_cost));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Width {
    Exact,
    Restricted(usize),
    Relaxed(usize),
}

#[derive(Clone, Copy)]
struct Slot {
    state: MasterState,
    dist: f64,
    merged: bool,
}

fn by_distance(a: &Slot, b: &Slot) -> Ordering {
    a.dist.partial_cmp(&b.dist).unwrap_or(Ordering::Equal).then(a.state.cmp(&b.state))
}

/// Brings a layer down to the width limit. Returns the map from old to new
/// positions (`None` for dropped nodes) and whether anything changed.
fn limit_layer(slots: Vec<Slot>, width: Width) -> (Vec<Slot>, Vec<Option<usize>>, bool) {
    let n = slots.len();
    let cap = match width {
        Width::Exact => return (slots, (0..n).map(Some).collect(), false),
        Width::Restricted(w) | Width::Relaxed(w) => w.max(1),
    };
    if n <= cap {
        return (slots, (0..n).map(Some).collect(), false);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| by_distance(&slots[a], &slots[b]));
    let mut map = vec![None; n];
    let mut kept: Vec<Slot> = Vec::new();
    match width {
        Width::Restricted(_) => {
            for &i in order.iter().take(cap) {
                map[i] = Some(kept.len());
                kept.push(slots[i]);
            }
        }
        _ => {
            // Keep the best `k` nodes and merge the rest within the down and
            // up groups, choosing the largest `k` that fits the width.
            let groups_in = |rest: &[usize]| {
                let down = rest.iter().any(|&i| slots[i].state.is_down());
                let up = rest.iter().any(|&i| !slots[i].state.is_down());
                usize::from(down) + usize::from(up)
            };
            let mut k = cap - 1;
            while k > 0 && k + groups_in(&order[k..]) > cap {
                k -= 1;
            }
            for &i in order.iter().take(k) {
                map[i] = Some(kept.len());
                kept.push(slots[i]);
            }
            for down in [true, false] {
                let group: Vec<usize> = order[k..].iter().copied().filter(|&i| slots[i].state.is_down() == down).collect();
                if group.is_empty() {
                    continue;
                }
                let states: Vec<MasterState> = group.iter().map(|&i| slots[i].state).collect();
                let dist = group.iter().map(|&i| slots[i].dist).fold(f64::INFINITY, f64::min);
                let merged = group.len() > 1 || slots[group[0]].merged;
                for &i in &group {
                    map[i] = Some(kept.len());
                }
                kept.push(Slot { state: MasterState::merge(&states), dist, merged });
            }
        }
    }
    (kept, map, true)
}

fn compile(
    inst: &UcpInstance,
    partial: &[f64],
    gamma: GammaBounds,
    width: Width,
) -> Result<(DecisionDiagram, bool), DdError> {
    let t_len = inst.periods;
    let nv = inst.num_vars();
    if partial.len() > nv {
        return Err(DdError::Malformed("partial assignment longer than the horizon".into()));
    }
    let with_eq = matches!(width, Width::Relaxed(_));
    let mut exact = true;
    let mut nodes: Vec<Vec<Node>> = vec![vec![Node::with_state(MasterState::ROOT.label(with_eq))]];
    let mut arcs: Vec<Vec<Arc>> = Vec::with_capacity(nv + 1);
    let mut layer = vec![Slot { state: MasterState::ROOT, dist: 0.0, merged: false }];
    for k in 0..nv {
        let (unit, period) = (k / t_len, k % t_len);
        let g = &inst.generators[unit];
        let mut index: HashMap<MasterState, usize> = HashMap::new();
        let mut next: Vec<Slot> = Vec::new();
        let mut layer_arcs = Vec::new();
        for (u, slot) in layer.iter().enumerate() {
            for (label, state, weight) in slot.state.transitions(g) {
                if partial.get(k).is_some_and(|&p| p != label) {
                    continue;
                }
                let boundary = period + 1 == t_len && unit + 1 < inst.num_units();
                let state = if boundary { MasterState::ROOT } else { state };
                let d = slot.dist + weight;
                let head = *index.entry(state).or_insert_with(|| {
                    next.push(Slot { state, dist: d, merged: false });
                    next.len() - 1
                });
                next[head].dist = next[head].dist.min(d);
                layer_arcs.push(Arc { tail: u, head, label: Label::Point(label), weight });
            }
        }
        if next.is_empty() {
            return Err(DdError::EmptyDiagram);
        }
        let (kept, map, changed) = limit_layer(next, width);
        if changed {
            exact = false;
            layer_arcs = layer_arcs
                .into_iter()
                .filter_map(|a| map[a.head].map(|h| Arc { head: h, ..a }))
                .collect();
            layer_arcs.sort_by_key(|a| (a.tail, a.head));
            layer_arcs.dedup_by(|a, b| a.tail == b.tail && a.head == b.head && a.label == b.label && a.weight == b.weight);
        }
        nodes.push(
            kept.iter()
                .map(|s| Node { merged: s.merged, state: Some(s.state.label(with_eq)) })
                .collect(),
        );
        arcs.push(layer_arcs);
        layer = kept;
    }
    let z_arcs = (0..layer.len())
        .map(|u| Arc { tail: u, head: 0, label: Label::Interval { lo: gamma.lo, hi: gamma.hi }, weight: 1.0 })
        .collect();
    arcs.push(z_arcs);
    nodes.push(vec![Node::default()]);
    let dd = DecisionDiagram::from_parts(nodes, arcs, true)?;
    if dd.is_empty() {
        return Err(DdError::EmptyDiagram);
    }
    Ok((dd, exact))
}

/// Exact master diagram below a partial assignment.
pub fn build_master_dd(inst: &UcpInstance, partial: &[f64], gamma: GammaBounds) -> Result<DecisionDiagram, DdError> {
    Ok(compile(inst, partial, gamma, Width::Exact)?.0)
}

/// Keeps the `width` nodes closest to the root on each layer. The flag tells
/// whether no node had to be dropped.
pub fn build_restricted_master_dd(
    inst: &UcpInstance,
    partial: &[f64],
    gamma: GammaBounds,
    width: usize,
) -> Result<(DecisionDiagram, bool), DdError> {
    compile(inst, partial, gamma, Width::Restricted(width))
}

/// Merges nodes of the same up/down group when a layer exceeds `width`.
pub fn build_relaxed_master_dd(
    inst: &UcpInstance,
    partial: &[f64],
    gamma: GammaBounds,
    width: usize,
) -> Result<DecisionDiagram, DdError> {
    Ok(compile(inst, partial, gamma, Width::Relaxed(width))?.0)
}

/// Whether each unit's schedule respects its minimum up and down times.
/// Start-ups and shut-downs are read off consecutive periods, with every unit
/// down before the first period; windows are cut off at the first period.
pub fn schedule_feasible(inst: &UcpInstance, x: &[f64]) -> bool {
    let t_len = inst.periods;
    inst.generators.iter().enumerate().all(|(i, g)| {
        let s = &x[i * t_len..(i + 1) * t_len];
        let prev = |t: usize| if t == 0 { 0.0 } else { s[t - 1] };
        let start: Vec<f64> = (0..t_len).map(|t| (s[t] - prev(t)).max(0.0)).collect();
        let stop: Vec<f64> = (0..t_len).map(|t| (prev(t) - s[t]).max(0.0)).collect();
        (0..t_len).all(|t| {
            let up_from = (t + 1).saturating_sub(g.min_up as usize);
            let down_from = (t + 1).saturating_sub(g.min_down as usize);
            let ups: f64 = start[up_from..=t].iter().sum();
            let downs: f64 = stop[down_from..=t].iter().sum();
            ups <= s[t] + 1e-9 && downs <= 1.0 - s[t] + 1e-9
        })
    })
}

/// Fixed plus start-up costs of a schedule.
pub fn master_cost(inst: &UcpInstance, x: &[f64]) -> f64 {
    let t_len = inst.periods;
    let mut total = 0.0;
    for (i, g) in inst.generators.iter().enumerate() {
        let s = &x[i * t_len..(i + 1) * t_len];
        let mut last_up: Option<usize> = None;
        for t in 0..t_len {
            if s[t] > 0.5 {
                total += g.fixed_cost;
                let was_up = t > 0 && s[t - 1] > 0.5;
                if !was_up {
                    let down = last_up.map(|u| (t - u - 1) as u32);
                    total += g.startup_cost(down);
                }
                last_up = Some(t);
            }
        }
    }
    total
}
