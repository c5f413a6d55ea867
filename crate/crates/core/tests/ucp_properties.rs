mod common;

use common::{close, windows_hold};
use ddbd::benders::{cost_tuple_reward, EngineConfig, SolveStatus};
use ddbd::dd::{Arc, CutRow, DecisionDiagram, Label, Node, RefineMode};
use ddbd::oracle::brute_force_solve;
use ddbd::ucp::{
    build_master_dd, compute_gamma, gen_random_instance, solve_ucp, GenConfig, GenParams, Generator, Scenario,
    UcpInstance, INSTANCE_VERSION,
};
use ddbd::Sense;
use proptest::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

fn params() -> impl Strategy<Value = GenParams> {
    (1usize..=2, 2usize..=3, 1usize..=2, any::<u64>())
        .prop_map(|(units, periods, scenarios, seed)| GenParams { units, periods, scenarios, seed })
}

/// Tree whose nodes are the distinct proper prefixes of `paths`.
fn tree(paths: &[Vec<f64>]) -> DecisionDiagram {
    let m = paths[0].len();
    let mut ids: Vec<BTreeMap<Vec<i64>, usize>> = vec![BTreeMap::new(); m + 1];
    ids[0].insert(Vec::new(), 0);
    let mut arcs: Vec<Vec<Arc>> = vec![Vec::new(); m];
    let ikey = |p: &[f64]| p.iter().map(|v| *v as i64).collect::<Vec<i64>>();
    for k in 0..m {
        for p in paths {
            let tail = ids[k][&ikey(&p[..k])];
            let head = if k + 1 == m {
                0
            } else {
                let next = ids[k + 1].len();
                *ids[k + 1].entry(ikey(&p[..=k])).or_insert(next)
            };
            let arc = Arc { tail, head, label: Label::Point(p[k]), weight: 0.0 };
            if !arcs[k].contains(&arc) {
                arcs[k].push(arc);
            }
        }
    }
    let mut nodes: Vec<Vec<Node>> = ids.iter().take(m).map(|l| vec![Node::default(); l.len()]).collect();
    nodes.push(vec![Node::default()]);
    DecisionDiagram::from_parts(nodes, arcs, false).unwrap()
}

fn single_unit(min_up: u32, min_down: u32, periods: usize) -> UcpInstance {
    let g = Generator {
        fixed_cost: 5.0,
        unit_cost: 1.0,
        min_output: 0.0,
        max_output: 10.0,
        min_up,
        min_down,
        ramp_up: 10.0,
        ramp_down: 10.0,
        startup_ramp: 10.0,
        shutdown_ramp: 10.0,
        startup_costs: vec![3.0, 6.0],
        first_startup_cost: 9.0,
    };
    UcpInstance {
        version: INSTANCE_VERSION,
        periods,
        generators: vec![g],
        scenarios: vec![Scenario { prob: 1.0, demand: vec![0.0; periods], reserve: vec![0.0; periods] }],
    }
}

/// Node reached by following `prefix` from the root of a diagram whose
/// layers carry one arc per label and tail.
fn follow(dd: &DecisionDiagram, prefix: &[f64]) -> Option<usize> {
    let mut node = 0;
    for (k, &v) in prefix.iter().enumerate() {
        node = dd.arcs(k).iter().find(|a| a.tail == node && a.label == Label::Point(v))?.head;
    }
    Some(node)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn emitted_cuts_hold_at_true_values(p in params()) {
        let inst = gen_random_instance(p, &GenConfig::default());
        let oracle = brute_force_solve(&inst).unwrap();
        let report = solve_ucp(&inst, &EngineConfig::default()).unwrap();
        for cut in &report.cuts {
            for row in &oracle.table {
                if cut.is_feasibility() {
                    if row.feasible {
                        prop_assert!(cut.is_satisfied(&row.x, 0.0), "{:?} cuts off {:?}", cut, row.x);
                    }
                } else if let Some(z) = row.second_stage {
                    prop_assert!(cut.is_satisfied(&row.x, z), "{:?} cuts off {:?} at z = {}", cut, row.x, z);
                }
            }
        }
    }

    #[test]
    fn skipping_relaxed_phase_when_exact_keeps_answer(p in params()) {
        let inst = gen_random_instance(p, &GenConfig::default());
        let with_skip = solve_ucp(&inst, &EngineConfig::default()).unwrap();
        let cfg = EngineConfig { skip_relaxed_when_exact: false, ..EngineConfig::default() };
        let without = solve_ucp(&inst, &cfg).unwrap();
        prop_assert_eq!(with_skip.status, without.status);
        if let (Some(a), Some(b)) = (with_skip.value, without.value) {
            prop_assert!(close(a, b, 1e-6));
        }
    }

    #[test]
    fn master_paths_are_the_feasible_schedules(p in params()) {
        let inst = gen_random_instance(p, &GenConfig::default());
        let Ok(gamma) = compute_gamma(&inst) else { return Ok(()) };
        let n = inst.num_vars();
        let dd = build_master_dd(&inst, &[], gamma).unwrap();
        let from_dd: BTreeSet<Vec<i64>> =
            dd.enumerate_solutions(1 << 16).unwrap().iter().map(|s| s[..n].iter().map(|v| *v as i64).collect()).collect();
        let table: BTreeSet<Vec<i64>> =
            brute_force_solve(&inst).unwrap().table.iter().map(|r| r.x.iter().map(|v| *v as i64).collect()).collect();
        prop_assert_eq!(from_dd, table);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_tuple_matches_refinement_on_trees(
        paths in prop::collection::btree_set(prop::collection::vec(0u8..=2, 3), 1..=12),
        cuts in prop::collection::vec((prop::collection::vec(-4i32..=4, 3), -4i32..=6), 1..=3),
    ) {
        let paths: Vec<Vec<f64>> = paths.into_iter().map(|p| p.into_iter().map(f64::from).collect()).collect();
        let cuts: Vec<CutRow> = cuts
            .into_iter()
            .map(|(a, a0)| CutRow::upper_bound(&a.into_iter().map(f64::from).collect::<Vec<_>>(), f64::from(a0)))
            .collect();
        let dd = tree(&paths);
        let reward = cost_tuple_reward(&dd, &cuts).unwrap();
        let mut refined = dd.append_z_layer(-1000.0, 1000.0, 1.0).unwrap();
        for c in &cuts {
            refined = refined.refine_with_cut(c, RefineMode::Exact).unwrap();
        }
        prop_assert_eq!(reward, refined.optimal_path(Sense::Max).unwrap().value);
    }

    #[test]
    fn equal_states_have_equal_completions(min_up in 1u32..=3, min_down in 1u32..=3, periods in 1usize..=5) {
        let inst = single_unit(min_up, min_down, periods);
        let dd = build_master_dd(&inst, &[], compute_gamma(&inst).unwrap()).unwrap();
        let all: Vec<Vec<f64>> = (0..1u32 << periods)
            .map(|k| (0..periods).map(|t| f64::from((k >> t) & 1)).collect())
            .collect();
        for split in 1..periods {
            let mut by_node: BTreeMap<usize, BTreeSet<Vec<i64>>> = BTreeMap::new();
            let prefixes: BTreeSet<Vec<i64>> = all.iter().map(|x| x[..split].iter().map(|v| *v as i64).collect()).collect();
            for prefix in prefixes {
                let pf: Vec<f64> = prefix.iter().map(|v| *v as f64).collect();
                let Some(node) = follow(&dd, &pf) else { continue };
                let completions: BTreeSet<Vec<i64>> = all
                    .iter()
                    .filter(|x| x[..split] == pf[..] && windows_hold(x, min_up as usize, min_down as usize))
                    .map(|x| x[split..].iter().map(|v| *v as i64).collect())
                    .collect();
                match by_node.get(&node) {
                    Some(seen) => prop_assert_eq!(seen, &completions, "layer {} node {}", split, node),
                    None => {
                        by_node.insert(node, completions);
                    }
                }
            }
        }
    }
}

#[test]
fn generator_is_deterministic_and_in_range() {
    let cfg = GenConfig::default();
    let p = GenParams { units: 3, periods: 4, scenarios: 3, seed: 42 };
    assert_eq!(gen_random_instance(p, &cfg).to_json(), gen_random_instance(p, &cfg).to_json());
    let mut fixed = 0;
    let mut demands = 0;
    for seed in 0..100 {
        let inst = gen_random_instance(GenParams { units: 10, periods: 10, scenarios: 1, seed }, &cfg);
        let cap = inst.total_capacity();
        for g in &inst.generators {
            assert!((400.0..=1000.0).contains(&g.fixed_cost));
            assert_eq!(g.startup_ramp, g.ramp_up);
            assert_eq!(g.shutdown_ramp, g.ramp_down);
            fixed += 1;
        }
        for &d in &inst.scenarios[0].demand {
            assert!(d >= 0.75 * cap - 1e-9 && d <= cap + 1e-9);
            demands += 1;
        }
    }
    assert!(fixed >= 1000 && demands >= 1000);
}

#[test]
fn zero_demand_solves_to_zero_without_cuts() {
    let mut inst = gen_random_instance(GenParams { units: 2, periods: 3, scenarios: 2, seed: 1 }, &GenConfig::default());
    for s in &mut inst.scenarios {
        s.demand = vec![0.0; 3];
        s.reserve = vec![0.0; 3];
    }
    let r = solve_ucp(&inst, &EngineConfig::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert_eq!(r.value, Some(0.0));
    assert_eq!(r.feasibility_cuts + r.optimality_cuts, 0, "{r:?}");
}
