use ddbd::dd::{CutRow, DecisionDiagram, RefineMode};
use ddbd::Sense;
use proptest::prelude::*;
use std::collections::BTreeSet;

type Key = Vec<i64>;

fn key(s: &[f64]) -> Key {
    s.iter().map(|v| (v * 1e6).round() as i64).collect()
}

fn solution_set(dd: &DecisionDiagram) -> BTreeSet<Key> {
    dd.enumerate_solutions(10_000).unwrap().iter().map(|s| key(s)).collect()
}

/// Distinct paths over `layers` layers with labels in `0..=3`.
fn paths() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=4).prop_flat_map(|layers| {
        prop::collection::btree_set(prop::collection::vec(0u8..=3, layers), 1..=24)
            .prop_map(|set| set.into_iter().map(|p| p.into_iter().map(f64::from).collect()).collect())
    })
}

fn cut_for(dim: usize) -> impl Strategy<Value = CutRow> {
    (prop::collection::vec(-3i32..=3, dim), -4i32..=8)
        .prop_map(|(c, r)| CutRow::feasibility(c.into_iter().map(f64::from).collect(), f64::from(r)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn paths_round_trip(ps in paths()) {
        let dd = DecisionDiagram::from_paths(&ps, |_, _| 0.0).unwrap();
        let got: Vec<Vec<f64>> = dd.enumerate_solutions(10_000).unwrap();
        let mut sorted = got.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        prop_assert_eq!(sorted.len(), got.len(), "a path was produced twice");
        prop_assert_eq!(sorted, ps);
    }

    #[test]
    fn interval_arc_reduction_keeps_linear_optimum(
        ps in paths(),
        slopes in prop::collection::vec(-5.0f64..5.0, 4),
    ) {
        let dd = DecisionDiagram::from_paths(&ps, |k, v| slopes[k] * v).unwrap();
        let layers: Vec<usize> = (0..dd.num_arc_layers()).collect();
        let reduced = dd.reduce_interval_arcs(&layers);
        for sense in [Sense::Min, Sense::Max] {
            let a = dd.optimal_path(sense).unwrap().value;
            let b = reduced.optimal_path(sense).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{:?}: {} vs {}", sense, a, b);
        }
    }

    #[test]
    fn exact_refinement_filters_solutions((ps, cut) in paths().prop_flat_map(|ps| {
        let dim = ps[0].len();
        (Just(ps), cut_for(dim))
    })) {
        let dd = DecisionDiagram::from_paths(&ps, |_, _| 0.0).unwrap();
        let expected: BTreeSet<Key> = ps.iter().filter(|p| cut.is_satisfied(p, 0.0)).map(|p| key(p)).collect();
        match dd.refine_with_cut(&cut, RefineMode::Exact) {
            Ok(refined) => prop_assert_eq!(solution_set(&refined), expected),
            Err(_) => prop_assert!(expected.is_empty()),
        }
    }

    #[test]
    fn relaxed_refinement_is_sandwiched((ps, cut) in paths().prop_flat_map(|ps| {
        let dim = ps[0].len();
        (Just(ps), cut_for(dim))
    })) {
        let dd = DecisionDiagram::from_paths(&ps, |_, _| 0.0).unwrap();
        let all = solution_set(&dd);
        let exact = dd.refine_with_cut(&cut, RefineMode::Exact).map(|d| solution_set(&d)).unwrap_or_default();
        let relaxed = dd.refine_with_cut(&cut, RefineMode::Relaxed).map(|d| solution_set(&d)).unwrap_or_default();
        prop_assert!(exact.is_subset(&relaxed));
        prop_assert!(relaxed.is_subset(&all));
    }

    #[test]
    fn merging_only_adds_solutions(ps in paths(), pick in any::<prop::sample::Index>(), mask in any::<u32>()) {
        let dd = DecisionDiagram::from_paths(&ps, |_, _| 0.0).unwrap();
        let inner: Vec<usize> = (1..dd.num_arc_layers()).filter(|&k| dd.nodes(k).len() >= 2).collect();
        prop_assume!(!inner.is_empty());
        let layer = inner[pick.index(inner.len())];
        let n = dd.nodes(layer).len();
        let mut group: Vec<usize> = (0..n).filter(|i| mask >> (i % 32) & 1 == 1).collect();
        if group.len() < 2 {
            group = vec![0, 1];
        }
        let states = vec![(); n];
        let (merged, _) = dd.merge_nodes(layer, &group, &states, |_| ()).unwrap();
        prop_assert!(solution_set(&dd).is_subset(&solution_set(&merged)));
        prop_assert_eq!(merged.first_merged_layer(), Some(layer));
    }
}
