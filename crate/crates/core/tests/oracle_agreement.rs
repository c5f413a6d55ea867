use ddbd::benders::{EngineConfig, SolveStatus};
use ddbd::oracle::brute_force_solve;
use ddbd::ucp::{gen_random_instance, solve_ucp, solve_ucp_naive, GenConfig, GenParams};

fn sweep() -> Vec<GenParams> {
    let mut out = Vec::new();
    for units in 1..=3 {
        for periods in 2..=4 {
            for scenarios in 1..=3 {
                for k in 0..4 {
                    let seed = 1000 * units as u64 + 100 * periods as u64 + 10 * scenarios as u64 + k;
                    out.push(GenParams { units, periods, scenarios, seed });
                }
            }
        }
    }
    out
}

fn agree(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= 1e-6 * (1.0 + b.abs()),
        (None, None) => true,
        _ => false,
    }
}

#[test]
fn dd_bd_matches_brute_force_on_seeded_sweep() {
    let mut bad = Vec::new();
    for p in sweep() {
        let inst = gen_random_instance(p, &GenConfig::default());
        let oracle = brute_force_solve(&inst).unwrap();
        let report = solve_ucp(&inst, &EngineConfig::default()).unwrap();
        let expected = if oracle.best_cost.is_some() { SolveStatus::Optimal } else { SolveStatus::Infeasible };
        if report.status != expected || !agree(report.value, oracle.best_cost) {
            bad.push(format!("{p:?}: dd-bd {:?} {:?}, oracle {:?}", report.status, report.value, oracle.best_cost));
        }
    }
    assert!(bad.is_empty(), "{} disagreements:\n{}", bad.len(), bad.join("\n"));
}

#[test]
fn naive_bd_matches_brute_force() {
    for p in sweep().into_iter().step_by(9) {
        let inst = gen_random_instance(p, &GenConfig::default());
        let oracle = brute_force_solve(&inst).unwrap();
        let report = solve_ucp_naive(&inst).unwrap();
        assert!(agree(report.value, oracle.best_cost), "{p:?}: {:?} vs {:?}", report.value, oracle.best_cost);
    }
}

#[test]
fn optimum_does_not_depend_on_width() {
    for seed in 0..5 {
        let inst = gen_random_instance(GenParams { units: 2, periods: 3, scenarios: 2, seed }, &GenConfig::default());
        let narrow = solve_ucp(&inst, &EngineConfig { width: 1, ..EngineConfig::default() }).unwrap();
        let wide = solve_ucp(&inst, &EngineConfig { width: 1_000_000, ..EngineConfig::default() }).unwrap();
        let no_relaxed = solve_ucp(&inst, &EngineConfig { relaxed_cuts: false, ..EngineConfig::default() }).unwrap();
        assert!(agree(narrow.value, wide.value) && agree(no_relaxed.value, wide.value));
    }
}
