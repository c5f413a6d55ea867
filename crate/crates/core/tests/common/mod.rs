//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use ddbd::lp::LinearProgram;
use ddbd::ucp::{gen_random_instance, GenConfig, GenParams, UcpInstance};
use ddbd::{Cmp, Sense};
use std::path::PathBuf;

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

/// Seeded instances over every size combination with n in 1..=3, T in 2..=4
/// and 1..=3 scenarios, `per_size` seeds each.
pub fn seeded_sweep(per_size: u64) -> Vec<(GenParams, UcpInstance)> {
    seeded_sweep_with(per_size, &GenConfig::default())
}

pub fn seeded_sweep_with(per_size: u64, cfg: &GenConfig) -> Vec<(GenParams, UcpInstance)> {
    let mut out = Vec::new();
    for units in 1..=3 {
        for periods in 2..=4 {
            for scenarios in 1..=3 {
                for k in 0..per_size {
                    let seed = 1000 * units as u64 + 100 * periods as u64 + 10 * scenarios as u64 + k;
                    let p = GenParams { units, periods, scenarios, seed };
                    out.push((p, gen_random_instance(p, cfg)));
                }
            }
        }
    }
    out
}

/// Result of enumerating all basic solutions of a bounded LP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexOptimum {
    Optimal(f64),
    Infeasible,
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                if f != 0.0 {
                    for k in c..n {
                        a[r][k] -= f * a[c][k];
                    }
                    b[r] -= f * b[c];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        combinations(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Optimum of an LP with finite variable bounds by trying every basis of
/// tight constraints. Exponential; meant for a handful of variables.
pub fn vertex_enumeration(lp: &LinearProgram) -> VertexOptimum {
    let n = lp.objective.len();
    assert!(lp.lower.iter().chain(&lp.upper).all(|v| v.is_finite()), "bounds must be finite");
    let mut planes: Vec<(Vec<f64>, f64)> = lp.rows.iter().map(|r| (r.coeffs.clone(), r.rhs)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.lower[j]));
        planes.push((e, lp.upper[j]));
    }
    let feasible = |x: &[f64]| {
        let tol = 1e-7;
        lp.rows.iter().all(|r| {
            let lhs: f64 = r.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let t = tol * (1.0 + r.rhs.abs());
            match r.cmp {
                Cmp::Le => lhs <= r.rhs + t,
                Cmp::Ge => lhs >= r.rhs - t,
                Cmp::Eq => (lhs - r.rhs).abs() <= t,
            }
        }) && x.iter().enumerate().all(|(j, v)| *v >= lp.lower[j] - tol && *v <= lp.upper[j] + tol)
    };
    let mut bases = Vec::new();
    combinations(planes.len(), n, 0, &mut Vec::new(), &mut bases);
    let mut best: Option<f64> = None;
    for basis in bases {
        let a = basis.iter().map(|&i| planes[i].0.clone()).collect();
        let b = basis.iter().map(|&i| planes[i].1).collect();
        let Some(x) = solve_square(a, b) else { continue };
        if !feasible(&x) {
            continue;
        }
        let v: f64 = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
        best = Some(match (best, lp.sense) {
            (None, _) => v,
            (Some(b), Sense::Min) => b.min(v),
            (Some(b), Sense::Max) => b.max(v),
        });
    }
    best.map_or(VertexOptimum::Infeasible, VertexOptimum::Optimal)
}

/// Minimum up and down time check written directly from the start-up and
/// shut-down indicators of a single unit's schedule.
pub fn windows_hold(x: &[f64], min_up: usize, min_down: usize) -> bool {
    let t_len = x.len();
    let prev = |t: usize| if t == 0 { 0.0 } else { x[t - 1] };
    let y: Vec<f64> = (0..t_len).map(|t| (x[t] - prev(t)).max(0.0)).collect();
    let ybar: Vec<f64> = (0..t_len).map(|t| (prev(t) - x[t]).max(0.0)).collect();
    (0..t_len).all(|t| {
        let up: f64 = ((t + 1).saturating_sub(min_up)..=t).map(|s| y[s]).sum();
        let down: f64 = ((t + 1).saturating_sub(min_down)..=t).map(|s| ybar[s]).sum();
        up <= x[t] && down <= 1.0 - x[t]
    })
}
