//! Dense simplex kernel with certified outcomes.
//!
//! Every outcome returned by [`solve`] has been re-checked by
//! [`verify_certificate`]. Dual values are sensitivities of the optimal
//! objective with respect to the row right-hand sides. Farkas multipliers use
//! the aggregation convention: non-negative on `<=` rows, non-positive on
//! `>=` rows, free on equalities, so that `v'Ax <= v'b` is implied by the rows.

mod parametric;
mod simplex;
mod text;

pub use parametric::{AffineFn, ParametricLp, ParametricOutcome, ParametricRow};
pub use simplex::solve;
pub use text::parse_lp;

use crate::{Cmp, Sense};
use thiserror::Error;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const OPT_TOL: f64 = 1e-9;
/// Smallest pivot magnitude accepted by the ratio test.
pub const PIVOT_TOL: f64 = 1e-9;
/// Relative tolerance of the strong duality check.
pub const DUALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("primal problem is unbounded")]
    PrimalUnbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// `opt c'x` subject to rows and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// A program with non-negative variables and no rows.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            rows: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) {
        self.rows.push(Row { coeffs, cmp, rhs });
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.lower[var] = lo;
        self.upper[var] = hi;
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed("bound vectors do not match objective".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        for (j, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("bad bounds on variable {j}")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::Malformed(format!("row {i} has {} coefficients, expected {n}", row.coeffs.len())));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(LpError::Malformed(format!("row {i} has non-finite entries")));
            }
        }
        Ok(())
    }

    pub fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        dot(&self.rows[i].coeffs, x)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        duals: Vec<f64>,
        reduced_costs: Vec<f64>,
        objective: f64,
    },
    Infeasible {
        farkas: Vec<f64>,
    },
    Unbounded {
        ray: Vec<f64>,
    },
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }

    pub fn objective(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { objective, .. } => Some(*objective),
            _ => None,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Re-checks an outcome against the program without trusting the solver.
pub fn verify_certificate(lp: &LinearProgram, outcome: &LpOutcome) -> bool {
    if lp.validate().is_err() {
        return false;
    }
    match outcome {
        LpOutcome::Optimal { x, duals, reduced_costs, objective } => {
            verify_optimal(lp, x, duals, reduced_costs, *objective)
        }
        LpOutcome::Infeasible { farkas } => verify_farkas(lp, farkas),
        LpOutcome::Unbounded { ray } => verify_ray(lp, ray),
    }
}

fn verify_optimal(lp: &LinearProgram, x: &[f64], y: &[f64], rc: &[f64], objective: f64) -> bool {
    let n = lp.num_vars();
    let m = lp.num_rows();
    if x.len() != n || y.len() != m || rc.len() != n {
        return false;
    }
    if x.iter().chain(y).chain(rc).any(|v| !v.is_finite()) {
        return false;
    }
    for j in 0..n {
        if x[j] < lp.lower[j] - FEAS_TOL * (1.0 + lp.lower[j].abs())
            || x[j] > lp.upper[j] + FEAS_TOL * (1.0 + lp.upper[j].abs())
        {
            return false;
        }
    }
    let cscale = 1.0 + max_abs(&lp.objective);
    let dual_tol = FEAS_TOL * cscale;
    // Sign of a dual that is allowed to be positive on a `>=` row.
    let ge_sign = match lp.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    for (i, row) in lp.rows.iter().enumerate() {
        let act = dot(&row.coeffs, x);
        let scale = 1.0 + row.rhs.abs() + row.coeffs.iter().zip(x).map(|(a, v)| (a * v).abs()).sum::<f64>();
        if !row.cmp.holds(act, row.rhs, FEAS_TOL * scale) {
            return false;
        }
        let signed = ge_sign * y[i];
        match row.cmp {
            Cmp::Ge if signed < -dual_tol => return false,
            Cmp::Le if signed > dual_tol => return false,
            _ => {}
        }
        if y[i].abs() * (act - row.rhs).abs() > FEAS_TOL * scale * (1.0 + y[i].abs()) {
            return false;
        }
    }
    let mut dual_obj = 0.0;
    for (i, row) in lp.rows.iter().enumerate() {
        dual_obj += y[i] * row.rhs;
    }
    for j in 0..n {
        let mut r = lp.objective[j];
        for (i, row) in lp.rows.iter().enumerate() {
            r -= row.coeffs[j] * y[i];
        }
        let col_scale = 1.0 + lp.objective[j].abs() + lp.rows.iter().zip(y).map(|(row, yi)| (row.coeffs[j] * yi).abs()).sum::<f64>();
        if (r - rc[j]).abs() > FEAS_TOL * col_scale {
            return false;
        }
        let signed = ge_sign * r;
        let tol = FEAS_TOL * col_scale;
        let at = |b: f64| b.is_finite() && (x[j] - b).abs() <= FEAS_TOL * (1.0 + b.abs());
        if signed > tol {
            if !at(lp.lower[j]) {
                return false;
            }
            dual_obj += r * lp.lower[j];
        } else if signed < -tol {
            if !at(lp.upper[j]) {
                return false;
            }
            dual_obj += r * lp.upper[j];
        } else {
            dual_obj += r * x[j];
        }
    }
    let primal = dot(&lp.objective, x);
    let rel = DUALITY_TOL * (1.0 + primal.abs());
    (primal - objective).abs() <= rel && (primal - dual_obj).abs() <= rel
}

fn verify_farkas(lp: &LinearProgram, v: &[f64]) -> bool {
    if v.len() != lp.num_rows() || v.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let scale = max_abs(v);
    if scale == 0.0 {
        return false;
    }
    let v: Vec<f64> = v.iter().map(|x| x / scale).collect();
    let sign_tol = 1e-9;
    for (row, vi) in lp.rows.iter().zip(&v) {
        match row.cmp {
            Cmp::Le if *vi < -sign_tol => return false,
            Cmp::Ge if *vi > sign_tol => return false,
            _ => {}
        }
    }
    let mut rhs = 0.0;
    for (row, vi) in lp.rows.iter().zip(&v) {
        rhs += vi * row.rhs;
    }
    let mut min_lhs = 0.0;
    for j in 0..lp.num_vars() {
        let mut g = 0.0;
        let mut mag = 0.0;
        for (row, vi) in lp.rows.iter().zip(&v) {
            g += vi * row.coeffs[j];
            mag += (vi * row.coeffs[j]).abs();
        }
        let tol = 1e-9 * (1.0 + mag);
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if g > tol {
            if !lo.is_finite() {
                return false;
            }
            min_lhs += g * lo;
        } else if g < -tol {
            if !hi.is_finite() {
                return false;
            }
            min_lhs += g * hi;
        } else {
            let best = [lo, hi].iter().filter(|b| b.is_finite()).map(|b| g * b).fold(0.0_f64, f64::min);
            min_lhs += best;
        }
    }
    min_lhs - rhs > FEAS_TOL
}

fn verify_ray(lp: &LinearProgram, d: &[f64]) -> bool {
    if d.len() != lp.num_vars() || d.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let scale = max_abs(d);
    if scale == 0.0 {
        return false;
    }
    let d: Vec<f64> = d.iter().map(|x| x / scale).collect();
    let tol = FEAS_TOL;
    for row in &lp.rows {
        let a = dot(&row.coeffs, &d);
        let t = tol * (1.0 + max_abs(&row.coeffs));
        let ok = match row.cmp {
            Cmp::Le => a <= t,
            Cmp::Ge => a >= -t,
            Cmp::Eq => a.abs() <= t,
        };
        if !ok {
            return false;
        }
    }
    for j in 0..lp.num_vars() {
        if lp.lower[j].is_finite() && d[j] < -tol {
            return false;
        }
        if lp.upper[j].is_finite() && d[j] > tol {
            return false;
        }
    }
    let cd = dot(&lp.objective, &d);
    match lp.sense {
        Sense::Min => cd < -FEAS_TOL,
        Sense::Max => cd > FEAS_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var_dual() -> LinearProgram {
        let mut lp = LinearProgram::new(Sense::Min, vec![-1.0, 0.3]);
        lp.add_row(vec![-1.0, 0.3], Cmp::Ge, 2.0);
        lp.add_row(vec![-1.0, 0.7], Cmp::Ge, 1.0);
        lp
    }

    #[test]
    fn two_var_dual_at_01() {
        let lp = two_var_dual();
        let out = solve(&lp).unwrap();
        match &out {
            LpOutcome::Optimal { x, objective, .. } => {
                assert!((x[0] - 0.0).abs() < 1e-9);
                assert!((x[1] - 20.0 / 3.0).abs() < 1e-9);
                assert!((objective - 2.0).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(verify_certificate(&lp, &out));
    }

    #[test]
    fn max_zero_over_orthant() {
        let lp = LinearProgram::new(Sense::Max, vec![0.0]);
        let out = solve(&lp).unwrap();
        assert_eq!(out.objective(), Some(0.0));
        if let LpOutcome::Optimal { x, .. } = out {
            assert_eq!(x, vec![0.0]);
        }
    }

    #[test]
    fn two_var_primal_at_11_is_infeasible() {
        // max 2y1 + y2 s.t. y1 + y2 >= 2, 0.3y1 + 0.7y2 <= 0.4
        let mut lp = LinearProgram::new(Sense::Max, vec![2.0, 1.0]);
        lp.add_row(vec![1.0, 1.0], Cmp::Ge, 2.0);
        lp.add_row(vec![0.3, 0.7], Cmp::Le, 0.4);
        let out = solve(&lp).unwrap();
        match &out {
            LpOutcome::Infeasible { farkas } => {
                // -(1) on the >= row and 10/3 on the <= row, up to scale.
                let ratio = farkas[1] / -farkas[0];
                assert!((ratio - 10.0 / 3.0).abs() < 1e-9, "{farkas:?}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(verify_certificate(&lp, &out));
    }

    #[test]
    fn negative_multiplier_on_le_row_rejected() {
        let mut lp = LinearProgram::new(Sense::Min, vec![0.0]);
        lp.add_row(vec![1.0], Cmp::Le, -1.0);
        assert!(verify_certificate(&lp, &LpOutcome::Infeasible { farkas: vec![1.0] }));
        assert!(!verify_certificate(&lp, &LpOutcome::Infeasible { farkas: vec![-1.0] }));
    }

    #[test]
    fn zero_ray_rejected() {
        let lp = LinearProgram::new(Sense::Max, vec![1.0]);
        assert!(!verify_certificate(&lp, &LpOutcome::Unbounded { ray: vec![0.0] }));
        assert!(verify_certificate(&lp, &LpOutcome::Unbounded { ray: vec![1.0] }));
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(Sense::Max, vec![1.0, 1.0]);
        lp.add_row(vec![1.0, -1.0], Cmp::Le, 1.0);
        let out = solve(&lp).unwrap();
        assert!(matches!(out, LpOutcome::Unbounded { .. }));
    }

    #[test]
    fn free_and_mirrored_variables() {
        // min x - y, x free, y <= 3, x >= y - 2, x + y >= -10
        let mut lp = LinearProgram::new(Sense::Min, vec![1.0, -1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_bounds(1, f64::NEG_INFINITY, 3.0);
        lp.add_row(vec![1.0, -1.0], Cmp::Ge, -2.0);
        lp.add_row(vec![1.0, 1.0], Cmp::Ge, -10.0);
        let out = solve(&lp).unwrap();
        assert!((out.objective().unwrap() + 2.0).abs() < 1e-9);
    }

    #[test]
    fn boxed_variables_and_equality() {
        // max x + 2y, x in [1, 4], y in [-1, 2], x + y = 3
        let mut lp = LinearProgram::new(Sense::Max, vec![1.0, 2.0]);
        lp.set_bounds(0, 1.0, 4.0);
        lp.set_bounds(1, -1.0, 2.0);
        lp.add_row(vec![1.0, 1.0], Cmp::Eq, 3.0);
        let out = solve(&lp).unwrap();
        assert!((out.objective().unwrap() - 5.0).abs() < 1e-9);
    }
}
