use super::{solve, LinearProgram, LpError, LpOutcome};
use crate::{Cmp, Sense};
use serde::{Deserialize, Serialize};

/// `constant + coeffs . x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineFn {
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

impl AffineFn {
    pub fn zero(n: usize) -> Self {
        AffineFn { constant: 0.0, coeffs: vec![0.0; n] }
    }

    pub fn constant(c: f64, n: usize) -> Self {
        AffineFn { constant: c, coeffs: vec![0.0; n] }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn scaled(&self, s: f64) -> AffineFn {
        AffineFn {
            constant: self.constant * s,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &AffineFn, s: f64) {
        self.constant += s * other.constant;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }
}

/// A row whose right-hand side is affine in the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricRow {
    pub coeffs: Vec<f64>,
    pub cmp: Cmp,
    pub rhs: AffineFn,
}

/// `opt c'y` over `y >= 0` subject to rows `a_i y (cmp) b_i(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricLp {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<ParametricRow>,
    pub num_params: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParametricOutcome {
    /// `value` is the optimum at the queried parameters. For a min problem
    /// `value(x) >= bound(x)` for every `x`; for a max problem `value(x) <= bound(x)`.
    /// Equality holds at the queried parameters.
    Optimal { value: f64, bound: AffineFn, dual: Vec<f64> },
    /// Every `x` with a feasible program satisfies `cut(x) <= 0`, while the
    /// queried parameters violate it.
    Infeasible { cut: AffineFn, ray: Vec<f64> },
}

impl ParametricLp {
    pub fn new(sense: Sense, objective: Vec<f64>, num_params: usize) -> Self {
        ParametricLp { sense, objective, rows: Vec::new(), num_params }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: AffineFn) {
        debug_assert_eq!(coeffs.len(), self.objective.len());
        debug_assert_eq!(rhs.coeffs.len(), self.num_params);
        self.rows.push(ParametricRow { coeffs, cmp, rhs });
    }

    /// The primal program at fixed parameters.
    pub fn instantiate(&self, x: &[f64]) -> LinearProgram {
        let mut lp = LinearProgram::new(self.sense, self.objective.clone());
        for row in &self.rows {
            lp.add_row(row.coeffs.clone(), row.cmp, row.rhs.eval(x));
        }
        lp
    }

    /// Row orientation turning every inequality into `>=` form.
    fn row_sign(cmp: Cmp) -> f64 {
        match cmp {
            Cmp::Le => -1.0,
            Cmp::Ge | Cmp::Eq => 1.0,
        }
    }

    /// The dual of the minimization form at fixed parameters:
    /// `max sum_i u_i b_i(x)` subject to `sum_i u_i a_ij <= c_j`, `u_i >= 0`
    /// on inequality rows, with rows and costs sign-normalized.
    pub fn dual_program(&self, x: &[f64]) -> LinearProgram {
        let ny = self.num_vars();
        let m = self.rows.len();
        let cost_sign = match self.sense {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        };
        let obj: Vec<f64> = self.rows.iter().map(|r| Self::row_sign(r.cmp) * r.rhs.eval(x)).collect();
        let mut lp = LinearProgram::new(Sense::Max, obj);
        for (i, row) in self.rows.iter().enumerate() {
            if row.cmp == Cmp::Eq {
                lp.set_bounds(i, f64::NEG_INFINITY, f64::INFINITY);
            }
        }
        for j in 0..ny {
            let coeffs: Vec<f64> = self.rows.iter().map(|r| Self::row_sign(r.cmp) * r.coeffs[j]).collect();
            debug_assert_eq!(coeffs.len(), m);
            lp.add_row(coeffs, Cmp::Le, cost_sign * self.objective[j]);
        }
        lp
    }

    /// `sum_i u_i b_i(x)` in the normalized orientation, as an affine function.
    pub fn dual_affine(&self, u: &[f64]) -> AffineFn {
        let mut f = AffineFn::zero(self.num_params);
        for (row, &ui) in self.rows.iter().zip(u) {
            if ui != 0.0 {
                f.add_scaled(&row.rhs, Self::row_sign(row.cmp) * ui);
            }
        }
        f
    }

    /// Solves the dual at `x` and turns the certificate into an affine bound or cut.
    pub fn solve_at(&self, x: &[f64]) -> Result<ParametricOutcome, LpError> {
        let dual = self.dual_program(x);
        match solve(&dual)? {
            LpOutcome::Optimal { x: u, objective, .. } => {
                let g = self.dual_affine(&u);
                let (value, bound) = match self.sense {
                    Sense::Min => (objective, g),
                    Sense::Max => (-objective, g.scaled(-1.0)),
                };
                Ok(ParametricOutcome::Optimal { value, bound, dual: u })
            }
            LpOutcome::Unbounded { ray } => {
                let cut = self.dual_affine(&ray);
                Ok(ParametricOutcome::Infeasible { cut, ray })
            }
            LpOutcome::Infeasible { .. } => Err(LpError::PrimalUnbounded),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-variable subproblem: max 2y1 + y2 s.t. y1 + y2 >= x1 + x2,
    /// 0.3y1 + 0.7y2 <= 0.1x1 + 0.3.
    fn two_var_subproblem() -> ParametricLp {
        let mut p = ParametricLp::new(Sense::Max, vec![2.0, 1.0], 2);
        p.add_row(vec![1.0, 1.0], Cmp::Ge, AffineFn { constant: 0.0, coeffs: vec![1.0, 1.0] });
        p.add_row(vec![0.3, 0.7], Cmp::Le, AffineFn { constant: 0.3, coeffs: vec![0.1, 0.0] });
        p
    }

    #[test]
    fn infeasible_point_yields_scaled_cut() {
        match two_var_subproblem().solve_at(&[1.0, 1.0]).unwrap() {
            ParametricOutcome::Infeasible { cut, .. } => {
                let s = cut.coeffs[1];
                assert!(s > 0.0);
                assert!((cut.coeffs[0] / s - 2.0 / 3.0).abs() < 1e-9);
                assert!((cut.constant / s + 1.0).abs() < 1e-9);
                assert!(cut.eval(&[1.0, 1.0]) > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn feasible_point_yields_tight_bound() {
        match two_var_subproblem().solve_at(&[0.0, 1.0]).unwrap() {
            ParametricOutcome::Optimal { value, bound, .. } => {
                assert!((value - 2.0).abs() < 1e-9);
                assert!((bound.coeffs[0] - 2.0 / 3.0).abs() < 1e-9);
                assert!(bound.coeffs[1].abs() < 1e-9);
                assert!((bound.constant - 2.0).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn instantiate_matches_dual_value() {
        let p = two_var_subproblem();
        let primal = solve(&p.instantiate(&[1.0, 0.0])).unwrap();
        match p.solve_at(&[1.0, 0.0]).unwrap() {
            ParametricOutcome::Optimal { value, .. } => {
                assert!((value - primal.objective().unwrap()).abs() < 1e-9);
                assert!((value - 8.0 / 3.0).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
