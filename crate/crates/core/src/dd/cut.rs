use crate::Cmp;
use serde::{Deserialize, Serialize};

/// Absolute tolerance for cut satisfaction.
pub const CUT_TOL: f64 = 1e-7;

/// `coeffs . x + z_coeff * z (sense) rhs` over the master variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRow {
    pub coeffs: Vec<f64>,
    pub z_coeff: f64,
    pub rhs: f64,
    pub sense: Cmp,
}

impl CutRow {
    /// `coeffs . x <= rhs`.
    pub fn feasibility(coeffs: Vec<f64>, rhs: f64) -> Self {
        CutRow { coeffs, z_coeff: 0.0, rhs, sense: Cmp::Le }
    }

    /// `z <= alpha . x + alpha0`.
    pub fn upper_bound(alpha: &[f64], alpha0: f64) -> Self {
        CutRow { coeffs: alpha.iter().map(|a| -a).collect(), z_coeff: 1.0, rhs: alpha0, sense: Cmp::Le }
    }

    /// `z >= alpha . x + alpha0`.
    pub fn lower_bound(alpha: &[f64], alpha0: f64) -> Self {
        CutRow { coeffs: alpha.to_vec(), z_coeff: -1.0, rhs: -alpha0, sense: Cmp::Le }
    }

    pub fn is_feasibility(&self) -> bool {
        self.z_coeff == 0.0
    }

    pub fn coeff(&self, var: usize) -> f64 {
        self.coeffs.get(var).copied().unwrap_or(0.0)
    }

    /// The same cut written with `<=`.
    pub fn as_le(&self) -> CutRow {
        match self.sense {
            Cmp::Ge => CutRow {
                coeffs: self.coeffs.iter().map(|c| -c).collect(),
                z_coeff: -self.z_coeff,
                rhs: -self.rhs,
                sense: Cmp::Le,
            },
            _ => self.clone(),
        }
    }

    pub fn lhs(&self, x: &[f64], z: f64) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.z_coeff * z
    }

    pub fn is_satisfied(&self, x: &[f64], z: f64) -> bool {
        self.sense.holds(self.lhs(x, z), self.rhs, CUT_TOL)
    }

    /// Key used to detect duplicate cuts: every number rounded to 1e-9.
    pub fn dedup_key(&self) -> Vec<i64> {
        let r = |v: f64| (v * 1e9).round() as i64;
        let c = self.as_le();
        let mut key: Vec<i64> = c.coeffs.iter().map(|v| r(*v)).collect();
        while key.last() == Some(&0) {
            key.pop();
        }
        key.push(r(c.z_coeff));
        key.push(r(c.rhs));
        key
    }
}
