use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    /// True when `a` is strictly better than `b` by more than `tol`.
    pub fn better(self, a: f64, b: f64, tol: f64) -> bool {
        match self {
            Sense::Min => a < b - tol,
            Sense::Max => a > b + tol,
        }
    }

    /// The worst possible value for this sense.
    pub fn worst(self) -> f64 {
        match self {
            Sense::Min => f64::INFINITY,
            Sense::Max => f64::NEG_INFINITY,
        }
    }

    pub fn pick(self, a: f64, b: f64) -> f64 {
        match self {
            Sense::Min => a.min(b),
            Sense::Max => a.max(b),
        }
    }

    pub fn flip(self) -> Sense {
        match self {
            Sense::Min => Sense::Max,
            Sense::Max => Sense::Min,
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Min => "min",
            Sense::Max => "max",
        })
    }
}

impl FromStr for Sense {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "min" => Ok(Sense::Min),
            "max" => Ok(Sense::Max),
            other => Err(format!("unknown sense `{other}`")),
        }
    }
}

/// Comparison operator of a linear row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Cmp {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Cmp::Le => lhs <= rhs + tol,
            Cmp::Ge => lhs >= rhs - tol,
            Cmp::Eq => (lhs - rhs).abs() <= tol,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        }
    }
}

impl FromStr for Cmp {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "<=" => Ok(Cmp::Le),
            "=" | "==" => Ok(Cmp::Eq),
            ">=" => Ok(Cmp::Ge),
            other => Err(format!("unknown comparison `{other}`")),
        }
    }
}
