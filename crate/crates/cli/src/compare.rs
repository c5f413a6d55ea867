//! Side-by-side runs of every solution method.

use crate::input::{CliError, Model};
use ddbd::benders::mip::{solve_mip, solve_mip_naive};
use ddbd::benders::{EngineConfig, SolveReport, SolveStatus, CSV_VERSION};
use ddbd::oracle::{brute_force_mip, brute_force_solve, OracleResult};
use ddbd::ucp::{solve_ucp, solve_ucp_naive};
use rayon::prelude::*;
use std::time::Instant;

pub const METHODS: [&str; 3] = ["dd-bd", "naive-bd", "brute-force"];

/// Relative tolerance for two optima to count as equal.
pub const AGREEMENT_TOL: f64 = 1e-6;

pub struct Table {
    pub csv: String,
    /// False when two completed rows of one instance report different optima.
    pub agree: bool,
}

pub fn header() -> String {
    format!("{},agree,note", SolveReport::csv_header())
}

fn run_method(model: &Model, method: &str, cfg: &EngineConfig) -> Result<SolveReport, CliError> {
    Ok(match (model, method) {
        (Model::Ucp(inst), "dd-bd") => solve_ucp(inst, cfg)?,
        (Model::Ucp(inst), "naive-bd") => solve_ucp_naive(inst)?,
        (Model::Ucp(inst), _) => {
            let start = Instant::now();
            let r = brute_force_solve(inst)?;
            oracle_report(r, inst.scenarios.len(), start)
        }
        (Model::Mip(inst), "dd-bd") => solve_mip(inst, cfg)?,
        (Model::Mip(inst), "naive-bd") => solve_mip_naive(inst)?,
        (Model::Mip(inst), _) => {
            let start = Instant::now();
            oracle_report(brute_force_mip(inst)?, 1, start)
        }
        (Model::Diagram(_), _) => return Err(CliError::Usage("a diagram file cannot be solved".into())),
    })
}

fn oracle_report(r: OracleResult, lps_per_row: usize, start: Instant) -> SolveReport {
    let mut report = SolveReport::infeasible(r.sense);
    if let Some(v) = r.best_cost {
        report.status = SolveStatus::Optimal;
        report.value = Some(v);
        report.x = r.best_x.clone();
    }
    report.lp_calls = r.table.len() * lps_per_row;
    report.seconds = start.elapsed().as_secs_f64();
    report
}

fn completed(r: &SolveReport) -> bool {
    matches!(r.status, SolveStatus::Optimal | SolveStatus::Infeasible)
}

fn same_outcome(a: &SolveReport, b: &SolveReport) -> bool {
    match (a.value, b.value) {
        (Some(x), Some(y)) => (x - y).abs() <= AGREEMENT_TOL * (1.0 + x.abs().max(y.abs())),
        (None, None) => a.status == b.status,
        _ => false,
    }
}

/// Rows of one instance and whether its completed rows agree.
fn instance_rows(name: &str, model: &Model, cfg: &EngineConfig) -> (Vec<String>, bool) {
    let results: Vec<Result<SolveReport, CliError>> = METHODS.iter().map(|m| run_method(model, m, cfg)).collect();
    let done: Vec<&SolveReport> = results.iter().filter_map(|r| r.as_ref().ok()).filter(|r| completed(r)).collect();
    let agree = done.windows(2).all(|w| same_outcome(w[0], w[1]));
    let mark = if agree { "=" } else { "!=" };
    let rows = METHODS
        .iter()
        .zip(&results)
        .map(|(method, r)| match r {
            Ok(r) if completed(r) => format!("{},{mark},", r.csv_row(name, method)),
            Ok(r) => format!("{},,", r.csv_row(name, method)),
            Err(e) => {
                let note = e.to_string().replace([',', '\n'], ";");
                format!("{CSV_VERSION},{name},{method},error,,,,,,,,{note}")
            }
        })
        .collect();
    (rows, agree)
}

/// Runs every method on every instance; rows keep the input order.
pub fn run(models: &[(String, Model)], cfg: &EngineConfig) -> Table {
    let per_instance: Vec<(Vec<String>, bool)> =
        models.par_iter().map(|(name, model)| instance_rows(name, model, cfg)).collect();
    let mut csv = header();
    csv.push('\n');
    let mut agree = true;
    for (rows, ok) in per_instance {
        agree &= ok;
        for row in rows {
            csv.push_str(&row);
            csv.push('\n');
        }
    }
    Table { csv, agree }
}
