use super::{dot, verify_certificate, LinearProgram, LpError, LpOutcome, FEAS_TOL, OPT_TOL, PIVOT_TOL};
use crate::{Cmp, Sense};

/// How an original variable is expressed through non-negative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shift { col: usize, lo: f64 },
    Mirror { col: usize, hi: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
    cap: usize,
}

enum Phase {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.width - 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        for k in 0..w {
            self.data[r * w + k] /= p;
        }
        self.data[r * w + c] = 1.0;
        let prow: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f != 0.0 {
                for k in 0..w {
                    self.data[i * w + k] -= f * prow[k];
                }
                self.data[i * w + c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for k in 0..w {
                self.obj[k] -= f * prow[k];
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule over columns `0..allowed`.
    fn run(&mut self, allowed: usize, dtol: f64) -> Result<Phase, LpError> {
        let rhs = self.rhs();
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.obj[j] < -dtol) else {
                return Ok(Phase::Optimal);
            };
            if self.pivots >= self.cap {
                return Err(LpError::NumericalFailure(format!("pivot cap {} reached", self.cap)));
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, enter);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.at(i, rhs).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-11 * (1.0 + br.abs());
                        if (!tie && ratio < br) || (tie && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Ok(Phase::Unbounded(enter)),
            }
        }
    }
}

/// Solves a linear program with a two-phase dense simplex under Bland's rule.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let n = lp.num_vars();

    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ncols, lo });
            if hi.is_finite() {
                bound_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirror { col: ncols, hi });
            ncols += 1;
        } else {
            maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }

    // Rows expressed over the transformed columns, before slacks.
    let m_orig = lp.num_rows();
    let m = m_orig + bound_rows.len();
    let mut a_rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut cmps: Vec<Cmp> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    for row in &lp.rows {
        let mut a = vec![0.0; ncols];
        let mut offset = 0.0;
        for (j, &coef) in row.coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    a[col] += coef;
                    offset += coef * lo;
                }
                VarMap::Mirror { col, hi } => {
                    a[col] -= coef;
                    offset += coef * hi;
                }
                VarMap::Split { pos, neg } => {
                    a[pos] += coef;
                    a[neg] -= coef;
                }
            }
        }
        a_rows.push(a);
        cmps.push(row.cmp);
        rhs.push(row.rhs - offset);
    }
    for &(col, width) in &bound_rows {
        let mut a = vec![0.0; ncols];
        a[col] = 1.0;
        a_rows.push(a);
        cmps.push(Cmp::Le);
        rhs.push(width);
    }

    let nslack = cmps.iter().filter(|c| **c != Cmp::Eq).count();
    let cols = ncols + nslack;
    let width = cols + m + 1;
    let mut data = vec![0.0; m * width];
    let mut flip = vec![1.0; m];
    let mut slack = ncols;
    for i in 0..m {
        let base = i * width;
        data[base..base + ncols].copy_from_slice(&a_rows[i]);
        match cmps[i] {
            Cmp::Le => {
                data[base + slack] = 1.0;
                slack += 1;
            }
            Cmp::Ge => {
                data[base + slack] = -1.0;
                slack += 1;
            }
            Cmp::Eq => {}
        }
        data[base + width - 1] = rhs[i];
        if rhs[i] < 0.0 {
            flip[i] = -1.0;
            for k in 0..cols {
                data[base + k] = -data[base + k];
            }
            data[base + width - 1] = -rhs[i];
        }
        data[base + cols + i] = 1.0;
    }

    // Minimization costs over transformed columns.
    let sign = match lp.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut cost = vec![0.0; cols];
    for (j, &c) in lp.objective.iter().enumerate() {
        let c = sign * c;
        match maps[j] {
            VarMap::Shift { col, .. } => cost[col] += c,
            VarMap::Mirror { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    let cap = 10 * (m + n).pow(2) + 50;
    let mut tab = Tableau {
        rows: m,
        width,
        data,
        obj: vec![0.0; width],
        basis: (cols..cols + m).collect(),
        pivots: 0,
        cap,
    };

    // Phase 1: minimize the sum of artificials.
    for k in 0..m {
        tab.obj[cols + k] = 1.0;
    }
    for i in 0..m {
        for k in 0..width {
            tab.obj[k] -= tab.data[i * width + k];
        }
    }
    let bscale = 1.0 + rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    match tab.run(cols, OPT_TOL)? {
        Phase::Optimal => {}
        Phase::Unbounded(_) => {
            return Err(LpError::NumericalFailure("phase one reported unbounded".into()));
        }
    }
    let infeasibility = -tab.obj[width - 1];
    if infeasibility > FEAS_TOL * bscale {
        let mut farkas = vec![0.0; m_orig];
        for (i, f) in farkas.iter_mut().enumerate() {
            let y = 1.0 - tab.obj[cols + i];
            *f = -flip[i] * y;
        }
        let scale = farkas.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        if scale > 0.0 {
            for f in &mut farkas {
                *f /= scale;
                if *f == 0.0 {
                    *f = 0.0;
                }
            }
        }
        let out = LpOutcome::Infeasible { farkas };
        return certified(lp, out);
    }

    // Drive artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] < cols {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..cols {
            let a = tab.at(r, j).abs();
            if a > 1e-7 && best.is_none_or(|(_, b)| a > b) {
                best = Some((j, a));
            }
        }
        if let Some((j, _)) = best {
            tab.pivot(r, j);
        }
    }

    // Phase 2.
    tab.obj = vec![0.0; width];
    tab.obj[..cols].copy_from_slice(&cost);
    for r in 0..m {
        let b = tab.basis[r];
        let cb = if b < cols { cost[b] } else { 0.0 };
        if cb != 0.0 {
            for k in 0..width {
                tab.obj[k] -= cb * tab.data[r * width + k];
            }
        }
    }
    let cscale = 1.0_f64.max(cost.iter().fold(0.0_f64, |a, b| a.max(b.abs())));
    let phase = tab.run(cols, OPT_TOL * cscale)?;

    let mut std_x = vec![0.0; cols];
    for r in 0..m {
        if tab.basis[r] < cols {
            std_x[tab.basis[r]] = tab.at(r, width - 1);
        }
    }

    let out = match phase {
        Phase::Unbounded(enter) => {
            let mut dir = vec![0.0; cols];
            dir[enter] = 1.0;
            for r in 0..m {
                if tab.basis[r] < cols {
                    dir[tab.basis[r]] = -tab.at(r, enter);
                }
            }
            let mut ray: Vec<f64> = maps
                .iter()
                .map(|map| match *map {
                    VarMap::Shift { col, .. } => dir[col],
                    VarMap::Mirror { col, .. } => -dir[col],
                    VarMap::Split { pos, neg } => dir[pos] - dir[neg],
                })
                .collect();
            let scale = ray.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
            if scale > 0.0 {
                for d in &mut ray {
                    *d /= scale;
                }
            }
            LpOutcome::Unbounded { ray }
        }
        Phase::Optimal => {
            let x: Vec<f64> = maps
                .iter()
                .map(|map| match *map {
                    VarMap::Shift { col, lo } => lo + std_x[col],
                    VarMap::Mirror { col, hi } => hi - std_x[col],
                    VarMap::Split { pos, neg } => std_x[pos] - std_x[neg],
                })
                .collect();
            let duals: Vec<f64> = (0..m_orig)
                .map(|i| {
                    let y = -tab.obj[cols + i];
                    let d = sign * flip[i] * y;
                    if d == 0.0 {
                        0.0
                    } else {
                        d
                    }
                })
                .collect();
            let reduced_costs: Vec<f64> = (0..n)
                .map(|j| {
                    let mut r = lp.objective[j];
                    for (i, row) in lp.rows.iter().enumerate() {
                        r -= row.coeffs[j] * duals[i];
                    }
                    r
                })
                .collect();
            let objective = dot(&lp.objective, &x);
            LpOutcome::Optimal { x, duals, reduced_costs, objective }
        }
    };
    certified(lp, out)
}

fn certified(lp: &LinearProgram, out: LpOutcome) -> Result<LpOutcome, LpError> {
    if verify_certificate(lp, &out) {
        Ok(out)
    } else {
        Err(LpError::NumericalFailure(format!(
            "certificate rejected for {} outcome",
            match out {
                LpOutcome::Optimal { .. } => "optimal",
                LpOutcome::Infeasible { .. } => "infeasible",
                LpOutcome::Unbounded { .. } => "unbounded",
            }
        )))
    }
}
