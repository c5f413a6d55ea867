//! Desk-scale checks of rectangular decompositions.
//!
//! A compact set is stood in for by a finite sample plus a membership test.
//! A decomposition is a list of pieces; each piece fixes the coordinates
//! outside the index set and lists boxes whose convex hull should equal the
//! piece's convex hull.

use crate::lp::{self, LinearProgram, LpError, LpOutcome};
use crate::{Cmp, Sense};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

const HULL_TOL: f64 = 1e-7;
const MEMBER_TOL: f64 = 1e-9;
const EQUIV_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RectError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("malformed fixture: {0}")]
    Malformed(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Axis-aligned box `prod [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn point(p: &[f64]) -> Self {
        AxisBox { lo: p.to_vec(), hi: p.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// All distinct vertices.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(self.dim())];
        for i in 0..self.dim() {
            let mut next = Vec::with_capacity(out.len() * 2);
            for v in &out {
                let mut a = v.clone();
                a.push(self.lo[i]);
                next.push(a);
                if self.hi[i] != self.lo[i] {
                    let mut b = v.clone();
                    b.push(self.hi[i]);
                    next.push(b);
                }
            }
            out = next;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSet {
    pub boxes: Vec<AxisBox>,
    #[serde(default)]
    pub fixed_coords: BTreeMap<usize, f64>,
}

impl PieceSet {
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for b in &self.boxes {
            for v in b.vertices() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    fn matches_fixed(&self, x: &[f64]) -> bool {
        self.fixed_coords.iter().all(|(&i, &v)| (x[i] - v).abs() <= MEMBER_TOL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coeffs: Vec<f64>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// Bounded polyhedron intersected with an integrality requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyhedron {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub rows: Vec<LinearRow>,
    #[serde(default)]
    pub integer: Vec<usize>,
}

impl Polyhedron {
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.lower.len() {
            return false;
        }
        let in_box = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *v >= lo - MEMBER_TOL && *v <= hi + MEMBER_TOL);
        let integral = self.integer.iter().all(|&i| (x[i] - x[i].round()).abs() <= MEMBER_TOL);
        let rows = self.rows.iter().all(|r| {
            let lhs: f64 = r.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            r.cmp.holds(lhs, r.rhs, MEMBER_TOL)
        });
        in_box && integral && rows
    }
}

/// Finite union of polyhedra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub any_of: Vec<Polyhedron>,
}

impl Membership {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.any_of.iter().any(|p| p.contains(x))
    }
}

pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    membership: Box<dyn Fn(&[f64]) -> bool + Send + Sync>,
}

impl SampleSet {
    pub fn new(points: Vec<Vec<f64>>, membership: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Result<Self, RectError> {
        if let Some(bad) = points.iter().find(|p| !membership(p)) {
            return Err(RectError::Malformed(format!("sample point {bad:?} fails membership")));
        }
        Ok(SampleSet { points, membership: Box::new(membership) })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (self.membership)(x)
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub cond_i: bool,
    pub cond_ii: bool,
    pub cond_iii_sampled: bool,
}

impl DecompositionReport {
    pub fn all(&self) -> bool {
        self.cond_i && self.cond_ii && self.cond_iii_sampled
    }
}

/// Whether `x` is a convex combination of `points`.
pub fn in_convex_hull(points: &[Vec<f64>], x: &[f64]) -> Result<bool, LpError> {
    if points.is_empty() {
        return Ok(false);
    }
    let k = points.len();
    let mut prog = LinearProgram::new(Sense::Min, vec![0.0; k]);
    for i in 0..x.len() {
        prog.add_row(points.iter().map(|p| p[i]).collect(), Cmp::Eq, x[i]);
    }
    prog.add_row(vec![1.0; k], Cmp::Eq, 1.0);
    match lp::solve(&prog)? {
        LpOutcome::Optimal { x: lambda, .. } => {
            let err = (0..x.len())
                .map(|i| (points.iter().zip(&lambda).map(|(p, l)| p[i] * l).sum::<f64>() - x[i]).abs())
                .fold(0.0, f64::max);
            Ok(err <= HULL_TOL * (1.0 + x.iter().fold(0.0_f64, |a, b| a.max(b.abs()))))
        }
        _ => Ok(false),
    }
}

/// Points of the list that are not convex combinations of the others.
pub fn extreme_points(points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, LpError> {
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let others: Vec<Vec<f64>> =
            points.iter().enumerate().filter(|(j, q)| *j != i && *q != p).map(|(_, q)| q.clone()).collect();
        if !in_convex_hull(&others, p)? && !out.contains(p) {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn check_dims(p: &SampleSet, index_set: &[usize], pieces: &[PieceSet]) -> Result<usize, RectError> {
    let n = p
        .dim()
        .or_else(|| pieces.first().and_then(|pc| pc.boxes.first()).map(AxisBox::dim))
        .ok_or_else(|| RectError::DimensionMismatch("no points and no boxes".into()))?;
    if pieces.is_empty() {
        return Err(RectError::DimensionMismatch("no pieces".into()));
    }
    if p.points.iter().any(|x| x.len() != n) {
        return Err(RectError::DimensionMismatch("sample points differ in dimension".into()));
    }
    for pc in pieces {
        for b in &pc.boxes {
            if b.lo.len() != n || b.hi.len() != n {
                return Err(RectError::DimensionMismatch(format!("box of dimension {} in space {n}", b.lo.len())));
            }
            if b.lo.iter().zip(&b.hi).any(|(l, h)| l > h) {
                return Err(RectError::DimensionMismatch("box with lo > hi".into()));
            }
        }
        if pc.fixed_coords.keys().any(|&i| i >= n) {
            return Err(RectError::DimensionMismatch("fixed coordinate out of range".into()));
        }
    }
    if index_set.iter().any(|&i| i >= n) {
        return Err(RectError::DimensionMismatch("index set out of range".into()));
    }
    Ok(n)
}

pub fn verify_decomposition(p: &SampleSet, index_set: &[usize], pieces: &[PieceSet]) -> Result<DecompositionReport, RectError> {
    let n = check_dims(p, index_set, pieces)?;
    let outside: Vec<usize> = (0..n).filter(|i| !index_set.contains(i)).collect();

    let cond_i = pieces.iter().all(|pc| {
        outside.iter().all(|i| match pc.fixed_coords.get(i) {
            Some(&v) => pc.boxes.iter().all(|b| b.lo[*i] == v && b.hi[*i] == v),
            None => false,
        })
    });

    let hulls: Vec<Vec<Vec<f64>>> = pieces.iter().map(PieceSet::vertices).collect();
    let mut cond_ii = hulls.iter().flatten().all(|v| p.contains(v));
    if cond_ii {
        for x in &p.points {
            let mut covered = false;
            for (pc, verts) in pieces.iter().zip(&hulls) {
                if pc.matches_fixed(x) && in_convex_hull(verts, x)? {
                    covered = true;
                    break;
                }
            }
            if !covered {
                cond_ii = false;
                break;
            }
        }
    }

    let mut cond_iii = true;
    'pieces: for (pc, verts) in pieces.iter().zip(&hulls) {
        let members: Vec<Vec<f64>> = p.points.iter().filter(|x| pc.matches_fixed(x)).cloned().collect();
        if members.is_empty() {
            cond_iii = false;
            break;
        }
        for x in &members {
            if !in_convex_hull(verts, x)? {
                cond_iii = false;
                break 'pieces;
            }
        }
        for v in verts {
            if !in_convex_hull(&members, v)? {
                cond_iii = false;
                break 'pieces;
            }
        }
    }
    Ok(DecompositionReport { cond_i, cond_ii, cond_iii_sampled: cond_iii })
}

/// Compares the maxima of each objective over the sample, over the extreme
/// points of the pieces, and over all box vertices.
pub fn equivalence_check<F: Fn(&[f64]) -> f64>(
    p: &SampleSet,
    index_set: &[usize],
    pieces: &[PieceSet],
    objectives: &[F],
) -> Result<bool, RectError> {
    check_dims(p, index_set, pieces)?;
    let vertices: Vec<Vec<f64>> = pieces.iter().flat_map(PieceSet::vertices).collect();
    let mut extremes = Vec::new();
    for pc in pieces {
        extremes.extend(extreme_points(&pc.vertices())?);
    }
    let max_over = |pts: &[Vec<f64>], f: &F| pts.iter().map(|x| f(x)).fold(f64::NEG_INFINITY, f64::max);
    for f in objectives {
        let a = max_over(&p.points, f);
        let b = max_over(&extremes, f);
        let c = max_over(&vertices, f);
        if (a - b).abs() > EQUIV_TOL || (a - c).abs() > EQUIV_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `constant + linear . x + sum_i diag_i x_i^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableQuadratic {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub linear: Vec<f64>,
    #[serde(default)]
    pub diag: Vec<f64>,
}

impl SeparableQuadratic {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.linear.iter().zip(x).map(|(a, b)| a * b).sum();
        let quad: f64 = self.diag.iter().zip(x).map(|(a, b)| a * b * b).sum();
        self.constant + lin + quad
    }

    pub fn convex_in(&self, index_set: &[usize]) -> bool {
        index_set.iter().all(|&i| self.diag.get(i).copied().unwrap_or(0.0) >= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    /// Lattice spacing per coordinate; lattice points of each polyhedron's
    /// bounding box that belong to the set are added to the sample.
    #[serde(default)]
    pub grid_step: Option<Vec<f64>>,
}

pub const FIXTURE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFixture {
    pub version: u32,
    pub dim: usize,
    pub index_set: Vec<usize>,
    pub set: Membership,
    pub sample: SampleSpec,
    pub pieces: Vec<PieceSet>,
    #[serde(default)]
    pub objectives: Vec<SeparableQuadratic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureReport {
    pub conditions: DecompositionReport,
    pub equivalence: bool,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.conditions.all() && self.equivalence
    }
}

fn lattice(lo: &[f64], hi: &[f64], step: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for i in 0..lo.len() {
        let count = if step[i] > 0.0 { ((hi[i] - lo[i]) / step[i] + 1e-9).floor() as usize } else { 0 };
        let mut next = Vec::new();
        for v in &out {
            for s in 0..=count {
                let mut w: Vec<f64> = v.clone();
                w.push(lo[i] + s as f64 * step[i]);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

impl DecompositionFixture {
    pub fn from_json(text: &str) -> Result<Self, RectError> {
        let f: DecompositionFixture = serde_json::from_str(text).map_err(|e| RectError::Malformed(e.to_string()))?;
        if f.version != FIXTURE_VERSION {
            return Err(RectError::Malformed(format!("unsupported version {}", f.version)));
        }
        for poly in &f.set.any_of {
            if poly.lower.len() != f.dim || poly.upper.len() != f.dim || poly.rows.iter().any(|r| r.coeffs.len() != f.dim) {
                return Err(RectError::DimensionMismatch("set description does not match dim".into()));
            }
        }
        if let Some(o) = f.objectives.iter().find(|o| !o.convex_in(&f.index_set)) {
            return Err(RectError::Malformed(format!("objective {o:?} is not convex in the index set")));
        }
        Ok(f)
    }

    pub fn sample_set(&self) -> Result<SampleSet, RectError> {
        let mut points = self.sample.points.clone();
        if let Some(step) = &self.sample.grid_step {
            if step.len() != self.dim {
                return Err(RectError::DimensionMismatch("grid step does not match dim".into()));
            }
            for poly in &self.set.any_of {
                for x in lattice(&poly.lower, &poly.upper, step) {
                    if self.set.contains(&x) && !points.contains(&x) {
                        points.push(x);
                    }
                }
            }
        }
        let set = self.set.clone();
        SampleSet::new(points, move |x| set.contains(x))
    }

    pub fn run(&self) -> Result<FixtureReport, RectError> {
        let sample = self.sample_set()?;
        let conditions = verify_decomposition(&sample, &self.index_set, &self.pieces)?;
        let fs: Vec<_> = self.objectives.iter().map(|o| move |x: &[f64]| o.eval(x)).collect();
        let equivalence = equivalence_check(&sample, &self.index_set, &self.pieces, &fs)?;
        Ok(FixtureReport { conditions, equivalence })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_vertices_skip_degenerate_axes() {
        let b = AxisBox { lo: vec![0.0, 1.0, 0.0], hi: vec![1.0, 1.0, 2.0] };
        assert_eq!(b.vertices().len(), 4);
    }

    #[test]
    fn finite_set_as_points_passes() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let copy = pts.clone();
        let set = SampleSet::new(pts.clone(), move |x| copy.iter().any(|p| p == x)).unwrap();
        let piece = PieceSet { boxes: pts.iter().map(|p| AxisBox::point(p)).collect(), fixed_coords: BTreeMap::new() };
        let report = verify_decomposition(&set, &[0, 1], &[piece.clone()]).unwrap();
        assert!(report.all());
        let zero = |_: &[f64]| 0.0;
        assert!(equivalence_check(&set, &[0, 1], &[piece], &[zero]).unwrap());
    }

    #[test]
    fn hull_membership() {
        let sq = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0], vec![2.0, 2.0]];
        assert!(in_convex_hull(&sq, &[1.0, 1.5]).unwrap());
        assert!(!in_convex_hull(&sq, &[2.5, 1.0]).unwrap());
        assert_eq!(extreme_points(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap(), vec![vec![0.0], vec![2.0]]);
    }

    #[test]
    fn dimension_mismatch_reported() {
        let set = SampleSet::new(vec![vec![0.0, 0.0]], |_| true).unwrap();
        let piece = PieceSet { boxes: vec![AxisBox::point(&[0.0])], fixed_coords: BTreeMap::new() };
        assert!(matches!(verify_decomposition(&set, &[0], &[piece]), Err(RectError::DimensionMismatch(_))));
    }
}
