//! Dense two-phase simplex for small maximization programs.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const PIVOT_TOL: f64 = 1e-9;
pub const MAX_PIVOTS: usize = 1_000_000;
/// Feasibility slack accepted on a row, scaled by `1 + |rhs|`.
pub const FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarBound {
    NonNeg,
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `maximize objective · z` subject to `rows`, with per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
    bounds: Vec<VarBound>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Result<Self> {
        if let Some(c) = objective.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("objective coefficient {c} is not finite")));
        }
        let bounds = vec![VarBound::NonNeg; objective.len()];
        Ok(Self { objective, rows: Vec::new(), bounds })
    }

    pub fn width(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn bounds(&self) -> &[VarBound] {
        &self.bounds
    }

    pub fn set_bound(&mut self, var: usize, bound: VarBound) -> Result<()> {
        if var >= self.width() {
            return Err(Error::Dimension { expected: self.width(), got: var + 1 });
        }
        self.bounds[var] = bound;
        Ok(())
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Result<()> {
        if coeffs.len() != self.width() {
            return Err(Error::Dimension { expected: self.width(), got: coeffs.len() });
        }
        if !rhs.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("constraint coefficients must be finite".into()));
        }
        self.rows.push(Row { coeffs, sense, rhs });
        Ok(())
    }

    /// Adds a row given as sparse `(column, coefficient)` pairs.
    pub fn add_sparse_row(&mut self, entries: &[(usize, f64)], sense: Sense, rhs: f64) -> Result<()> {
        let mut coeffs = vec![0.0; self.width()];
        for &(j, a) in entries {
            if j >= self.width() {
                return Err(Error::Dimension { expected: self.width(), got: j + 1 });
            }
            coeffs[j] += a;
        }
        self.add_row(coeffs, sense, rhs)
    }

    /// Worst violation of rows and bounds at `z`, each scaled by `1 + |rhs|`.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().zip(z).map(|(a, x)| a * x).sum();
            let gap = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap / (1.0 + row.rhs.abs()));
        }
        for (x, b) in z.iter().zip(&self.bounds) {
            if *b == VarBound::NonNeg {
                worst = worst.max(-x);
            }
        }
        worst
    }

    /// Plain-text dump: `max c·z` followed by one constraint per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "max {}", linear_form(&self.objective));
        for row in &self.rows {
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            let _ = writeln!(out, "{} {op} {}", linear_form(&row.coeffs), row.rhs);
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if *b == VarBound::Free {
                let _ = writeln!(out, "z{j} free");
            }
        }
        out
    }
}

fn linear_form(coeffs: &[f64]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0.0)
        .map(|(j, a)| format!("{a}*z{j}"))
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values in the caller's variable order; empty unless optimal.
    pub primal: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    fn failed(status: LpStatus) -> Self {
        Self { status, primal: Vec::new(), objective: f64::NAN }
    }

    /// Converts a non-optimal status into the matching error.
    pub fn into_optimal(self, what: &str) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::Infeasible(what.into())),
            LpStatus::Unbounded => Err(Error::Unbounded(what.into())),
            LpStatus::NumericFailure => Err(Error::Numeric(what.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    m: usize,
    width: usize,
    /// Row-major, `width + 1` entries per row; the last one is the rhs.
    a: Vec<f64>,
    /// Reduced costs; the last entry holds minus the objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    Stalled,
}

impl Tableau {
    fn stride(&self) -> usize {
        self.width + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.stride() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.a[i * self.stride() + self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let s = self.stride();
        let p = self.a[r * s + c];
        let pivot_row: Vec<f64> = self.a[r * s..(r + 1) * s].iter().map(|v| v / p).collect();
        self.a[r * s..(r + 1) * s].copy_from_slice(&pivot_row);
        let nz: Vec<usize> = (0..s).filter(|&j| pivot_row[j] != 0.0).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * s + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * s..(i + 1) * s];
            for &j in &nz {
                row[j] -= f * pivot_row[j];
            }
            row[c] = 0.0;
        }
        let f = self.obj[c];
        if f != 0.0 {
            for &j in &nz {
                self.obj[j] -= f * pivot_row[j];
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let s = self.stride();
        self.obj = cost.to_vec();
        self.obj.push(0.0);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for j in 0..s {
                self.obj[j] -= cb * self.a[i * s + j];
            }
        }
    }

    /// Bland's rule: lowest-index improving column, ratio ties to the lowest basic index.
    fn run(&mut self, allow: impl Fn(usize) -> bool) -> Outcome {
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Outcome::Stalled;
            }
            let Some(c) = (0..self.width).find(|&j| allow(j) && self.obj[j] > PIVOT_TOL) else {
                return Outcome::Optimal;
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((k, q)) => {
                        if ratio < q || (ratio == q && self.basis[i] < self.basis[k]) {
                            Some((i, ratio))
                        } else {
                            Some((k, q))
                        }
                    }
                };
            }
            let Some((r, _)) = best else {
                return Outcome::Unbounded;
            };
            self.pivot(r, c);
        }
    }
}

/// Solves `lp` and certifies the returned primal against the original rows.
pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    let n = lp.width();
    // Structural columns: one per nonnegative variable, two per free variable.
    let mut split: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    let mut ncols = 0;
    for b in &lp.bounds {
        match b {
            VarBound::NonNeg => {
                split.push((ncols, None));
                ncols += 1;
            }
            VarBound::Free => {
                split.push((ncols, Some(ncols + 1)));
                ncols += 2;
            }
        }
    }
    let n_struct = ncols;

    // Flip rows so every rhs is nonnegative.
    let rows: Vec<(f64, Sense)> = lp
        .rows
        .iter()
        .map(|r| {
            if r.rhs < 0.0 {
                let s = match r.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (-1.0, s)
            } else {
                (1.0, r.sense)
            }
        })
        .collect();
    let n_slack = rows.iter().filter(|(_, s)| *s != Sense::Eq).count();
    let n_art = rows.iter().filter(|(_, s)| *s != Sense::Le).count();
    let width = n_struct + n_slack + n_art;
    let m = rows.len();
    let stride = width + 1;

    let mut kinds = vec![ColKind::Structural; n_struct];
    kinds.extend(std::iter::repeat(ColKind::Slack).take(n_slack));
    kinds.extend(std::iter::repeat(ColKind::Artificial).take(n_art));

    let mut a = vec![0.0; m * stride];
    let mut basis = vec![0; m];
    let (mut next_slack, mut next_art) = (n_struct, n_struct + n_slack);
    for (i, (row, &(sign, sense))) in lp.rows.iter().zip(&rows).enumerate() {
        let base = i * stride;
        for (j, &coef) in row.coeffs.iter().enumerate() {
            let (p, q) = split[j];
            a[base + p] = sign * coef;
            if let Some(q) = q {
                a[base + q] = -sign * coef;
            }
        }
        a[base + width] = sign * row.rhs;
        match sense {
            Sense::Le => {
                a[base + next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                a[base + next_slack] = -1.0;
                next_slack += 1;
                a[base + next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                a[base + next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }

    let mut t = Tableau { m, width, a, obj: Vec::new(), basis, kinds, pivots: 0 };

    if n_art > 0 {
        let cost: Vec<f64> = t
            .kinds
            .iter()
            .map(|k| if *k == ColKind::Artificial { -1.0 } else { 0.0 })
            .collect();
        t.set_objective(&cost);
        match t.run(|_| true) {
            Outcome::Optimal => {}
            Outcome::Unbounded | Outcome::Stalled => return LpSolution::failed(LpStatus::NumericFailure),
        }
        let infeasibility = t.obj[width];
        let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > FEAS_TOL * scale {
            return LpSolution::failed(LpStatus::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if t.kinds[t.basis[r]] != ColKind::Artificial {
                continue;
            }
            let entering = (0..width)
                .filter(|&j| t.kinds[j] != ColKind::Artificial)
                .max_by(|&x, &y| t.at(r, x).abs().total_cmp(&t.at(r, y).abs()));
            if let Some(c) = entering {
                if t.at(r, c).abs() > PIVOT_TOL {
                    t.pivot(r, c);
                }
            }
        }
    }

    let mut cost = vec![0.0; width];
    for (j, &(p, q)) in split.iter().enumerate() {
        cost[p] = lp.objective[j];
        if let Some(q) = q {
            cost[q] = -lp.objective[j];
        }
    }
    t.set_objective(&cost);
    let kinds = t.kinds.clone();
    match t.run(|j| kinds[j] != ColKind::Artificial) {
        Outcome::Optimal => {}
        Outcome::Unbounded => return LpSolution::failed(LpStatus::Unbounded),
        Outcome::Stalled => return LpSolution::failed(LpStatus::NumericFailure),
    }

    let mut values = vec![0.0; width];
    for i in 0..m {
        values[t.basis[i]] = t.rhs(i);
    }
    let primal: Vec<f64> = split
        .iter()
        .map(|&(p, q)| match q {
            None => values[p].max(0.0),
            Some(q) => values[p] - values[q],
        })
        .collect();
    if lp.max_violation(&primal) > FEAS_TOL {
        log::debug!("simplex result violates constraints by {}", lp.max_violation(&primal));
        return LpSolution::failed(LpStatus::NumericFailure);
    }
    let objective = lp.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();
    LpSolution { status: LpStatus::Optimal, primal, objective }
}
