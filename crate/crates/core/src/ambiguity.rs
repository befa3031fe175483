//! Ambiguity sets `{F : E_F[phi_k(V)] >= 0 for all k}` built from
//! piecewise nondecreasing constraint functions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{GridPoint, Side};

/// One affine piece `slope * v + intercept` on an interval whose ends may be open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
    pub slope: f64,
    pub intercept: f64,
}

impl Piece {
    fn value(&self, v: f64) -> f64 {
        self.slope * v + self.intercept
    }

    fn contains(&self, v: f64) -> bool {
        let above = if self.lo_open { v > self.lo } else { v >= self.lo };
        let below = if self.hi_open { v < self.hi } else { v <= self.hi };
        above && below
    }

    /// Whether points just below `v` belong to this piece.
    fn approaches(&self, v: f64) -> bool {
        self.lo < v && v <= self.hi
    }
}

/// A bounded function on `[0, vbar]`, nondecreasing within each piece.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMonotoneFn {
    pieces: Vec<Piece>,
}

impl PiecewiseMonotoneFn {
    /// Checks that `pieces` partition `[0, vbar]` and are each nondecreasing.
    pub fn new(pieces: Vec<Piece>, vbar: f64) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return domain("a constraint function needs at least one piece");
        };
        if first.lo != 0.0 || first.lo_open {
            return domain("pieces must start at 0 inclusive");
        }
        let last = pieces.last().expect("nonempty");
        if last.hi != vbar || last.hi_open {
            return domain("pieces must end at vbar inclusive");
        }
        for p in &pieces {
            if !(p.slope.is_finite() && p.intercept.is_finite()) {
                return domain("piece coefficients must be finite");
            }
            if p.slope < 0.0 {
                return domain(format!("piece on [{}, {}] has negative slope {}", p.lo, p.hi, p.slope));
            }
            if p.lo > p.hi || (p.lo == p.hi && (p.lo_open || p.hi_open)) {
                return domain(format!("empty piece [{}, {}]", p.lo, p.hi));
            }
        }
        for w in pieces.windows(2) {
            if w[0].hi != w[1].lo || w[0].hi_open == w[1].lo_open {
                return domain(format!("pieces do not partition [0, {vbar}] at {}", w[0].hi));
            }
        }
        Ok(Self { pieces })
    }

    fn constant(c: f64, vbar: f64) -> Self {
        Self {
            pieces: vec![Piece { lo: 0.0, hi: vbar, lo_open: false, hi_open: false, slope: 0.0, intercept: c }],
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Evaluation honoring side semantics; `at.value` must lie in `[0, vbar]`.
    pub fn eval(&self, at: GridPoint) -> f64 {
        let v = at.value;
        let piece = match at.side {
            Side::Exact => self.pieces.iter().find(|p| p.contains(v)),
            Side::LeftLimit => self.pieces.iter().find(|p| p.approaches(v)),
        };
        piece.unwrap_or_else(|| self.pieces.last().expect("nonempty")).value(v)
    }

    /// Interior piece boundaries.
    pub fn boundaries(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.windows(2).map(|w| w[0].hi)
    }

    /// True when the function is strictly negative everywhere on `[0, vbar)`.
    fn negative_below_top(&self, vbar: f64) -> bool {
        self.pieces.iter().all(|p| {
            if p.lo >= vbar {
                return true;
            }
            let top_included = p.hi < vbar && !p.hi_open;
            let sup = p.value(p.hi);
            if top_included {
                sup < 0.0
            } else {
                sup < 0.0 || (sup == 0.0 && p.slope > 0.0)
            }
        })
    }
}

/// Parameters of a multi-interval constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalConstraint {
    pub intervals: Vec<(f64, f64)>,
    /// Lower bound on the probability mass (multisegment) or on the conditional mean (segmentedmean).
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileConstraint {
    pub omega: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum SetKind {
    Support { vlo: f64 },
    Mean { mu: f64 },
    Quantile { constraints: Vec<QuantileConstraint> },
    Multisegment { constraints: Vec<IntervalConstraint> },
    Segmentedmean { constraints: Vec<IntervalConstraint> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSpec {
    #[serde(flatten)]
    pub kind: SetKind,
    pub vbar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySet {
    vbar: f64,
    constraints: Vec<PiecewiseMonotoneFn>,
    kind: SetKind,
}

impl AmbiguitySet {
    pub fn support(vlo: f64, vbar: f64) -> Result<Self> {
        Self::build(SetSpec { kind: SetKind::Support { vlo }, vbar })
    }

    pub fn mean(mu: f64, vbar: f64) -> Result<Self> {
        Self::build(SetSpec { kind: SetKind::Mean { mu }, vbar })
    }

    pub fn quantile(constraints: &[(f64, f64)], vbar: f64) -> Result<Self> {
        let constraints = constraints
            .iter()
            .map(|&(omega, xi)| QuantileConstraint { omega, xi })
            .collect();
        Self::build(SetSpec { kind: SetKind::Quantile { constraints }, vbar })
    }

    pub fn multisegment(constraints: Vec<IntervalConstraint>, vbar: f64) -> Result<Self> {
        Self::build(SetSpec { kind: SetKind::Multisegment { constraints }, vbar })
    }

    pub fn segmented_mean(constraints: Vec<IntervalConstraint>, vbar: f64) -> Result<Self> {
        Self::build(SetSpec { kind: SetKind::Segmentedmean { constraints }, vbar })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SetSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::build(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SetSpec { kind: self.kind.clone(), vbar: self.vbar })
            .expect("set serialization cannot fail")
    }

    /// Builds one of the standard families.
    pub fn build(spec: SetSpec) -> Result<Self> {
        let vbar = spec.vbar;
        if !(vbar.is_finite() && vbar > 0.0) {
            return domain(format!("vbar {vbar} must be positive and finite"));
        }
        let in_range = |v: f64| v.is_finite() && (0.0..=vbar).contains(&v);
        let constraints = match &spec.kind {
            SetKind::Support { vlo } => {
                if !in_range(*vlo) {
                    return domain(format!("lower support bound {vlo} outside [0, {vbar}]"));
                }
                vec![if *vlo == 0.0 {
                    PiecewiseMonotoneFn::constant(0.0, vbar)
                } else {
                    step_up(*vlo, -1.0, 0.0, vbar)?
                }]
            }
            SetKind::Mean { mu } => {
                if !(mu.is_finite() && *mu > 0.0 && *mu <= vbar) {
                    return domain(format!("mean {mu} outside (0, {vbar}]"));
                }
                vec![PiecewiseMonotoneFn {
                    pieces: vec![Piece { lo: 0.0, hi: vbar, lo_open: false, hi_open: false, slope: 1.0, intercept: -mu }],
                }]
            }
            SetKind::Quantile { constraints } => {
                if constraints.is_empty() {
                    return domain("quantile set needs at least one constraint");
                }
                constraints
                    .iter()
                    .map(|c| {
                        if !in_range(c.omega) {
                            return domain(format!("quantile threshold {} outside [0, {vbar}]", c.omega));
                        }
                        if !(c.xi > 0.0 && c.xi <= 1.0) {
                            return domain(format!("quantile level {} outside (0, 1]", c.xi));
                        }
                        if c.omega == 0.0 {
                            Ok(PiecewiseMonotoneFn::constant(1.0 - c.xi, vbar))
                        } else {
                            step_up(c.omega, -c.xi, 1.0 - c.xi, vbar)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            SetKind::Multisegment { constraints } => {
                if constraints.is_empty() {
                    return domain("multisegment set needs at least one constraint");
                }
                constraints
                    .iter()
                    .map(|c| {
                        if !(c.bound > 0.0 && c.bound <= 1.0) {
                            return domain(format!("segment probability {} outside (0, 1]", c.bound));
                        }
                        let runs = merge_intervals(&c.intervals, vbar)?;
                        indicator_fn(&runs, vbar, |inside| Piece {
                            lo: 0.0,
                            hi: 0.0,
                            lo_open: false,
                            hi_open: false,
                            slope: 0.0,
                            intercept: if inside { 1.0 - c.bound } else { -c.bound },
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            SetKind::Segmentedmean { constraints } => {
                if constraints.is_empty() {
                    return domain("segmented-mean set needs at least one constraint");
                }
                constraints
                    .iter()
                    .map(|c| {
                        if !c.bound.is_finite() {
                            return domain("segment mean must be finite");
                        }
                        let runs = merge_intervals(&c.intervals, vbar)?;
                        indicator_fn(&runs, vbar, |inside| Piece {
                            lo: 0.0,
                            hi: 0.0,
                            lo_open: false,
                            hi_open: false,
                            slope: if inside { 1.0 } else { 0.0 },
                            intercept: if inside { -c.bound } else { 0.0 },
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Self { vbar, constraints, kind: spec.kind })
    }

    pub fn vbar(&self) -> f64 {
        self.vbar
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraint(&self, k: usize) -> &PiecewiseMonotoneFn {
        &self.constraints[k]
    }

    /// Sorted, deduplicated piece boundaries strictly inside `(0, vbar)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .constraints
            .iter()
            .flat_map(|f| f.boundaries())
            .filter(|&v| v > 0.0 && v < self.vbar)
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    pub fn phi_eval(&self, k: usize, at: GridPoint) -> Result<f64> {
        if k >= self.constraints.len() {
            return domain(format!("constraint index {k} out of range (K = {})", self.constraints.len()));
        }
        if at.value > self.vbar {
            return domain(format!("valuation {} above vbar {}", at.value, self.vbar));
        }
        Ok(self.constraints[k].eval(at))
    }

    /// `phi_k(at)` for every `k`; `at` must lie in `[0, vbar]`.
    pub fn phi_all(&self, at: GridPoint) -> Vec<f64> {
        self.constraints.iter().map(|f| f.eval(at)).collect()
    }

    /// Some constraint jumps exactly at `vbar`.
    pub fn jumps_at_top(&self) -> bool {
        let top = GridPoint::exact(self.vbar);
        let below = GridPoint::left(self.vbar);
        self.constraints.iter().any(|f| f.eval(top) != f.eval(below))
    }

    /// The only member of the set is the point mass at `vbar`.
    ///
    /// Happens when some constraint is negative on `[0, vbar)` and zero at
    /// `vbar` (mean equal to `vbar`, support collapsed to `{vbar}`). The
    /// left-limit reduction would wrongly admit mass at `vbar-`, so every
    /// solver special-cases it.
    pub fn forces_point_mass_at_top(&self) -> bool {
        let top = GridPoint::exact(self.vbar);
        self.constraints
            .iter()
            .any(|f| f.eval(top) == 0.0 && f.negative_below_top(self.vbar))
            && self.constraints.iter().all(|f| f.eval(top) >= 0.0)
    }

    /// Whether `dist` satisfies every constraint within `tol`.
    pub fn contains(&self, dist: &crate::grid::DiscreteDistribution, tol: f64) -> bool {
        self.constraints.iter().all(|f| {
            let lhs: f64 = dist.atoms.iter().map(|&(p, m)| f.eval(p) * m).sum();
            lhs >= -tol
        })
    }

    /// Union of prices, breakpoints and `vbar` with the data the ratio LP needs.
    pub fn merged_grid(&self, prices: &[f64]) -> Result<MergedGrid> {
        let mut levels: Vec<f64> = prices.to_vec();
        if let Some(p) = levels.iter().find(|p| !(p.is_finite() && (0.0..=self.vbar).contains(*p))) {
            return domain(format!("price {p} outside [0, {}]", self.vbar));
        }
        levels.sort_by(f64::total_cmp);
        levels.dedup();

        let mut values: Vec<f64> = levels.iter().copied().chain(self.breakpoints()).collect();
        values.push(self.vbar);
        values.sort_by(f64::total_cmp);
        values.dedup();

        let mut points: Vec<GridPoint> = values
            .iter()
            .map(|&u| if u == 0.0 { GridPoint::exact(0.0) } else { GridPoint::left(u) })
            .collect();
        if self.jumps_at_top() {
            points.push(GridPoint::exact(self.vbar));
        }
        let below = points
            .iter()
            .map(|p| match p.side {
                Side::LeftLimit => levels.partition_point(|&v| v < p.value),
                Side::Exact => levels.partition_point(|&v| v <= p.value),
            })
            .collect();
        let phi_lower = points.iter().map(|&p| self.phi_all(p)).collect();
        Ok(MergedGrid { points, prices: levels, below, phi_lower })
    }
}

/// `low` on `[0, at)`, `high` on `[at, vbar]`.
fn step_up(at: f64, low: f64, high: f64, vbar: f64) -> Result<PiecewiseMonotoneFn> {
    PiecewiseMonotoneFn::new(
        vec![
            Piece { lo: 0.0, hi: at, lo_open: false, hi_open: true, slope: 0.0, intercept: low },
            Piece { lo: at, hi: vbar, lo_open: false, hi_open: false, slope: 0.0, intercept: high },
        ],
        vbar,
    )
}

/// Sorted disjoint closed runs covering the union of `intervals`.
fn merge_intervals(intervals: &[(f64, f64)], vbar: f64) -> Result<Vec<(f64, f64)>> {
    if intervals.is_empty() {
        return domain("interval list is empty");
    }
    let mut sorted = intervals.to_vec();
    for &(a, b) in &sorted {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= vbar) {
            return domain(format!("interval [{a}, {b}] must satisfy 0 <= a < b <= {vbar}"));
        }
    }
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut runs: Vec<(f64, f64)> = Vec::new();
    for (a, b) in sorted {
        match runs.last_mut() {
            Some(run) if a <= run.1 => run.1 = run.1.max(b),
            _ => runs.push((a, b)),
        }
    }
    Ok(runs)
}

/// Splits `[0, vbar]` into inside and outside pieces of the closed `runs`.
fn indicator_fn(runs: &[(f64, f64)], vbar: f64, shape: impl Fn(bool) -> Piece) -> Result<PiecewiseMonotoneFn> {
    let mut pieces = Vec::new();
    let mut cursor = 0.0;
    let mut cursor_open = false;
    let with = |inside: bool, lo: f64, hi: f64, lo_open: bool, hi_open: bool| Piece {
        lo,
        hi,
        lo_open,
        hi_open,
        ..shape(inside)
    };
    for &(a, b) in runs {
        if a > cursor {
            pieces.push(with(false, cursor, a, cursor_open, true));
        }
        pieces.push(with(true, a, b, false, false));
        cursor = b;
        cursor_open = true;
    }
    if cursor < vbar {
        pieces.push(with(false, cursor, vbar, cursor_open, false));
    }
    PiecewiseMonotoneFn::new(pieces, vbar)
}

/// The finite grid on which the ratio LP lives.
///
/// Point `j` carries the number of price levels strictly below it (at or
/// below, for the exact top point) and every constraint's value there.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedGrid {
    pub points: Vec<GridPoint>,
    /// Sorted, deduplicated price levels.
    pub prices: Vec<f64>,
    pub below: Vec<usize>,
    /// `phi_lower[j][k]`.
    pub phi_lower: Vec<Vec<f64>>,
}

impl MergedGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Price levels paid by a buyer at grid point `j`.
    pub fn members(&self, j: usize) -> &[f64] {
        &self.prices[..self.below[j]]
    }
}
