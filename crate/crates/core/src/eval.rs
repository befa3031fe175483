//! Performance of mechanisms under fully specified valuation distributions.

use statrs::function::beta::beta_reg;

use crate::error::{domain, Result};
use crate::grid::{DiscreteDistribution, GridPoint, Side};
use crate::mechanism::PaymentRule;

const QUAD_TOL: f64 = 1e-8;
const COARSE_GRID: usize = 10_000;
const PRICE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ParametricDistribution {
    /// `vbar` times a Beta(`a`, `b`) variable.
    Beta { a: f64, b: f64, vbar: f64 },
    Discrete { dist: DiscreteDistribution, vbar: f64 },
}

impl ParametricDistribution {
    pub fn beta(a: f64, b: f64, vbar: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return domain(format!("beta shape ({a}, {b}) must be positive"));
        }
        if !(vbar > 0.0 && vbar.is_finite()) {
            return domain(format!("vbar {vbar} must be positive"));
        }
        Ok(Self::Beta { a, b, vbar })
    }

    pub fn discrete(dist: DiscreteDistribution, vbar: f64) -> Result<Self> {
        if !dist.is_probability() {
            return domain(format!("atom masses sum to {}, not 1", dist.total_mass()));
        }
        if dist.max_value().is_some_and(|m| m > vbar) {
            return domain(format!("atom above vbar {vbar}"));
        }
        Ok(Self::Discrete { dist, vbar })
    }

    pub fn vbar(&self) -> f64 {
        match self {
            Self::Beta { vbar, .. } | Self::Discrete { vbar, .. } => *vbar,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Beta { a, b, vbar } => a / (a + b) * vbar,
            Self::Discrete { dist, .. } => dist.mean(),
        }
    }

    /// `P(V <= v)`.
    pub fn cdf(&self, v: f64) -> Result<f64> {
        if !(0.0..=self.vbar()).contains(&v) {
            return domain(format!("valuation {v} outside [0, {}]", self.vbar()));
        }
        Ok(self.cdf_unchecked(v))
    }

    fn cdf_unchecked(&self, v: f64) -> f64 {
        match self {
            Self::Beta { a, b, vbar } => beta_reg(*a, *b, (v / vbar).clamp(0.0, 1.0)),
            Self::Discrete { dist, .. } => dist.cdf(v),
        }
    }

    /// `P(V >= v)`, the demand at posted price `v`.
    pub fn demand(&self, v: f64) -> f64 {
        match self {
            Self::Beta { .. } => 1.0 - self.cdf_unchecked(v),
            Self::Discrete { dist, .. } => {
                let at = GridPoint::new(v, Side::LeftLimit).unwrap_or(GridPoint::exact(0.0));
                dist.mass_at_or_above(at)
            }
        }
    }
}

fn simpson_step(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let (lm, flm, left) = simpson_step(f, a, fa, m, fm);
    let (rm, frm, right) = simpson_step(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson_step(&f, a, fa, b, fb);
    adaptive(&f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Expected payment `E[t(V)]`.
///
/// `t` must be affine between consecutive kinks, with jumps only at kinks.
/// Finite menus reduce to the tail sum of `v_i x_i P(V >= v_i)`; sloped
/// pieces integrate the survival function.
pub fn revenue_under(rule: &impl PaymentRule, dist: &ParametricDistribution) -> Result<f64> {
    let vbar = dist.vbar();
    if (rule.vbar() - vbar).abs() > 1e-12 * vbar.max(1.0) {
        return domain(format!("mechanism vbar {} differs from distribution vbar {vbar}", rule.vbar()));
    }
    if let ParametricDistribution::Discrete { dist, .. } = dist {
        return Ok(dist.atoms.iter().map(|&(a, m)| rule.payment(a) * m).sum());
    }
    let mut knots: Vec<f64> = rule.kinks().into_iter().filter(|&k| k > 0.0 && k < vbar).collect();
    knots.push(vbar);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut total = rule.payment(GridPoint::exact(0.0));
    let mut start = 0.0;
    for &k in &knots {
        let before = rule.payment(GridPoint::left(k));
        let slope = (before - rule.payment(GridPoint::exact(start))) / (k - start);
        if slope != 0.0 {
            total += slope * integrate(|v| dist.demand(v), start, k, QUAD_TOL);
        }
        total += (rule.payment(GridPoint::exact(k)) - before) * dist.demand(k);
        start = k;
    }
    Ok(total)
}

/// Hindsight-optimal posted price and its revenue `max_p p P(V >= p)`.
///
/// Ties go to the lowest price.
pub fn optimal_posted_revenue(dist: &ParametricDistribution) -> (f64, f64) {
    match dist {
        ParametricDistribution::Discrete { dist: d, .. } => {
            let mut best = (0.0, 0.0);
            for &(a, _) in &d.atoms {
                let rev = a.value * dist.demand(a.value);
                if rev > best.1 {
                    best = (a.value, rev);
                }
            }
            best
        }
        ParametricDistribution::Beta { vbar, .. } => {
            let rev = |p: f64| p * dist.demand(p);
            let step = vbar / COARSE_GRID as f64;
            let k = (0..=COARSE_GRID)
                .map(|k| (k, rev(k as f64 * step)))
                .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
                .0;
            let (mut lo, mut hi) = ((k as f64 - 1.0).max(0.0) * step, ((k + 1) as f64 * step).min(*vbar));
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
            let (mut fc, mut fd) = (rev(c), rev(d));
            while hi - lo > PRICE_TOL {
                if fc >= fd {
                    hi = d;
                    (d, fd) = (c, fc);
                    c = hi - g * (hi - lo);
                    fc = rev(c);
                } else {
                    lo = c;
                    (c, fc) = (d, fd);
                    d = lo + g * (hi - lo);
                    fd = rev(d);
                }
            }
            let p = 0.5 * (lo + hi);
            let coarse = k as f64 * step;
            if rev(coarse) > rev(p) {
                (coarse, rev(coarse))
            } else {
                (p, rev(p))
            }
        }
    }
}

/// Revenue under `dist` relative to the hindsight-optimal posted price.
pub fn performance_ratio(rule: &impl PaymentRule, dist: &ParametricDistribution) -> Result<f64> {
    let (_, opt) = optimal_posted_revenue(dist);
    if opt <= 0.0 {
        return domain("the distribution admits no positive posted-price revenue");
    }
    Ok(revenue_under(rule, dist)? / opt)
}

/// Largest `v` with `P(V >= v) >= xi`.
pub fn quantile_of(dist: &ParametricDistribution, xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return domain(format!("tail probability {xi} outside (0, 1)"));
    }
    match dist {
        ParametricDistribution::Discrete { dist: d, .. } => Ok(d
            .atoms
            .iter()
            .rev()
            .map(|(a, _)| a.value)
            .find(|&v| dist.demand(v) >= xi)
            .unwrap_or(0.0)),
        ParametricDistribution::Beta { vbar, .. } => {
            let (mut lo, mut hi) = (0.0, *vbar);
            while hi - lo > PRICE_TOL * vbar.max(1.0) * 1e-2 {
                let m = 0.5 * (lo + hi);
                if dist.demand(m) >= xi {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}
