//! Analytic optimal mechanisms and their guarantees.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::grid::{GridPoint, Side};
use crate::json;
use crate::mechanism::{Mechanism, PaymentRule, RatioResult};
use crate::root::bisect;

/// Branch switch for the two-level mean-set mechanism.
pub const MEAN_BRANCH_SPLIT: f64 = 0.49;

fn check_mean(mu: f64, vbar: f64) -> Result<()> {
    if !(vbar.is_finite() && vbar > 0.0) {
        return domain(format!("vbar {vbar} must be positive"));
    }
    if !(mu > 0.0 && mu <= vbar) {
        return domain(format!("mean {mu} outside (0, {vbar}]"));
    }
    Ok(())
}

fn check_quantile(omega: f64, xi: f64, vbar: f64) -> Result<()> {
    if !(vbar.is_finite() && vbar > 0.0) {
        return domain(format!("vbar {vbar} must be positive"));
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return domain(format!("quantile level {xi} outside (0, 1]"));
    }
    if !(omega >= 0.0 && omega <= vbar) {
        return domain(format!("quantile threshold {omega} outside [0, {vbar}]"));
    }
    Ok(())
}

/// Best ratio for fixed price levels under the support set `[vlo, vhi]`.
///
/// A ladder that does not start at `vlo` guarantees nothing; it is returned
/// with ratio 0 and all mass on its lowest price.
pub fn support_levels_ratio(vlo: f64, vhi: f64, prices: &[f64]) -> Result<RatioResult> {
    if !(vlo > 0.0 && vlo <= vhi && vhi.is_finite()) {
        return domain(format!("support [{vlo}, {vhi}] needs 0 < vlo <= vhi"));
    }
    let mut v = prices.to_vec();
    if v.is_empty() {
        return domain("at least one price level is required");
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    if let Some(p) = v.iter().find(|p| !(vlo..=vhi).contains(*p)) {
        return domain(format!("price {p} outside [{vlo}, {vhi}]"));
    }
    if v[0] != vlo {
        let mut probs = vec![0.0; v.len()];
        probs[0] = 1.0;
        return Ok(RatioResult::new(0.0, Mechanism::canonicalize(&v, &probs, vhi)?));
    }
    let next = |i: usize| if i + 1 < v.len() { v[i + 1] } else { vhi };
    let denom = next(0) / v[0] + (1..v.len()).map(|i| (next(i) - v[i]) / v[i]).sum::<f64>();
    let r = 1.0 / denom;
    let mut probs: Vec<f64> = Vec::with_capacity(v.len());
    probs.push(r * next(0) / vlo);
    probs.extend((1..v.len()).map(|i| r * (next(i) - v[i]) / v[i]));
    Ok(RatioResult::new(r, Mechanism::canonicalize(&v, &probs, vhi)?))
}

/// Geometric ladder `v_i = vlo^{(n+1-i)/n} vhi^{(i-1)/n}` and its ratio.
pub fn support_optimal(n: usize, vlo: f64, vhi: f64) -> Result<RatioResult> {
    if n == 0 {
        return domain("menu size must be at least 1");
    }
    if !(vlo > 0.0 && vlo <= vhi && vhi.is_finite()) {
        return domain(format!("support [{vlo}, {vhi}] needs 0 < vlo <= vhi"));
    }
    if vlo == vhi {
        return Ok(RatioResult::new(1.0, Mechanism::deterministic(vhi, vhi)?));
    }
    let nf = n as f64;
    let step = (vhi / vlo).powf(1.0 / nf);
    let r = 1.0 / (nf * step - (nf - 1.0));
    let prices: Vec<f64> = (0..n)
        .map(|i| vlo.powf((nf - i as f64) / nf) * vhi.powf(i as f64 / nf))
        .collect();
    let probs: Vec<f64> = (0..n).map(|i| if i == 0 { step * r } else { (step - 1.0) * r }).collect();
    Ok(RatioResult::new(r, Mechanism::canonicalize(&prices, &probs, vhi)?))
}

/// Ratio of the support set as the number of levels grows without bound.
pub fn support_limit(vlo: f64, vhi: f64) -> Result<f64> {
    if !(vlo > 0.0 && vlo <= vhi && vhi.is_finite()) {
        return domain(format!("support [{vlo}, {vhi}] needs 0 < vlo <= vhi"));
    }
    Ok(1.0 / ((vhi / vlo).ln() + 1.0))
}

/// Ratio of a ladder when nature may only place valuations on the ladder itself.
pub fn ladder_only_ratio(prices: &[f64]) -> f64 {
    let n = prices.len() as f64;
    let s: f64 = prices.windows(2).map(|w| w[0] / w[1]).sum();
    1.0 / (n - s)
}

fn mean_price(mu: f64, vbar: f64) -> f64 {
    vbar - (vbar * vbar - mu * vbar).sqrt()
}

pub fn mean_one_level(mu: f64, vbar: f64) -> Result<RatioResult> {
    check_mean(mu, vbar)?;
    let v1 = mean_price(mu, vbar);
    let r = 1.0 - (1.0 - mu / vbar).sqrt();
    Ok(RatioResult::new(r, Mechanism::deterministic(v1.min(vbar), vbar)?))
}

/// `(v2, x1, ratio)` of the low-mean branch.
fn mean_branch_low(v1: f64, vbar: f64) -> (f64, f64, f64) {
    let v2 = (v1 * vbar).sqrt();
    let x1 = 1.0 / (2.0 - (v1 / vbar).sqrt());
    let r = 1.0 / (2.0 * (vbar / v1).sqrt() - 1.0);
    (v2, x1, r)
}

/// `(v2, x1, ratio)` of the high-mean branch.
fn mean_branch_high(mu: f64, v1: f64, vbar: f64) -> (f64, f64, f64) {
    let v2 = (v1 + (v1 * v1 + 8.0 * v1 * vbar).sqrt()) / 4.0;
    let g = 2.0 * v2 * vbar - v2 * v2 - mu * vbar;
    let d = (v2 - v1) * g + v1 * vbar * (vbar - mu);
    (v2, v2 * g / d, v1 * v2 * (vbar - mu) / d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanTwoLevel {
    pub result: RatioResult,
    /// Whether the upper price is at least the mean.
    pub upper_at_least_mean: bool,
}

pub fn mean_two_level(mu: f64, vbar: f64) -> Result<MeanTwoLevel> {
    check_mean(mu, vbar)?;
    if mu == vbar {
        return Ok(MeanTwoLevel {
            result: RatioResult::new(1.0, Mechanism::deterministic(vbar, vbar)?),
            upper_at_least_mean: true,
        });
    }
    let v1 = mean_price(mu, vbar);
    let share = mu / vbar;
    let (v2, x1, r) = if share <= MEAN_BRANCH_SPLIT {
        mean_branch_low(v1, vbar)
    } else {
        mean_branch_high(mu, v1, vbar)
    };
    if (share - MEAN_BRANCH_SPLIT).abs() < 0.005 {
        if let Ok(c) = mean_branch_crossover() {
            log::warn!("mean share {share} is near the branch split {MEAN_BRANCH_SPLIT}; the branch ratios cross at {c}");
        }
    }
    let result = RatioResult::new(r, Mechanism::canonicalize(&[v1, v2], &[x1, 1.0 - x1], vbar)?);
    Ok(MeanTwoLevel { result, upper_at_least_mean: v2 >= mu })
}

/// Mean share at which the two branch ratios coincide.
pub fn mean_branch_crossover() -> Result<f64> {
    let gap = |s: f64| {
        let v1 = mean_price(s, 1.0);
        mean_branch_low(v1, 1.0).2 - mean_branch_high(s, v1, 1.0).2
    };
    bisect(gap, 0.3, 0.7)
}

/// Two-level mechanism feasible under a mean-variance set, with its guaranteed ratio.
///
/// The support is unbounded, so the returned mechanism's `vbar` is its upper price.
pub fn meanvar_two_level_approx(mu: f64, sigma: f64) -> Result<(Mechanism, f64)> {
    if !(mu > 0.0 && mu.is_finite()) {
        return domain(format!("mean {mu} must be positive"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return domain(format!("standard deviation {sigma} must be nonnegative"));
    }
    if sigma == 0.0 {
        return Ok((Mechanism::deterministic(mu, mu)?, 1.0));
    }
    let s2 = sigma * sigma;
    let v1 = if sigma <= (5f64.sqrt() - 2.0).sqrt() * mu {
        bisect(|v| (mu - v).powi(3) - (2.0 * v - mu) * s2, mu / 2.0, mu)?
    } else {
        let c = 2.0 / (9.0 + 5f64.sqrt());
        bisect(|v| (mu - v).powi(3) - c * (7.0 * v - 3.0 * mu) * s2, 3.0 * mu / 7.0, mu)?
    };
    if !(v1 > 0.0 && v1 < mu) {
        return Err(Error::Numeric(format!("lower price {v1} left (0, {mu})")));
    }
    let spread = mu + s2 / (mu - v1);
    let v2 = (v1 * spread).sqrt();
    let a = (s2 + mu * (mu - v1)).sqrt();
    let x1 = a / (2.0 * a - (v1 * (mu - v1)).sqrt());
    let r = 1.0 / (2.0 * (spread / v1).sqrt() - 1.0);
    Ok((Mechanism::canonicalize(&[v1, v2], &[x1, 1.0 - x1], v2)?, r))
}

pub fn meanvar_ratio_lower_bound(mu: f64, sigma: f64) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return domain(format!("mean {mu} must be positive"));
    }
    let cv = sigma / mu;
    Ok(1.0 / (7.0 * 3f64.sqrt() / 3.0 * (4.0 / 7.0 + cv * cv).sqrt()))
}

pub fn quantile_one_level(omega: f64, xi: f64, vbar: f64) -> Result<RatioResult> {
    check_quantile(omega, xi, vbar)?;
    let v1 = omega.min(xi * vbar);
    let r = xi.min(omega / vbar);
    Ok(RatioResult::new(r, Mechanism::deterministic(v1, vbar)?))
}

/// Falls back to the one-level answer when the two prices coincide.
pub fn quantile_two_level(omega: f64, xi: f64, vbar: f64) -> Result<RatioResult> {
    check_quantile(omega, xi, vbar)?;
    let one = quantile_one_level(omega, xi, vbar)?;
    if omega == 0.0 {
        return Ok(one);
    }
    let (v1, v2, x1, r) = if xi * vbar <= omega {
        let v1 = xi * vbar;
        let v2 = omega.min(xi.sqrt() * vbar);
        if v2 <= v1 {
            return Ok(one);
        }
        let x1 = (v2 - v1) / (xi * vbar * vbar / v2 - 2.0 * v1 + v2);
        let r = (1.0 - xi) / (vbar / v2 + v2 / v1 - 2.0);
        (v1, v2, x1, r)
    } else {
        let v1 = omega;
        let v2 = (omega / xi).max((omega * vbar).sqrt()).min(vbar);
        if v2 <= v1 {
            return Ok(one);
        }
        let x1 = v2 * v2 / (v2 * v2 - omega * v2 + omega * vbar);
        let r = 1.0 / (v2 / omega + vbar / v2 - 1.0);
        (v1, v2, x1, r)
    };
    Ok(RatioResult::new(r, Mechanism::canonicalize(&[v1, v2], &[x1, 1.0 - x1], vbar)?))
}

/// Continuous price distribution optimal under one quantile constraint.
///
/// Price density `c_low / v` on `[low_start, omega)`, an atom at `omega`,
/// and density `c_high / v` on `[phat, vbar]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileInfMechanism {
    pub omega: f64,
    pub xi: f64,
    pub vbar: f64,
    pub r: f64,
    pub phat: f64,
    pub low_start: f64,
    pub c_low: f64,
    pub atom_mass: f64,
    pub c_high: f64,
}

/// `xi = 1` collapses to the posted price `omega` with ratio `omega / vbar`.
pub fn quantile_inf(omega: f64, xi: f64, vbar: f64) -> Result<QuantileInfMechanism> {
    check_quantile(omega, xi, vbar)?;
    if omega == 0.0 {
        return domain("the unbounded-menu quantile mechanism needs omega > 0");
    }
    if xi == 1.0 {
        return Ok(QuantileInfMechanism {
            omega,
            xi,
            vbar,
            r: omega / vbar,
            phat: omega,
            low_start: omega,
            c_low: 0.0,
            atom_mass: 1.0,
            c_high: 0.0,
        });
    }
    let phat = ((2.0 - xi) * omega).min(vbar);
    let r = if (2.0 - xi) * omega < vbar {
        1.0 / (vbar.ln() - (omega * (2.0 - xi)).ln() - (xi * (2.0 - xi)).ln() / (1.0 - xi) + 1.0)
    } else {
        1.0 / ((vbar - omega) / ((1.0 - xi) * omega) + (omega.ln() - (xi * vbar).ln()) / (1.0 - xi))
    };
    Ok(QuantileInfMechanism {
        omega,
        xi,
        vbar,
        r,
        phat,
        low_start: xi * phat,
        c_low: r / (1.0 - xi),
        atom_mass: r * (phat - omega) / (omega * (1.0 - xi)),
        c_high: r,
    })
}

impl QuantileInfMechanism {
    fn reached(&self, at: GridPoint, threshold: f64) -> bool {
        match at.side {
            Side::Exact => at.value >= threshold,
            Side::LeftLimit => at.value > threshold,
        }
    }

    /// Probability that a buyer at `at` is served.
    pub fn allocation(&self, at: GridPoint) -> f64 {
        let v = at.value;
        let mut q = 0.0;
        if v > self.low_start && self.c_low > 0.0 {
            q += self.c_low * (v.min(self.omega) / self.low_start).ln();
        }
        if self.reached(at, self.omega) {
            q += self.atom_mass;
        }
        if v > self.phat && self.c_high > 0.0 {
            q += self.c_high * (v.min(self.vbar) / self.phat).ln();
        }
        q
    }

    /// Total probability of the price distribution.
    pub fn total_mass(&self) -> f64 {
        self.allocation(GridPoint::exact(self.vbar))
    }

    pub fn to_json(&self) -> String {
        format!(
            "{{\"ratio\":{},\"omega\":{},\"xi\":{},\"vbar\":{},\"segments\":[{{\"start\":{},\"end\":{},\"density_coef\":{}}},{{\"start\":{},\"end\":{},\"density_coef\":{}}}],\"point_mass\":{{\"at\":{},\"mass\":{}}}}}",
            json::number(self.r),
            json::number(self.omega),
            json::number(self.xi),
            json::number(self.vbar),
            json::number(self.low_start),
            json::number(self.omega),
            json::number(self.c_low),
            json::number(self.phat),
            json::number(self.vbar),
            json::number(self.c_high),
            json::number(self.omega),
            json::number(self.atom_mass),
        )
    }
}

impl PaymentRule for QuantileInfMechanism {
    fn vbar(&self) -> f64 {
        self.vbar
    }

    fn payment(&self, at: GridPoint) -> f64 {
        let v = at.value;
        let mut t = 0.0;
        if v > self.low_start {
            t += self.c_low * (v.min(self.omega) - self.low_start);
        }
        if self.reached(at, self.omega) {
            t += self.atom_mass * self.omega;
        }
        if v > self.phat {
            t += self.c_high * (v.min(self.vbar) - self.phat);
        }
        t
    }

    fn kinks(&self) -> Vec<f64> {
        vec![self.low_start, self.omega, self.phat, self.vbar]
    }
}

/// Maximin-revenue optimum over the mean set with `n` equally likely geometric prices.
pub fn maximin_revenue_optimal(mu: f64, vbar: f64, n: usize) -> Result<(Mechanism, f64)> {
    check_mean(mu, vbar)?;
    if n == 0 {
        return domain("menu size must be at least 1");
    }
    if mu == vbar {
        return Ok((Mechanism::deterministic(vbar, vbar)?, vbar));
    }
    let nf = n as f64;
    let g = |v: f64| mu / v + nf * (v / vbar).powf(1.0 / nf) - (nf + 1.0);
    let v1 = bisect(g, mu * 1e-12, mu)?;
    let step = (vbar / v1).powf(1.0 / nf);
    let prices: Vec<f64> = (0..n).map(|j| (v1 * step.powi(j as i32)).min(vbar)).collect();
    let probs = vec![1.0 / nf; n];
    let revenue = (mu - v1) / (nf * (step - 1.0));
    Ok((Mechanism::canonicalize(&prices, &probs, vbar)?, revenue))
}

/// Unbounded-menu maximin mechanism: payment `(v - v1) / ln(vbar / v1)` above `v1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearPaymentMechanism {
    pub v1: f64,
    pub vbar: f64,
    pub revenue: f64,
}

pub fn maximin_revenue_inf(mu: f64, vbar: f64) -> Result<LinearPaymentMechanism> {
    check_mean(mu, vbar)?;
    if mu == vbar {
        return Ok(LinearPaymentMechanism { v1: vbar, vbar, revenue: vbar });
    }
    let v1 = bisect(|v| v * (1.0 + vbar.ln() - v.ln()) - mu, mu * 1e-12, mu)?;
    Ok(LinearPaymentMechanism { v1, vbar, revenue: (mu - v1) / (vbar / v1).ln() })
}

impl PaymentRule for LinearPaymentMechanism {
    fn vbar(&self) -> f64 {
        self.vbar
    }

    fn payment(&self, at: GridPoint) -> f64 {
        if self.v1 >= self.vbar {
            return if at.value >= self.vbar && at.side == Side::Exact { self.vbar } else { 0.0 };
        }
        if at.value <= self.v1 {
            0.0
        } else {
            (at.value - self.v1) / (self.vbar / self.v1).ln()
        }
    }

    fn kinks(&self) -> Vec<f64> {
        vec![self.v1, self.vbar]
    }
}

/// Posted price minimizing worst-case regret over the mean set, with that regret.
pub fn minimax_regret_one_level(mu: f64, vbar: f64) -> Result<(f64, f64)> {
    check_mean(mu, vbar)?;
    let root = ((vbar - mu) * (3.0 * mu + vbar)).sqrt();
    let price = vbar * (mu + vbar - root) / (2.0 * mu);
    let regret = (mu - vbar + root) / 2.0;
    Ok((price, regret))
}
