//! Nature's best response to a fixed mechanism.
//!
//! For every candidate hindsight price `p` the adversary solves a small LP in
//! an unnormalized measure `h` over atom sites, with the mass at or above `p`
//! pinned to one. The optimal `h`, rescaled to a probability, is the
//! worst-case distribution.

use rayon::prelude::*;

use crate::ambiguity::AmbiguitySet;
use crate::error::{domain, Error, Result};
use crate::grid::{DiscreteDistribution, GridPoint, Side};
use crate::json;
use crate::lp::{solve_lp, LinearProgram, LpStatus, Sense, VarBound};
use crate::mechanism::PaymentRule;

/// Slack used to compare candidate values so that near-ties go to the earlier site.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseCertificate {
    /// Competitive ratio, or metric value for the alternative objectives.
    pub ratio: f64,
    pub price: GridPoint,
    pub distribution: DiscreteDistribution,
}

impl WorstCaseCertificate {
    pub fn to_json(&self) -> String {
        let atoms: Vec<String> = self
            .distribution
            .atoms
            .iter()
            .map(|(p, m)| {
                format!(
                    "{{\"value\":{},\"side\":{},\"mass\":{}}}",
                    json::number(p.value),
                    json::string(&p.side.to_string()),
                    json::number(*m)
                )
            })
            .collect();
        format!(
            "{{\"ratio\":{},\"price\":{{\"value\":{},\"side\":{}}},\"atoms\":[{}]}}",
            json::number(self.ratio),
            json::number(self.price.value),
            json::string(&self.price.side.to_string()),
            atoms.join(",")
        )
    }

    /// `Rev / (p (1 - F(p-)))` recomputed from the raw atoms.
    pub fn recomputed_ratio(&self, rule: &impl PaymentRule) -> f64 {
        let revenue: f64 = self.distribution.atoms.iter().map(|&(a, m)| rule.payment(a) * m).sum();
        revenue / (self.price.value * self.distribution.mass_at_or_above(self.price))
    }

    /// Checks that the distribution is a member of `set` and that the
    /// reported ratio matches a recomputation.
    pub fn verify(&self, rule: &impl PaymentRule, set: &AmbiguitySet) -> Result<()> {
        if (self.distribution.total_mass() - 1.0).abs() > 1e-9 {
            return Err(Error::Numeric(format!(
                "certificate mass {} is not 1",
                self.distribution.total_mass()
            )));
        }
        if !set.contains(&self.distribution, 1e-8) {
            return Err(Error::Numeric("certificate distribution violates the set".into()));
        }
        let again = self.recomputed_ratio(rule);
        if (again - self.ratio).abs() > 1e-7 {
            return Err(Error::Numeric(format!(
                "reported ratio {} but recomputed {again}",
                self.ratio
            )));
        }
        Ok(())
    }
}

/// `(0, Exact)` plus both sides of every positive value, sorted.
fn sites_from(mut values: Vec<f64>, top: f64) -> Vec<GridPoint> {
    values.retain(|&v| v > 0.0 && v <= top);
    values.push(top);
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut sites = vec![GridPoint::exact(0.0)];
    for v in values {
        sites.push(GridPoint::left(v));
        sites.push(GridPoint::exact(v));
    }
    sites
}

fn uniform(top: f64, g: usize) -> impl Iterator<Item = f64> {
    (1..=g).map(move |k| top * k as f64 / g as f64)
}

/// Column count above which the inner LP is solved by column generation.
const COLGEN_MIN: usize = 400;
/// Columns added per column-generation round.
const COLGEN_BATCH: usize = 16;
const COLGEN_ROUNDS: usize = 200;
const REDUCED_COST_TOL: f64 = 1e-10;

/// Minimizes `cost · h` over `h >= 0` subject to linear rows.
struct InnerLp {
    cost: Vec<f64>,
    rows: Vec<(Vec<f64>, Sense, f64)>,
    /// Column that must start in the restricted problem.
    anchor: usize,
}

impl InnerLp {
    /// Starts with the row `sum_{site >= p} h = 1`.
    fn new(sites: &[GridPoint], cost: &[f64], p: GridPoint) -> Self {
        let above: Vec<f64> = sites.iter().map(|&s| if s >= p { 1.0 } else { 0.0 }).collect();
        let anchor = sites.iter().position(|&s| s >= p).unwrap_or(0);
        Self { cost: cost.to_vec(), rows: vec![(above, Sense::Eq, 1.0)], anchor }
    }

    fn row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.rows.push((coeffs, sense, rhs));
    }

    /// `None` when no measure satisfies the rows.
    fn solve(&self) -> Result<Option<(f64, Vec<f64>)>> {
        let n = self.cost.len();
        if n <= COLGEN_MIN {
            return self.solve_restricted(&(0..n).collect::<Vec<_>>());
        }
        let stride = n.div_ceil(64);
        let mut cols: Vec<usize> = (0..n).step_by(stride).chain([n - 1, self.anchor]).collect();
        cols.sort_unstable();
        cols.dedup();
        for _ in 0..COLGEN_ROUNDS {
            let Some((value, h)) = self.solve_restricted(&cols)? else {
                break;
            };
            let Some(y) = self.duals(&cols, value) else {
                break;
            };
            let mut entering: Vec<(f64, usize)> = (0..n)
                .map(|j| (self.cost[j] - self.rows.iter().zip(&y).map(|(r, yk)| r.0[j] * yk).sum::<f64>(), j))
                .filter(|&(rc, _)| rc < -REDUCED_COST_TOL * (1.0 + value.abs()))
                .collect();
            if entering.is_empty() {
                let mut full = vec![0.0; n];
                for (&j, x) in cols.iter().zip(h) {
                    full[j] = x;
                }
                return Ok(Some((value, full)));
            }
            entering.sort_by(|a, b| a.0.total_cmp(&b.0));
            cols.extend(entering.iter().take(COLGEN_BATCH).map(|&(_, j)| j));
            cols.sort_unstable();
            cols.dedup();
        }
        log::debug!("column generation gave up; solving the full inner LP");
        self.solve_restricted(&(0..n).collect::<Vec<_>>())
    }

    /// Solves over the columns `cols` only; the primal comes back in that order.
    fn solve_restricted(&self, cols: &[usize]) -> Result<Option<(f64, Vec<f64>)>> {
        let mut lp = LinearProgram::new(cols.iter().map(|&j| -self.cost[j]).collect())?;
        for (coeffs, sense, rhs) in &self.rows {
            lp.add_row(cols.iter().map(|&j| coeffs[j]).collect(), *sense, *rhs)?;
        }
        let sol = solve_lp(&lp);
        match sol.status {
            LpStatus::Optimal => Ok(Some((-sol.objective, sol.primal))),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::Numeric("adversary LP unbounded".into())),
            LpStatus::NumericFailure => Err(Error::Numeric("adversary LP failed".into())),
        }
    }

    /// Row multipliers of the restricted problem, or `None` if its dual
    /// does not reproduce `value`.
    fn duals(&self, cols: &[usize], value: f64) -> Option<Vec<f64>> {
        // A `<=` row in a minimization has a nonpositive multiplier; store it negated.
        let flip: Vec<f64> = self.rows.iter().map(|r| if r.1 == Sense::Le { -1.0 } else { 1.0 }).collect();
        let mut lp = LinearProgram::new(self.rows.iter().zip(&flip).map(|(r, f)| r.2 * f).collect()).ok()?;
        for (k, r) in self.rows.iter().enumerate() {
            if r.1 == Sense::Eq {
                lp.set_bound(k, VarBound::Free).ok()?;
            }
        }
        for &j in cols {
            let coeffs = self.rows.iter().zip(&flip).map(|(r, f)| r.0[j] * f).collect();
            lp.add_row(coeffs, Sense::Le, self.cost[j]).ok()?;
        }
        let sol = solve_lp(&lp);
        if sol.status != LpStatus::Optimal || (sol.objective - value).abs() > 1e-9 * (1.0 + value.abs()) {
            return None;
        }
        Some(sol.primal.iter().zip(&flip).map(|(y, f)| y * f).collect())
    }
}

/// Smallest value in site order; a later site wins only if strictly smaller beyond the tie slack.
fn select(candidates: Vec<Option<(f64, GridPoint, Vec<f64>)>>) -> Option<(f64, GridPoint, Vec<f64>)> {
    let mut best: Option<(f64, GridPoint, Vec<f64>)> = None;
    for c in candidates.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some((b, _, _)) => c.0 < b - TIE_TOL * b.abs().max(1.0),
        };
        if better {
            best = Some(c);
        }
    }
    best
}

fn distribution_from(sites: &[GridPoint], h: &[f64]) -> Result<DiscreteDistribution> {
    let atoms = sites
        .iter()
        .zip(h)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&s, &m)| (s, m))
        .collect();
    DiscreteDistribution::new(atoms)?.normalized()
}

/// Moves mass from a left limit to its exact twin when nothing observable changes.
fn prefer_exact(sites: &[GridPoint], h: &mut [f64], p: GridPoint, same: impl Fn(usize, usize) -> bool) {
    for i in 0..sites.len().saturating_sub(1) {
        let (a, b) = (sites[i], sites[i + 1]);
        if a.is_left() && b.side == Side::Exact && a.value == b.value && b != p && h[i] > 0.0 && same(i, i + 1) {
            h[i + 1] += h[i];
            h[i] = 0.0;
        }
    }
}

fn point_mass(at: GridPoint) -> DiscreteDistribution {
    DiscreteDistribution { atoms: vec![(at, 1.0)] }
}

fn check_vbar(rule: &impl PaymentRule, vbar: f64) -> Result<()> {
    if (rule.vbar() - vbar).abs() > 1e-12 * vbar.max(1.0) {
        return domain(format!("mechanism vbar {} differs from set vbar {vbar}", rule.vbar()));
    }
    Ok(())
}

/// Worst-case competitive ratio of `rule` over `set`.
///
/// With `dense_fill = Some(g)`, `g` evenly spaced exact valuations join the
/// atom and hindsight-price sites.
pub fn worst_case_ratio(
    rule: &impl PaymentRule,
    set: &AmbiguitySet,
    dense_fill: Option<usize>,
) -> Result<WorstCaseCertificate> {
    let vbar = set.vbar();
    check_vbar(rule, vbar)?;
    if set.forces_point_mass_at_top() {
        let top = GridPoint::exact(vbar);
        let cert = WorstCaseCertificate {
            ratio: rule.payment(top) / vbar,
            price: top,
            distribution: point_mass(top),
        };
        cert.verify(rule, set)?;
        return Ok(cert);
    }
    let mut values = rule.kinks();
    values.extend(set.breakpoints());
    if let Some(g) = dense_fill {
        values.extend(uniform(vbar, g));
    }
    let sites = sites_from(values, vbar);
    let payments: Vec<f64> = sites.iter().map(|&s| rule.payment(s)).collect();
    let phis: Vec<Vec<f64>> = sites.iter().map(|&s| set.phi_all(s)).collect();

    let candidates = sites
        .par_iter()
        .filter(|p| p.value > 0.0)
        .map(|&p| -> Result<Option<(f64, GridPoint, Vec<f64>)>> {
            let mut inner = InnerLp::new(&sites, &payments, p);
            for k in 0..set.num_constraints() {
                inner.row(phis.iter().map(|phi| phi[k]).collect(), Sense::Ge, 0.0);
            }
            Ok(inner.solve()?.map(|(value, h)| (value / p.value, p, h)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ratio, price, mut h) =
        select(candidates).ok_or_else(|| Error::Infeasible("no hindsight price admits a distribution in the set".into()))?;
    prefer_exact(&sites, &mut h, price, |a, b| payments[a] == payments[b] && phis[a] == phis[b]);
    let cert = WorstCaseCertificate { ratio, price, distribution: distribution_from(&sites, &h)? };
    cert.verify(rule, set)?;
    Ok(cert)
}

/// Worst case of `Rev - alpha * p (1 - F(p-))` over the mean set.
pub fn worst_case_alpha_metric(
    rule: &impl PaymentRule,
    mu: f64,
    vbar: f64,
    alpha: f64,
) -> Result<WorstCaseCertificate> {
    if !(0.0..=1.0).contains(&alpha) {
        return domain(format!("alpha {alpha} outside [0, 1]"));
    }
    let set = AmbiguitySet::mean(mu, vbar)?;
    check_vbar(rule, vbar)?;
    let metric = |price: GridPoint, dist: &DiscreteDistribution| {
        let revenue: f64 = dist.atoms.iter().map(|&(a, m)| rule.payment(a) * m).sum();
        revenue - alpha * price.value * dist.mass_at_or_above(price)
    };
    if mu == vbar {
        let top = GridPoint::exact(vbar);
        let distribution = point_mass(top);
        return Ok(WorstCaseCertificate { ratio: metric(top, &distribution), price: top, distribution });
    }
    let sites = sites_from(rule.kinks(), vbar);
    let payments: Vec<f64> = sites.iter().map(|&s| rule.payment(s)).collect();
    let candidates = sites
        .par_iter()
        .map(|&p| -> Result<Option<(f64, GridPoint, Vec<f64>)>> {
            let objective: Vec<f64> = sites
                .iter()
                .zip(&payments)
                .map(|(&s, &t)| if s >= p { t - alpha * p.value } else { t })
                .collect();
            let inner = InnerLp {
                cost: objective,
                rows: vec![
                    (vec![1.0; sites.len()], Sense::Eq, 1.0),
                    (sites.iter().map(|s| s.value - mu).collect(), Sense::Eq, 0.0),
                ],
                anchor: 0,
            };
            Ok(inner.solve()?.map(|(value, f)| (value, p, f)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (value, price, mut f) = select(candidates).ok_or_else(|| Error::Infeasible("mean set is empty".into()))?;
    prefer_exact(&sites, &mut f, price, |a, b| payments[a] == payments[b]);
    let distribution = distribution_from(&sites, &f)?;
    let again = metric(price, &distribution);
    if (again - value).abs() > 1e-7 || !set.contains(&distribution, 1e-8) {
        return Err(Error::Numeric(format!("metric certificate inconsistent: {value} vs {again}")));
    }
    Ok(WorstCaseCertificate { ratio: value, price, distribution })
}

/// Worst-case ratio over distributions with mean `mu` and standard deviation
/// at most `sigma`, restricted to a grid on `[0, vmax]`.
///
/// The restriction makes the result an upper bound on the true infimum.
/// `vmax` defaults to `mu + 50 sigma`.
pub fn worst_case_meanvar(
    rule: &impl PaymentRule,
    mu: f64,
    sigma: f64,
    vmax: Option<f64>,
    gridsize: usize,
) -> Result<WorstCaseCertificate> {
    if !(mu > 0.0 && mu.is_finite()) {
        return domain(format!("mean {mu} must be positive"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return domain(format!("standard deviation {sigma} must be nonnegative"));
    }
    let at_mean = GridPoint::exact(mu);
    if sigma == 0.0 {
        return Ok(WorstCaseCertificate {
            ratio: rule.payment(at_mean) / mu,
            price: at_mean,
            distribution: point_mass(at_mean),
        });
    }
    let vmax = vmax.unwrap_or(mu + 50.0 * sigma);
    if !(vmax > mu && vmax.is_finite()) {
        return domain(format!("truncation {vmax} must exceed the mean {mu}"));
    }
    if gridsize < 1000 {
        return domain(format!("grid size {gridsize} below the minimum of 1000"));
    }
    let mut values: Vec<f64> = uniform(vmax, gridsize).collect();
    values.push(mu);
    let kinks = rule.kinks();
    let mut sites = sites_from(values, vmax);
    // Only mechanism kinks need a left-limit copy; the rest are exact.
    let has_kink = |v: f64| kinks.iter().any(|&k| k == v);
    sites.retain(|s| s.side == Side::Exact || has_kink(s.value));
    for &k in kinks.iter().filter(|&&k| k > 0.0 && k <= vmax) {
        sites.push(GridPoint::left(k));
        sites.push(GridPoint::exact(k));
    }
    sites.sort();
    sites.dedup();

    let payments: Vec<f64> = sites.iter().map(|&s| rule.payment(s)).collect();
    let var_bound = mu * mu + sigma * sigma;
    let first: Vec<f64> = sites.iter().map(|s| s.value - mu).collect();
    let second: Vec<f64> = sites.iter().map(|s| s.value * s.value - var_bound).collect();
    let candidates = sites
        .par_iter()
        .filter(|p| p.value > 0.0)
        .map(|&p| -> Result<Option<(f64, GridPoint, Vec<f64>)>> {
            let mut inner = InnerLp::new(&sites, &payments, p);
            inner.row(first.clone(), Sense::Eq, 0.0);
            inner.row(second.clone(), Sense::Le, 0.0);
            Ok(inner.solve()?.map(|(value, h)| (value / p.value, p, h)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ratio, price, mut h) = select(candidates).ok_or_else(|| Error::Infeasible("mean-variance set is empty".into()))?;
    prefer_exact(&sites, &mut h, price, |a, b| payments[a] == payments[b]);
    let distribution = distribution_from(&sites, &h)?;
    let cell = vmax / gridsize as f64;
    let top_mass: f64 = distribution.atoms.iter().filter(|(a, _)| a.value > vmax - cell).map(|(_, m)| m).sum();
    if top_mass > 1e-6 {
        log::warn!("worst case puts mass {top_mass} in the top grid cell; raise the truncation {vmax}");
    }
    let cert = WorstCaseCertificate { ratio, price, distribution };
    let again = cert.recomputed_ratio(rule);
    let d = &cert.distribution;
    let var: f64 = d.atoms.iter().map(|(a, m)| (a.value - mu).powi(2) * m).sum();
    if (again - ratio).abs() > 1e-7 || (d.mean() - mu).abs() > 1e-7 * vmax || var > sigma * sigma + 1e-7 * vmax * vmax {
        return Err(Error::Numeric(format!("mean-variance certificate inconsistent: {ratio} vs {again}")));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{meanvar_two_level_approx, quantile_inf, support_optimal};
    use crate::lp_builder::solve_ratio_given_prices;
    use crate::mechanism::Mechanism;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn support_two_level_equalizes() {
        let set = AmbiguitySet::support(1.0, 100.0).unwrap();
        let m = support_optimal(2, 1.0, 100.0).unwrap().mechanism;
        let cert = worst_case_ratio(&m, &set, None).unwrap();
        assert_abs_diff_eq!(cert.ratio, 1.0 / 19.0, epsilon = 1e-8);
        let p = cert.price;
        assert!(
            (p.side == Side::LeftLimit && (p.value - 10.0).abs() < 1e-9)
                || (p.side == Side::Exact && p.value == 100.0)
                || (p.side == Side::LeftLimit && p.value == 100.0),
            "{p}"
        );
    }

    #[test]
    fn mean_deterministic_price() {
        let set = AmbiguitySet::mean(0.5, 1.0).unwrap();
        let m = Mechanism::deterministic(0.3, 1.0).unwrap();
        let cert = worst_case_ratio(&m, &set, None).unwrap();
        assert_abs_diff_eq!(cert.ratio, 2.0 / 7.0, epsilon = 1e-9);
        let atoms: Vec<GridPoint> = cert.distribution.atoms.iter().map(|a| a.0).collect();
        assert_eq!(atoms, vec![GridPoint::left(0.3), GridPoint::exact(1.0)]);
    }

    #[test]
    fn collapsed_support_is_a_point_mass() {
        let set = AmbiguitySet::support(2.0, 2.0).unwrap();
        let m = Mechanism::canonicalize(&[1.0, 2.0], &[0.5, 0.5], 2.0).unwrap();
        let cert = worst_case_ratio(&m, &set, None).unwrap();
        assert_abs_diff_eq!(cert.ratio, 0.75, epsilon = 1e-15);
        assert_eq!(cert.distribution.atoms, vec![(GridPoint::exact(2.0), 1.0)]);
    }

    #[test]
    fn vbar_mismatch_is_rejected() {
        let set = AmbiguitySet::mean(0.5, 1.0).unwrap();
        let m = Mechanism::deterministic(0.3, 2.0).unwrap();
        assert!(matches!(worst_case_ratio(&m, &set, None), Err(Error::Domain(_))));
    }

    #[test]
    fn certificate_json_shape() {
        let set = AmbiguitySet::mean(0.5, 1.0).unwrap();
        let m = Mechanism::deterministic(0.3, 1.0).unwrap();
        let cert = worst_case_ratio(&m, &set, None).unwrap();
        let v: serde_json::Value = serde_json::from_str(&cert.to_json()).unwrap();
        assert_eq!(v["price"]["side"], "LeftLimit");
        assert_eq!(v["atoms"].as_array().unwrap().len(), 2);
        assert_eq!(v["atoms"][0]["side"], "LeftLimit");
    }

    #[test]
    fn alpha_metric_examples() {
        let p = 1.0 - 0.5f64.sqrt();
        let m = Mechanism::deterministic(p, 1.0).unwrap();
        assert_abs_diff_eq!(worst_case_alpha_metric(&m, 0.5, 1.0, 0.0).unwrap().ratio, p * p, epsilon = 1e-9);
        let m = Mechanism::deterministic(0.381966, 1.0).unwrap();
        assert_abs_diff_eq!(worst_case_alpha_metric(&m, 0.5, 1.0, 1.0).unwrap().ratio, -0.309017, epsilon = 1e-6);
        let m = Mechanism::deterministic(1.0, 1.0).unwrap();
        assert_eq!(worst_case_alpha_metric(&m, 1.0, 1.0, 0.0).unwrap().ratio, 1.0);
        assert!(worst_case_alpha_metric(&m, 0.5, 1.0, 1.5).is_err());
        assert!(worst_case_alpha_metric(&m, 1.5, 1.0, 0.5).is_err());
    }

    #[test]
    fn alpha_metric_matches_its_lp() {
        use crate::lp_builder::solve_alpha_metric_given_prices;
        for alpha in [0.0, 0.3, 0.7, 1.0] {
            for prices in [vec![0.2, 0.5], vec![0.1, 0.4, 0.8]] {
                let (delta, m) = solve_alpha_metric_given_prices(0.5, 1.0, &prices, alpha).unwrap();
                let cert = worst_case_alpha_metric(&m, 0.5, 1.0, alpha).unwrap();
                assert_abs_diff_eq!(cert.ratio, delta, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn meanvar_degenerate_and_errors() {
        let m = Mechanism::deterministic(1.0, 1.0).unwrap();
        assert_eq!(worst_case_meanvar(&m, 1.0, 0.0, None, 1000).unwrap().ratio, 1.0);
        assert!(worst_case_meanvar(&m, 1.0, 1.0, Some(0.5), 1000).is_err());
        assert!(worst_case_meanvar(&m, 1.0, 1.0, None, 10).is_err());
    }

    #[test]
    fn meanvar_two_level_brackets_its_guarantee() {
        let (m, r) = meanvar_two_level_approx(1.0, 1.0).unwrap();
        let cert = worst_case_meanvar(&m, 1.0, 1.0, Some(50.0), 4000).unwrap();
        assert!(cert.ratio >= r - 1e-9 && cert.ratio <= 0.2582 + 5e-3, "{} vs {r}", cert.ratio);
        let (m, _) = meanvar_two_level_approx(1.0, 0.5).unwrap();
        let cert = worst_case_meanvar(&m, 1.0, 0.5, None, 2000).unwrap();
        assert!(cert.ratio >= 0.4393 - 1e-4, "{}", cert.ratio);
    }

    #[test]
    fn meanvar_refinement_never_raises_the_ratio() {
        let (m, _) = meanvar_two_level_approx(1.0, 2.0).unwrap();
        let coarse = worst_case_meanvar(&m, 1.0, 2.0, Some(40.0), 1000).unwrap().ratio;
        let fine = worst_case_meanvar(&m, 1.0, 2.0, Some(40.0), 2000).unwrap().ratio;
        assert!(fine <= coarse + 1e-9);
    }

    #[test]
    fn quantile_inf_with_dense_grid() {
        let q = quantile_inf(0.5, 0.5, 1.0).unwrap();
        let set = AmbiguitySet::quantile(&[(0.5, 0.5)], 1.0).unwrap();
        let cert = worst_case_ratio(&q, &set, Some(1000)).unwrap();
        assert!((cert.ratio - q.r).abs() < 2e-3, "{} vs {}", cert.ratio, q.r);
    }

    fn arb_case() -> impl Strategy<Value = (AmbiguitySet, Vec<f64>)> {
        let set = prop_oneof![
            (0.05f64..0.95).prop_map(|vlo| AmbiguitySet::support(vlo, 1.0).unwrap()),
            (0.05f64..0.95).prop_map(|mu| AmbiguitySet::mean(mu, 1.0).unwrap()),
            (0.05f64..0.95, 0.05f64..0.95).prop_map(|(w, xi)| AmbiguitySet::quantile(&[(w, xi)], 1.0).unwrap()),
            (0.1f64..0.9, 0.05f64..0.9).prop_map(|(a, bound)| {
                use crate::ambiguity::IntervalConstraint;
                let c = IntervalConstraint { intervals: vec![(a * 0.5, a)], bound };
                AmbiguitySet::multisegment(vec![c], 1.0).unwrap()
            }),
        ];
        (set, prop::collection::vec(0.01f64..=1.0, 1..4))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn oracle_matches_synthesis((set, prices) in arb_case()) {
            let res = solve_ratio_given_prices(&set, &prices).unwrap();
            let cert = worst_case_ratio(&res.mechanism, &set, None).unwrap();
            prop_assert!((cert.ratio - res.ratio).abs() <= 1e-7, "{} vs {}", cert.ratio, res.ratio);
            let dense = worst_case_ratio(&res.mechanism, &set, Some(200)).unwrap();
            prop_assert!(dense.ratio >= cert.ratio - 1e-7);
        }
    }
}
