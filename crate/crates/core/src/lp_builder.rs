//! Finite linear programs for fixed price levels.
//!
//! [`build_ratio_lp`] is the competitive-ratio program over a [`MergedGrid`];
//! the mean-set programs for the alternative metrics follow it.

use crate::ambiguity::{AmbiguitySet, MergedGrid};
use crate::error::{domain, Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Sense, VarBound};
use crate::mechanism::{Mechanism, RatioResult};

/// Grids larger than this are solved by adding violated rows on demand
/// instead of materializing all `N^2` of them.
pub const ROW_GENERATION_THRESHOLD: usize = 24;
const ROW_GENERATION_TOL: f64 = 1e-10;

/// Column and row indices of the ratio LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatioLpLayout {
    pub num_constraints: usize,
    pub num_grid: usize,
    pub num_prices: usize,
}

impl RatioLpLayout {
    pub fn lambda(&self, k: usize, i: usize) -> usize {
        i * self.num_constraints + k
    }

    pub fn x(&self, l: usize) -> usize {
        self.num_constraints * self.num_grid + l
    }

    pub fn r(&self) -> usize {
        self.num_constraints * self.num_grid + self.num_prices
    }

    pub fn num_cols(&self) -> usize {
        self.r() + 1
    }

    /// Row for hindsight point `i` and buyer point `j`.
    pub fn row(&self, i: usize, j: usize) -> usize {
        i * self.num_grid + j
    }

    pub fn normalization_row(&self) -> usize {
        self.num_grid * self.num_grid
    }

    pub fn num_rows(&self) -> usize {
        self.num_grid * self.num_grid + 1
    }
}

fn layout_of(set: &AmbiguitySet, grid: &MergedGrid) -> RatioLpLayout {
    RatioLpLayout {
        num_constraints: set.num_constraints(),
        num_grid: grid.len(),
        num_prices: grid.prices.len(),
    }
}

/// Sparse entries of row `(i, j)`; every row reads `entries <= 0`.
fn ratio_row(layout: &RatioLpLayout, grid: &MergedGrid, i: usize, j: usize) -> Vec<(usize, f64)> {
    let mut entries = Vec::with_capacity(layout.num_constraints + grid.below[j] + 1);
    if j >= i {
        entries.push((layout.r(), grid.points[i].value));
    }
    for (k, &phi) in grid.phi_lower[j].iter().enumerate() {
        if phi != 0.0 {
            entries.push((layout.lambda(k, i), phi));
        }
    }
    for (l, &v) in grid.members(j).iter().enumerate() {
        if v != 0.0 {
            entries.push((layout.x(l), -v));
        }
    }
    entries
}

fn ratio_skeleton(layout: &RatioLpLayout) -> Result<LinearProgram> {
    let mut objective = vec![0.0; layout.num_cols()];
    objective[layout.r()] = 1.0;
    let mut lp = LinearProgram::new(objective)?;
    let norm: Vec<(usize, f64)> = (0..layout.num_prices).map(|l| (layout.x(l), 1.0)).collect();
    lp.add_sparse_row(&norm, Sense::Eq, 1.0)?;
    Ok(lp)
}

/// Materializes the full ratio LP: `N^2` payment rows plus the normalization row.
pub fn build_ratio_lp(set: &AmbiguitySet, prices: &[f64]) -> Result<(LinearProgram, RatioLpLayout)> {
    let grid = set.merged_grid(prices)?;
    let layout = layout_of(set, &grid);
    let mut objective = vec![0.0; layout.num_cols()];
    objective[layout.r()] = 1.0;
    let mut lp = LinearProgram::new(objective)?;
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            lp.add_sparse_row(&ratio_row(&layout, &grid, i, j), Sense::Le, 0.0)?;
        }
    }
    let norm: Vec<(usize, f64)> = (0..layout.num_prices).map(|l| (layout.x(l), 1.0)).collect();
    lp.add_sparse_row(&norm, Sense::Eq, 1.0)?;
    Ok((lp, layout))
}

fn status_error(status: LpStatus) -> Error {
    match status {
        LpStatus::Infeasible => Error::Infeasible("ratio LP has no feasible point".into()),
        // An unbounded ratio means nature has no distribution to play.
        LpStatus::Unbounded => Error::Infeasible("ambiguity set admits no distribution".into()),
        _ => Error::Numeric("simplex failed on the ratio LP".into()),
    }
}

fn mechanism_from(prices: &[f64], x: &[f64], vbar: f64) -> Result<Mechanism> {
    let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::Numeric("LP returned an all-zero price distribution".into()));
    }
    let probs: Vec<f64> = clipped.iter().map(|v| v / total).collect();
    Mechanism::canonicalize(prices, &probs, vbar)
}

/// Optimal probabilities and competitive ratio for the given price levels.
pub fn solve_ratio_given_prices(set: &AmbiguitySet, prices: &[f64]) -> Result<RatioResult> {
    if prices.is_empty() {
        return domain("at least one price level is required");
    }
    let grid = set.merged_grid(prices)?;
    if set.forces_point_mass_at_top() {
        let top = *grid.prices.last().expect("nonempty");
        return Ok(RatioResult::new(top / set.vbar(), Mechanism::deterministic(top, set.vbar())?));
    }
    let layout = layout_of(set, &grid);
    let z = if grid.len() <= ROW_GENERATION_THRESHOLD {
        let (lp, _) = build_ratio_lp(set, prices)?;
        let sol = solve_lp(&lp);
        if sol.status != LpStatus::Optimal {
            return Err(status_error(sol.status));
        }
        sol.primal
    } else {
        solve_by_row_generation(&grid, &layout)?
    };
    let x: Vec<f64> = (0..layout.num_prices).map(|l| z[layout.x(l)]).collect();
    let lambdas: Vec<f64> = (0..layout.num_grid)
        .flat_map(|i| (0..layout.num_constraints).map(move |k| (k, i)))
        .map(|(k, i)| z[layout.lambda(k, i)])
        .collect();
    let ratio = z[layout.r()].clamp(0.0, 1.0);
    Ok(RatioResult {
        ratio,
        mechanism: mechanism_from(&grid.prices, &x, set.vbar())?,
        dualvars: Some(lambdas),
    })
}

fn solve_by_row_generation(grid: &MergedGrid, layout: &RatioLpLayout) -> Result<Vec<f64>> {
    let n = grid.len();
    let mut lp = ratio_skeleton(layout)?;
    let mut active = vec![vec![false; n]; n];
    let add = |lp: &mut LinearProgram, active: &mut Vec<Vec<bool>>, i: usize, j: usize| -> Result<()> {
        if !active[i][j] {
            active[i][j] = true;
            lp.add_sparse_row(&ratio_row(layout, grid, i, j), Sense::Le, 0.0)?;
        }
        Ok(())
    };
    // Seed rows: the hindsight row itself, the top row, and for every
    // constraint the rows where its value peaks on either side of `i`.
    for i in 0..n {
        add(&mut lp, &mut active, i, i)?;
        add(&mut lp, &mut active, i, n - 1)?;
        for k in 0..layout.num_constraints {
            let peak = |range: std::ops::Range<usize>| {
                range.max_by(|&a, &b| grid.phi_lower[a][k].total_cmp(&grid.phi_lower[b][k]))
            };
            if let Some(j) = peak(0..i) {
                add(&mut lp, &mut active, i, j)?;
            }
            if let Some(j) = peak(i..n) {
                add(&mut lp, &mut active, i, j)?;
            }
        }
    }
    let mut rounds = 0;
    loop {
        rounds += 1;
        let sol = solve_lp(&lp);
        if sol.status != LpStatus::Optimal {
            return Err(status_error(sol.status));
        }
        let z = sol.primal;
        let mut paid = Vec::with_capacity(n);
        for j in 0..n {
            paid.push(grid.members(j).iter().enumerate().map(|(l, v)| v * z[layout.x(l)]).sum::<f64>());
        }
        let r = z[layout.r()];
        let mut added = 0;
        for i in 0..n {
            let mut worst = (ROW_GENERATION_TOL, None);
            for j in 0..n {
                if active[i][j] {
                    continue;
                }
                let mut lhs = -paid[j];
                if j >= i {
                    lhs += r * grid.points[i].value;
                }
                for (k, &phi) in grid.phi_lower[j].iter().enumerate() {
                    lhs += phi * z[layout.lambda(k, i)];
                }
                if lhs > worst.0 {
                    worst = (lhs, Some(j));
                }
            }
            if let (_, Some(j)) = worst {
                add(&mut lp, &mut active, i, j)?;
                added += 1;
            }
        }
        log::debug!("row generation round {rounds}: {} rows, {added} added", lp.rows().len());
        if added == 0 {
            return Ok(z);
        }
    }
}

/// Mean-set LP for the metric `Rev - alpha * OPT`: maximize the guaranteed value `Delta`.
///
/// Columns: `x_1..x_n`, then `lambda_1..lambda_{n+1}` (free), then `Delta` (free).
pub fn build_alpha_metric_lp(mu: f64, vbar: f64, prices: &[f64], alpha: f64) -> Result<LinearProgram> {
    if !(0.0..=1.0).contains(&alpha) {
        return domain(format!("alpha {alpha} outside [0, 1]"));
    }
    let levels = mean_levels(mu, vbar, prices)?;
    let n = levels.len();
    let lam = |i: usize| n + i;
    let delta = 2 * n + 1;
    let mut objective = vec![0.0; delta + 1];
    objective[delta] = 1.0;
    let mut lp = LinearProgram::new(objective)?;
    for i in 0..=n {
        lp.set_bound(lam(i), VarBound::Free)?;
    }
    lp.set_bound(delta, VarBound::Free)?;
    let with_top: Vec<f64> = levels.iter().copied().chain([vbar]).collect();
    for i in 0..=n {
        for j in 0..=n {
            let mut row = vec![(delta, 1.0), (lam(i), with_top[j] - mu)];
            row.extend((0..j).map(|l| (l, -levels[l])));
            let rhs = if j >= i { -alpha * with_top[i] } else { 0.0 };
            lp.add_sparse_row(&row, Sense::Le, rhs)?;
        }
        lp.add_sparse_row(&[(delta, 1.0), (lam(i), -mu)], Sense::Le, 0.0)?;
    }
    let norm: Vec<(usize, f64)> = (0..n).map(|l| (l, 1.0)).collect();
    lp.add_sparse_row(&norm, Sense::Eq, 1.0)?;
    Ok(lp)
}

fn mean_levels(mu: f64, vbar: f64, prices: &[f64]) -> Result<Vec<f64>> {
    if !(vbar.is_finite() && vbar > 0.0) {
        return domain(format!("vbar {vbar} must be positive"));
    }
    if !(mu > 0.0 && mu <= vbar) {
        return domain(format!("mean {mu} outside (0, {vbar}]"));
    }
    if prices.is_empty() {
        return domain("at least one price level is required");
    }
    if let Some(p) = prices.iter().find(|p| !(0.0..=vbar).contains(*p)) {
        return domain(format!("price {p} outside [0, {vbar}]"));
    }
    let mut levels = prices.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    Ok(levels)
}

/// Best guaranteed `Rev - alpha * OPT` over the mean set at fixed price levels.
pub fn solve_alpha_metric_given_prices(mu: f64, vbar: f64, prices: &[f64], alpha: f64) -> Result<(f64, Mechanism)> {
    let levels = mean_levels(mu, vbar, prices)?;
    if mu == vbar {
        let top = *levels.last().expect("nonempty");
        return Ok((top - alpha * vbar, Mechanism::deterministic(top, vbar)?));
    }
    let lp = build_alpha_metric_lp(mu, vbar, prices, alpha)?;
    let sol = solve_lp(&lp).into_optimal("alpha-metric LP")?;
    let n = levels.len();
    let mechanism = mechanism_from(&levels, &sol.primal[..n], vbar)?;
    Ok((sol.primal[2 * n + 1], mechanism))
}

/// Maximin-revenue LP over the mean set: columns `x_1..x_n`, `lambda_0` (free), `lambda_1 >= 0`.
pub fn build_maximin_revenue_lp(mu: f64, vbar: f64, prices: &[f64]) -> Result<LinearProgram> {
    let levels = mean_levels(mu, vbar, prices)?;
    let n = levels.len();
    let (l0, l1) = (n, n + 1);
    let mut objective = vec![0.0; n + 2];
    objective[l0] = 1.0;
    let mut lp = LinearProgram::new(objective)?;
    lp.set_bound(l0, VarBound::Free)?;
    let with_top: Vec<f64> = levels.iter().copied().chain([vbar]).collect();
    for (j, &vj) in with_top.iter().enumerate() {
        let mut row = vec![(l0, 1.0), (l1, vj - mu)];
        row.extend((0..j).map(|l| (l, -levels[l])));
        lp.add_sparse_row(&row, Sense::Le, 0.0)?;
    }
    let norm: Vec<(usize, f64)> = (0..n).map(|l| (l, 1.0)).collect();
    lp.add_sparse_row(&norm, Sense::Eq, 1.0)?;
    Ok(lp)
}

pub fn solve_maximin_revenue_given_prices(mu: f64, vbar: f64, prices: &[f64]) -> Result<(f64, Mechanism)> {
    let levels = mean_levels(mu, vbar, prices)?;
    if mu == vbar {
        let top = *levels.last().expect("nonempty");
        return Ok((top, Mechanism::deterministic(top, vbar)?));
    }
    let lp = build_maximin_revenue_lp(mu, vbar, prices)?;
    let sol = solve_lp(&lp).into_optimal("maximin-revenue LP")?;
    let n = levels.len();
    let mechanism = mechanism_from(&levels, &sol.primal[..n], vbar)?;
    Ok((sol.primal[n], mechanism))
}

/// Solves the alpha = 0 program and the maximin-revenue program at the same
/// prices and warns when they disagree, since one has free multipliers and
/// the other a sign-constrained one.
pub fn compare_maximin_formulations(mu: f64, vbar: f64, prices: &[f64]) -> Result<(f64, f64)> {
    let (a, _) = solve_alpha_metric_given_prices(mu, vbar, prices, 0.0)?;
    let (b, _) = solve_maximin_revenue_given_prices(mu, vbar, prices)?;
    if (a - b).abs() > 1e-8 {
        log::warn!("alpha = 0 value {a} differs from maximin revenue {b} at prices {prices:?}");
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ratio(set: &AmbiguitySet, prices: &[f64]) -> f64 {
        solve_ratio_given_prices(set, prices).unwrap().ratio
    }

    #[test]
    fn layout_sizes() {
        let set = AmbiguitySet::quantile(&[(0.5, 0.25), (0.7, 0.1)], 1.0).unwrap();
        let (lp, layout) = build_ratio_lp(&set, &[0.2, 0.3, 0.5]).unwrap();
        // grid {0.2, 0.3, 0.5, 0.7, 1}: N = 5, K = 2, n = 3
        assert_eq!(layout.num_grid, 5);
        assert_eq!(lp.width(), 2 * 5 + 3 + 1);
        assert_eq!(lp.rows().len(), 5 * 5 + 1);
        assert_eq!(layout.normalization_row(), 25);
        assert_eq!(lp.rows()[layout.normalization_row()].sense, Sense::Eq);
    }

    #[test]
    fn support_two_levels() {
        let set = AmbiguitySet::support(1.0, 10.0).unwrap();
        let r = ratio(&set, &[1.0, 10f64.sqrt()]);
        assert!((r - 1.0 / (2.0 * 10f64.sqrt() - 1.0)).abs() < 1e-9);

        let set = AmbiguitySet::support(1.0, 100.0).unwrap();
        let res = solve_ratio_given_prices(&set, &[1.0, 10.0]).unwrap();
        assert!((res.ratio - 1.0 / 19.0).abs() < 1e-9);
        assert!((res.mechanism.probs()[0] - 10.0 / 19.0).abs() < 1e-9);
        assert!((res.mechanism.probs()[1] - 9.0 / 19.0).abs() < 1e-9);
    }

    #[test]
    fn mean_one_level() {
        let set = AmbiguitySet::mean(0.5, 1.0).unwrap();
        let p = 1.0 - 0.5f64.sqrt();
        assert!((ratio(&set, &[p]) - p).abs() < 1e-9);
        assert!(ratio(&set, &[1.0]).abs() < 1e-12);
        assert_eq!(ratio(&AmbiguitySet::mean(1.0, 1.0).unwrap(), &[1.0]), 1.0);
    }

    #[test]
    fn quantile_two_levels() {
        let set = AmbiguitySet::quantile(&[(0.5, 0.25)], 1.0).unwrap();
        let res = solve_ratio_given_prices(&set, &[0.25, 0.5]).unwrap();
        assert!((res.ratio - 0.375).abs() < 1e-9);
        assert!((res.mechanism.probs()[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn quantile_threshold_at_top_is_exact() {
        // Half the mass at 1 and half just below it: revenue 1/2 against OPT near 1.
        let set = AmbiguitySet::quantile(&[(1.0, 0.5)], 1.0).unwrap();
        let r = ratio(&set, &[1.0]);
        assert!((r - 0.5).abs() < 1e-9, "{r}");
    }

    /// Mean-set LP written out row by row from its specialized statement:
    /// grid = prices plus `vbar`, left limits `v_j - mu`, no lambda at the top.
    fn specialized_mean_lp(mu: f64, vbar: f64, v: &[f64]) -> f64 {
        let n = v.len();
        let (lam, x, r) = (|i: usize| i, |l: usize| n + l, 2 * n);
        let mut obj = vec![0.0; 2 * n + 1];
        obj[r] = 1.0;
        let mut lp = LinearProgram::new(obj).unwrap();
        let top: Vec<f64> = v.iter().copied().chain([vbar]).collect();
        for i in 0..n {
            for j in 0..=n {
                let mut row = vec![(lam(i), top[j] - mu)];
                if j >= i {
                    row.push((r, v[i]));
                }
                row.extend((0..j).map(|l| (x(l), -v[l])));
                lp.add_sparse_row(&row, Sense::Le, 0.0).unwrap();
            }
        }
        let mut row = vec![(r, vbar)];
        row.extend((0..n).map(|l| (x(l), -v[l])));
        lp.add_sparse_row(&row, Sense::Le, 0.0).unwrap();
        lp.add_sparse_row(&(0..n).map(|l| (x(l), 1.0)).collect::<Vec<_>>(), Sense::Eq, 1.0).unwrap();
        solve_lp(&lp).into_optimal("specialized mean LP").unwrap().objective
    }

    /// Quantile-set LP with left limits `1[v_j > omega] - xi` on prices plus `vbar`.
    fn specialized_quantile_lp(omega: f64, xi: f64, vbar: f64, v: &[f64]) -> f64 {
        let n = v.len();
        let (lam, x, r) = (|i: usize| i, |l: usize| n + 1 + l, 2 * n + 1);
        let mut obj = vec![0.0; 2 * n + 2];
        obj[r] = 1.0;
        let mut lp = LinearProgram::new(obj).unwrap();
        let top: Vec<f64> = v.iter().copied().chain([vbar]).collect();
        let phi = |u: f64| if u > omega { 1.0 - xi } else { -xi };
        for i in 0..=n {
            for j in 0..=n {
                let mut row = vec![(lam(i), phi(top[j]))];
                if j >= i {
                    row.push((r, top[i]));
                }
                row.extend((0..j).map(|l| (x(l), -v[l])));
                lp.add_sparse_row(&row, Sense::Le, 0.0).unwrap();
            }
        }
        lp.add_sparse_row(&(0..n).map(|l| (x(l), 1.0)).collect::<Vec<_>>(), Sense::Eq, 1.0).unwrap();
        solve_lp(&lp).into_optimal("specialized quantile LP").unwrap().objective
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn generic_builder_matches_specialized_mean_lp(
            mu in 0.05f64..0.95,
            raw in prop::collection::btree_set(1u32..99, 1..4),
        ) {
            let v: Vec<f64> = raw.iter().map(|&k| k as f64 / 100.0).collect();
            let set = AmbiguitySet::mean(mu, 1.0).unwrap();
            let generic = ratio(&set, &v);
            let special = specialized_mean_lp(mu, 1.0, &v);
            prop_assert!((generic - special.clamp(0.0, 1.0)).abs() < 1e-9, "{} vs {}", generic, special);
        }

        #[test]
        fn generic_builder_matches_specialized_quantile_lp(
            omega in 0.05f64..0.95,
            xi in 0.05f64..0.95,
            raw in prop::collection::btree_set(1u32..99, 1..4),
            include_omega in any::<bool>(),
        ) {
            let mut v: Vec<f64> = raw.iter().map(|&k| k as f64 / 100.0).collect();
            if include_omega {
                v.push(omega);
                v.sort_by(f64::total_cmp);
                v.dedup();
            }
            let set = AmbiguitySet::quantile(&[(omega, xi)], 1.0).unwrap();
            let generic = ratio(&set, &v);
            let special = specialized_quantile_lp(omega, xi, 1.0, &v);
            prop_assert!((generic - special.clamp(0.0, 1.0)).abs() < 1e-9, "{} vs {}", generic, special);
        }

        #[test]
        fn extra_price_levels_never_hurt(
            mu in 0.05f64..0.95,
            raw in prop::collection::btree_set(1u32..99, 1..4),
            extra in 1u32..99,
        ) {
            let v: Vec<f64> = raw.iter().map(|&k| k as f64 / 100.0).collect();
            let mut w = v.clone();
            w.push(extra as f64 / 100.0);
            let set = AmbiguitySet::mean(mu, 1.0).unwrap();
            prop_assert!(ratio(&set, &w) >= ratio(&set, &v) - 1e-9);
        }

        #[test]
        fn row_generation_matches_full_lp(
            omega in 0.05f64..0.95,
            xi in 0.05f64..0.95,
            raw in prop::collection::btree_set(1u32..199, 25..40),
        ) {
            let v: Vec<f64> = raw.iter().map(|&k| k as f64 / 200.0).collect();
            let set = AmbiguitySet::quantile(&[(omega, xi)], 1.0).unwrap();
            let generated = ratio(&set, &v);
            let (lp, layout) = build_ratio_lp(&set, &v).unwrap();
            let full = solve_lp(&lp).into_optimal("full").unwrap().primal[layout.r()];
            prop_assert!((generated - full.clamp(0.0, 1.0)).abs() < 1e-9, "{} vs {}", generated, full);
        }
    }

    #[test]
    fn alpha_metric_examples() {
        let (d, _) = solve_alpha_metric_given_prices(0.5, 1.0, &[0.381966], 1.0).unwrap();
        assert!((d + 0.309017).abs() < 1e-6, "{d}");
        let p = 1.0 - 0.5f64.sqrt();
        let (d, _) = solve_alpha_metric_given_prices(0.5, 1.0, &[p], 0.0).unwrap();
        assert!((d - p * p).abs() < 1e-9, "{d}");
        let (d, _) = solve_alpha_metric_given_prices(1.0, 1.0, &[1.0], 0.0).unwrap();
        assert_eq!(d, 1.0);
        assert!(build_alpha_metric_lp(0.5, 1.0, &[0.5], 1.5).is_err());
    }

    #[test]
    fn maximin_revenue_examples() {
        let (rev, m) = solve_maximin_revenue_given_prices(0.5, 1.0, &[0.25, 0.5]).unwrap();
        assert!((rev - 0.125).abs() < 1e-9);
        assert!((m.probs()[0] - 0.5).abs() < 1e-9);
        let p = 1.0 - 0.5f64.sqrt();
        let (rev, _) = solve_maximin_revenue_given_prices(0.5, 1.0, &[p]).unwrap();
        assert!((rev - p * p).abs() < 1e-9);
        let (rev, _) = solve_maximin_revenue_given_prices(1.0, 1.0, &[1.0]).unwrap();
        assert_eq!(rev, 1.0);
    }

    #[test]
    fn maximin_formulations_agree_on_a_price_grid() {
        let mut mismatches = Vec::new();
        for mu in [0.2, 0.5, 0.8] {
            for a in 1..10 {
                for b in (a + 1)..10 {
                    let prices = [a as f64 / 10.0, b as f64 / 10.0];
                    let (x, y) = compare_maximin_formulations(mu, 1.0, &prices).unwrap();
                    if (x - y).abs() > 1e-8 {
                        mismatches.push((mu, prices, x, y));
                    }
                }
            }
        }
        assert!(mismatches.is_empty(), "{mismatches:?}");
    }
}
