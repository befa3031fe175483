//! Exhaustive grid search over price ladders.

use itertools::Itertools;
use rayon::prelude::*;

use crate::ambiguity::AmbiguitySet;
use crate::error::{domain, Result};
use crate::lp_builder::solve_ratio_given_prices;
use crate::mechanism::RatioResult;

/// Number of grid cells of width `resolution` on `[0, vbar]`.
fn cells(vbar: f64, resolution: f64) -> Result<usize> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return domain(format!("resolution {resolution} must be positive"));
    }
    let m = (vbar / resolution).round();
    if m < 1.0 || (m * resolution - vbar).abs() > 1e-9 * vbar {
        return domain(format!("resolution {resolution} must divide [0, {vbar}] into whole cells"));
    }
    Ok(m as usize)
}

/// Best mechanism whose `n` distinct prices lie on `{0, d, 2d, ..., vbar}`.
///
/// Ties go to the lexicographically smallest price tuple.
pub fn best_n_level(set: &AmbiguitySet, n: usize, resolution: f64) -> Result<RatioResult> {
    if n == 0 {
        return domain("menu size must be at least 1");
    }
    let vbar = set.vbar();
    let m = cells(vbar, resolution)?;
    if m < n {
        return domain(format!("{m} grid cells cannot hold {n} distinct price levels"));
    }
    let grid: Vec<f64> = (0..=m).map(|k| vbar * k as f64 / m as f64).collect();
    let tuples: Vec<Vec<usize>> = (0..=m).combinations(n).collect();
    log::info!("grid search: {} candidate ladders of {n} levels", tuples.len());
    let results: Vec<Result<RatioResult>> = tuples
        .par_iter()
        .map(|t| {
            let prices: Vec<f64> = t.iter().map(|&k| grid[k]).collect();
            solve_ratio_given_prices(set, &prices)
        })
        .collect();
    // Combinations come out in lexicographic order, so a strict comparison keeps the first best.
    let mut best: Option<RatioResult> = None;
    for res in results {
        let res = res?;
        if best.as_ref().map_or(true, |b| res.ratio > b.ratio) {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one ladder"))
}

/// One LP over the ladder `{vbar/G, 2 vbar/G, ..., vbar}`: a lower bound on
/// the ratio achievable with unboundedly many levels.
pub fn approx_inf_level(set: &AmbiguitySet, gridsize: usize) -> Result<RatioResult> {
    if gridsize < 50 {
        return domain(format!("grid size {gridsize} below the minimum of 50"));
    }
    let vbar = set.vbar();
    let prices: Vec<f64> = (1..=gridsize).map(|k| vbar * k as f64 / gridsize as f64).collect();
    solve_ratio_given_prices(set, &prices)
}
