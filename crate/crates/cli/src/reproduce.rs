use std::path::{Path, PathBuf};

use rayon::prelude::*;
use simplemenu::ambiguity::AmbiguitySet;
use simplemenu::closed_form::{
    ladder_only_ratio, mean_one_level, mean_two_level, meanvar_ratio_lower_bound, meanvar_two_level_approx,
    quantile_inf, quantile_one_level, quantile_two_level, support_limit, support_optimal,
};
use simplemenu::eval::{performance_ratio, quantile_of, ParametricDistribution};
use simplemenu::search::{approx_inf_level, best_n_level};

use crate::output::{write_csv, Cell};

pub const TARGETS: [&str; 6] = ["fig-support", "fig-mean", "fig-quantile", "table2-row2", "fig-compareball", "ec-beta"];

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + step * k as f64).map(|x| (x * 1e9).round() / 1e9).collect()
}

pub fn run(target: &str, dir: &Path, resolution: f64, gridsize: usize) -> anyhow::Result<PathBuf> {
    let path = dir.join(format!("{target}.csv"));
    match target {
        "fig-support" => fig_support(&path),
        "fig-mean" => fig_mean(&path, resolution, gridsize),
        "fig-quantile" => fig_quantile(&path, resolution),
        "table2-row2" => table2_row2(&path),
        "fig-compareball" => fig_compareball(&path),
        "ec-beta" => ec_beta(&path, gridsize),
        _ => unreachable!("target list checked by the caller"),
    }
}

fn fig_support(path: &Path) -> anyhow::Result<PathBuf> {
    let mut rows = Vec::new();
    for ratio in steps(0.01, 1.0, 0.01) {
        let inf = support_limit(ratio, 1.0)?;
        let mut row = vec![Cell::Num(ratio)];
        let rs = [1, 2, 5].map(|n| support_optimal(n, ratio, 1.0).map(|r| r.ratio));
        for r in &rs {
            row.push(Cell::Num(*r.as_ref().map_err(Clone::clone)?));
        }
        row.push(Cell::Num(inf));
        for r in rs {
            row.push(Cell::Num(r? / inf));
        }
        rows.push(row);
    }
    write_csv(
        path,
        "target=fig-support vbar=1 n=1,2,5",
        &["vlo_over_vbar", "r1", "r2", "r5", "r_inf", "r1_over_r_inf", "r2_over_r_inf", "r5_over_r_inf"],
        &rows,
    )
}

fn fig_mean(path: &Path, resolution: f64, gridsize: usize) -> anyhow::Result<PathBuf> {
    let mus = steps(0.05, 0.95, 0.05);
    let rows = mus
        .par_iter()
        .map(|&mu| -> anyhow::Result<Vec<Cell>> {
            let set = AmbiguitySet::mean(mu, 1.0)?;
            let r1 = mean_one_level(mu, 1.0)?.ratio;
            let r2 = mean_two_level(mu, 1.0)?.result.ratio;
            let r3 = best_n_level(&set, 3, resolution)?.ratio;
            let inf = approx_inf_level(&set, gridsize)?.ratio;
            Ok(vec![
                Cell::Num(mu),
                Cell::Num(r1),
                Cell::Num(r2),
                Cell::Num(r3),
                Cell::Num(inf),
                Cell::Num(r1 / inf),
                Cell::Num(r2 / inf),
                Cell::Num(r3 / inf),
            ])
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    write_csv(
        path,
        &format!("target=fig-mean vbar=1 r3=grid-search resolution={resolution} r_inf=lp-lower-bound gridsize={gridsize}"),
        &[
            "mu_over_vbar",
            "r1",
            "r2",
            "r3_grid",
            "r_inf_lower_bound",
            "r1_over_r_inf",
            "r2_over_r_inf",
            "r3_over_r_inf",
        ],
        &rows,
    )
}

fn fig_quantile(path: &Path, resolution: f64) -> anyhow::Result<PathBuf> {
    let cases: Vec<(f64, f64)> = [0.2, 0.4, 0.6, 0.8]
        .into_iter()
        .flat_map(|w| steps(0.05, 0.95, 0.05).into_iter().map(move |xi| (w, xi)))
        .collect();
    let rows = cases
        .par_iter()
        .map(|&(w, xi)| -> anyhow::Result<Vec<Cell>> {
            let set = AmbiguitySet::quantile(&[(w, xi)], 1.0)?;
            let r1 = quantile_one_level(w, xi, 1.0)?.ratio;
            let r2 = quantile_two_level(w, xi, 1.0)?.ratio;
            let r3 = best_n_level(&set, 3, resolution)?.ratio;
            let inf = quantile_inf(w, xi, 1.0)?.r;
            Ok(vec![
                Cell::Num(w),
                Cell::Num(xi),
                Cell::Num(r1),
                Cell::Num(r2),
                Cell::Num(r3),
                Cell::Num(inf),
                Cell::Num(r1 / inf),
                Cell::Num(r2 / inf),
                Cell::Num(r3 / inf),
            ])
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    write_csv(
        path,
        &format!("target=fig-quantile vbar=1 r3=grid-search resolution={resolution}"),
        &["omega_over_vbar", "xi", "r1", "r2", "r3_grid", "r_inf", "r1_over_r_inf", "r2_over_r_inf", "r3_over_r_inf"],
        &rows,
    )
}

fn table2_row2(path: &Path) -> anyhow::Result<PathBuf> {
    let mut rows = Vec::new();
    for cv in [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0] {
        let (_, r) = meanvar_two_level_approx(1.0, cv)?;
        let bound = meanvar_ratio_lower_bound(1.0, cv)?;
        rows.push(vec![Cell::Num(cv), Cell::Num(r), Cell::Num(100.0 * r), Cell::Num(bound)]);
    }
    write_csv(
        path,
        "target=table2-row2 mu=1",
        &["sigma_over_mu", "r2", "r2_percent", "r2_lower_bound"],
        &rows,
    )
}

fn fig_compareball(path: &Path) -> anyhow::Result<PathBuf> {
    let mut rows = Vec::new();
    for n in 1..=10 {
        let r = support_optimal(n, 1.0, 10.0)?;
        rows.push(vec![
            Cell::Int(n),
            Cell::Num(r.ratio),
            Cell::Num(ladder_only_ratio(r.mechanism.prices())),
        ]);
    }
    write_csv(
        path,
        "target=fig-compareball vbar_over_vlo=10 ladder=geometric",
        &["n", "r_dagger", "r_ddagger"],
        &rows,
    )
}

fn beta_alphas() -> Vec<f64> {
    let mut a = steps(0.1, 1.0, 0.1);
    a.extend(steps(1.5, 10.0, 0.5));
    a
}

enum Panel {
    Mean { beta: Option<f64> },
    Quantile { beta: f64, xi: f64 },
}

fn ec_beta(path: &Path, gridsize: usize) -> anyhow::Result<PathBuf> {
    let mut panels = vec![Panel::Mean { beta: None }];
    panels.extend([0.5, 1.0, 2.0].map(|b| Panel::Mean { beta: Some(b) }));
    for beta in [0.5, 1.0, 2.0] {
        panels.extend([0.3, 0.5, 0.7].map(|xi| Panel::Quantile { beta, xi }));
    }
    let cases: Vec<(&Panel, f64)> = panels.iter().flat_map(|p| beta_alphas().into_iter().map(move |a| (p, a))).collect();
    let blocks = cases
        .par_iter()
        .map(|&(panel, alpha)| -> anyhow::Result<Vec<Vec<Cell>>> {
            let (beta, kind) = match panel {
                Panel::Mean { beta } => (beta.unwrap_or(alpha), "mean".to_string()),
                Panel::Quantile { beta, xi } => (*beta, format!("quantile_xi{xi}")),
            };
            let dist = ParametricDistribution::beta(alpha, beta, 1.0)?;
            let ratios: [f64; 3] = match panel {
                Panel::Mean { .. } => {
                    let mu = dist.mean();
                    let set = AmbiguitySet::mean(mu, 1.0)?;
                    [
                        performance_ratio(&mean_one_level(mu, 1.0)?.mechanism, &dist)?,
                        performance_ratio(&mean_two_level(mu, 1.0)?.result.mechanism, &dist)?,
                        performance_ratio(&approx_inf_level(&set, gridsize)?.mechanism, &dist)?,
                    ]
                }
                Panel::Quantile { xi, .. } => {
                    let w = quantile_of(&dist, *xi)?;
                    [
                        performance_ratio(&quantile_one_level(w, *xi, 1.0)?.mechanism, &dist)?,
                        performance_ratio(&quantile_two_level(w, *xi, 1.0)?.mechanism, &dist)?,
                        performance_ratio(&quantile_inf(w, *xi, 1.0)?, &dist)?,
                    ]
                }
            };
            Ok(["1", "2", "inf"]
                .iter()
                .zip(ratios)
                .map(|(n, r)| {
                    vec![
                        Cell::Num(alpha),
                        Cell::Num(beta),
                        Cell::Text(kind.clone()),
                        Cell::Text(n.to_string()),
                        Cell::Num(r),
                    ]
                })
                .collect())
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let rows: Vec<Vec<Cell>> = blocks.into_iter().flatten().collect();
    write_csv(
        path,
        &format!(
            "target=ec-beta vbar=1 inf_mean=lp-lower-bound gridsize={gridsize} quantile=sup{{v: P(V>=v)>=xi}} hindsight=grid1e4+golden"
        ),
        &["alpha", "beta", "info_kind", "n", "ratio"],
        &rows,
    )
}
