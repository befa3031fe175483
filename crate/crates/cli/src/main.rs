use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use simplemenu::adversary::{worst_case_meanvar, worst_case_ratio};
use simplemenu::ambiguity::AmbiguitySet;
use simplemenu::closed_form;
use simplemenu::json;
use simplemenu::lp_builder::solve_ratio_given_prices;
use simplemenu::search::{approx_inf_level, best_n_level};
use simplemenu::{Error, Mechanism};

mod output;
mod reproduce;

#[derive(Parser)]
#[command(name = "simplemenu", version, about = "Robust n-level posted-price mechanisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a mechanism and report its worst-case ratio.
    Solve(SolveArgs),
    /// Certify a mechanism's worst case against an ambiguity set.
    Verify(VerifyArgs),
    /// Write the CSV behind a figure or table.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SetKindArg {
    Support,
    Mean,
    Quantile,
    Meanvar,
}

#[derive(Args)]
struct SetArgs {
    #[arg(long, value_enum, required_unless_present = "set_file")]
    set: Option<SetKindArg>,
    /// Ambiguity set as JSON, e.g. {"kind":"mean","params":{"mu":0.5},"vbar":1}.
    #[arg(long, conflicts_with = "set")]
    set_file: Option<PathBuf>,
    #[arg(long)]
    vlo: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    vbar: f64,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Closed,
    Lp,
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Levels {
    Finite(usize),
    Inf,
}

impl FromStr for Levels {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "inf" {
            return Ok(Levels::Inf);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Levels::Finite(n)),
            _ => Err(format!("expected a positive integer or 'inf', got '{s}'")),
        }
    }
}

impl fmt::Display for Levels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Levels::Finite(n) => write!(f, "{n}"),
            Levels::Inf => f.write_str("inf"),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, default_value = "1")]
    n: Levels,
    #[arg(long, value_enum, default_value_t = Method::Closed)]
    method: Method,
    /// Comma-separated price levels for the LP method.
    #[arg(long, value_delimiter = ',')]
    prices: Option<Vec<f64>>,
    /// Grid spacing for the grid method; defaults to vbar / 100.
    #[arg(long)]
    resolution: Option<f64>,
    /// Price grid size for the unbounded-menu grid approximation.
    #[arg(long, default_value_t = 400)]
    gridsize: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Mechanism JSON: {"prices":[...],"probs":[...],"vbar":...}.
    mechanism: PathBuf,
    #[command(flatten)]
    set: SetArgs,
    /// Extra evenly spaced valuations for the adversary.
    #[arg(long)]
    dense: Option<usize>,
    /// Truncation of the mean-variance support; defaults to mu + 50 sigma.
    #[arg(long)]
    vmax: Option<f64>,
    #[arg(long, default_value_t = 4000)]
    gridsize: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    target: String,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Grid spacing (as a share of vbar) for three-level searches.
    #[arg(long, default_value_t = 0.02)]
    resolution: f64,
    /// Price grid size for unbounded-menu lower bounds.
    #[arg(long, default_value_t = 400)]
    gridsize: usize,
}

/// Bad flag combinations that clap cannot express.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(Usage(msg.into()).into())
}

enum ParsedSet {
    Ambiguity(AmbiguitySet),
    MeanVar { mu: f64, sigma: f64 },
}

fn need(v: Option<f64>, flag: &str) -> anyhow::Result<f64> {
    match v {
        Some(x) => Ok(x),
        None => usage(format!("--{flag} is required for this set")),
    }
}

impl SetArgs {
    fn parse(&self) -> anyhow::Result<ParsedSet> {
        if let Some(path) = &self.set_file {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(ParsedSet::Ambiguity(AmbiguitySet::from_json(&text)?));
        }
        let set = match self.set.expect("clap enforces --set or --set-file") {
            SetKindArg::Support => AmbiguitySet::support(need(self.vlo, "vlo")?, self.vbar)?,
            SetKindArg::Mean => AmbiguitySet::mean(need(self.mu, "mu")?, self.vbar)?,
            SetKindArg::Quantile => {
                AmbiguitySet::quantile(&[(need(self.omega, "omega")?, need(self.xi, "xi")?)], self.vbar)?
            }
            SetKindArg::Meanvar => {
                return Ok(ParsedSet::MeanVar { mu: need(self.mu, "mu")?, sigma: need(self.sigma, "sigma")? })
            }
        };
        Ok(ParsedSet::Ambiguity(set))
    }
}

fn result_json(method: &str, n: Levels, ratio: f64, mechanism: Option<String>, lower_bound: bool) -> String {
    format!(
        "{{\"method\":{},\"n\":{},\"ratio\":{},\"lower_bound\":{},\"mechanism\":{}}}",
        json::string(method),
        json::string(&n.to_string()),
        json::number(ratio),
        lower_bound,
        mechanism.unwrap_or_else(|| "null".into())
    )
}

fn closed(set: &ParsedSet, n: Levels) -> anyhow::Result<(f64, Option<String>)> {
    use simplemenu::ambiguity::SetKind;
    let (vbar, kind) = match set {
        ParsedSet::MeanVar { mu, sigma } => {
            if n != Levels::Finite(2) {
                return usage("the mean-variance closed form exists only for --n 2");
            }
            let (m, r) = closed_form::meanvar_two_level_approx(*mu, *sigma)?;
            return Ok((r, Some(m.to_json())));
        }
        ParsedSet::Ambiguity(s) => (s.vbar(), s.kind()),
    };
    let finite = |r: simplemenu::RatioResult| (r.ratio, Some(r.mechanism.to_json()));
    Ok(match (kind, n) {
        (SetKind::Support { vlo }, Levels::Finite(k)) => finite(closed_form::support_optimal(k, *vlo, vbar)?),
        (SetKind::Support { vlo }, Levels::Inf) => (closed_form::support_limit(*vlo, vbar)?, None),
        (SetKind::Mean { mu }, Levels::Finite(1)) => finite(closed_form::mean_one_level(*mu, vbar)?),
        (SetKind::Mean { mu }, Levels::Finite(2)) => finite(closed_form::mean_two_level(*mu, vbar)?.result),
        (SetKind::Quantile { constraints }, n) if constraints.len() == 1 => {
            let (w, xi) = (constraints[0].omega, constraints[0].xi);
            match n {
                Levels::Finite(1) => finite(closed_form::quantile_one_level(w, xi, vbar)?),
                Levels::Finite(2) => finite(closed_form::quantile_two_level(w, xi, vbar)?),
                Levels::Inf => {
                    let q = closed_form::quantile_inf(w, xi, vbar)?;
                    (q.r, Some(q.to_json()))
                }
                Levels::Finite(_) => return usage("quantile closed forms exist for --n 1, 2 or inf"),
            }
        }
        _ => return usage(format!("no closed form for this set with --n {n}; try --method grid")),
    })
}

fn solve(args: &SolveArgs) -> anyhow::Result<String> {
    let set = args.set.parse()?;
    let out = match args.method {
        Method::Closed => {
            let (ratio, mech) = closed(&set, args.n)?;
            result_json("closed", args.n, ratio, mech, false)
        }
        Method::Lp | Method::Grid => {
            let ParsedSet::Ambiguity(set) = set else {
                return usage("the mean-variance set supports only --method closed");
            };
            if args.method == Method::Lp {
                let Some(prices) = &args.prices else {
                    return usage("--method lp needs --prices");
                };
                let r = solve_ratio_given_prices(&set, prices)?;
                result_json("lp", Levels::Finite(r.mechanism.len()), r.ratio, Some(r.mechanism.to_json()), false)
            } else {
                match args.n {
                    Levels::Inf => {
                        let r = approx_inf_level(&set, args.gridsize)?;
                        result_json("grid", args.n, r.ratio, Some(r.mechanism.to_json()), true)
                    }
                    Levels::Finite(n) => {
                        let res = args.resolution.unwrap_or(set.vbar() / 100.0);
                        let r = best_n_level(&set, n, res)?;
                        result_json("grid", args.n, r.ratio, Some(r.mechanism.to_json()), false)
                    }
                }
            }
        }
    };
    Ok(out)
}

fn verify(args: &VerifyArgs) -> anyhow::Result<String> {
    let text = std::fs::read_to_string(&args.mechanism)
        .with_context(|| format!("reading {}", args.mechanism.display()))?;
    let mechanism = Mechanism::from_json(&text)?;
    let cert = match args.set.parse()? {
        ParsedSet::Ambiguity(set) => worst_case_ratio(&mechanism, &set, args.dense)?,
        ParsedSet::MeanVar { mu, sigma } => worst_case_meanvar(&mechanism, mu, sigma, args.vmax, args.gridsize)?,
    };
    Ok(cert.to_json())
}

fn emit(text: &str, out: Option<&PathBuf>) -> anyhow::Result<()> {
    println!("{text}");
    if let Some(path) = out {
        std::fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve(a) => emit(&solve(&a)?, a.out.as_ref()),
        Command::Verify(a) => emit(&verify(&a)?, a.out.as_ref()),
        Command::Reproduce(a) => {
            if !reproduce::TARGETS.contains(&a.target.as_str()) {
                bail!(Usage(format!(
                    "unknown target '{}'; expected one of {}",
                    a.target,
                    reproduce::TARGETS.join(", ")
                )));
            }
            std::fs::create_dir_all(&a.out_dir)?;
            let path = reproduce::run(&a.target, &a.out_dir, a.resolution, a.gridsize)?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error, verifying: bool) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Domain(_) | Error::Infeasible(_) | Error::Dimension { .. } | Error::Parse(_)) => 3,
        Some(Error::Numeric(_)) if verifying => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let verifying = matches!(cli.command, Command::Verify(_));
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e, verifying))
        }
    }
}
