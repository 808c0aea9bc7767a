use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use addhaz::error::{CliError, Result};
use addhaz::fitfile::fit_to_string;
use addhaz::output::{compare_csv, curve_csv, curves_csv, summary_csv, summary_table, write_text};
use addhaz::{load_cone, load_dataset, load_fit, load_sim_config, parse_grid, parse_vector, run_study_parallel, Columns};
use addhaz_core::cone::fit_mle_cone;
use addhaz_core::mle::fit_mle;
use addhaz_core::ols::fit_ols;
use addhaz_core::sim::gen_replication;
use addhaz_core::{ConeMethod, Dataset, FitResult, SimConfig, TiePolicy};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Additive hazards regression: least squares and constrained maximum
/// likelihood fits, prediction and simulation studies.
#[derive(Parser, Debug)]
#[command(name = "addhaz", version)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a step-function estimate and write it as a JSON fit file.
    Fit(FitArgs),
    /// Evaluate a fit file on a time grid.
    Predict(PredictArgs),
    /// Run the Monte-Carlo comparison of OLS and MLE.
    Simulate(SimulateArgs),
    /// Fit OLS and MLE on one dataset and write both cumulative curves.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Survival data CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "time")]
    time_col: String,
    #[arg(long, default_value = "status")]
    status_col: String,
    /// Comma-separated covariate columns (default: all other columns).
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
    /// Map each covariate column onto [0, 1] before fitting.
    #[arg(long)]
    rescale: bool,
    #[arg(long, value_enum, default_value_t = Ties::Reject)]
    ties: Ties,
    /// Seed for tie jittering.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Ties {
    Reject,
    Jitter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Ols,
    Mle,
    MleCone,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    Naive,
    Ascending,
    Descending,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Fit file to write (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Ols)]
    method: MethodArg,
    /// Constraint matrix CSV, or `full` for the unit-cube vertex cone.
    #[arg(long)]
    cone_matrix: Option<String>,
    #[arg(long, value_enum)]
    cone_solver: Option<SolverArg>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Fit file written by `fit`.
    #[arg(long)]
    input: PathBuf,
    /// Curve CSV to write (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated covariate values.
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    x: String,
    /// Interpret `--x` on the original data scale.
    #[arg(long)]
    raw_x: bool,
    /// `start:stop:step`, a comma list or a single time.
    #[arg(long)]
    grid: String,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// `key = value` study configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    censor_low: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    censor_high: Option<f64>,
    /// Summary CSV to write.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the aligned summary table here as well as to standard output.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Survival curves of replication 0 at the target covariates.
    #[arg(long)]
    curves: Option<PathBuf>,
    #[arg(long, default_value = "0:7.5:0.05")]
    curve_grid: String,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Long-format CSV to write (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn prepare(args: &DataArgs) -> Result<Dataset> {
    let columns = Columns {
        time: args.time_col.clone(),
        status: args.status_col.clone(),
        covariates: args.covariates.clone(),
    };
    let d = load_dataset(&args.input, &columns)?;
    let policy = match args.ties {
        Ties::Reject => TiePolicy::Reject,
        Ties::Jitter => TiePolicy::Jitter { seed: args.seed },
    };
    let d = d.check_ties(policy)?;
    Ok(if args.rescale { d.rescale_covariates()? } else { d })
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => write_text(path, text),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    match (args.method, &args.cone_matrix) {
        (MethodArg::MleCone, None) => return Err(CliError::Config("--method mle-cone requires --cone-matrix".into())),
        (MethodArg::MleCone, Some(_)) => {}
        (_, Some(_)) => return Err(CliError::Config("--cone-matrix is only used with --method mle-cone".into())),
        (_, None) if args.cone_solver.is_some() => {
            return Err(CliError::Config("--cone-solver is only used with --method mle-cone".into()))
        }
        _ => {}
    }
    let d = prepare(&args.data)?;
    let fit = match args.method {
        MethodArg::Ols => fit_ols(&d)?,
        MethodArg::Mle => fit_mle(&d)?,
        MethodArg::MleCone => {
            let cone = load_cone(args.cone_matrix.as_deref().unwrap_or("full"), d.p)?;
            let solver = match args.cone_solver.unwrap_or(SolverArg::Naive) {
                SolverArg::Naive => ConeMethod::Naive,
                SolverArg::Ascending => ConeMethod::Ascending,
                SolverArg::Descending => ConeMethod::Descending,
            };
            if solver == ConeMethod::Naive && cone.len() > 30 {
                eprintln!(
                    "addhaz: warning: naive search over {} constraint rows may be slow; consider --cone-solver ascending",
                    cone.len()
                );
            }
            fit_mle_cone(&d, &cone, solver)?
        }
    };
    emit(args.output.as_ref(), &fit_to_string(&fit))?;
    if args.output.is_some() {
        report_fit(&fit, &d);
    }
    Ok(())
}

fn report_fit(fit: &FitResult, d: &Dataset) {
    println!("{} fit: {} subjects, {} event times, {} covariates", fit.method(), d.len(), fit.event_times().len(), fit.p());
    if let Some(ll) = fit.total_loglik {
        println!("total log-likelihood: {ll}");
    }
    let deficient = fit.rank_deficient_times();
    if !deficient.is_empty() {
        let list: Vec<String> = deficient.iter().map(f64::to_string).collect();
        println!("rank-deficient event times (zero jump): {}", list.join(","));
    }
    let fallbacks = fit.diagnostics.iter().filter(|d| d.fallback).count();
    if fallbacks > 0 {
        println!("event times solved by the naive fallback: {fallbacks}");
    }
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let grid = parse_grid(&args.grid)?;
    let x = parse_vector(&args.x)?;
    let fit = load_fit(&args.input)?;
    if x.len() != fit.p() {
        return Err(CliError::Config(format!("--x has {} values, the fit has {} covariates", x.len(), fit.p())));
    }
    let x = match (&fit.scale_info, args.raw_x) {
        (Some(info), true) => x.iter().zip(info).map(|(v, s)| s.to_unit(*v)).collect(),
        _ => x,
    };
    emit(args.output.as_ref(), &curve_csv(&fit, &x, &grid)?)
}

fn cmd_simulate(args: &SimulateArgs, threads: Option<usize>) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => load_sim_config(path)?,
        None => SimConfig::default(),
    };
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(r) = args.reps {
        cfg.reps = r;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(c) = args.censor_low {
        cfg.censor_low = c;
    }
    if let Some(c) = args.censor_high {
        cfg.censor_high = c;
    }
    cfg.validate()?;
    let curve_grid = match &args.curves {
        Some(_) => Some(parse_grid(&args.curve_grid)?),
        None => None,
    };
    let summary = run_study_parallel(&cfg, threads)?;
    let table = summary_table(&summary);
    print!("{table}");
    if let Some(path) = &args.table {
        write_text(path, &table)?;
    }
    if let Some(path) = &args.output {
        write_text(path, &summary_csv(&summary))?;
    }
    if let (Some(path), Some(grid)) = (&args.curves, curve_grid) {
        let d = gen_replication(&cfg, 0);
        let (ols, mle) = (fit_ols(&d)?, fit_mle(&d)?);
        let truth = |t: f64| cfg.true_cumulative_hazard(&cfg.target_x, t);
        write_text(path, &curves_csv(&ols, &mle, &cfg.target_x, &grid, Some(&truth))?)?;
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let d = prepare(&args.data)?;
    let ols = fit_ols(&d)?;
    let mle = fit_mle(&d)?;
    emit(args.output.as_ref(), &compare_csv(&[&ols, &mle]))
}

fn run(cli: &Cli) -> Result<()> {
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Simulate(a) => cmd_simulate(a, cli.threads),
        Command::Compare(a) => cmd_compare(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("addhaz: CONFIG: {first}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report_line());
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
