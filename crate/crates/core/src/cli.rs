//! The `ibnr` command-line driver.
//!
//! Every subcommand writes its outputs and a `manifest.txt` of `key=value`
//! lines into `--out`. The manifest echoes the resolved configuration, so a
//! run can be repeated from it. Exit codes: 0 success, 1 invalid input or
//! usage, 2 numerical failure (quadrature, sampler, degenerate probability,
//! or an optimizer that did not converge).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::chain_ladder::{dev_factors, error_table, project, to_cumulative, TriangleKind};
use crate::claims::delay::calendar_year;
use crate::claims::fit::{fit_mle, FitOptions};
use crate::claims::forecast::{forecast_triangle, predict_ibnr};
use crate::claims::ks::ks_exponential;
use crate::claims::types::ModelParams;
use crate::error::{Error, Result};
use crate::io::{
    read_event_log_with_origin, read_manifest, read_triangle, write_error_table, write_factors, write_forecast,
    write_manifest, write_ratio_tables, write_recovery_reports, write_triangle, ValueFormat,
};
use crate::optimize::SimplexOptions;
use crate::quadrature::QuadratureOptions;
use crate::simulation::{recovery_study, report_ratio_table, SimConfig, DEFAULT_ENVELOPE_SAFETY};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ibnr", version, about = "IBNR claim-count reserving: Chain-Ladder and Clayton-copula models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Development factors and projection of a run-off triangle.
    Chainladder(ChainLadderArgs),
    /// Maximum-likelihood fit of the copula model to an event log.
    Fit(FitArgs),
    /// Expected claim counts by occurrence year and reporting lag.
    Predict(PredictArgs),
    /// Percentage-error tables of two predicted triangles against actuals.
    Compare(CompareArgs),
    /// Parameter-recovery study and report-year ratio table on simulated data.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct ChainLadderArgs {
    /// Cumulative or incremental triangle CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct OptimizerArgs {
    /// Simplex diameter (log-parameter space) at which the fit stops.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Relative tolerance of the likelihood quadrature.
    #[arg(long, default_value_t = 1e-8)]
    pub quad_tol: f64,
    /// Upper bound on theta during the search.
    #[arg(long, default_value_t = crate::claims::fit::DEFAULT_THETA_MAX)]
    pub theta_max: f64,
}

impl OptimizerArgs {
    fn fit_options(&self) -> FitOptions {
        FitOptions {
            simplex: SimplexOptions {
                tol: self.tol,
                max_iter: self.max_iter,
                ..SimplexOptions::default()
            },
            quadrature: QuadratureOptions::relative(self.quad_tol),
            theta_max: self.theta_max,
            ..FitOptions::default()
        }
    }

    fn manifest(&self, m: &mut Manifest) {
        m.push("tol", self.tol);
        m.push("max_iter", self.max_iter);
        m.push("quad_tol", self.quad_tol);
        m.push("theta_max", self.theta_max);
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Event-log CSV (`event_id,occurrence,report`).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Recorded in the manifest; the fit itself is deterministic.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest of a previous `fit` run supplying beta1, beta2 and theta.
    #[arg(long, conflicts_with_all = ["beta1", "beta2", "theta"])]
    pub params: Option<PathBuf>,
    #[arg(long, requires_all = ["beta2", "theta"])]
    pub beta1: Option<f64>,
    #[arg(long, requires_all = ["beta1", "theta"])]
    pub beta2: Option<f64>,
    #[arg(long, requires_all = ["beta1", "beta2"])]
    pub theta: Option<f64>,
    /// Last calendar year of reporting considered (n_J); defaults to
    /// `2 * years - 1`, which completes the square triangle.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Calendar year of time 0 when the log uses numeric times.
    #[arg(long, default_value_t = 2010)]
    pub origin_year: i32,
    #[arg(long, default_value_t = 1e-8)]
    pub quad_tol: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Triangle holding the actual values.
    #[arg(long)]
    pub input: PathBuf,
    /// Chain-Ladder prediction.
    #[arg(long)]
    pub cl: PathBuf,
    /// Copula prediction.
    #[arg(long)]
    pub copula: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [50usize, 150, 200])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = crate::simulation::DEFAULT_REPLICATIONS)]
    pub replications: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta2: f64,
    #[arg(long, default_value_t = 1.5)]
    pub theta: f64,
    /// Calendar years spanned by the ratio-table portfolio.
    #[arg(long, default_value_t = 7)]
    pub years: usize,
    #[arg(long, default_value_t = 2010)]
    pub origin_year: i32,
    #[arg(long, default_value_t = DEFAULT_ENVELOPE_SAFETY)]
    pub envelope_safety: f64,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

/// Ordered `key=value` entries.
#[derive(Debug, Default)]
struct Manifest(Vec<(String, String)>);

impl Manifest {
    fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    fn write(&self, dir: &Path) -> Result<()> {
        write_manifest(&self.0, dir.join("manifest.txt"))
    }
}

/// Outcome of a subcommand that ran to completion.
struct Outcome {
    code: i32,
    message: Option<String>,
}

impl Outcome {
    fn ok() -> Self {
        Self {
            code: EXIT_OK,
            message: None,
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INVALID
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code; messages go to stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (out, name) = match &cli.command {
        Command::Chainladder(a) => (a.out.clone(), "chainladder"),
        Command::Fit(a) => (a.out.clone(), "fit"),
        Command::Predict(a) => (a.out.clone(), "predict"),
        Command::Compare(a) => (a.out.clone(), "compare"),
        Command::Simulate(a) => (a.out.clone(), "simulate"),
    };
    if let Err(source) = fs::create_dir_all(&out) {
        eprintln!("error: {}", Error::Io { path: out, source });
        return EXIT_INVALID;
    }
    // Only the simulation fans out; everything else runs on one thread.
    if !matches!(cli.command, Command::Simulate(_)) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    }

    let mut manifest = Manifest::default();
    manifest.push("command", name);
    manifest.push("out", out.display());
    let result = match &cli.command {
        Command::Chainladder(a) => cmd_chainladder(a, &mut manifest),
        Command::Fit(a) => cmd_fit(a, &mut manifest),
        Command::Predict(a) => cmd_predict(a, &mut manifest),
        Command::Compare(a) => cmd_compare(a, &mut manifest),
        Command::Simulate(a) => cmd_simulate(a, &mut manifest),
    };
    let code = match result {
        Ok(outcome) => {
            if let Some(msg) = &outcome.message {
                eprintln!("{msg}");
            }
            manifest.push("status", if outcome.code == EXIT_OK { "ok" } else { "failed" });
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            manifest.push("status", "error");
            manifest.push("error", e.to_string().replace('\n', " "));
            exit_code(&e)
        }
    };
    manifest.push("exit_code", code);
    if let Err(e) = manifest.write(&out) {
        eprintln!("error: {e}");
        return EXIT_INVALID;
    }
    code
}

fn cmd_chainladder(a: &ChainLadderArgs, m: &mut Manifest) -> Result<Outcome> {
    m.push("input", a.input.display());
    let t = read_triangle(&a.input)?;
    m.push("input_kind", t.kind());
    let cumulative = match t.kind() {
        TriangleKind::Cumulative => t,
        TriangleKind::Incremental => to_cumulative(&t)?,
    };
    let f = dev_factors(&cumulative)?;
    let projected = project(&cumulative, &f)?;
    write_factors(&f, a.out.join("factors.csv"))?;
    write_triangle(&projected, a.out.join("projected.csv"), ValueFormat::Exact)?;
    write_triangle(&projected, a.out.join("projected_rounded.csv"), ValueFormat::Integer)?;
    let factors: Vec<String> = f.factors.iter().map(|x| format!("{x:.6}")).collect();
    m.push("factors", factors.join(" "));
    println!("development factors: {}", factors.join(" "));
    Ok(Outcome::ok())
}

fn cmd_fit(a: &FitArgs, m: &mut Manifest) -> Result<Outcome> {
    m.push("input", a.input.display());
    m.push("seed", a.seed);
    a.optimizer.manifest(m);
    let (log, _) = read_event_log_with_origin(&a.input)?;
    m.push("n", log.len());
    if log.len() < 3 {
        return Err(Error::Invalid(format!(
            "fit needs at least 3 events, the log has {}",
            log.len()
        )));
    }
    let fit = fit_mle(&log, None, &a.optimizer.fit_options())?;
    let [b1, b2, th] = fit.params.as_array();
    let [i1, i2, it] = fit.init.as_array();
    m.push("init_beta1", i1);
    m.push("init_beta2", i2);
    m.push("init_theta", it);
    m.push("beta1", b1);
    m.push("beta2", b2);
    m.push("theta", th);
    m.push("loglik", fit.loglik);
    m.push("converged", fit.converged);
    m.push("iterations", fit.iterations);
    for (name, sample) in [("interarrival", log.inter_arrivals()), ("delay", log.delays())] {
        match ks_exponential(&sample) {
            Ok(ks) => {
                m.push(&format!("ks_{name}_rate"), ks.rate);
                m.push(&format!("ks_{name}_statistic"), ks.statistic);
                m.push(&format!("ks_{name}_p_value"), ks.p_value);
            }
            Err(e) => m.push(&format!("ks_{name}"), format!("unavailable: {e}")),
        }
    }
    println!("beta1={b1} beta2={b2} theta={th} loglik={} converged={}", fit.loglik, fit.converged);
    if fit.converged {
        Ok(Outcome::ok())
    } else {
        Ok(Outcome {
            code: EXIT_NUMERICAL,
            message: Some(format!("fit did not converge after {} iterations", fit.iterations)),
        })
    }
}

fn manifest_value(entries: &[(String, String)], key: &str, path: &Path) -> Result<f64> {
    let raw = entries
        .iter()
        .rev()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::Invalid(format!("{}: no {key} entry", path.display())))?;
    raw.parse()
        .map_err(|_| Error::Invalid(format!("{}: {key}={raw} is not a number", path.display())))
}

fn cmd_predict(a: &PredictArgs, m: &mut Manifest) -> Result<Outcome> {
    m.push("input", a.input.display());
    m.push("quad_tol", a.quad_tol);
    let params = match (&a.params, a.beta1, a.beta2, a.theta) {
        (Some(path), ..) => {
            m.push("params", path.display());
            let entries = read_manifest(path)?;
            ModelParams::new(
                manifest_value(&entries, "beta1", path)?,
                manifest_value(&entries, "beta2", path)?,
                manifest_value(&entries, "theta", path)?,
            )?
        }
        (None, Some(b1), Some(b2), Some(th)) => ModelParams::new(b1, b2, th)?,
        _ => {
            return Err(Error::Invalid(
                "predict needs --params or all of --beta1, --beta2, --theta".into(),
            ))
        }
    };
    let [b1, b2, th] = params.as_array();
    m.push("beta1", b1);
    m.push("beta2", b2);
    m.push("theta", th);

    let (log, date_origin) = read_event_log_with_origin(&a.input)?;
    let origin_year = date_origin.unwrap_or(a.origin_year);
    m.push("origin_year", origin_year);
    m.push("n", log.len());
    let years = log.records().iter().map(|r| calendar_year(r.t)).max().unwrap_or(0);
    if years == 0 {
        return Err(Error::Invalid("the event log is empty".into()));
    }
    let horizon = a.horizon.unwrap_or(2 * years - 1);
    m.push("years", years);
    m.push("horizon", horizon);
    let latest_report = log.records().iter().map(|r| calendar_year(r.s)).max().unwrap_or(0);
    if latest_report > horizon {
        let warning = format!(
            "horizon {horizon} is shorter than the observed reporting, which reaches year {latest_report}"
        );
        eprintln!("warning: {warning}");
        m.push("warning", warning);
    }

    let forecast = predict_ibnr(&log, &params, horizon, &QuadratureOptions::relative(a.quad_tol))?;
    write_forecast(&forecast, origin_year, a.out.join("forecast.csv"))?;
    let model = forecast.to_incremental_triangle(origin_year, years);
    write_triangle(&model, a.out.join("predicted_incremental.csv"), ValueFormat::Exact)?;
    let table = to_cumulative(&forecast_triangle(&log, &forecast, origin_year)?)?;
    write_triangle(&table, a.out.join("predicted_cumulative.csv"), ValueFormat::Exact)?;
    write_triangle(&table, a.out.join("predicted_cumulative_rounded.csv"), ValueFormat::Integer)?;
    let total: f64 = forecast.counts.iter().flatten().sum();
    m.push("expected_total", total);
    println!("expected claims over the forecast grid: {total}");
    Ok(Outcome::ok())
}

fn cmd_compare(a: &CompareArgs, m: &mut Manifest) -> Result<Outcome> {
    m.push("input", a.input.display());
    m.push("cl", a.cl.display());
    m.push("copula", a.copula.display());
    let actual = read_triangle(&a.input)?;
    let mut summary = Vec::new();
    for (name, path) in [("cl", &a.cl), ("copula", &a.copula)] {
        let predicted = read_triangle(path)?;
        let table = error_table(&actual, &predicted)?;
        write_error_table(&table, a.out.join(format!("errors_{name}.csv")))?;
        let mape = table.mean();
        let rendered = mape.map_or("none".to_string(), |v| format!("{v:.4}"));
        m.push(&format!("mape_{name}"), &rendered);
        summary.push(format!("{name}={rendered}"));
    }
    let line = format!("mean absolute percentage error: {}", summary.join(" "));
    fs::write(a.out.join("summary.txt"), format!("{line}\n")).map_err(|source| Error::Io {
        path: a.out.join("summary.txt"),
        source,
    })?;
    println!("{line}");
    Ok(Outcome::ok())
}

fn cmd_simulate(a: &SimulateArgs, m: &mut Manifest) -> Result<Outcome> {
    m.push("n", a.n.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    m.push("replications", a.replications);
    m.push("seed", a.seed);
    m.push("beta1", a.beta1);
    m.push("beta2", a.beta2);
    m.push("theta", a.theta);
    m.push("years", a.years);
    m.push("origin_year", a.origin_year);
    m.push("envelope_safety", a.envelope_safety);
    a.optimizer.manifest(m);
    if a.n.is_empty() {
        return Err(Error::Invalid("--n needs at least one sample size".into()));
    }
    let params = ModelParams::new(a.beta1, a.beta2, a.theta)?;
    let fit = a.optimizer.fit_options();
    let mut reports = Vec::with_capacity(a.n.len());
    let mut ratios = Vec::with_capacity(a.n.len());
    for &n in &a.n {
        let cfg = SimConfig {
            params,
            n,
            replications: a.replications,
            seed: a.seed,
            envelope_safety: a.envelope_safety,
        }
        .validated()?;
        let report = recovery_study(&cfg, &fit)?;
        m.push(&format!("exclusion_rate_n{n}"), report.exclusion_rate());
        println!(
            "n={n}: mean=({:.4}, {:.4}, {:.4}) mse=({:.4}, {:.4}, {:.4}) excluded={}/{}",
            report.mean[0],
            report.mean[1],
            report.mean[2],
            report.mse[0],
            report.mse[1],
            report.mse[2],
            report.excluded,
            report.replications
        );
        reports.push(report);
        ratios.push((n, report_ratio_table(&cfg, a.years)?));
    }
    write_recovery_reports(&reports, a.out.join("recovery.csv"))?;
    write_ratio_tables(&ratios, a.origin_year + a.years as i32 - 1, a.out.join("ratios.csv"))?;
    Ok(Outcome::ok())
}
