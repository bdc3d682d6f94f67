//! Command-line surface of the overnight GARCH-Ito toolkit.
//!
//! Subcommands: `simulate` (sample-path generation), `prv` (realized
//! volatility from ticks), `fit` (model estimation), `backtest` (rolling
//! one-day-ahead evaluation), and `report` (re-aggregate per-day artifacts).
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 numerical non-convergence
//! (the report is still written).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use ogi_core::driver::{self, BacktestConfig};
use ogi_core::estimation::{fit_competitor, fit_ogi, step1_qmle};
use ogi_core::filters::ModelKind;
use ogi_core::io::{
    read_daily_csv, read_highfreq_csv, read_rv_csv, write_daily_csv, write_highfreq_csv,
    write_iv_csv, write_rv_csv, Manifest, RunConfig,
};
use ogi_core::prv::prv_series;
use ogi_core::simulator::simulate;
use ogi_core::FilterInput;

#[derive(Parser)]
#[command(name = "ogi", version, about = "Overnight GARCH-Ito volatility toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an OGI sample path and write tick, daily, and true-variance
    /// files plus a manifest.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Pre-averaging realized volatility from a tick file.
    Prv {
        #[arg(long)]
        hf: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a volatility model to realized-volatility and daily files.
    Fit {
        #[arg(long)]
        rv: PathBuf,
        #[arg(long)]
        daily: PathBuf,
        /// ogi, s-ogi, a-ogi, gjr-ogi, garch, gjr, rgarch, har, loghar.
        #[arg(long)]
        model: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Rolling one-day-ahead backtest across models.
    Backtest {
        #[arg(long)]
        rv: PathBuf,
        #[arg(long)]
        daily: PathBuf,
        /// Comma-separated model list.
        #[arg(long, default_value = "ogi,s-ogi,a-ogi,gjr-ogi,garch,gjr,rgarch,har,loghar")]
        models: String,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-aggregate a backtest output directory into summary tables.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: ReportFormat,
    },
}

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(RunConfig::default()),
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("OGI_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
}

fn filter_input_from_files(
    rv_path: &PathBuf,
    daily_path: &PathBuf,
    lambda: f64,
) -> anyhow::Result<FilterInput> {
    let rv_rows = read_rv_csv(rv_path)?;
    let daily = read_daily_csv(daily_path)?;
    if daily.len() < 2 {
        bail!("need at least 2 daily rows, got {}", daily.len());
    }
    let n = daily.len() - 1;
    if rv_rows.len() < n {
        bail!("rv file has {} days, daily file implies {n} estimation days", rv_rows.len());
    }
    for (r, d) in rv_rows.iter().zip(daily.iter()) {
        if r.day_index != d.day_index {
            bail!("day_index mismatch between rv ({}) and daily ({})", r.day_index, d.day_index);
        }
    }
    let rv: Vec<f64> = rv_rows[..n].iter().map(|r| r.rv).collect();
    let overnight: Vec<f64> = (0..n)
        .map(|d| daily[d + 1].open_log_price - daily[d].close_log_price)
        .collect();
    let ov: Vec<f64> = overnight.iter().map(|r| r * r).collect();
    let oo: Vec<f64> = (0..n)
        .map(|d| daily[d + 1].open_log_price - daily[d].open_log_price)
        .collect();
    let session: Vec<f64> = (0..n)
        .map(|d| daily[d].close_log_price - daily[d].open_log_price)
        .collect();
    Ok(FilterInput::from_series(rv, ov, oo, session, overnight, lambda)?)
}

fn run() -> anyhow::Result<u8> {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => bail!("{e}"),
        Err(e) => {
            // --help / --version
            print!("{e}");
            return Ok(0);
        }
    };
    match cli.command {
        Command::Simulate { config, out, seed } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.sim.seed = s;
            }
            let sim_cfg = cfg.sim_config()?;
            let sim = simulate(&sim_cfg)?;
            std::fs::create_dir_all(&out)?;
            write_highfreq_csv(&out.join("highfreq.csv"), &sim.observed)?;
            write_daily_csv(&out.join("daily.csv"), &sim.observed)?;
            write_iv_csv(&out.join("iv.csv"), &sim)?;
            Manifest::new(sim_cfg.seed, &cfg).write(&out.join("manifest.json"))?;
            eprintln!(
                "simulated {} days ({} ticks/day) -> {}",
                sim_cfg.n_days,
                sim_cfg.m_obs,
                out.display()
            );
            Ok(0)
        }
        Command::Prv { hf, config, out } => {
            let cfg = load_config(&config)?;
            let series = read_highfreq_csv(&hf, cfg.lambda())?;
            let outputs = prv_series(&series, &cfg.prv_config())?;
            write_rv_csv(&out, &outputs)?;
            eprintln!("wrote {} daily estimates -> {}", outputs.len(), out.display());
            Ok(0)
        }
        Command::Fit {
            rv,
            daily,
            model,
            config,
            out,
            seed,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.fit.seed = s;
            }
            let kind = ModelKind::parse(&model)?;
            if matches!(kind, ModelKind::Garch11 | ModelKind::Gjr11) {
                eprintln!("warning: model '{model}' uses only daily returns; the rv file feeds alignment, not the fit");
            }
            let input = filter_input_from_files(&rv, &daily, cfg.lambda())?;
            let est = cfg.estimation_config()?;
            let (json, converged) = match kind {
                ModelKind::Ogi => {
                    let report = fit_ogi(&input, &est)?;
                    (serde_json::to_string_pretty(&report)?, report.trace.converged)
                }
                ModelKind::SOgi => {
                    let s1 = step1_qmle(&input, &est)?;
                    let ok = s1.session.converged && s1.overnight.converged;
                    (serde_json::to_string_pretty(&s1)?, ok)
                }
                other => {
                    let fit = fit_competitor(other, &input, &est)?;
                    let ok = fit.converged;
                    (serde_json::to_string_pretty(&fit)?, ok)
                }
            };
            std::fs::write(&out, json + "\n")?;
            if converged {
                eprintln!("fit written -> {}", out.display());
                Ok(0)
            } else {
                eprintln!("fit did not converge; report written -> {}", out.display());
                Ok(2)
            }
        }
        Command::Backtest {
            rv,
            daily,
            models,
            window,
            config,
            out,
            seed,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.fit.seed = s;
            }
            if let Some(w) = window {
                cfg.backtest.window = w;
            }
            let kinds: Vec<ModelKind> = models
                .split(',')
                .map(|m| ModelKind::parse(m.trim()))
                .collect::<ogi_core::Result<_>>()?;
            let input = filter_input_from_files(&rv, &daily, cfg.lambda())?;
            let bt = BacktestConfig {
                window: cfg.backtest.window,
                q0: cfg.backtest.q0.clone(),
                xi: cfg.backtest.xi.clone(),
                refit_stride: cfg.backtest.refit_stride,
                models: kinds,
                baseline: ModelKind::parse(&cfg.backtest.baseline)?,
                var_min_obs: cfg.backtest.var_min_obs,
            };
            let est = cfg.estimation_config()?;
            let output = driver::run_backtest(&input, &bt, &est)?;
            std::fs::create_dir_all(&out)?;
            driver::write_forecasts_csv(&out.join("forecasts.csv"), &output, &bt.q0)?;
            std::fs::write(
                out.join("report.json"),
                serde_json::to_string_pretty(&output.reports)? + "\n",
            )?;
            std::fs::write(
                out.join("report.csv"),
                driver::report_csv_string(&output.reports, &bt.q0, &bt.xi),
            )?;
            std::fs::write(out.join("qq.csv"), driver::qq_csv_string(&output.qq_points))?;
            std::fs::write(out.join("acf.csv"), driver::acf_csv_string(&output.reports))?;
            Manifest::new(cfg.fit.seed, &cfg).write(&out.join("manifest.json"))?;
            eprintln!(
                "backtest over {} out-of-sample days, {} models -> {}",
                output.records.len() / bt.models.len().max(1),
                bt.models.len(),
                out.display()
            );
            Ok(0)
        }
        Command::Report { input, format } => {
            let forecasts = input.join("forecasts.csv");
            if !forecasts.exists() {
                bail!("no forecasts.csv under {} (empty table)", input.display());
            }
            let (records, q0) = driver::read_forecasts_csv(&forecasts)?;
            if records.is_empty() {
                bail!("forecasts.csv has no rows (empty table)");
            }
            let manifest: Manifest =
                serde_json::from_str(&std::fs::read_to_string(input.join("manifest.json"))?)?;
            let cfg = manifest.config;
            let models: Vec<ModelKind> = {
                let mut names: Vec<&str> = records.iter().map(|r| r.model.as_str()).collect();
                names.sort();
                names.dedup();
                names
                    .into_iter()
                    .map(ModelKind::parse)
                    .collect::<ogi_core::Result<_>>()?
            };
            let bt = BacktestConfig {
                window: cfg.backtest.window,
                q0,
                xi: cfg.backtest.xi.clone(),
                refit_stride: cfg.backtest.refit_stride,
                models,
                baseline: ModelKind::parse(&cfg.backtest.baseline)?,
                var_min_obs: cfg.backtest.var_min_obs,
            };
            let reports = driver::summarize(&records, &bt)?;
            match format {
                ReportFormat::Csv => print!("{}", driver::report_csv_string(&reports, &bt.q0, &bt.xi)),
                ReportFormat::Json => println!("{}", serde_json::to_string_pretty(&reports)?),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
