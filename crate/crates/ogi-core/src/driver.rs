//! Rolling-window backtest driver: daily one-step-ahead volatility forecasts
//! per model, VaR construction, and the full evaluation report.
//!
//! Windows advance one day at a time; models refit every `refit_stride` days
//! and roll their filters forward on the latest window between refits.
//! Anchors are processed in parallel with results merged in day order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{FilterInput, VolSeries};
use crate::error::{OgiError, Result};
use crate::estimation::{fit_competitor, fit_ogi, step1_qmle, EstimationConfig};
use crate::evaluation as eval;
use crate::filters::{
    self, filter_a_ogi, filter_garch11, filter_gjr11, filter_gjr_ogi, filter_ogi,
    filter_realized_garch, filter_s_ogi, AOgiDivisors, FilterOpts, GjrOgiParams, ModelKind,
};
use crate::theory::forecast_one;

/// Backtest settings.
#[derive(Debug, Clone)]
pub struct BacktestConfig {
    pub window: usize,
    pub q0: Vec<f64>,
    pub xi: Vec<f64>,
    pub refit_stride: usize,
    pub models: Vec<ModelKind>,
    pub baseline: ModelKind,
    pub var_min_obs: usize,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            window: 500,
            q0: vec![0.01, 0.02, 0.05, 0.1, 0.2],
            xi: vec![2.5, 5.0],
            refit_stride: 1,
            models: ModelKind::ALL.to_vec(),
            baseline: ModelKind::Ogi,
            var_min_obs: 100,
        }
    }
}

/// One model's forecast state for a window: the whole-day forecast used for
/// loss metrics, the return-scale variance forecast used for VaR and
/// allocation, and the in-sample fitted variances for standardization.
struct WindowForecast {
    whole_day: f64,
    return_var: f64,
    fitted_return_var: Vec<f64>,
}

/// Per-model fitted parameters, reused across a refit block.
enum FittedModel {
    Ogi(crate::estimation::FitReport),
    SOgi { theta_h: [f64; 4], theta_l: [f64; 4] },
    AOgi([f64; 4]),
    GjrOgi(GjrOgiParams),
    Garch11([f64; 3]),
    Gjr11([f64; 4]),
    RealizedGarch([f64; 3]),
    Har,
    LogHar,
}

fn fit_model(kind: ModelKind, input: &FilterInput, cfg: &EstimationConfig) -> Result<FittedModel> {
    Ok(match kind {
        ModelKind::Ogi => FittedModel::Ogi(fit_ogi(input, cfg)?),
        ModelKind::SOgi => {
            let s1 = step1_qmle(input, cfg)?;
            FittedModel::SOgi {
                theta_h: s1.session.params,
                theta_l: s1.overnight.params,
            }
        }
        ModelKind::AOgi => {
            let f = fit_competitor(kind, input, cfg)?;
            FittedModel::AOgi([f.params[0], f.params[1], f.params[2], f.params[3]])
        }
        ModelKind::GjrOgi => {
            let f = fit_competitor(kind, input, cfg)?;
            FittedModel::GjrOgi(GjrOgiParams {
                omega: f.params[0],
                gamma: f.params[1],
                alpha: f.params[2],
                beta: f.params[3],
                a: f.params[4],
                b: f.params[5],
                c_h: f.params[6],
                c_l: f.params[7],
            })
        }
        ModelKind::Garch11 => {
            let f = fit_competitor(kind, input, cfg)?;
            FittedModel::Garch11([f.params[0], f.params[1], f.params[2]])
        }
        ModelKind::Gjr11 => {
            let f = fit_competitor(kind, input, cfg)?;
            FittedModel::Gjr11([f.params[0], f.params[1], f.params[2], f.params[3]])
        }
        ModelKind::RealizedGarch => {
            let f = fit_competitor(kind, input, cfg)?;
            FittedModel::RealizedGarch([f.params[0], f.params[1], f.params[2]])
        }
        ModelKind::Har => FittedModel::Har,
        ModelKind::LogHar => FittedModel::LogHar,
    })
}

fn one_step_leg(p: &[f64; 4], h_last: f64, rv_last: f64, ov_last: f64, lambda: f64) -> f64 {
    p[0] + p[1] * h_last + p[2] / lambda * rv_last + p[3] / (1.0 - lambda) * ov_last
}

/// Forecast next-day variances from a fitted model on the given in-sample
/// window.
fn window_forecast(
    model: &FittedModel,
    input: &FilterInput,
    cfg: &EstimationConfig,
) -> Result<WindowForecast> {
    let lambda = input.lambda;
    let n = input.len();
    let last = n - 1;
    let floor = |v: f64| v.max(filters::EPSILON_FLOOR);
    Ok(match model {
        FittedModel::Ogi(report) => {
            let vols: VolSeries = filter_ogi(
                &report.theta_g_hat,
                input,
                FilterOpts {
                    aggregation: cfg.aggregation,
                    ..Default::default()
                },
            )?;
            let f = forecast_one(
                &report.theta_g_hat,
                vols.h[last],
                input.rv[last],
                input.ov[last],
                lambda,
                cfg.aggregation,
            );
            WindowForecast {
                whole_day: floor(f),
                return_var: floor(f),
                fitted_return_var: vols.h,
            }
        }
        FittedModel::SOgi { theta_h, theta_l } => {
            let vols = filter_s_ogi(theta_h, theta_l, input, FilterOpts::default())?;
            let hh = one_step_leg(theta_h, vols.h_h[last], input.rv[last], input.ov[last], lambda);
            let hl = one_step_leg(theta_l, vols.h_l[last], input.rv[last], input.ov[last], lambda);
            let f = lambda * hh + (1.0 - lambda) * hl;
            WindowForecast {
                whole_day: floor(f),
                return_var: floor(f),
                fitted_return_var: vols.h,
            }
        }
        FittedModel::AOgi(p) => {
            let h = filter_a_ogi(p, input, AOgiDivisors::AsPrinted, None)?;
            let f = p[0] + p[1] * h[last]
                + p[2] / (1.0 - lambda) * input.rv[last]
                + p[3] / lambda * input.ov[last];
            WindowForecast {
                whole_day: floor(f),
                return_var: floor(f),
                fitted_return_var: h,
            }
        }
        FittedModel::GjrOgi(p) => {
            let h = filter_gjr_ogi(p, input, None)?;
            let lev_h = if input.session_returns[last] < p.c_h { p.a } else { 0.0 };
            let lev_l = if input.overnight_returns[last] < p.c_l { p.b } else { 0.0 };
            let f = p.omega + p.gamma * h[last]
                + (p.alpha + lev_h) / lambda * input.rv[last]
                + (p.beta + lev_l) / (1.0 - lambda) * input.ov[last];
            WindowForecast {
                whole_day: floor(f),
                return_var: floor(f),
                fitted_return_var: h,
            }
        }
        FittedModel::Garch11(p) => {
            let h = filter_garch11(p, input, None)?;
            let f = p[0] + p[1] * h[last] + p[2] * input.oo_ret_sq[last];
            WindowForecast {
                whole_day: floor(f),
                return_var: floor(f),
                fitted_return_var: h,
            }
        }
        FittedModel::Gjr11(p) => {
            let h = filter_gjr11(p, input, None)?;
            let lev = if input.oo_returns[last] < 0.0 { p[3] } else { 0.0 };
            let f = p[0] + p[1] * h[last] + (p[2] + lev) * input.oo_ret_sq[last];
            WindowForecast {
                whole_day: floor(f),
                return_var: floor(f),
                fitted_return_var: h,
            }
        }
        FittedModel::RealizedGarch(p) => {
            let out = filter_realized_garch(p, input, None)?;
            let session_next = p[0] + p[1] * out.h[last] + p[2] * input.rv[last];
            WindowForecast {
                whole_day: floor(session_next * out.adjustment),
                return_var: floor(session_next),
                fitted_return_var: out.h,
            }
        }
        FittedModel::Har => {
            let fit = filters::fit_har(&input.rv, Some(&input.ov))?;
            WindowForecast {
                whole_day: floor(fit.forecast * fit.adjustment),
                return_var: floor(fit.forecast),
                fitted_return_var: fit.fitted,
            }
        }
        FittedModel::LogHar => {
            let fit = filters::fit_log_har(&input.rv, Some(&input.ov))?;
            WindowForecast {
                whole_day: floor(fit.forecast * fit.adjustment),
                return_var: floor(fit.forecast),
                fitted_return_var: fit.fitted,
            }
        }
    })
}

/// One out-of-sample day for one model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DayRecord {
    /// Estimation-day index being forecast (0-based within the input).
    pub day: usize,
    pub model: String,
    pub forecast: f64,
    pub realized: f64,
    /// The model-convention daily return realized on the forecast day.
    pub ret: f64,
    /// VaR per quantile level (same order as the config's q0 list).
    pub var: Vec<f64>,
    /// Previous day's return (the expected-return proxy for allocation).
    pub prev_ret: f64,
    /// Return-scale variance forecast used for VaR and allocation.
    pub return_var: f64,
}

/// Per-model summary: losses, comparison p-values, coverage backtests,
/// economic metrics, and residual persistence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub return_convention: String,
    pub mspe: f64,
    pub qlike: f64,
    pub dm_mspe: Option<(f64, f64)>,
    pub dm_qlike: Option<(f64, f64)>,
    /// Per q0: (LRuc stat, LRuc p, LRcc stat, LRcc p, DQ stat, DQ p).
    pub var_tests: Vec<VarTestRow>,
    /// Per xi: Sharpe ratio and expected utility of the allocation strategy.
    pub economic: Vec<EconomicRow>,
    pub persistence_lag1: f64,
    pub persistence_max_abs: f64,
    pub acf: Vec<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarTestRow {
    pub q0: f64,
    pub hit_rate: f64,
    pub lruc_stat: f64,
    pub lruc_p: f64,
    pub lrcc_stat: f64,
    pub lrcc_p: f64,
    pub dq_stat: f64,
    pub dq_p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EconomicRow {
    pub xi: f64,
    pub sharpe: f64,
    pub expected_utility: f64,
}

/// Z-statistics collected from the rolling OGI refits (QQ-plot data).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QqPoint {
    pub name: String,
    pub statistic: f64,
}

/// Full backtest output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BacktestOutput {
    pub records: Vec<DayRecord>,
    pub reports: Vec<ModelReport>,
    pub qq_points: Vec<QqPoint>,
}

fn slice_input(input: &FilterInput, from: usize, to: usize) -> FilterInput {
    FilterInput {
        rv: input.rv[from..to].to_vec(),
        ov: input.ov[from..to].to_vec(),
        oo_ret_sq: input.oo_ret_sq[from..to].to_vec(),
        oo_returns: input.oo_returns[from..to].to_vec(),
        session_returns: input.session_returns[from..to].to_vec(),
        overnight_returns: input.overnight_returns[from..to].to_vec(),
        lambda: input.lambda,
        h0_h: input.rv[from],
        h0_l: crate::data::sample_variance(&input.overnight_returns[from..to]),
    }
}

/// Runs the rolling backtest over aligned estimation-day series.
pub fn run_backtest(
    input: &FilterInput,
    cfg: &BacktestConfig,
    est_cfg: &EstimationConfig,
) -> Result<BacktestOutput> {
    let n = input.len();
    if n < cfg.window + 1 {
        return Err(OgiError::InvalidInput(format!(
            "need more than window + 1 = {} estimation days, got {n}",
            cfg.window + 1
        )));
    }
    if cfg.models.is_empty() {
        return Err(OgiError::InvalidInput("no models requested".into()));
    }
    let stride = cfg.refit_stride.max(1);
    let anchors: Vec<usize> = (cfg.window..n).step_by(stride).collect();

    struct AnchorResult {
        records: Vec<DayRecord>,
        qq: Vec<QqPoint>,
    }

    let anchor_results: Vec<Result<AnchorResult>> = anchors
        .par_iter()
        .map(|&anchor| {
            let mut records = Vec::new();
            let mut qq = Vec::new();
            // fit once at the anchor window
            let fit_input = slice_input(input, anchor - cfg.window, anchor);
            let mut fitted = Vec::new();
            for kind in &cfg.models {
                let model = fit_model(*kind, &fit_input, est_cfg)?;
                if let FittedModel::Ogi(report) = &model {
                    for z in &report.z_stats {
                        qq.push(QqPoint {
                            name: z.name.clone(),
                            statistic: z.statistic,
                        });
                    }
                }
                fitted.push(model);
            }
            // forecast each day of the block on its own rolled window
            for t in anchor..(anchor + stride).min(n) {
                let win = slice_input(input, t - cfg.window, t);
                for (kind, model) in cfg.models.iter().zip(fitted.iter()) {
                    let fc = window_forecast(model, &win, est_cfg)?;
                    let oo = kind.uses_open_to_open_returns();
                    let rets_in: &[f64] = if oo { &win.oo_returns } else { &win.session_returns };
                    let ret_t = if oo {
                        input.oo_returns[t]
                    } else {
                        input.session_returns[t]
                    };
                    let mut var = Vec::with_capacity(cfg.q0.len());
                    for q0 in &cfg.q0 {
                        var.push(eval::var_forecast(
                            rets_in,
                            &fc.fitted_return_var,
                            fc.return_var,
                            *q0,
                            cfg.var_min_obs.min(cfg.window),
                        )?);
                    }
                    records.push(DayRecord {
                        day: t,
                        model: kind.name().to_string(),
                        forecast: fc.whole_day,
                        realized: input.rv[t] + input.ov[t],
                        ret: ret_t,
                        var,
                        prev_ret: rets_in[win.len() - 1],
                        return_var: fc.return_var,
                    });
                }
            }
            Ok(AnchorResult { records, qq })
        })
        .collect();

    let mut records = Vec::new();
    let mut qq_points = Vec::new();
    for r in anchor_results {
        let r = r?;
        records.extend(r.records);
        qq_points.extend(r.qq);
    }
    records.sort_by(|a, b| (a.day, a.model.clone()).cmp(&(b.day, b.model.clone())));

    let reports = summarize(&records, cfg)?;
    Ok(BacktestOutput {
        records,
        reports,
        qq_points,
    })
}

/// Builds per-model reports from the per-day records.
pub fn summarize(records: &[DayRecord], cfg: &BacktestConfig) -> Result<Vec<ModelReport>> {
    let mut by_model: BTreeMap<String, Vec<&DayRecord>> = BTreeMap::new();
    for r in records {
        by_model.entry(r.model.clone()).or_default().push(r);
    }
    let baseline_name = cfg.baseline.name();
    let baseline_losses = by_model.get(baseline_name).map(|rows| {
        let se: Vec<f64> = rows.iter().map(|r| (r.forecast - r.realized).powi(2)).collect();
        let ql: Vec<f64> = rows
            .iter()
            .map(|r| r.forecast.ln() + r.realized / r.forecast)
            .collect();
        (se, ql)
    });

    let mut reports = Vec::new();
    for kind in &cfg.models {
        let name = kind.name();
        let rows = match by_model.get(name) {
            Some(r) => r,
            None => continue,
        };
        let forecasts: Vec<f64> = rows.iter().map(|r| r.forecast).collect();
        let realized: Vec<f64> = rows.iter().map(|r| r.realized).collect();
        let mspe = eval::mspe(&forecasts, &realized)?;
        let qlike = eval::qlike(&forecasts, &realized)?;

        let se: Vec<f64> = rows.iter().map(|r| (r.forecast - r.realized).powi(2)).collect();
        let ql: Vec<f64> = rows
            .iter()
            .map(|r| r.forecast.ln() + r.realized / r.forecast)
            .collect();
        let mut notes = Vec::new();
        let (dm_mspe, dm_qlike) = if name != baseline_name {
            match &baseline_losses {
                Some((bse, bql)) => {
                    let dm1 = match eval::dm_test(&se, bse, None) {
                        Ok(v) => Some(v),
                        Err(e) => {
                            notes.push(format!("DM(MSPE) undefined: {e}"));
                            None
                        }
                    };
                    let dm2 = match eval::dm_test(&ql, bql, None) {
                        Ok(v) => Some(v),
                        Err(e) => {
                            notes.push(format!("DM(QLIKE) undefined: {e}"));
                            None
                        }
                    };
                    (dm1, dm2)
                }
                None => (None, None),
            }
        } else {
            (None, None)
        };

        let mut var_tests = Vec::new();
        for (qi, q0) in cfg.q0.iter().enumerate() {
            let vars: Vec<f64> = rows.iter().map(|r| r.var[qi]).collect();
            let rets: Vec<f64> = rows.iter().map(|r| r.ret).collect();
            let hit_seq = eval::hits(&rets, &vars);
            let hit_rate =
                hit_seq.iter().map(|h| *h as f64).sum::<f64>() / hit_seq.len() as f64;
            let tests = eval::lruc(&hit_seq, *q0).and_then(|uc| {
                let cc = eval::lrcc(&hit_seq, *q0)?;
                let dq = eval::dq_test(&hit_seq, *q0, &vars, 4)?;
                Ok((uc, cc, dq))
            });
            match tests {
                Ok((uc, cc, dq)) => var_tests.push(VarTestRow {
                    q0: *q0,
                    hit_rate,
                    lruc_stat: uc.statistic,
                    lruc_p: uc.p_value,
                    lrcc_stat: cc.statistic,
                    lrcc_p: cc.p_value,
                    dq_stat: dq.statistic,
                    dq_p: dq.p_value,
                }),
                Err(e) => notes.push(format!("coverage tests skipped at q0 = {q0}: {e}")),
            }
        }

        let mut economic = Vec::new();
        for xi in &cfg.xi {
            let weighted: Vec<f64> = rows
                .iter()
                .map(|r| {
                    let x = eval::mv_allocation(r.prev_ret, r.return_var, *xi).unwrap_or(0.0);
                    x * r.ret
                })
                .collect();
            match (eval::sharpe(&weighted), eval::expected_utility(&weighted, *xi)) {
                (Ok(s), Ok(u)) => economic.push(EconomicRow {
                    xi: *xi,
                    sharpe: s,
                    expected_utility: u,
                }),
                _ => notes.push(format!("economic metrics undefined at xi = {xi}")),
            }
        }

        let persistence = eval::persistence_regression(&realized, &forecasts);
        let (lag1, max_abs, acf) = match persistence {
            Ok(p) => (p.lag1, p.max_abs, p.acf),
            Err(e) => {
                notes.push(format!("persistence regression failed: {e}"));
                (f64::NAN, f64::NAN, Vec::new())
            }
        };

        reports.push(ModelReport {
            model: name.to_string(),
            return_convention: if kind.uses_open_to_open_returns() {
                "open-to-open".into()
            } else {
                "open-to-close".into()
            },
            mspe,
            qlike,
            dm_mspe,
            dm_qlike,
            var_tests,
            economic,
            persistence_lag1: lag1,
            persistence_max_abs: max_abs,
            acf,
            notes,
        });
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// report files
// ---------------------------------------------------------------------------

/// Header prefix of the per-day forecast table; one `var_<q0>` column is
/// appended per quantile level.
pub const FORECASTS_HEADER_PREFIX: &str =
    "day,model,forecast,realized,ret,prev_ret,return_var";

/// Writes the per-day forecast table (the per-window artifact that the
/// report command can re-aggregate independently).
pub fn write_forecasts_csv(path: &std::path::Path, out: &BacktestOutput, q0: &[f64]) -> Result<()> {
    let mut text = String::from(FORECASTS_HEADER_PREFIX);
    for q in q0 {
        text.push_str(&format!(",var_{q}"));
    }
    text.push('\n');
    for r in &out.records {
        text.push_str(&format!(
            "{},{},{},{},{},{},{}",
            r.day, r.model, r.forecast, r.realized, r.ret, r.prev_ret, r.return_var
        ));
        for v in &r.var {
            text.push_str(&format!(",{v}"));
        }
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads the forecast table back; returns the records and the q0 list
/// recovered from the header.
pub fn read_forecasts_csv(path: &std::path::Path) -> Result<(Vec<DayRecord>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| OgiError::InvalidInput("empty forecasts file".into()))?;
    if !header.starts_with(FORECASTS_HEADER_PREFIX) {
        return Err(OgiError::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: format!("unexpected header '{header}'"),
        });
    }
    let q0: Vec<f64> = header
        .split(',')
        .skip(7)
        .map(|c| {
            c.strip_prefix("var_")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| OgiError::Parse {
                    path: path.display().to_string(),
                    line: 1,
                    msg: format!("bad VaR column '{c}'"),
                })
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 7 + q0.len() {
            return Err(OgiError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: format!("expected {} fields, got {}", 7 + q0.len(), parts.len()),
            });
        }
        let f = |j: usize| -> Result<f64> {
            parts[j].parse::<f64>().map_err(|_| OgiError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: format!("bad number '{}'", parts[j]),
            })
        };
        records.push(DayRecord {
            day: parts[0].parse().map_err(|_| OgiError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: format!("bad day '{}'", parts[0]),
            })?,
            model: parts[1].to_string(),
            forecast: f(2)?,
            realized: f(3)?,
            ret: f(4)?,
            prev_ret: f(5)?,
            return_var: f(6)?,
            var: (7..7 + q0.len()).map(f).collect::<Result<_>>()?,
        });
    }
    Ok((records, q0))
}

/// Summary CSV: one wide row per model.
pub fn report_csv_string(reports: &[ModelReport], q0: &[f64], xi: &[f64]) -> String {
    let mut header = String::from("model,return_convention,mspe,qlike,dm_mspe_p,dm_qlike_p");
    for q in q0 {
        header.push_str(&format!(",lruc_p_{q},lrcc_p_{q},dq_p_{q}"));
    }
    for x in xi {
        header.push_str(&format!(",sharpe_{x},eu_{x}"));
    }
    header.push_str(",acf_lag1,acf_max_abs\n");
    let mut text = header;
    for r in reports {
        text.push_str(&format!(
            "{},{},{},{},{},{}",
            r.model,
            r.return_convention,
            r.mspe,
            r.qlike,
            r.dm_mspe.map(|d| d.1.to_string()).unwrap_or_default(),
            r.dm_qlike.map(|d| d.1.to_string()).unwrap_or_default(),
        ));
        for q in q0 {
            match r.var_tests.iter().find(|v| v.q0 == *q) {
                Some(v) => text.push_str(&format!(",{},{},{}", v.lruc_p, v.lrcc_p, v.dq_p)),
                None => text.push_str(",,,"),
            }
        }
        for x in xi {
            match r.economic.iter().find(|e| e.xi == *x) {
                Some(e) => text.push_str(&format!(",{},{}", e.sharpe, e.expected_utility)),
                None => text.push_str(",,"),
            }
        }
        text.push_str(&format!(",{},{}\n", r.persistence_lag1, r.persistence_max_abs));
    }
    text
}

/// Residual-ACF table in long format.
pub fn acf_csv_string(reports: &[ModelReport]) -> String {
    let mut text = String::from("model,lag,acf\n");
    for r in reports {
        for (i, v) in r.acf.iter().enumerate() {
            text.push_str(&format!("{},{},{}\n", r.model, i + 1, v));
        }
    }
    text
}

/// QQ-plot points for the rolling Z-statistics: per statistic name, the
/// sorted values against standard-normal plotting quantiles.
pub fn qq_csv_string(points: &[QqPoint]) -> String {
    use statrs::distribution::{ContinuousCDF, Normal};
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut by_name: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for p in points {
        by_name.entry(p.name.as_str()).or_default().push(p.statistic);
    }
    let mut text = String::from("name,theoretical,statistic\n");
    for (name, mut vals) in by_name {
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let n = vals.len();
        for (i, v) in vals.iter().enumerate() {
            let t = normal.inverse_cdf((i as f64 + 0.5) / n as f64);
            text.push_str(&format!("{name},{t},{v}\n"));
        }
    }
    text
}
