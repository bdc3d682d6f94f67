//! Deterministic conditional-volatility recursions: the OGI filters and the
//! competitor models used in the forecast comparisons.
//!
//! All filters share the convention that the first element of the output is
//! the initial value and the recursion starts at the second element, driven
//! by the previous day's innovations. Initial-value effects decay
//! geometrically at rate `gamma`.

use serde::{Deserialize, Serialize};

use crate::data::{sample_variance, FilterInput, VolSeries};
use crate::error::{OgiError, Result};
use crate::theory::{aggregate_garch, AggregationConvention};
use crate::types::GarchTheta;

pub const EPSILON_FLOOR: f64 = 1e-12;

/// Model selector for fitting and forecasting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Ogi,
    SOgi,
    AOgi,
    GjrOgi,
    Garch11,
    Gjr11,
    RealizedGarch,
    Har,
    LogHar,
}

impl ModelKind {
    pub const ALL: [ModelKind; 9] = [
        ModelKind::Ogi,
        ModelKind::SOgi,
        ModelKind::AOgi,
        ModelKind::GjrOgi,
        ModelKind::Garch11,
        ModelKind::Gjr11,
        ModelKind::RealizedGarch,
        ModelKind::Har,
        ModelKind::LogHar,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Ogi => "ogi",
            ModelKind::SOgi => "s-ogi",
            ModelKind::AOgi => "a-ogi",
            ModelKind::GjrOgi => "gjr-ogi",
            ModelKind::Garch11 => "garch",
            ModelKind::Gjr11 => "gjr",
            ModelKind::RealizedGarch => "rgarch",
            ModelKind::Har => "har",
            ModelKind::LogHar => "loghar",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == name)
            .ok_or_else(|| OgiError::Config(format!("unknown model '{name}'")))
    }

    /// Whether the model's daily-return convention is open-to-open (session
    /// plus overnight) rather than open-to-close.
    pub fn uses_open_to_open_returns(&self) -> bool {
        !matches!(self, ModelKind::RealizedGarch | ModelKind::Har | ModelKind::LogHar)
    }
}

/// Options shared by the OGI-family filters.
#[derive(Debug, Clone, Copy, Default)]
pub struct FilterOpts {
    /// Session-leg initial value; defaults to the input's (`rv[0]`).
    pub h0_h: Option<f64>,
    /// Overnight-leg initial value; defaults to the input's (sample variance
    /// of overnight returns).
    pub h0_l: Option<f64>,
    pub aggregation: AggregationConvention,
}

fn check_nonempty(input: &FilterInput) -> Result<()> {
    if input.is_empty() {
        return Err(OgiError::InvalidInput("empty filter input".into()));
    }
    Ok(())
}

/// OGI conditional volatilities: both legs under the common persistence, and
/// the whole-day recursion under the configured aggregation convention.
pub fn filter_ogi(theta_g: &GarchTheta, input: &FilterInput, opts: FilterOpts) -> Result<VolSeries> {
    check_nonempty(input)?;
    let n = input.len();
    let lambda = input.lambda;
    let h0h = opts.h0_h.unwrap_or(input.h0_h);
    let h0l = opts.h0_l.unwrap_or(input.h0_l);
    let (omega_g, alpha_g, beta_g) = aggregate_garch(theta_g, lambda, opts.aggregation);

    let mut h_h = Vec::with_capacity(n);
    let mut h_l = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    h_h.push(h0h);
    h_l.push(h0l);
    h.push(lambda * h0h + (1.0 - lambda) * h0l);
    for i in 1..n {
        let rv = input.rv[i - 1];
        let ov = input.ov[i - 1];
        h_h.push(
            theta_g.omega_hg + theta_g.gamma * h_h[i - 1]
                + theta_g.alpha_hg / lambda * rv
                + theta_g.beta_hg / (1.0 - lambda) * ov,
        );
        h_l.push(
            theta_g.omega_lg + theta_g.gamma * h_l[i - 1]
                + theta_g.alpha_lg / lambda * rv
                + theta_g.beta_lg / (1.0 - lambda) * ov,
        );
        h.push(omega_g + theta_g.gamma * h[i - 1] + alpha_g / lambda * rv
            + beta_g / (1.0 - lambda) * ov);
    }
    Ok(VolSeries {
        rv: input.rv.clone(),
        ov: input.ov.clone(),
        h_h,
        h_l,
        h,
    })
}

/// Generic one-leg recursion `h_i = omega + gamma h_{i-1} + a_rv rv_{i-1} + a_ov ov_{i-1}`.
fn leg_recursion(
    omega: f64,
    gamma: f64,
    a_rv: f64,
    a_ov: f64,
    rv: &[f64],
    ov: &[f64],
    h0: f64,
) -> Vec<f64> {
    let n = rv.len();
    let mut h = Vec::with_capacity(n);
    h.push(h0);
    for i in 1..n {
        h.push(omega + gamma * h[i - 1] + a_rv * rv[i - 1] + a_ov * ov[i - 1]);
    }
    h
}

/// Separate-OGI: the two legs keep their own persistence parameters (the
/// standalone step-1 fits). The whole-day series is the session-length
/// weighted combination of the legs.
pub fn filter_s_ogi(
    theta_h: &[f64; 4],
    theta_l: &[f64; 4],
    input: &FilterInput,
    opts: FilterOpts,
) -> Result<VolSeries> {
    check_nonempty(input)?;
    let lambda = input.lambda;
    let h0h = opts.h0_h.unwrap_or(input.h0_h);
    let h0l = opts.h0_l.unwrap_or(input.h0_l);
    let h_h = leg_recursion(
        theta_h[0],
        theta_h[1],
        theta_h[2] / lambda,
        theta_h[3] / (1.0 - lambda),
        &input.rv,
        &input.ov,
        h0h,
    );
    let h_l = leg_recursion(
        theta_l[0],
        theta_l[1],
        theta_l[2] / lambda,
        theta_l[3] / (1.0 - lambda),
        &input.rv,
        &input.ov,
        h0l,
    );
    let h = h_h
        .iter()
        .zip(h_l.iter())
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect();
    Ok(VolSeries {
        rv: input.rv.clone(),
        ov: input.ov.clone(),
        h_h,
        h_l,
        h,
    })
}

/// Divisor placement for the aggregated-OGI recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AOgiDivisors {
    /// As displayed in the model-comparison section: RV divided by
    /// `1-lambda`, the squared overnight return by `lambda` (default).
    #[default]
    AsPrinted,
    /// The whole-day decomposition's convention: RV by `lambda`, overnight
    /// by `1-lambda`.
    Theorem1c,
}

/// Aggregated-OGI: a single whole-day recursion fit against RV + OV.
pub fn filter_a_ogi(
    params: &[f64; 4],
    input: &FilterInput,
    divisors: AOgiDivisors,
    h0: Option<f64>,
) -> Result<Vec<f64>> {
    check_nonempty(input)?;
    let lambda = input.lambda;
    let (d_rv, d_ov) = match divisors {
        AOgiDivisors::AsPrinted => (1.0 - lambda, lambda),
        AOgiDivisors::Theorem1c => (lambda, 1.0 - lambda),
    };
    let h0 = h0.unwrap_or(input.rv[0] + input.ov[0]);
    Ok(leg_recursion(
        params[0],
        params[1],
        params[2] / d_rv,
        params[3] / d_ov,
        &input.rv,
        &input.ov,
        h0,
    ))
}

/// Whole-day OGI recursion with leverage terms on both innovations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GjrOgiParams {
    pub omega: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Extra loading on the session innovation when the previous session
    /// return is below `c_h`.
    pub a: f64,
    /// Extra loading on the overnight innovation when the previous overnight
    /// return is below `c_l`.
    pub b: f64,
    pub c_h: f64,
    pub c_l: f64,
}

impl GjrOgiParams {
    /// Leverage extension of a reduced parameter set's whole-day aggregates.
    pub fn from_garch(
        theta_g: &GarchTheta,
        lambda: f64,
        convention: AggregationConvention,
        a: f64,
        b: f64,
        c_h: f64,
        c_l: f64,
    ) -> Self {
        let (omega, alpha, beta) = aggregate_garch(theta_g, lambda, convention);
        GjrOgiParams {
            omega,
            gamma: theta_g.gamma,
            alpha,
            beta,
            a,
            b,
            c_h,
            c_l,
        }
    }
}

/// GJR-OGI whole-day conditional volatility. Needs the signed session and
/// overnight return series in the input.
pub fn filter_gjr_ogi(params: &GjrOgiParams, input: &FilterInput, h0: Option<f64>) -> Result<Vec<f64>> {
    check_nonempty(input)?;
    let n = input.len();
    if input.session_returns.len() < n || input.overnight_returns.len() < n {
        return Err(OgiError::InvalidInput(
            "GJR-OGI needs signed session and overnight returns".into(),
        ));
    }
    let lambda = input.lambda;
    let h0 = h0.unwrap_or(lambda * input.h0_h + (1.0 - lambda) * input.h0_l);
    let mut h = Vec::with_capacity(n);
    h.push(h0);
    for i in 1..n {
        let lev_h = if input.session_returns[i - 1] < params.c_h { params.a } else { 0.0 };
        let lev_l = if input.overnight_returns[i - 1] < params.c_l { params.b } else { 0.0 };
        h.push(
            params.omega + params.gamma * h[i - 1]
                + (params.alpha + lev_h) / lambda * input.rv[i - 1]
                + (params.beta + lev_l) / (1.0 - lambda) * input.ov[i - 1],
        );
    }
    Ok(h)
}

/// Discrete GARCH(1,1) on squared open-to-open returns.
pub fn filter_garch11(params: &[f64; 3], input: &FilterInput, h0: Option<f64>) -> Result<Vec<f64>> {
    check_nonempty(input)?;
    let h0 = h0.unwrap_or_else(|| sample_variance(&input.oo_returns));
    Ok(leg_recursion(
        params[0],
        params[1],
        0.0,
        params[2],
        &input.oo_ret_sq, // unused slot
        &input.oo_ret_sq,
        h0,
    ))
}

/// GJR GARCH(1,1): adds `beta_minus` on squared returns after negative days.
pub fn filter_gjr11(params: &[f64; 4], input: &FilterInput, h0: Option<f64>) -> Result<Vec<f64>> {
    check_nonempty(input)?;
    let n = input.len();
    let h0 = h0.unwrap_or_else(|| sample_variance(&input.oo_returns));
    let mut h = Vec::with_capacity(n);
    h.push(h0);
    for i in 1..n {
        let lev = if input.oo_returns[i - 1] < 0.0 { params[3] } else { 0.0 };
        h.push(params[0] + params[1] * h[i - 1] + (params[2] + lev) * input.oo_ret_sq[i - 1]);
    }
    Ok(h)
}

/// Realized-GARCH output: the session-scale series plus the whole-day
/// adjustment factor `1 + mean(OV / RV)` (zero-RV days excluded).
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedGarchOutput {
    pub h: Vec<f64>,
    pub adjustment: f64,
    pub zero_rv_excluded: usize,
}

/// Realized GARCH on the RV series only.
pub fn filter_realized_garch(
    params: &[f64; 3],
    input: &FilterInput,
    h0: Option<f64>,
) -> Result<RealizedGarchOutput> {
    check_nonempty(input)?;
    let h0 = h0.unwrap_or(input.rv[0]);
    let h = leg_recursion(params[0], params[1], params[2], 0.0, &input.rv, &input.ov, h0);
    let (adjustment, zero_rv_excluded) = ov_rv_adjustment(&input.rv, &input.ov);
    Ok(RealizedGarchOutput {
        h,
        adjustment,
        zero_rv_excluded,
    })
}

/// `1 + mean(OV/RV)` with zero-RV days excluded; returns the exclusion count.
pub fn ov_rv_adjustment(rv: &[f64], ov: &[f64]) -> (f64, usize) {
    let mut acc = 0.0;
    let mut n = 0usize;
    let mut excluded = 0usize;
    for (r, o) in rv.iter().zip(ov.iter()) {
        if *r > 0.0 {
            acc += o / r;
            n += 1;
        } else {
            excluded += 1;
        }
    }
    let factor = if n > 0 { 1.0 + acc / n as f64 } else { 1.0 };
    (factor, excluded)
}

/// HAR lag windows (daily, weekly, monthly averages).
pub const HAR_LAGS: (usize, usize, usize) = (1, 5, 22);

/// HAR regression fit. `fitted` is aligned with the input series; the first
/// 22 entries fall back to the in-sample mean (no full lag window exists).
#[derive(Debug, Clone, PartialEq)]
pub struct HarFit {
    pub coef: [f64; 4],
    pub residual_variance: f64,
    pub fitted: Vec<f64>,
    /// One-step-ahead forecast of the modeled series (session RV scale).
    pub forecast: f64,
    pub floored: usize,
    pub log_space: bool,
    /// Whole-day scaling `1 + mean(OV/RV)` when overnight data is supplied.
    pub adjustment: f64,
}

fn har_design(series: &[f64]) -> (Vec<[f64; 4]>, Vec<f64>) {
    let (l1, l5, l22) = HAR_LAGS;
    let n = series.len();
    let mut rows = Vec::with_capacity(n - l22);
    let mut ys = Vec::with_capacity(n - l22);
    for t in l22..n {
        let m5: f64 = series[t - l5..t].iter().sum::<f64>() / l5 as f64;
        let m22: f64 = series[t - l22..t].iter().sum::<f64>() / l22 as f64;
        rows.push([1.0, series[t - l1], m5, m22]);
        ys.push(series[t]);
    }
    (rows, ys)
}

fn ols_min_norm(rows: &[[f64; 4]], ys: &[f64]) -> Result<[f64; 4]> {
    use nalgebra::{DMatrix, DVector};
    let x = DMatrix::from_fn(rows.len(), 4, |i, j| rows[i][j]);
    let y = DVector::from_column_slice(ys);
    let svd = x.svd(true, true);
    let sol = svd
        .solve(&y, 1e-12)
        .map_err(|e| OgiError::SingularDesign(e.to_string()))?;
    Ok([sol[0], sol[1], sol[2], sol[3]])
}

fn har_fit_inner(series: &[f64], rv: &[f64], ov: Option<&[f64]>, log_space: bool) -> Result<HarFit> {
    let (_, _, l22) = HAR_LAGS;
    let n = series.len();
    if n < l22 + 1 {
        return Err(OgiError::InvalidInput(format!(
            "HAR needs at least {} observations, got {n}",
            l22 + 1
        )));
    }
    let (rows, ys) = har_design(series);
    let coef = ols_min_norm(&rows, &ys)?;
    let predict = |row: &[f64; 4]| row.iter().zip(coef.iter()).map(|(a, b)| a * b).sum::<f64>();
    let nobs = ys.len();
    let rss: f64 = rows
        .iter()
        .zip(ys.iter())
        .map(|(r, y)| {
            let e = y - predict(r);
            e * e
        })
        .sum();
    let dof = (nobs as f64 - 4.0).max(1.0);
    let residual_variance = rss / dof;
    let bias = if log_space { (residual_variance / 2.0).exp() } else { 1.0 };

    let mut floored = 0usize;
    let fallback = crate::data::mean(rv);
    let mut fitted = Vec::with_capacity(n);
    for t in 0..n {
        let v = if t < l22 {
            fallback
        } else {
            let raw = predict(&rows[t - l22]);
            if log_space { raw.exp() * bias } else { raw }
        };
        if v < EPSILON_FLOOR {
            floored += 1;
            fitted.push(EPSILON_FLOOR);
        } else {
            fitted.push(v);
        }
    }

    // one-step-ahead forecast row
    let (l1, l5, _) = HAR_LAGS;
    let m5: f64 = series[n - l5..].iter().sum::<f64>() / l5 as f64;
    let m22: f64 = series[n - l22..].iter().sum::<f64>() / l22 as f64;
    let raw = predict(&[1.0, series[n - l1], m5, m22]);
    let mut forecast = if log_space { raw.exp() * bias } else { raw };
    if forecast < EPSILON_FLOOR {
        forecast = EPSILON_FLOOR;
        floored += 1;
    }

    let adjustment = ov.map(|o| ov_rv_adjustment(rv, o).0).unwrap_or(1.0);
    Ok(HarFit {
        coef,
        residual_variance,
        fitted,
        forecast,
        floored,
        log_space,
        adjustment,
    })
}

/// HAR regression of RV on its daily/weekly/monthly averages.
pub fn fit_har(rv: &[f64], ov: Option<&[f64]>) -> Result<HarFit> {
    har_fit_inner(rv, rv, ov, false)
}

/// HAR on log RV with the exp(residual variance / 2) bias correction applied
/// to level forecasts.
pub fn fit_log_har(rv: &[f64], ov: Option<&[f64]>) -> Result<HarFit> {
    if rv.iter().any(|v| *v <= 0.0) {
        return Err(OgiError::InvalidInput(
            "log-HAR needs strictly positive RV".into(),
        ));
    }
    let logs: Vec<f64> = rv.iter().map(|v| v.ln()).collect();
    har_fit_inner(&logs, rv, ov, true)
}
