//! Forecast evaluation and risk backtesting: MSPE/QLIKE losses, the
//! Diebold-Mariano comparison, historical-quantile VaR with coverage tests
//! (unconditional, conditional, dynamic quantile), mean-variance utility
//! metrics, and the residual-persistence regression.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{OgiError, Result};

fn check_aligned(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(OgiError::InvalidInput(format!(
            "series must be aligned and nonempty ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Mean squared prediction error against the realized whole-day variation.
pub fn mspe(vol: &[f64], realized: &[f64]) -> Result<f64> {
    check_aligned(vol, realized)?;
    Ok(vol
        .iter()
        .zip(realized.iter())
        .map(|(v, r)| (v - r) * (v - r))
        .sum::<f64>()
        / vol.len() as f64)
}

/// QLIKE loss: mean of `log v + r / v`; per-term minimized at `v = r`.
pub fn qlike(vol: &[f64], realized: &[f64]) -> Result<f64> {
    check_aligned(vol, realized)?;
    if vol.iter().any(|v| *v <= 0.0) {
        return Err(OgiError::InvalidInput("QLIKE needs positive forecasts".into()));
    }
    Ok(vol
        .iter()
        .zip(realized.iter())
        .map(|(v, r)| v.ln() + r / v)
        .sum::<f64>()
        / vol.len() as f64)
}

/// Diebold-Mariano comparison of two loss series: mean differential over its
/// HAC standard error (Bartlett kernel), with the two-sided normal p-value.
/// `hac_lag = None` uses `floor(n^{1/3})`.
pub fn dm_test(loss_a: &[f64], loss_b: &[f64], hac_lag: Option<usize>) -> Result<(f64, f64)> {
    check_aligned(loss_a, loss_b)?;
    let n = loss_a.len();
    if n < 10 {
        return Err(OgiError::InvalidInput("DM test needs at least 10 points".into()));
    }
    let d: Vec<f64> = loss_a.iter().zip(loss_b.iter()).map(|(a, b)| a - b).collect();
    let dbar = crate::data::mean(&d);
    let lag = hac_lag.unwrap_or_else(|| (n as f64).powf(1.0 / 3.0).floor() as usize);
    let gamma = |k: usize| -> f64 {
        d.iter()
            .skip(k)
            .zip(d.iter())
            .map(|(a, b)| (a - dbar) * (b - dbar))
            .sum::<f64>()
            / n as f64
    };
    let mut var = gamma(0);
    for k in 1..=lag.min(n - 1) {
        var += 2.0 * (1.0 - k as f64 / (lag as f64 + 1.0)) * gamma(k);
    }
    if !(var > 0.0) {
        return Err(OgiError::UndefinedStatistic(format!(
            "loss differential has nonpositive HAC variance {var} (identical losses?)"
        )));
    }
    let stat = dbar / (var / n as f64).sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    Ok((stat, 2.0 * (1.0 - normal.cdf(stat.abs()))))
}

/// Linear-interpolation empirical quantile (order-statistic type 7).
/// The input need not be sorted.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(OgiError::InvalidInput("empty quantile input".into()));
    }
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let h = (s.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < s.len() {
        Ok(s[lo] + frac * (s[lo + 1] - s[lo]))
    } else {
        Ok(s[lo])
    }
}

/// One-day-ahead VaR: the `q0`-quantile of in-sample returns standardized by
/// the square root of their fitted conditional variances, rescaled by the
/// volatility forecast.
pub fn var_forecast(
    in_sample_returns: &[f64],
    in_sample_fitted_vol: &[f64],
    out_vol_forecast: f64,
    q0: f64,
    min_obs: usize,
) -> Result<f64> {
    check_aligned(in_sample_returns, in_sample_fitted_vol)?;
    if !(q0 > 0.0 && q0 <= 0.5) {
        return Err(OgiError::InvalidInput(format!("q0 = {q0} outside (0, 0.5]")));
    }
    if in_sample_returns.len() < min_obs {
        return Err(OgiError::InvalidInput(format!(
            "VaR needs at least {min_obs} in-sample days, got {}",
            in_sample_returns.len()
        )));
    }
    if in_sample_fitted_vol.iter().any(|v| *v <= 0.0) || !(out_vol_forecast > 0.0) {
        return Err(OgiError::InvalidInput("VaR needs positive variances".into()));
    }
    let standardized: Vec<f64> = in_sample_returns
        .iter()
        .zip(in_sample_fitted_vol.iter())
        .map(|(r, v)| r / v.sqrt())
        .collect();
    let q = empirical_quantile(&standardized, q0)?;
    Ok(q * out_vol_forecast.sqrt())
}

/// Hit sequence: 1 when the return breaches the (negative) VaR.
pub fn hits(returns: &[f64], var_series: &[f64]) -> Vec<u8> {
    returns
        .iter()
        .zip(var_series.iter())
        .map(|(r, v)| u8::from(r < v))
        .collect()
}

/// Coverage-test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageTest {
    pub statistic: f64,
    pub p_value: f64,
    /// Set when the all-hit / no-hit continuity correction (x +- 0.5) was
    /// applied.
    pub corrected: bool,
}

fn chi2_p(stat: f64, dof: f64) -> f64 {
    let chi = ChiSquared::new(dof).expect("chi-squared dof");
    (1.0 - chi.cdf(stat.max(0.0))).clamp(0.0, 1.0)
}

fn validate_hits(hit_seq: &[u8], q0: f64) -> Result<()> {
    if hit_seq.len() < 50 {
        return Err(OgiError::InvalidInput(format!(
            "coverage tests need >= 50 hits, got {}",
            hit_seq.len()
        )));
    }
    if !(q0 > 0.0 && q0 < 1.0) {
        return Err(OgiError::InvalidInput(format!("q0 = {q0} outside (0, 1)")));
    }
    if hit_seq.iter().any(|h| *h > 1) {
        return Err(OgiError::InvalidInput("hits must be 0/1".into()));
    }
    Ok(())
}

/// Unconditional-coverage likelihood ratio (chi-squared, 1 dof).
pub fn lruc(hit_seq: &[u8], q0: f64) -> Result<CoverageTest> {
    validate_hits(hit_seq, q0)?;
    let n = hit_seq.len() as f64;
    let x_raw = hit_seq.iter().map(|h| *h as f64).sum::<f64>();
    let corrected = x_raw == 0.0 || x_raw == n;
    let x = if x_raw == 0.0 {
        0.5
    } else if x_raw == n {
        n - 0.5
    } else {
        x_raw
    };
    let pi = x / n;
    let ll = |p: f64| (n - x) * (1.0 - p).ln() + x * p.ln();
    let stat = (-2.0 * (ll(q0) - ll(pi))).max(0.0);
    Ok(CoverageTest {
        statistic: stat,
        p_value: chi2_p(stat, 1.0),
        corrected,
    })
}

/// First-order Markov independence likelihood ratio.
pub fn lrind(hit_seq: &[u8]) -> Result<CoverageTest> {
    if hit_seq.len() < 2 {
        return Err(OgiError::InvalidInput("need >= 2 hits for transitions".into()));
    }
    let mut n = [[0.0f64; 2]; 2];
    for w in hit_seq.windows(2) {
        n[w[0] as usize][w[1] as usize] += 1.0;
    }
    let (n00, n01, n10, n11) = (n[0][0], n[0][1], n[1][0], n[1][1]);
    let total = n00 + n01 + n10 + n11;
    let term = |k: f64, p: f64| if k == 0.0 { 0.0 } else { k * p.ln() };
    let pi = (n01 + n11) / total;
    let l0 = term(n00 + n10, 1.0 - pi) + term(n01 + n11, pi);
    let pi01 = if n00 + n01 > 0.0 { n01 / (n00 + n01) } else { 0.0 };
    let pi11 = if n10 + n11 > 0.0 { n11 / (n10 + n11) } else { 0.0 };
    let l1 = term(n00, 1.0 - pi01) + term(n01, pi01) + term(n10, 1.0 - pi11) + term(n11, pi11);
    let stat = (-2.0 * (l0 - l1)).max(0.0);
    Ok(CoverageTest {
        statistic: stat,
        p_value: chi2_p(stat, 1.0),
        corrected: false,
    })
}

/// Conditional coverage: the exact decomposition `LRcc = LRuc + LRind`
/// (chi-squared, 2 dof).
pub fn lrcc(hit_seq: &[u8], q0: f64) -> Result<CoverageTest> {
    let uc = lruc(hit_seq, q0)?;
    let ind = lrind(hit_seq)?;
    let stat = uc.statistic + ind.statistic;
    Ok(CoverageTest {
        statistic: stat,
        p_value: chi2_p(stat, 2.0),
        corrected: uc.corrected,
    })
}

/// Dynamic-quantile test: centered hits regressed on an intercept, `lags`
/// lagged centered hits, and the contemporaneous VaR level; the statistic is
/// `beta' X'X beta / (q0 (1 - q0))`, chi-squared with `lags + 2` dof.
pub fn dq_test(hit_seq: &[u8], q0: f64, var_series: &[f64], lags: usize) -> Result<CoverageTest> {
    validate_hits(hit_seq, q0)?;
    if var_series.len() != hit_seq.len() {
        return Err(OgiError::InvalidInput("VaR series must align with hits".into()));
    }
    let n = hit_seq.len();
    if n <= lags + 2 {
        return Err(OgiError::InvalidInput("too few observations for DQ".into()));
    }
    let centered: Vec<f64> = hit_seq.iter().map(|h| *h as f64 - q0).collect();
    let k = lags + 2;
    let rows = n - lags;
    let mut x = DMatrix::zeros(rows, k);
    let mut y = DVector::zeros(rows);
    for t in lags..n {
        let r = t - lags;
        x[(r, 0)] = 1.0;
        for j in 1..=lags {
            x[(r, j)] = centered[t - j];
        }
        x[(r, k - 1)] = var_series[t];
        y[r] = centered[t];
    }
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * y;
    let beta = xtx
        .clone()
        .lu()
        .solve(&xty)
        .ok_or_else(|| OgiError::SingularDesign("DQ regressor matrix is singular".into()))?;
    let stat = (beta.transpose() * xtx * &beta)[(0, 0)] / (q0 * (1.0 - q0));
    Ok(CoverageTest {
        statistic: stat.max(0.0),
        p_value: chi2_p(stat, k as f64),
        corrected: false,
    })
}

/// Mean-variance allocation `(1/xi) E[R]/Var[R]`, clipped to [0, 1].
pub fn mv_allocation(expected_return: f64, var_forecast: f64, xi: f64) -> Result<f64> {
    if !(var_forecast > 0.0) || !(xi > 0.0) {
        return Err(OgiError::InvalidInput(
            "allocation needs positive variance and risk aversion".into(),
        ));
    }
    Ok((expected_return / (xi * var_forecast)).clamp(0.0, 1.0))
}

/// Sharpe ratio of realized returns (sample standard deviation).
pub fn sharpe(returns: &[f64]) -> Result<f64> {
    if returns.len() < 2 {
        return Err(OgiError::InvalidInput("Sharpe needs >= 2 returns".into()));
    }
    let sd = crate::data::sample_variance(returns).sqrt();
    if !(sd > 0.0) {
        return Err(OgiError::UndefinedStatistic("zero return dispersion".into()));
    }
    Ok(crate::data::mean(returns) / sd)
}

/// Realized mean-variance utility `mean - (xi/2) sd^2`.
pub fn expected_utility(returns: &[f64], xi: f64) -> Result<f64> {
    if returns.len() < 2 {
        return Err(OgiError::InvalidInput("utility needs >= 2 returns".into()));
    }
    Ok(crate::data::mean(returns) - 0.5 * xi * crate::data::sample_variance(returns))
}

/// Residual-persistence output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceResult {
    pub intercept: f64,
    pub slope: f64,
    /// Residual autocorrelations at lags 1..=30.
    pub acf: Vec<f64>,
    pub lag1: f64,
    pub max_abs: f64,
}

/// OLS of the realized whole-day variation on a volatility forecast, with the
/// residual autocorrelation function over lags 1..=30.
pub fn persistence_regression(realized: &[f64], vol: &[f64]) -> Result<PersistenceResult> {
    check_aligned(realized, vol)?;
    let n = realized.len();
    if n < 60 {
        return Err(OgiError::InvalidInput(format!(
            "persistence regression needs >= 60 days, got {n}"
        )));
    }
    let mx = crate::data::mean(vol);
    let my = crate::data::mean(realized);
    let sxx: f64 = vol.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return Err(OgiError::SingularDesign("constant volatility series".into()));
    }
    let sxy: f64 = vol
        .iter()
        .zip(realized.iter())
        .map(|(v, r)| (v - mx) * (r - my))
        .sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid: Vec<f64> = realized
        .iter()
        .zip(vol.iter())
        .map(|(r, v)| r - intercept - slope * v)
        .collect();
    let denom: f64 = resid.iter().map(|e| e * e).sum();
    // an exact linear relation leaves only rounding noise; report zero ACF
    // rather than the autocorrelation of that noise
    let scale: f64 = realized.iter().map(|r| (r - my) * (r - my)).sum();
    let degenerate = denom <= 1e-24 * scale.max(f64::MIN_POSITIVE);
    let mut acf = Vec::with_capacity(30);
    for k in 1..=30usize {
        let num: f64 = resid.iter().skip(k).zip(resid.iter()).map(|(a, b)| a * b).sum();
        acf.push(if !degenerate && denom > 0.0 { num / denom } else { 0.0 });
    }
    let lag1 = acf[0];
    let max_abs = acf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(PersistenceResult {
        intercept,
        slope,
        acf,
        lag1,
        max_abs,
    })
}

/// Kolmogorov-Smirnov statistic and asymptotic p-value against the standard
/// normal (finite-sample corrected).
pub fn ks_test_standard_normal(sample: &[f64]) -> Result<(f64, f64)> {
    if sample.len() < 5 {
        return Err(OgiError::InvalidInput("KS needs >= 5 points".into()));
    }
    let mut s = sample.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = s.len() as f64;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut d: f64 = 0.0;
    for (i, x) in s.iter().enumerate() {
        let f = normal.cdf(*x);
        d = d.max((f - i as f64 / n).abs()).max((f - (i as f64 + 1.0) / n).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
    }
    Ok((d, p.clamp(0.0, 1.0)))
}
