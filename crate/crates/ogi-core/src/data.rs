//! Market-data containers: one day of ticks, day series, and the aligned
//! inputs consumed by the volatility filters.
//!
//! Time is measured in day fractions: day `d` (1-based) spans `[d-1, d]`,
//! its trading session `[d-1, d-1+lambda]`. The squared overnight return of
//! day `d` is `(X_d - X_{lambda+d-1})^2`, which needs day `d+1`'s open, so a
//! series of `n` raw days yields `n-1` estimation days.

use serde::{Deserialize, Serialize};

use crate::error::{OgiError, Result};

/// One day's high-frequency record. `tick_times`/`tick_logprices` include the
/// boundary points: the first tick is the exact open, the last the exact
/// close; interior ticks are noisy. The number of increments
/// `tick_count() - 1` plays the role of `m_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketDay {
    pub day_index: usize,
    pub tick_times: Vec<f64>,
    pub tick_logprices: Vec<f64>,
    pub open_logprice: f64,
    pub close_logprice: f64,
}

impl MarketDay {
    pub fn validate(&self, lambda: f64) -> Result<()> {
        if self.day_index < 1 {
            return Err(OgiError::InvalidInput("day_index must be >= 1".into()));
        }
        if self.tick_times.len() != self.tick_logprices.len() {
            return Err(OgiError::InvalidInput(format!(
                "day {}: {} times vs {} prices",
                self.day_index,
                self.tick_times.len(),
                self.tick_logprices.len()
            )));
        }
        if self.tick_times.len() < 2 {
            return Err(OgiError::InvalidInput(format!(
                "day {}: needs at least 2 ticks",
                self.day_index
            )));
        }
        if !self.tick_times.windows(2).all(|w| w[0] < w[1]) {
            return Err(OgiError::InvalidInput(format!(
                "day {}: tick times not strictly increasing",
                self.day_index
            )));
        }
        let open_t = (self.day_index - 1) as f64;
        let close_t = open_t + lambda;
        let first = self.tick_times[0];
        let last = *self.tick_times.last().unwrap();
        if (first - open_t).abs() > 1e-9 || (last - close_t).abs() > 1e-9 {
            return Err(OgiError::InvalidInput(format!(
                "day {}: ticks span [{first}, {last}], expected [{open_t}, {close_t}]",
                self.day_index
            )));
        }
        Ok(())
    }

    /// Number of tick increments (the paper's per-day observation count).
    pub fn increment_count(&self) -> usize {
        self.tick_logprices.len().saturating_sub(1)
    }
}

/// Ordered days plus the derived daily return series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaySeries {
    pub days: Vec<MarketDay>,
}

impl DaySeries {
    pub fn new(days: Vec<MarketDay>, lambda: f64) -> Result<Self> {
        if days.is_empty() {
            return Err(OgiError::InvalidInput("empty day series".into()));
        }
        for (i, d) in days.iter().enumerate() {
            d.validate(lambda)?;
            if d.day_index != days[0].day_index + i {
                return Err(OgiError::InvalidInput(format!(
                    "day indices not consecutive at position {i}"
                )));
            }
        }
        Ok(DaySeries { days })
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Number of usable estimation days (`len() - 1`): the last day has no
    /// following open, hence no overnight return.
    pub fn n_estimation_days(&self) -> usize {
        self.len().saturating_sub(1)
    }

    /// Signed overnight return of day `d`: next open minus this close.
    pub fn overnight_returns(&self) -> Vec<f64> {
        self.days
            .windows(2)
            .map(|w| w[1].open_logprice - w[0].close_logprice)
            .collect()
    }

    pub fn overnight_return_sq(&self) -> Vec<f64> {
        self.overnight_returns().iter().map(|r| r * r).collect()
    }

    /// Signed open-to-close (session) return of day `d`.
    pub fn session_returns(&self) -> Vec<f64> {
        self.days
            .iter()
            .map(|d| d.close_logprice - d.open_logprice)
            .collect()
    }

    /// Signed open-to-open return over day `d` (session plus overnight).
    pub fn open_to_open_returns(&self) -> Vec<f64> {
        self.days
            .windows(2)
            .map(|w| w[1].open_logprice - w[0].open_logprice)
            .collect()
    }

    pub fn intraday_return_sq(&self) -> Vec<f64> {
        self.session_returns().iter().map(|r| r * r).collect()
    }
}

/// Aligned per-day series of volatility proxies and filtered conditional
/// volatilities, all in variance units.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VolSeries {
    pub rv: Vec<f64>,
    pub ov: Vec<f64>,
    pub h_h: Vec<f64>,
    pub h_l: Vec<f64>,
    pub h: Vec<f64>,
}

/// Inputs shared by the volatility filters: the realized-volatility series,
/// squared overnight returns, and the return series needed by the
/// return-driven competitor models. All series are aligned on estimation
/// days.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterInput {
    pub rv: Vec<f64>,
    pub ov: Vec<f64>,
    pub oo_ret_sq: Vec<f64>,
    /// Signed open-to-open returns (for GJR).
    pub oo_returns: Vec<f64>,
    /// Signed session returns (for GJR-OGI leverage indicators).
    pub session_returns: Vec<f64>,
    /// Signed overnight returns (for GJR-OGI leverage indicators).
    pub overnight_returns: Vec<f64>,
    pub lambda: f64,
    /// Initial value for the session leg; defaults to `rv[0]`.
    pub h0_h: f64,
    /// Initial value for the overnight leg; defaults to the sample variance
    /// of the overnight returns.
    pub h0_l: f64,
}

impl FilterInput {
    /// Builds aligned estimation-day series from `rv` (one value per raw day,
    /// the last raw day's value feeding forecasts) and a [`DaySeries`].
    pub fn new(rv_per_day: &[f64], series: &DaySeries, lambda: f64) -> Result<Self> {
        let n = series.n_estimation_days();
        if n == 0 {
            return Err(OgiError::InvalidInput(
                "need at least 2 raw days for one estimation day".into(),
            ));
        }
        if rv_per_day.len() < n {
            return Err(OgiError::InvalidInput(format!(
                "rv series has {} days, need at least {n}",
                rv_per_day.len()
            )));
        }
        let rv = rv_per_day[..n].to_vec();
        let ov = series.overnight_return_sq();
        let oo_returns = series.open_to_open_returns();
        let session_returns = series.session_returns()[..n].to_vec();
        let overnight_returns = series.overnight_returns();
        Self::from_series(rv, ov, oo_returns, session_returns, overnight_returns, lambda)
    }

    /// Builds the input from pre-computed series (used by simulations where
    /// the true integrated volatilities stand in for RV).
    pub fn from_series(
        rv: Vec<f64>,
        ov: Vec<f64>,
        oo_returns: Vec<f64>,
        session_returns: Vec<f64>,
        overnight_returns: Vec<f64>,
        lambda: f64,
    ) -> Result<Self> {
        let n = rv.len();
        if n == 0 {
            return Err(OgiError::InvalidInput("empty filter input".into()));
        }
        for (name, s) in [("ov", &ov), ("oo_returns", &oo_returns)] {
            if s.len() != n {
                return Err(OgiError::InvalidInput(format!(
                    "{name} length {} != rv length {n}",
                    s.len()
                )));
            }
        }
        if rv.iter().any(|v| *v < 0.0) || ov.iter().any(|v| *v < 0.0) {
            return Err(OgiError::InvalidInput(
                "rv and ov must be nonnegative".into(),
            ));
        }
        let oo_ret_sq = oo_returns.iter().map(|r| r * r).collect();
        let h0_h = rv[0];
        let h0_l = sample_variance(&overnight_returns);
        Ok(FilterInput {
            rv,
            ov,
            oo_ret_sq,
            oo_returns,
            session_returns,
            overnight_returns,
            lambda,
            h0_h,
            h0_l,
        })
    }

    pub fn len(&self) -> usize {
        self.rv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rv.is_empty()
    }
}

/// Unbiased sample variance; 0 for fewer than two points.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(idx: usize, lambda: f64, base: f64) -> MarketDay {
        let open = (idx - 1) as f64;
        MarketDay {
            day_index: idx,
            tick_times: vec![open, open + lambda / 2.0, open + lambda],
            tick_logprices: vec![base, base + 0.01, base + 0.02],
            open_logprice: base,
            close_logprice: base + 0.02,
        }
    }

    #[test]
    fn derived_returns_line_up() {
        let lambda = 0.25;
        let series = DaySeries::new(vec![day(1, lambda, 0.0), day(2, lambda, 0.05)], lambda).unwrap();
        assert_eq!(series.n_estimation_days(), 1);
        let ov = series.overnight_return_sq();
        // next open 0.05 minus close 0.02
        assert!((ov[0] - 0.03f64.powi(2)).abs() < 1e-15);
        let oo = series.open_to_open_returns();
        assert!((oo[0] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn non_consecutive_days_rejected() {
        let lambda = 0.25;
        let mut d2 = day(3, lambda, 0.05);
        d2.day_index = 3;
        assert!(DaySeries::new(vec![day(1, lambda, 0.0), d2], lambda).is_err());
    }

    #[test]
    fn unsorted_ticks_rejected() {
        let lambda = 0.25;
        let mut d = day(1, lambda, 0.0);
        d.tick_times = vec![0.0, 0.2, 0.1];
        assert!(d.validate(lambda).is_err());
    }
}
