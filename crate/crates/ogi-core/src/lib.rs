//! Whole-day volatility modeling around an overnight GARCH-Ito price process.
//!
//! The crate covers the full workflow:
//!
//! - [`simulator`]: sample paths of the two-regime (trading session /
//!   overnight) spot-variance process, plus noisy tick observations;
//! - [`prv`]: jump-robust pre-averaging realized volatility from one day of
//!   noisy ticks;
//! - [`filters`]: conditional-volatility recursions for the OGI model and
//!   every competitor model used in the comparisons (S-OGI, A-OGI, GJR-OGI,
//!   GARCH(1,1), GJR, realized GARCH, HAR, log-HAR);
//! - [`estimation`]: two-step weighted least squares with sandwich covariance
//!   and Z-statistics;
//! - [`theory`]: closed-form structural quantities (the structural-to-GARCH
//!   parameter map, innovation variances, multi-step forecasts);
//! - [`evaluation`]: forecast metrics (MSPE/QLIKE/DM) and VaR backtesting
//!   (LRuc/LRcc/DQ), mean-variance utility, residual persistence;
//! - [`io`] and [`driver`]: file formats, run configuration, and the rolling
//!   backtest driver behind the command-line tools.

pub mod data;
pub mod driver;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod filters;
pub mod io;
pub mod prv;
pub mod rng;
pub mod simulator;
pub mod theory;
pub mod types;

pub use data::{DaySeries, FilterInput, MarketDay, VolSeries};
pub use error::{OgiError, Result};
pub use types::{FullTheta, GarchTheta, ParamBounds, SessionSpec, ValidationReport};
