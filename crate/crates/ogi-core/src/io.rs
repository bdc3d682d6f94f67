//! Bit-exact file formats and the typed run configuration.
//!
//! All CSV files are UTF-8 with LF line endings and shortest-round-trip
//! decimal formatting, so parse-then-serialize is the identity on valid
//! files. Times are absolute day fractions (day `d` spans `[d-1, d]`).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{DaySeries, MarketDay};
use crate::error::{OgiError, Result};
use crate::estimation::EstimationConfig;
use crate::filters::ModelKind;
use crate::prv::{PrvConfig, PrvOutput};
use crate::simulator::{JumpConfig, NoiseConfig, SimConfig, SimOutput};
use crate::theory::AggregationConvention;
use crate::types::{FullTheta, ParamBounds, SessionSpec};

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> OgiError {
    OgiError::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_f64(path: &Path, line: usize, field: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("bad {field} value '{raw}'")))
}

fn parse_usize(path: &Path, line: usize, field: &str, raw: &str) -> Result<usize> {
    raw.parse::<usize>()
        .map_err(|_| parse_err(path, line, format!("bad {field} value '{raw}'")))
}

// ---------------------------------------------------------------------------
// high-frequency ticks
// ---------------------------------------------------------------------------

pub const HIGHFREQ_HEADER: &str = "day_index,time,log_price";

pub fn write_highfreq_csv(path: &Path, series: &DaySeries) -> Result<()> {
    let mut out = String::with_capacity(series.days.len() * 64);
    out.push_str(HIGHFREQ_HEADER);
    out.push('\n');
    for day in &series.days {
        for (t, p) in day.tick_times.iter().zip(day.tick_logprices.iter()) {
            out.push_str(&format!("{},{},{}\n", day.day_index, t, p));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_highfreq_csv(path: &Path, lambda: f64) -> Result<DaySeries> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == HIGHFREQ_HEADER => {}
        other => {
            return Err(parse_err(
                path,
                1,
                format!("expected header '{HIGHFREQ_HEADER}', got {other:?}"),
            ))
        }
    }
    let mut days: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut last: Option<(usize, f64)> = None;
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (d, t, p) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(d), Some(t), Some(p), None) => (d, t, p),
            _ => return Err(parse_err(path, i + 1, "expected 3 fields")),
        };
        let d = parse_usize(path, i + 1, "day_index", d)?;
        let t = parse_f64(path, i + 1, "time", t)?;
        let p = parse_f64(path, i + 1, "log_price", p)?;
        if let Some((ld, lt)) = last {
            if d < ld || (d == ld && t <= lt) {
                return Err(parse_err(path, i + 1, "rows not sorted by (day_index, time)"));
            }
        }
        last = Some((d, t));
        let entry = days.entry(d).or_default();
        entry.0.push(t);
        entry.1.push(p);
    }
    let days: Vec<MarketDay> = days
        .into_iter()
        .map(|(day_index, (tick_times, tick_logprices))| MarketDay {
            day_index,
            open_logprice: tick_logprices[0],
            close_logprice: *tick_logprices.last().unwrap(),
            tick_times,
            tick_logprices,
        })
        .collect();
    DaySeries::new(days, lambda)
}

// ---------------------------------------------------------------------------
// daily open/close
// ---------------------------------------------------------------------------

pub const DAILY_HEADER: &str = "day_index,open_log_price,close_log_price";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyRow {
    pub day_index: usize,
    pub open_log_price: f64,
    pub close_log_price: f64,
}

pub fn write_daily_csv(path: &Path, series: &DaySeries) -> Result<()> {
    let mut out = String::new();
    out.push_str(DAILY_HEADER);
    out.push('\n');
    for day in &series.days {
        out.push_str(&format!(
            "{},{},{}\n",
            day.day_index, day.open_logprice, day.close_logprice
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_daily_csv(path: &Path) -> Result<Vec<DailyRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == DAILY_HEADER => {}
        other => {
            return Err(parse_err(
                path,
                1,
                format!("expected header '{DAILY_HEADER}', got {other:?}"),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(parse_err(path, i + 1, "expected 3 fields"));
        }
        let row = DailyRow {
            day_index: parse_usize(path, i + 1, "day_index", parts[0])?,
            open_log_price: parse_f64(path, i + 1, "open_log_price", parts[1])?,
            close_log_price: parse_f64(path, i + 1, "close_log_price", parts[2])?,
        };
        if let Some(prev) = rows.last() {
            let prev: &DailyRow = prev;
            if row.day_index != prev.day_index + 1 {
                return Err(parse_err(path, i + 1, "day_index not consecutive"));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 2, "no data rows"));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// per-day integrated variances (simulation truth)
// ---------------------------------------------------------------------------

pub const IV_HEADER: &str = "day_index,iv_session,iv_overnight";

pub fn write_iv_csv(path: &Path, sim: &SimOutput) -> Result<()> {
    let mut out = String::new();
    out.push_str(IV_HEADER);
    out.push('\n');
    for (i, (s, o)) in sim.iv_session.iter().zip(sim.iv_overnight.iter()).enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, s, o));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_iv_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == IV_HEADER => {}
        other => return Err(parse_err(path, 1, format!("expected '{IV_HEADER}', got {other:?}"))),
    }
    let mut s = Vec::new();
    let mut o = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(parse_err(path, i + 1, "expected 3 fields"));
        }
        s.push(parse_f64(path, i + 1, "iv_session", parts[1])?);
        o.push(parse_f64(path, i + 1, "iv_overnight", parts[2])?);
    }
    Ok((s, o))
}

// ---------------------------------------------------------------------------
// realized volatility
// ---------------------------------------------------------------------------

pub const RV_HEADER: &str = "day_index,rv,truncated_windows,m_d";

pub fn write_rv_csv(path: &Path, rows: &[PrvOutput]) -> Result<()> {
    let mut out = String::new();
    out.push_str(RV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.day_index, r.rv, r.truncated_windows, r.m
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RvRow {
    pub day_index: usize,
    pub rv: f64,
    pub truncated_windows: usize,
    pub m: usize,
}

pub fn read_rv_csv(path: &Path) -> Result<Vec<RvRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == RV_HEADER => {}
        other => return Err(parse_err(path, 1, format!("expected '{RV_HEADER}', got {other:?}"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(parse_err(path, i + 1, "expected 4 fields"));
        }
        rows.push(RvRow {
            day_index: parse_usize(path, i + 1, "day_index", parts[0])?,
            rv: parse_f64(path, i + 1, "rv", parts[1])?,
            truncated_windows: parse_usize(path, i + 1, "truncated_windows", parts[2])?,
            m: parse_usize(path, i + 1, "m_d", parts[3])?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// run configuration
// ---------------------------------------------------------------------------

fn default_lambda() -> f64 {
    SessionSpec::default().lambda
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionCfg {
    pub lambda: f64,
}

impl Default for SessionCfg {
    fn default() -> Self {
        SessionCfg { lambda: default_lambda() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrvCfgFile {
    /// 0 selects the per-day default `floor(sqrt(m))`.
    pub k: usize,
    pub ctau_multiplier: f64,
    pub exponent: f64,
    pub epsilon_floor: f64,
    pub pooled_ctau: bool,
}

impl Default for PrvCfgFile {
    fn default() -> Self {
        let d = PrvConfig::default();
        PrvCfgFile {
            k: 0,
            ctau_multiplier: d.ctau_multiplier,
            exponent: d.truncation_exponent,
            epsilon_floor: d.epsilon_floor,
            pooled_ctau: d.pooled_ctau,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitCfgFile {
    pub model: String,
    pub seed: u64,
    pub min_days: usize,
    pub multi_starts: usize,
    pub max_evals: usize,
    pub f_tol: f64,
    pub x_tol: f64,
    /// "a1c" or "main-text".
    pub aggregation: String,
    pub bounds: ParamBounds,
}

impl Default for FitCfgFile {
    fn default() -> Self {
        let e = EstimationConfig::default();
        FitCfgFile {
            model: "ogi".into(),
            seed: 0,
            min_days: e.min_days,
            multi_starts: e.multi_starts,
            max_evals: e.optimizer.max_evals,
            f_tol: e.optimizer.f_tol,
            x_tol: e.optimizer.x_tol,
            aggregation: "a1c".into(),
            bounds: ParamBounds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BacktestCfgFile {
    pub window: usize,
    pub q0: Vec<f64>,
    pub xi: Vec<f64>,
    pub refit_stride: usize,
    pub baseline: String,
    pub var_min_obs: usize,
}

impl Default for BacktestCfgFile {
    fn default() -> Self {
        BacktestCfgFile {
            window: 500,
            q0: vec![0.01, 0.02, 0.05, 0.1, 0.2],
            xi: vec![2.5, 5.0],
            refit_stride: 1,
            baseline: "ogi".into(),
            var_min_obs: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimCfgFile {
    pub n_days: usize,
    pub m_all: usize,
    pub m_obs: usize,
    pub burn_in_days: usize,
    pub seed: u64,
    pub jump_size: f64,
    pub jump_intensity: f64,
    pub noise_scale: f64,
    pub store_paths: bool,
    pub theta: FullTheta,
}

impl Default for SimCfgFile {
    fn default() -> Self {
        let d = SimConfig::default();
        SimCfgFile {
            n_days: d.n_days,
            m_all: d.m_all,
            m_obs: d.m_obs,
            burn_in_days: d.burn_in_days,
            seed: d.seed,
            jump_size: d.jump.jump_size,
            jump_intensity: d.jump.intensity_per_session,
            noise_scale: d.noise.rel_scale,
            store_paths: false,
            theta: FullTheta::simulation_default(),
        }
    }
}

/// The full typed run configuration. Unknown keys are rejected at parse time;
/// every run embeds the resolved configuration in its manifest.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub session: SessionCfg,
    pub prv: PrvCfgFile,
    pub fit: FitCfgFile,
    pub backtest: BacktestCfgFile,
    pub sim: SimCfgFile,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| OgiError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn lambda(&self) -> f64 {
        self.session.lambda
    }

    pub fn aggregation(&self) -> Result<AggregationConvention> {
        match self.fit.aggregation.as_str() {
            "a1c" => Ok(AggregationConvention::TheoremA1c),
            "main-text" => Ok(AggregationConvention::MainText),
            other => Err(OgiError::Config(format!(
                "fit.aggregation must be 'a1c' or 'main-text', got '{other}'"
            ))),
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        Ok(SimConfig {
            theta: self.sim.theta,
            session: SessionSpec::new(self.session.lambda)?,
            n_days: self.sim.n_days,
            m_all: self.sim.m_all,
            m_obs: self.sim.m_obs,
            jump: JumpConfig {
                jump_size: self.sim.jump_size,
                intensity_per_session: self.sim.jump_intensity,
            },
            noise: NoiseConfig {
                rel_scale: self.sim.noise_scale,
            },
            burn_in_days: self.sim.burn_in_days,
            seed: self.sim.seed,
            store_paths: self.sim.store_paths,
        })
    }

    pub fn prv_config(&self) -> PrvConfig {
        PrvConfig {
            bandwidth: if self.prv.k == 0 { None } else { Some(self.prv.k) },
            ctau_multiplier: self.prv.ctau_multiplier,
            truncation_exponent: self.prv.exponent,
            epsilon_floor: self.prv.epsilon_floor,
            pooled_ctau: self.prv.pooled_ctau,
            ..PrvConfig::default()
        }
    }

    pub fn estimation_config(&self) -> Result<EstimationConfig> {
        Ok(EstimationConfig {
            bounds: self.fit.bounds,
            optimizer: crate::estimation::optimizer::OptimizerConfig {
                max_evals: self.fit.max_evals,
                f_tol: self.fit.f_tol,
                x_tol: self.fit.x_tol,
                ..Default::default()
            },
            multi_starts: self.fit.multi_starts,
            seed: self.fit.seed,
            min_days: self.fit.min_days,
            aggregation: self.aggregation()?,
            ..Default::default()
        })
    }

    pub fn model(&self) -> Result<ModelKind> {
        ModelKind::parse(&self.fit.model)
    }
}

/// Run manifest: the reproducibility record placed next to every output tree.
/// The timestamp is the only non-deterministic field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config_sha256: String,
    pub timestamp_unix: u64,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(seed: u64, config: &RunConfig) -> Self {
        let resolved = config.to_toml_string();
        let mut hasher = Sha256::new();
        hasher.update(resolved.as_bytes());
        let config_sha256 = format!("{:x}", hasher.finalize());
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Manifest {
            seed,
            config_sha256,
            timestamp_unix,
            config: config.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        file.write_all(b"\n")?;
        Ok(())
    }
}
