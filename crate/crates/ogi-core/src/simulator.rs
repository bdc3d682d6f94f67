//! Sample paths of the overnight GARCH-Ito process.
//!
//! Each day is split into a trading session `[d-1, d-1+lambda]` and an
//! overnight segment `[d-1+lambda, d]`. The spot variance follows an explicit
//! piecewise formula in each segment, driven by the price Brownian motion `B`
//! (through squared overnight returns), an independent volatility driver `W`,
//! a within-segment running integral of the spot variance, and two
//! exponentially weighted accumulators of past innovations that are updated
//! once per day. The log-price adds compound-Poisson jumps during sessions
//! only (zero drift).

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{DaySeries, MarketDay};
use crate::error::{OgiError, Result};
use crate::rng::derive_rng;
use crate::theory::RhoCoefficients;
use crate::types::{validate_full_theta, FullTheta, SessionSpec};

/// Session jump configuration: `intensity_per_session` is the Poisson mean of
/// the per-session jump count, `jump_size` the absolute log-price jump, with
/// fair-coin signs. Jumps never occur overnight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpConfig {
    pub jump_size: f64,
    pub intensity_per_session: f64,
}

impl Default for JumpConfig {
    fn default() -> Self {
        JumpConfig {
            jump_size: 0.05,
            intensity_per_session: 10.0,
        }
    }
}

impl JumpConfig {
    pub fn none() -> Self {
        JumpConfig {
            jump_size: 0.0,
            intensity_per_session: 0.0,
        }
    }
}

/// Additive microstructure noise on interior ticks: i.i.d. Gaussian with
/// standard deviation `rel_scale * sqrt(whole-day integrated variance)`.
/// Open and close prices are observed without noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub rel_scale: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { rel_scale: 0.01 }
    }
}

/// Simulation configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub theta: FullTheta,
    pub session: SessionSpec,
    pub n_days: usize,
    /// Grid points per day.
    pub m_all: usize,
    /// Observed ticks per session (number of tick increments). 0 disables
    /// interior ticks; the emitted days then carry only the exact open and
    /// close.
    pub m_obs: usize,
    pub jump: JumpConfig,
    pub noise: NoiseConfig,
    pub burn_in_days: usize,
    pub seed: u64,
    /// Keep the full-grid log-price and spot-variance paths in the output.
    pub store_paths: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            theta: FullTheta::simulation_default(),
            session: SessionSpec::default(),
            n_days: 100,
            m_all: 43_200,
            m_obs: 390,
            jump: JumpConfig::default(),
            noise: NoiseConfig::default(),
            burn_in_days: 50,
            seed: 0,
            store_paths: false,
        }
    }
}

impl SimConfig {
    /// Session steps on the day grid; errors unless `lambda * m_all` is an
    /// integer and `m_obs` divides it.
    pub fn session_steps(&self) -> Result<usize> {
        let exact = self.session.lambda * self.m_all as f64;
        let steps = exact.round();
        if (exact - steps).abs() > 1e-9 || steps < 1.0 {
            return Err(OgiError::InvalidParams(format!(
                "lambda * m_all = {exact} is not a positive integer; choose a compatible grid"
            )));
        }
        let steps = steps as usize;
        if self.m_obs > steps {
            return Err(OgiError::InvalidParams(format!(
                "m_obs = {} exceeds the session grid ({steps} steps)",
                self.m_obs
            )));
        }
        if self.m_obs > 0 && steps % self.m_obs != 0 {
            return Err(OgiError::InvalidParams(format!(
                "m_obs = {} does not divide the session grid ({steps} steps)",
                self.m_obs
            )));
        }
        Ok(steps)
    }

    pub fn validate(&self) -> Result<()> {
        validate_full_theta(&self.theta).into_result()?;
        if self.n_days == 0 {
            return Err(OgiError::InvalidParams("n_days must be >= 1".into()));
        }
        if self.jump.jump_size < 0.0 || self.jump.intensity_per_session < 0.0 {
            return Err(OgiError::InvalidParams("jump config must be nonnegative".into()));
        }
        if self.noise.rel_scale < 0.0 {
            return Err(OgiError::InvalidParams("noise scale must be nonnegative".into()));
        }
        self.session_steps().map(|_| ())
    }
}

/// Full simulation output. Grid paths are populated only with
/// [`SimConfig::store_paths`]; they hold `n_days * m_all + 1` points starting
/// at the first recorded day's open.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    /// Noisy tick observations with exact open/close prices.
    pub observed: DaySeries,
    /// Per-day session integrated variance (grid quadrature).
    pub iv_session: Vec<f64>,
    /// Per-day overnight integrated variance.
    pub iv_overnight: Vec<f64>,
    /// Spot variance at each day's open.
    pub sigma2_open: Vec<f64>,
    /// Spot variance at each day's close.
    pub sigma2_close: Vec<f64>,
    /// Exact martingale-difference realizations of the session leg:
    /// `IV^H_d - lambda * E[IV^H_d | open information]`.
    pub session_innovations: Vec<f64>,
    /// Exact martingale differences of the overnight leg conditional on the
    /// close: `OV_d - (1-lambda) * E[OV_d | close information]`.
    pub overnight_innovations: Vec<f64>,
    pub jump_times: Vec<f64>,
    pub jump_sizes: Vec<f64>,
    pub grid_logprice: Vec<f64>,
    pub grid_spot_variance: Vec<f64>,
}

/// Spot variance inside the session at elapsed session time `s` (day
/// fraction, `0 <= s <= lambda`), given the open value, the overnight-return
/// accumulator `s_h`, the running integral `run_iv` over `[open, open+s)`,
/// and the volatility-driver increment `z`.
#[inline]
pub fn session_spot_var(
    t: &FullTheta,
    lambda: f64,
    s: f64,
    sigma2_open: f64,
    s_h: f64,
    run_iv: f64,
    z: f64,
) -> f64 {
    let u = s / lambda;
    sigma2_open + u * u * (t.omega_h1 + t.gamma_h * sigma2_open)
        - u * (t.omega_h2 + sigma2_open)
        + t.beta_h * s * (lambda - s) / (lambda * lambda * (1.0 - lambda)) * s_h
        + t.alpha_h / lambda * run_iv
        + t.nu_h / (lambda * lambda) * (lambda - s) * z * z
}

/// Spot variance in the overnight segment at elapsed overnight time `u`
/// (`0 <= u <= 1-lambda`), given the close value, the session-IV accumulator
/// `s_l`, the squared continuous price increment since the close `y2`, and
/// the volatility-driver increment `z`.
#[inline]
pub fn overnight_spot_var(
    t: &FullTheta,
    lambda: f64,
    u: f64,
    sigma2_close: f64,
    s_l: f64,
    y2: f64,
    z: f64,
) -> f64 {
    let rem = 1.0 - lambda;
    sigma2_close + u / rem * (t.omega_l + (t.gamma_l - 1.0) * sigma2_close)
        + t.alpha_l * u * (rem - u) / (rem * rem * lambda) * s_l
        + t.beta_l / rem * y2
        + t.nu_l / (rem * rem) * (rem - u) * z * z
}

/// Closed-form open-time spot variance from the previous open value, the
/// previous session integrated variance, and the previous squared overnight
/// return.
pub fn transition_open(
    sigma2_open_prev: f64,
    session_iv_prev: f64,
    overnight_ret_sq: f64,
    theta: &FullTheta,
    lambda: f64,
) -> f64 {
    theta.omega_l + theta.gamma_l * (theta.omega_h1 - theta.omega_h2)
        + theta.gamma() * sigma2_open_prev
        + theta.gamma_l * theta.alpha_h / lambda * session_iv_prev
        + theta.beta_l / (1.0 - lambda) * overnight_ret_sq
}

/// Closed-form close-time spot variance from the previous close value, the
/// current session integrated variance, and the previous squared overnight
/// return.
pub fn transition_close(
    sigma2_close_prev: f64,
    session_iv: f64,
    overnight_ret_sq_prev: f64,
    theta: &FullTheta,
    lambda: f64,
) -> f64 {
    theta.omega_h1 - theta.omega_h2
        + theta.gamma_h * theta.omega_l
        + theta.gamma() * sigma2_close_prev
        + theta.alpha_h / lambda * session_iv
        + theta.gamma_h * theta.beta_l / (1.0 - lambda) * overnight_ret_sq_prev
}

/// Constants-only fixed point used to initialize the spot variance.
pub fn initial_sigma2(theta: &FullTheta) -> Result<f64> {
    let v = (theta.omega_l + theta.gamma_l * (theta.omega_h1 - theta.omega_h2))
        / (1.0 - theta.gamma());
    if !(v > 0.0) {
        return Err(OgiError::InvalidParams(format!(
            "constants-only initial variance {v} is not positive"
        )));
    }
    Ok(v)
}

struct DayState {
    sigma2_open: f64,
    s_h: f64,
    s_l: f64,
    x: f64,
}

/// Generates an OGI sample path. Deterministic given the seed: every day
/// draws from its own derived substream.
pub fn simulate(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let t = &config.theta;
    let lambda = config.session.lambda;
    let dt = 1.0 / config.m_all as f64;
    let ms = config.session_steps()?;
    let mo = config.m_all - ms;
    let sqdt = dt.sqrt();
    let rho = RhoCoefficients::from_theta(t);
    let total_days = config.burn_in_days + config.n_days;

    let mut state = DayState {
        sigma2_open: initial_sigma2(t)?,
        s_h: 0.0,
        s_l: 0.0,
        x: 0.0,
    };

    let n = config.n_days;
    let mut out = SimOutput {
        observed: DaySeries { days: Vec::with_capacity(n) },
        iv_session: Vec::with_capacity(n),
        iv_overnight: Vec::with_capacity(n),
        sigma2_open: Vec::with_capacity(n),
        sigma2_close: Vec::with_capacity(n),
        session_innovations: Vec::with_capacity(n),
        overnight_innovations: Vec::with_capacity(n),
        jump_times: Vec::new(),
        jump_sizes: Vec::new(),
        grid_logprice: Vec::new(),
        grid_spot_variance: Vec::new(),
    };
    if config.store_paths {
        out.grid_logprice.reserve(n * config.m_all + 1);
        out.grid_spot_variance.reserve(n * config.m_all + 1);
    }

    let tick_stride = if config.m_obs > 0 { ms / config.m_obs } else { 0 };
    let mut raw_ticks: Vec<f64> = Vec::with_capacity(config.m_obs.saturating_add(1));
    let mut jumps: Vec<(usize, f64)> = Vec::new();

    for day in 0..total_days {
        let recorded = day >= config.burn_in_days;
        let rec_idx = day - config.burn_in_days.min(day);
        let mut rng = derive_rng(config.seed, day as u64);

        // jump schedule for this session
        jumps.clear();
        if config.jump.intensity_per_session > 0.0 {
            let count = Poisson::new(config.jump.intensity_per_session)
                .map_err(|e| OgiError::InvalidParams(format!("jump intensity: {e}")))?
                .sample(&mut rng) as usize;
            for _ in 0..count {
                let u: f64 = rng.gen_range(0.0..1.0);
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let step = ((u * ms as f64) as usize).min(ms - 1);
                jumps.push((step, sign * config.jump.jump_size));
            }
            jumps.sort_by_key(|(s, _)| *s);
        }

        // conditional mean of the session integrated variance given the open
        let h_h_bracket = 2.0 * t.omega_h1 * rho.rho_h3 - t.omega_h2 * rho.rho_h2
            + t.nu_h * (rho.rho_h2 - 2.0 * rho.rho_h3)
            + state.sigma2_open * rho.rho_h
            + t.beta_h / (1.0 - lambda) * (rho.rho_h2 - 2.0 * rho.rho_h3) * state.s_h;

        let x_open = state.x;
        if recorded {
            out.sigma2_open.push(state.sigma2_open);
        }

        // ---- trading session ----
        let mut run_iv = 0.0;
        let mut z = 0.0;
        let mut jump_cursor = 0;
        raw_ticks.clear();
        for j in 0..ms {
            let s = j as f64 * dt;
            let sigma2 = session_spot_var(t, lambda, s, state.sigma2_open, state.s_h, run_iv, z);
            if !sigma2.is_finite() || sigma2 <= 0.0 {
                return Err(OgiError::NonFiniteState { day, index: j, value: sigma2 });
            }
            if recorded {
                if config.store_paths {
                    out.grid_logprice.push(state.x);
                    out.grid_spot_variance.push(sigma2);
                }
                if tick_stride > 0 && j % tick_stride == 0 {
                    raw_ticks.push(state.x);
                }
            }
            run_iv += sigma2 * dt;
            let zb: f64 = StandardNormal.sample(&mut rng);
            let zw: f64 = StandardNormal.sample(&mut rng);
            state.x += sigma2.sqrt() * zb * sqdt;
            z += zw * sqdt;
            while jump_cursor < jumps.len() && jumps[jump_cursor].0 == j {
                let (step, size) = jumps[jump_cursor];
                state.x += size;
                if recorded {
                    let day_open_time = rec_idx as f64;
                    out.jump_times.push(day_open_time + (step as f64 + 0.5) * dt);
                    out.jump_sizes.push(size);
                }
                jump_cursor += 1;
            }
        }
        let iv_h = run_iv;
        let sigma2_close = t.omega_h1 - t.omega_h2
            + t.gamma_h * state.sigma2_open
            + t.alpha_h / lambda * iv_h;
        if !sigma2_close.is_finite() || sigma2_close <= 0.0 {
            return Err(OgiError::NonFiniteState { day, index: ms, value: sigma2_close });
        }
        let x_close = state.x;
        if recorded {
            raw_ticks.push(x_close);
        }

        // today's session IV enters the overnight accumulator immediately
        state.s_l = t.gamma() * state.s_l + iv_h;

        // conditional mean of the overnight squared return given the close
        let h_l_bracket = t.omega_l * rho.rho_l2
            + t.nu_l * (rho.rho_l2 - 2.0 * rho.rho_l3)
            + sigma2_close * rho.rho_l
            + t.alpha_l / lambda * (rho.rho_l2 - 2.0 * rho.rho_l3) * state.s_l;

        // ---- overnight ----
        let mut iv_l = 0.0;
        z = 0.0;
        let mut y = 0.0; // continuous price increment since the close
        for j in 0..mo {
            let u = j as f64 * dt;
            let sigma2 = overnight_spot_var(t, lambda, u, sigma2_close, state.s_l, y * y, z);
            if !sigma2.is_finite() || sigma2 <= 0.0 {
                return Err(OgiError::NonFiniteState { day, index: ms + j, value: sigma2 });
            }
            if recorded && config.store_paths {
                out.grid_logprice.push(state.x);
                out.grid_spot_variance.push(sigma2);
            }
            iv_l += sigma2 * dt;
            let zb: f64 = StandardNormal.sample(&mut rng);
            let zw: f64 = StandardNormal.sample(&mut rng);
            let dx = sigma2.sqrt() * zb * sqdt;
            state.x += dx;
            y += dx;
            z += zw * sqdt;
        }
        let ov = y * y;

        if recorded {
            out.iv_session.push(iv_h);
            out.iv_overnight.push(iv_l);
            out.sigma2_close.push(sigma2_close);
            out.session_innovations.push(iv_h - lambda * h_h_bracket);
            out.overnight_innovations.push(ov - (1.0 - lambda) * h_l_bracket);

            // noisy ticks: interior points only, noise scaled by the
            // whole-day integrated variance
            let sd = config.noise.rel_scale * (iv_h + iv_l).sqrt();
            let m_ticks = raw_ticks.len();
            let mut prices = raw_ticks.clone();
            for p in prices.iter_mut().take(m_ticks.saturating_sub(1)).skip(1) {
                let eps: f64 = StandardNormal.sample(&mut rng);
                *p += sd * eps;
            }
            let day_open_time = rec_idx as f64;
            let times: Vec<f64> = if tick_stride > 0 {
                (0..m_ticks)
                    .map(|k| day_open_time + (k as f64) * lambda / config.m_obs as f64)
                    .collect()
            } else {
                vec![day_open_time, day_open_time + lambda]
            };
            let prices = if tick_stride > 0 { prices } else { vec![x_open, x_close] };
            out.observed.days.push(MarketDay {
                day_index: rec_idx + 1,
                tick_times: times,
                tick_logprices: prices,
                open_logprice: x_open,
                close_logprice: x_close,
            });
        }

        // roll the state to the next open
        let next_open = t.omega_l + t.gamma_l * sigma2_close + t.beta_l / (1.0 - lambda) * ov;
        state.s_h = t.gamma() * state.s_h + ov;
        state.sigma2_open = next_open;
    }
    if config.store_paths {
        // boundary point: the next open
        out.grid_logprice.push(state.x);
        out.grid_spot_variance.push(state.sigma2_open);
    }
    Ok(out)
}

/// One session segment from a fixed state; returns the session integrated
/// variance. Used to validate the closed-form innovation variance.
pub fn simulate_session_once(
    theta: &FullTheta,
    lambda: f64,
    sigma2_open: f64,
    s_h: f64,
    steps: usize,
    rng: &mut ChaCha12Rng,
) -> Result<f64> {
    let dt = lambda / steps as f64;
    let sqdt = dt.sqrt();
    let mut run_iv = 0.0;
    let mut z = 0.0;
    for j in 0..steps {
        let s = j as f64 * dt;
        let sigma2 = session_spot_var(theta, lambda, s, sigma2_open, s_h, run_iv, z);
        if !sigma2.is_finite() || sigma2 <= 0.0 {
            return Err(OgiError::NonFiniteState { day: 0, index: j, value: sigma2 });
        }
        run_iv += sigma2 * dt;
        let zw: f64 = StandardNormal.sample(rng);
        z += zw * sqdt;
    }
    Ok(run_iv)
}

/// One overnight segment from a fixed close state; returns the squared
/// overnight return and the overnight integrated variance.
pub fn simulate_overnight_once(
    theta: &FullTheta,
    lambda: f64,
    sigma2_close: f64,
    s_l: f64,
    steps: usize,
    rng: &mut ChaCha12Rng,
) -> Result<(f64, f64)> {
    let rem = 1.0 - lambda;
    let dt = rem / steps as f64;
    let sqdt = dt.sqrt();
    let mut iv = 0.0;
    let mut y = 0.0;
    let mut z = 0.0;
    for j in 0..steps {
        let u = j as f64 * dt;
        let sigma2 = overnight_spot_var(theta, lambda, u, sigma2_close, s_l, y * y, z);
        if !sigma2.is_finite() || sigma2 <= 0.0 {
            return Err(OgiError::NonFiniteState { day: 0, index: j, value: sigma2 });
        }
        iv += sigma2 * dt;
        let zb: f64 = StandardNormal.sample(rng);
        let zw: f64 = StandardNormal.sample(rng);
        y += sigma2.sqrt() * zb * sqdt;
        z += zw * sqdt;
    }
    Ok((y * y, iv))
}

/// Re-subsamples noisy observations from a stored true path (requires
/// [`SimConfig::store_paths`] output). Interior ticks receive fresh i.i.d.
/// Gaussian noise; boundary prices are exact.
pub fn make_observations(
    sim: &SimOutput,
    noise: &NoiseConfig,
    m_obs: usize,
    m_all: usize,
    lambda: f64,
    seed: u64,
) -> Result<DaySeries> {
    if sim.grid_logprice.is_empty() {
        return Err(OgiError::InvalidInput(
            "make_observations needs a simulation run with store_paths".into(),
        ));
    }
    let ms_exact = lambda * m_all as f64;
    let ms = ms_exact.round() as usize;
    if (ms_exact - ms as f64).abs() > 1e-9 || m_obs < 1 || ms % m_obs != 0 {
        return Err(OgiError::InvalidParams(format!(
            "m_obs = {m_obs} incompatible with session grid of {ms_exact} steps"
        )));
    }
    let stride = ms / m_obs;
    let n_days = sim.iv_session.len();
    let mut days = Vec::with_capacity(n_days);
    for d in 0..n_days {
        let mut rng = derive_rng(seed, d as u64);
        let sd = noise.rel_scale * (sim.iv_session[d] + sim.iv_overnight[d]).sqrt();
        let base = d * m_all;
        let open_time = d as f64;
        let mut times = Vec::with_capacity(m_obs + 1);
        let mut prices = Vec::with_capacity(m_obs + 1);
        for k in 0..=m_obs {
            times.push(open_time + k as f64 * lambda / m_obs as f64);
            let mut p = sim.grid_logprice[base + k * stride];
            if k > 0 && k < m_obs {
                let eps: f64 = StandardNormal.sample(&mut rng);
                p += sd * eps;
            }
            prices.push(p);
        }
        days.push(MarketDay {
            day_index: d + 1,
            tick_times: times,
            tick_logprices: prices,
            open_logprice: sim.grid_logprice[base],
            close_logprice: sim.grid_logprice[base + ms],
        });
    }
    DaySeries::new(days, lambda)
}
