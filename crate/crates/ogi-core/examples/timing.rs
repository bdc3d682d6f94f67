use std::time::Instant;
use ogi_core::data::FilterInput;
use ogi_core::estimation::{fit_ogi, EstimationConfig};
use ogi_core::prv::{prv_series, PrvConfig};
use ogi_core::simulator::{simulate, JumpConfig, SimConfig};

fn main() {
    let t0 = Instant::now();
    let cfg = SimConfig {
        n_days: 502,
        m_all: 8640,
        m_obs: 0,
        jump: JumpConfig::none(),
        burn_in_days: 50,
        seed: 1,
        ..SimConfig::default()
    };
    let sim = simulate(&cfg).unwrap();
    println!("sim 502 days @8640 no ticks: {:?}", t0.elapsed());

    let t0 = Instant::now();
    let cfg2 = SimConfig { m_obs: 2340, ..cfg.clone() };
    let sim2 = simulate(&cfg2).unwrap();
    println!("sim 502 days @8640 + 2340 ticks: {:?}", t0.elapsed());

    let t0 = Instant::now();
    let prv = prv_series(&sim2.observed, &PrvConfig::empirical()).unwrap();
    println!("prv 502 days m=2340: {:?} (first rv {})", t0.elapsed(), prv[0].rv);

    let ov = sim.observed.overnight_return_sq();
    let n = ov.len();
    let input = FilterInput::from_series(
        sim.iv_session[..n].to_vec(), ov,
        sim.observed.open_to_open_returns(),
        sim.observed.session_returns()[..n].to_vec(),
        sim.observed.overnight_returns(), 6.5/24.0).unwrap();
    let t0 = Instant::now();
    let report = fit_ogi(&input, &EstimationConfig::default()).unwrap();
    println!("fit_ogi n=501: {:?} (evals {})", t0.elapsed(), report.trace.evals);
    println!("theta_hat = {:?}", report.theta_g_hat.to_vec());
}
