//! Shared fixtures for the criterion benches.

use ogi_core::data::FilterInput;
use ogi_core::simulator::{simulate, JumpConfig, SimConfig, SimOutput};

/// A moderately sized simulated data set reused across benches.
pub fn bench_sim(n_days: usize, m_obs: usize, seed: u64) -> SimOutput {
    let cfg = SimConfig {
        n_days,
        m_all: 8640,
        m_obs,
        jump: JumpConfig::none(),
        burn_in_days: 20,
        seed,
        ..SimConfig::default()
    };
    simulate(&cfg).expect("benchmark simulation")
}

/// Estimation input with true integrated variances as the RV proxy.
pub fn bench_input(sim: &SimOutput) -> FilterInput {
    let ov = sim.observed.overnight_return_sq();
    let n = ov.len();
    FilterInput::from_series(
        sim.iv_session[..n].to_vec(),
        ov,
        sim.observed.open_to_open_returns(),
        sim.observed.session_returns()[..n].to_vec(),
        sim.observed.overnight_returns(),
        6.5 / 24.0,
    )
    .expect("benchmark input")
}
