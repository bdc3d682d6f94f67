use ogi_core::data::{sample_variance, FilterInput};
use ogi_core::estimation::{fit_ogi, EstimationConfig};
use ogi_core::simulator::{simulate, JumpConfig, SimConfig};
use ogi_core::theory::map_theta_to_garch;
use ogi_core::types::FullTheta;
use rayon::prelude::*;

const LAMBDA: f64 = 6.5 / 24.0;

fn main() {
    let g0 = map_theta_to_garch(&FullTheta::simulation_default(), LAMBDA).unwrap().theta_g.to_vec();
    for scaled_h0 in [false, true] {
        let est_errs: Vec<Vec<f64>> = (0..60u64)
            .into_par_iter()
            .map(|rep| {
                let cfg = SimConfig {
                    n_days: 502, m_all: 8640, m_obs: 0,
                    jump: JumpConfig::none(), burn_in_days: 50, seed: 1000 + rep,
                    ..SimConfig::default()
                };
                let sim = simulate(&cfg).unwrap();
                let ov = sim.observed.overnight_return_sq();
                let n = 500;
                let mut input = FilterInput::from_series(
                    sim.iv_session[..n].to_vec(), ov[..n].to_vec(),
                    sim.observed.open_to_open_returns()[..n].to_vec(),
                    sim.observed.session_returns()[..n].to_vec(),
                    sim.observed.overnight_returns()[..n].to_vec(), LAMBDA).unwrap();
                if scaled_h0 {
                    input.h0_h = input.rv[0] / LAMBDA;
                    input.h0_l = sample_variance(&input.overnight_returns) / (1.0 - LAMBDA);
                }
                let est = EstimationConfig { seed: rep, ..Default::default() };
                let report = fit_ogi(&input, &est).unwrap();
                report.theta_g_hat.to_vec().iter().zip(g0.iter()).map(|(a, b)| a - b).collect()
            })
            .collect();
        eprint!("scaled_h0={scaled_h0}: mean bias ");
        for k in 0..7 {
            let v: Vec<f64> = est_errs.iter().map(|e| e[k]).collect();
            eprint!("{:+.4}({:.4}) ", ogi_core::data::mean(&v), (sample_variance(&v) / v.len() as f64).sqrt());
        }
        eprintln!();
    }
}
