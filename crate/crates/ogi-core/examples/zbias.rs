use ogi_core::data::{sample_variance, FilterInput};
use ogi_core::estimation::{aggregate_gradients, fit_ogi, sandwich_cov, z_statistic, EstimationConfig};
use ogi_core::simulator::{simulate, JumpConfig, SimConfig};
use ogi_core::theory::{map_theta_to_garch, AggregationConvention};
use ogi_core::types::FullTheta;
use rayon::prelude::*;

const LAMBDA: f64 = 6.5 / 24.0;
const AGG: AggregationConvention = AggregationConvention::TheoremA1c;

fn run(m_all: usize, reps: u64) -> [f64; 4] {
    let g0 = map_theta_to_garch(&FullTheta::simulation_default(), LAMBDA).unwrap().theta_g;
    let agg_true = aggregate_gradients(&g0, LAMBDA, AGG);
    let zs: Vec<[f64; 4]> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let cfg = SimConfig {
                n_days: 502, m_all, m_obs: 0,
                jump: JumpConfig::none(), burn_in_days: 50, seed: 1000 + rep,
                ..SimConfig::default()
            };
            let sim = simulate(&cfg).unwrap();
            let ov = sim.observed.overnight_return_sq();
            let n = 500;
            let input = FilterInput::from_series(
                sim.iv_session[..n].to_vec(), ov[..n].to_vec(),
                sim.observed.open_to_open_returns()[..n].to_vec(),
                sim.observed.session_returns()[..n].to_vec(),
                sim.observed.overnight_returns()[..n].to_vec(), LAMBDA).unwrap();
            let est = EstimationConfig { seed: rep, ..Default::default() };
            let report = fit_ogi(&input, &est).unwrap();
            let sw = sandwich_cov(&input, &report.theta_g_hat, report.phi_h_hat, report.phi_l_hat).unwrap();
            let agg_hat = aggregate_gradients(&report.theta_g_hat, LAMBDA, AGG);
            let mut z = [0.0; 4];
            for (j, ((_, value, grad), (_, tv, _))) in agg_hat.iter().zip(agg_true.iter()).enumerate() {
                z[j] = z_statistic(*value, grad, *tv, n, &sw.cov_asymptotic).unwrap().0;
            }
            z
        })
        .collect();
    let mut out = [0.0; 4];
    for j in 0..4 {
        let v: Vec<f64> = zs.iter().map(|z| z[j]).collect();
        out[j] = ogi_core::data::mean(&v);
        eprintln!("  m_all={m_all} stat{j}: mean {:.3} sd {:.3}", out[j], sample_variance(&v).sqrt());
    }
    out
}

fn main() {
    eprintln!("m_all = 8640:");
    run(8640, 40);
    eprintln!("m_all = 43200:");
    run(43200, 40);
}
