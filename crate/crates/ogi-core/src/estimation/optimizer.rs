//! Box-constrained derivative-free maximization: Nelder-Mead over a smooth
//! logistic reparameterization of the box, optionally polished by gradient
//! ascent with a monotone backtracking line search.

/// Optimizer settings.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    pub max_evals: usize,
    /// Convergence on the simplex objective spread.
    pub f_tol: f64,
    /// Convergence on the simplex parameter spread (original coordinates).
    pub x_tol: f64,
    /// Initial simplex displacement in transformed coordinates.
    pub simplex_step: f64,
    /// Gradient-polish rounds after the simplex search (0 disables).
    pub polish_rounds: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_evals: 10_000,
            f_tol: 1e-10,
            x_tol: 1e-8,
            simplex_step: 0.25,
            polish_rounds: 40,
        }
    }
}

/// Maximization outcome. `history` records the accepted best objective per
/// iteration (non-decreasing by construction).
#[derive(Debug, Clone)]
pub struct OptResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Transform handle between the open box and unconstrained coordinates.
#[derive(Debug, Clone)]
pub struct BoxTransform {
    boxes: Vec<(f64, f64)>,
}

impl BoxTransform {
    pub fn new(boxes: &[(f64, f64)]) -> Self {
        BoxTransform { boxes: boxes.to_vec() }
    }

    pub fn to_params(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.boxes.iter())
            .map(|(ui, (lo, hi))| {
                // keep strictly inside the open box even when the transform
                // saturates numerically
                let s = sigmoid(*ui).clamp(1e-15, 1.0 - 1e-15);
                lo + (hi - lo) * s
            })
            .collect()
    }

    pub fn to_unconstrained(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.boxes.iter())
            .map(|(xi, (lo, hi))| {
                let p = ((xi - lo) / (hi - lo)).clamp(1e-12, 1.0 - 1e-12);
                logit(p)
            })
            .collect()
    }

    /// d x_i / d u_i along the diagonal transform.
    pub fn jacobian_diag(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.boxes.iter())
            .map(|(ui, (lo, hi))| {
                let s = sigmoid(*ui);
                (hi - lo) * s * (1.0 - s)
            })
            .collect()
    }
}

/// Maximizes `f` over the open box via Nelder-Mead in transformed
/// coordinates. When `grad` is supplied (gradient of `f` in original
/// coordinates), the simplex optimum is polished by monotone gradient ascent.
pub fn maximize_boxed(
    f: &dyn Fn(&[f64]) -> f64,
    grad: Option<&dyn Fn(&[f64]) -> Vec<f64>>,
    boxes: &[(f64, f64)],
    start: &[f64],
    cfg: &OptimizerConfig,
) -> OptResult {
    let dim = boxes.len();
    let transform = BoxTransform::new(boxes);
    let mut evals = 0usize;
    let eval = |u: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(&transform.to_params(u));
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    // initial simplex
    let u0 = transform.to_unconstrained(start);
    let mut simplex: Vec<Vec<f64>> = vec![u0.clone()];
    for i in 0..dim {
        let mut v = u0.clone();
        v[i] += cfg.simplex_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|u| eval(u, &mut evals)).collect();

    let (alpha, gamma_e, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut history = Vec::new();
    let mut converged = false;

    while evals < cfg.max_evals {
        // order descending (maximization)
        let mut idx: Vec<usize> = (0..=dim).collect();
        idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal));
        let ordered: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let ordered_vals: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        simplex = ordered;
        values = ordered_vals;
        history.push(values[0]);

        // convergence: objective spread and parameter spread
        let spread = values[0] - values[dim];
        let best_x = transform.to_params(&simplex[0]);
        let mut x_spread: f64 = 0.0;
        for v in simplex.iter().skip(1) {
            let xv = transform.to_params(v);
            for (a, b) in xv.iter().zip(best_x.iter()) {
                x_spread = x_spread.max((a - b).abs());
            }
        }
        if spread.abs() < cfg.f_tol && x_spread < cfg.x_tol {
            converged = true;
            break;
        }

        // centroid of all but worst
        let mut centroid = vec![0.0; dim];
        for v in simplex.iter().take(dim) {
            for (c, vi) in centroid.iter_mut().zip(v.iter()) {
                *c += vi / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(worst.iter())
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let f_r = eval(&reflect, &mut evals);

        if f_r > values[0] {
            // try expansion
            let expand: Vec<f64> = centroid
                .iter()
                .zip(worst.iter())
                .map(|(c, w)| c + gamma_e * (c - w))
                .collect();
            let f_e = eval(&expand, &mut evals);
            if f_e > f_r {
                simplex[dim] = expand;
                values[dim] = f_e;
            } else {
                simplex[dim] = reflect;
                values[dim] = f_r;
            }
        } else if f_r > values[dim - 1] {
            simplex[dim] = reflect;
            values[dim] = f_r;
        } else {
            // contraction
            let contract: Vec<f64> = centroid
                .iter()
                .zip(worst.iter())
                .map(|(c, w)| c + rho * (w - c))
                .collect();
            let f_c = eval(&contract, &mut evals);
            if f_c > values[dim] {
                simplex[dim] = contract;
                values[dim] = f_c;
            } else {
                // shrink toward best
                for i in 1..=dim {
                    let best = simplex[0].clone();
                    for (v, b) in simplex[i].iter_mut().zip(best.iter()) {
                        *v = b + sigma * (*v - b);
                    }
                    values[i] = eval(&simplex[i].clone(), &mut evals);
                }
            }
        }
    }

    let mut best_u = simplex[0].clone();
    let mut best_v = values[0];
    for (u, v) in simplex.iter().zip(values.iter()) {
        if *v > best_v {
            best_v = *v;
            best_u = u.clone();
        }
    }

    // gradient polish in transformed coordinates, monotone accept only
    if let Some(g) = grad {
        for _ in 0..cfg.polish_rounds {
            if evals >= cfg.max_evals {
                break;
            }
            let x = transform.to_params(&best_u);
            let gx = g(&x);
            let jd = transform.jacobian_diag(&best_u);
            let gu: Vec<f64> = gx.iter().zip(jd.iter()).map(|(a, b)| a * b).collect();
            let norm = gu.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm < 1e-14 {
                break;
            }
            let mut step = 1.0 / norm.max(1.0);
            let mut improved = false;
            for _ in 0..30 {
                let cand: Vec<f64> = best_u.iter().zip(gu.iter()).map(|(u, d)| u + step * d).collect();
                let v = eval(&cand, &mut evals);
                if v > best_v {
                    best_u = cand;
                    best_v = v;
                    improved = true;
                    history.push(best_v);
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
    }

    OptResult {
        x: transform.to_params(&best_u),
        value: best_v,
        evals,
        converged,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_quadratic_maximum_inside_box() {
        let f = |x: &[f64]| -(x[0] - 0.3).powi(2) - 2.0 * (x[1] - 0.7).powi(2);
        let res = maximize_boxed(
            &f,
            None,
            &[(0.0, 1.0), (0.0, 1.0)],
            &[0.5, 0.5],
            &OptimizerConfig::default(),
        );
        assert!(res.converged);
        assert!((res.x[0] - 0.3).abs() < 1e-6);
        assert!((res.x[1] - 0.7).abs() < 1e-6);
    }

    #[test]
    fn history_is_monotone_nondecreasing() {
        let f = |x: &[f64]| -(x[0] - 0.2).powi(2) - (x[1] + x[0] - 1.0).powi(2) - (x[2] - 0.9).powi(4);
        let res = maximize_boxed(
            &f,
            None,
            &[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
            &[0.5, 0.5, 0.5],
            &OptimizerConfig::default(),
        );
        for w in res.history.windows(2) {
            assert!(w[1] >= w[0], "history must be monotone");
        }
    }

    #[test]
    fn respects_box_when_maximum_outside() {
        let f = |x: &[f64]| x[0]; // pushes to the upper bound
        let res = maximize_boxed(
            &f,
            None,
            &[(0.0, 1.0)],
            &[0.5],
            &OptimizerConfig { max_evals: 3000, ..Default::default() },
        );
        assert!(res.x[0] < 1.0 && res.x[0] > 0.99);
    }

    #[test]
    fn gradient_polish_tightens_solution() {
        let f = |x: &[f64]| -(x[0] - 0.3).powi(2) - 2.0 * (x[1] - 0.7).powi(2);
        let g = |x: &[f64]| vec![-2.0 * (x[0] - 0.3), -4.0 * (x[1] - 0.7)];
        let loose = OptimizerConfig {
            max_evals: 10_000,
            f_tol: 1e-6,
            x_tol: 1e-3,
            polish_rounds: 0,
            ..Default::default()
        };
        let rough = maximize_boxed(&f, None, &[(0.0, 1.0), (0.0, 1.0)], &[0.9, 0.1], &loose);
        let polished = maximize_boxed(
            &f,
            Some(&g),
            &[(0.0, 1.0), (0.0, 1.0)],
            &[0.9, 0.1],
            &OptimizerConfig { polish_rounds: 60, ..loose },
        );
        assert!(polished.value >= rough.value);
    }

    #[test]
    fn transform_round_trip() {
        let t = BoxTransform::new(&[(0.5, 2.0), (-1.0, 1.0)]);
        let x = vec![1.3, -0.2];
        let u = t.to_unconstrained(&x);
        let back = t.to_params(&u);
        for (a, b) in x.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
