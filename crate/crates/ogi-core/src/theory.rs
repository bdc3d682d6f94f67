//! Closed-form structural quantities of the OGI model: the map from
//! structural to reduced GARCH parameters, innovation variances for both
//! day segments, whole-day parameter aggregation, and multi-step forecasts.

use serde::{Deserialize, Serialize};

use crate::error::{OgiError, Result};
use crate::types::{FullTheta, GarchTheta};

/// Exponential-moment coefficients entering the parameter map. The session
/// family is driven by `alpha_H`, the overnight family by `beta_L` and
/// `gamma_L - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoCoefficients {
    pub rho_h1: f64,
    pub rho_h2: f64,
    pub rho_h3: f64,
    pub rho_h: f64,
    pub rho_l1: f64,
    pub rho_l2: f64,
    pub rho_l3: f64,
    pub rho_l: f64,
}

impl RhoCoefficients {
    pub fn from_theta(theta: &FullTheta) -> Self {
        let (rho_h1, rho_h2, rho_h3) = rho123(theta.alpha_h);
        let rho_h = 2.0 * theta.gamma_h * rho_h3 + rho_h1 - rho_h2;
        let (rho_l1, rho_l2, rho_l3) = rho123(theta.beta_l);
        let rho_l = (theta.gamma_l - 1.0) * rho_l2 + rho_l1;
        RhoCoefficients {
            rho_h1,
            rho_h2,
            rho_h3,
            rho_h,
            rho_l1,
            rho_l2,
            rho_l3,
            rho_l,
        }
    }
}

// rho_k(x) = (e^x - sum_{j<k+...}) / x^k have removable singularities at 0;
// below the switch point the truncated Taylor series is both faster and
// accurate to full precision, while the direct form loses digits to
// cancellation.
const RHO_SERIES_SWITCH: f64 = 0.5;

fn rho123(x: f64) -> (f64, f64, f64) {
    if x.abs() < RHO_SERIES_SWITCH {
        // rho_k = sum_{j>=0} x^j / (j+k)!
        let mut r1 = 0.0;
        let mut r2 = 0.0;
        let mut r3 = 0.0;
        let mut pow = 1.0;
        let mut fact = 1.0; // j!
        for j in 0..22u32 {
            fact *= f64::from(j + 1); // (j+1)!
            let f2 = fact * f64::from(j + 2);
            let f3 = f2 * f64::from(j + 3);
            r1 += pow / fact;
            r2 += pow / f2;
            r3 += pow / f3;
            pow *= x;
        }
        (r1, r2, r3)
    } else {
        let e = x.exp();
        (
            (e - 1.0) / x,
            (e - 1.0 - x) / (x * x),
            (e - 1.0 - x - x * x / 2.0) / (x * x * x),
        )
    }
}

// Taylor coefficients of nu_variance_factor around 0.
const NU_FACTOR_SERIES: [f64; 20] = [
    3.333333333333333e-2,
    3.174603174603174e-2,
    1.686507936507936e-2,
    6.481481481481481e-3,
    1.990740740740741e-3,
    5.146705146705147e-4,
    1.155904280904281e-4,
    2.303509247953692e-5,
    4.135616734823084e-6,
    6.766455179153592e-7,
    1.018040142544111e-7,
    1.418769290501317e-8,
    1.842535369256243e-9,
    2.241200336747847e-10,
    2.564443935280363e-11,
    2.770704512049198e-12,
    2.836005779375888e-13,
    2.758128494197911e-14,
    2.555324625820633e-15,
    2.260583352430062e-16,
];

/// The scalar factor s(x) with
/// `s(x) = [(2x^2-8x+9)e^{2x} + (16x-48)e^x + 4x^2+22x+39] / (2x^6)`,
/// so that the session innovation variance is `lambda^2 nu_H^2 s(alpha_H)`.
/// The numerator cancels to O(x^6) at the origin, so small arguments use the
/// series.
pub fn nu_variance_factor(x: f64) -> f64 {
    if x.abs() < 0.7 {
        let mut acc = 0.0;
        let mut pow = 1.0;
        for c in NU_FACTOR_SERIES {
            acc += c * pow;
            pow *= x;
        }
        acc
    } else {
        let num = (2.0 * x * x - 8.0 * x + 9.0) * (2.0 * x).exp()
            + (16.0 * x - 48.0) * x.exp()
            + 4.0 * x * x
            + 22.0 * x
            + 39.0;
        num / (2.0 * x.powi(6))
    }
}

/// Result of the structural-to-GARCH parameter map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchMap {
    pub theta_g: GarchTheta,
    pub rho: RhoCoefficients,
}

/// Maps the 11 structural parameters to the 7 reduced GARCH parameters.
/// `alpha_H = 0` or `beta_L = 0` are handled through the series limits of
/// the exponential-moment coefficients.
pub fn map_theta_to_garch(theta: &FullTheta, lambda: f64) -> Result<GarchMap> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(OgiError::InvalidParams(format!(
            "lambda = {lambda} outside (0, 1)"
        )));
    }
    let rho = RhoCoefficients::from_theta(theta);
    let t = theta;
    let gamma = t.gamma_h * t.gamma_l;

    let omega_hg = (1.0 - gamma)
        * (2.0 * t.omega_h1 * rho.rho_h3 - t.omega_h2 * rho.rho_h2
            + t.nu_h * (rho.rho_h2 - 2.0 * rho.rho_h3))
        + t.gamma_l * (t.omega_h1 - t.omega_h2) * rho.rho_h
        + t.omega_l * rho.rho_h;
    let alpha_hg = rho.rho_h * t.gamma_l * t.alpha_h;
    let beta_hg = rho.rho_h * t.beta_l + t.beta_h * (rho.rho_h2 - 2.0 * rho.rho_h3);

    let dl = rho.rho_l2 - 2.0 * rho.rho_l3;
    let omega_lg = (1.0 - gamma) * (t.omega_l * rho.rho_l2 + t.nu_l * dl)
        + (t.omega_h1 - t.omega_h2 + t.gamma_h * t.omega_l) * rho.rho_l
        + rho.rho_l * t.alpha_h * omega_hg
        + t.alpha_l * dl * omega_hg;
    let alpha_lg = (rho.rho_l * t.alpha_h + t.alpha_l * dl) * (gamma + alpha_hg);
    let beta_lg = rho.rho_l * (t.gamma_h * t.beta_l + t.alpha_h * beta_hg) + t.alpha_l * dl * beta_hg;

    Ok(GarchMap {
        theta_g: GarchTheta {
            omega_hg,
            omega_lg,
            gamma,
            alpha_hg,
            alpha_lg,
            beta_hg,
            beta_lg,
        },
        rho,
    })
}

/// Conditional variance of the session-IV innovation,
/// `lambda^2 nu_H^2 s(alpha_H)`. State-independent.
pub fn cond_var_h(theta: &FullTheta, lambda: f64) -> Result<f64> {
    if !(theta.alpha_h >= 0.0 && theta.alpha_h < 1.0) {
        return Err(OgiError::InvalidParams(format!(
            "alpha_H = {} outside [0, 1)",
            theta.alpha_h
        )));
    }
    Ok(lambda * lambda * theta.nu_h * theta.nu_h * nu_variance_factor(theta.alpha_h))
}

/// Quadrature coefficients for the overnight innovation variance, plus the
/// state-free part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondVarCoefficients {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub nu_l_g: f64,
}

/// Computes F_{beta_L,1..3} by adaptive quadrature over `[lambda, 1]` and
/// the state-free variance component nu_L^g.
///
/// The third integrand kernel is evaluated as
/// `(1-lambda)/beta_L^2 * (expm1(x) - x)` with `x = beta_L (t-lambda)/(1-lambda)`,
/// which is the solution of the within-overnight mean equation (positive on
/// the interior, as required).
pub fn cond_var_coefficients(theta: &FullTheta, lambda: f64) -> Result<CondVarCoefficients> {
    let b = theta.beta_l;
    if !(b > 0.0 && b < 1.0) {
        return Err(OgiError::InvalidParams(format!(
            "beta_L = {b} outside (0, 1)"
        )));
    }
    let t_len = 1.0 - lambda;
    let gl1 = theta.gamma_l - 1.0;
    let f1 = move |t: f64| {
        1.5 * (6.0 * b * (1.0 - t) / t_len).exp() - 0.5 * (2.0 * b * (1.0 - t) / t_len).exp()
    };
    let f2 = move |t: f64| t_len / b * (b * (t - lambda) / t_len).exp_m1();
    let f3 = move |t: f64| {
        let x = b * (t - lambda) / t_len;
        t_len / (b * b) * (x.exp_m1() - x)
    };
    let w = move |t: f64| (t - lambda) / t_len;

    let tol = 1e-10;
    let cap_f1 = 4.0
        * integrate(
            |t| (1.0 + w(t) * gl1) * f1(t) * (f2(t) + gl1 * f3(t)),
            lambda,
            1.0,
            tol,
        )?;
    let cap_f2 = 4.0
        * integrate(
            |t| (1.0 + w(t) * gl1) * f1(t) * f3(t) + w(t) * f1(t) * (f2(t) + gl1 * f3(t)),
            lambda,
            1.0,
            tol,
        )?;
    let cap_f3 = 4.0 * integrate(|t| w(t) * f1(t) * f3(t), lambda, 1.0, tol)?;

    let nu_h_g = theta.nu_h * theta.nu_h * nu_variance_factor(theta.alpha_h);
    let rho = RhoCoefficients::from_theta(theta);
    let cross = (rho.rho_l * theta.beta_h * t_len / lambda).powi(2)
        + (theta.beta_h / lambda).powi(2);
    let nu_l_g = theta.nu_l * theta.nu_l * nu_variance_factor(b) + cross * nu_h_g;

    Ok(CondVarCoefficients {
        f1: cap_f1,
        f2: cap_f2,
        f3: cap_f3,
        nu_l_g,
    })
}

/// Conditional variance of the overnight squared-return innovation given the
/// state `s2` (the conditional mean of the close-time spot variance):
/// `F1 s2^2 + F2 omega_L s2 + F3 omega_L^2 + (1-lambda)^2 nu_L^g`.
pub fn cond_var_l(theta: &FullTheta, s2: f64, lambda: f64) -> Result<f64> {
    let c = cond_var_coefficients(theta, lambda)?;
    let t_len = 1.0 - lambda;
    Ok(c.f1 * s2 * s2 + c.f2 * theta.omega_l * s2 + c.f3 * theta.omega_l * theta.omega_l
        + t_len * t_len * c.nu_l_g)
}

/// How the close-time state entering [`cond_var_l`] is assembled from filter
/// quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SStateConvention {
    /// Paper text: the session conditional volatility enters with loading
    /// `beta_H`.
    AsPrinted,
    /// Conditional mean of the close-time spot variance: loading `alpha_H`.
    ConditionalMean,
}

/// State value for [`cond_var_l`] from the previous close-time spot variance,
/// the current session conditional volatility, and the previous squared
/// overnight return.
pub fn s_state(
    theta: &FullTheta,
    sigma2_close_prev: f64,
    h_h: f64,
    overnight_ret_sq: f64,
    lambda: f64,
    convention: SStateConvention,
) -> f64 {
    let loading = match convention {
        SStateConvention::AsPrinted => theta.beta_h,
        SStateConvention::ConditionalMean => theta.alpha_h,
    };
    theta.omega_h1 - theta.omega_h2
        + theta.gamma_h * theta.omega_l
        + theta.gamma() * sigma2_close_prev
        + loading * h_h
        + theta.gamma_h * theta.beta_l / (1.0 - lambda) * overnight_ret_sq
}

/// Which printed form of the whole-day innovation loading to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AggregationConvention {
    /// `alpha^g = lambda alpha_H^g + (1-lambda) gamma alpha_L^g` (the proved
    /// supplement statement; default).
    #[default]
    TheoremA1c,
    /// `alpha^g = lambda alpha_H^g + (1-lambda) alpha_L^g` (main-text
    /// display; also the form implied by `h = lambda h^H + (1-lambda) h^L`).
    MainText,
}

/// Whole-day aggregate parameters `(omega^g, alpha^g, beta^g)`.
pub fn aggregate_garch(
    theta_g: &GarchTheta,
    lambda: f64,
    convention: AggregationConvention,
) -> (f64, f64, f64) {
    let omega_g = lambda * theta_g.omega_hg + (1.0 - lambda) * theta_g.omega_lg;
    let alpha_g = match convention {
        AggregationConvention::TheoremA1c => {
            lambda * theta_g.alpha_hg + (1.0 - lambda) * theta_g.gamma * theta_g.alpha_lg
        }
        AggregationConvention::MainText => {
            lambda * theta_g.alpha_hg + (1.0 - lambda) * theta_g.alpha_lg
        }
    };
    let beta_g = lambda * theta_g.beta_hg + (1.0 - lambda) * theta_g.beta_lg;
    (omega_g, alpha_g, beta_g)
}

/// One-step whole-day volatility forecast by the plug-in recursion.
pub fn forecast_one(
    theta_g: &GarchTheta,
    h_n: f64,
    rv_n: f64,
    ov_n: f64,
    lambda: f64,
    convention: AggregationConvention,
) -> f64 {
    let (omega_g, alpha_g, beta_g) = aggregate_garch(theta_g, lambda, convention);
    omega_g + theta_g.gamma * h_n + alpha_g / lambda * rv_n + beta_g / (1.0 - lambda) * ov_n
}

/// Multi-step forecast output.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiForecast {
    /// Forecasts for horizons 1..=k.
    pub values: Vec<f64>,
    /// Set when the mean-recursion matrix has spectral norm >= 1 (forecasts
    /// are still produced but diverge geometrically).
    pub divergence_warning: bool,
}

/// Multi-step volatility forecast. The first step replaces the innovations
/// with their conditional means `lambda h^H_n` and `(1-lambda) h^L_n`;
/// further steps advance `(h^H, h^L)` with the mean-recursion matrix.
pub fn forecast_multi(
    theta_g: &GarchTheta,
    h_h_n: f64,
    h_l_n: f64,
    h_n: f64,
    horizon: usize,
    lambda: f64,
    convention: AggregationConvention,
) -> Result<MultiForecast> {
    if horizon == 0 {
        return Err(OgiError::InvalidInput("horizon must be >= 1".into()));
    }
    let (omega_g, alpha_g, beta_g) = aggregate_garch(theta_g, lambda, convention);
    let m = theta_g.mean_recursion_matrix();
    let divergence_warning = theta_g.spectral_norm() >= 1.0;

    let mut values = Vec::with_capacity(horizon);
    let mut hh = h_h_n;
    let mut hl = h_l_n;
    let mut h = h_n;
    for _ in 0..horizon {
        let next = omega_g + theta_g.gamma * h + alpha_g * hh + beta_g * hl;
        values.push(next);
        let hh_next = theta_g.omega_hg + m[0][0] * hh + m[0][1] * hl;
        let hl_next = theta_g.omega_lg + m[1][0] * hh + m[1][1] * hl;
        hh = hh_next;
        hl = hl_next;
        h = next;
    }
    Ok(MultiForecast {
        values,
        divergence_warning,
    })
}

// ---------------------------------------------------------------------------
// adaptive Gauss-Kronrod quadrature
// ---------------------------------------------------------------------------

const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = 0.0;
    let mut g = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        if x == 0.0 {
            let fc = f(c);
            k += wk * fc;
            g += WG[3] * fc;
        } else {
            let f1 = f(c - h * x);
            let f2 = f(c + h * x);
            k += wk * (f1 + f2);
            // odd Kronrod indices are the embedded Gauss-7 nodes
            if i % 2 == 1 {
                g += WG[i / 2] * (f1 + f2);
            }
        }
    }
    (k * h, (k - g).abs() * h)
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        depth: usize,
        whole: f64,
    ) -> Result<f64> {
        if depth > 50 {
            return Err(OgiError::QuadratureFailure {
                a,
                b,
                tol,
                estimate: whole,
            });
        }
        let c = 0.5 * (a + b);
        let (left, el) = gk15(f, a, c);
        let (right, er) = gk15(f, c, b);
        if el + er <= tol || (el + er) <= 1e-16 * (left.abs() + right.abs()) {
            return Ok(left + right);
        }
        Ok(recurse(f, a, c, 0.5 * tol, depth + 1, left)?
            + recurse(f, c, b, 0.5 * tol, depth + 1, right)?)
    }
    let (whole, err) = gk15(&f, a, b);
    if err <= tol {
        return Ok(whole);
    }
    recurse(&f, a, b, tol, 0, whole)
}
