use super::{check_args, AjdParams, JumpMeasure, Regime, TransformResult};
use crate::error::{Error, Result};
use crate::special::{exp_e1_scaled, gauss_legendre5};

/// Whether [`solve_riccati_closed`] handles `p` for terminal `v`.
pub fn closed_form_supported(p: &AjdParams, v: f64) -> bool {
    match (p.regime(), p.jump) {
        (Regime::DeterministicIntensity, JumpMeasure::ExpX { .. }) => true,
        // psi_y must stay constant for the Dirac kernel to decouple
        (Regime::DeterministicIntensity, JumpMeasure::DiracXY { jump_y, .. }) => {
            jump_y == 0.0 || p.sigma_y == 0.0 || v == 0.0
        }
        (Regime::YDrivenIntensity, JumpMeasure::ExpX { .. }) => true,
        (Regime::YDrivenIntensity, JumpMeasure::DiracXY { jump_y, .. }) => jump_y == 0.0,
        (Regime::General, _) => false,
    }
}

/// `psi(t)` for `psi' = sigma^2 psi^2 / 2` from `psi(0) = u <= 0`.
#[inline]
pub(crate) fn quadratic_flow(sigma: f64, u: f64, t: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u / (1.0 - 0.5 * sigma * sigma * t * u)
    }
}

/// `psi(t)` for `psi' = alpha psi^2 - beta` with `alpha, beta >= 0`, `psi(0) = v <= 0`.
///
/// Written as the tanh addition formula so it holds both inside and outside the
/// stationary point `-sqrt(beta / alpha)` without branch switching.
pub(crate) fn tanh_flow(alpha: f64, beta: f64, v: f64, t: f64) -> f64 {
    if beta == 0.0 {
        if v == 0.0 {
            0.0
        } else {
            v / (1.0 - alpha * t * v)
        }
    } else if alpha == 0.0 {
        v - beta * t
    } else {
        let g = libm::sqrt(beta / alpha);
        let r = libm::sqrt(alpha * beta);
        let w = -v / g;
        let th = libm::tanh(r * t);
        -g * (th + w) / (1.0 + w * th)
    }
}

/// `int_0^t exp(k / (1 + b s)) ds` with `k <= 0`, `b >= 0`.
pub(crate) fn dirac_decay_integral(k: f64, b: f64, t: f64) -> f64 {
    if b == 0.0 || k == 0.0 {
        return t * libm::exp(k);
    }
    if b * t < 1e-4 {
        return gauss_legendre5(|s| libm::exp(k / (1.0 + b * s)), 0.0, t);
    }
    // antiderivative in w = 1 / (1 + b s):  G(w) = -e^{kw}/w + |k| E1(|k| w)
    let ak = -k;
    let g = |w: f64| libm::exp(k * w) * (-1.0 / w + ak * exp_e1_scaled(ak * w));
    let wt = 1.0 / (1.0 + b * t);
    (g(1.0) - g(wt)) / b
}

/// `int_0^t exp(-beta / s) ds`, the `u -> -inf` limit of [`dirac_decay_integral`].
pub(crate) fn dirac_limit_integral(beta: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let z = beta / t;
    libm::exp(-z) * (t - beta * exp_e1_scaled(z))
}

/// Closed-form Riccati solution in the regimes that admit one.
///
/// * `mu_x = mu_y = 0`: exponential jumps for any `sigma_x`, Dirac jumps when
///   `psi_y` stays constant (through the exponential integral if `sigma_x > 0`).
/// * `mu_x = 0`, `sigma_x = 0`, `mu_y > 0`: exponential jumps or Dirac jumps
///   with `jump_y = 0`; `psi_y` follows a tanh flow.
///
/// Returns [`Error::UnsupportedRegime`] otherwise.
pub fn solve_riccati_closed(p: &AjdParams, u: f64, v: f64, t: f64) -> Result<TransformResult> {
    p.validate()?;
    check_args(u, v, t)?;
    if !closed_form_supported(p, v) {
        return Err(Error::UnsupportedRegime);
    }
    let (phi, psi_x, psi_y) = match p.regime() {
        Regime::DeterministicIntensity => {
            let psi_x = quadratic_flow(p.sigma_x, u, t);
            let psi_y = quadratic_flow(p.sigma_y, v, t);
            let phi = match p.jump {
                JumpMeasure::ExpX { rate } => {
                    let s2 = p.sigma_x * p.sigma_x;
                    if u == 0.0 {
                        0.0
                    } else if s2 == 0.0 {
                        p.m * t * u / (rate - u)
                    } else {
                        let q = rate * s2 * t * (-u) / (2.0 * (rate - u));
                        -(2.0 * p.m / (rate * s2)) * libm::log1p(q)
                    }
                }
                JumpMeasure::DiracXY { jump_x, jump_y } => {
                    let c = if jump_y == 0.0 { 0.0 } else { jump_y * v };
                    let b = 0.5 * p.sigma_x * p.sigma_x * (-u);
                    p.m * (libm::exp(c) * dirac_decay_integral(jump_x * u, b, t) - t)
                }
            };
            (phi, psi_x, psi_y)
        }
        Regime::YDrivenIntensity => {
            let k0 = p.jump.kappa(u, 0.0);
            let phi = p.m * k0 * t;
            let psi_y = tanh_flow(0.5 * p.sigma_y * p.sigma_y, -p.mu_y * k0, v, t);
            (phi, u, psi_y)
        }
        Regime::General => unreachable!("guarded by closed_form_supported"),
    };
    Ok(TransformResult {
        phi,
        psi_x,
        psi_y,
        horizon: t,
        u,
        v,
    })
}
