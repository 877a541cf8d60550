//! Generalized Riccati equations of the two-factor affine jump diffusion
//!
//! ```text
//! dX = sigma_x sqrt(X) dW^X + dJ^X,   dY = sigma_y sqrt(Y) dW^Y + dJ^Y
//! jump intensity  m + mu_x X- + mu_y Y-,   jump sizes ~ nu
//! ```
//!
//! The conditional Laplace transform is exponential-affine,
//! `E[exp(u X_T + v Y_T) | X_t, Y_t] = exp(phi + X_t psi_x + Y_t psi_y)`,
//! with `(phi, psi_x, psi_y)` evaluated at horizon `T - t` and solving
//!
//! ```text
//! phi'   = m kappa(psi_x, psi_y)
//! psi_x' = sigma_x^2 psi_x^2 / 2 + mu_x kappa(psi_x, psi_y)
//! psi_y' = sigma_y^2 psi_y^2 / 2 + mu_y kappa(psi_x, psi_y)
//! ```
//!
//! from `(0, u, v)`. Everything here works with real exponents `u, v <= 0`;
//! on that domain all supported jump measures give global solutions.

mod closed;
mod limit;

pub use closed::{closed_form_supported, solve_riccati_closed};
pub use limit::{riccati_limit, riccati_limit_u_to_neg_inf, TransformLimit};

use crate::error::{invalid, Error, Result};
use crate::ode::{integrate, OdeOptions};

/// Distribution of the jump heights of `(J^X, J^Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpMeasure {
    /// Exponential jumps in `x` with the given rate; no jump in `y`.
    ExpX { rate: f64 },
    /// Deterministic jumps of size `jump_x` in `x` and `jump_y` in `y`.
    DiracXY { jump_x: f64, jump_y: f64 },
}

impl JumpMeasure {
    pub fn validate(&self) -> Result<()> {
        match *self {
            JumpMeasure::ExpX { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(invalid("jump.rate", "must be finite and > 0"));
                }
            }
            JumpMeasure::DiracXY { jump_x, jump_y } => {
                if !(jump_x.is_finite() && jump_x > 0.0) {
                    return Err(invalid("jump.jump_x", "must be finite and > 0"));
                }
                if !(jump_y.is_finite() && jump_y >= 0.0) {
                    return Err(invalid("jump.jump_y", "must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }

    /// `kappa(u, v)` without the pole check; returns NaN past the pole so the
    /// integrator rejects the trial stage.
    #[inline]
    pub(crate) fn kappa(&self, u: f64, v: f64) -> f64 {
        match *self {
            JumpMeasure::ExpX { rate } => {
                if u < rate {
                    u / (rate - u)
                } else {
                    f64::NAN
                }
            }
            JumpMeasure::DiracXY { jump_x, jump_y } => libm::expm1(u * jump_x + v * jump_y),
        }
    }
}

/// `kappa(u, v) = integral of (exp(u x + v y) - 1) d nu(x, y)` at real arguments.
pub fn jump_transform(nu: &JumpMeasure, u: f64, v: f64) -> Result<f64> {
    nu.validate()?;
    if let JumpMeasure::ExpX { rate } = *nu {
        if u >= rate {
            return Err(Error::TransformPole { u, rate });
        }
    }
    Ok(nu.kappa(u, v))
}

/// Parameters of the `(X, Y)` jump diffusion plus the observation delay `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AjdParams {
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// Base jump intensity per year.
    pub m: f64,
    pub mu_x: f64,
    pub mu_y: f64,
    pub jump: JumpMeasure,
    pub x0: f64,
    pub y0: f64,
    /// Delay after which the post-squeeze recovery becomes known.
    pub h: f64,
}

/// Parameter regimes with known closed-form Riccati solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `mu_x = mu_y = 0`: jumps arrive at the constant rate `m`.
    DeterministicIntensity,
    /// `mu_x = 0`, `sigma_x = 0`, `mu_y > 0`: intensity driven by `Y` only.
    YDrivenIntensity,
    General,
}

fn nonneg(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, "must be finite and >= 0"))
    }
}

impl AjdParams {
    pub fn validate(&self) -> Result<()> {
        nonneg("sigma_x", self.sigma_x)?;
        nonneg("sigma_y", self.sigma_y)?;
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(invalid("m", "must be finite and > 0"));
        }
        nonneg("mu_x", self.mu_x)?;
        nonneg("mu_y", self.mu_y)?;
        nonneg("x0", self.x0)?;
        nonneg("y0", self.y0)?;
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(invalid("h", "must be finite and > 0"));
        }
        self.jump.validate()
    }

    pub fn regime(&self) -> Regime {
        if self.mu_x == 0.0 && self.mu_y == 0.0 {
            Regime::DeterministicIntensity
        } else if self.mu_x == 0.0 && self.sigma_x == 0.0 {
            Regime::YDrivenIntensity
        } else {
            Regime::General
        }
    }

    pub(crate) fn rhs(&self, s: &[f64; 3]) -> [f64; 3] {
        let k = self.jump.kappa(s[1], s[2]);
        [
            self.m * k,
            0.5 * self.sigma_x * self.sigma_x * s[1] * s[1] + self.mu_x * k,
            0.5 * self.sigma_y * self.sigma_y * s[2] * s[2] + self.mu_y * k,
        ]
    }
}

/// Solution `(phi, psi_x, psi_y)` at `horizon` for terminal exponents `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformResult {
    pub phi: f64,
    pub psi_x: f64,
    pub psi_y: f64,
    pub horizon: f64,
    pub u: f64,
    pub v: f64,
}

impl TransformResult {
    /// `exp(phi + x psi_x + y psi_y)`.
    pub fn exp_affine(&self, x: f64, y: f64) -> f64 {
        libm::exp(self.phi + affine_term(x, self.psi_x) + affine_term(y, self.psi_y))
    }
}

/// `x * psi` with the conventions `0 * (-inf) = 0`.
#[inline]
pub(crate) fn affine_term(x: f64, psi: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * psi
    }
}

pub(crate) fn check_args(u: f64, v: f64, t: f64) -> Result<()> {
    if !(u <= 0.0) {
        return Err(invalid("u", "terminal exponent must be <= 0"));
    }
    if !(v <= 0.0) {
        return Err(invalid("v", "terminal exponent must be <= 0"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid("t", "horizon must be finite and >= 0"));
    }
    Ok(())
}

pub fn solve_riccati_numeric(p: &AjdParams, u: f64, v: f64, t: f64) -> Result<TransformResult> {
    solve_riccati_numeric_with(p, u, v, t, &OdeOptions::default())
}

pub fn solve_riccati_numeric_with(p: &AjdParams, u: f64, v: f64, t: f64, opts: &OdeOptions) -> Result<TransformResult> {
    p.validate()?;
    check_args(u, v, t)?;
    let [phi, psi_x, psi_y] = integrate(|s| p.rhs(s), [0.0, u, v], t, opts)?;
    Ok(TransformResult {
        phi,
        psi_x,
        psi_y,
        horizon: t,
        u,
        v,
    })
}

/// Closed form where one exists, adaptive integration otherwise.
pub fn solve_riccati(p: &AjdParams, u: f64, v: f64, t: f64) -> Result<TransformResult> {
    match solve_riccati_closed(p, u, v, t) {
        Err(Error::UnsupportedRegime) => solve_riccati_numeric(p, u, v, t),
        other => other,
    }
}
