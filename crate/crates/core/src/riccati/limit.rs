//! The `u -> -inf` limit of the transform, which turns
//! `E[exp(u X_T + v Y_T)]` into `E[exp(v Y_T) 1{X_T = 0}]`.

use alloc::vec::Vec;

use super::closed::{closed_form_supported, dirac_limit_integral, quadratic_flow, tanh_flow};
use super::{check_args, solve_riccati_numeric_with, AjdParams, JumpMeasure, Regime};
use crate::error::{Error, Result};
use crate::ode::OdeOptions;

/// Limit of `(phi, psi_x, psi_y)` as the `x` exponent tends to `-inf`.
///
/// `psi_x` is `-inf` when `X` cannot diffuse back to zero (`sigma_x = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformLimit {
    pub phi: f64,
    pub psi_x: f64,
    pub psi_y: f64,
    pub horizon: f64,
    pub v: f64,
}

impl TransformLimit {
    /// `E[exp(v Y_T) 1{X_T = 0} | X_t = x, Y_t = y]`.
    pub fn restricted_mass(&self, x: f64, y: f64) -> f64 {
        libm::exp(self.phi + super::affine_term(x, self.psi_x) + super::affine_term(y, self.psi_y))
    }
}

const MAX_DOUBLINGS: i32 = 40;
const MAX_COLUMNS: usize = 6;
const LIMIT_TOL: f64 = 1e-10;

/// `(phi_inf, psi_y_inf)`.
pub fn riccati_limit_u_to_neg_inf(p: &AjdParams, v: f64, t: f64) -> Result<(f64, f64)> {
    let l = riccati_limit(p, v, t)?;
    Ok((l.phi, l.psi_y))
}

pub fn riccati_limit(p: &AjdParams, v: f64, t: f64) -> Result<TransformLimit> {
    p.validate()?;
    check_args(0.0, v, t)?;
    if t == 0.0 {
        return Ok(TransformLimit {
            phi: 0.0,
            psi_x: f64::NEG_INFINITY,
            psi_y: v,
            horizon: 0.0,
            v,
        });
    }
    if closed_form_supported(p, v) {
        Ok(closed_limit(p, v, t))
    } else {
        numeric_limit(p, v, t)
    }
}

fn closed_limit(p: &AjdParams, v: f64, t: f64) -> TransformLimit {
    let s2 = p.sigma_x * p.sigma_x;
    let (phi, psi_x, psi_y) = match p.regime() {
        Regime::DeterministicIntensity => {
            let psi_x = if s2 > 0.0 { -2.0 / (s2 * t) } else { f64::NEG_INFINITY };
            let phi = match p.jump {
                JumpMeasure::ExpX { rate } => {
                    if s2 > 0.0 {
                        -(2.0 * p.m / (rate * s2)) * libm::log1p(0.5 * rate * s2 * t)
                    } else {
                        -p.m * t
                    }
                }
                JumpMeasure::DiracXY { jump_x, jump_y } => {
                    if s2 > 0.0 {
                        let c = if jump_y == 0.0 { 0.0 } else { jump_y * v };
                        p.m * (libm::exp(c) * dirac_limit_integral(2.0 * jump_x / s2, t) - t)
                    } else {
                        -p.m * t
                    }
                }
            };
            (phi, psi_x, quadratic_flow(p.sigma_y, v, t))
        }
        // kappa(u, .) -> -1 for both supported kernels
        Regime::YDrivenIntensity => (
            -p.m * t,
            f64::NEG_INFINITY,
            tanh_flow(0.5 * p.sigma_y * p.sigma_y, p.mu_y, v, t),
        ),
        Regime::General => unreachable!("guarded by closed_form_supported"),
    };
    TransformLimit {
        phi,
        psi_x,
        psi_y,
        horizon: t,
        v,
    }
}

/// Solves at `u = -2^k` and Richardson-extrapolates in `1/|u|` until two
/// successive extrapolants agree.
fn numeric_limit(p: &AjdParams, v: f64, t: f64) -> Result<TransformLimit> {
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..OdeOptions::default()
    };
    let track_x = p.sigma_x > 0.0;
    let mut prev_row: Vec<[f64; 3]> = Vec::new();
    let mut prev_best: Option<[f64; 3]> = None;
    let mut last_increment = f64::INFINITY;

    for k in 1..=MAX_DOUBLINGS {
        let u = -libm::ldexp(1.0, k);
        let r = match solve_riccati_numeric_with(p, u, v, t, &opts) {
            Ok(r) => r,
            Err(Error::BlowUp { .. }) | Err(Error::Convergence { .. }) => break,
            Err(e) => return Err(e),
        };
        let mut row: Vec<[f64; 3]> = Vec::with_capacity(MAX_COLUMNS + 1);
        row.push([r.phi, r.psi_x, r.psi_y]);
        for j in 1..=prev_row.len().min(MAX_COLUMNS) {
            let factor = libm::ldexp(1.0, j as i32) - 1.0;
            let mut next = [0.0; 3];
            for c in 0..3 {
                next[c] = row[j - 1][c] + (row[j - 1][c] - prev_row[j - 1][c]) / factor;
            }
            row.push(next);
        }
        let best = *row.last().expect("row is non-empty");
        if let Some(pb) = prev_best {
            let mut inc: f64 = 0.0;
            for c in 0..3 {
                if c == 1 && !track_x {
                    continue;
                }
                inc = inc.max((best[c] - pb[c]).abs() / best[c].abs().max(1.0));
            }
            last_increment = inc;
            if k >= 4 && inc < LIMIT_TOL {
                return Ok(TransformLimit {
                    phi: best[0],
                    psi_x: if track_x { best[1] } else { f64::NEG_INFINITY },
                    psi_y: best[2],
                    horizon: t,
                    v,
                });
            }
        }
        prev_best = Some(best);
        prev_row = row;
    }
    Err(Error::LimitNotConverged { last_increment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riccati::JumpMeasure;

    fn deterministic() -> AjdParams {
        AjdParams {
            sigma_x: 0.5,
            sigma_y: 0.4,
            m: 1.0,
            mu_x: 0.0,
            mu_y: 0.0,
            jump: JumpMeasure::ExpX { rate: 2.0 },
            x0: 0.0,
            y0: 0.2,
            h: 0.25,
        }
    }

    #[test]
    fn deterministic_intensity_limit() {
        let (phi, _) = riccati_limit_u_to_neg_inf(&deterministic(), 0.0, 1.0).unwrap();
        assert!((phi - 4.0 * libm::log(1.0 / 1.25)).abs() < 1e-14);
    }

    #[test]
    fn y_driven_limit_phi_is_minus_mt() {
        let p = AjdParams {
            sigma_x: 0.0,
            mu_y: 0.6,
            m: 0.7,
            ..deterministic()
        };
        let (phi, psi_y) = riccati_limit_u_to_neg_inf(&p, 0.0, 2.0).unwrap();
        assert_eq!(phi, -0.7 * 2.0);
        let expected = -libm::sqrt(2.0 * 0.6 / 0.16) * libm::tanh(2.0 * libm::sqrt(0.5 * 0.6 * 0.16));
        assert!((psi_y - expected).abs() < 1e-15);
    }

    #[test]
    fn numeric_limit_agrees_with_closed_limit() {
        // force the numeric path on a closed-form regime by comparing pieces
        let p = AjdParams {
            sigma_x: 0.0,
            mu_y: 0.6,
            ..deterministic()
        };
        let closed = closed_limit(&p, -0.3, 1.5);
        let numeric = numeric_limit(&p, -0.3, 1.5).unwrap();
        assert!(
            (closed.phi - numeric.phi).abs() < 1e-8,
            "{} {}",
            closed.phi,
            numeric.phi
        );
        assert!((closed.psi_y - numeric.psi_y).abs() < 1e-8);
        let q = deterministic();
        let closed = closed_limit(&q, 0.0, 1.0);
        let numeric = numeric_limit(&q, 0.0, 1.0).unwrap();
        assert!(
            (closed.phi - numeric.phi).abs() < 1e-8,
            "{} {}",
            closed.phi,
            numeric.phi
        );
        assert!((closed.psi_x - numeric.psi_x).abs() < 1e-8);
    }

    #[test]
    fn general_regime_limit_converges() {
        let p = AjdParams {
            mu_x: 0.3,
            mu_y: 0.5,
            ..deterministic()
        };
        let l = riccati_limit(&p, 0.0, 1.0).unwrap();
        assert!(l.phi < 0.0 && l.psi_y <= 0.0 && l.psi_x < 0.0);
        // atom mass cannot exceed the transform at any finite u
        let r = super::super::solve_riccati_numeric(&p, -50.0, 0.0, 1.0).unwrap();
        assert!(l.phi <= r.phi + 1e-12);
    }

    #[test]
    fn zero_horizon_limit_is_indicator() {
        let l = riccati_limit(&deterministic(), -0.4, 0.0).unwrap();
        assert_eq!(l.restricted_mass(0.0, 1.0), libm::exp(-0.4));
        assert_eq!(l.restricted_mass(0.1, 1.0), 0.0);
    }
}
