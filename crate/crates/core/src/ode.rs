//! Embedded Dormand–Prince 5(4) integrator for small autonomous-in-form
//! systems with fixed dimension.

use crate::error::{Error, Result};

/// Step-control settings for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Any accepted state component above this magnitude is a blow-up.
    pub blow_up: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
            blow_up: 1e12,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (coef, k) in terms {
        if *coef == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * coef * k[i];
        }
    }
    out
}

fn scaled_norm<const N: usize>(v: &[f64; N], y: &[f64; N], y_new: &[f64; N], o: &OdeOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y[i].abs().max(y_new[i].abs());
        let r = v[i] / sc;
        acc += r * r;
    }
    libm::sqrt(acc / N as f64)
}

fn initial_step<const N: usize, F>(rhs: &mut F, y0: &[f64; N], f0: &[f64; N], span: f64, o: &OdeOptions) -> f64
where
    F: FnMut(&[f64; N]) -> [f64; N],
{
    let d0 = scaled_norm(y0, y0, y0, o);
    let d1 = scaled_norm(f0, y0, y0, o);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = combine(y0, h0, &[(1.0, f0)]);
    let f1 = rhs(&y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = scaled_norm(&diff, y0, y0, o) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        libm::pow(0.01 / d1.max(d2), 0.2)
    };
    let h = (100.0 * h0).min(h1).min(span);
    if h.is_finite() && h > 0.0 {
        h
    } else {
        span * 1e-6
    }
}

/// Integrates `y' = rhs(y)` from 0 to `t_end` and returns the final state.
///
/// Trial stages that produce non-finite values are treated as rejected steps;
/// only accepted states are checked against the blow-up bound.
pub fn integrate<const N: usize, F>(mut rhs: F, y0: [f64; N], t_end: f64, o: &OdeOptions) -> Result<[f64; N]>
where
    F: FnMut(&[f64; N]) -> [f64; N],
{
    if t_end == 0.0 {
        return Ok(y0);
    }
    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = rhs(&y);
    if k1.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { time: 0.0 });
    }
    let mut h = initial_step(&mut rhs, &y, &k1, t_end, o);
    let mut rejected_last = false;

    for _ in 0..o.max_steps {
        let remaining = t_end - t;
        if remaining <= 0.0 {
            return Ok(y);
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1e-300) {
            return Err(Error::Convergence {
                time: t,
                reason: "step size underflow",
            });
        }

        let k2 = rhs(&combine(&y, h, &[(A21, &k1)]));
        let k3 = rhs(&combine(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(&combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(&combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rhs(&combine(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let y_new = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(&y_new);

        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = scaled_norm(&err, &y, &y_new, o);
        let finite = en.is_finite() && y_new.iter().all(|v| v.is_finite()) && k7.iter().all(|v| v.is_finite());

        if finite && en <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y_new;
            k1 = k7;
            if y.iter().any(|v| v.abs() > o.blow_up) {
                return Err(Error::BlowUp { time: t });
            }
            let mut fac = if en == 0.0 { 5.0 } else { 0.9 * libm::pow(en, -0.2) };
            fac = fac.clamp(0.2, 5.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h *= fac;
            rejected_last = false;
            if last {
                return Ok(y);
            }
        } else {
            let fac = if finite {
                (0.9 * libm::pow(en, -0.2)).clamp(0.1, 0.9)
            } else {
                0.2
            };
            h *= fac;
            rejected_last = true;
        }
    }
    Err(Error::Convergence {
        time: t,
        reason: "maximum number of steps exceeded",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y = integrate(|y: &[f64; 1]| [-y[0]], [1.0], 3.0, &OdeOptions::default()).unwrap();
        assert!((y[0] - libm::exp(-3.0)).abs() < 1e-10);
    }

    #[test]
    fn riccati_pole_is_reported_as_blow_up() {
        // y' = y^2, y(0) = 1 explodes at t = 1
        let err = integrate(|y: &[f64; 1]| [y[0] * y[0]], [1.0], 2.0, &OdeOptions::default()).unwrap_err();
        match err {
            Error::BlowUp { time } => assert!(time < 1.0 && time > 0.99),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let y = integrate(|_: &[f64; 2]| [1.0, 1.0], [0.5, -0.25], 0.0, &OdeOptions::default()).unwrap();
        assert_eq!(y, [0.5, -0.25]);
    }

    #[test]
    fn step_budget_exhaustion() {
        let o = OdeOptions {
            max_steps: 3,
            ..OdeOptions::default()
        };
        let err = integrate(|y: &[f64; 1]| [libm::cos(50.0 * y[0]) * 40.0], [0.0], 10.0, &o).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }
}
