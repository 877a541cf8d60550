//! Levenberg–Marquardt fit of the CIR++ and one-factor recovery parameters
//! to the log discount and log forward-recovery curves.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::affine::{cir_pp_bond, CirPpParams, ShiftFunction};
use crate::curve::Curve;
use crate::error::{invalid, Error, Result};
use crate::recovery::forward_recovery_simple;
use crate::riccati::{AjdParams, JumpMeasure};

/// One-factor recovery driver: deterministic intensity `m`, exponential
/// jumps with rate `lambda_x`, diffusion `sigma_x`, started at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryParams {
    pub lambda_x: f64,
    pub m: f64,
    pub sigma_x: f64,
}

impl RecoveryParams {
    pub fn ajd(&self) -> AjdParams {
        AjdParams {
            sigma_x: self.sigma_x,
            sigma_y: 0.0,
            m: self.m,
            mu_x: 0.0,
            mu_y: 0.0,
            jump: JumpMeasure::ExpX { rate: self.lambda_x },
            x0: 0.0,
            y0: 0.0,
            h: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    pub cir: CirPpParams,
    pub recovery: RecoveryParams,
}

pub const PARAM_NAMES: [&str; 10] = [
    "r0", "b_x", "beta_x", "sigma_r", "lambda_x", "m_x", "sigma_x", "f1", "f2", "f3",
];

impl FitParams {
    pub fn to_array(&self) -> [f64; 10] {
        let c = &self.cir;
        let r = &self.recovery;
        let [f1, f2, f3] = c.shift.coeffs;
        [c.r0, c.b_x, c.beta_x, c.sigma_x, r.lambda_x, r.m, r.sigma_x, f1, f2, f3]
    }

    /// Inverse of [`to_array`](Self::to_array); the shift basis is kept from `self`.
    pub fn with_array(&self, a: &[f64; 10]) -> Self {
        Self {
            cir: CirPpParams {
                r0: a[0],
                b_x: a[1],
                beta_x: a[2],
                sigma_x: a[3],
                shift: ShiftFunction {
                    coeffs: [a[7], a[8], a[9]],
                    basis: self.cir.shift.basis,
                },
            },
            recovery: RecoveryParams {
                lambda_x: a[4],
                m: a[5],
                sigma_x: a[6],
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cir.validate()?;
        self.recovery.ajd().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative step size below which the search stops.
    pub step_tol: f64,
    /// Parameters held at their initial value, in [`PARAM_NAMES`] order.
    pub fixed: [bool; 10],
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            step_tol: 1e-14,
            fixed: [false; 10],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub params: FitParams,
    /// `log P_model - log P` per tenor, then `log F_model - log F` per tenor.
    pub residuals: Vec<f64>,
    pub tenors: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

struct Targets {
    tenors: Vec<f64>,
    log_p: Vec<f64>,
    log_f: Vec<f64>,
}

fn targets(discount: &Curve, defaultable: &Curve) -> Result<Targets> {
    let mut tenors = Vec::new();
    let mut log_p = Vec::new();
    let mut log_f = Vec::new();
    for &t in discount.tenors() {
        if t <= 0.0 || t > defaultable.last_tenor() || t < defaultable.first_tenor() {
            continue;
        }
        let p = discount.value(t)?;
        let pd = defaultable.value(t)?;
        tenors.push(t);
        log_p.push(libm::log(p));
        log_f.push(libm::log(pd / p));
    }
    if tenors.is_empty() {
        return Err(Error::TenorRangeMismatch);
    }
    Ok(Targets { tenors, log_p, log_f })
}

fn residuals(params: &FitParams, tg: &Targets) -> Result<Vec<f64>> {
    params.validate()?;
    let ajd = params.recovery.ajd();
    let n = tg.tenors.len();
    let mut r = Vec::with_capacity(2 * n);
    for (i, &t) in tg.tenors.iter().enumerate() {
        r.push(libm::log(cir_pp_bond(&params.cir, t)?) - tg.log_p[i]);
    }
    for (i, &t) in tg.tenors.iter().enumerate() {
        r.push(libm::log(forward_recovery_simple(&ajd, 0.0, t)?) - tg.log_f[i]);
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(invalid("fit", "non-finite model value"));
    }
    Ok(r)
}

fn sq_norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

const FLOOR: f64 = 1e-10;

/// Moves `x` onto the positivity and Feller constraints.
fn project(x: &mut [f64; 10], fixed: &[bool; 10]) {
    for i in [1, 2, 3, 4, 5] {
        if !fixed[i] {
            x[i] = x[i].max(FLOOR);
        }
    }
    if !fixed[6] {
        x[6] = x[6].max(0.0);
    }
    if !fixed[3] {
        x[3] = x[3].min(libm::sqrt(2.0 * x[1]));
    }
}

/// Whether parameter `i` sits on a bound that the descent direction `-g` points through.
fn blocked(x: &[f64; 10], i: usize, g: f64) -> bool {
    match i {
        1 | 2 | 4 | 5 => x[i] <= FLOOR && g > 0.0,
        3 => (x[3] <= FLOOR && g > 0.0) || (x[3] >= libm::sqrt(2.0 * x[1]) && g < 0.0),
        6 => x[6] <= 0.0 && g > 0.0,
        _ => false,
    }
}

/// Minimises the squared log-curve residuals over the non-fixed parameters.
///
/// Trial points are projected onto the positivity and Feller constraints;
/// parameters held on a bound by the gradient drop out of the step.
pub fn fit_parameters(discount: &Curve, defaultable: &Curve, init: &FitParams, opts: &FitOptions) -> Result<FitReport> {
    init.validate()?;
    let tg = targets(discount, defaultable)?;
    let free: Vec<usize> = (0..10).filter(|i| !opts.fixed[*i]).collect();
    let mut x = init.to_array();
    let mut r = residuals(init, &tg)?;
    let mut cost = sq_norm(&r);
    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut converged = cost == 0.0 || free.is_empty();

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let jac = jacobian(init, &x, &free, &tg, &r)?;
        let jtj = jac.tr_mul(&jac);
        let g = jac.tr_mul(&DVector::from_column_slice(&r));
        let mut jtj = jtj;
        let mut g = g;
        for (k, &i) in free.iter().enumerate() {
            if blocked(&x, i, g[k]) {
                jtj.row_mut(k).fill(0.0);
                jtj.column_mut(k).fill(0.0);
                jtj[(k, k)] = 1.0;
                g[k] = 0.0;
            }
        }
        if g.amax() <= 1e-15 * cost.max(1e-300).sqrt() {
            converged = true;
            break;
        }
        let mut improved = false;
        while mu < 1e20 {
            let mut lhs = jtj.clone();
            for i in 0..free.len() {
                lhs[(i, i)] += mu * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = lhs.cholesky().map(|c| c.solve(&(-&g))) else {
                mu *= 10.0;
                continue;
            };
            let mut trial = x;
            for (k, &i) in free.iter().enumerate() {
                trial[i] += step[k];
            }
            project(&mut trial, &opts.fixed);
            let small = free
                .iter()
                .all(|&i| (trial[i] - x[i]).abs() <= opts.step_tol * (x[i].abs() + opts.step_tol));
            match residuals(&init.with_array(&trial), &tg) {
                Ok(rt) if sq_norm(&rt) < cost => {
                    let new_cost = sq_norm(&rt);
                    let rel = (cost - new_cost) / cost;
                    x = trial;
                    r = rt;
                    cost = new_cost;
                    mu = (mu / 3.0).max(1e-12);
                    improved = true;
                    if small || rel < 1e-15 || cost == 0.0 {
                        converged = true;
                    }
                    break;
                }
                _ => {
                    if small {
                        converged = true;
                        break;
                    }
                    mu *= 4.0;
                }
            }
        }
        if !improved && !converged {
            // damping exhausted: no descent direction at working precision
            converged = true;
        }
    }
    if !converged {
        return Err(Error::FitNotConverged {
            iterations,
            residual_norm: cost.sqrt(),
            best: x,
        });
    }
    Ok(FitReport {
        params: init.with_array(&x),
        residual_norm: cost.sqrt(),
        residuals: r,
        tenors: tg.tenors,
        iterations,
    })
}

/// Central differences where both neighbours are admissible, one-sided otherwise.
fn jacobian(base: &FitParams, x: &[f64; 10], free: &[usize], tg: &Targets, r0: &[f64]) -> Result<DMatrix<f64>> {
    let mut jac = DMatrix::<f64>::zeros(r0.len(), free.len());
    for (k, &i) in free.iter().enumerate() {
        let h = 1e-6 * x[i].abs().max(1e-4);
        let eval = |d: f64| {
            let mut y = *x;
            y[i] += d;
            residuals(&base.with_array(&y), tg).ok()
        };
        let (col, span): (Vec<f64>, f64) = match (eval(h), eval(-h)) {
            (Some(up), Some(dn)) => (up.iter().zip(&dn).map(|(a, b)| a - b).collect(), 2.0 * h),
            (Some(up), None) => (up.iter().zip(r0).map(|(a, b)| a - b).collect(), h),
            (None, Some(dn)) => (r0.iter().zip(&dn).map(|(a, b)| a - b).collect(), h),
            (None, None) => return Err(invalid(PARAM_NAMES[i], "no admissible finite-difference step")),
        };
        for (row, v) in col.iter().enumerate() {
            jac[(row, k)] = v / span;
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::ShiftBasis;
    use crate::curve::CurveKind;

    fn truth() -> FitParams {
        FitParams {
            cir: CirPpParams {
                r0: 0.025,
                b_x: 0.03,
                beta_x: 0.6,
                sigma_x: 0.08,
                shift: ShiftFunction {
                    coeffs: [0.004, 0.0005, -0.002],
                    basis: ShiftBasis::LevelSlopeDecay,
                },
            },
            recovery: RecoveryParams {
                lambda_x: 3.0,
                m: 0.05,
                sigma_x: 0.4,
            },
        }
    }

    fn curves(p: &FitParams) -> (Curve, Curve) {
        let grid: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
        let pv: Vec<f64> = grid.iter().map(|t| cir_pp_bond(&p.cir, *t).unwrap()).collect();
        let ajd = p.recovery.ajd();
        let pd: Vec<f64> = grid
            .iter()
            .zip(&pv)
            .map(|(t, v)| v * forward_recovery_simple(&ajd, 0.0, *t).unwrap())
            .collect();
        (
            Curve::new(grid.clone(), pv, CurveKind::Discount).unwrap(),
            Curve::new(grid, pd, CurveKind::Discount).unwrap(),
        )
    }

    #[test]
    fn exact_start_stays_put() {
        let p = truth();
        let (c, d) = curves(&p);
        let rep = fit_parameters(&c, &d, &p, &FitOptions::default()).unwrap();
        assert!(rep.residual_norm < 1e-12);
        for (a, b) in rep.params.to_array().iter().zip(p.to_array()) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn recovers_forward_recovery_curve_from_perturbed_start() {
        let p = truth();
        let (c, d) = curves(&p);
        let mut a = p.to_array();
        for (i, v) in a.iter_mut().enumerate() {
            *v *= if i % 2 == 0 { 1.2 } else { 0.8 };
        }
        let init = p.with_array(&a);
        let rep = fit_parameters(&c, &d, &init, &FitOptions::default()).unwrap();
        let fitted = rep.params.recovery.ajd();
        let ajd = p.recovery.ajd();
        for t in c.tenors() {
            let want = forward_recovery_simple(&ajd, 0.0, *t).unwrap();
            let got = forward_recovery_simple(&fitted, 0.0, *t).unwrap();
            assert!((want - got).abs() < 1e-6, "t={t}: {want} vs {got}");
        }
    }

    #[test]
    fn truth_on_a_bound_is_reached() {
        let mut p = truth();
        p.recovery.sigma_x = 0.0;
        let (c, d) = curves(&p);
        let mut init = p;
        init.recovery.sigma_x = 0.3;
        init.recovery.m = 0.2;
        let rep = fit_parameters(&c, &d, &init, &FitOptions::default()).unwrap();
        assert!(rep.residual_norm < 1e-6, "{}", rep.residual_norm);
        assert!(rep.params.recovery.sigma_x >= 0.0);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let mut p = truth();
        p.cir.sigma_x = 1.0;
        let (c, d) = curves(&truth());
        assert!(fit_parameters(&c, &d, &p, &FitOptions::default()).is_err());
    }
}
