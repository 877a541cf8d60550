//! Forward recovery rates and the curve algebra of the FX analogy
//! (`P~ = F P`, foreign forward rate = domestic forward rate + credit spread).

use alloc::vec::Vec;

use crate::affine::{laplace, restricted_atom_transform, ProcessState};
use crate::curve::{Curve, CurveKind, TENOR_EPS};
use crate::error::{Error, Result};
use crate::riccati::{riccati_limit, solve_riccati, AjdParams};

/// `F(t,T) = E[1{X_T = 0} + exp(-X_{T+h}) 1{X_T > 0} | state]` with the
/// observation delay `h = p.h`.
pub fn forward_recovery_delayed(p: &AjdParams, s: &ProcessState, maturity: f64) -> Result<f64> {
    s.horizon_to(maturity)?;
    let d = solve_riccati(p, -1.0, 0.0, p.h)?;
    let scale = libm::exp(d.phi);
    let atom = restricted_atom_transform(p, s, maturity, 0.0)?;
    let minuend = laplace(p, s, maturity, d.psi_x, d.psi_y)?;
    let subtrahend = restricted_atom_transform(p, s, maturity, d.psi_y)?;
    Ok(atom + scale * (minuend - subtrahend))
}

/// `F(0,T) = E[exp(-X_T)]` started from `(x0, p.y0)`.
pub fn forward_recovery_simple(p: &AjdParams, x0: f64, maturity: f64) -> Result<f64> {
    let s = ProcessState::new(x0, p.y0, 0.0)?;
    laplace(p, &s, maturity, -1.0, 0.0)
}

/// Two-date delayed payoff
/// `1{X_{T1+h}=0} (1{X_{T2}=0} + e^{-X_{T2+h}} 1{X_{T2}>0}) + e^{-X_{T1+h}} 1{X_{T1}>0} 1{X_{T1+h}>0}`
/// for `t <= T1 < T1 + h <= T2`.
pub fn cascaded_value(p: &AjdParams, s: &ProcessState, t1: f64, t2: f64) -> Result<f64> {
    s.horizon_to(t1)?;
    p.validate()?;
    let t1h = t1 + p.h;
    if !(t2.is_finite() && t2 >= t1h) {
        return Err(Error::Ordering("cascaded value needs T1 + h <= T2"));
    }
    let tau = t2 - t1h;
    let d = solve_riccati(p, -1.0, 0.0, p.h)?;
    let e_h = libm::exp(d.phi);

    // Value at T1 + h of the T2 payoff given X_{T1+h} = 0: sum of c exp(q y).
    let atom2 = riccati_limit(p, 0.0, tau)?;
    let minuend2 = solve_riccati(p, d.psi_x, d.psi_y, tau)?;
    let sub2 = riccati_limit(p, d.psi_y, tau)?;
    let inner = [
        (libm::exp(atom2.phi), atom2.psi_y),
        (e_h * libm::exp(minuend2.phi), minuend2.psi_y),
        (-e_h * libm::exp(sub2.phi), sub2.psi_y),
    ];
    let mut first = 0.0;
    for (c, q) in inner {
        first += c * restricted_atom_transform(p, s, t1h, q)?;
    }

    // E[e^{-X_{T1+h}} 1{X_{T1}>0}] - E[1{X_{T1+h}=0} 1{X_{T1}>0}]
    let stay = riccati_limit(p, 0.0, p.h)?;
    let decayed = laplace(p, s, t1h, -1.0, 0.0)? - e_h * restricted_atom_transform(p, s, t1, d.psi_y)?;
    let healed = restricted_atom_transform(p, s, t1h, 0.0)?
        - libm::exp(stay.phi) * restricted_atom_transform(p, s, t1, stay.psi_y)?;
    Ok(first + decayed - healed)
}

/// Tenors of both curves inside their common range.
fn common_grid(a: &Curve, b: &Curve) -> Result<Vec<f64>> {
    let lo = a.first_tenor().max(b.first_tenor());
    let hi = a.last_tenor().min(b.last_tenor());
    if lo > hi + TENOR_EPS {
        return Err(Error::TenorRangeMismatch);
    }
    let mut grid: Vec<f64> = a
        .tenors()
        .iter()
        .chain(b.tenors())
        .copied()
        .filter(|&t| t >= lo - TENOR_EPS && t <= hi + TENOR_EPS)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() <= TENOR_EPS);
    Ok(grid)
}

/// Quotient `a / b`, nudged by at most a few ulps so that multiplying back
/// by `b` returns `a` exactly whenever such a float exists.
fn exact_quotient(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q * b == a {
        return q;
    }
    let (mut up, mut down) = (q, q);
    for _ in 0..4 {
        up = libm::nextafter(up, f64::INFINITY);
        down = libm::nextafter(down, f64::NEG_INFINITY);
        if up * b == a {
            return up;
        }
        if down * b == a {
            return down;
        }
    }
    q
}

/// `F(0,T) = P~(0,T) / P(0,T)` on the union of both grids within their
/// common range.
pub fn curve_forward_recovery(pt: &Curve, pd: &Curve) -> Result<Curve> {
    let grid = common_grid(pt, pd)?;
    let mut values = Vec::with_capacity(grid.len());
    for &t in &grid {
        values.push(exact_quotient(pd.value_in_range(t)?, pt.value_in_range(t)?));
    }
    Curve::new(grid, values, CurveKind::Recovery)
}

/// `-d/dT log c(T)` on the curve's own grid: three-point central differences
/// inside, second-order one-sided differences at the ends (plain difference
/// quotient for a two-point grid).
pub fn curve_rates(c: &Curve) -> Result<Curve> {
    let n = c.len();
    if n < 2 {
        return Err(Error::TooFewTenors { required: 2, got: n });
    }
    if c.values().iter().any(|v| *v <= 0.0) {
        return Err(crate::error::invalid(
            "curve.values",
            "rates need positive curve values",
        ));
    }
    let t = c.tenors();
    let l: Vec<f64> = c.values().iter().map(|v| libm::log(*v)).collect();
    let mut rates = Vec::with_capacity(n);
    if n == 2 {
        let r = -(l[1] - l[0]) / (t[1] - t[0]);
        rates.extend([r, r]);
    } else {
        for i in 0..n {
            let (a, b, cc, ia) = if i == 0 {
                (0, 1, 2, 0)
            } else if i == n - 1 {
                (n - 3, n - 2, n - 1, 2)
            } else {
                (i - 1, i, i + 1, 1)
            };
            rates.push(-three_point_derivative([t[a], t[b], t[cc]], [l[a], l[b], l[cc]], ia));
        }
    }
    Curve::new(t.to_vec(), rates, CurveKind::Rate)
}

/// Derivative at node `at` of the quadratic through three points.
fn three_point_derivative(x: [f64; 3], y: [f64; 3], at: usize) -> f64 {
    let s = x[at];
    let mut d = 0.0;
    for j in 0..3 {
        // derivative of the j-th Lagrange basis polynomial at s
        let (k, m) = ((j + 1) % 3, (j + 2) % 3);
        let den = (x[j] - x[k]) * (x[j] - x[m]);
        d += y[j] * ((s - x[k]) + (s - x[m])) / den;
    }
    d
}
