//! Conditional transforms of the recovery driver and CIR++ discounting.

use crate::error::{invalid, Error, Result};
use crate::riccati::{riccati_limit, solve_riccati, AjdParams};

/// Current state `(X_t, Y_t)` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessState {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl ProcessState {
    pub fn new(x: f64, y: f64, t: f64) -> Result<Self> {
        let s = Self { x, y, t };
        s.validate()?;
        Ok(s)
    }

    /// Initial state `(x0, y0)` at time 0.
    pub fn initial(p: &AjdParams) -> Self {
        Self {
            x: p.x0,
            y: p.y0,
            t: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.x >= 0.0) {
            return Err(invalid("state.x", "must be finite and >= 0"));
        }
        if !(self.y.is_finite() && self.y >= 0.0) {
            return Err(invalid("state.y", "must be finite and >= 0"));
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(invalid("state.t", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub(crate) fn horizon_to(&self, maturity: f64) -> Result<f64> {
        self.validate()?;
        if !(maturity.is_finite() && maturity >= self.t) {
            return Err(Error::Ordering("maturity must not precede the state time"));
        }
        Ok(maturity - self.t)
    }
}

/// `E[exp(u X_T + v Y_T) | state]` for `u, v <= 0`.
pub fn laplace(p: &AjdParams, s: &ProcessState, maturity: f64, u: f64, v: f64) -> Result<f64> {
    let tau = s.horizon_to(maturity)?;
    Ok(solve_riccati(p, u, v, tau)?.exp_affine(s.x, s.y))
}

/// `E[exp(v Y_T) 1{X_T = 0} | state]`, the transform restricted to the atom.
pub fn restricted_atom_transform(p: &AjdParams, s: &ProcessState, maturity: f64, v: f64) -> Result<f64> {
    let tau = s.horizon_to(maturity)?;
    Ok(riccati_limit(p, v, tau)?.restricted_mass(s.x, s.y))
}

/// `Q[X_T = 0 | state]`, the probability of full recovery at `maturity`.
pub fn atom_mass_zero(p: &AjdParams, s: &ProcessState, maturity: f64) -> Result<f64> {
    restricted_atom_transform(p, s, maturity, 0.0)
}

/// Three-function basis for the deterministic CIR++ shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftBasis {
    /// `{1, t, exp(-t)}`
    #[default]
    LevelSlopeDecay,
    /// `{1, t, t^2}`
    Quadratic,
}

/// `phi(t) = f1 phi_1(t) + f2 phi_2(t) + f3 phi_3(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShiftFunction {
    pub coeffs: [f64; 3],
    pub basis: ShiftBasis,
}

impl ShiftFunction {
    pub fn constant(level: f64) -> Self {
        Self {
            coeffs: [level, 0.0, 0.0],
            basis: ShiftBasis::LevelSlopeDecay,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let [f1, f2, f3] = self.coeffs;
        let third = match self.basis {
            ShiftBasis::LevelSlopeDecay => libm::exp(-t),
            ShiftBasis::Quadratic => t * t,
        };
        f1 + f2 * t + f3 * third
    }

    /// `int_0^t phi(s) ds`, analytically.
    pub fn integral(&self, t: f64) -> f64 {
        let [f1, f2, f3] = self.coeffs;
        let third = match self.basis {
            ShiftBasis::LevelSlopeDecay => -libm::expm1(-t),
            ShiftBasis::Quadratic => t * t * t / 3.0,
        };
        f1 * t + f2 * 0.5 * t * t + f3 * third
    }
}

/// CIR++ short rate `r_t = x_t + phi(t)`, `dx = (b_x - beta_x x) dt + sigma_x sqrt(x) dW`,
/// started from the short rate `r0` (so `x_0 = r0 - phi(0)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirPpParams {
    pub r0: f64,
    pub b_x: f64,
    pub beta_x: f64,
    pub sigma_x: f64,
    pub shift: ShiftFunction,
}

impl CirPpParams {
    pub fn validate(&self) -> Result<()> {
        if !self.r0.is_finite() {
            return Err(invalid("r0", "must be finite"));
        }
        for (name, v) in [("b_x", self.b_x), ("beta_x", self.beta_x), ("sigma_x", self.sigma_x)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, "must be finite and > 0"));
            }
        }
        if 2.0 * self.b_x < self.sigma_x * self.sigma_x {
            return Err(invalid("sigma_x", "Feller condition 2 b_x >= sigma_x^2 violated"));
        }
        if self.shift.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("shift", "coefficients must be finite"));
        }
        Ok(())
    }

    /// Initial value of the CIR factor.
    pub fn x0(&self) -> f64 {
        self.r0 - self.shift.value(0.0)
    }

    fn lambda(&self) -> f64 {
        libm::sqrt(self.beta_x * self.beta_x + 2.0 * self.sigma_x * self.sigma_x)
    }

    /// `(A(0,T), B(0,T))` with `P(0,T) = exp(-A - B r0)`.
    pub fn bond_coefficients(&self, maturity: f64) -> Result<(f64, f64)> {
        self.validate()?;
        if !(maturity.is_finite() && maturity >= 0.0) {
            return Err(invalid("maturity", "must be finite and >= 0"));
        }
        if maturity == 0.0 {
            return Ok((0.0, 0.0));
        }
        let t = maturity;
        let lam = self.lambda();
        let lb = lam + self.beta_x;
        let lt = lam * t;
        // B = 2 (e^{lt} - 1) / (lb (e^{lt} - 1) + 2 lam), and log of that denominator
        let (b, log_den) = if lt < 50.0 {
            let em1 = libm::expm1(lt);
            let den = lb * em1 + 2.0 * lam;
            (2.0 * em1 / den, libm::log(den))
        } else {
            let e = libm::exp(-lt);
            let den_scaled = lb * (1.0 - e) + 2.0 * lam * e;
            (2.0 * (1.0 - e) / den_scaled, lt + libm::log(den_scaled))
        };
        let log_ratio = libm::log(2.0 * lam) + 0.5 * lb * t - log_den;
        let a = -(2.0 * self.b_x / (self.sigma_x * self.sigma_x)) * log_ratio - self.shift.value(0.0) * b
            + self.shift.integral(t);
        Ok((a, b))
    }
}

/// Zero-coupon price `P(0,T)` under CIR++.
pub fn cir_pp_bond(c: &CirPpParams, maturity: f64) -> Result<f64> {
    let (a, b) = c.bond_coefficients(maturity)?;
    Ok(libm::exp(-a - b * c.r0))
}
