//! Coupon bonds, default probabilities, recovery given default and CDS spreads.
//!
//! Default is only checked on schedule dates: `tau = min{T_i : S_{T_i} < 1}`.
//! Discounting and the recovery driver are independent, so every
//! expectation factors into `P(0,T_i)` times a default-indicator moment.

use alloc::vec::Vec;

use crate::affine::{laplace, ProcessState};
use crate::curve::Curve;
use crate::error::{invalid, Error, Result};
use crate::riccati::{riccati_limit, solve_riccati, AjdParams, TransformLimit, TransformResult};

/// Payment dates `0 = T_0 < T_1 < ... < T_n` and an annual coupon rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PaymentSchedule {
    dates: Vec<f64>,
    coupon: f64,
}

impl PaymentSchedule {
    /// `dates` must start at 0; a leading 0 is inserted if missing.
    pub fn new(mut dates: Vec<f64>, coupon: f64) -> Result<Self> {
        if dates.first().is_none_or(|d| *d != 0.0) {
            dates.insert(0, 0.0);
        }
        if dates.len() < 2 {
            return Err(invalid("schedule.dates", "need at least one payment date"));
        }
        if dates.iter().any(|d| !d.is_finite()) || dates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(
                "schedule.dates",
                "must be finite and strictly increasing from 0",
            ));
        }
        if !(coupon.is_finite() && coupon >= 0.0) {
            return Err(invalid("schedule.coupon", "must be finite and >= 0"));
        }
        Ok(Self { dates, coupon })
    }

    /// `n` equal periods up to `maturity`.
    pub fn equidistant(maturity: f64, n: usize, coupon: f64) -> Result<Self> {
        if n == 0 || !(maturity.is_finite() && maturity > 0.0) {
            return Err(invalid("schedule", "need n >= 1 and a positive maturity"));
        }
        let step = maturity / n as f64;
        let mut dates: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        dates[n] = maturity;
        Self::new(dates, coupon)
    }

    /// All dates including `T_0 = 0`.
    pub fn dates(&self) -> &[f64] {
        &self.dates
    }

    /// `T_1, ..., T_n`.
    pub fn payment_dates(&self) -> &[f64] {
        &self.dates[1..]
    }

    pub fn coupon(&self) -> f64 {
        self.coupon
    }

    pub fn len(&self) -> usize {
        self.dates.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn maturity(&self) -> f64 {
        self.dates[self.dates.len() - 1]
    }

    /// `T_i - T_{i-1}` for `i = 1..n`.
    pub fn year_fractions(&self) -> impl Iterator<Item = f64> + '_ {
        self.dates.windows(2).map(|w| w[1] - w[0])
    }
}

/// `P(0,T_n) + c sum (T_i - T_{i-1}) P(0,T_i)`.
pub fn gov_bond_value(p: &Curve, sched: &PaymentSchedule) -> Result<f64> {
    let mut coupons = 0.0;
    if sched.coupon() != 0.0 {
        for (t, dt) in sched.payment_dates().iter().zip(sched.year_fractions()) {
            coupons += dt * p.value_in_range(*t)?;
        }
    }
    Ok(p.value_in_range(sched.maturity())? + sched.coupon() * coupons)
}

/// `P~(0,T_n) + c sum (T_i - T_{i-1}) (P~(0,T_i) + L(0,T_i))`.
pub fn corp_bond_value(pd: &Curve, illiquidity: &Curve, sched: &PaymentSchedule) -> Result<f64> {
    let mut coupons = 0.0;
    if sched.coupon() != 0.0 {
        for (t, dt) in sched.payment_dates().iter().zip(sched.year_fractions()) {
            coupons += dt * (pd.value_in_range(*t)? + illiquidity.value_in_range(*t)?);
        }
    }
    Ok(pd.value_in_range(sched.maturity())? + sched.coupon() * coupons)
}

/// Default-indicator moments on a payment schedule, indexed by `i = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CreditTermSheet {
    /// `Q[tau > T_i]`
    pub survival: Vec<f64>,
    /// `PD(0,T_i) = 1 - Q[tau > T_i]`
    pub pd: Vec<f64>,
    /// `E[S_{T_i} 1{tau = T_i}]`
    pub rgd: Vec<f64>,
}

impl CreditTermSheet {
    /// `Q[tau >= T_i] = Q[tau > T_{i-1}]`, with 1 for `i = 1`.
    pub fn alive_before(&self, i: usize) -> f64 {
        if i == 0 {
            1.0
        } else {
            self.survival[i - 1]
        }
    }

    /// `Q[tau = T_i]` for zero-based `i`.
    pub fn default_at(&self, i: usize) -> f64 {
        self.alive_before(i) - self.survival[i]
    }
}

/// Memo of Riccati solves keyed by horizon and `v` exponent.
#[derive(Default)]
struct SolveCache {
    limits: Vec<(u64, u64, TransformLimit)>,
    recoveries: Vec<(u64, TransformResult)>,
}

impl SolveCache {
    fn limit(&mut self, p: &AjdParams, v: f64, dt: f64) -> Result<TransformLimit> {
        let key = (dt.to_bits(), v.to_bits());
        if let Some((_, _, l)) = self.limits.iter().find(|(a, b, _)| (*a, *b) == key) {
            return Ok(*l);
        }
        let l = riccati_limit(p, v, dt)?;
        self.limits.push((key.0, key.1, l));
        Ok(l)
    }

    fn recovery(&mut self, p: &AjdParams, dt: f64) -> Result<TransformResult> {
        if let Some((_, r)) = self.recoveries.iter().find(|(a, _)| *a == dt.to_bits()) {
            return Ok(*r);
        }
        let r = solve_riccati(p, -1.0, 0.0, dt)?;
        self.recoveries.push((dt.to_bits(), r));
        Ok(r)
    }
}

/// `E[prod_{j<=i} 1{X_{T_j}=0} exp(w Y_{T_i})]` for `i >= 1` periods.
fn alive_with(
    cache: &mut SolveCache,
    p: &AjdParams,
    start: &ProcessState,
    dts: &[f64],
    i: usize,
    mut w: f64,
) -> Result<f64> {
    let mut log_acc = 0.0;
    for k in (1..i).rev() {
        let l = cache.limit(p, w, dts[k])?;
        log_acc += l.phi;
        w = l.psi_y;
    }
    let l = cache.limit(p, w, dts[0])?;
    Ok(libm::exp(log_acc) * l.restricted_mass(start.x, start.y))
}

/// Survival probabilities, PDs and recoveries given default for the recovery
/// driver started at `(x0, p.y0)`.
///
/// The indicator products are evaluated backwards through restricted atom
/// transforms, so a stochastic intensity (`mu_y > 0`) needs no product formula.
pub fn credit_term_sheet(p: &AjdParams, x0: f64, sched: &PaymentSchedule) -> Result<CreditTermSheet> {
    p.validate()?;
    let start = ProcessState::new(x0, p.y0, 0.0)?;
    let dts: Vec<f64> = sched.year_fractions().collect();
    let n = dts.len();
    let mut cache = SolveCache::default();

    let mut survival = Vec::with_capacity(n);
    for i in 1..=n {
        survival.push(alive_with(&mut cache, p, &start, &dts, i, 0.0)?);
    }
    let mut rgd = Vec::with_capacity(n);
    for i in 1..=n {
        let recovered = if i == 1 {
            laplace(p, &start, sched.dates()[1], -1.0, 0.0)?
        } else {
            let r = cache.recovery(p, dts[i - 1])?;
            libm::exp(r.phi) * alive_with(&mut cache, p, &start, &dts, i - 1, r.psi_y)?
        };
        // differences of equal quantities can round below zero
        rgd.push((recovered - survival[i - 1]).max(0.0));
    }
    let pd = survival.iter().map(|s| 1.0 - s).collect();
    Ok(CreditTermSheet { survival, pd, rgd })
}

/// Present values `(premium leg per unit spread, protection leg)`.
pub fn cds_legs(discount: &Curve, sheet: &CreditTermSheet, sched: &PaymentSchedule) -> Result<(f64, f64)> {
    let mut annuity = 0.0;
    let mut protection = 0.0;
    for (i, (t, dt)) in sched.payment_dates().iter().zip(sched.year_fractions()).enumerate() {
        let df = discount.value_in_range(*t)?;
        annuity += dt * df * sheet.alive_before(i);
        protection += df * (sheet.default_at(i) - sheet.rgd[i]);
    }
    Ok((annuity, protection))
}

/// Fair CDS spread: protection-leg PV over the premium annuity.
pub fn cds_spread(discount: &Curve, p: &AjdParams, x0: f64, sched: &PaymentSchedule) -> Result<f64> {
    let sheet = credit_term_sheet(p, x0, sched)?;
    let (annuity, protection) = cds_legs(discount, &sheet, sched)?;
    if !(annuity > 0.0) {
        return Err(Error::DegenerateAnnuity);
    }
    Ok(protection / annuity)
}

/// `(1 - F(0,dt)) / dt`, the spread of an equidistant schedule with period
/// `dt` when the driver starts at zero.
pub fn cds_spread_from_recovery(period_recovery: f64, dt: f64) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("period", "must be finite and > 0"));
    }
    if !(period_recovery > 0.0 && period_recovery <= 1.0) {
        return Err(invalid("recovery", "must lie in (0, 1]"));
    }
    Ok((1.0 - period_recovery) / dt)
}
