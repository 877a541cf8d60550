//! Non-parametric bootstrap of the government, defaultable and illiquidity
//! curves from market quotes, plus a parametric least-squares fit.
//!
//! 1. government bonds give `P(0,T)` by linear least squares;
//! 2. CDS spreads give `F(0,T)` and `P~ = F P`;
//! 3. corporate bonds give `L(0,T)` by linear least squares in the coupon terms.

mod fit;

pub use fit::{fit_parameters, FitOptions, FitParams, FitReport, RecoveryParams, PARAM_NAMES};

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::curve::{Curve, CurveKind};
use crate::error::{invalid, Error, Result};
use crate::products::cds_spread_from_recovery;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondKind {
    Government,
    Corporate,
}

/// Observed dirty price of a fixed-coupon bond paying `frequency` times a
/// year, with the first period possibly short.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondQuote {
    pub kind: BondKind,
    pub maturity: f64,
    pub coupon: f64,
    pub price: f64,
    pub frequency: f64,
}

impl BondQuote {
    pub fn validate(&self) -> Result<()> {
        if !(self.maturity.is_finite() && self.maturity > 0.0) {
            return Err(invalid("quote.maturity", "must be finite and > 0"));
        }
        if !(self.price.is_finite() && self.price > 0.0) {
            return Err(invalid("quote.price", "must be finite and > 0"));
        }
        if !(self.coupon.is_finite() && self.coupon >= 0.0) {
            return Err(invalid("quote.coupon", "must be finite and >= 0"));
        }
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(invalid("quote.frequency", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Coupon dates in increasing order, ending at maturity.
    pub fn cashflow_dates(&self, tol: f64) -> Vec<f64> {
        let step = 1.0 / self.frequency;
        let mut dates = Vec::new();
        let mut k = 0.0;
        loop {
            let d = self.maturity - k * step;
            if d <= tol {
                break;
            }
            dates.push(d);
            k += 1.0;
        }
        dates.reverse();
        dates
    }
}

/// Par CDS spread on a schedule with `frequency` payments a year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdsQuote {
    pub maturity: f64,
    pub spread: f64,
    pub frequency: f64,
}

impl CdsQuote {
    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.maturity.is_finite() && self.maturity > 0.0) {
            return Err(invalid("quote.maturity", "must be finite and > 0"));
        }
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(invalid("quote.frequency", "must be finite and > 0"));
        }
        if !(self.spread.is_finite() && self.spread >= 0.0) {
            return Err(invalid("quote.spread", "must be finite and >= 0"));
        }
        if self.spread * self.period() >= 1.0 {
            return Err(Error::SpreadTooWide {
                spread: self.spread,
                period: self.period(),
            });
        }
        Ok(())
    }

    /// `F(0, dt) = 1 - spread dt` for the period `dt = 1/frequency`.
    pub fn implied_recovery(&self) -> Result<f64> {
        self.validate()?;
        Ok(1.0 - self.spread * self.period())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarketQuote {
    Bond(BondQuote),
    Cds(CdsQuote),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    /// Spacing of the equidistant master grid.
    pub grid_step: f64,
    /// Largest distance between a cash-flow date and its grid node.
    pub snap_tol: f64,
    /// Tikhonov weight applied when the normal equations are rank deficient;
    /// `None` turns rank deficiency into an error.
    pub regularization: Option<f64>,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            grid_step: 0.25,
            snap_tol: 1e-6,
            regularization: Some(1e-8),
        }
    }
}

/// A grid node where a negative least-squares value was replaced by zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClippedTenor {
    pub tenor: f64,
    pub fitted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bootstrap {
    pub curve: Curve,
    /// Model minus quoted price, in quote order.
    pub residuals: Vec<f64>,
    pub clipped: Vec<ClippedTenor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub discount: Curve,
    pub defaultable: Curve,
    pub illiquidity: Curve,
    /// Pricing error per input quote, in input order (spread error for CDS).
    pub residuals: Vec<f64>,
    pub clipped: Vec<ClippedTenor>,
    pub fit: Option<FitReport>,
}

/// Rounds `t` to the nearest multiple of `step`, if it lies within `tol`.
pub fn snap_to_grid(t: f64, step: f64, tol: f64) -> Result<f64> {
    let k = libm::round(t / step);
    let snapped = k * step;
    if (snapped - t).abs() <= tol {
        Ok(snapped)
    } else {
        Err(Error::OffGrid { date: t, step })
    }
}

/// Union of all quote cash-flow dates (and CDS periods), snapped to the
/// master grid.
pub fn calibration_grid(quotes: &[MarketQuote], opts: &BootstrapOptions) -> Result<Vec<f64>> {
    let mut grid = Vec::new();
    for q in quotes {
        match q {
            MarketQuote::Bond(b) => {
                b.validate()?;
                for d in b.cashflow_dates(opts.snap_tol) {
                    grid.push(snap_to_grid(d, opts.grid_step, opts.snap_tol)?);
                }
            }
            MarketQuote::Cds(c) => {
                c.validate()?;
                grid.push(snap_to_grid(c.period(), opts.grid_step, opts.snap_tol)?);
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::TooFewTenors { required: 1, got: 0 });
    }
    if grid[0] <= 0.0 || grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid", "tenors must be positive and strictly increasing"));
    }
    Ok(())
}

fn node_index(grid: &[f64], t: f64, tol: f64, step: f64) -> Result<usize> {
    let i = grid.partition_point(|&g| g < t - tol);
    if i < grid.len() && (grid[i] - t).abs() <= tol {
        Ok(i)
    } else {
        Err(Error::OffGrid { date: t, step })
    }
}

/// Cash-flow date indices and year fractions on `grid`.
fn coupon_legs(q: &BondQuote, grid: &[f64], opts: &BootstrapOptions) -> Result<Vec<(usize, f64)>> {
    let mut prev = 0.0;
    let mut out = Vec::new();
    for d in q.cashflow_dates(opts.snap_tol) {
        let i = node_index(grid, d, opts.snap_tol, opts.grid_step)?;
        out.push((i, grid[i] - prev));
        prev = grid[i];
    }
    Ok(out)
}

/// Solves the normal equations of `a x ~ b`, regularising only when the
/// system is rank deficient.
fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, regularization: Option<f64>) -> Result<DVector<f64>> {
    let ata = a.tr_mul(a);
    let atb = a.tr_mul(b);
    let n = ata.nrows();
    if let Some(ch) = ata.clone().cholesky() {
        let diag = ch.l_dirty().diagonal();
        let max = diag.iter().fold(0.0f64, |m, d| m.max(d * d));
        let min = diag.iter().fold(f64::INFINITY, |m, d| m.min(d * d));
        if min > 1e-12 * max {
            return Ok(ch.solve(&atb));
        }
    }
    let w = regularization.ok_or(Error::RankDeficient)?;
    let reg = ata + DMatrix::<f64>::identity(n, n) * w;
    reg.cholesky().map(|ch| ch.solve(&atb)).ok_or(Error::RankDeficient)
}

fn anchored(grid: &[f64], values: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut t = Vec::with_capacity(grid.len() + 1);
    let mut v = Vec::with_capacity(grid.len() + 1);
    t.push(0.0);
    v.push(1.0);
    t.extend_from_slice(grid);
    v.extend(values);
    (t, v)
}

/// Discount factors on `grid` fitting government bond prices.
/// The returned curve is anchored at `P(0,0) = 1`.
pub fn bootstrap_nondefaultable(quotes: &[BondQuote], grid: &[f64], opts: &BootstrapOptions) -> Result<Bootstrap> {
    if quotes.is_empty() {
        return Err(Error::MissingQuotes("government"));
    }
    check_grid(grid)?;
    let mut a = DMatrix::<f64>::zeros(quotes.len(), grid.len());
    let mut b = DVector::<f64>::zeros(quotes.len());
    for (r, q) in quotes.iter().enumerate() {
        q.validate()?;
        if q.kind != BondKind::Government {
            return Err(invalid(
                "quote.kind",
                "the discount bootstrap takes government bonds only",
            ));
        }
        let legs = coupon_legs(q, grid, opts)?;
        for &(i, dt) in &legs {
            a[(r, i)] += q.coupon * dt;
        }
        a[(r, legs[legs.len() - 1].0)] += 1.0;
        b[r] = q.price;
    }
    let x = least_squares(&a, &b, opts.regularization)?;
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NegativeDiscount {
            tenor: grid[i],
            value: *v,
        });
    }
    let residuals = (&a * &x - &b).iter().copied().collect();
    let (t, v) = anchored(grid, x.iter().copied().collect());
    Ok(Bootstrap {
        curve: Curve::new(t, v, CurveKind::Discount)?,
        residuals,
        clipped: Vec::new(),
    })
}

/// Recovery curve through `(0, 1)` and the points `(dt, 1 - spread dt)`;
/// quotes sharing a period are averaged.
pub fn implied_recovery_curve(cds: &[CdsQuote]) -> Result<Curve> {
    if cds.is_empty() {
        return Err(Error::MissingQuotes("CDS"));
    }
    let mut pts: Vec<(f64, f64, usize)> = Vec::new();
    for q in cds {
        let f = q.implied_recovery()?;
        let dt = q.period();
        match pts
            .iter_mut()
            .find(|(t, _, _)| (*t - dt).abs() <= crate::curve::TENOR_EPS)
        {
            Some(p) => {
                p.1 += f;
                p.2 += 1;
            }
            None => pts.push((dt, f, 1)),
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (t, v) = anchored(
        &pts.iter().map(|p| p.0).collect::<Vec<_>>(),
        pts.iter().map(|p| p.1 / p.2 as f64).collect(),
    );
    Curve::new(t, v, CurveKind::Recovery)
}

/// `P~ = F P` on `grid`, with `F` implied by the CDS quotes.
pub fn defaultable_from_cds(cds: &[CdsQuote], discount: &Curve, grid: &[f64]) -> Result<Curve> {
    check_grid(grid)?;
    let f = implied_recovery_curve(cds)?;
    let mut values = Vec::with_capacity(grid.len());
    for &t in grid {
        values.push(f.value(t)? * discount.value(t)?);
    }
    let (t, v) = anchored(grid, values);
    Curve::new(t, v, CurveKind::Discount)
}

/// Illiquidity premia on `grid` explaining corporate bond prices
/// beyond `P~`. Negative least-squares values are clipped to zero and reported.
pub fn bootstrap_illiquidity(
    quotes: &[BondQuote],
    defaultable: &Curve,
    grid: &[f64],
    opts: &BootstrapOptions,
) -> Result<Bootstrap> {
    if quotes.iter().all(|q| q.coupon == 0.0) {
        return Err(Error::MissingQuotes("coupon-bearing corporate"));
    }
    check_grid(grid)?;
    let mut a = DMatrix::<f64>::zeros(quotes.len(), grid.len());
    let mut b = DVector::<f64>::zeros(quotes.len());
    for (r, q) in quotes.iter().enumerate() {
        q.validate()?;
        if q.kind != BondKind::Corporate {
            return Err(invalid(
                "quote.kind",
                "the illiquidity bootstrap takes corporate bonds only",
            ));
        }
        let legs = coupon_legs(q, grid, opts)?;
        let mut base = defaultable.value(grid[legs[legs.len() - 1].0])?;
        for &(i, dt) in &legs {
            a[(r, i)] += q.coupon * dt;
            base += q.coupon * dt * defaultable.value(grid[i])?;
        }
        b[r] = q.price - base;
    }
    let mut x = least_squares(&a, &b, opts.regularization)?;
    let mut clipped = Vec::new();
    for (i, v) in x.iter_mut().enumerate() {
        if *v < 0.0 {
            clipped.push(ClippedTenor {
                tenor: grid[i],
                fitted: *v,
            });
            *v = 0.0;
        }
    }
    let residuals = (&a * &x - &b).iter().copied().collect();
    Ok(Bootstrap {
        curve: Curve::new(grid.to_vec(), x.iter().copied().collect(), CurveKind::Illiquidity)?,
        residuals,
        clipped,
    })
}

/// Bootstraps `P`, then `P~`, then `L` from a mixed quote set.
///
/// `P` lives on the government cash-flow dates, `P~` on the full
/// calibration grid and `L` on the corporate cash-flow dates.
pub fn bootstrap_curves(quotes: &[MarketQuote], opts: &BootstrapOptions) -> Result<CalibrationResult> {
    let mut gov = Vec::new();
    let mut corp = Vec::new();
    let mut cds = Vec::new();
    for q in quotes {
        match q {
            MarketQuote::Bond(b) if b.kind == BondKind::Government => gov.push(*b),
            MarketQuote::Bond(b) => corp.push(*b),
            MarketQuote::Cds(c) => cds.push(*c),
        }
    }
    if gov.is_empty() {
        return Err(Error::MissingQuotes("government"));
    }
    if cds.is_empty() {
        return Err(Error::MissingQuotes("CDS"));
    }
    if corp.is_empty() {
        return Err(Error::MissingQuotes("corporate"));
    }
    let grid_of = |qs: &[BondQuote]| {
        let wrapped: Vec<MarketQuote> = qs.iter().map(|b| MarketQuote::Bond(*b)).collect();
        calibration_grid(&wrapped, opts)
    };
    let full_grid = calibration_grid(quotes, opts)?;
    let step1 = bootstrap_nondefaultable(&gov, &grid_of(&gov)?, opts)?;
    let defaultable = defaultable_from_cds(&cds, &step1.curve, &full_grid)?;
    let step3 = bootstrap_illiquidity(&corp, &defaultable, &grid_of(&corp)?, opts)?;

    let recovery = implied_recovery_curve(&cds)?;
    let (mut ig, mut ic) = (0, 0);
    let mut residuals = Vec::with_capacity(quotes.len());
    for q in quotes {
        match q {
            MarketQuote::Bond(b) if b.kind == BondKind::Government => {
                residuals.push(step1.residuals[ig]);
                ig += 1;
            }
            MarketQuote::Bond(_) => {
                residuals.push(step3.residuals[ic]);
                ic += 1;
            }
            MarketQuote::Cds(c) => {
                let model = cds_spread_from_recovery(recovery.value(c.period())?, c.period())?;
                residuals.push(model - c.spread);
            }
        }
    }
    Ok(CalibrationResult {
        discount: step1.curve,
        defaultable,
        illiquidity: step3.curve,
        residuals,
        clipped: step3.clipped,
        fit: None,
    })
}
