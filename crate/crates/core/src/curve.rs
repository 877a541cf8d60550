//! Discrete term structures on a tenor grid.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

/// What a curve's values represent; fixes validation and default interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// Zero-coupon prices, `P(0,T)` or `P~(0,T)`.
    Discount,
    /// Forward recovery rates `F(0,T)` in `(0, 1]`.
    Recovery,
    /// Illiquidity premium `L(0,T) >= 0`.
    Illiquidity,
    /// Rates or spreads; any sign.
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Linear in `log(value)`; flat forward beyond the last tenor.
    LogLinear,
    /// Linear in value; flat beyond the last tenor.
    Linear,
}

impl CurveKind {
    pub fn default_interpolation(self) -> Interpolation {
        match self {
            CurveKind::Discount | CurveKind::Recovery => Interpolation::LogLinear,
            CurveKind::Illiquidity | CurveKind::Rate => Interpolation::Linear,
        }
    }
}

/// Tolerance for matching a query date against a grid tenor.
pub const TENOR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    tenors: Vec<f64>,
    values: Vec<f64>,
    kind: CurveKind,
    interpolation: Interpolation,
}

impl Curve {
    pub fn new(tenors: Vec<f64>, values: Vec<f64>, kind: CurveKind) -> Result<Self> {
        Self::with_interpolation(tenors, values, kind, kind.default_interpolation())
    }

    pub fn with_interpolation(
        tenors: Vec<f64>,
        values: Vec<f64>,
        kind: CurveKind,
        interpolation: Interpolation,
    ) -> Result<Self> {
        if tenors.is_empty() {
            return Err(Error::TooFewTenors { required: 1, got: 0 });
        }
        if tenors.len() != values.len() {
            return Err(invalid("curve", "tenor and value counts differ"));
        }
        if tenors.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(invalid("curve.tenors", "must be finite and >= 0"));
        }
        if tenors.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("curve.tenors", "must be strictly increasing"));
        }
        for (&t, &v) in tenors.iter().zip(&values) {
            let ok = match kind {
                CurveKind::Discount => v.is_finite() && v > 0.0,
                CurveKind::Recovery => v.is_finite() && v > 0.0 && v <= 1.0,
                CurveKind::Illiquidity => v.is_finite() && v >= 0.0,
                CurveKind::Rate => v.is_finite(),
            };
            if !ok {
                return Err(invalid(
                    "curve.values",
                    "value outside the range allowed for this curve kind",
                ));
            }
            if t == 0.0 && matches!(kind, CurveKind::Discount | CurveKind::Recovery) && (v - 1.0).abs() > TENOR_EPS {
                return Err(invalid(
                    "curve.values",
                    "discount and recovery curves must equal 1 at tenor 0",
                ));
            }
        }
        if interpolation == Interpolation::LogLinear && values.iter().any(|v| *v <= 0.0) {
            return Err(invalid("curve.interpolation", "log-linear needs positive values"));
        }
        Ok(Self {
            tenors,
            values,
            kind,
            interpolation,
        })
    }

    pub fn tenors(&self) -> &[f64] {
        &self.tenors
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn len(&self) -> usize {
        self.tenors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tenors.is_empty()
    }

    pub fn first_tenor(&self) -> f64 {
        self.tenors[0]
    }

    pub fn last_tenor(&self) -> f64 {
        self.tenors[self.tenors.len() - 1]
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.tenors.iter().copied().zip(self.values.iter().copied())
    }

    fn node(&self, t: f64) -> Option<usize> {
        let i = self.tenors.partition_point(|&x| x < t - TENOR_EPS);
        (i < self.tenors.len() && (self.tenors[i] - t).abs() <= TENOR_EPS).then_some(i)
    }

    /// Interpolated value; errors below the first tenor and extrapolates
    /// beyond the last one.
    pub fn value(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < self.first_tenor() - TENOR_EPS {
            return Err(self.out_of_range(t));
        }
        if let Some(i) = self.node(t) {
            return Ok(self.values[i]);
        }
        let n = self.tenors.len();
        let i = self.tenors.partition_point(|&x| x < t);
        let (lo, hi) = if i >= n {
            if n == 1 {
                return Ok(self.values[0]);
            }
            if self.interpolation == Interpolation::Linear {
                return Ok(self.values[n - 1]);
            }
            (n - 2, n - 1)
        } else {
            (i - 1, i)
        };
        let (t0, t1) = (self.tenors[lo], self.tenors[hi]);
        let w = (t - t0) / (t1 - t0);
        Ok(match self.interpolation {
            Interpolation::Linear => self.values[lo] + w * (self.values[hi] - self.values[lo]),
            Interpolation::LogLinear => {
                let (l0, l1) = (libm::log(self.values[lo]), libm::log(self.values[hi]));
                libm::exp(l0 + w * (l1 - l0))
            }
        })
    }

    /// Interpolated value, refusing to extrapolate on either side.
    pub fn value_in_range(&self, t: f64) -> Result<f64> {
        if t > self.last_tenor() + TENOR_EPS {
            return Err(self.out_of_range(t));
        }
        self.value(t)
    }

    fn out_of_range(&self, t: f64) -> Error {
        Error::TenorOutOfRange {
            tenor: t,
            first: self.first_tenor(),
            last: self.last_tenor(),
        }
    }

    /// Samples this curve on `grid`, keeping kind and interpolation.
    pub fn resample(&self, grid: &[f64]) -> Result<Curve> {
        let values = grid.iter().map(|&t| self.value(t)).collect::<Result<Vec<_>>>()?;
        Curve::with_interpolation(grid.to_vec(), values, self.kind, self.interpolation)
    }
}
