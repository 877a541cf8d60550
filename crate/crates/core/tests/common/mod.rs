#![allow(dead_code)]

use fxcredit_core::affine::{cir_pp_bond, CirPpParams, ShiftBasis, ShiftFunction};
use fxcredit_core::calibration::{BondKind, BondQuote, CdsQuote, MarketQuote};
use fxcredit_core::curve::{Curve, CurveKind};
use fxcredit_core::products::{corp_bond_value, gov_bond_value, PaymentSchedule};
use fxcredit_core::recovery::forward_recovery_simple;
use fxcredit_core::riccati::{AjdParams, JumpMeasure};
use proptest::prelude::*;

pub fn base() -> AjdParams {
    AjdParams {
        sigma_x: 0.5,
        sigma_y: 0.4,
        m: 1.0,
        mu_x: 0.0,
        mu_y: 0.0,
        jump: JumpMeasure::ExpX { rate: 2.0 },
        x0: 0.0,
        y0: 0.3,
        h: 0.25,
    }
}

pub fn jump() -> impl Strategy<Value = JumpMeasure> {
    prop_oneof![
        (0.5..6.0f64).prop_map(|rate| JumpMeasure::ExpX { rate }),
        (0.05..2.0f64, 0.0..1.0f64).prop_map(|(jump_x, jump_y)| JumpMeasure::DiracXY { jump_x, jump_y }),
    ]
}

/// Deterministic intensity; Dirac jumps in `y` come without `y` diffusion so
/// the closed form applies for every `v`.
pub fn deterministic() -> impl Strategy<Value = AjdParams> {
    (0.0..1.2f64, 0.0..1.2f64, 0.01..3.0f64, jump(), 0.0..1.0f64, 0.0..1.0f64).prop_map(
        |(sigma_x, sigma_y, m, jump, x0, y0)| {
            let sigma_y = match jump {
                JumpMeasure::DiracXY { jump_y, .. } if jump_y > 0.0 => 0.0,
                _ => sigma_y,
            };
            AjdParams {
                sigma_x,
                sigma_y,
                m,
                jump,
                x0,
                y0,
                ..base()
            }
        },
    )
}

/// Intensity driven by `y`, no `x` diffusion; Dirac jumps stay in `x`.
pub fn y_driven() -> impl Strategy<Value = AjdParams> {
    (0.0..1.2f64, 0.01..3.0f64, 0.05..2.0f64, jump(), 0.0..1.0f64).prop_map(|(sigma_y, m, mu_y, jump, y0)| {
        let jump = match jump {
            JumpMeasure::DiracXY { jump_x, .. } => JumpMeasure::DiracXY { jump_x, jump_y: 0.0 },
            j => j,
        };
        AjdParams {
            sigma_x: 0.0,
            sigma_y,
            m,
            mu_y,
            jump,
            y0,
            ..base()
        }
    })
}

pub fn general() -> impl Strategy<Value = AjdParams> {
    (
        0.0..1.0f64,
        0.0..1.0f64,
        0.01..2.0f64,
        0.0..1.5f64,
        0.0..1.5f64,
        jump(),
        0.0..1.0f64,
    )
        .prop_map(|(sigma_x, sigma_y, m, mu_x, mu_y, jump, y0)| AjdParams {
            sigma_x,
            sigma_y,
            m,
            mu_x,
            mu_y,
            jump,
            y0,
            ..base()
        })
}

pub fn cir() -> CirPpParams {
    CirPpParams {
        r0: 0.025,
        b_x: 0.03,
        beta_x: 0.6,
        sigma_x: 0.08,
        shift: ShiftFunction {
            coeffs: [0.004, 0.0005, -0.002],
            basis: ShiftBasis::LevelSlopeDecay,
        },
    }
}

/// Noise-free market generated from known models: a quarterly-coupon
/// government and corporate bond plus a single-period CDS per grid tenor.
pub struct SyntheticMarket {
    pub grid: Vec<f64>,
    pub p: Curve,
    pub f: Curve,
    pub pd: Curve,
    pub l: Curve,
    pub quotes: Vec<MarketQuote>,
}

pub fn illiquidity(t: f64) -> f64 {
    0.002 + 0.001 * t - 0.00005 * t * t
}

pub fn synthetic_market(c: &CirPpParams, a: &AjdParams, years: usize) -> SyntheticMarket {
    let n = 4 * years;
    let grid: Vec<f64> = (1..=n).map(|i| 0.25 * i as f64).collect();
    let full: Vec<f64> = std::iter::once(0.0).chain(grid.iter().copied()).collect();
    let pv: Vec<f64> = full.iter().map(|t| cir_pp_bond(c, *t).unwrap()).collect();
    let fv: Vec<f64> = full
        .iter()
        .map(|t| forward_recovery_simple(a, 0.0, *t).unwrap())
        .collect();
    let pdv: Vec<f64> = pv.iter().zip(&fv).map(|(p, f)| p * f).collect();
    let p = Curve::new(full.clone(), pv, CurveKind::Discount).unwrap();
    let f = Curve::new(full.clone(), fv, CurveKind::Recovery).unwrap();
    let pd = Curve::new(full, pdv, CurveKind::Discount).unwrap();
    let l = Curve::new(
        grid.clone(),
        grid.iter().map(|t| illiquidity(*t)).collect(),
        CurveKind::Illiquidity,
    )
    .unwrap();
    let mut quotes = Vec::new();
    for (k, &t) in grid.iter().enumerate() {
        let coupon = 0.02 + 0.001 * k as f64;
        let sched = PaymentSchedule::equidistant(t, k + 1, coupon).unwrap();
        quotes.push(MarketQuote::Bond(BondQuote {
            kind: BondKind::Government,
            maturity: t,
            coupon,
            price: gov_bond_value(&p, &sched).unwrap(),
            frequency: 4.0,
        }));
        quotes.push(MarketQuote::Bond(BondQuote {
            kind: BondKind::Corporate,
            maturity: t,
            coupon,
            price: corp_bond_value(&pd, &l, &sched).unwrap(),
            frequency: 4.0,
        }));
        quotes.push(MarketQuote::Cds(CdsQuote {
            maturity: t,
            spread: (1.0 - f.value(t).unwrap()) / t,
            frequency: 1.0 / t,
        }));
    }
    SyntheticMarket {
        grid,
        p,
        f,
        pd,
        l,
        quotes,
    }
}
