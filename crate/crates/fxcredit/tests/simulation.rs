use fxcredit::simulation::{mc_estimate, simulate_cir, simulate_xy, Payoff, SimConfig};
use fxcredit_core::affine::{atom_mass_zero, cir_pp_bond, CirPpParams, ProcessState, ShiftFunction};
use fxcredit_core::recovery::forward_recovery_simple;
use fxcredit_core::riccati::{AjdParams, JumpMeasure};
use proptest::prelude::*;

fn constant_intensity(m: f64) -> AjdParams {
    AjdParams {
        sigma_x: 0.0,
        sigma_y: 0.3,
        m,
        mu_x: 0.0,
        mu_y: 0.0,
        jump: JumpMeasure::ExpX { rate: 2.0 },
        x0: 0.0,
        y0: 0.5,
        h: 0.25,
    }
}

fn reference() -> AjdParams {
    AjdParams {
        sigma_x: 0.4,
        mu_y: 0.5,
        ..constant_intensity(1.0)
    }
}

/// Kolmogorov-Smirnov distance between the sample and Exp(rate).
fn ks_exponential(mut v: Vec<f64>, rate: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = 1.0 - (-rate * x).exp();
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

#[test]
fn jump_counts_are_poisson() {
    let (m, t) = (2.0, 3.0);
    let cfg = SimConfig::new(20_000, 1.0 / 252.0, t, 11);
    let b = simulate_xy(&constant_intensity(m), &cfg, &[t]).unwrap();
    let counts: Vec<f64> = b.jump_times.iter().map(|j| j.len() as f64).collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (m * t / n).sqrt();
    assert!((mean - m * t).abs() < 4.0 * se, "mean {mean}");
    assert!((var / (m * t) - 1.0).abs() < 0.05, "dispersion {}", var / (m * t));
}

#[test]
fn inter_jump_times_are_exponential() {
    // first arrival per path; the horizon makes censoring negligible
    let m = 1.5;
    let cfg = SimConfig::new(10_000, 1.0 / 252.0, 12.0, 21);
    let b = simulate_xy(&constant_intensity(m), &cfg, &[12.0]).unwrap();
    let first: Vec<f64> = b.jump_times.iter().filter_map(|j| j.first().copied()).collect();
    assert!(first.len() == 10_000);
    let d = ks_exponential(first, m);
    // 1% critical value of the one-sample KS statistic
    assert!(d < 1.628 / 100.0, "KS distance {d}");
}

#[test]
fn paths_do_not_depend_on_thread_count() {
    let p = reference();
    let cfg = SimConfig::new(500, 1.0 / 252.0, 2.0, 99);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_xy(&p, &cfg, &[0.5, 1.0, 2.0]).unwrap())
    };
    let one = run(1);
    for threads in [2, 3, 8] {
        let other = run(threads);
        assert_eq!(
            one.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            other.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(one, other);
    }
}

#[test]
fn antithetic_pairs_reduce_variance() {
    let p = reference();
    let payoff = Payoff::SimpleRecovery { maturity: 1.0 };
    let mut cfg = SimConfig::new(20_000, 1.0 / 252.0, 1.0, 5);
    let plain = mc_estimate(&simulate_xy(&p, &cfg, &[1.0]).unwrap(), &payoff).unwrap();
    cfg.antithetic = true;
    let anti = mc_estimate(&simulate_xy(&p, &cfg, &[1.0]).unwrap(), &payoff).unwrap();
    assert!(
        anti.std_error < plain.std_error,
        "{} vs {}",
        anti.std_error,
        plain.std_error
    );
}

#[test]
fn estimates_agree_with_analytic_values() {
    let p = reference();
    let cfg = SimConfig::new(20_000, 1.0 / 252.0, 2.0, 17);
    let b = simulate_xy(&p, &cfg, &[2.0]).unwrap();
    let s = ProcessState::initial(&p);
    let f = mc_estimate(&b, &Payoff::SimpleRecovery { maturity: 2.0 }).unwrap();
    assert!(f.z_score(forward_recovery_simple(&p, 0.0, 2.0).unwrap()).abs() < 4.0);
    let q = constant_intensity(0.8);
    let b = simulate_xy(&q, &cfg, &[2.0]).unwrap();
    let a = mc_estimate(&b, &Payoff::AtomIndicator { maturity: 2.0 }).unwrap();
    assert!(a.z_score(atom_mass_zero(&q, &s, 2.0).unwrap()).abs() < 4.0);

    let c = CirPpParams {
        r0: 0.03,
        b_x: 0.04,
        beta_x: 0.8,
        sigma_x: 0.15,
        shift: ShiftFunction::constant(0.01),
    };
    let est = simulate_cir(&c, &SimConfig::new(20_000, 1.0 / 252.0, 5.0, 3), &[1.0, 5.0]).unwrap();
    for (e, t) in est.iter().zip([1.0, 5.0]) {
        assert!(e.z_score(cir_pp_bond(&c, t).unwrap()).abs() < 4.0, "T={t}: {e:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn states_stay_nonnegative(sigma_x in 0.0..2.0f64, sigma_y in 0.0..2.0f64, mu_x in 0.0..1.0f64, mu_y in 0.0..1.0f64, seed in any::<u64>()) {
        let p = AjdParams { sigma_x, sigma_y, mu_x, mu_y, x0: 0.1, ..constant_intensity(1.0) };
        let b = simulate_xy(&p, &SimConfig::new(100, 1.0 / 252.0, 1.0, seed), &[0.25, 0.5, 1.0]).unwrap();
        prop_assert!(b.x.iter().chain(&b.y).all(|v| *v >= 0.0));
    }
}
