//! Special functions needed by the Dirac-jump closed forms.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Scaled exponential integral `e^z E1(z)` for `z > 0`.
pub fn exp_e1_scaled(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z <= 1.0 {
        // E1(z) = -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -z / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        libm::exp(z) * (-EULER_GAMMA - libm::log(z) - sum)
    } else {
        // modified Lentz evaluation of the continued fraction
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h
    }
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

#[cfg(test)]
mod tests {
    use super::*;

    // E1 reference values (Abramowitz & Stegun table 5.1)
    #[test]
    fn e1_reference_values() {
        let cases = [
            (0.5, 0.559_773_594_776_160_8),
            (1.0, 0.219_383_934_395_520_3),
            (2.0, 0.048_900_510_708_061_12),
            (5.0, 0.001_148_295_591_275_325_8),
        ];
        for (z, e1) in cases {
            let got = exp_e1_scaled(z) * libm::exp(-z);
            assert!(
                (got - e1).abs() < 1e-14 * e1.max(1.0) && (got / e1 - 1.0).abs() < 1e-12,
                "z={z}: {got} vs {e1}"
            );
        }
    }

    #[test]
    fn e1_is_continuous_across_branch_switch() {
        let lo = exp_e1_scaled(1.0 - 1e-12);
        let hi = exp_e1_scaled(1.0 + 1e-12);
        assert!((lo - hi).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_is_exact_for_degree_nine() {
        let v = gauss_legendre5(|x| x.powi(9) + x.powi(4), 0.0, 2.0);
        assert!((v - (1024.0 / 10.0 + 32.0 / 5.0)).abs() < 1e-12);
    }
}
