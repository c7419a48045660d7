//! Distribution checks used by the harness: Kolmogorov-Smirnov against
//! the uniform law and a chi-square goodness-of-fit wrapper.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand_core::RngCore;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// One-sample KS statistic of `samples` (values in [0,1]) against U[0,1].
/// Sorts a copy; D = sup |F_emp - F|.
pub fn ks_statistic_uniform(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty());
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("NaN sample"));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((x - lo).abs()).max((hi - x).abs());
    }
    d
}

/// Kolmogorov's limiting tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 lambda^2}.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Approximate p-value for the one-sample KS test against U[0,1], using
/// the Stephens finite-sample correction.
pub fn ks_uniform_p_value(samples: &[f64]) -> f64 {
    let d = ks_statistic_uniform(samples);
    let n = samples.len() as f64;
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    kolmogorov_q(lambda)
}

/// Chi-square goodness-of-fit p-value; `expected` must be positive and
/// of the same length as `observed`. Degrees of freedom = bins - 1.
pub fn chi_square_p_value(observed: &[u64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    assert!(observed.len() >= 2);
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            assert!(e > 0.0, "expected counts must be positive");
            let diff = o as f64 - e;
            diff * diff / e
        })
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).expect("valid dof");
    dist.sf(stat)
}

/// A uniform dyadic rational in [0,1) with 64 fractional bits.
pub fn sample_unit_rational<R: RngCore>(rng: &mut R) -> BigRational {
    BigRational::new(BigInt::from(rng.next_u64()), BigInt::from(1u128 << 64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    #[test]
    fn ks_accepts_uniform_grid() {
        // An evenly spaced grid is as uniform as it gets.
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_uniform_p_value(&xs) > 0.99);
    }

    #[test]
    fn ks_rejects_squashed_sample() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i as f64 + 0.5) / 1000.0).powi(2)).collect();
        assert!(ks_uniform_p_value(&xs) < 1e-6);
    }

    #[test]
    fn ks_accepts_prng_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..4096)
            .map(|_| (rng.next_u64() as f64) / (u64::MAX as f64))
            .collect();
        assert!(ks_uniform_p_value(&xs) > 0.01);
    }

    #[test]
    fn kolmogorov_q_known_points() {
        // Q(0.8276) ~ 0.5 (median of the Kolmogorov distribution).
        assert!((kolmogorov_q(0.8276) - 0.5).abs() < 5e-4);
        assert!(kolmogorov_q(2.0) < 1e-3);
        assert!(kolmogorov_q(0.3) > 0.999);
    }

    #[test]
    fn chi_square_balanced_vs_skewed() {
        let expected = vec![100.0; 10];
        let balanced: Vec<u64> = vec![101, 99, 100, 102, 98, 100, 97, 103, 100, 100];
        assert!(chi_square_p_value(&balanced, &expected) > 0.5);
        let skewed: Vec<u64> = vec![200, 80, 80, 80, 80, 80, 80, 80, 120, 120];
        assert!(chi_square_p_value(&skewed, &expected) < 1e-6);
    }

    #[test]
    fn unit_rational_is_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let r = sample_unit_rational(&mut rng);
            assert!(r >= BigRational::from_integer(0.into()));
            assert!(r < BigRational::from_integer(1.into()));
        }
    }
}
