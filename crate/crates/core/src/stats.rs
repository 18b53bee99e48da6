//! Small statistics toolkit for the validation checks.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

/// Pairwise (cascade) summation; result does not depend on thread count.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (left, right) = values.split_at(values.len() / 2);
    pairwise_sum(left) + pairwise_sum(right)
}

/// Upper tail `P[χ²_dof > statistic]`.
pub fn chi_square_p_value(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("dof > 0");
    dist.sf(statistic)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Goodness of fit of integer samples to `Poisson(mean)`.
///
/// Categories are `0, 1, 2, ...` merged from both tails until every
/// category expects at least five observations; the last category is
/// open-ended. One degree of freedom is lost per category constraint only
/// (the mean is given, not estimated).
pub fn poisson_goodness_of_fit(samples: &[u64], mean: f64) -> ChiSquareTest {
    let n = samples.len() as f64;
    let dist = Poisson::new(mean).expect("Poisson mean must be > 0");
    let max_seen = samples.iter().copied().max().unwrap_or(0);
    let top = max_seen.max((mean + 10.0 * mean.sqrt() + 10.0) as u64);

    let mut observed = vec![0u64; top as usize + 1];
    for &s in samples {
        observed[s as usize] += 1;
    }
    let mut expected: Vec<f64> = (0..=top).map(|k| n * dist.pmf(k)).collect();
    // Open-ended last category.
    let head: f64 = expected[..top as usize].iter().sum();
    expected[top as usize] = n - head;

    // Merge into categories with expected count >= 5.
    let mut cats: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(&expected) {
        obs_acc += *o as f64;
        exp_acc += e;
        if exp_acc >= 5.0 {
            cats.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if exp_acc > 0.0 || obs_acc > 0.0 {
        match cats.last_mut() {
            Some(last) => {
                last.0 += obs_acc;
                last.1 += exp_acc;
            }
            None => cats.push((obs_acc, exp_acc)),
        }
    }
    let statistic = cats.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cats.len().saturating_sub(1);
    ChiSquareTest {
        statistic,
        dof,
        p_value: chi_square_p_value(statistic, dof),
    }
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n - F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsTest {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    KsTest {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::Distribution;

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&v), 249_750.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn chi_square_tail() {
        // scipy.stats.chi2.sf(3.84145882, 1) = 0.05
        assert!((chi_square_p_value(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn poisson_fit_accepts_poisson_and_rejects_shifted() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = rand_distr::Poisson::new(6.0).unwrap();
        let good: Vec<u64> = (0..5000).map(|_| d.sample(&mut rng) as u64).collect();
        assert!(poisson_goodness_of_fit(&good, 6.0).p_value > 0.01);
        assert!(poisson_goodness_of_fit(&good, 7.0).p_value < 1e-6);
    }

    #[test]
    fn ks_detects_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_statistic(&u, |x| x.clamp(0.0, 1.0)) < 0.02);
        assert!(ks_statistic(&u, |x| (x * x).clamp(0.0, 1.0)) > 0.2);
        let w: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_two_sample(&u, &w).p_value > 0.01);
        let shifted: Vec<f64> = w.iter().map(|x| x + 0.05).collect();
        assert!(ks_two_sample(&u, &shifted).p_value < 1e-6);
    }
}
