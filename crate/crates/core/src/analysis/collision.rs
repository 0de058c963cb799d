//! Birthday-paradox oracles for referee collisions.
//!
//! Two candidates meet when their referee samples share a node. The exact
//! oracle covers the without-replacement case (two independent uniform
//! `s`-subsets of an `n`-set); the Monte-Carlo oracle covers repeated
//! throws under an arbitrary bin distribution, which is what random-walk
//! sampling induces on non-regular graphs.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::AnalysisError;
use crate::rng;
use crate::scalar::Scalar;

/// Exact probability that two independent uniform `s`-subsets of an
/// `n`-set are disjoint: `C(n-s, s) / C(n, s)`.
pub fn no_common_referee_exact(n: u64, s: u64) -> Result<BigRational, AnalysisError> {
    if s < 1 || s > n {
        return Err(AnalysisError::InvalidArgument(format!(
            "subset size must satisfy 1 <= s <= n, got s={s}, n={n}"
        )));
    }
    if s > n - s {
        // The second subset cannot avoid the first.
        return Ok(BigRational::zero());
    }
    let numer = binomial(BigInt::from(n - s), BigInt::from(s));
    let denom = binomial(BigInt::from(n), BigInt::from(s));
    Ok(BigRational::new(numer, denom))
}

/// `f64` view of [`no_common_referee_exact`].
pub fn no_common_referee_f64(n: u64, s: u64) -> Result<f64, AnalysisError> {
    Ok(no_common_referee_exact(n, s)?.to_f64().unwrap_or(0.0))
}

/// Monte-Carlo estimate of the probability that two independent `rho`-ball
/// throws over bins with probabilities `distribution` occupy disjoint bin
/// sets.
pub fn collision_mc<F: Scalar>(
    distribution: &[F],
    rho: u64,
    trials: u64,
    seed: u64,
) -> Result<f64, AnalysisError> {
    if distribution.is_empty() || trials == 0 || rho == 0 {
        return Err(AnalysisError::InvalidArgument(
            "collision estimate needs bins, throws, and trials".into(),
        ));
    }
    let weights: Vec<f64> = distribution
        .iter()
        .map(|p| p.to_f64().unwrap_or(f64::NAN))
        .collect();
    let sum: f64 = weights.iter().sum();
    if !(sum - 1.0).abs().le(&1e-9) || weights.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
        return Err(AnalysisError::InvalidDistribution { sum });
    }

    // Inverse-CDF sampling over the cumulative weights.
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    cdf[last] = 1.0;

    let mut gen = rng::stream(rng::derive(seed, rng::STREAM_TRIAL, 0));
    let throw = |occupied: &mut Vec<u32>, gen: &mut rand_chacha::ChaCha8Rng| {
        use rand::Rng;
        for _ in 0..rho {
            let u: f64 = gen.random();
            let bin = cdf.partition_point(|&c| c < u).min(last);
            occupied.push(bin as u32);
        }
    };

    let mut no_collision = 0u64;
    let mut first = Vec::with_capacity(rho as usize);
    let mut second = Vec::with_capacity(rho as usize);
    for _ in 0..trials {
        first.clear();
        second.clear();
        throw(&mut first, &mut gen);
        throw(&mut second, &mut gen);
        first.sort_unstable();
        if !second.iter().any(|b| first.binary_search(b).is_ok()) {
            no_collision += 1;
        }
    }
    Ok(no_collision as f64 / trials as f64)
}

/// Sum of squared bin probabilities; the uniform vector minimizes it at
/// `1/n` for a fixed length.
pub fn sum_squares<F: Scalar>(distribution: &[F]) -> F {
    distribution.iter().fold(F::zero(), |acc, &p| acc + p * p)
}
