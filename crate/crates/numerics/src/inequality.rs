//! The elementary inequality behind the uniqueness argument for odd powers:
//! `Σ_{l=0}^{n-1} a^{n-1-l} b^l ≥ ½ (a^{n-1} + b^{n-1})` for odd `n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::noise::rng_for;

/// `Σ_{l<n} a^{n-1-l} b^l - ½(a^{n-1} + b^{n-1})`.
pub fn proof_inequality_gap(a: f64, b: f64, n: u32) -> f64 {
    let k = n as i32 - 1;
    let sum: f64 = (0..n as i32).map(|l| a.powi(k - l) * b.powi(l)).sum();
    sum - 0.5 * (a.powi(k) + b.powi(k))
}

fn pow_exact(x: &BigRational, k: u32) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * x)
}

/// The same gap in exact rational arithmetic.
pub fn proof_inequality_gap_exact(a: &BigRational, b: &BigRational, n: u32) -> BigRational {
    let mut sum = BigRational::zero();
    for l in 0..n {
        sum += pow_exact(a, n - 1 - l) * pow_exact(b, l);
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    sum - half * (pow_exact(a, n - 1) + pow_exact(b, n - 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub n: u32,
    pub samples: usize,
    /// Smallest `gap / max(|a|, |b|)^{n-1}`.
    pub min_scaled_gap: f64,
    pub argmin: (f64, f64),
}

const CHUNK: usize = 1 << 16;

/// Uniform samples of `(a, b) ∈ [-bound, bound]²`, split into fixed chunks
/// with independent streams so the result does not depend on thread count.
pub fn inequality_sweep(n: u32, samples: usize, seed: u64, bound: f64) -> SweepOutcome {
    let chunks = samples.div_ceil(CHUNK);
    let (min_scaled_gap, argmin) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut best = (f64::INFINITY, (0.0, 0.0));
            for _ in 0..count {
                let a = rng.random_range(-bound..=bound);
                let b = rng.random_range(-bound..=bound);
                let scale = a.abs().max(b.abs()).powi(n as i32 - 1);
                let gap = proof_inequality_gap(a, b, n);
                let scaled = if scale > 0.0 { gap / scale } else { gap };
                if scaled < best.0 {
                    best = (scaled, (a, b));
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::INFINITY, (0.0, 0.0)), |acc, x| if x.0 < acc.0 { x } else { acc });
    SweepOutcome { n, samples, min_scaled_gap, argmin }
}
