//! Seeded generators for randomized suites.
//!
//! Every randomized check in the crate (and in the CLI) draws from a
//! ChaCha stream keyed by an explicit seed, so identical seeds reproduce
//! identical inputs byte for byte.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

use crate::base::{BaseFunction, BaseKind};
use crate::expectations::ExpectationMatrix;
use crate::spectral::{AnalyticFactor, LaurentPoly};
use crate::torus::TorusObservable;
use crate::Result;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

pub fn random_unimodular(rng: &mut ChaCha8Rng) -> Complex64 {
    let t = rng.gen_range(0.0..1.0);
    crate::util::unit_exp(t)
}

/// Random positive trace-one matrix `G·G*/Tr(G·G*)`.
pub fn random_psd_trace_one(k: usize, rng: &mut ChaCha8Rng) -> Result<ExpectationMatrix> {
    let g: Vec<Complex64> = (0..k * k).map(|_| random_complex(rng, 1.0)).collect();
    let mut m = vec![Complex64::new(0.0, 0.0); k * k];
    for i in 0..k {
        for j in 0..k {
            let mut s = Complex64::new(0.0, 0.0);
            for l in 0..k {
                s += g[i * k + l] * g[j * k + l].conj();
            }
            m[i * k + j] = s;
        }
    }
    let trace: f64 = (0..k).map(|i| m[i * k + i].re).sum();
    for (i, v) in m.iter_mut().enumerate() {
        *v /= trace;
        // Clean the diagonal so the validator's trace check is exact.
        if i % (k + 1) == 0 {
            *v = Complex64::new(v.re, 0.0);
        }
    }
    // Rounding can leave the trace a few ulps off 1; absorb it into the
    // last diagonal entry.
    let tr: f64 = (0..k).map(|i| m[i * k + i].re).sum();
    let last = (k - 1) * k + (k - 1);
    m[last] = Complex64::new(m[last].re + (1.0 - tr), 0.0);
    ExpectationMatrix::new(k, m)
}

/// Random analytic polynomial of the given degree.
pub fn random_analytic(degree: usize, rng: &mut ChaCha8Rng) -> AnalyticFactor {
    AnalyticFactor::new((0..=degree).map(|_| random_complex(rng, 1.0)).collect())
}

/// Strictly positive trigonometric polynomial `|r|² + floor`.
pub fn random_positive_laurent(
    degree: usize,
    floor: f64,
    rng: &mut ChaCha8Rng,
) -> LaurentPoly {
    let r = random_analytic(degree, rng);
    let q = r.modulus_squared();
    LaurentPoly::from_pairs(q.coeff_pairs().map(|(k, c)| {
        if k == 0 {
            (k, c + Complex64::new(floor, 0.0))
        } else {
            (k, c)
        }
    }))
}

/// Random `Z_∞` base function: a few window values plus a limit.
pub fn random_zinf_function(rng: &mut ChaCha8Rng, window: i64, scale: f64) -> BaseFunction {
    let entries: Vec<(i64, Complex64)> = (0..rng.gen_range(0..4))
        .map(|_| (rng.gen_range(-window..=window), random_complex(rng, scale)))
        .collect();
    BaseFunction::zinf(entries, random_complex(rng, scale))
}

/// Random `Z_∞` observable with slots in `[-max_slot, max_slot]`.
pub fn random_zinf_observable(
    rng: &mut ChaCha8Rng,
    max_slot: i64,
    window: i64,
) -> Result<TorusObservable> {
    let mut slots = Vec::new();
    for n in -max_slot..=max_slot {
        if rng.gen_bool(0.7) {
            slots.push((n, random_zinf_function(rng, window, 1.0)));
        }
    }
    TorusObservable::new(BaseKind::ZInf, slots)
}

/// Random circle-base observable with Fourier modes in `[-max_freq, max_freq]`.
pub fn random_circle_observable(
    rng: &mut ChaCha8Rng,
    max_slot: i64,
    max_freq: i64,
) -> Result<TorusObservable> {
    let mut slots = Vec::new();
    for n in -max_slot..=max_slot {
        if rng.gen_bool(0.7) {
            let mut coeffs = Vec::new();
            for j in -max_freq..=max_freq {
                if rng.gen_bool(0.5) {
                    coeffs.push((j, random_complex(rng, 1.0)));
                }
            }
            slots.push((n, BaseFunction::circle(coeffs)));
        }
    }
    TorusObservable::new(BaseKind::Circle, slots)
}

/// Random cyclic observable over `Z/N`.
pub fn random_cyclic_observable(
    rng: &mut ChaCha8Rng,
    n_base: u64,
    max_slot: i64,
) -> Result<TorusObservable> {
    let mut slots = Vec::new();
    for n in -max_slot..=max_slot {
        if rng.gen_bool(0.8) {
            let values = (0..n_base).map(|_| random_complex(rng, 1.0)).collect();
            slots.push((n, BaseFunction::cyclic(values)));
        }
    }
    TorusObservable::new(BaseKind::Cyclic, slots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_reproduce() {
        let a = random_positive_laurent(5, 1e-3, &mut rng_from_seed(7));
        let b = random_positive_laurent(5, 1e-3, &mut rng_from_seed(7));
        assert_eq!(a, b);
    }

    #[test]
    fn psd_matrices_validate() {
        for seed in 0..30 {
            let mut rng = rng_from_seed(seed);
            for k in [1usize, 2, 3, 5] {
                let a = random_psd_trace_one(k, &mut rng).unwrap();
                assert_eq!(a.k(), k);
            }
        }
    }

    #[test]
    fn positive_laurent_is_positive() {
        for seed in 0..10 {
            let q = random_positive_laurent(8, 1e-3, &mut rng_from_seed(seed));
            let (min, _) = q.range_on_grid(512);
            assert!(min >= 1e-3 - 1e-12, "seed {seed}: min {min}");
        }
    }
}
