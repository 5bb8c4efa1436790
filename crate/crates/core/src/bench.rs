//! Operation counts and timings for circulant exponentiation.
//!
//! Counts are exact and machine independent; timings are informational.
//! With zero repetitions no clock is read and a report depends only on its
//! inputs and seed.

use std::time::Instant;

use num_bigint::{BigUint, RandBigInt};
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::circulant::{Circulant, MulStrategy, SquarePermutation};
use crate::error::{Error, Result};
use crate::par::Parallelism;
use crate::params::ParamSet;

pub use crate::counter::{OpCounter, OpCounts};

/// Exponents whose counts are checked against the bit-pattern model.
pub const COUNT_SAMPLES: usize = 16;

/// `(squarings, multiplications)` left-to-right square-and-multiply does
/// for `e`: `L - 1` and `w - 1` for bit length `L` and weight `w`.
pub fn predicted_counts(e: &BigUint) -> (u64, u64) {
    let bits = e.bits();
    if bits == 0 {
        return (0, 0);
    }
    (bits - 1, e.count_ones() - 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpCountCheck {
    pub exponent_hex: String,
    pub bits: u64,
    pub weight: u64,
    pub predicted_squarings: u64,
    pub predicted_multiplies: u64,
    pub measured: OpCounts,
    pub matches: bool,
}

/// Runs `base^e` under a fresh counter and compares with the model.
pub fn count_exponentiation(base: &Circulant, e: &BigUint) -> ExpCountCheck {
    let counter = OpCounter::new();
    base.pow_counted(e, Some(&counter));
    let measured = counter.snapshot();
    let (sq, mu) = predicted_counts(e);
    ExpCountCheck {
        exponent_hex: e.to_str_radix(16),
        bits: e.bits(),
        weight: e.count_ones(),
        predicted_squarings: sq,
        predicted_multiplies: mu,
        measured,
        matches: measured.group_squares == sq && measured.group_mults == mu,
    }
}

/// Uniform exponent with exactly `bits` bits.
pub fn random_exponent_of_length<R: rand::Rng + ?Sized>(rng: &mut R, bits: u32) -> BigUint {
    if bits == 0 {
        return BigUint::default();
    }
    let top = BigUint::one() << (bits - 1);
    let low = rng.gen_biguint_below(&top);
    top + low
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsSummary {
    pub q_p: u64,
    pub q_k: u32,
    pub d: usize,
    pub valid: bool,
    pub fast_square: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountModel {
    pub samples: usize,
    pub all_match: bool,
    pub first: ExpCountCheck,
}

/// Medians in nanoseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub reps: usize,
    pub multiply_sequential_ns: f64,
    pub multiply_parallel_ns: f64,
    pub multiply_auto_ns: f64,
    pub square_generic_ns: f64,
    pub square_fast_ns: Option<f64>,
    pub exponentiation_ns: f64,
}

/// A cost model quoted for context; nothing here is measured.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyticRow {
    pub label: String,
    pub security_field: String,
    pub circulant_multiplication_complexity: u64,
    pub normal_basis_multiplication_complexity: u64,
    pub note: String,
}

impl AnalyticRow {
    pub fn for_dimension(q: u128, d: usize) -> Self {
        let d64 = d as u64;
        AnalyticRow {
            label: "claimed hardware complexity, not measured".into(),
            security_field: format!("F_({q}^{})", d - 1),
            circulant_multiplication_complexity: d64,
            normal_basis_multiplication_complexity: 2 * d64 - 1,
            note: "circulant of dimension d (permutation squaring) versus an optimal normal basis \
                   of degree d; software counts above are a different measure"
                .into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub params: ParamsSummary,
    pub seed: u64,
    pub exponent_bits: u32,
    /// One product by convolution.
    pub multiply: OpCounts,
    /// One squaring through the permutation path, when it applies.
    pub square_fast: Option<OpCounts>,
    /// One squaring by general convolution.
    pub square_generic: OpCounts,
    pub count_model: CountModel,
    pub timing: Option<Timing>,
    pub analytic: AnalyticRow,
}

fn median_ns<F: FnMut()>(reps: usize, mut f: F) -> f64 {
    let mut samples: Vec<f64> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_nanos() as f64
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

/// Counts one multiply, one squaring on each path and random exponentiations
/// of `exponent_bits` bits; times them over `reps` repetitions (none when
/// `reps = 0`).
pub fn bench_exponentiation(
    params: &ParamSet,
    exponent_bits: u32,
    reps: usize,
    seed: u64,
) -> Result<BenchReport> {
    params.ensure_valid()?;
    if exponent_bits == 0 {
        return Err(Error::InvalidParams("exponent_bits must be positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let a = Circulant::random(params.spec, params.d, &mut rng)?;
    let b = Circulant::random(params.spec, params.d, &mut rng)?;
    let base = &params.generator;

    let counter = OpCounter::new();
    a.mul_counted(&b, &counter)?;
    let multiply = counter.snapshot();

    let square_fast = if base.has_fast_square() {
        let perm = SquarePermutation::new(params.d)?;
        let c = OpCounter::new();
        a.square_char2_with(&perm, Some(&c))?;
        Some(c.snapshot())
    } else {
        None
    };
    let c = OpCounter::new();
    a.mul_with(&a, MulStrategy::Generic(Parallelism::Sequential), Some(&c))?;
    let square_generic = c.snapshot();

    let exponents: Vec<BigUint> = (0..COUNT_SAMPLES)
        .map(|_| random_exponent_of_length(&mut rng, exponent_bits))
        .collect();
    let checks: Vec<ExpCountCheck> = exponents.iter().map(|e| count_exponentiation(base, e)).collect();
    let count_model = CountModel {
        samples: checks.len(),
        all_match: checks.iter().all(|c| c.matches),
        first: checks[0].clone(),
    };

    let timing = (reps > 0).then(|| {
        let (a, b) = (&a, &b);
        let generic = |mode| {
            move || {
                std::hint::black_box(a.mul_with(b, MulStrategy::Generic(mode), None).unwrap());
            }
        };
        let perm = SquarePermutation::new(params.d).ok();
        Timing {
            reps,
            multiply_sequential_ns: median_ns(reps, generic(Parallelism::Sequential)),
            multiply_parallel_ns: median_ns(reps, generic(Parallelism::Parallel)),
            multiply_auto_ns: median_ns(reps, || {
                std::hint::black_box(a.mul(&b).unwrap());
            }),
            square_generic_ns: median_ns(reps, || {
                std::hint::black_box(a.mul_with(&a, MulStrategy::Generic(Parallelism::Sequential), None).unwrap());
            }),
            square_fast_ns: perm.filter(|_| base.has_fast_square()).map(|perm| {
                median_ns(reps, || {
                    std::hint::black_box(a.square_char2_with(&perm, None).unwrap());
                })
            }),
            exponentiation_ns: median_ns(reps, || {
                std::hint::black_box(base.pow(&exponents[0]));
            }),
        }
    });

    Ok(BenchReport {
        params: ParamsSummary {
            q_p: params.spec.p(),
            q_k: params.spec.k(),
            d: params.d,
            valid: params.is_valid(),
            fast_square: base.has_fast_square(),
        },
        seed,
        exponent_bits,
        multiply,
        square_fast,
        square_generic,
        count_model,
        timing,
        analytic: AnalyticRow::for_dimension(params.q(), params.d),
    })
}
