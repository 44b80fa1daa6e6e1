//! Seeded random rationals for generic-point tests.

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::expr::Rational;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Random rational with numerator in `[-97, 97]` and denominator in `[1, 97]`.
pub fn rational(rng: &mut SeededRng) -> Rational {
    let n: i64 = rng.gen_range(-97..=97);
    let d: i64 = rng.gen_range(1..=97);
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Random nonzero rational, avoiding a few small special values.
pub fn generic_rational(rng: &mut SeededRng) -> Rational {
    loop {
        let r = rational(rng);
        let special = [0i64, 1, -1, 2, -2];
        if !special.iter().any(|s| r == Rational::from_integer(BigInt::from(*s))) {
            return r;
        }
    }
}

pub fn point(rng: &mut SeededRng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| rational(rng)).collect()
}
