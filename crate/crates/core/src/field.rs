//! Exact arithmetic modulo a prime N, with a fast-reduction path for the
//! Mersenne prime N = 2^31 - 1.
//!
//! The Mersenne path uses the identity 2^31 ≡ 1 (mod 2^31 - 1): a value is
//! split into 31-bit limbs whose sum is congruent to the value, and at most
//! two conditional subtractions bring the sum into [0, N).

use crate::error::{Error, Result};

/// The Mersenne prime 2^31 - 1, the symbol-ID space size used with RaptorQ.
pub const MERSENNE31: u64 = (1 << 31) - 1;

/// Inputs to [`mersenne_reduce`] must fit in two 31-bit limbs.
const REDUCE_LIMIT: u64 = 1 << 62;

/// A prime modulus N, the number of available symbol IDs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldParams {
    n: u64,
    is_mersenne31: bool,
}

impl FieldParams {
    /// Validates that `n` is prime and within the supported range [3, 2^31].
    pub fn new(n: u64) -> Result<Self> {
        if !(3..=(1u64 << 31)).contains(&n) {
            return Err(Error::ModulusOutOfRange(n));
        }
        if !is_prime(n) {
            return Err(Error::ModulusNotPrime(n));
        }
        Ok(Self {
            n,
            is_mersenne31: n == MERSENNE31,
        })
    }

    /// The field with N = 2^31 - 1.
    pub fn mersenne31() -> Self {
        Self {
            n: MERSENNE31,
            is_mersenne31: true,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn is_mersenne31(&self) -> bool {
        self.is_mersenne31
    }

    pub(crate) fn check_residue(&self, value: u64) -> Result<u64> {
        if value < self.n {
            Ok(value)
        } else {
            Err(Error::ResidueOutOfRange { value, n: self.n })
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Reduces `x < 2^62` modulo 2^31 - 1 via the two-limb split.
pub fn mersenne_reduce(x: u64) -> Result<u64> {
    if x >= REDUCE_LIMIT {
        return Err(Error::ReduceInputTooWide(x));
    }
    Ok(reduce62(x))
}

/// Two-limb Mersenne reduction; caller guarantees `x < 2^62`.
#[inline]
pub(crate) fn reduce62(x: u64) -> u64 {
    let d0 = x & MERSENNE31;
    let d1 = x >> 31;
    let mut c = d0 + d1;
    if c >= MERSENNE31 {
        c -= MERSENNE31;
    }
    if c >= MERSENNE31 {
        c -= MERSENNE31;
    }
    c
}

/// Computes `(a + i * b) mod N`.
///
/// Dispatches to the Mersenne limb-split when N = 2^31 - 1 and to generic
/// double-width modulo otherwise; the two paths are observably identical.
pub fn mod_mul_add(a: u64, i: u64, b: u64, params: FieldParams) -> Result<u64> {
    let n = params.n();
    params.check_residue(a)?;
    params.check_residue(b)?;
    if i >= n {
        return Err(Error::PositionOutOfRange { i, n });
    }
    if params.is_mersenne31() {
        // i * b < (2^31 - 1)^2 < 2^62, so the product fits two limbs.
        let d = i * b;
        let mut c = a + (d & MERSENNE31) + (d >> 31);
        if c >= MERSENNE31 {
            c -= MERSENNE31;
        }
        if c >= MERSENNE31 {
            c -= MERSENNE31;
        }
        Ok(c)
    } else {
        Ok(((a as u128 + i as u128 * b as u128) % n as u128) as u64)
    }
}

/// Modular inverse by extended Euclid; N is prime so every nonzero residue
/// has one.
pub fn mod_inv(a: u64, params: FieldParams) -> Result<u64> {
    if a == 0 {
        return Err(Error::NoInverse);
    }
    let n = params.n();
    params.check_residue(a)?;
    let (mut old_r, mut r) = (a as i64, n as i64);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "modulus must be prime");
    Ok(old_s.rem_euclid(n as i64) as u64)
}

/// `(a + b) mod N` for residues `a, b < N`.
#[inline]
pub(crate) fn add_mod(a: u64, b: u64, n: u64) -> u64 {
    let c = a + b;
    if c >= n {
        c - n
    } else {
        c
    }
}

/// Maps a residue to its centered representative in (-N/2, N/2).
#[inline]
pub(crate) fn centered(r: u64, n: u64) -> i64 {
    if 2 * r > n {
        r as i64 - n as i64
    } else {
        r as i64
    }
}

/// Maps a signed offset to its residue in [0, N).
#[inline]
pub(crate) fn signed_to_residue(d: i64, n: u64) -> u64 {
    d.rem_euclid(n as i64) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_accept_supported_primes() {
        for n in [3u64, 7, 11, 101, 1009, 10007, MERSENNE31] {
            let p = FieldParams::new(n).unwrap();
            assert_eq!(p.n(), n);
            assert_eq!(p.is_mersenne31(), n == MERSENNE31);
        }
    }

    #[test]
    fn params_reject_bad_moduli() {
        assert_eq!(FieldParams::new(1), Err(Error::ModulusOutOfRange(1)));
        assert_eq!(FieldParams::new(2), Err(Error::ModulusOutOfRange(2)));
        assert_eq!(FieldParams::new(9), Err(Error::ModulusNotPrime(9)));
        assert_eq!(FieldParams::new(2147483646), Err(Error::ModulusNotPrime(2147483646)));
        assert_eq!(
            FieldParams::new((1 << 31) + 11),
            Err(Error::ModulusOutOfRange((1 << 31) + 11))
        );
    }

    #[test]
    fn mersenne_reduce_edge_cases() {
        assert_eq!(mersenne_reduce(0).unwrap(), 0);
        assert_eq!(mersenne_reduce(MERSENNE31).unwrap(), 0);
        assert_eq!(mersenne_reduce(MERSENNE31 + 1).unwrap(), 1);
        // A = N - 1, B = 2, i = 1 feeds A + i*B = N + 1 into the reducer.
        assert_eq!(mersenne_reduce((MERSENNE31 - 1) + 2).unwrap(), 1);
        assert_eq!(mersenne_reduce(REDUCE_LIMIT - 1).unwrap(), 0);
        assert_eq!(
            mersenne_reduce(REDUCE_LIMIT),
            Err(Error::ReduceInputTooWide(REDUCE_LIMIT))
        );
    }

    #[test]
    fn mersenne_reduce_matches_wide_modulo() {
        // Deterministic pseudo-random sweep below 2^62.
        let mut state = 0x1234_5678_9abc_def0u64;
        for _ in 0..1_000_000 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let x = state & (REDUCE_LIMIT - 1);
            assert_eq!(mersenne_reduce(x).unwrap(), x % MERSENNE31);
        }
    }

    #[test]
    fn mul_add_examples() {
        let m31 = FieldParams::mersenne31();
        assert_eq!(mod_mul_add(5, 3, 7, m31).unwrap(), 26);
        assert_eq!(mod_mul_add(MERSENNE31 - 1, 1, 2, m31).unwrap(), 1);
        for b in [1u64, 2, 12345, MERSENNE31 - 1] {
            assert_eq!(mod_mul_add(0, 0, b, m31).unwrap(), 0);
        }
        let p7 = FieldParams::new(7).unwrap();
        assert_eq!(mod_mul_add(3, 4, 5, p7).unwrap(), 2);
    }

    #[test]
    fn mul_add_agrees_with_generic_oracle() {
        let m31 = FieldParams::mersenne31();
        let n = m31.n();
        let mut state = 0xdead_beef_cafe_f00du64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            state
        };
        for _ in 0..1_000_000 {
            let a = next() % n;
            let i = next() % n;
            let b = next() % n;
            let expect = ((a as u128 + i as u128 * b as u128) % n as u128) as u64;
            assert_eq!(mod_mul_add(a, i, b, m31).unwrap(), expect);
        }
    }

    #[test]
    fn mul_add_rejects_out_of_range() {
        let p7 = FieldParams::new(7).unwrap();
        assert!(mod_mul_add(7, 0, 1, p7).is_err());
        assert!(mod_mul_add(0, 7, 1, p7).is_err());
        assert!(mod_mul_add(0, 0, 7, p7).is_err());
    }

    #[test]
    fn inverse_examples() {
        let p7 = FieldParams::new(7).unwrap();
        assert_eq!(mod_inv(1, p7).unwrap(), 1);
        assert_eq!(mod_inv(3, p7).unwrap(), 5);
        let m31 = FieldParams::mersenne31();
        assert_eq!(mod_inv(2, m31).unwrap(), 1073741824);
        assert_eq!(mod_mul_add(0, 2, 1073741824, m31).unwrap(), 1);
        assert_eq!(mod_inv(0, p7), Err(Error::NoInverse));
    }

    #[test]
    fn inverse_exhaustive_small_primes() {
        for n in [7u64, 11, 101, 10007] {
            let p = FieldParams::new(n).unwrap();
            for a in 1..n {
                let inv = mod_inv(a, p).unwrap();
                assert_eq!((a as u128 * inv as u128 % n as u128) as u64, 1);
            }
        }
    }

    #[test]
    fn centered_representative() {
        assert_eq!(centered(0, 101), 0);
        assert_eq!(centered(50, 101), 50);
        assert_eq!(centered(51, 101), -50);
        assert_eq!(centered(100, 101), -1);
        assert_eq!(signed_to_residue(-1, 101), 100);
        assert_eq!(signed_to_residue(-101, 101), 0);
        assert_eq!(signed_to_residue(5, 101), 5);
    }
}
