//! Exact 64-bit modular arithmetic with precomputed Barrett constants.
//!
//! This module is the semantic ground truth for the native modular
//! instruction set modeled by [`crate::archmodel`]: `mod_red`, `mod_add`
//! and `mod_mult` here compute exactly what those instructions compute.
//! The reduction is the single-comparison Barrett variant: one estimate,
//! at most one corrective subtraction.

use crate::error::{Error, Result};

/// A word-sized prime modulus with its Barrett constant.
///
/// `q` must be an odd prime below 2^62; the headroom above the usual
/// 54-bit word size leaves room for lazy-reduction experiments without
/// changing the type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modulus {
    q: u64,
    /// floor(2^128 / q).
    barrett_mu: u128,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if q < 2 || q >= (1u64 << 62) {
            return Err(Error::InvalidParams(format!(
                "modulus {q} out of range [2, 2^62)"
            )));
        }
        // floor((2^128 - 1) / q) == floor(2^128 / q) for any q that does
        // not divide 2^128, i.e. any odd q.
        let barrett_mu = u128::MAX / q as u128;
        Ok(Modulus { q, barrett_mu })
    }

    #[inline(always)]
    pub fn value(&self) -> u64 {
        self.q
    }

    pub fn bits(&self) -> u32 {
        64 - self.q.leading_zeros()
    }
}

/// High 128 bits of a 128x128-bit product.
#[inline(always)]
fn mul_hi_128(a: u128, b: u128) -> u128 {
    let a_lo = a as u64 as u128;
    let a_hi = a >> 64;
    let b_lo = b as u64 as u128;
    let b_hi = b >> 64;

    let lo_lo = a_lo * b_lo;
    let lo_hi = a_lo * b_hi;
    let hi_lo = a_hi * b_lo;
    let hi_hi = a_hi * b_hi;

    let mid = (lo_lo >> 64) + (lo_hi as u64 as u128) + (hi_lo as u64 as u128);
    hi_hi + (lo_hi >> 64) + (hi_lo >> 64) + (mid >> 64)
}

/// Barrett reduction of `x` modulo `m.q`.
///
/// Requires `x < q * 2^64`, which holds for any product of two reduced
/// operands. The quotient estimate is off by at most one, so a single
/// conditional subtraction suffices.
#[inline(always)]
pub fn mod_red(x: u128, m: &Modulus) -> u64 {
    debug_assert!(x < (m.q as u128) << 64, "mod_red precondition violated");
    #[cfg(test)]
    shadow::bump(shadow::Op::Red);

    let t = mul_hi_128(x, m.barrett_mu) as u64; // quotient estimate, fits u64
    let mut r = (x as u64).wrapping_sub(t.wrapping_mul(m.q));
    if r >= m.q {
        r -= m.q;
    }
    debug_assert_eq!(r as u128, x % m.q as u128);
    r
}

/// (a + b) mod q for reduced operands: add then conditional subtract.
#[inline(always)]
pub fn mod_add(a: u64, b: u64, m: &Modulus) -> u64 {
    debug_assert!(a < m.q && b < m.q);
    #[cfg(test)]
    shadow::bump(shadow::Op::Add);

    let s = a + b;
    if s >= m.q {
        s - m.q
    } else {
        s
    }
}

/// (a - b) mod q for reduced operands. Counted in the same cost class as
/// `mod_add` by the instruction model.
#[inline(always)]
pub fn mod_sub(a: u64, b: u64, m: &Modulus) -> u64 {
    debug_assert!(a < m.q && b < m.q);
    #[cfg(test)]
    shadow::bump(shadow::Op::Add);

    let (d, borrow) = a.overflowing_sub(b);
    if borrow {
        d.wrapping_add(m.q)
    } else {
        d
    }
}

#[inline(always)]
pub fn mod_neg(a: u64, m: &Modulus) -> u64 {
    debug_assert!(a < m.q);
    if a == 0 {
        0
    } else {
        m.q - a
    }
}

/// (a * b) mod q via 128-bit product then Barrett reduction.
#[inline(always)]
pub fn mod_mult(a: u64, b: u64, m: &Modulus) -> u64 {
    debug_assert!(a < m.q && b < m.q);
    #[cfg(test)]
    shadow::bump(shadow::Op::Mult);

    let t = mul_hi_128(a as u128 * b as u128, m.barrett_mu) as u64;
    let mut r = (a.wrapping_mul(b)).wrapping_sub(t.wrapping_mul(m.q));
    if r >= m.q {
        r -= m.q;
    }
    r
}

/// Square-and-multiply exponentiation.
pub fn pow_mod(a: u64, mut e: u64, m: &Modulus) -> u64 {
    let mut base = if a < m.q { a } else { a % m.q };
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mod_mult(acc, base, m);
        }
        base = mod_mult(base, base, m);
        e >>= 1;
    }
    acc
}

pub fn inv_mod(a: u64, m: &Modulus) -> u64 {
    // q is prime, so a^(q-2) is the inverse of any nonzero a.
    debug_assert!(a % m.q != 0);
    pow_mod(a, m.q - 2, m)
}

/// Deterministic primitive 2N-th root of unity mod q.
///
/// Scans generators g = 2, 3, ... and returns the first candidate
/// r = g^((q-1)/2N) with r^N = -1; since 2N is a power of two this
/// certifies exact order 2N. Fails if q is not 1 mod 2N.
pub fn find_2n_root(m: &Modulus, n: usize) -> Result<u64> {
    let two_n = 2 * n as u64;
    if (m.q - 1) % two_n != 0 {
        return Err(Error::InvalidParams(format!(
            "q = {} is not 1 mod {}",
            m.q, two_n
        )));
    }
    let exp = (m.q - 1) / two_n;
    for g in 2..m.q {
        let r = pow_mod(g, exp, m);
        if pow_mod(r, n as u64, m) == m.q - 1 {
            return Ok(r);
        }
    }
    Err(Error::InvalidParams(format!("no 2N-th root mod {}", m.q)))
}

/// Deterministic Miller-Rabin, valid for all n < 2^64 with this witness set.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Test-only shadow instruction counter. Unit tests compare block profiles
/// against the number of modular operations actually executed.
#[cfg(test)]
pub(crate) mod shadow {
    use std::cell::Cell;

    #[derive(Clone, Copy)]
    pub enum Op {
        Add,
        Mult,
        Red,
    }

    thread_local! {
        static ADD: Cell<u64> = const { Cell::new(0) };
        static MULT: Cell<u64> = const { Cell::new(0) };
        static RED: Cell<u64> = const { Cell::new(0) };
    }

    #[inline(always)]
    pub fn bump(op: Op) {
        match op {
            Op::Add => ADD.with(|c| c.set(c.get() + 1)),
            Op::Mult => MULT.with(|c| c.set(c.get() + 1)),
            Op::Red => RED.with(|c| c.set(c.get() + 1)),
        }
    }

    pub fn reset() {
        ADD.with(|c| c.set(0));
        MULT.with(|c| c.set(0));
        RED.with(|c| c.set(0));
    }

    /// (mod_add-class, mod_mult standalone, mod_red standalone).
    ///
    /// `mod_mult` internally performs a reduction and `bump`s both
    /// counters; callers subtract to get standalone reductions.
    pub fn snapshot() -> (u64, u64, u64) {
        let add = ADD.with(|c| c.get());
        let mult = MULT.with(|c| c.get());
        let red = RED.with(|c| c.get());
        (add, mult, red - mult)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q54() -> Modulus {
        // largest 54-bit prime congruent to 1 mod 2^17
        let mut c = (1u64 << 54) - (1 << 17) + 1;
        while !is_prime(c) {
            c -= 1 << 17;
        }
        Modulus::new(c).unwrap()
    }

    #[test]
    fn red_trivial() {
        let m = Modulus::new(65537).unwrap();
        assert_eq!(mod_red(5, &m), 5);
        assert_eq!(mod_red(65537u128 * 65537, &m), 0);
        assert_eq!(mod_red(65536, &m), 65536);
    }

    #[test]
    fn red_idempotent_on_reduced() {
        let m = q54();
        for a in [0u64, 1, 2, m.value() / 2, m.value() - 1] {
            assert_eq!(mod_red(a as u128, &m), a);
        }
    }

    #[test]
    fn add_wraparound() {
        let m = Modulus::new(65537).unwrap();
        assert_eq!(mod_add(0, 0, &m), 0);
        assert_eq!(mod_add(65536, 1, &m), 0);
        assert_eq!(mod_sub(0, 1, &m), 65536);
    }

    #[test]
    fn mult_identities() {
        let m = q54();
        let q = m.value();
        assert_eq!(mod_mult(1, 12345, &m), 12345);
        assert_eq!(mod_mult(q - 1, q - 1, &m), 1); // (-1)^2
    }

    #[test]
    fn pow_trivial_and_fermat() {
        let m = Modulus::new(65537).unwrap();
        assert_eq!(pow_mod(123, 0, &m), 1);
        assert_eq!(pow_mod(123, 65536, &m), 1);
        assert_eq!(mod_mult(inv_mod(9999, &m), 9999, &m), 1);
    }

    #[test]
    fn root_order_exact() {
        // r^16 = -1 mod 65537 certifies a primitive 32nd root
        let m = Modulus::new(65537).unwrap();
        let r = find_2n_root(&m, 16).unwrap();
        assert_eq!(pow_mod(r, 16, &m), 65536);
        assert_eq!(pow_mod(r, 32, &m), 1);
        // exhaustive order check: no smaller power-of-two order
        let mut x = r;
        for _ in 0..4 {
            assert_ne!(x, 1);
            x = mod_mult(x, x, &m);
        }
    }

    #[test]
    fn root_requires_congruence() {
        let m = Modulus::new(65537).unwrap();
        // 65537 - 1 = 2^16, so no 2N-th root for N = 2^16
        assert!(find_2n_root(&m, 1 << 16).is_err());
    }

    #[test]
    fn oracle_equivalence_sampled() {
        // bit-exact equality against schoolbook wide arithmetic;
        // the million-sample run lives in the acceptance suite
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let m = q54();
        let q = m.value();
        for _ in 0..20_000 {
            let a = rng.gen_range(0..q);
            let b = rng.gen_range(0..q);
            let x: u128 = rng.gen_range(0..(q as u128 * q as u128));
            assert_eq!(mod_red(x, &m) as u128, x % q as u128);
            assert_eq!(mod_add(a, b, &m) as u128, (a as u128 + b as u128) % q as u128);
            assert_eq!(mod_mult(a, b, &m) as u128, (a as u128 * b as u128) % q as u128);
        }
    }

    #[test]
    fn mult_associativity_sampled() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        let m = q54();
        let q = m.value();
        for _ in 0..1000 {
            let (a, b, c) = (rng.gen_range(0..q), rng.gen_range(0..q), rng.gen_range(0..q));
            assert_eq!(
                mod_mult(a, mod_mult(b, c, &m), &m),
                mod_mult(mod_mult(a, b, &m), c, &m)
            );
        }
    }

    #[test]
    fn primality_known_values() {
        assert!(is_prime(2));
        assert!(is_prime(65537));
        assert!(is_prime((1 << 13) + 1) == false); // 8193 = 3 * 2731
        assert!(is_prime(0xFFFF_FFFF_FFFF_FFC5)); // largest prime < 2^64
        assert!(!is_prime(0xFFFF_FFFF_FFFF_FFFF));
    }
}
