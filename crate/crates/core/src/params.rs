//! CKKS parameter sets and derived size quantities.
//!
//! A parameter set fixes the polynomial degree-bound N, the RNS modulus
//! chain, and the key-switching digit layout. Both the functional engine
//! and the cost model read every size they need from here.
//!
//! Two presets ship with the crate:
//!
//! * [`CkksParams::paper`] — N = 2^16, 32 limbs of 54 bits (1728 total
//!   modulus bits), L = 23, L_boot = 17, dnum = 3. Used for cost modeling
//!   and large-scale runs.
//! * [`CkksParams::desk`] — N = 2^13, L = 7, dnum = 3, with rescale primes
//!   sized near the 2^40 encryption scale. Small enough for fast exact
//!   tests while still exercising multi-digit key switching.
//!
//! Note the limb ledger: the modulus chain `moduli` may carry more primes
//! than a ciphertext ever uses (the `paper` preset has 32 while fresh
//! ciphertexts hold L+1 = 24). Ciphertexts use the first L+1 entries; the
//! full list defines log Q and the bit-packed sizes. Key switching adds
//! `ext_limbs` extension primes from `ext_moduli`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modarith::is_prime;

/// A CKKS parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CkksParams {
    /// Power-of-two polynomial degree-bound.
    #[serde(rename = "N")]
    pub n_degree: usize,
    /// Slot count, at most N/2.
    pub n: usize,
    /// RNS word size in bits; every modulus is below 2^word_bits.
    pub word_bits: u32,
    /// Ordered modulus chain {q_0, ..}. Ciphertexts use the first L+1.
    pub moduli: Vec<u64>,
    /// Extension primes for the raised modulus in key switching.
    pub ext_moduli: Vec<u64>,
    /// Maximum ciphertext level.
    #[serde(rename = "L")]
    pub level_max: usize,
    /// Levels consumed by one bootstrapping pass.
    #[serde(rename = "L_boot")]
    pub level_boot: usize,
    /// Digit count for key switching.
    pub dnum: usize,
    /// Limbs per key-switching digit: ceil((L+1)/dnum).
    pub alpha: usize,
    /// Extension limb count: alpha + 1.
    pub ext_limbs: usize,
    /// Bootstrapping linear-transform depth.
    #[serde(rename = "fftIter")]
    pub fft_iter: usize,
    /// log2 of the encryption scale.
    pub delta_bits: u32,
    /// Declared security level. Metadata only, never validated.
    pub lambda: u32,
}

impl CkksParams {
    /// Validate every structural invariant of the set.
    pub fn validate(&self) -> Result<()> {
        if !self.n_degree.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "N = {} is not a power of two",
                self.n_degree
            )));
        }
        if self.n == 0 || self.n > self.n_degree / 2 || !self.n.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "slot count n = {} must be a power of two at most N/2 = {}",
                self.n,
                self.n_degree / 2
            )));
        }
        if !(20..=61).contains(&self.word_bits) {
            return Err(Error::InvalidParams(format!(
                "word_bits = {} outside [20, 61]",
                self.word_bits
            )));
        }
        if self.moduli.len() < self.level_max + 1 {
            return Err(Error::InvalidParams(format!(
                "chain has {} moduli but L = {} needs {}",
                self.moduli.len(),
                self.level_max,
                self.level_max + 1
            )));
        }
        if self.level_boot > self.level_max {
            return Err(Error::InvalidParams(format!(
                "L_boot = {} exceeds L = {}",
                self.level_boot, self.level_max
            )));
        }
        if self.dnum == 0 {
            return Err(Error::InvalidParams("dnum must be positive".into()));
        }
        let expect_alpha = (self.level_max + 1 + self.dnum - 1) / self.dnum;
        if self.alpha != expect_alpha {
            return Err(Error::InvalidParams(format!(
                "alpha = {} but ceil((L+1)/dnum) = {}",
                self.alpha, expect_alpha
            )));
        }
        if self.ext_limbs != self.alpha + 1 {
            return Err(Error::InvalidParams(format!(
                "ext_limbs = {} but alpha + 1 = {}",
                self.ext_limbs,
                self.alpha + 1
            )));
        }
        if self.ext_moduli.len() != self.ext_limbs {
            return Err(Error::InvalidParams(format!(
                "ext_moduli has {} entries, ext_limbs = {}",
                self.ext_moduli.len(),
                self.ext_limbs
            )));
        }
        if self.delta_bits == 0 || self.delta_bits >= self.word_bits + 8 {
            return Err(Error::InvalidParams(format!(
                "delta_bits = {} unreasonable for word_bits = {}",
                self.delta_bits, self.word_bits
            )));
        }

        let two_n = 2 * self.n_degree as u64;
        let mut seen = std::collections::HashSet::new();
        for &q in self.moduli.iter().chain(self.ext_moduli.iter()) {
            if !seen.insert(q) {
                return Err(Error::InvalidParams(format!("duplicate modulus {q}")));
            }
            if q >= 1u64 << self.word_bits {
                return Err(Error::InvalidParams(format!(
                    "modulus {q} is not below 2^{}",
                    self.word_bits
                )));
            }
            if q % two_n != 1 {
                return Err(Error::InvalidParams(format!(
                    "modulus {q} is not 1 mod 2N = {two_n}"
                )));
            }
            if !is_prime(q) {
                return Err(Error::InvalidParams(format!("modulus {q} is not prime")));
            }
        }
        Ok(())
    }

    /// Moduli a ciphertext at `level` carries: the chain prefix of length
    /// level + 1.
    pub fn ct_moduli(&self, level: usize) -> &[u64] {
        &self.moduli[..=level]
    }

    /// Digit ranges of the key-switching decomposition at `level`: chunks
    /// of `alpha` chain indexes, the last one possibly short.
    pub fn digit_ranges(&self, level: usize) -> Vec<std::ops::Range<usize>> {
        (0..=level)
            .step_by(self.alpha)
            .map(|start| start..(start + self.alpha).min(level + 1))
            .collect()
    }

    /// Sum of modulus bit lengths over the full chain (log Q).
    pub fn log_q_bits(&self) -> u32 {
        self.moduli.iter().map(|q| 64 - q.leading_zeros()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: CkksParams = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    /// The large preset: N = 2^16, 32 limbs of exactly 54 bits, L = 23,
    /// L_boot = 17, dnum = 3, fftIter = 4.
    pub fn paper() -> Self {
        let n_degree = 1 << 16;
        let all = gen_moduli(41, 54, n_degree, 0).expect("54-bit chain");
        let p = CkksParams {
            n_degree,
            n: 1 << 15,
            word_bits: 54,
            moduli: all[..32].to_vec(),
            ext_moduli: all[32..41].to_vec(),
            level_max: 23,
            level_boot: 17,
            dnum: 3,
            alpha: 8,
            ext_limbs: 9,
            fft_iter: 4,
            delta_bits: 50,
            lambda: 128,
        };
        p.validate().expect("paper preset validates");
        p
    }

    /// The small preset for fast exact tests: N = 2^13, L = 7, dnum = 3.
    ///
    /// The first prime is 49 bits for decryption headroom; the remaining
    /// rescale primes sit just above the 2^40 scale so that rescaling
    /// keeps the scale near delta across a depth-3 circuit.
    pub fn desk() -> Self {
        let n_degree = 1 << 13;
        let q0 = gen_moduli(1, 49, n_degree, 0).expect("49-bit prime");
        let qs = gen_moduli(7, 41, n_degree, 0).expect("41-bit chain");
        let ext = gen_moduli(4, 54, n_degree, 0).expect("54-bit ext chain");
        let mut moduli = q0;
        moduli.extend(qs);
        let p = CkksParams {
            n_degree,
            n: 1 << 12,
            word_bits: 54,
            moduli,
            ext_moduli: ext,
            level_max: 7,
            level_boot: 4,
            dnum: 3,
            alpha: 3,
            ext_limbs: 4,
            fft_iter: 1,
            delta_bits: 40,
            lambda: 0,
        };
        p.validate().expect("desk preset validates");
        p
    }
}

/// Size and shape quantities derived from a parameter set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedSizes {
    /// Bit-packed ciphertext size: 2 * N * log Q bits.
    pub ciphertext_bits: u64,
    /// Bit-packed ciphertext size in bytes.
    pub ciphertext_bytes: u64,
    /// One limb, bit-packed: N * word_bits / 8.
    pub limb_bytes_packed: u64,
    /// One limb as stored and moved: one 64-bit word per residue.
    pub limb_bytes_stored: u64,
    /// Number of factors in the chain.
    pub limb_count: usize,
    /// Sum of modulus bit lengths.
    pub log_q_bits: u32,
    /// Stored-byte estimate for one switching key:
    /// dnum digit pairs at the raised basis of (L+1) + ext_limbs limbs.
    pub evk_bytes: u64,
}

/// Populate a [`DerivedSizes`] from a validated parameter set.
///
/// Bit-packed fields exist to reproduce published ciphertext sizes;
/// traffic modeling uses the stored sizes (8 bytes per residue) because
/// that is what a memory system actually moves.
pub fn derive_sizes(params: &CkksParams) -> Result<DerivedSizes> {
    params.validate()?;
    let n = params.n_degree as u64;
    let log_q = params.log_q_bits();
    let raised_limbs = (params.level_max + 1 + params.ext_limbs) as u64;
    Ok(DerivedSizes {
        ciphertext_bits: 2 * n * log_q as u64,
        ciphertext_bytes: 2 * n * log_q as u64 / 8,
        limb_bytes_packed: n * params.word_bits as u64 / 8,
        limb_bytes_stored: n * 8,
        limb_count: params.moduli.len(),
        log_q_bits: log_q,
        evk_bytes: params.dnum as u64 * 2 * raised_limbs * n * 8,
    })
}

/// Generate `count` distinct NTT-friendly primes of exactly `word_bits`
/// bits, scanning candidates congruent to 1 mod 2N downward from
/// 2^word_bits.
///
/// The scan is fully deterministic; `seed` is accepted for interface
/// stability but does not influence the result.
pub fn gen_moduli(count: usize, word_bits: u32, n_degree: usize, seed: u64) -> Result<Vec<u64>> {
    let _ = seed;
    if count == 0 {
        return Err(Error::InvalidParams("requested zero primes".into()));
    }
    if !(20..=61).contains(&word_bits) {
        return Err(Error::InvalidParams(format!(
            "word_bits = {word_bits} outside [20, 61]"
        )));
    }
    if !n_degree.is_power_of_two() {
        return Err(Error::InvalidParams(format!(
            "N = {n_degree} is not a power of two"
        )));
    }
    let two_n = 2 * n_degree as u64;
    let hi = 1u64 << word_bits;
    let lo = 1u64 << (word_bits - 1);
    // largest candidate = 1 mod 2N strictly below 2^word_bits
    let mut c = hi - two_n + 1;
    let mut out = Vec::with_capacity(count);
    while out.len() < count && c >= lo {
        if is_prime(c) {
            out.push(c);
        }
        match c.checked_sub(two_n) {
            Some(next) => c = next,
            None => break,
        }
    }
    if out.len() < count {
        return Err(Error::NotEnoughPrimes {
            count,
            bits: word_bits,
            modulus: two_n,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_moduli_postconditions() {
        let ps = gen_moduli(1, 17, 16, 0).unwrap();
        assert_eq!(ps.len(), 1);
        let p = ps[0];
        assert!(is_prime(p));
        assert_eq!(p % 32, 1);
        assert!(p >= 1 << 16 && p < 1 << 17);
        // 65537 is in the admissible set
        assert!(is_prime(65537) && 65537 % 32 == 1);
    }

    #[test]
    fn gen_moduli_paper_chain() {
        let ps = gen_moduli(32, 54, 1 << 16, 0).unwrap();
        assert_eq!(ps.len(), 32);
        let total_bits: u32 = ps.iter().map(|q| 64 - q.leading_zeros()).sum();
        assert_eq!(total_bits, 1728); // 32 distinct 54-bit primes
        let set: std::collections::HashSet<_> = ps.iter().collect();
        assert_eq!(set.len(), 32);
    }

    #[test]
    fn gen_moduli_rejects_empty_and_exhaustion() {
        assert!(gen_moduli(0, 54, 1 << 16, 0).is_err());
        // only a handful of 20-bit primes are 1 mod 2^15
        assert!(gen_moduli(10_000, 20, 1 << 14, 0).is_err());
    }

    #[test]
    fn gen_moduli_deterministic() {
        let a = gen_moduli(8, 41, 1 << 13, 1).unwrap();
        let b = gen_moduli(8, 41, 1 << 13, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn paper_preset_sizes() {
        let p = CkksParams::paper();
        let s = derive_sizes(&p).unwrap();
        assert_eq!(s.log_q_bits, 1728);
        assert_eq!(s.ciphertext_bytes, 28_311_552); // 28.3 MB
        assert_eq!(s.limb_bytes_packed, 442_368); // ~0.44 MB
        assert_eq!(s.limb_count, 32);
        assert_eq!(s.evk_bytes, 103_809_024);
        // within 10% of the 112 MB key-fetch figure
        assert!((s.evk_bytes as f64 - 112e6).abs() <= 0.1 * 112e6);
    }

    #[test]
    fn desk_preset_shape() {
        let p = CkksParams::desk();
        assert_eq!(p.moduli.len(), 8);
        assert_eq!(p.alpha, 3);
        assert_eq!(p.ext_limbs, 4);
        assert_eq!(p.digit_ranges(7), vec![0..3, 3..6, 6..8]);
        assert_eq!(p.digit_ranges(4), vec![0..3, 3..5]);
        let s = derive_sizes(&p).unwrap();
        assert_eq!(s.limb_bytes_stored, 8 * 8192);
    }

    #[test]
    fn tiny_stored_limb() {
        // 16 coefficients, one 17-bit limb: 128 stored bytes
        let ps = gen_moduli(1, 17, 16, 0).unwrap();
        let p = CkksParams {
            n_degree: 16,
            n: 8,
            word_bits: 20,
            moduli: ps,
            ext_moduli: gen_moduli(2, 21, 16, 0).unwrap(),
            level_max: 0,
            level_boot: 0,
            dnum: 1,
            alpha: 1,
            ext_limbs: 2,
            fft_iter: 1,
            delta_bits: 10,
            lambda: 0,
        };
        p.validate().unwrap();
        let s = derive_sizes(&p).unwrap();
        assert_eq!(s.limb_bytes_stored, 128);
    }

    #[test]
    fn json_roundtrip_and_field_names() {
        let p = CkksParams::desk();
        let text = p.to_json().unwrap();
        for key in ["\"N\"", "\"L\"", "\"L_boot\"", "\"fftIter\"", "\"dnum\"", "\"moduli\""] {
            assert!(text.contains(key), "missing {key} in {text}");
        }
        let q = CkksParams::from_json(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn validation_rejects_bad_sets() {
        let mut p = CkksParams::desk();
        p.alpha = 4;
        assert!(p.validate().is_err());
        let mut p = CkksParams::desk();
        p.moduli[2] = p.moduli[1];
        assert!(p.validate().is_err());
        let mut p = CkksParams::desk();
        p.moduli[0] -= 1; // even, not prime, wrong congruence
        assert!(p.validate().is_err());
        let mut p = CkksParams::desk();
        p.level_boot = 9;
        assert!(p.validate().is_err());
    }

    #[test]
    fn log_q_matches_derive() {
        for p in [CkksParams::desk(), CkksParams::paper()] {
            let s = derive_sizes(&p).unwrap();
            assert_eq!(s.log_q_bits, p.log_q_bits());
        }
    }
}
