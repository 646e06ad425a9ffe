//! RNS polynomial arithmetic in R_Q = Z_Q[x]/(x^N + 1).
//!
//! An [`RnsPoly`] is a stack of limbs: limb i holds the polynomial's
//! residues under chain modulus `basis[i]`. All operations go through a
//! [`ModulusChain`], which owns the moduli and lazily builds one NTT
//! twiddle table per modulus. Every operation returns an [`OpStats`]
//! record with its exact instruction and byte counts; the counts are
//! closed-form functions of (N, limb count, op) written next to the loops
//! they describe.

mod ntt;

pub use ntt::NttTable;

use std::ops::Range;
use std::sync::OnceLock;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modarith::{self, Modulus};
use crate::params::CkksParams;

/// Polynomial representation tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rep {
    Coeff,
    Eval,
}

impl Rep {
    fn name(self) -> &'static str {
        match self {
            Rep::Coeff => "COEFF",
            Rep::Eval => "EVAL",
        }
    }
}

/// Exact instruction and byte counts for one or more polynomial ops.
///
/// `mod_red` counts standalone reductions only; the reduction inside
/// every `mod_mult` is part of that instruction. `plain_mult`/`plain_add`
/// are raw 64-bit integer ops (the wide multiply-accumulates of base
/// conversion), which the cost model prices separately from the modular
/// instructions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpStats {
    pub mod_add: u64,
    pub mod_mult: u64,
    pub mod_red: u64,
    pub plain_add: u64,
    pub plain_mult: u64,
    pub ntt: u64,
    pub intt: u64,
    pub bytes_read: u64,
    pub bytes_written: u64,
}

impl OpStats {
    pub fn merge(&mut self, other: &OpStats) {
        self.mod_add += other.mod_add;
        self.mod_mult += other.mod_mult;
        self.mod_red += other.mod_red;
        self.plain_add += other.plain_add;
        self.plain_mult += other.plain_mult;
        self.ntt += other.ntt;
        self.intt += other.intt;
        self.bytes_read += other.bytes_read;
        self.bytes_written += other.bytes_written;
    }

    pub fn total_instructions(&self) -> u64 {
        self.mod_add + self.mod_mult + self.mod_red + self.plain_add + self.plain_mult
    }
}

/// The modulus chain: ciphertext moduli followed by extension moduli,
/// with lazily built NTT tables. Safe to share across threads; tables are
/// initialized once by whichever thread gets there first.
pub struct ModulusChain {
    n_degree: usize,
    moduli: Vec<Modulus>,
    /// Index where extension moduli start.
    ext_start: usize,
    tables: Vec<OnceLock<NttTable>>,
}

impl ModulusChain {
    pub fn from_params(params: &CkksParams) -> Result<Self> {
        params.validate()?;
        let mut moduli = Vec::with_capacity(params.moduli.len() + params.ext_moduli.len());
        for &q in params.moduli.iter().chain(params.ext_moduli.iter()) {
            moduli.push(Modulus::new(q)?);
        }
        let tables = (0..moduli.len()).map(|_| OnceLock::new()).collect();
        Ok(ModulusChain {
            n_degree: params.n_degree,
            moduli,
            ext_start: params.moduli.len(),
            tables,
        })
    }

    /// Chain for ad-hoc tests: every modulus a ciphertext modulus.
    pub fn from_moduli(n_degree: usize, qs: &[u64]) -> Result<Self> {
        let moduli: Result<Vec<_>> = qs.iter().map(|&q| Modulus::new(q)).collect();
        let moduli = moduli?;
        let tables = (0..moduli.len()).map(|_| OnceLock::new()).collect();
        Ok(ModulusChain {
            n_degree,
            moduli,
            ext_start: qs.len(),
            tables,
        })
    }

    pub fn n_degree(&self) -> usize {
        self.n_degree
    }

    pub fn modulus(&self, idx: usize) -> &Modulus {
        &self.moduli[idx]
    }

    /// Basis indexes of a ciphertext at `level`.
    pub fn ct_basis(&self, level: usize) -> Vec<usize> {
        (0..=level).collect()
    }

    /// Basis indexes of the extension block.
    pub fn ext_basis(&self) -> Vec<usize> {
        (self.ext_start..self.moduli.len()).collect()
    }

    pub fn table(&self, idx: usize) -> &NttTable {
        self.tables[idx].get_or_init(|| {
            NttTable::new(&self.moduli[idx], self.n_degree).expect("NTT-friendly modulus")
        })
    }

    fn limb_bytes(&self) -> u64 {
        self.n_degree as u64 * 8
    }

    // ---- construction ------------------------------------------------

    pub fn zero(&self, basis: &[usize], rep: Rep) -> RnsPoly {
        RnsPoly {
            limbs: vec![vec![0u64; self.n_degree]; basis.len()],
            rep,
            basis: basis.to_vec(),
        }
    }

    /// Lift signed coefficients into every limb of the basis.
    pub fn from_i64_coeffs(&self, coeffs: &[i64], basis: &[usize], rep_tag: Rep) -> RnsPoly {
        assert_eq!(coeffs.len(), self.n_degree);
        debug_assert_eq!(rep_tag, Rep::Coeff, "signed lift produces coefficients");
        let limbs = basis
            .iter()
            .map(|&b| {
                let q = self.moduli[b].value();
                coeffs
                    .iter()
                    .map(|&c| {
                        if c >= 0 {
                            c as u64 % q
                        } else {
                            q - ((-(c as i128)) as u64 % q)
                        }
                        .rem_euclid(q)
                    })
                    .collect()
            })
            .collect();
        RnsPoly {
            limbs,
            rep: Rep::Coeff,
            basis: basis.to_vec(),
        }
    }

    pub fn uniform_random<R: rand::Rng>(&self, basis: &[usize], rep: Rep, rng: &mut R) -> RnsPoly {
        let limbs = basis
            .iter()
            .map(|&b| {
                let q = self.moduli[b].value();
                (0..self.n_degree).map(|_| rng.gen_range(0..q)).collect()
            })
            .collect();
        RnsPoly {
            limbs,
            rep,
            basis: basis.to_vec(),
        }
    }

    // ---- transforms ----------------------------------------------------

    /// Per-limb negacyclic NTT; output representation is EVAL.
    pub fn ntt_forward(&self, mut p: RnsPoly) -> Result<(RnsPoly, OpStats)> {
        if p.rep != Rep::Coeff {
            return Err(Error::WrongRepresentation {
                expected: "COEFF",
                got: p.rep.name(),
            });
        }
        for (limb, &b) in p.limbs.iter_mut().zip(&p.basis) {
            self.table(b).forward(limb, &self.moduli[b]);
        }
        p.rep = Rep::Eval;
        let l = p.basis.len() as u64;
        let (mm, ma) = NttTable::forward_counts(self.n_degree);
        let stats = OpStats {
            mod_mult: l * mm,
            mod_add: l * ma,
            ntt: l,
            bytes_read: l * self.limb_bytes(),
            bytes_written: l * self.limb_bytes(),
            ..Default::default()
        };
        Ok((p, stats))
    }

    /// Per-limb inverse transform; output representation is COEFF.
    pub fn ntt_inverse(&self, mut p: RnsPoly) -> Result<(RnsPoly, OpStats)> {
        if p.rep != Rep::Eval {
            return Err(Error::WrongRepresentation {
                expected: "EVAL",
                got: p.rep.name(),
            });
        }
        for (limb, &b) in p.limbs.iter_mut().zip(&p.basis) {
            self.table(b).inverse(limb, &self.moduli[b]);
        }
        p.rep = Rep::Coeff;
        let l = p.basis.len() as u64;
        let (mm, ma) = NttTable::inverse_counts(self.n_degree);
        let stats = OpStats {
            mod_mult: l * mm,
            mod_add: l * ma,
            intt: l,
            bytes_read: l * self.limb_bytes(),
            bytes_written: l * self.limb_bytes(),
            ..Default::default()
        };
        Ok((p, stats))
    }

    // ---- pointwise arithmetic -------------------------------------------

    fn check_compatible(a: &RnsPoly, b: &RnsPoly) -> Result<()> {
        if a.basis != b.basis {
            return Err(Error::BasisMismatch(format!(
                "{:?} vs {:?}",
                a.basis, b.basis
            )));
        }
        if a.rep != b.rep {
            return Err(Error::WrongRepresentation {
                expected: a.rep.name(),
                got: b.rep.name(),
            });
        }
        Ok(())
    }

    pub fn add(&self, a: &RnsPoly, b: &RnsPoly) -> Result<(RnsPoly, OpStats)> {
        Self::check_compatible(a, b)?;
        let mut out = a.clone();
        for (i, &bi) in a.basis.iter().enumerate() {
            let m = &self.moduli[bi];
            for (x, &y) in out.limbs[i].iter_mut().zip(&b.limbs[i]) {
                *x = modarith::mod_add(*x, y, m);
            }
        }
        let l = a.basis.len() as u64;
        let stats = OpStats {
            mod_add: l * self.n_degree as u64,
            bytes_read: 2 * l * self.limb_bytes(),
            bytes_written: l * self.limb_bytes(),
            ..Default::default()
        };
        Ok((out, stats))
    }

    pub fn sub(&self, a: &RnsPoly, b: &RnsPoly) -> Result<(RnsPoly, OpStats)> {
        Self::check_compatible(a, b)?;
        let mut out = a.clone();
        for (i, &bi) in a.basis.iter().enumerate() {
            let m = &self.moduli[bi];
            for (x, &y) in out.limbs[i].iter_mut().zip(&b.limbs[i]) {
                *x = modarith::mod_sub(*x, y, m);
            }
        }
        let l = a.basis.len() as u64;
        let stats = OpStats {
            mod_add: l * self.n_degree as u64,
            bytes_read: 2 * l * self.limb_bytes(),
            bytes_written: l * self.limb_bytes(),
            ..Default::default()
        };
        Ok((out, stats))
    }

    pub fn negate(&self, a: &RnsPoly) -> (RnsPoly, OpStats) {
        let mut out = a.clone();
        for (i, &bi) in a.basis.iter().enumerate() {
            let m = &self.moduli[bi];
            for x in out.limbs[i].iter_mut() {
                *x = modarith::mod_neg(*x, m);
            }
        }
        let l = a.basis.len() as u64;
        let stats = OpStats {
            mod_add: l * self.n_degree as u64,
            bytes_read: l * self.limb_bytes(),
            bytes_written: l * self.limb_bytes(),
            ..Default::default()
        };
        (out, stats)
    }

    /// Coefficient-wise product; realizes ring multiplication in O(N) on
    /// evaluation-representation operands.
    pub fn pointwise_mult(&self, a: &RnsPoly, b: &RnsPoly) -> Result<(RnsPoly, OpStats)> {
        Self::check_compatible(a, b)?;
        if a.rep != Rep::Eval {
            return Err(Error::WrongRepresentation {
                expected: "EVAL",
                got: a.rep.name(),
            });
        }
        let mut out = a.clone();
        for (i, &bi) in a.basis.iter().enumerate() {
            let m = &self.moduli[bi];
            for (x, &y) in out.limbs[i].iter_mut().zip(&b.limbs[i]) {
                *x = modarith::mod_mult(*x, y, m);
            }
        }
        let l = a.basis.len() as u64;
        let stats = OpStats {
            mod_mult: l * self.n_degree as u64,
            bytes_read: 2 * l * self.limb_bytes(),
            bytes_written: l * self.limb_bytes(),
            ..Default::default()
        };
        Ok((out, stats))
    }

    /// Multiply limb i by the scalar `constants[i]`. Valid in either
    /// representation.
    pub fn mul_constant(&self, a: &RnsPoly, constants: &[u64]) -> (RnsPoly, OpStats) {
        assert_eq!(constants.len(), a.basis.len());
        let mut out = a.clone();
        for (i, &bi) in a.basis.iter().enumerate() {
            let m = &self.moduli[bi];
            let c = constants[i] % m.value();
            for x in out.limbs[i].iter_mut() {
                *x = modarith::mod_mult(*x, c, m);
            }
        }
        let l = a.basis.len() as u64;
        let stats = OpStats {
            mod_mult: l * self.n_degree as u64,
            bytes_read: l * self.limb_bytes(),
            bytes_written: l * self.limb_bytes(),
            ..Default::default()
        };
        (out, stats)
    }

    /// Add the per-limb scalar `constants[i]` to every residue of limb i.
    /// On an EVAL polynomial this adds a constant to every slot.
    pub fn add_constant(&self, a: &RnsPoly, constants: &[u64]) -> (RnsPoly, OpStats) {
        assert_eq!(constants.len(), a.basis.len());
        let mut out = a.clone();
        for (i, &bi) in a.basis.iter().enumerate() {
            let m = &self.moduli[bi];
            let c = constants[i] % m.value();
            for x in out.limbs[i].iter_mut() {
                *x = modarith::mod_add(*x, c, m);
            }
        }
        let l = a.basis.len() as u64;
        let stats = OpStats {
            mod_add: l * self.n_degree as u64,
            bytes_read: l * self.limb_bytes(),
            bytes_written: l * self.limb_bytes(),
            ..Default::default()
        };
        (out, stats)
    }

    // ---- automorphisms --------------------------------------------------

    /// Apply x -> x^(5^r mod 2N), the slot-rotation automorphism.
    ///
    /// Pure index shuffling: a permutation of evaluations in EVAL, an
    /// index-and-sign map in COEFF. No modular instructions are spent.
    pub fn automorph(&self, a: &RnsPoly, r: u64) -> (RnsPoly, OpStats) {
        let t_exp = galois_exponent(r, self.n_degree);
        self.automorph_exponent(a, t_exp)
    }

    /// Apply x -> x^(2N-1), complex conjugation on the slots.
    pub fn conjugate(&self, a: &RnsPoly) -> (RnsPoly, OpStats) {
        self.automorph_exponent(a, 2 * self.n_degree as u64 - 1)
    }

    pub(crate) fn automorph_exponent(&self, a: &RnsPoly, t_exp: u64) -> (RnsPoly, OpStats) {
        let n = self.n_degree;
        let two_n = 2 * n as u64;
        let mut out = self.zero(&a.basis, a.rep);
        match a.rep {
            Rep::Eval => {
                let perm = self.table(a.basis[0]).eval_automorph_perm(t_exp);
                for (i, limb) in a.limbs.iter().enumerate() {
                    for (j, &p) in perm.iter().enumerate() {
                        out.limbs[i][j] = limb[p];
                    }
                }
            }
            Rep::Coeff => {
                for (i, &bi) in a.basis.iter().enumerate() {
                    let q = self.moduli[bi].value();
                    for (j, &c) in a.limbs[i].iter().enumerate() {
                        let e = (j as u64 * t_exp) % two_n;
                        if e < n as u64 {
                            out.limbs[i][e as usize] = c;
                        } else {
                            out.limbs[i][(e - n as u64) as usize] =
                                if c == 0 { 0 } else { q - c };
                        }
                    }
                }
            }
        }
        let l = a.basis.len() as u64;
        let stats = OpStats {
            bytes_read: l * self.limb_bytes(),
            bytes_written: l * self.limb_bytes(),
            ..Default::default()
        };
        (out, stats)
    }

    // ---- RNS basis conversion ---------------------------------------

    /// Fast approximate base extension of a COEFF polynomial from its own
    /// basis onto `target_basis` (disjoint from the source):
    ///
    ///   y_t = sum_i [x_i * (Q/q_i)^{-1}]_{q_i} * (Q/q_i)  mod t
    ///
    /// The result represents x + u*Q for some overflow 0 <= u < l; the
    /// slack is absorbed by the caller (CKKS noise or a later rounding).
    pub fn base_convert(&self, p: &RnsPoly, target_basis: &[usize]) -> Result<(RnsPoly, OpStats)> {
        if p.rep != Rep::Coeff {
            return Err(Error::WrongRepresentation {
                expected: "COEFF",
                got: p.rep.name(),
            });
        }
        for t in target_basis {
            if p.basis.contains(t) {
                return Err(Error::BasisMismatch(format!(
                    "target modulus index {t} overlaps the source basis"
                )));
            }
        }
        let src = &p.basis;
        let q_prod: BigUint = src
            .iter()
            .map(|&i| BigUint::from(self.moduli[i].value()))
            .product();

        // per-source constants: (Q/q_i)^{-1} mod q_i
        let mut inv = Vec::with_capacity(src.len());
        let mut q_hat = Vec::with_capacity(src.len());
        for &i in src {
            let m = &self.moduli[i];
            let hat = &q_prod / BigUint::from(m.value());
            let hat_mod = biguint_mod_u64(&hat, m.value());
            inv.push(modarith::inv_mod(hat_mod, m));
            q_hat.push(hat);
        }
        // per (source, target) weights: (Q/q_i) mod t
        let weights: Vec<Vec<u64>> = target_basis
            .iter()
            .map(|&t| {
                let qt = self.moduli[t].value();
                q_hat.iter().map(|h| biguint_mod_u64(h, qt)).collect()
            })
            .collect();

        let n = self.n_degree;
        // z_i = [x_i * (Q/q_i)^{-1}]_{q_i}, shared across targets
        let mut z = vec![vec![0u64; n]; src.len()];
        for (i, &bi) in src.iter().enumerate() {
            let m = &self.moduli[bi];
            for j in 0..n {
                z[i][j] = modarith::mod_mult(p.limbs[i][j], inv[i], m);
            }
        }
        let mut out = self.zero(target_basis, Rep::Coeff);
        for (ti, &t) in target_basis.iter().enumerate() {
            let m = &self.moduli[t];
            let w = &weights[ti];
            for j in 0..n {
                // lazy u128 accumulation, one reduction per output residue
                let mut acc = 0u128;
                for i in 0..src.len() {
                    acc += z[i][j] as u128 * w[i] as u128;
                }
                out.limbs[ti][j] = modarith::mod_red(acc, m);
            }
        }
        let (ls, lt) = (src.len() as u64, target_basis.len() as u64);
        let nn = n as u64;
        let stats = OpStats {
            mod_mult: ls * nn,
            plain_mult: ls * lt * nn,
            plain_add: ls * lt * nn,
            mod_red: lt * nn,
            bytes_read: ls * self.limb_bytes(),
            bytes_written: lt * self.limb_bytes(),
            ..Default::default()
        };
        Ok((out, stats))
    }

    /// Extend a COEFF polynomial by the extension basis, keeping the
    /// original limbs exact.
    pub fn mod_raise(&self, p: &RnsPoly, target_basis: &[usize]) -> Result<(RnsPoly, OpStats)> {
        let (ext, stats) = self.base_convert(p, target_basis)?;
        let mut limbs = p.limbs.clone();
        limbs.extend(ext.limbs);
        let mut basis = p.basis.clone();
        basis.extend_from_slice(target_basis);
        Ok((
            RnsPoly {
                limbs,
                rep: Rep::Coeff,
                basis,
            },
            stats,
        ))
    }

    /// Divide by the product P of the trailing `basis[n_keep..]` moduli,
    /// round to nearest, and drop those limbs. COEFF representation.
    ///
    /// Rounding uses the half-offset trick: (x + floor(P/2)) is floor-
    /// divided via one approximate base conversion of the dropped block,
    /// so the result carries the usual small conversion slack on top of
    /// the exact rounding.
    pub fn mod_down(&self, p: &RnsPoly, n_keep: usize) -> Result<(RnsPoly, OpStats)> {
        if p.rep != Rep::Coeff {
            return Err(Error::WrongRepresentation {
                expected: "COEFF",
                got: p.rep.name(),
            });
        }
        if n_keep == 0 || n_keep >= p.basis.len() {
            return Err(Error::BasisMismatch(format!(
                "mod_down keeping {} of {} limbs",
                n_keep,
                p.basis.len()
            )));
        }
        let mut stats = OpStats::default();
        let kept = &p.basis[..n_keep];
        let dropped = &p.basis[n_keep..];
        let n = self.n_degree;

        let p_prod: BigUint = dropped
            .iter()
            .map(|&i| BigUint::from(self.moduli[i].value()))
            .product();
        let half = &p_prod >> 1;

        // offset the dropped block by floor(P/2)
        let mut drop_poly = RnsPoly {
            limbs: p.limbs[n_keep..].to_vec(),
            rep: Rep::Coeff,
            basis: dropped.to_vec(),
        };
        for (i, &bi) in dropped.iter().enumerate() {
            let m = &self.moduli[bi];
            let h = biguint_mod_u64(&half, m.value());
            for x in drop_poly.limbs[i].iter_mut() {
                *x = modarith::mod_add(*x, h, m);
            }
        }
        stats.mod_add += dropped.len() as u64 * n as u64;
        stats.bytes_read += dropped.len() as u64 * self.limb_bytes();
        stats.bytes_written += dropped.len() as u64 * self.limb_bytes();

        let (conv, cstats) = self.base_convert(&drop_poly, kept)?;
        stats.merge(&cstats);

        // x' = (x + floor(P/2) - conv) * P^{-1} on every kept limb
        let mut out = RnsPoly {
            limbs: p.limbs[..n_keep].to_vec(),
            rep: Rep::Coeff,
            basis: kept.to_vec(),
        };
        for (i, &bi) in kept.iter().enumerate() {
            let m = &self.moduli[bi];
            let h = biguint_mod_u64(&half, m.value());
            let p_mod = biguint_mod_u64(&p_prod, m.value());
            let p_inv = modarith::inv_mod(p_mod, m);
            for (x, &c) in out.limbs[i].iter_mut().zip(&conv.limbs[i]) {
                let shifted = modarith::mod_add(*x, h, m);
                let diff = modarith::mod_sub(shifted, c, m);
                *x = modarith::mod_mult(diff, p_inv, m);
            }
        }
        let k = n_keep as u64;
        stats.mod_add += 2 * k * n as u64;
        stats.mod_mult += k * n as u64;
        stats.bytes_read += 2 * k * self.limb_bytes();
        stats.bytes_written += k * self.limb_bytes();
        Ok((out, stats))
    }
}

pub(crate) fn biguint_mod_u64(x: &BigUint, q: u64) -> u64 {
    use num_bigint::ToBigUint;
    let r = x % q.to_biguint().unwrap();
    r.iter_u64_digits().next().unwrap_or(0)
}

/// Galois exponent of a left rotation by r slots: 5^r mod 2N.
pub fn galois_exponent(r: u64, n_degree: usize) -> u64 {
    let two_n = 2 * n_degree as u64;
    let mut t = 1u64;
    let mut base = 5u64 % two_n;
    let mut e = r;
    while e > 0 {
        if e & 1 == 1 {
            t = t * base % two_n;
        }
        base = base * base % two_n;
        e >>= 1;
    }
    t
}

/// A ring element as limbs of residues over a subset of the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnsPoly {
    /// limbs[i][j] = residue of coefficient/evaluation j under basis[i].
    limbs: Vec<Vec<u64>>,
    rep: Rep,
    /// Ordered modulus indexes into the owning chain.
    basis: Vec<usize>,
}

impl RnsPoly {
    pub fn rep(&self) -> Rep {
        self.rep
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn limb(&self, i: usize) -> &[u64] {
        &self.limbs[i]
    }

    pub fn limb_count(&self) -> usize {
        self.limbs.len()
    }

    pub fn n_degree(&self) -> usize {
        self.limbs.first().map_or(0, Vec::len)
    }

    /// Keep only the first `n_keep` limbs (a basis prefix).
    pub fn truncate(&self, n_keep: usize) -> RnsPoly {
        RnsPoly {
            limbs: self.limbs[..n_keep].to_vec(),
            rep: self.rep,
            basis: self.basis[..n_keep].to_vec(),
        }
    }

    /// Extract an arbitrary slice of limbs.
    pub fn slice(&self, range: Range<usize>) -> RnsPoly {
        RnsPoly {
            limbs: self.limbs[range.clone()].to_vec(),
            rep: self.rep,
            basis: self.basis[range].to_vec(),
        }
    }

    pub(crate) fn from_parts(limbs: Vec<Vec<u64>>, rep: Rep, basis: Vec<usize>) -> RnsPoly {
        RnsPoly { limbs, rep, basis }
    }

    pub(crate) fn limbs_mut(&mut self) -> &mut Vec<Vec<u64>> {
        &mut self.limbs
    }

    /// Stored size: one 64-bit word per residue.
    pub fn stored_bytes(&self) -> u64 {
        self.limbs.len() as u64 * self.n_degree() as u64 * 8
    }
}
