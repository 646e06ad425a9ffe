//! Merged negacyclic NTT with per-modulus twiddle tables.
//!
//! Twiddles are premultiplied by powers of the primitive 2N-th root and
//! stored in bit-reversed order, so both directions read the table
//! sequentially and no separate pre/post scaling pass over the data is
//! needed. The forward transform is Cooley-Tukey (natural order in,
//! bit-reversed out); the inverse is Gentleman-Sande with the N^{-1}
//! factor folded into its last stage.
//!
//! In the evaluation representation, storage index `i` holds the value of
//! the polynomial at psi^(2*bitrev(i)+1), i.e. the odd powers of psi in
//! bit-reversed order.

use crate::error::Result;
use crate::modarith::{self, Modulus};

/// Twiddle tables for one (modulus, N) pair.
#[derive(Debug, Clone)]
pub struct NttTable {
    pub(crate) n: usize,
    pub(crate) log_n: u32,
    /// psi^bitrev(i) for i in 0..N.
    psi_rev: Vec<u64>,
    /// psi^{-bitrev(i)} for i in 0..N.
    psi_inv_rev: Vec<u64>,
    /// N^{-1} mod q, folded into the final inverse stage.
    n_inv: u64,
    /// psi^{-bitrev(1)} * n_inv, the folded last-stage twiddle.
    last_inv: u64,
}

fn bitrev(x: usize, bits: u32) -> usize {
    x.reverse_bits() >> (usize::BITS - bits)
}

impl NttTable {
    pub fn new(m: &Modulus, n: usize) -> Result<Self> {
        assert!(n.is_power_of_two() && n >= 2);
        let log_n = n.trailing_zeros();
        let psi = modarith::find_2n_root(m, n)?;
        let psi_inv = modarith::inv_mod(psi, m);

        let mut pow_fwd = vec![0u64; n];
        let mut pow_inv = vec![0u64; n];
        pow_fwd[0] = 1;
        pow_inv[0] = 1;
        for i in 1..n {
            pow_fwd[i] = modarith::mod_mult(pow_fwd[i - 1], psi, m);
            pow_inv[i] = modarith::mod_mult(pow_inv[i - 1], psi_inv, m);
        }
        let mut psi_rev = vec![0u64; n];
        let mut psi_inv_rev = vec![0u64; n];
        for i in 0..n {
            let r = bitrev(i, log_n);
            psi_rev[i] = pow_fwd[r];
            psi_inv_rev[i] = pow_inv[r];
        }
        let n_inv = modarith::inv_mod(n as u64, m);
        let last_inv = modarith::mod_mult(psi_inv_rev[1], n_inv, m);
        Ok(NttTable {
            n,
            log_n,
            psi_rev,
            psi_inv_rev,
            n_inv,
            last_inv,
        })
    }

    /// In-place forward negacyclic transform of one limb.
    pub fn forward(&self, a: &mut [u64], m: &Modulus) {
        debug_assert_eq!(a.len(), self.n);
        let mut t = self.n;
        let mut m_count = 1;
        while m_count < self.n {
            t >>= 1;
            for i in 0..m_count {
                let s = self.psi_rev[m_count + i];
                let j1 = 2 * i * t;
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = modarith::mod_mult(a[j + t], s, m);
                    a[j] = modarith::mod_add(u, v, m);
                    a[j + t] = modarith::mod_sub(u, v, m);
                }
            }
            m_count <<= 1;
        }
    }

    /// In-place inverse transform with folded N^{-1} scaling.
    pub fn inverse(&self, a: &mut [u64], m: &Modulus) {
        debug_assert_eq!(a.len(), self.n);
        let mut t = 1;
        let mut h = self.n >> 1;
        while h > 1 {
            let mut j1 = 0;
            for i in 0..h {
                let s = self.psi_inv_rev[h + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = a[j + t];
                    a[j] = modarith::mod_add(u, v, m);
                    a[j + t] = modarith::mod_mult(modarith::mod_sub(u, v, m), s, m);
                }
                j1 += 2 * t;
            }
            t <<= 1;
            h >>= 1;
        }
        // last stage (h == 1) with N^{-1} folded into both lanes
        for j in 0..t {
            let u = a[j];
            let v = a[j + t];
            a[j] = modarith::mod_mult(modarith::mod_add(u, v, m), self.n_inv, m);
            a[j + t] = modarith::mod_mult(modarith::mod_sub(u, v, m), self.last_inv, m);
        }
    }

    /// Exact modular-op counts for one limb: (mod_mult, mod_add).
    pub fn forward_counts(n: usize) -> (u64, u64) {
        let log_n = n.trailing_zeros() as u64;
        ((n as u64 / 2) * log_n, n as u64 * log_n)
    }

    /// Inverse counts include the N/2 extra multiplies of the folded
    /// scaling lane.
    pub fn inverse_counts(n: usize) -> (u64, u64) {
        let log_n = n.trailing_zeros() as u64;
        ((n as u64 / 2) * log_n + n as u64 / 2, n as u64 * log_n)
    }

    /// Storage-index permutation for the automorphism X -> X^t in the
    /// evaluation representation. `out[i] = in[perm[i]]`.
    pub fn eval_automorph_perm(&self, t_exp: u64) -> Vec<usize> {
        let two_n = 2 * self.n as u64;
        debug_assert_eq!(t_exp % 2, 1);
        let mut perm = vec![0usize; self.n];
        for (i, slot) in perm.iter_mut().enumerate() {
            let e = (2 * bitrev(i, self.log_n) as u64 + 1) * t_exp % two_n;
            *slot = bitrev(((e - 1) / 2) as usize, self.log_n);
        }
        perm
    }
}
