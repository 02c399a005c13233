//! Integer and modular arithmetic over the full 64-bit range.
//!
//! Products are widened to `u128`, so every routine is exact for any modulus
//! up to `u64::MAX`. Primality is deterministic for all 64-bit inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A modulus `n >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(value: u64) -> Result<Self> {
        if value < 2 {
            return Err(Error::InvalidModulus(value));
        }
        Ok(Modulus(value))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for Modulus {
    type Error = Error;

    fn try_from(value: u64) -> Result<Self> {
        Modulus::new(value)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.0
    }
}

impl std::fmt::Display for Modulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// `(x * y) mod n` for `x, y < n`.
#[inline]
pub fn mul_mod(x: u64, y: u64, n: Modulus) -> u64 {
    debug_assert!(x < n.0 && y < n.0);
    ((x as u128 * y as u128) % n.0 as u128) as u64
}

/// `x^e mod n` by square-and-multiply.
pub fn pow_mod(x: u64, mut e: u64, n: Modulus) -> u64 {
    debug_assert!(x < n.0);
    let mut base = x;
    let mut acc = 1 % n.0;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        e >>= 1;
    }
    acc
}

/// Extended Euclid: returns `(g, s, t)` with `g = gcd(a, b) > 0` and
/// `s*a + t*b = g`.
///
/// Panics if both inputs are zero.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    assert!(a != 0 || b != 0, "ext_gcd(0, 0) is undefined");
    let (mut old_r, mut r) = (a as i128, b as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (old_r, old_s, old_t) = (-old_r, -old_s, -old_t);
    }
    (old_r as i64, old_s as i64, old_t as i64)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `x` modulo `n`, in `1..n`.
pub fn inv_mod(x: u64, n: Modulus) -> Result<u64> {
    // Unsigned Euclid with coefficients tracked mod n, so the full u64 range
    // is covered without signed overflow.
    let nv = n.0;
    let (mut old_r, mut r) = (x % nv, nv);
    let (mut old_s, mut s) = (1 % nv, 0u64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        let qs = mul_mod(q % nv, s, n);
        let next = if old_s >= qs {
            old_s - qs
        } else {
            old_s + (nv - qs)
        };
        (old_s, s) = (s, next);
    }
    if old_r != 1 {
        return Err(Error::NotInvertible { x, n: nv });
    }
    Ok(old_s)
}

const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Exact primality for every `u64`.
///
/// Miller-Rabin with the first twelve primes as witnesses, which has no
/// strong pseudoprimes below 3.3 * 10^24.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let modulus = Modulus(n);
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, modulus);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, modulus);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Ranges narrower than this are filtered with [`is_prime`] directly.
const TRIAL_CUTOFF: u64 = 64;
const SEGMENT_LEN: u64 = 1 << 18;
/// Largest sieving-prime bound the segmented sieve will allocate for.
const MAX_BASE_BOUND: u64 = 1 << 26;

fn simple_sieve(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// All primes in `lo..=hi`, ascending.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    let lo = lo.max(2);
    if lo > hi {
        return Vec::new();
    }
    let base_bound = hi.isqrt();
    if hi - lo < TRIAL_CUTOFF || base_bound > MAX_BASE_BOUND {
        return (lo..=hi).filter(|&n| is_prime(n)).collect();
    }

    let base = simple_sieve(base_bound);
    let mut out = Vec::new();
    let mut seg_lo = lo;
    loop {
        let seg_hi = seg_lo.saturating_add(SEGMENT_LEN - 1).min(hi);
        let len = (seg_hi - seg_lo + 1) as usize;
        let mut composite = vec![false; len];
        for &q in &base {
            if q * q > seg_hi {
                break;
            }
            let first = (q * q).max(seg_lo.div_ceil(q) * q);
            let mut j = first;
            while j <= seg_hi {
                composite[(j - seg_lo) as usize] = true;
                j += q;
            }
        }
        out.extend(
            composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| seg_lo + i as u64),
        );
        if seg_hi == hi {
            break;
        }
        seg_lo = seg_hi + 1;
    }
    out
}

/// Euler's totient by trial-division factorization.
pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1, "euler_phi(0) is undefined");
    let mut rest = n;
    let mut phi = n;
    let mut q = 2u64;
    while q <= rest / q {
        if rest.is_multiple_of(q) {
            while rest.is_multiple_of(q) {
                rest /= q;
            }
            phi -= phi / q;
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        phi -= phi / rest;
    }
    phi
}
