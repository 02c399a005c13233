//! Good slices and the closed formula for the collision deviation.
//!
//! With `m = b^(ℓ+1)` and `p > m`, the residues `1..p-1` split into `m`
//! slices `n(r) = ⌊m·r/p⌋`. On slice `n` the digit is `⌊n/b^ℓ⌋` and the digit
//! of `b^ℓ·r mod p` is `n mod b`, so only the *good* slices (where the two
//! agree) carry collisions. Writing `a = p mod m`, the deviation
//! `S_ℓ = C(b^ℓ mod p) - ⌊(p-1)/b⌋` becomes
//!
//! ```text
//! S_ℓ(a) = -1 - ⌊a/b⌋ + Σ_{n ∈ G} (⌊(n+1)a/m⌋ - ⌊na/m⌋)
//! ```
//!
//! which depends on `a` alone. Both the closed form and the direct count are
//! exposed so each can check the other.

use rayon::prelude::*;
use serde::Serialize;

use crate::collision::DigitSystem;
use crate::error::{Error, Result};
use crate::modarith::{euler_phi, gcd, pow_mod, Modulus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SliceSystem {
    b: u64,
    lag: u32,
    /// `b^ℓ`
    slice_block: u64,
    /// `b^(ℓ+1)`
    m: u64,
}

impl SliceSystem {
    pub fn new(b: u64, lag: u32) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidSystem(format!(
                "base must be at least 2, got {b}"
            )));
        }
        if lag < 1 {
            return Err(Error::InvalidSystem("lag must be at least 1".into()));
        }
        let exp = lag
            .checked_add(1)
            .ok_or(Error::Overflow { base: b, exp: lag })?;
        let m = b.checked_pow(exp).ok_or(Error::Overflow { base: b, exp })?;
        Ok(SliceSystem {
            b,
            lag,
            slice_block: m / b,
            m,
        })
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn lag(&self) -> u32 {
        self.lag
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    /// `b^ℓ`, which is also the number of good slices.
    pub fn good_slice_count(&self) -> u64 {
        self.slice_block
    }

    pub fn is_good_slice(&self, n: u64) -> bool {
        n < self.m && n / self.slice_block == n % self.b
    }

    /// Good slices in ascending order.
    ///
    /// `n = q·b^ℓ + s` with `s < b^ℓ` is good iff `s ≡ q (mod b)`, so they are
    /// generated directly rather than filtered out of `0..m`.
    pub fn good_slices(&self) -> impl Iterator<Item = u64> + '_ {
        let inner = self.slice_block / self.b;
        (0..self.b)
            .flat_map(move |q| (0..inner).map(move |k| q * self.slice_block + k * self.b + q))
    }

    pub fn is_unit(&self, a: u64) -> bool {
        a > 0 && a < self.m && gcd(a, self.b) == 1
    }

    pub fn unit_count(&self) -> u64 {
        euler_phi(self.m)
    }

    /// `⌊m·r/p⌋`.
    pub fn slice_index(&self, p: u64, r: u64) -> u64 {
        debug_assert!(p > self.m && r >= 1 && r < p);
        ((self.m as u128 * r as u128) / p as u128) as u64
    }

    /// `⌊(n+1)a/m⌋ - ⌊na/m⌋`, which is 0 or 1 for `a < m`.
    #[inline]
    pub fn slice_increment(&self, a: u64, n: u64) -> u64 {
        debug_assert!(a < self.m && n < self.m);
        let m = self.m as u128;
        let (a, n) = (a as u128, n as u128);
        ((n + 1) * a / m - n * a / m) as u64
    }

    /// Closed-form `S_ℓ(a)` for a unit `a` mod `m`.
    pub fn deviation_formula(&self, a: u64) -> Result<i64> {
        if !self.is_unit(a) {
            return Err(Error::NotUnit { a, m: self.m });
        }
        // For units b ∤ a, so ⌊a/b⌋ = ⌊(a-1)/b⌋ and the bin size splits
        // cleanly as b^ℓ·t + ⌊a/b⌋.
        let wraps: u64 = self.good_slices().map(|n| self.slice_increment(a, n)).sum();
        Ok(wraps as i64 - 1 - (a / self.b) as i64)
    }

    /// `S_ℓ(p) = C(b^ℓ mod p) - ⌊(p-1)/b⌋`, counted directly.
    pub fn deviation_direct(&self, p: u64) -> Result<i64> {
        if gcd(p, self.b) != 1 {
            return Err(Error::NotCoprime { p, b: self.b });
        }
        if p <= self.m {
            return Err(Error::TooSmall { p, bound: self.m });
        }
        let sys = DigitSystem::new(p, self.b)?;
        let g = pow_mod(self.b, self.lag as u64, Modulus::new(p)?);
        Ok(sys.collision_count_linear(g) as i64 - sys.bin_size() as i64)
    }

    /// `S_ℓ(a)` for every unit `a` mod `m`.
    pub fn class_table(&self) -> ClassTable {
        let values: Vec<Option<i64>> = (0..self.m)
            .into_par_iter()
            .map(|a| self.deviation_formula(a).ok())
            .collect();
        ClassTable {
            system: *self,
            values,
        }
    }
}

/// Finite-determination values `a ↦ S_ℓ(a)`, stored densely over `0..m`
/// with non-units left empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTable {
    system: SliceSystem,
    values: Vec<Option<i64>>,
}

impl ClassTable {
    pub fn system(&self) -> &SliceSystem {
        &self.system
    }

    pub fn get(&self, a: u64) -> Option<i64> {
        self.values.get(a as usize).copied().flatten()
    }

    /// `(a, S(a))` over units, ascending in `a`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(a, v)| v.map(|s| (a as u64, s)))
    }

    /// Number of units, i.e. φ(m).
    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
