//! Digit-bin systems and collision counts.
//!
//! A [`DigitSystem`] fixes a modulus `p` and base `b`. The digit of a residue
//! `r` is `⌊b·r/p⌋`, which sorts `1..p-1` into `b` contiguous bins. A
//! multiplier `g` collides at `r` when `r` and `g·r mod p` share a bin.
//!
//! Multiplying by `b` turns the bins into the residue classes mod `b`
//! (`b·r = p·δ(r) + (b·r mod p)` and `gcd(p, b) = 1`), so the collision count
//! can also be taken over `x ≡ g·x (mod p)` read mod `b`. Both routes are
//! provided; [`DigitSystem::collision_count_brute`] is the oracle for the
//! other.

use std::ops::RangeInclusive;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modarith::{gcd, inv_mod, is_prime, mul_mod, Modulus};

/// Default bound on `p` below which [`DigitSystem::verify_gate`] sweeps every
/// unit outside the gate family.
pub const DEFAULT_EXHAUSTIVE_THRESHOLD: u64 = 100_000;
/// Outside multipliers sampled per prime above the exhaustive threshold.
pub const DEFAULT_GATE_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DigitSystem {
    p: u64,
    b: u64,
    bin_size: u64,
    prime: bool,
}

/// Collision data for a single multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionProfile {
    pub g: u64,
    pub count: u64,
    /// `b·(1-g)^(-1) mod p`; `None` when `1 - g` is not invertible (g = 1).
    pub gate_parameter: Option<u64>,
    pub deranging: bool,
}

/// One member `g = -u/(b-u) mod p` of the gate family, with its gate
/// parameter `c = b - u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GateMember {
    pub u: u64,
    pub c: u64,
    pub g: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateFailure {
    /// The family does not have `b - 1` distinct members.
    FamilySize { expected: u64, found: u64 },
    /// A family member has a collision.
    FamilyMemberCollides { g: u64, count: u64 },
    /// A unit outside the family has no collision.
    OutsideDeranging { g: u64 },
}

impl std::fmt::Display for GateFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            GateFailure::FamilySize { expected, found } => {
                write!(f, "family size {found} (expected {expected})")
            }
            GateFailure::FamilyMemberCollides { g, count } => {
                write!(f, "family member g={g} has C(g)={count}")
            }
            GateFailure::OutsideDeranging { g } => write!(f, "g={g} outside family has C(g)=0"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateOptions {
    pub exhaustive_threshold: u64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for GateOptions {
    fn default() -> Self {
        GateOptions {
            exhaustive_threshold: DEFAULT_EXHAUSTIVE_THRESHOLD,
            samples: DEFAULT_GATE_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateReport {
    pub p: u64,
    pub b: u64,
    pub bin_size: u64,
    pub family: Vec<GateMember>,
    pub exhaustive: bool,
    /// Units outside the family whose collision status was checked.
    pub outside_checked: u64,
    /// Number of units with `C(g) = 0`; only known after an exhaustive sweep.
    pub deranging_count: Option<u64>,
    pub failure: Option<GateFailure>,
}

impl GateReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl DigitSystem {
    pub fn new(p: u64, b: u64) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidSystem(format!(
                "base must be at least 2, got {b}"
            )));
        }
        if p <= b {
            return Err(Error::TooSmall { p, bound: b });
        }
        if gcd(p, b) != 1 {
            return Err(Error::NotCoprime { p, b });
        }
        Ok(DigitSystem {
            p,
            b,
            bin_size: (p - 1) / b,
            prime: is_prime(p),
        })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn b(&self) -> u64 {
        self.b
    }

    /// `Q = ⌊(p-1)/b⌋`.
    #[inline]
    pub fn bin_size(&self) -> u64 {
        self.bin_size
    }

    pub fn is_prime(&self) -> bool {
        self.prime
    }

    fn modulus(&self) -> Modulus {
        Modulus::new(self.p).expect("p > b >= 2")
    }

    /// `⌊b·r/p⌋` for `1 <= r <= p-1`.
    #[inline]
    pub fn digit(&self, r: u64) -> u64 {
        debug_assert!(r >= 1 && r < self.p);
        match self.b.checked_mul(r) {
            Some(br) => br / self.p,
            None => ((self.b as u128 * r as u128) / self.p as u128) as u64,
        }
    }

    /// The `b` bins as contiguous intervals, indexed by digit.
    pub fn bins(&self) -> Vec<RangeInclusive<u64>> {
        // Bin d starts at the least r >= 1 with b·r >= d·p.
        let start = |d: u64| -> u64 {
            if d == 0 {
                1
            } else {
                (d as u128 * self.p as u128).div_ceil(self.b as u128) as u64
            }
        };
        (0..self.b)
            .map(|d| {
                let end = if d + 1 == self.b {
                    self.p - 1
                } else {
                    start(d + 1) - 1
                };
                start(d)..=end
            })
            .collect()
    }

    /// Direct count of `r` in `1..p-1` with `δ(r) = δ(g·r mod p)`.
    pub fn collision_count_brute(&self, g: u64) -> u64 {
        debug_assert!(g >= 1 && g < self.p);
        let mut count = 0;
        let mut image = 0u64;
        for r in 1..self.p {
            image += g;
            if image >= self.p {
                image -= self.p;
            }
            if self.digit(r) == self.digit(image) {
                count += 1;
            }
        }
        count
    }

    /// Count of `x` in `1..p-1` with `x ≡ (g·x mod p) (mod b)`.
    pub fn collision_count_linear(&self, g: u64) -> u64 {
        debug_assert!(g >= 1 && g < self.p);
        if self.p <= u32::MAX as u64 {
            linear_count_u32(self.p as u32, self.b as u32, g as u32)
        } else {
            linear_count_u64(self.p, self.b, g)
        }
    }

    /// Whether `C(g) >= 1`, stopping at the first collision.
    pub fn has_collision(&self, g: u64) -> bool {
        debug_assert!(g >= 1 && g < self.p);
        let mut image = 0u64;
        for x in 1..self.p {
            image += g;
            if image >= self.p {
                image -= self.p;
            }
            if x % self.b == image % self.b {
                return true;
            }
        }
        false
    }

    pub fn profile(&self, g: u64) -> CollisionProfile {
        let count = self.collision_count_linear(g);
        let gate_parameter = if g == 1 {
            None
        } else {
            self.raw_gate_parameter(g).ok()
        };
        CollisionProfile {
            g,
            count,
            gate_parameter,
            deranging: count == 0,
        }
    }

    fn raw_gate_parameter(&self, g: u64) -> Result<u64> {
        let n = self.modulus();
        let one_minus_g = (self.p + 1 - g) % self.p;
        let inv = inv_mod(one_minus_g, n)?;
        Ok(mul_mod(self.b % self.p, inv, n))
    }

    fn require_prime(&self) -> Result<()> {
        if self.prime {
            Ok(())
        } else {
            Err(Error::NotPrime(self.p))
        }
    }

    /// `c ≡ b·(1-g)^(-1) (mod p)` in `1..p-1`.
    pub fn gate_parameter(&self, g: u64) -> Result<u64> {
        self.require_prime()?;
        if g == 1 {
            return Err(Error::GateUndefined);
        }
        self.raw_gate_parameter(g)
    }

    /// The `b - 1` deranging multipliers `-u/(b-u) mod p`, ordered by `u`.
    pub fn gate_family(&self) -> Result<Vec<GateMember>> {
        self.require_prime()?;
        let n = self.modulus();
        (1..self.b)
            .map(|u| {
                let inv = inv_mod(self.b - u, n)?;
                let g = mul_mod(self.p - u, inv, n);
                Ok(GateMember {
                    u,
                    c: self.b - u,
                    g,
                })
            })
            .collect()
    }

    /// Check that the gate family is exactly the set of deranging multipliers.
    ///
    /// Family members are counted with the direct definition. Units outside
    /// the family are checked with the linearized count: all of them when
    /// `p <= exhaustive_threshold`, otherwise `samples` random ones.
    pub fn verify_gate(&self, opts: &GateOptions) -> Result<GateReport> {
        self.require_prime()?;
        let family = self.gate_family()?;
        let mut members: Vec<u64> = family.iter().map(|m| m.g).collect();
        members.sort_unstable();
        members.dedup();

        let mut report = GateReport {
            p: self.p,
            b: self.b,
            bin_size: self.bin_size,
            family,
            exhaustive: self.p <= opts.exhaustive_threshold,
            outside_checked: 0,
            deranging_count: None,
            failure: None,
        };

        let expected = self.b - 1;
        if members.len() as u64 != expected {
            report.failure = Some(GateFailure::FamilySize {
                expected,
                found: members.len() as u64,
            });
            return Ok(report);
        }

        let member_counts: Vec<(u64, u64)> = members
            .par_iter()
            .map(|&g| (g, self.collision_count_brute(g)))
            .collect();
        let family_zeros = member_counts.iter().filter(|&&(_, c)| c == 0).count() as u64;
        if let Some(&(g, count)) = member_counts.iter().find(|&&(_, c)| c != 0) {
            report.failure = Some(GateFailure::FamilyMemberCollides { g, count });
        }

        let outside = |g: &u64| members.binary_search(g).is_err();
        if report.exhaustive {
            let deranging: Vec<u64> = (1..self.p)
                .into_par_iter()
                .filter(|g| outside(g) && !self.has_collision(*g))
                .collect();
            report.outside_checked = self.p - 1 - members.len() as u64;
            report.deranging_count = Some(family_zeros + deranging.len() as u64);
            if report.failure.is_none() {
                if let Some(&g) = deranging.first() {
                    report.failure = Some(GateFailure::OutsideDeranging { g });
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ self.p.rotate_left(17) ^ self.b);
            let mut sample = Vec::with_capacity(opts.samples);
            while sample.len() < opts.samples {
                let g = rng.gen_range(1..self.p);
                if outside(&g) {
                    sample.push(g);
                }
            }
            report.outside_checked = sample.len() as u64;
            if report.failure.is_none() {
                let bad = sample
                    .par_iter()
                    .copied()
                    .filter(|&g| !self.has_collision(g))
                    .min();
                if let Some(g) = bad {
                    report.failure = Some(GateFailure::OutsideDeranging { g });
                }
            }
        }
        Ok(report)
    }
}

// Linearized count kernel. Tracks y = g·x mod p and d = (y - x) mod b, so x
// collides iff d = 0. Stepping x adds g - 1 to d; a wrap of y also subtracts
// p. The range 1..p-1 is split into LANES interleaved runs so the per-lane
// updates are independent; the remainder runs in a scalar tail.
macro_rules! linear_count_kernel {
    ($name:ident, $t:ty, $lanes:expr) => {
        fn $name(p: $t, b: $t, g: $t) -> u64 {
            const LANES: usize = $lanes;
            let step = (g % b + b - 1) % b;
            let lift = b - p % b;
            let step_wrapped = (step + lift) % b;
            let wrap_at = p - g;
            let start = |x: $t| -> ($t, $t) {
                let y = ((g as u128 * x as u128) % p as u128) as $t;
                (y, (y % b + b - x % b) % b)
            };
            let last = p - 1;
            let per = last / LANES as $t;
            let mut ys = [0 as $t; LANES];
            let mut ds = [0 as $t; LANES];
            for j in 0..LANES {
                (ys[j], ds[j]) = start(j as $t * per);
            }
            let mut counts = [0 as $t; LANES];
            for _ in 0..per {
                // Every sum stays below p or 2b; wrapping ops only drop the
                // overflow checks that would block vectorization.
                for j in 0..LANES {
                    let wrapped = ys[j] >= wrap_at;
                    ys[j] = if wrapped {
                        ys[j].wrapping_sub(wrap_at)
                    } else {
                        ys[j].wrapping_add(g)
                    };
                    let d = ds[j].wrapping_add(if wrapped { step_wrapped } else { step });
                    let d = if d >= b { d.wrapping_sub(b) } else { d };
                    ds[j] = d;
                    counts[j] = counts[j].wrapping_add((d == 0) as $t);
                }
            }
            let mut total: u64 = counts.iter().map(|&c| c as u64).sum();
            let (mut y, mut d) = start(LANES as $t * per);
            for _ in LANES as $t * per..last {
                let wrapped = y >= wrap_at;
                y = if wrapped { y - wrap_at } else { y + g };
                d += if wrapped { step_wrapped } else { step };
                if d >= b {
                    d -= b;
                }
                total += (d == 0) as u64;
            }
            total
        }
    };
}

linear_count_kernel!(linear_count_u32, u32, 32);
linear_count_kernel!(linear_count_u64, u64, 8);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::primes_in_range;
    use proptest::prelude::*;

    fn sys(p: u64, b: u64) -> DigitSystem {
        DigitSystem::new(p, b).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            DigitSystem::new(18, 3),
            Err(Error::NotCoprime { p: 18, b: 3 })
        );
        assert_eq!(
            DigitSystem::new(3, 3),
            Err(Error::TooSmall { p: 3, bound: 3 })
        );
        assert!(matches!(
            DigitSystem::new(19, 1),
            Err(Error::InvalidSystem(_))
        ));
        assert_eq!(sys(19, 3).bin_size(), 6);
        assert!(!sys(25, 3).is_prime());
    }

    #[test]
    fn digit_examples() {
        let s = sys(19, 3);
        assert_eq!(s.digit(1), 0);
        assert_eq!(s.digit(7), 1);
        assert_eq!(s.digit(18), 2);
    }

    #[test]
    fn bins_examples() {
        assert_eq!(sys(19, 3).bins(), vec![1..=6, 7..=12, 13..=18]);
        let s = sys(17, 10);
        let bins = s.bins();
        assert_eq!(bins.len(), 10);
        assert_eq!(s.bin_size(), 1);
        assert!(bins.iter().all(|r| {
            let len = r.end() - r.start() + 1;
            len == 1 || len == 2
        }));
        assert_eq!(
            bins.iter().map(|r| r.end() - r.start() + 1).sum::<u64>(),
            16
        );
    }

    #[test]
    fn bins_partition_and_agree_with_digit() {
        for p in primes_in_range(3, 400) {
            for b in [2u64, 3, 5, 7, 10, 12, 16] {
                let Ok(s) = DigitSystem::new(p, b) else {
                    continue;
                };
                let q = s.bin_size();
                let bins = s.bins();
                let mut next = 1;
                for (d, bin) in bins.iter().enumerate() {
                    assert_eq!(*bin.start(), next);
                    let len = bin.end() + 1 - bin.start();
                    assert!(len == q || len == q + 1, "p={p} b={b} d={d}");
                    for r in bin.clone() {
                        assert_eq!(s.digit(r), d as u64);
                    }
                    next = bin.end() + 1;
                }
                assert_eq!(next, p);
            }
        }
    }

    #[test]
    fn collision_counts_at_anchor() {
        let s = sys(19, 3);
        assert_eq!(s.collision_count_brute(1), 18);
        assert_eq!(s.collision_count_brute(3), 6);
        assert_eq!(s.collision_count_linear(1), 18);
        assert_eq!(s.collision_count_linear(3), 6);
        assert!(s.has_collision(3));
    }

    #[test]
    fn gate_parameter_examples() {
        let s = sys(17, 10);
        assert_eq!(s.gate_parameter(8), Ok(1));
        assert_eq!(s.gate_parameter(16), Ok(5));
        assert_eq!(s.gate_parameter(1), Err(Error::GateUndefined));
        assert_eq!(sys(21, 10).gate_parameter(2), Err(Error::NotPrime(21)));
    }

    #[test]
    fn gate_family_examples() {
        let s = sys(17, 10);
        let family: Vec<u64> = s.gate_family().unwrap().iter().map(|m| m.g).collect();
        assert_eq!(family.len(), 9);
        let mut sorted = family.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![2, 4, 5, 7, 8, 9, 13, 15, 16]);
        assert_eq!(family[8], 8); // u = 9
        assert_eq!(family[0], 15); // u = 1
        assert_eq!(family[4], 16); // u = 5
        for m in s.gate_family().unwrap() {
            assert_eq!(s.collision_count_brute(m.g), 0);
            assert_eq!(s.gate_parameter(m.g), Ok(m.c));
        }
        assert_eq!(sys(41, 7).gate_family().unwrap().len(), 6);
        assert_eq!(sys(15, 7).gate_family(), Err(Error::NotPrime(15)));
    }

    #[test]
    fn even_base_family_contains_minus_one() {
        for (p, b) in [(17, 10), (67, 12), (11, 2), (101, 8)] {
            let s = sys(p, b);
            assert!(s
                .gate_family()
                .unwrap()
                .iter()
                .any(|m| m.g == p - 1 && m.u == b / 2));
        }
    }

    #[test]
    fn profile_marks_identity_and_gate() {
        let s = sys(17, 10);
        let id = s.profile(1);
        assert_eq!(id.count, 16);
        assert_eq!(id.gate_parameter, None);
        assert!(!id.deranging);
        let gate = s.profile(8);
        assert_eq!(gate.gate_parameter, Some(1));
        assert!(gate.deranging);
    }

    #[test]
    fn verify_gate_examples() {
        for (p, b) in [(17, 10), (67, 12), (193, 10), (97, 10), (41, 7)] {
            let report = sys(p, b).verify_gate(&GateOptions::default()).unwrap();
            assert!(report.passed(), "{report:?}");
            assert!(report.exhaustive);
            assert_eq!(report.family.len() as u64, b - 1);
            assert_eq!(report.deranging_count, Some(b - 1));
        }
        assert_eq!(
            sys(15, 7).verify_gate(&GateOptions::default()),
            Err(Error::NotPrime(15))
        );
    }

    #[test]
    fn verify_gate_sampled_mode() {
        let opts = GateOptions {
            exhaustive_threshold: 100,
            samples: 64,
            seed: 7,
        };
        let report = sys(1_000_003, 10).verify_gate(&opts).unwrap();
        assert!(report.passed());
        assert!(!report.exhaustive);
        assert_eq!(report.outside_checked, 64);
        assert_eq!(report.deranging_count, None);
    }

    #[test]
    fn gate_membership_criterion() {
        for p in primes_in_range(3, 300) {
            for b in [2u64, 3, 5, 7, 10, 12] {
                let Ok(s) = DigitSystem::new(p, b) else {
                    continue;
                };
                assert_eq!(s.collision_count_brute(1), p - 1);
                for g in 2..p {
                    let c = s.gate_parameter(g).unwrap();
                    assert_ne!(c, b);
                    let zero = s.collision_count_linear(g) == 0;
                    assert_eq!(zero, (1..b).contains(&c), "p={p} b={b} g={g} c={c}");
                    assert_eq!(zero, !s.has_collision(g));
                }
            }
        }
    }

    #[test]
    fn wide_kernel_matches_narrow_kernel() {
        for (p, b, g) in [
            (19u64, 3u64, 3u64),
            (997, 10, 123),
            (65_537, 12, 40_000),
            (99_991, 7, 2),
        ] {
            let narrow = linear_count_u32(p as u32, b as u32, g as u32);
            assert_eq!(linear_count_u64(p, b, g), narrow);
            assert_eq!(sys(p, b).collision_count_brute(g), narrow);
        }
    }

    #[test]
    fn gate_family_above_u32() {
        let p = 4_294_967_311u64;
        let s = sys(p, 10);
        for m in s.gate_family().unwrap() {
            assert_eq!(s.gate_parameter(m.g), Ok(m.c));
        }
        assert!(s.has_collision(2));
    }

    proptest! {
        #[test]
        fn linear_count_matches_brute(p in 3u64..5000, b in 2u64..40, g in 1u64..5000) {
            prop_assume!(p > b && gcd(p, b) == 1);
            let g = g % p;
            prop_assume!(g != 0 && gcd(g, p) == 1);
            let s = sys(p, b);
            prop_assert_eq!(s.collision_count_linear(g), s.collision_count_brute(g));
        }
    }
}
