//! Reflection pairing, grand mean and wrapping sets over the units mod `m`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modarith::gcd;
use crate::slices::{ClassTable, SliceSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReflectionFailure {
    /// `S(a) + S(m-a) != -1`.
    PairSum { a: u64, s_a: i64, s_reflected: i64 },
    /// Exactly one of `a`, `m-a` has a table entry.
    UnpairedUnit { a: u64 },
}

impl std::fmt::Display for ReflectionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ReflectionFailure::PairSum {
                a,
                s_a,
                s_reflected,
            } => {
                write!(f, "a={a} S(a)={s_a} S(m-a)={s_reflected}")
            }
            ReflectionFailure::UnpairedUnit { a } => write!(f, "a={a} unpaired"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub pairs_checked: u64,
    pub failure: Option<ReflectionFailure>,
}

impl ReflectionReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Check `S(a) + S(m-a) = -1` for every unit pair.
pub fn check_reflection(table: &ClassTable) -> ReflectionReport {
    let m = table.system().modulus();
    let mut report = ReflectionReport {
        pairs_checked: 0,
        failure: None,
    };
    for a in 1..=m / 2 {
        let (lo, hi) = (table.get(a), table.get(m - a));
        match (lo, hi) {
            (Some(s_a), Some(s_reflected)) => {
                report.pairs_checked += 1;
                if s_a + s_reflected != -1 && report.failure.is_none() {
                    report.failure = Some(ReflectionFailure::PairSum {
                        a,
                        s_a,
                        s_reflected,
                    });
                }
            }
            (None, None) => {}
            _ => {
                if report.failure.is_none() {
                    report.failure = Some(ReflectionFailure::UnpairedUnit { a });
                }
            }
        }
    }
    report
}

/// Exact mean `sum / units` of a class table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrandMean {
    pub sum: i64,
    pub units: u64,
}

impl GrandMean {
    /// Lowest-terms numerator and denominator.
    pub fn reduced(&self) -> (i64, u64) {
        if self.units == 0 {
            return (0, 1);
        }
        let g = gcd(self.sum.unsigned_abs(), self.units).max(1);
        (self.sum / g as i64, self.units / g)
    }

    pub fn is_minus_half(&self) -> bool {
        self.units > 0 && 2 * self.sum as i128 == -(self.units as i128)
    }
}

impl std::fmt::Display for GrandMean {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (num, den) = self.reduced();
        write!(f, "{num}/{den}")
    }
}

pub fn grand_mean(table: &ClassTable) -> GrandMean {
    GrandMean {
        sum: table.iter().map(|(_, s)| s).sum(),
        units: table.len() as u64,
    }
}

#[inline]
fn wraps(m: u64, c: u64, a: u64) -> bool {
    ((c as u128 * a as u128) % m as u128) < a as u128
}

fn units(sys: &SliceSystem) -> impl Iterator<Item = u64> + '_ {
    (1..sys.modulus()).filter(move |&a| gcd(a, sys.b()) == 1)
}

/// `|W_n|`: units `a` with `(n+1)·a mod m < a`.
pub fn wrapping_set_size(sys: &SliceSystem, n: u64) -> Result<u64> {
    if !sys.is_good_slice(n) {
        return Err(Error::NotGoodSlice {
            n,
            m: sys.modulus(),
        });
    }
    let m = sys.modulus();
    let c = (n + 1) % m;
    Ok(units(sys).filter(|&a| wraps(m, c, a)).count() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceWrap {
    pub n: u64,
    /// `(n+1) mod m`
    pub c: u64,
    /// `c ≡ 0` or `c ≡ 1 (mod m)`.
    pub trivial: bool,
    pub size: u64,
    pub expected: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrappingProfile {
    pub b: u64,
    pub lag: u32,
    pub m: u64,
    pub phi: u64,
    pub rows: Vec<SliceWrap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HalfGroupFailure {
    SizeMismatch {
        n: u64,
        size: u64,
        expected: u64,
    },
    /// Both or neither of `a`, `m-a` lie in `W_n`.
    InvolutionBroken {
        n: u64,
        a: u64,
    },
}

impl std::fmt::Display for HalfGroupFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            HalfGroupFailure::SizeMismatch { n, size, expected } => {
                write!(f, "n={n} |W|={size} expected={expected}")
            }
            HalfGroupFailure::InvolutionBroken { n, a } => {
                write!(f, "n={n} a={a} and m-a on the same side")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfGroupReport {
    pub profile: WrappingProfile,
    pub failure: Option<HalfGroupFailure>,
}

impl HalfGroupReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Wrapping-set sizes for every good slice.
///
/// Non-trivial slices must have `|W_n| = φ(m)/2` with `a ↦ m-a` swapping `W_n`
/// and its complement. The trivial slices `n = 0` and `n = m-1` are checked
/// against their forced sizes `0` and `φ(m)`.
pub fn check_half_group(sys: &SliceSystem) -> HalfGroupReport {
    let m = sys.modulus();
    let phi = sys.unit_count();
    let slices: Vec<u64> = sys.good_slices().collect();

    let results: Vec<(SliceWrap, Option<HalfGroupFailure>)> = slices
        .par_iter()
        .map(|&n| {
            let c = (n + 1) % m;
            let trivial = c <= 1;
            let expected = match c {
                1 => 0,
                0 => phi,
                _ => phi / 2,
            };
            let mut size = 0;
            let mut broken = None;
            for a in units(sys) {
                let w = wraps(m, c, a);
                if w {
                    size += 1;
                }
                if !trivial && broken.is_none() && w == wraps(m, c, m - a) {
                    broken = Some(a);
                }
            }
            let failure = if size != expected {
                Some(HalfGroupFailure::SizeMismatch { n, size, expected })
            } else {
                broken.map(|a| HalfGroupFailure::InvolutionBroken { n, a })
            };
            (
                SliceWrap {
                    n,
                    c,
                    trivial,
                    size,
                    expected,
                },
                failure,
            )
        })
        .collect();

    let failure = results.iter().find_map(|(_, f)| *f);
    HalfGroupReport {
        profile: WrappingProfile {
            b: sys.b(),
            lag: sys.lag(),
            m,
            phi,
            rows: results.into_iter().map(|(row, _)| row).collect(),
        },
        failure,
    }
}
