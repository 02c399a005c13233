//! Verification engine for collision counts of digit-bin partitions.
//!
//! For a modulus `p` and base `b` with `gcd(p, b) = 1`, the digit function
//! `δ(r) = ⌊b·r/p⌋` splits the residues `1..p-1` into `b` contiguous bins.
//! The collision count `C(g)` is the number of residues that land in the same
//! bin as their image under multiplication by `g`.
//!
//! The crate is organised bottom-up:
//!
//! * [`modarith`]: 64-bit modular arithmetic, exact primality, prime ranges, φ.
//! * [`collision`]: digit systems, direct and linearized collision counts, and
//!   the family of deranging multipliers.
//! * [`slices`]: good-slice sets and the closed formula for the deviation
//!   `S_ℓ` over residue classes mod `b^(ℓ+1)`.
//! * [`symmetry`]: reflection pairing, grand mean, and wrapping-set sizes.
//! * [`harness`]: deterministic, parallel scan campaigns over prime ranges.

pub mod collision;
pub mod error;
pub mod harness;
pub mod modarith;
pub mod slices;
pub mod symmetry;

pub use collision::{CollisionProfile, DigitSystem, GateFailure, GateMember, GateReport};
pub use error::{Error, Result};
pub use harness::{Check, ScanConfig, ScanReport};
pub use modarith::Modulus;
pub use slices::{ClassTable, SliceSystem};
pub use symmetry::{GrandMean, HalfGroupReport, ReflectionReport, WrappingProfile};
