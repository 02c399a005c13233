//! Cross-module identities checked against independent brute-force routes.

use digitbins::collision::DigitSystem;
use digitbins::harness::{sharpness_witness, SharpnessWitness};
use digitbins::modarith::{euler_phi, gcd};
use digitbins::slices::SliceSystem;
use digitbins::symmetry::{check_half_group, check_reflection, grand_mean, wrapping_set_size};
use proptest::prelude::*;

/// Deviation straight from the bin definition: count r with
/// ⌊br/p⌋ = ⌊b·(b^ℓ r mod p)/p⌋, minus ⌊(p-1)/b⌋.
fn deviation_by_bins(b: u64, lag: u32, p: u64) -> i64 {
    let g = (0..lag).fold(1u64, |acc, _| acc * b % p);
    let count = (1..p).filter(|&r| b * r / p == b * (g * r % p) / p).count() as i64;
    count - ((p - 1) / b) as i64
}

fn grid() -> impl Iterator<Item = SliceSystem> {
    (2..=12u64).flat_map(|b| (1..=2u32).map(move |lag| SliceSystem::new(b, lag).unwrap()))
}

#[test]
fn anchor_values() {
    let sys = DigitSystem::new(19, 3).unwrap();
    assert_eq!(sys.collision_count_brute(3), 6);
    assert_eq!(sys.bin_size(), 6);
    assert_eq!(deviation_by_bins(3, 1, 19), 0);
    let slices = SliceSystem::new(3, 1).unwrap();
    assert_eq!(slices.deviation_direct(19), Ok(0));
    assert_eq!(slices.deviation_formula(1), Ok(0));
}

#[test]
fn endpoint_slices_are_fixed() {
    for sys in grid() {
        let m = sys.modulus();
        for (a, _) in sys.class_table().iter() {
            assert_eq!(sys.slice_increment(a, 0), 0);
            assert_eq!(sys.slice_increment(a, m - 1), 1);
        }
    }
}

#[test]
fn interior_slices_complement_under_reflection() {
    for (b, lag) in [(3u64, 1u32), (10, 1), (5, 2), (7, 1), (12, 1)] {
        let sys = SliceSystem::new(b, lag).unwrap();
        let m = sys.modulus();
        for (a, _) in sys.class_table().iter() {
            for n in 1..m - 1 {
                assert_eq!(
                    sys.slice_increment(m - a, n),
                    1 - sys.slice_increment(a, n),
                    "b={b} lag={lag} a={a} n={n}"
                );
            }
        }
    }
}

#[test]
fn floor_split_over_reflected_units() {
    for sys in grid() {
        let (m, b) = (sys.modulus(), sys.b());
        for (a, _) in sys.class_table().iter() {
            assert_eq!(a / b + (m - a) / b, sys.good_slice_count() - 1);
        }
    }
}

#[test]
fn reflection_mean_and_half_group_on_grid() {
    for sys in grid() {
        let table = sys.class_table();
        assert_eq!(table.len() as u64, euler_phi(sys.modulus()));
        assert!(check_reflection(&table).passed());
        let mean = grand_mean(&table);
        assert_eq!(2 * mean.sum, -(mean.units as i64));
        assert_eq!(mean.to_string(), "-1/2");
        let half = check_half_group(&sys);
        assert!(half.passed(), "{:?}", half.failure);
    }
}

#[test]
fn wrapping_sizes_match_enumeration() {
    let sys = SliceSystem::new(3, 2).unwrap();
    let m = sys.modulus();
    for n in sys.good_slices() {
        let direct = (1..m)
            .filter(|&a| gcd(a, m) == 1 && (n + 1) * a % m < a)
            .count() as u64;
        assert_eq!(wrapping_set_size(&sys, n), Ok(direct));
    }
}

#[test]
fn deviation_matches_bin_definition_including_composites() {
    for (b, lag) in [(3u64, 1u32), (10, 1), (2, 2), (7, 1)] {
        let sys = SliceSystem::new(b, lag).unwrap();
        for p in sys.modulus() + 1..1500 {
            if gcd(p, b) != 1 {
                continue;
            }
            let expected = deviation_by_bins(b, lag, p);
            assert_eq!(sys.deviation_direct(p), Ok(expected), "b={b} p={p}");
            assert_eq!(
                sys.deviation_formula(p % sys.modulus()),
                Ok(expected),
                "b={b} p={p}"
            );
        }
    }
}

#[test]
fn reduction_mod_lower_power_is_not_enough() {
    let cases = [
        ((3, 1), (11, 1, 14, -1)),
        ((10, 1), (101, 0, 111, -1)),
        ((5, 2), (127, 1, 152, -1)),
        ((2, 1), (5, 0, 7, -1)),
    ];
    for ((b, lag), (p1, s1, p2, s2)) in cases {
        assert_eq!(
            sharpness_witness(b, lag, 5000).unwrap(),
            Some(SharpnessWitness { p1, s1, p2, s2 })
        );
    }
    for sys in grid().filter(|s| s.modulus() <= 500) {
        let w = sharpness_witness(sys.b(), sys.lag(), 20 * sys.modulus()).unwrap();
        let w = w.unwrap_or_else(|| panic!("no witness for b={} lag={}", sys.b(), sys.lag()));
        assert_eq!(w.p1 % sys.good_slice_count(), w.p2 % sys.good_slice_count());
        assert_ne!(w.s1, w.s2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determination_for_random_moduli(b in 2u64..=12, lag in 1u32..=3, p in 0u64..200_000) {
        let sys = SliceSystem::new(b, lag).unwrap();
        let m = sys.modulus();
        prop_assume!(p > m && gcd(p, b) == 1);
        prop_assert_eq!(sys.deviation_direct(p), sys.deviation_formula(p % m));
    }

    #[test]
    fn interior_complement_at_large_moduli(b in 2u64..=16, lag in 2u32..=4, a in 1u64.., n in 1u64..) {
        let sys = SliceSystem::new(b, lag).unwrap();
        let m = sys.modulus();
        let a = a % m;
        let n = n % m;
        prop_assume!(gcd(a, b) == 1 && n >= 1 && n <= m - 2);
        prop_assert_eq!(sys.slice_increment(m - a, n), 1 - sys.slice_increment(a, n));
    }

    #[test]
    fn gate_family_is_exactly_the_zero_set(idx in 0usize..300, b in 2u64..=16) {
        let primes = digitbins::modarith::primes_in_range(b + 1, 3000);
        let p = primes[idx % primes.len()];
        let sys = DigitSystem::new(p, b).unwrap();
        let mut family: Vec<u64> = sys.gate_family().unwrap().iter().map(|m| m.g).collect();
        family.sort_unstable();
        let zeros: Vec<u64> = (1..p).filter(|&g| sys.collision_count_linear(g) == 0).collect();
        prop_assert_eq!(family, zeros);
    }
}
