//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use digitbins::collision::DigitSystem;
use digitbins::modarith::{gcd, primes_in_range};
use digitbins::slices::SliceSystem;
use digitbins::symmetry::{check_half_group, check_reflection, grand_mean, wrapping_set_size};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const BASES: [u64; 6] = [2, 3, 5, 7, 10, 12];

fn digitbins(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_digitbins"))
        .args(args)
        .output()
        .map_err(|e| format!("spawn failed: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(out.stdout)
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    if elapsed < limit {
        Ok(detail)
    } else {
        Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn grid() -> impl Iterator<Item = SliceSystem> {
    (2..=12u64).flat_map(|b| (1..=2u32).map(move |lag| SliceSystem::new(b, lag).unwrap()))
}

fn table_1() -> Outcome {
    let start = Instant::now();
    let out = digitbins(&["scan", "--paper-table", "1", "--format", "csv"])?;
    let elapsed = start.elapsed();
    let expected = "b,p,Q,deranging_count\n\
                    10,17,1,9\n10,97,9,9\n10,193,19,9\n7,41,5,6\n12,67,5,11\n";
    let got = String::from_utf8_lossy(&out);
    if got != expected {
        return Err(format!("unexpected output:\n{got}"));
    }
    within(elapsed, Duration::from_secs(1), "5 rows exact".into())
}

fn table_2() -> Outcome {
    let start = Instant::now();
    let out = digitbins(&["scan", "--paper-table", "2", "--format", "csv"])?;
    let elapsed = start.elapsed();
    let expected =
        "b,modulus,classes,determined\n3,9,6,yes\n5,25,20,yes\n7,49,42,yes\n10,100,40,yes\n";
    let got = String::from_utf8_lossy(&out);
    if got != expected {
        return Err(format!("unexpected output:\n{got}"));
    }
    within(
        elapsed,
        Duration::from_secs(5),
        "class counts 6, 20, 42, 40, all constant".into(),
    )
}

fn gate_width() -> Outcome {
    let start = Instant::now();
    let mut primes_checked = 0;
    for b in BASES {
        for p in primes_in_range(b + 1, 2000) {
            let sys = DigitSystem::new(p, b).map_err(|e| e.to_string())?;
            let zeros: Vec<u64> = (1..p).filter(|&g| !sys.has_collision(g)).collect();
            let mut family: Vec<u64> = sys
                .gate_family()
                .map_err(|e| e.to_string())?
                .iter()
                .map(|m| m.g)
                .collect();
            family.sort_unstable();
            if zeros != family || zeros.len() as u64 != b - 1 {
                return Err(format!(
                    "b={b} p={p}: zero set {zeros:?}, family {family:?}"
                ));
            }
            primes_checked += 1;
        }
    }
    within(
        start.elapsed(),
        Duration::from_secs(60),
        format!("{primes_checked} (p, b) pairs"),
    )
}

fn linearization() -> Outcome {
    let mut compared = 0u64;
    for b in BASES {
        for p in primes_in_range(b + 1, 500) {
            let sys = DigitSystem::new(p, b).map_err(|e| e.to_string())?;
            for g in 1..p {
                let (brute, linear) = (sys.collision_count_brute(g), sys.collision_count_linear(g));
                if brute != linear {
                    return Err(format!("p={p} b={b} g={g}: brute {brute}, linear {linear}"));
                }
                compared += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..10_000 {
        let b = rng.gen_range(2..=64u64);
        let p = loop {
            let p = rng.gen_range(501..=200_000u64);
            if gcd(p, b) == 1 {
                break p;
            }
        };
        let g = loop {
            let g = rng.gen_range(1..p);
            if gcd(g, p) == 1 {
                break g;
            }
        };
        let sys = DigitSystem::new(p, b).map_err(|e| e.to_string())?;
        let (brute, linear) = (sys.collision_count_brute(g), sys.collision_count_linear(g));
        if brute != linear {
            return Err(format!("p={p} b={b} g={g}: brute {brute}, linear {linear}"));
        }
        compared += 1;
    }
    Ok(format!("{compared} triples agree"))
}

fn determination() -> Outcome {
    let start = Instant::now();
    let mut compared = 0u64;
    for b in [3u64, 5, 7, 10] {
        for lag in [1u32, 2] {
            let sys = SliceSystem::new(b, lag).map_err(|e| e.to_string())?;
            let m = sys.modulus();
            if m > 10_000 {
                continue;
            }
            let table = sys.class_table();
            for p in m + 1..=100_000 {
                if gcd(p, b) != 1 {
                    continue;
                }
                let direct = sys.deviation_direct(p).map_err(|e| e.to_string())?;
                if table.get(p % m) != Some(direct) {
                    return Err(format!(
                        "b={b} lag={lag} p={p}: direct {direct}, formula {:?}",
                        table.get(p % m)
                    ));
                }
                compared += 1;
            }
        }
    }
    within(
        start.elapsed(),
        Duration::from_secs(60),
        format!("{compared} moduli, composites included"),
    )
}

fn reflection() -> Outcome {
    let mut pairs = 0;
    for sys in grid() {
        let report = check_reflection(&sys.class_table());
        if let Some(f) = report.failure {
            return Err(format!("b={} lag={}: {f}", sys.b(), sys.lag()));
        }
        pairs += report.pairs_checked;
    }
    Ok(format!("{pairs} pairs"))
}

fn mean() -> Outcome {
    let mut systems = 0;
    for sys in grid() {
        let mean = grand_mean(&sys.class_table());
        if 2 * mean.sum != -(mean.units as i64) || mean.to_string() != "-1/2" {
            return Err(format!(
                "b={} lag={}: sum {} over {} units ({mean})",
                sys.b(),
                sys.lag(),
                mean.sum,
                mean.units
            ));
        }
        systems += 1;
    }
    Ok(format!("-1/2 exactly on {systems} systems"))
}

fn half_group() -> Outcome {
    let mut slices = 0;
    for sys in grid() {
        let report = check_half_group(&sys);
        if let Some(f) = &report.failure {
            return Err(format!("b={} lag={}: {f}", sys.b(), sys.lag()));
        }
        let m = sys.modulus();
        let phi = sys.unit_count();
        let sizes = (
            wrapping_set_size(&sys, 0).map_err(|e| e.to_string())?,
            wrapping_set_size(&sys, m - 1).map_err(|e| e.to_string())?,
        );
        if sizes != (0, phi) {
            return Err(format!(
                "b={} lag={}: trivial slices {sizes:?}",
                sys.b(),
                sys.lag()
            ));
        }
        let units: Vec<u64> = (1..m).filter(|&a| sys.is_unit(a)).collect();
        for n in sys.good_slices().filter(|&n| n != 0 && n != m - 1) {
            let wraps = |a: u64| (n + 1) * a % m < a;
            let size = units.iter().filter(|&&a| wraps(a)).count() as u64;
            if 2 * size != phi {
                return Err(format!(
                    "b={} lag={} n={n}: |W| = {size}",
                    sys.b(),
                    sys.lag()
                ));
            }
            if let Some(&a) = units.iter().find(|&&a| wraps(a) == wraps(m - a)) {
                return Err(format!(
                    "b={} lag={} n={n}: a={a} not swapped",
                    sys.b(),
                    sys.lag()
                ));
            }
            slices += 1;
        }
    }
    Ok(format!("{slices} non-trivial slices"))
}

fn anchor() -> Outcome {
    let (p, b, g) = (19u64, 3u64, 3u64);
    let enumerated = (1..p).filter(|&r| b * r / p == b * (g * r % p) / p).count() as u64;
    let q = (p - 1) / b;
    let sys = DigitSystem::new(p, b).map_err(|e| e.to_string())?;
    let slices = SliceSystem::new(b, 1).map_err(|e| e.to_string())?;
    let got = (
        enumerated,
        sys.collision_count_brute(g),
        sys.collision_count_linear(g),
        q,
        sys.bin_size(),
        slices.deviation_direct(p).map_err(|e| e.to_string())?,
        slices.deviation_formula(p % 9).map_err(|e| e.to_string())?,
    );
    if got == (6, 6, 6, 6, 6, 0, 0) {
        Ok("C(3) = 6, Q = 6, S = 0".into())
    } else {
        Err(format!("got {got:?}"))
    }
}

fn determinism() -> Outcome {
    let base = [
        "scan",
        "-b",
        "3,7,10,12",
        "-l",
        "1,2",
        "--pmax",
        "3000",
        "--format",
        "csv",
    ];
    let serial = digitbins(&[&base[..], &["-j", "1"]].concat())?;
    let parallel = digitbins(&[&base[..], &["-j", "8"]].concat())?;
    if serial.is_empty() {
        return Err("empty report".into());
    }
    if serial != parallel {
        return Err("reports differ".into());
    }
    Ok(format!("{} identical bytes", serial.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("table 1 reproduction", table_1),
        ("table 2 reproduction", table_2),
        ("gate width", gate_width),
        ("linearization oracle", linearization),
        ("finite determination", determination),
        ("reflection identity", reflection),
        ("grand mean", mean),
        ("half-group", half_group),
        ("anchor value", anchor),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({elapsed:.2?}): {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
