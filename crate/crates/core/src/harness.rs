//! Scan campaigns over prime ranges.
//!
//! [`run_scan`] sweeps every prime in `p_min..=p_max` against every requested
//! base (and lag), runs the selected checks, and folds the results into a
//! [`ScanReport`]. Primes are processed in fixed-size shards on a dedicated
//! thread pool; shard results are collected in range order and the rows are
//! then sorted, so the report does not depend on the worker count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::{DigitSystem, GateOptions};
use crate::error::{Error, Result};
use crate::modarith::{gcd, primes_in_range};
use crate::slices::{ClassTable, SliceSystem};
use crate::symmetry::{check_half_group, check_reflection};

/// Default exhaustive bound for gate sweeps inside scans.
pub const SCAN_EXHAUSTIVE_THRESHOLD: u64 = 10_000;
/// Witnesses kept per check type.
pub const WITNESS_CAP: usize = 16;
const SHARD_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Gate,
    Linearization,
    Determination,
    Reflection,
    Halfgroup,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::Gate,
        Check::Linearization,
        Check::Determination,
        Check::Reflection,
        Check::Halfgroup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Gate => "gate",
            Check::Linearization => "linearization",
            Check::Determination => "determination",
            Check::Reflection => "reflection",
            Check::Halfgroup => "halfgroup",
        }
    }

    fn uses_lag(self) -> bool {
        matches!(
            self,
            Check::Determination | Check::Reflection | Check::Halfgroup
        )
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown check `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub bases: Vec<u64>,
    pub lags: Vec<u32>,
    pub p_min: u64,
    pub p_max: u64,
    pub checks: BTreeSet<Check>,
    pub exhaustive_threshold: u64,
    /// Random outside multipliers per gate check above the exhaustive bound.
    pub gate_samples: usize,
    /// Random multipliers per (p, b) for the brute-vs-linear comparison.
    pub linearization_samples: usize,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide. Not part of the report.
    #[serde(skip)]
    pub parallelism: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            bases: vec![10],
            lags: vec![1],
            p_min: 2,
            p_max: 1000,
            checks: Check::ALL.into_iter().collect(),
            exhaustive_threshold: SCAN_EXHAUSTIVE_THRESHOLD,
            gate_samples: 64,
            linearization_samples: 4,
            seed: 0,
            parallelism: 0,
        }
    }
}

impl ScanConfig {
    /// Validates and returns the config with bases and lags sorted and
    /// deduplicated.
    pub fn normalized(&self) -> Result<ScanConfig> {
        let mut cfg = self.clone();
        cfg.bases.sort_unstable();
        cfg.bases.dedup();
        cfg.lags.sort_unstable();
        cfg.lags.dedup();
        if cfg.p_min > cfg.p_max {
            return Err(Error::ConfigInvalid(format!(
                "p_min {} exceeds p_max {}",
                cfg.p_min, cfg.p_max
            )));
        }
        if cfg.checks.is_empty() {
            return Err(Error::ConfigInvalid("no checks selected".into()));
        }
        if cfg.bases.is_empty() {
            return Err(Error::ConfigInvalid("no bases given".into()));
        }
        if let Some(b) = cfg.bases.iter().find(|&&b| b < 2) {
            return Err(Error::ConfigInvalid(format!("base {b} is below 2")));
        }
        if cfg.checks.iter().any(|c| c.uses_lag()) {
            if cfg.lags.is_empty() {
                return Err(Error::ConfigInvalid("no lags given".into()));
            }
            for &b in &cfg.bases {
                for &lag in &cfg.lags {
                    SliceSystem::new(b, lag)
                        .map_err(|e| Error::ConfigInvalid(format!("b={b} lag={lag}: {e}")))?;
                }
            }
        }
        Ok(cfg)
    }
}

/// Outcome of one check instance. `lag` is absent for lag-free checks and `p`
/// for checks that run once per (b, ℓ).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: Check,
    pub b: u64,
    pub lag: Option<u32>,
    pub p: Option<u64>,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub pass: u64,
    pub fail: u64,
}

/// Gate result for one `(b, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateRow {
    pub b: u64,
    pub p: u64,
    pub bin_size: u64,
    pub family_size: u64,
    /// Exhaustive count of units with `C(g) = 0`; absent for sampled sweeps.
    pub deranging_count: Option<u64>,
    pub passed: bool,
}

/// Finite-determination census for one `(b, ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusSummary {
    pub b: u64,
    pub lag: u32,
    pub modulus: u64,
    /// φ(modulus)
    pub units: u64,
    /// Unit classes that received at least one prime.
    pub classes: u64,
    pub primes: u64,
    /// Every populated class showed exactly one value, equal to the formula.
    pub determined: bool,
}

impl CensusSummary {
    /// Whether every unit class was populated.
    pub fn complete(&self) -> bool {
        self.classes == self.units
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Timing {
    pub elapsed: Duration,
    pub primes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub tallies: BTreeMap<Check, Tally>,
    pub witnesses: Vec<CheckRow>,
    pub gate_rows: Vec<GateRow>,
    pub census: Vec<CensusSummary>,
    pub rows: Vec<CheckRow>,
    #[serde(skip)]
    pub timing: Timing,
}

impl ScanReport {
    pub fn failures(&self) -> u64 {
        self.tallies.values().map(|t| t.fail).sum()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

/// One `(p, value)` observation for a census class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusClass {
    pub a: u64,
    pub formula: i64,
    pub observed: BTreeSet<i64>,
    pub primes: Vec<u64>,
}

impl CensusClass {
    pub fn determined(&self) -> bool {
        self.observed.len() <= 1 && self.observed.iter().all(|&v| v == self.formula)
    }
}

/// Primes grouped by their class mod `m`, with observed deviations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub system: SliceSystem,
    /// One entry per unit class, ascending.
    pub classes: Vec<CensusClass>,
}

impl Census {
    fn new(system: SliceSystem, table: &ClassTable) -> Self {
        Census {
            system,
            classes: table
                .iter()
                .map(|(a, formula)| CensusClass {
                    a,
                    formula,
                    observed: BTreeSet::new(),
                    primes: Vec::new(),
                })
                .collect(),
        }
    }

    fn record(&mut self, p: u64, value: i64) {
        let a = p % self.system.modulus();
        let idx = self
            .classes
            .binary_search_by_key(&a, |c| c.a)
            .expect("p coprime to b lands in a unit class");
        let class = &mut self.classes[idx];
        class.observed.insert(value);
        class.primes.push(p);
    }

    pub fn class(&self, a: u64) -> Option<&CensusClass> {
        self.classes
            .binary_search_by_key(&a, |c| c.a)
            .ok()
            .map(|i| &self.classes[i])
    }

    pub fn populated(&self) -> u64 {
        self.classes.iter().filter(|c| !c.primes.is_empty()).count() as u64
    }

    pub fn determined(&self) -> bool {
        self.classes.iter().all(CensusClass::determined)
    }

    pub fn summary(&self) -> CensusSummary {
        CensusSummary {
            b: self.system.b(),
            lag: self.system.lag(),
            modulus: self.system.modulus(),
            units: self.classes.len() as u64,
            classes: self.populated(),
            primes: self.classes.iter().map(|c| c.primes.len() as u64).sum(),
            determined: self.determined(),
        }
    }
}

/// Buckets the primes `m < p <= p_max` coprime to `b` by `p mod m` and
/// records the directly counted deviation of each.
pub fn class_census(b: u64, lag: u32, p_max: u64) -> Result<Census> {
    let system = SliceSystem::new(b, lag)?;
    let m = system.modulus();
    if m >= p_max {
        return Err(Error::TooSmall { p: p_max, bound: m });
    }
    let table = system.class_table();
    let primes: Vec<u64> = primes_in_range(m + 1, p_max)
        .into_iter()
        .filter(|&p| gcd(p, b) == 1)
        .collect();
    let values: Vec<i64> = primes
        .par_iter()
        .map(|&p| system.deviation_direct(p))
        .collect::<Result<_>>()?;
    let mut census = Census::new(system, &table);
    for (p, v) in primes.into_iter().zip(values) {
        census.record(p, v);
    }
    Ok(census)
}

/// Two moduli `p1 < p2`, congruent mod `b^ℓ`, whose directly counted
/// deviations differ; shows that reducing mod `b^ℓ` does not determine `S_ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharpnessWitness {
    pub p1: u64,
    pub s1: i64,
    pub p2: u64,
    pub s2: i64,
}

/// Searches `m < p <= p_max` (coprime to `b`) in ascending order for the first
/// [`SharpnessWitness`].
pub fn sharpness_witness(b: u64, lag: u32, p_max: u64) -> Result<Option<SharpnessWitness>> {
    let system = SliceSystem::new(b, lag)?;
    let coarse = system.good_slice_count();
    let mut first: BTreeMap<u64, (u64, i64)> = BTreeMap::new();
    for p in system.modulus() + 1..=p_max {
        if gcd(p, b) != 1 {
            continue;
        }
        let s = system.deviation_direct(p)?;
        match first.get(&(p % coarse)) {
            Some(&(p1, s1)) if s1 != s => {
                return Ok(Some(SharpnessWitness {
                    p1,
                    s1,
                    p2: p,
                    s2: s,
                }));
            }
            Some(_) => {}
            None => {
                first.insert(p % coarse, (p, s));
            }
        }
    }
    Ok(None)
}

struct Prepared {
    system: SliceSystem,
    table: Option<ClassTable>,
}

#[derive(Default)]
struct ShardOutput {
    rows: Vec<CheckRow>,
    gate_rows: Vec<GateRow>,
    observations: Vec<(u64, u32, u64, i64)>,
}

fn sample_rng(seed: u64, p: u64, b: u64, salt: u64) -> ChaCha8Rng {
    let mix =
        seed ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F) ^ salt;
    ChaCha8Rng::seed_from_u64(mix)
}

fn gate_check(cfg: &ScanConfig, b: u64, p: u64) -> Result<(CheckRow, GateRow)> {
    let sys = DigitSystem::new(p, b)?;
    let opts = GateOptions {
        exhaustive_threshold: cfg.exhaustive_threshold,
        samples: cfg.gate_samples,
        seed: cfg.seed,
    };
    let report = sys.verify_gate(&opts)?;
    let row = CheckRow {
        check: Check::Gate,
        b,
        lag: None,
        p: Some(p),
        passed: report.passed(),
        witness: report.failure.map(|f| f.to_string()),
    };
    let gate = GateRow {
        b,
        p,
        bin_size: report.bin_size,
        family_size: report.family.len() as u64,
        deranging_count: report.deranging_count,
        passed: report.passed(),
    };
    Ok((row, gate))
}

fn linearization_check(cfg: &ScanConfig, b: u64, p: u64) -> Result<CheckRow> {
    let sys = DigitSystem::new(p, b)?;
    let mut rng = sample_rng(cfg.seed, p, b, 0x11);
    let mut witness = None;
    for _ in 0..cfg.linearization_samples {
        let g = rng.gen_range(1..p);
        let brute = sys.collision_count_brute(g);
        let linear = sys.collision_count_linear(g);
        if brute != linear {
            witness = Some(format!("g={g} brute={brute} linear={linear}"));
            break;
        }
    }
    Ok(CheckRow {
        check: Check::Linearization,
        b,
        lag: None,
        p: Some(p),
        passed: witness.is_none(),
        witness,
    })
}

fn determination_check(
    system: &SliceSystem,
    table: &ClassTable,
    p: u64,
) -> Result<(CheckRow, i64)> {
    let direct = system.deviation_direct(p)?;
    let formula = table.get(p % system.modulus()).ok_or(Error::NotUnit {
        a: p % system.modulus(),
        m: system.modulus(),
    })?;
    let passed = direct == formula;
    let row = CheckRow {
        check: Check::Determination,
        b: system.b(),
        lag: Some(system.lag()),
        p: Some(p),
        passed,
        witness: (!passed).then(|| format!("direct={direct} formula={formula}")),
    };
    Ok((row, direct))
}

fn group_rows(
    system: &SliceSystem,
    checks: &BTreeSet<Check>,
    table: Option<&ClassTable>,
) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    if checks.contains(&Check::Reflection) {
        let owned;
        let table = match table {
            Some(t) => t,
            None => {
                owned = system.class_table();
                &owned
            }
        };
        let report = check_reflection(table);
        rows.push(CheckRow {
            check: Check::Reflection,
            b: system.b(),
            lag: Some(system.lag()),
            p: None,
            passed: report.passed(),
            witness: report.failure.map(|f| f.to_string()),
        });
    }
    if checks.contains(&Check::Halfgroup) {
        let report = check_half_group(system);
        rows.push(CheckRow {
            check: Check::Halfgroup,
            b: system.b(),
            lag: Some(system.lag()),
            p: None,
            passed: report.passed(),
            witness: report.failure.map(|f| f.to_string()),
        });
    }
    rows
}

fn scan_shard(cfg: &ScanConfig, prepared: &[Prepared], primes: &[u64]) -> Result<ShardOutput> {
    let mut out = ShardOutput::default();
    for &p in primes {
        for &b in &cfg.bases {
            if p > b {
                if cfg.checks.contains(&Check::Gate) {
                    let (row, gate) = gate_check(cfg, b, p)?;
                    out.rows.push(row);
                    out.gate_rows.push(gate);
                }
                if cfg.checks.contains(&Check::Linearization) {
                    out.rows.push(linearization_check(cfg, b, p)?);
                }
            }
        }
        for prep in prepared {
            let Some(table) = &prep.table else { continue };
            let sys = &prep.system;
            if p > sys.modulus() && gcd(p, sys.b()) == 1 {
                let (row, value) = determination_check(sys, table, p)?;
                out.rows.push(row);
                out.observations.push((sys.b(), sys.lag(), p, value));
            }
        }
    }
    Ok(out)
}

/// Run every requested check over the primes in `p_min..=p_max`.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanReport> {
    let started = Instant::now();
    let cfg = cfg.normalized()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::ConfigInvalid(format!("thread pool: {e}")))?;
    let mut report = pool.install(|| scan_in_pool(&cfg))?;
    report.timing.elapsed = started.elapsed();
    Ok(report)
}

fn scan_in_pool(cfg: &ScanConfig) -> Result<ScanReport> {
    let uses_slices = cfg.checks.iter().any(|c| c.uses_lag());
    let mut prepared = Vec::new();
    if uses_slices {
        for &b in &cfg.bases {
            for &lag in &cfg.lags {
                let system = SliceSystem::new(b, lag)?;
                let needs_table = cfg.checks.contains(&Check::Determination)
                    || cfg.checks.contains(&Check::Reflection);
                let table = needs_table.then(|| system.class_table());
                prepared.push(Prepared { system, table });
            }
        }
    }

    let mut rows: Vec<CheckRow> = prepared
        .par_iter()
        .map(|prep| group_rows(&prep.system, &cfg.checks, prep.table.as_ref()))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let primes = primes_in_range(cfg.p_min, cfg.p_max);
    let wants_primes = cfg
        .checks
        .iter()
        .any(|c| matches!(c, Check::Gate | Check::Linearization | Check::Determination));
    let determination = cfg.checks.contains(&Check::Determination);
    let per_prime: &[Prepared] = if determination { &prepared } else { &[] };
    let shards: Vec<ShardOutput> = if wants_primes {
        primes
            .par_chunks(SHARD_LEN)
            .map(|chunk| scan_shard(cfg, per_prime, chunk))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    let mut gate_rows = Vec::new();
    let mut censuses: BTreeMap<(u64, u32), Census> = per_prime
        .iter()
        .filter_map(|prep| {
            let table = prep.table.as_ref()?;
            Some((
                (prep.system.b(), prep.system.lag()),
                Census::new(prep.system, table),
            ))
        })
        .collect();
    for shard in shards {
        rows.extend(shard.rows);
        gate_rows.extend(shard.gate_rows);
        for (b, lag, p, value) in shard.observations {
            if let Some(c) = censuses.get_mut(&(b, lag)) {
                c.record(p, value);
            }
        }
    }
    rows.sort();
    gate_rows.sort_by_key(|g| (g.b, g.p));

    let mut tallies: BTreeMap<Check, Tally> =
        cfg.checks.iter().map(|&c| (c, Tally::default())).collect();
    let mut witnesses = Vec::new();
    let mut kept: BTreeMap<Check, usize> = BTreeMap::new();
    for row in &rows {
        let tally = tallies.entry(row.check).or_default();
        if row.passed {
            tally.pass += 1;
        } else {
            tally.fail += 1;
            let n = kept.entry(row.check).or_default();
            if *n < WITNESS_CAP {
                *n += 1;
                witnesses.push(row.clone());
            }
        }
    }

    Ok(ScanReport {
        config: cfg.clone(),
        tallies,
        witnesses,
        gate_rows,
        census: censuses.values().map(Census::summary).collect(),
        timing: Timing {
            elapsed: Duration::ZERO,
            primes: primes.len() as u64,
        },
        rows,
    })
}

/// Re-run the single check behind `row` in isolation and return its verdict.
pub fn rerun_check(cfg: &ScanConfig, row: &CheckRow) -> Result<bool> {
    let missing = || Error::ConfigInvalid(format!("row for {} lacks parameters", row.check));
    match row.check {
        Check::Gate => {
            let p = row.p.ok_or_else(missing)?;
            Ok(gate_check(cfg, row.b, p)?.0.passed)
        }
        Check::Linearization => {
            let p = row.p.ok_or_else(missing)?;
            Ok(linearization_check(cfg, row.b, p)?.passed)
        }
        Check::Determination => {
            let p = row.p.ok_or_else(missing)?;
            let system = SliceSystem::new(row.b, row.lag.ok_or_else(missing)?)?;
            Ok(determination_check(&system, &system.class_table(), p)?
                .0
                .passed)
        }
        Check::Reflection | Check::Halfgroup => {
            let system = SliceSystem::new(row.b, row.lag.ok_or_else(missing)?)?;
            let checks = BTreeSet::from([row.check]);
            Ok(group_rows(&system, &checks, None)[0].passed)
        }
    }
}

/// `(b, p)` rows of the gate-width reproduction table.
pub const TABLE_1: [(u64, u64); 5] = [(10, 17), (10, 97), (10, 193), (7, 41), (12, 67)];
/// Bases of the finite-determination reproduction table (ℓ = 1).
pub const TABLE_2_BASES: [u64; 4] = [3, 5, 7, 10];
pub const TABLE_2_P_MAX: u64 = 10_000;

/// Gate rows for the fixed `(b, p)` pairs, in table order.
pub fn reproduce_table_1(parallelism: usize) -> Result<Vec<GateRow>> {
    TABLE_1
        .iter()
        .map(|&(b, p)| {
            let cfg = ScanConfig {
                bases: vec![b],
                lags: vec![],
                p_min: p,
                p_max: p,
                checks: BTreeSet::from([Check::Gate]),
                parallelism,
                ..ScanConfig::default()
            };
            let report = run_scan(&cfg)?;
            report.gate_rows.first().copied().ok_or(Error::NotPrime(p))
        })
        .collect()
}

/// Census rows for `b ∈ {3, 5, 7, 10}`, ℓ = 1, primes up to 10^4.
pub fn reproduce_table_2(parallelism: usize) -> Result<Vec<CensusSummary>> {
    TABLE_2_BASES
        .iter()
        .map(|&b| {
            let cfg = ScanConfig {
                bases: vec![b],
                lags: vec![1],
                p_min: 2,
                p_max: TABLE_2_P_MAX,
                checks: BTreeSet::from([Check::Determination]),
                parallelism,
                ..ScanConfig::default()
            };
            let report = run_scan(&cfg)?;
            let mut summary = report.census[0];
            summary.determined &= report.passed();
            Ok(summary)
        })
        .collect()
}
