use std::collections::BTreeSet;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use digitbins::collision::{
    DigitSystem, GateOptions, DEFAULT_EXHAUSTIVE_THRESHOLD, DEFAULT_GATE_SAMPLES,
};
use digitbins::harness::{self, Check, ScanConfig, ScanReport};
use digitbins::modarith::gcd;
use digitbins::slices::SliceSystem;
use digitbins::symmetry::{self, GrandMean, ReflectionReport};
use digitbins::Error;

use crate::output::{Format, Sink};
use crate::{
    CheckArg, ClassCheck, ClassesArgs, Cli, Command, CountArgs, CountMethod, DeviationArgs,
    DeviationMethod, GateArgs, ReferenceTable, ScanArgs, SystemArgs,
};

/// Returns whether every check passed; `Err` means a usage error.
pub fn run(cli: Cli) -> Result<bool> {
    let mut sink = Sink::open(cli.format, cli.out.as_deref())?;
    let passed = match cli.command {
        Command::Count(args) => count(&mut sink, args)?,
        Command::Gate(args) => gate(&mut sink, args)?,
        Command::Deviation(args) => deviation(&mut sink, args)?,
        Command::Classes(args) => classes(&mut sink, args)?,
        Command::Halfgroup(args) => halfgroup(&mut sink, args)?,
        Command::Scan(args) => scan(&mut sink, args)?,
    };
    sink.finish()?;
    Ok(passed)
}

#[derive(Debug, Serialize, Deserialize)]
struct CountOutput {
    p: u64,
    b: u64,
    g: u64,
    brute: Option<u64>,
    linear: Option<u64>,
}

fn count(sink: &mut Sink, args: CountArgs) -> Result<bool> {
    let sys = DigitSystem::new(args.p, args.b)?;
    if args.g == 0 || args.g >= args.p {
        bail!(
            "g must satisfy 1 <= g < p (got g = {}, p = {})",
            args.g,
            args.p
        );
    }
    if gcd(args.g, args.p) != 1 {
        bail!("g must be a unit mod p: gcd({}, {}) != 1", args.g, args.p);
    }
    let brute = matches!(args.method, CountMethod::Brute | CountMethod::Both)
        .then(|| sys.collision_count_brute(args.g));
    let linear = matches!(args.method, CountMethod::Linear | CountMethod::Both)
        .then(|| sys.collision_count_linear(args.g));
    let agree = brute.zip(linear).is_none_or(|(x, y)| x == y);

    if sink.format == Format::Json {
        sink.json(&CountOutput {
            p: args.p,
            b: args.b,
            g: args.g,
            brute,
            linear,
        })?;
    } else {
        let values: Vec<String> = [brute, linear]
            .iter()
            .flatten()
            .map(u64::to_string)
            .collect();
        sink.line(&values.join(" "))?;
    }
    if !agree {
        eprintln!("FAIL brute and linear counts disagree");
    }
    Ok(agree)
}

fn gate(sink: &mut Sink, args: GateArgs) -> Result<bool> {
    let sys = DigitSystem::new(args.p, args.b)?;
    let opts = GateOptions {
        exhaustive_threshold: if args.exhaustive {
            u64::MAX
        } else {
            DEFAULT_EXHAUSTIVE_THRESHOLD
        },
        samples: DEFAULT_GATE_SAMPLES,
        seed: 0,
    };
    let report = sys.verify_gate(&opts)?;
    if sink.format == Format::Json {
        sink.json(&report)?;
    } else {
        let rows = report
            .family
            .iter()
            .map(|m| vec![m.u.to_string(), m.c.to_string(), m.g.to_string()])
            .collect();
        sink.rows(&["u", "c", "g"], rows)?;
    }
    let mode = if report.exhaustive {
        "exhaustive"
    } else {
        "sampled"
    };
    let summary = match report.failure {
        None => format!(
            "gate p={} b={} Q={} family={} ({mode}, {} outside units checked)",
            report.p,
            report.b,
            report.bin_size,
            report.family.len(),
            report.outside_checked
        ),
        Some(f) => format!("gate p={} b={}: {f}", report.p, report.b),
    };
    sink.verdict(report.passed(), &summary)?;
    Ok(report.passed())
}

fn deviation(sink: &mut Sink, args: DeviationArgs) -> Result<bool> {
    let sys = SliceSystem::new(args.b, args.lag)?;
    let m = sys.modulus();
    if gcd(args.p, args.b) != 1 {
        return Err(Error::NotCoprime {
            p: args.p,
            b: args.b,
        }
        .into());
    }
    if args.p <= m {
        return Err(Error::TooSmall {
            p: args.p,
            bound: m,
        }
        .into());
    }
    let direct = match args.method {
        DeviationMethod::Direct | DeviationMethod::Both => Some(sys.deviation_direct(args.p)?),
        DeviationMethod::Formula => None,
    };
    let formula = match args.method {
        DeviationMethod::Formula | DeviationMethod::Both => {
            Some(sys.deviation_formula(args.p % m)?)
        }
        DeviationMethod::Direct => None,
    };
    let agree = direct.zip(formula).is_none_or(|(x, y)| x == y);

    if sink.format == Format::Json {
        #[derive(Serialize)]
        struct DeviationOutput {
            p: u64,
            b: u64,
            lag: u32,
            modulus: u64,
            direct: Option<i64>,
            formula: Option<i64>,
        }
        sink.json(&DeviationOutput {
            p: args.p,
            b: args.b,
            lag: args.lag,
            modulus: m,
            direct,
            formula,
        })?;
    } else {
        let values: Vec<String> = [direct, formula]
            .iter()
            .flatten()
            .map(i64::to_string)
            .collect();
        sink.line(&values.join(" "))?;
    }
    if !agree {
        eprintln!("FAIL direct and formula deviations disagree");
    }
    Ok(agree)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClassRow {
    pub a: u64,
    #[serde(rename = "S")]
    pub s: i64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MeanOutput {
    pub mean: String,
    pub sum: i64,
    pub units: u64,
    pub passed: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClassesOutput {
    pub b: u64,
    pub lag: u32,
    pub modulus: u64,
    pub rows: Vec<ClassRow>,
    pub reflection: Option<ReflectionReport>,
    pub mean: Option<MeanOutput>,
}

fn mean_output(mean: &GrandMean) -> MeanOutput {
    MeanOutput {
        mean: mean.to_string(),
        sum: mean.sum,
        units: mean.units,
        passed: mean.is_minus_half(),
    }
}

fn classes(sink: &mut Sink, args: ClassesArgs) -> Result<bool> {
    let sys = SliceSystem::new(args.system.b, args.system.lag)?;
    let table = sys.class_table();
    let reflection = args
        .check
        .contains(&ClassCheck::Reflection)
        .then(|| symmetry::check_reflection(&table));
    let mean = args
        .check
        .contains(&ClassCheck::Mean)
        .then(|| symmetry::grand_mean(&table));

    if sink.format == Format::Json {
        sink.json(&ClassesOutput {
            b: sys.b(),
            lag: sys.lag(),
            modulus: sys.modulus(),
            rows: table.iter().map(|(a, s)| ClassRow { a, s }).collect(),
            reflection,
            mean: mean.as_ref().map(mean_output),
        })?;
    } else {
        let rows = table
            .iter()
            .map(|(a, s)| vec![a.to_string(), s.to_string()])
            .collect();
        sink.rows(&["a", "S"], rows)?;
    }

    let mut passed = true;
    if let Some(r) = reflection {
        let text = match r.failure {
            None => format!(
                "reflection: {} pairs with S(a) + S(m-a) = -1",
                r.pairs_checked
            ),
            Some(f) => format!("reflection: {f}"),
        };
        sink.verdict(r.passed(), &text)?;
        passed &= r.passed();
    }
    if let Some(g) = mean {
        let text = format!("mean {g} (sum {} over {} units)", g.sum, g.units);
        sink.verdict(g.is_minus_half(), &text)?;
        passed &= g.is_minus_half();
    }
    Ok(passed)
}

fn halfgroup(sink: &mut Sink, args: SystemArgs) -> Result<bool> {
    let sys = SliceSystem::new(args.b, args.lag)?;
    let report = symmetry::check_half_group(&sys);
    if sink.format == Format::Json {
        sink.json(&report)?;
    } else {
        let rows = report
            .profile
            .rows
            .iter()
            .map(|w| {
                vec![
                    w.n.to_string(),
                    w.c.to_string(),
                    w.trivial.to_string(),
                    w.size.to_string(),
                    w.expected.to_string(),
                ]
            })
            .collect();
        sink.rows(&["n", "c", "trivial", "size", "expected"], rows)?;
    }
    let p = &report.profile;
    let nontrivial = p.rows.iter().filter(|w| !w.trivial).count();
    let text = match report.failure {
        None => format!(
            "halfgroup m={} phi={}: {nontrivial} non-trivial slices with |W| = {}",
            p.m,
            p.phi,
            p.phi / 2
        ),
        Some(f) => format!("halfgroup m={}: {f}", p.m),
    };
    sink.verdict(report.passed(), &text)?;
    Ok(report.passed())
}

fn to_check(c: CheckArg) -> Check {
    match c {
        CheckArg::Gate => Check::Gate,
        CheckArg::Linearization => Check::Linearization,
        CheckArg::Determination => Check::Determination,
        CheckArg::Reflection => Check::Reflection,
        CheckArg::Halfgroup => Check::Halfgroup,
    }
}

fn scan(sink: &mut Sink, args: ScanArgs) -> Result<bool> {
    match args.paper_table {
        Some(ReferenceTable::GateWidth) => return gate_width_table(sink, args.parallelism),
        Some(ReferenceTable::Determination) => return determination_table(sink, args.parallelism),
        None => {}
    }
    let cfg = ScanConfig {
        bases: args.bases,
        lags: args.lags,
        p_min: args.pmin,
        p_max: args.pmax,
        checks: args
            .checks
            .into_iter()
            .map(to_check)
            .collect::<BTreeSet<_>>(),
        exhaustive_threshold: args.exhaustive_threshold,
        gate_samples: args.gate_samples,
        linearization_samples: args.linearization_samples,
        seed: args.seed,
        parallelism: args.parallelism,
    };
    let report = harness::run_scan(&cfg)?;
    emit_scan(sink, &report)?;
    Ok(report.passed())
}

/// CSV rows `check,b,lag,p,status,witness`.
pub fn scan_rows(report: &ScanReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.check.to_string(),
                r.b.to_string(),
                r.lag.map(|l| l.to_string()).unwrap_or_default(),
                r.p.map(|p| p.to_string()).unwrap_or_default(),
                if r.passed { "PASS" } else { "FAIL" }.to_string(),
                r.witness.clone().unwrap_or_default(),
            ]
        })
        .collect()
}

fn emit_scan(sink: &mut Sink, report: &ScanReport) -> Result<()> {
    match sink.format {
        Format::Json => sink.json(report)?,
        Format::Csv => sink.csv(
            &["check", "b", "lag", "p", "status", "witness"],
            scan_rows(report),
        )?,
        Format::Table => {
            let rows: Vec<Vec<String>> = report
                .tallies
                .iter()
                .map(|(c, t)| vec![c.to_string(), t.pass.to_string(), t.fail.to_string()])
                .collect();
            sink.table(&["check", "pass", "fail"], &rows)?;
            for w in &report.witnesses {
                let lag = w.lag.map(|l| format!(" lag={l}")).unwrap_or_default();
                let p = w.p.map(|p| format!(" p={p}")).unwrap_or_default();
                let detail = w.witness.as_deref().unwrap_or("");
                sink.line(&format!("witness {} b={}{lag}{p}: {detail}", w.check, w.b))?;
            }
            sink.line(&format!(
                "{} primes in {:.3}s",
                report.timing.primes,
                report.timing.elapsed.as_secs_f64()
            ))?;
        }
    }
    let text = format!(
        "scan: {} checks, {} failures",
        report.rows.len(),
        report.failures()
    );
    sink.verdict(report.passed(), &text)
}

#[derive(Debug, Serialize, Deserialize)]
struct GateWidthRow {
    b: u64,
    p: u64,
    #[serde(rename = "Q")]
    q: u64,
    deranging_count: Option<u64>,
}

fn gate_width_table(sink: &mut Sink, parallelism: usize) -> Result<bool> {
    let rows = harness::reproduce_table_1(parallelism)?;
    let passed = rows
        .iter()
        .all(|r| r.passed && r.deranging_count == Some(r.b - 1));
    if sink.format == Format::Json {
        let out: Vec<GateWidthRow> = rows
            .iter()
            .map(|r| GateWidthRow {
                b: r.b,
                p: r.p,
                q: r.bin_size,
                deranging_count: r.deranging_count,
            })
            .collect();
        sink.json(&out)?;
    } else {
        let cells = rows
            .iter()
            .map(|r| {
                vec![
                    r.b.to_string(),
                    r.p.to_string(),
                    r.bin_size.to_string(),
                    r.deranging_count.map(|d| d.to_string()).unwrap_or_default(),
                ]
            })
            .collect();
        sink.rows(&["b", "p", "Q", "deranging_count"], cells)?;
    }
    sink.verdict(
        passed,
        "gate width: deranging count equals b - 1 in every row",
    )?;
    Ok(passed)
}

fn determination_table(sink: &mut Sink, parallelism: usize) -> Result<bool> {
    let rows = harness::reproduce_table_2(parallelism)?;
    let passed = rows.iter().all(|r| r.determined && r.complete());
    if sink.format == Format::Json {
        sink.json(&rows)?;
    } else {
        let cells = rows
            .iter()
            .map(|r| {
                vec![
                    r.b.to_string(),
                    r.modulus.to_string(),
                    r.classes.to_string(),
                    if r.determined { "yes" } else { "no" }.to_string(),
                ]
            })
            .collect();
        sink.rows(&["b", "modulus", "classes", "determined"], cells)?;
    }
    sink.verdict(
        passed,
        &format!(
            "finite determination: S_1 constant on every unit class, primes up to {}",
            harness::TABLE_2_P_MAX
        ),
    )?;
    Ok(passed)
}
