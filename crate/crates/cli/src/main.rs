//! Command-line front end: compute ghost-series tables, certified slope
//! multisets, profiles, and near-Steinberg ranges; run the verification
//! harness. JSON output is deterministic: identical flags give identical
//! payloads (timing lives in metadata only).
//!
//! Exit codes: 0 success / all checks pass, 1 at least one check failed,
//! 2 usage or validation error, 3 certification failure.

use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde_json::Value;

use ghost_cli::records::*;
use ghost_core::dims::Weight;
use ghost_core::newton::{certified_slopes, ghost_np, DEFAULT_N_MAX};
use ghost_core::params::{validate, GhostParams, WeightClass};
use ghost_core::scan::coefficient_valuations;
use ghost_core::steinberg::{all_ns_ranges, maximal_ns_ranges};
use ghost_core::verify::{check_local_constancy, lemma_suite};

const EXIT_OK: i32 = 0;
const EXIT_CHECK_FAILED: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_UNCERTIFIED: i32 = 3;

#[derive(Parser)]
#[command(
    name = "ghost",
    version,
    about = "Exact ghost-series slope data: dimension tables, coefficient valuations, \
             Newton polygons, certified slope multisets, delta profiles, near-Steinberg \
             ranges, and slope local-constancy verification"
)]
struct Cli {
    /// Prime p (strict mode requires p >= 11)
    #[arg(long, global = true)]
    p: Option<u64>,

    /// Parameter a, in [2, p-5]
    #[arg(long, global = true)]
    a: Option<u64>,

    /// Parameter s, in [0, p-2]
    #[arg(long, global = true)]
    s: Option<u64>,

    /// Output format; csv/tsv are available for dims, ghost and slopes
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Enforce p >= 11 (the default)
    #[arg(long, global = true, overrides_with = "no_strict")]
    strict: bool,

    /// Admit 7 <= p < 11; results are flagged as outside the proven range
    #[arg(long, global = true)]
    no_strict: bool,

    /// Worker threads for parallel scans (default: GHOST_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Coefficient-index cap: table length for ghost/np (default 24),
    /// certification growth limit for slopes/verify (default 1000000)
    #[arg(long, global = true)]
    n_max: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Echo the validated parameters and derived constants
    Params,
    /// Dimension table d_ur / d_iw / d_new over a k_bullet range
    Dims {
        #[arg(long)]
        k_bullet_max: u64,
    },
    /// Coefficient valuations v_p(g_n) at one evaluation weight
    Ghost {
        #[arg(long, value_parser = parse_biguint)]
        k_bullet: BigUint,
    },
    /// Newton polygon vertices and segments of the truncated series
    Np {
        #[arg(long, value_parser = parse_biguint)]
        k_bullet: BigUint,
    },
    /// Certified slope multiset below a bound
    Slopes {
        #[arg(long, value_parser = parse_biguint)]
        k_bullet: BigUint,
        /// Rational bound, e.g. 3 or 7/2
        #[arg(long, value_parser = parse_rational)]
        bound: BigRational,
    },
    /// Delta profile (raw values, hull values, hull vertices) of a weight
    Delta {
        #[arg(long)]
        k_bullet: u64,
    },
    /// Near-Steinberg ranges of an evaluation weight, maximal ones flagged
    Ns {
        #[arg(long, value_parser = parse_biguint)]
        k_bullet: BigUint,
        /// Largest generating k_bullet to consider
        #[arg(long)]
        window: u64,
    },
    /// Slope local-constancy runs at bound m-4
    Verify {
        #[arg(long)]
        m: u32,
        /// Base weight k_bullet
        #[arg(long, value_parser = parse_biguint)]
        k_bullet: BigUint,
        /// Number of congruent partners k + t(p-1)p^m to compare
        #[arg(long, default_value_t = 1)]
        pairs: u64,
    },
    /// Full lemma suite over k_bullet <= k-bullet-max
    Lemmas {
        #[arg(long)]
        k_bullet_max: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Tsv,
}

fn parse_biguint(s: &str) -> Result<BigUint, String> {
    s.parse::<BigUint>()
        .map_err(|e| format!("not a non-negative integer: {e}"))
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num
        .trim()
        .parse()
        .map_err(|e| format!("bad numerator: {e}"))?;
    let den: BigInt = den
        .trim()
        .parse()
        .map_err(|e| format!("bad denominator: {e}"))?;
    if den == BigInt::from(0) {
        return Err("zero denominator".into());
    }
    Ok(BigRational::new(num, den))
}

fn rat_str(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };

    let threads = cli.threads.or_else(|| {
        std::env::var("GHOST_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return EXIT_USAGE;
        }
        if let Err(e) = ghost_core::scan::configure_threads(n) {
            eprintln!("error: could not configure {n} worker threads: {e}");
            return EXIT_USAGE;
        }
    }

    let (Some(p), Some(a), Some(s)) = (cli.p, cli.a, cli.s) else {
        eprintln!("error: --p, --a and --s are required");
        return EXIT_USAGE;
    };
    let strict = !cli.no_strict;
    let params = match validate(p, a, s, strict) {
        Ok(params) => params,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if params.outside_theorem_range {
        eprintln!("warning: p = {p} is below 11; results are outside the proven range");
    }
    let class = WeightClass::new(params);

    let start = Instant::now();
    let (payload, table, exit) = match run_command(&cli, &class, &params) {
        Ok(out) => out,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };

    match cli.format {
        Format::Json => {
            let doc = Document {
                metadata: Metadata {
                    command: command_name(&cli.command).to_string(),
                    version: env!("CARGO_PKG_VERSION").to_string(),
                    p,
                    a,
                    s,
                    strict,
                    outside_theorem_range: params.outside_theorem_range,
                    threads,
                    timing_ms: start.elapsed().as_millis(),
                },
                payload,
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializable")
            );
        }
        Format::Csv | Format::Tsv => {
            let sep = if cli.format == Format::Csv { "," } else { "\t" };
            let Some((header, rows)) = table else {
                eprintln!("error: csv/tsv output is only available for dims, ghost and slopes");
                return EXIT_USAGE;
            };
            println!("{}", header.join(sep));
            for row in rows {
                println!("{}", row.join(sep));
            }
        }
    }
    exit
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Params => "params",
        Command::Dims { .. } => "dims",
        Command::Ghost { .. } => "ghost",
        Command::Np { .. } => "np",
        Command::Slopes { .. } => "slopes",
        Command::Delta { .. } => "delta",
        Command::Ns { .. } => "ns",
        Command::Verify { .. } => "verify",
        Command::Lemmas { .. } => "lemmas",
    }
}

type FlatTable = (Vec<&'static str>, Vec<Vec<String>>);

fn run_command(
    cli: &Cli,
    class: &WeightClass,
    params: &GhostParams,
) -> Result<(Value, Option<FlatTable>, i32), String> {
    match &cli.command {
        Command::Params => {
            let payload = ParamsPayload {
                p: params.p,
                a: params.a,
                s: params.s,
                outside_theorem_range: params.outside_theorem_range,
                k_eps: class.k_eps(),
                delta: class.delta(),
                t1: class.t1(),
                t2: class.t2(),
            };
            Ok((serde_json::to_value(&payload).unwrap(), None, EXIT_OK))
        }
        Command::Dims { k_bullet_max } => {
            let rows: Vec<DimRow> = (0..=*k_bullet_max)
                .map(|kb| {
                    let d = class.dims(&Weight::from_u64(kb));
                    DimRow {
                        k_bullet: kb.to_string(),
                        d_ur: d.d_ur.to_string(),
                        d_iw: d.d_iw.to_string(),
                        d_new: d.d_new.to_string(),
                    }
                })
                .collect();
            let table = (
                vec!["k_bullet", "d_ur", "d_iw", "d_new"],
                rows.iter()
                    .map(|r| {
                        vec![
                            r.k_bullet.clone(),
                            r.d_ur.clone(),
                            r.d_iw.clone(),
                            r.d_new.clone(),
                        ]
                    })
                    .collect(),
            );
            let payload = DimsPayload { rows };
            Ok((
                serde_json::to_value(&payload).unwrap(),
                Some(table),
                EXIT_OK,
            ))
        }
        Command::Ghost { k_bullet } => {
            let n_max = cli.n_max.unwrap_or(24);
            let w = Weight::new(k_bullet.clone());
            let rows: Vec<CoeffRow> = coefficient_valuations(class, &w, n_max)
                .into_iter()
                .enumerate()
                .map(|(n, v)| CoeffRow {
                    n: n as u64,
                    valuation: v.to_string(),
                })
                .collect();
            let table = (
                vec!["n", "valuation"],
                rows.iter()
                    .map(|r| vec![r.n.to_string(), r.valuation.clone()])
                    .collect(),
            );
            let payload = GhostPayload {
                k_bullet: k_bullet.to_string(),
                rows,
            };
            Ok((
                serde_json::to_value(&payload).unwrap(),
                Some(table),
                EXIT_OK,
            ))
        }
        Command::Np { k_bullet } => {
            let n_max = cli.n_max.unwrap_or(24).max(1);
            let w = Weight::new(k_bullet.clone());
            let np = ghost_np(class, &w, n_max);
            let payload = NpPayload {
                k_bullet: k_bullet.to_string(),
                n_max,
                vertices: np
                    .vertices()
                    .iter()
                    .map(|&(n, v)| CoeffRow {
                        n,
                        valuation: v.to_string(),
                    })
                    .collect(),
                segments: np
                    .segments()
                    .iter()
                    .map(|seg| SegmentRow {
                        from: seg.start.0,
                        to: seg.end.0,
                        slope: rat_str(&seg.slope),
                        length: seg.length,
                    })
                    .collect(),
            };
            Ok((serde_json::to_value(&payload).unwrap(), None, EXIT_OK))
        }
        Command::Slopes { k_bullet, bound } => {
            if bound < &BigRational::new(BigInt::from(0), BigInt::from(1)) {
                return Err("--bound must be non-negative".into());
            }
            let n_max = cli.n_max.unwrap_or(DEFAULT_N_MAX);
            let w = Weight::new(k_bullet.clone());
            let ms = certified_slopes(class, &w, bound, n_max);
            let exit = if ms.certified {
                EXIT_OK
            } else {
                EXIT_UNCERTIFIED
            };
            if !ms.certified {
                eprintln!(
                    "certification failed below index {}; entries are the best known prefix",
                    ms.truncation
                );
            }
            let payload = SlopesPayload {
                k_bullet: k_bullet.to_string(),
                bound: rat_str(bound),
                certified: ms.certified,
                truncation: ms.truncation,
                entries: ms
                    .entries
                    .iter()
                    .map(|(slope, mult)| SlopeEntryRow {
                        slope: rat_str(slope),
                        mult: *mult,
                    })
                    .collect(),
                certificate: ms.certificate.as_ref().map(|c| CertificatePayload {
                    anchor_index: c.anchor.0,
                    anchor_valuation: c.anchor.1,
                    explicit_to: c.explicit_to,
                    crossover: c.crossover,
                }),
            };
            let table = (
                vec!["slope", "mult"],
                payload
                    .entries
                    .iter()
                    .map(|e| vec![e.slope.clone(), e.mult.to_string()])
                    .collect(),
            );
            Ok((serde_json::to_value(&payload).unwrap(), Some(table), exit))
        }
        Command::Delta { k_bullet } => {
            let prof = ghost_core::ghost::delta_profile(class, &Weight::from_u64(*k_bullet))
                .map_err(|e| e.to_string())?;
            let d = prof.radius() as i64;
            let rows: Vec<DeltaRow> = if prof.is_empty() {
                Vec::new()
            } else {
                (-d..=d)
                    .map(|ell| DeltaRow {
                        ell,
                        raw: rat_str(prof.raw_at(ell).unwrap()),
                        hull: rat_str(prof.hull_at(ell).unwrap()),
                        vertex: prof.hull_vertices().contains(&ell),
                    })
                    .collect()
            };
            let payload = DeltaPayload {
                k_bullet: k_bullet.to_string(),
                radius: prof.radius(),
                half_iw: prof.half_iw(),
                rows,
            };
            Ok((serde_json::to_value(&payload).unwrap(), None, EXIT_OK))
        }
        Command::Ns { k_bullet, window } => {
            let eval = Weight::new(k_bullet.clone());
            let ranges = all_ns_ranges(class, &eval, *window);
            let maximal = maximal_ns_ranges(&ranges);
            let rows: Vec<NsRow> = ranges
                .iter()
                .map(|r| NsRow {
                    k_bullet: r.k_bullet.to_string(),
                    l: r.l.to_string(),
                    lo: r.lo.to_string(),
                    hi: r.hi.to_string(),
                    maximal: maximal.contains(r),
                })
                .collect();
            let payload = NsPayload {
                k_eval_bullet: k_bullet.to_string(),
                window: *window,
                ranges: rows,
            };
            Ok((serde_json::to_value(&payload).unwrap(), None, EXIT_OK))
        }
        Command::Verify { m, k_bullet, pairs } => {
            if *m < 4 {
                return Err("--m must be at least 4".into());
            }
            let n_max = cli.n_max.unwrap_or(DEFAULT_N_MAX);
            let report =
                check_local_constancy(class, *m, &Weight::new(k_bullet.clone()), *pairs, n_max);
            let exit = if !report.all_certified {
                EXIT_UNCERTIFIED
            } else if !report.all_equal {
                EXIT_CHECK_FAILED
            } else {
                EXIT_OK
            };
            Ok((serde_json::to_value(&report).unwrap(), None, exit))
        }
        Command::Lemmas { k_bullet_max } => {
            let report = lemma_suite(class, *k_bullet_max);
            let exit = if report.all_pass() {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            };
            Ok((serde_json::to_value(&report).unwrap(), None, exit))
        }
    }
}
