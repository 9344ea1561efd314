use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use zerosum_core::conjecture::{conjecture_scan, default_weights, ScanConfig, ScanMode};
use zerosum_core::davenport::{davenport_exact, davenport_formula, DavenportCache, DEFAULT_NODE_BUDGET};
use zerosum_core::group::{all_groups_up_to, GroupLiteral};
use zerosum_core::selftest::{self, Scale};
use zerosum_core::weighted::{
    solve, verify_certificate, Certificate, Instance, SolveOptions, DEFAULT_ORACLE_CAP,
};
use zerosum_core::zerosum::{find_zero_sum_bounded, find_zero_sum_exact_length};
use zerosum_core::{rho, AbelianGroup, Error};

/// Environment variable naming the default Davenport cache file.
const CACHE_ENV: &str = "ZEROSUM_DAVENPORT_CACHE";

#[derive(Parser)]
#[command(
    name = "zerosum",
    version,
    about = "Zero-sum solvers and certificate checker for finite abelian groups"
)]
struct Cli {
    /// Print timings to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CacheArgs {
    /// Davenport cache file (default: $ZEROSUM_DAVENPORT_CACHE, else none).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Node budget for exact Davenport searches.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
}

impl CacheArgs {
    fn open(&self) -> Result<DavenportCache, Error> {
        let path = self
            .cache
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from));
        match path {
            Some(p) => DavenportCache::open(p, self.budget),
            None => Ok(DavenportCache::in_memory(self.budget)),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Small,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Show the invariant-factor form of a group.
    Group {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        orders: Vec<i64>,
    },
    /// Davenport constant with a zero-sum-free witness.
    Davenport {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        orders: Vec<i64>,
        /// Force the exhaustive search.
        #[arg(long, conflicts_with = "formula")]
        exact: bool,
        /// Closed form only.
        #[arg(long)]
        formula: bool,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Davenport constants of every group up to an order.
    DavenportTable {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_order: u64,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Zero-sum subsequence of length at most k in a length-|G| sequence.
    SolveWord0 {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Zero-sum subsequence of an exact length.
    ZeroSum {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        length: u64,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Solve a weighted instance and write a certificate.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Largest sequence length handed to the exhaustive oracle.
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP, value_parser = positive_usize)]
        oracle_cap: usize,
        /// Report construction failures instead of trying the oracle.
        #[arg(long)]
        no_fallback: bool,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Check a certificate against an instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Search for counterexamples to the weighted repetition conjecture.
    ScanConjecture {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        orders: Vec<i64>,
        #[arg(long, value_parser = positive_usize)]
        k: usize,
        /// Weight set (default: 1..n-1).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        weights: Vec<i64>,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: ModeArg,
        /// Instances drawn in sampled mode.
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1, value_parser = positive_usize)]
        workers: usize,
        /// Most instances to check.
        #[arg(long = "scan-budget", default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        scan_budget: u64,
        /// Witnesses kept in the report.
        #[arg(long, default_value_t = 8)]
        witness_sample: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Run the built-in acceptance suites.
    Selftest {
        #[arg(long, value_enum, default_value = "small")]
        scale: ScaleArg,
        /// Also write the JSON summary here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// A plain sequence for the unweighted solvers.
#[derive(Deserialize, Serialize)]
struct SequenceFile {
    group: GroupLiteral,
    x: Vec<Vec<i64>>,
    /// Length bound for `solve-word0`; defaults to the maximal repetition.
    #[serde(default)]
    k: Option<usize>,
}

enum Failure {
    Core(Error),
    Verification,
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnsatisfiableStatement(_) => 3,
        Error::TheoremViolation(_) => 4,
        Error::OracleTooLarge { .. } => 5,
        Error::BudgetExceeded { .. } => 6,
        _ => 2,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn check_output(path: &Path) -> Result<(), Failure> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if parent.is_dir() {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "output directory {} does not exist",
            parent.display()
        )))
    }
}

/// Write via a temporary file in the same directory, then rename.
fn write_atomic(path: &Path, text: &str) -> Result<(), Error> {
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.write_all(b"\n").map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn load_sequence(path: &Path) -> Result<(AbelianGroup, Vec<zerosum_core::Element>, Option<usize>), Error> {
    let text = read(path)?;
    let file: SequenceFile = serde_json::from_str(&text).map_err(|source| Error::Parse {
        context: path.display().to_string(),
        source,
    })?;
    let g = AbelianGroup::try_from(file.group)?;
    let x = file
        .x
        .iter()
        .map(|r| g.from_given(r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((g, x, file.k))
}

fn load_instance(path: &Path) -> Result<Instance, Error> {
    Instance::from_json(&read(path)?).map_err(|e| match e {
        Error::Parse { source, .. } => Error::Parse {
            context: path.display().to_string(),
            source,
        },
        other => other,
    })
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    let start = Instant::now();
    match cli.command {
        Command::Group { orders } => {
            let g = AbelianGroup::canonicalize(&orders)?;
            print_json(&json!({
                "group": g,
                "order": g.order(),
                "exponent": g.exponent(),
                "rank": g.rank(),
                "cyclic": g.is_cyclic(),
            }));
        }
        Command::Davenport {
            orders,
            exact,
            formula,
            cache,
        } => {
            let g = AbelianGroup::canonicalize(&orders)?;
            if formula {
                let value = davenport_formula(&g)
                    .ok_or_else(|| Error::InvalidArgument(format!("no closed form known for {g}")))?;
                print_json(&json!({ "group": g.canonical(), "value": value, "method": "formula" }));
            } else {
                let record = if exact {
                    davenport_exact(&g, cache.budget)?
                } else {
                    cache.open()?.get(&g)?
                };
                print_json(&record);
            }
        }
        Command::DavenportTable { max_order, cache } => {
            let cache = cache.open()?;
            for g in all_groups_up_to(max_order as usize) {
                let record = cache.get(&g)?;
                let method = serde_json::to_value(record.method).expect("serializable");
                println!(
                    "{:>5}  {:<12} {:>4}  {}",
                    g.order(),
                    g.key(),
                    record.value,
                    method.as_str().unwrap_or("")
                );
            }
        }
        Command::SolveWord0 { instance } => {
            let (g, x, k) = load_sequence(&instance)?;
            let k = match k {
                Some(k) => k,
                None => rho(&x)?,
            };
            print_json(&find_zero_sum_bounded(&g, &x, k)?);
        }
        Command::ZeroSum { length, instance } => {
            let (g, x, _) = load_sequence(&instance)?;
            match find_zero_sum_exact_length(&g, &x, length as usize)? {
                Some(w) => print_json(&w),
                None => {
                    return Err(Error::UnsatisfiableStatement(format!(
                        "no zero-sum subsequence of length {length}"
                    ))
                    .into())
                }
            }
        }
        Command::Solve {
            instance,
            out,
            oracle_cap,
            no_fallback,
            cache,
        } => {
            check_output(&out)?;
            let inst = load_instance(&instance)?;
            let d = cache.open()?.get(&inst.group)?.value;
            let opts = SolveOptions {
                oracle_cap,
                fallback: !no_fallback,
            };
            let cert = solve(&inst, d, &opts)?;
            write_atomic(&out, &cert.to_json_pretty())?;
            println!("certificate: {}", out.display());
            println!("verified: {}", cert.verified);
            if !cert.verified {
                return Err(Failure::Verification);
            }
        }
        Command::Verify {
            instance,
            cert,
            cache,
        } => {
            let inst = load_instance(&instance)?;
            let text = read(&cert)?;
            let certificate = Certificate::from_json(&text).map_err(|e| match e {
                Error::Parse { source, .. } => Error::Parse {
                    context: cert.display().to_string(),
                    source,
                },
                other => other,
            })?;
            let d = cache.open()?.get(&inst.group)?.value;
            let verdict = verify_certificate(&inst, d, &certificate);
            for diag in &verdict.diagnostics {
                eprintln!("failed check {}: {}", diag.check, diag.detail);
            }
            println!("verified: {}", verdict.verified);
            if !verdict.verified {
                return Err(Failure::Verification);
            }
        }
        Command::ScanConjecture {
            orders,
            k,
            weights,
            mode,
            samples,
            seed,
            workers,
            scan_budget,
            witness_sample,
            out,
            cache,
        } => {
            check_output(&out)?;
            let g = AbelianGroup::canonicalize(&orders)?;
            let d = cache.open()?.get(&g)?.value;
            let cfg = ScanConfig {
                k,
                weights: if weights.is_empty() {
                    default_weights(&g)
                } else {
                    weights
                },
                mode: match mode {
                    ModeArg::Exhaustive => ScanMode::Exhaustive,
                    ModeArg::Sampled => ScanMode::Sampled,
                },
                samples,
                seed,
                workers,
                budget: scan_budget,
                witness_sample,
            };
            let report = conjecture_scan(&g, d, &cfg)?;
            write_atomic(&out, &report.to_json_pretty())?;
            println!("report: {}", out.display());
            println!(
                "scanned {} of {} instances: {} witnessed, {} counterexamples",
                report.instances_scanned,
                report.instances_total,
                report.witnesses_verified,
                report.counterexamples.len()
            );
            if cli.verbose {
                eprintln!("scan time: {:.2?}", report.wall_time);
            }
            if !report.is_sound() {
                return Err(Error::TheoremViolation(format!(
                    "{} subclass violations, {} integrity failures",
                    report.subclass_violations.len(),
                    report.integrity_failures.len()
                ))
                .into());
            }
            if let Some(e) = report.budget_error() {
                return Err(e.into());
            }
        }
        Command::Selftest { scale, out } => {
            if let Some(p) = &out {
                check_output(p)?;
            }
            let scale = match scale {
                ScaleArg::Small => Scale::Small,
                ScaleArg::Full => Scale::Full,
            };
            let mut criteria = Vec::new();
            for (id, _, _) in selftest::CRITERIA {
                let c = selftest::criterion(id, scale);
                eprintln!(
                    "criterion {} ({}): {} [{:.1?}] {}",
                    c.id,
                    c.name,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.elapsed,
                    c.detail
                );
                criteria.push(c);
            }
            let summary = selftest::Summary {
                scale,
                passed: criteria.iter().all(|c| c.passed),
                criteria,
            };
            let text = summary.to_json_pretty();
            if let Some(p) = &out {
                write_atomic(p, &text)?;
            }
            println!("{text}");
            if !summary.passed {
                return Err(Failure::Verification);
            }
        }
    }
    if cli.verbose {
        eprintln!("elapsed: {:.2?}", start.elapsed());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
