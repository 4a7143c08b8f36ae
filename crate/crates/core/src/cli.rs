//! Command-line front end. Machine-readable output goes to stdout or files,
//! human summaries to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::json;

use crate::arith::primes_up_to;
use crate::divisibility::{
    classify, enumerate_d, enumerate_p, enumerate_s, primitive_prime, PrimitivePrime,
};
use crate::error::{Error, Result};
use crate::experiments::{
    binned_counts, ratio_series, reverify, scan_s, three_sigma_check, write_csvs, CRange,
    ScanConfig,
};
use crate::factor::FactorBudget;
use crate::graph::{build_graph, export_graph, ExportFormat};
use crate::hensel::hensel_lift;
use crate::orbit::{orbit_exact, orbit_mod, w_mod, Map, DEFAULT_DIGIT_CAP};
use crate::permutation::{cycle_structure, excluded_from_s, parity};

pub const JOBS_ENV: &str = "DYNDIV_JOBS";

#[derive(Debug, Parser)]
#[command(
    name = "dyndiv",
    version,
    about = "Index divisibility and cyclic orbits for x^d + c"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Largest exact orbit term, in decimal digits.
    #[arg(long, global = true, default_value_t = DEFAULT_DIGIT_CAP)]
    pub digit_cap: u64,
    /// Wall-clock budget for one factorization, in seconds.
    #[arg(long, global = true, default_value_t = 5.0, value_name = "SECONDS")]
    pub factor_budget: f64,
    /// Worker threads (DYNDIV_JOBS takes precedence).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output file (graph) or directory (scan).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the randomized factorization steps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orbit of 0, exactly or modulo m.
    Orbit {
        #[arg(short)]
        d: u32,
        #[arg(short, allow_negative_numbers = true)]
        c: i64,
        /// Last index of the exact orbit.
        #[arg(short, default_value_t = 10)]
        k: u64,
        #[arg(long = "mod", value_name = "M")]
        modulus: Option<u64>,
        /// Add the largest primitive prime divisor of each term.
        #[arg(long)]
        primitive: bool,
    },
    /// Index divisibility graph up to a bound.
    Graph {
        #[arg(short)]
        d: u32,
        #[arg(short, allow_negative_numbers = true)]
        c: i64,
        #[arg(short = 'B')]
        bound: u64,
        #[arg(long, default_value = "dot")]
        format: String,
    },
    /// D, P and S up to a bound, with the classification.
    Sets {
        #[arg(short)]
        d: u32,
        #[arg(short, allow_negative_numbers = true)]
        c: i64,
        #[arg(short = 'B')]
        bound: u64,
    },
    /// Scan for (p, c) with 0 on a single p-cycle and write the CSV tables.
    Scan {
        #[arg(short, default_value_t = 3)]
        d: u32,
        #[arg(short = 'X', default_value_t = 2000)]
        x_bound: u64,
        /// Use 1 <= c <= p - 1 instead of 1 <= c <= (p - 1) / 2.
        #[arg(long)]
        full_range: bool,
        /// Scan primes that are ruled out by the permutation criteria too.
        #[arg(long)]
        no_filter: bool,
    },
    /// Roots of W_d(c) modulo d^n, one per class mod d.
    Lift {
        #[arg(short)]
        d: u32,
        #[arg(short)]
        n: u32,
    },
    /// Cycle structure and parity of x -> x^d modulo p.
    #[command(group(ArgGroup::new("target").required(true).args(["p", "sweep"])))]
    Parity {
        #[arg(short)]
        d: u64,
        #[arg(short)]
        p: Option<u64>,
        /// Every odd prime up to this bound, as CSV.
        #[arg(long, value_name = "P")]
        sweep: Option<u64>,
    },
}

/// Exit status for an error: 2 for resource limits, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DigitCapExceeded { .. }
        | Error::CapExceeded { .. }
        | Error::ModulusOverflow { .. }
        | Error::Io(_) => 2,
        _ => 1,
    }
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn jobs(global: &GlobalOpts) -> Result<Option<usize>> {
    let n = match std::env::var(JOBS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("{JOBS_ENV}={v} is not a count")))?,
        ),
        Err(_) => global.jobs,
    };
    if n == Some(0) {
        return Err(Error::InvalidConfig("jobs must be positive".into()));
    }
    Ok(n)
}

fn budget(global: &GlobalOpts) -> Result<FactorBudget> {
    if !(global.factor_budget.is_finite() && global.factor_budget >= 0.0) {
        return Err(Error::InvalidConfig(
            "factor budget must be a nonnegative number".into(),
        ));
    }
    Ok(FactorBudget {
        time: Duration::from_secs_f64(global.factor_budget),
        seed: global.seed,
        ..FactorBudget::default()
    })
}

fn io(r: std::io::Result<()>) -> Result<()> {
    r.map_err(Error::from)
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let global = &cli.global;
    let budget = budget(global)?;
    if let Some(n) = jobs(global)? {
        // only the first configuration in a process takes effect
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Orbit {
            d,
            c,
            k,
            modulus,
            primitive,
        } => {
            let map = Map::new(d, c)?;
            if let Some(m) = modulus {
                let orbit = orbit_mod(map, m)?;
                io(writeln!(out, "tail={} period={}", orbit.tail, orbit.period))?;
                io(writeln!(out, "n,residue"))?;
                for (n, r) in orbit.residues.iter().enumerate() {
                    io(writeln!(out, "{n},{r}"))?;
                }
                return Ok(());
            }
            let orbit = orbit_exact(map, k, global.digit_cap)?;
            io(writeln!(
                out,
                "{}",
                if primitive {
                    "n,W_n,primitive"
                } else {
                    "n,W_n"
                }
            ))?;
            for (n, w) in orbit.terms.iter().enumerate() {
                if !primitive {
                    io(writeln!(out, "{n},{w}"))?;
                    continue;
                }
                let label = if n == 0 {
                    "none".to_string()
                } else {
                    match primitive_prime(map, n as u64, global.digit_cap, budget)? {
                        PrimitivePrime::Found { prime, .. } => prime.to_string(),
                        PrimitivePrime::NoneExists { .. } => "none".to_string(),
                        PrimitivePrime::Unknown { .. } => "unknown".to_string(),
                    }
                };
                io(writeln!(out, "{n},{w},{label}"))?;
            }
        }
        Command::Graph {
            d,
            c,
            bound,
            ref format,
        } => {
            let format: ExportFormat = format.parse()?;
            let g = build_graph(Map::new(d, c)?, bound)?;
            let text = export_graph(&g, format);
            match &global.out {
                Some(path) => fs::write(path, text)?,
                None => io(out.write_all(text.as_bytes()))?,
            }
            io(writeln!(
                err,
                "vertices={} edges={}",
                g.vertices.len(),
                g.edges.len()
            ))?;
        }
        Command::Sets { d, c, bound } => {
            if bound < 2 {
                return Err(Error::InvalidConfig("bound must be at least 2".into()));
            }
            let map = Map::new(d, c)?;
            let doc = json!({
                "d": d,
                "c": c,
                "bound": bound,
                "D": enumerate_d(map, bound),
                "P": enumerate_p(map, bound),
                "S": enumerate_s(map, bound),
                "classification": classify(map),
            });
            io(writeln!(out, "{doc}"))?;
        }
        Command::Scan {
            d,
            x_bound,
            full_range,
            no_filter,
        } => {
            let config = ScanConfig {
                range: if full_range {
                    CRange::Full
                } else {
                    CRange::Half
                },
                filter: !no_filter,
                ..ScanConfig::new(d, x_bound)
            };
            let scan = scan_s(&config)?;
            let records = scan.records();
            let failed = reverify(d, &records)?;
            if !failed.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "{} scan hits failed re-verification",
                    failed.len()
                )));
            }
            let binned = binned_counts(&records, &config)?;
            let ratios = ratio_series(&scan)?;
            let dir = global.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let paths = write_csvs(&dir, &records, &binned, &ratios)?;
            let check = three_sigma_check(&binned);
            io(writeln!(
                err,
                "primes={} hits={} (all re-verified)",
                scan.primes.len(),
                records.len()
            ))?;
            match ratios.last() {
                Some(r) => io(writeln!(
                    err,
                    "ratio at X={}: {:.6} ({}/{})",
                    r.x, r.ratio, r.u_count_p, r.t_count
                ))?,
                None => io(writeln!(err, "ratio: no model primes up to {x_bound}"))?,
            }
            if !check.passed() {
                io(writeln!(
                    err,
                    "warning: {} of {} bins lie outside 3 sigma of the expectation",
                    check.outside.len(),
                    check.bins
                ))?;
            }
            for p in paths {
                io(writeln!(err, "wrote {}", p.display()))?;
            }
        }
        Command::Lift { d, n } => {
            let r = hensel_lift(d, n)?;
            io(writeln!(out, "i,lift,verified"))?;
            for (i, &a) in r.lifts.iter().enumerate() {
                let ok = w_mod(Map::new(d, a as i64)?, d as u64, r.modulus)? == 0;
                io(writeln!(out, "{i},{a},{ok}"))?;
            }
            io(writeln!(err, "modulus={}^{}={}", d, n, r.modulus))?;
        }
        Command::Parity { d, p, sweep } => {
            if let Some(p) = p {
                let reason = excluded_from_s(p, d)?;
                let excluded = reason.map_or("false".to_string(), |r| format!("true reason={r}"));
                match parity(p, d) {
                    Ok(rep) => io(writeln!(
                        out,
                        "d={d} p={p} cycles={} transpositions={} parity={} excluded={excluded}",
                        cycle_structure(p, d)?,
                        rep.transpositions,
                        rep.parity
                    ))?,
                    Err(Error::NotPermutation { gcd, .. }) => io(writeln!(
                        out,
                        "d={d} p={p} permutation=false gcd={gcd} excluded={excluded}"
                    ))?,
                    Err(e) => return Err(e),
                }
            }
            if let Some(bound) = sweep {
                io(writeln!(out, "p,parity,excluded"))?;
                for q in primes_up_to(bound).into_iter().skip(1) {
                    let par = match parity(q, d) {
                        Ok(rep) => rep.parity.to_string(),
                        Err(Error::NotPermutation { .. }) => "none".to_string(),
                        Err(e) => return Err(e),
                    };
                    let excluded = excluded_from_s(q, d)?.is_some();
                    io(writeln!(out, "{q},{par},{excluded}"))?;
                }
            }
        }
    }
    Ok(())
}
