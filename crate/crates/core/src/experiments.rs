//! The `(p, c)` scan for single-cycle primes and the tables built from it.
//!
//! A hit is a pair with `p` in `S_{d,c}`: the orbit of 0 mod `p` returns to
//! 0 for the first time at step `p`. For odd `d` the hits are symmetric under
//! `c -> p - c`, so the default range is `1 <= c <= (p - 1) / 2`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::primes_up_to;
use crate::divisibility::in_s;
use crate::error::{Error, Result};
use crate::orbit::Map;
use crate::permutation::excluded_from_s;
use crate::poly::Poly;

pub const BIN_WIDTH: u64 = 6;
/// Half-width of the moving average, in units of `c`.
pub const WINDOW: u64 = 60;
/// Largest prime for the polynomial root count.
pub const POLY_PRIME_CAP: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CRange {
    /// `1 <= c <= (p - 1) / 2`.
    Half,
    /// `1 <= c <= p - 1`.
    Full,
}

impl CRange {
    fn upper(self, p: u64) -> u64 {
        match self {
            CRange::Half => (p - 1) / 2,
            CRange::Full => p - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanConfig {
    pub d: u32,
    pub x_bound: u64,
    pub range: CRange,
    /// Skip primes where no `c` can give a single cycle.
    pub filter: bool,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl ScanConfig {
    pub fn new(d: u32, x_bound: u64) -> ScanConfig {
        ScanConfig {
            d,
            x_bound,
            range: CRange::Half,
            filter: true,
            jobs: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidExponent(self.d));
        }
        if self.x_bound < 3 {
            return Err(Error::InvalidConfig(format!(
                "prime bound must be at least 3, got {}",
                self.x_bound
            )));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidConfig("jobs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ScanRecord {
    pub p: u64,
    pub c: u64,
}

/// Results at one scanned prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimeScan {
    pub p: u64,
    /// `c` values with `p` in `S_{d,c}`, ascending.
    pub hits: Vec<u64>,
    /// Some examined `c` puts `p` in `P_{d,c}`.
    pub in_p: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanOutput {
    pub config: ScanConfig,
    pub primes: Vec<PrimeScan>,
}

impl ScanOutput {
    pub fn records(&self) -> Vec<ScanRecord> {
        self.primes
            .iter()
            .flat_map(|s| s.hits.iter().map(move |&c| ScanRecord { p: s.p, c }))
            .collect()
    }
}

/// Odd primes up to the bound, minus those ruled out when filtering.
pub fn scan_primes(config: &ScanConfig) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for p in primes_up_to(config.x_bound).into_iter().skip(1) {
        if !config.filter || excluded_from_s(p, config.d as u64)?.is_none() {
            out.push(p);
        }
    }
    Ok(out)
}

fn scan_prime(d: u32, range: CRange, p: u64) -> PrimeScan {
    let mut hits = Vec::new();
    let mut in_p = false;
    for c in 1..=range.upper(p) {
        let step = Map::new(d, c as i64).expect("d >= 2").stepper(p);
        match step.zero_return(p) {
            Some(k) if k == p => {
                hits.push(c);
                in_p = true;
            }
            Some(1) => in_p = true,
            _ => {}
        }
    }
    PrimeScan { p, hits, in_p }
}

pub fn scan_s(config: &ScanConfig) -> Result<ScanOutput> {
    config.validate()?;
    let primes = scan_primes(config)?;
    let (d, range) = (config.d, config.range);
    let run = || -> Vec<PrimeScan> {
        primes
            .par_iter()
            .with_max_len(1)
            .map(|&p| scan_prime(d, range, p))
            .collect()
    };
    let scans = match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(run),
        None => run(),
    };
    Ok(ScanOutput {
        config: config.clone(),
        primes: scans,
    })
}

/// Records that fail an independent membership check.
pub fn reverify(d: u32, records: &[ScanRecord]) -> Result<Vec<ScanRecord>> {
    let failures: Result<Vec<Option<ScanRecord>>> = records
        .par_iter()
        .map(|&r| Ok((!in_s(Map::new(d, r.c as i64)?, r.p)?).then_some(r)))
        .collect();
    Ok(failures?.into_iter().flatten().collect())
}

/// Primes counted by the expectation model and the ratio tables: `11 mod 12`
/// for `d = 3`, otherwise every `p >= 5` not excluded for `d`.
pub fn model_primes(d: u32, x_bound: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for p in primes_up_to(x_bound).into_iter().filter(|&p| p >= 5) {
        let keep = if d == 3 {
            p % 12 == 11
        } else {
            excluded_from_s(p, d as u64)?.is_none()
        };
        if keep {
            out.push(p);
        }
    }
    Ok(out)
}

/// `E_X(c) = Σ 2 / (p - 1)` over model primes `p` in `[2|c|, X]`.
pub fn expectation(d: u32, x_bound: u64, c: i64) -> Result<f64> {
    let lo = 2 * c.unsigned_abs();
    Ok(model_primes(d, x_bound)?
        .into_iter()
        .filter(|&p| p >= lo)
        .map(|p| 2.0 / (p - 1) as f64)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinRow {
    pub bin_start: u64,
    pub count: u64,
    /// Mean bin height over `(bin_start - WINDOW, bin_start + WINDOW)`.
    pub window_avg: f64,
    /// Sum of `E_X(c)` over the bin.
    pub expectation: f64,
    /// Variance of the bin count when each `(p, c)` is an independent trial.
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedTable {
    pub d: u32,
    pub x_bound: u64,
    pub bin_width: u64,
    pub window: u64,
    pub rows: Vec<BinRow>,
}

/// Bins cover `0..=c_max`, where `c_max` is the largest `c` the scan can
/// produce, so the table shape depends only on the configuration.
pub fn binned_counts(records: &[ScanRecord], config: &ScanConfig) -> Result<BinnedTable> {
    config.validate()?;
    let c_max = config.range.upper(largest_prime(config.x_bound));
    let n_bins = (c_max / BIN_WIDTH + 1) as usize;

    let mut counts = vec![0u64; n_bins];
    for r in records {
        if let Some(slot) = counts.get_mut((r.c / BIN_WIDTH) as usize) {
            *slot += 1;
        }
    }

    // suffix sums of q and q(1 - q) over model primes, q = 2 / (p - 1)
    let model = model_primes(config.d, config.x_bound)?;
    let mut mean_tail = vec![0.0f64; model.len() + 1];
    let mut var_tail = vec![0.0f64; model.len() + 1];
    for (i, &p) in model.iter().enumerate().rev() {
        let q = 2.0 / (p - 1) as f64;
        mean_tail[i] = mean_tail[i + 1] + q;
        var_tail[i] = var_tail[i + 1] + q * (1.0 - q);
    }
    let tail_at = |c: u64| model.partition_point(|&p| p < 2 * c);

    let half = (WINDOW / BIN_WIDTH) as i64;
    let rows = (0..n_bins)
        .map(|k| {
            let (mut expectation, mut variance) = (0.0, 0.0);
            for c in (k as u64 * BIN_WIDTH..(k as u64 + 1) * BIN_WIDTH).filter(|&c| c >= 1) {
                let i = tail_at(c);
                expectation += mean_tail[i];
                variance += var_tail[i];
            }
            let window_sum: u64 = (k as i64 - half..k as i64 + half)
                .filter_map(|j| usize::try_from(j).ok().and_then(|j| counts.get(j)))
                .sum();
            BinRow {
                bin_start: k as u64 * BIN_WIDTH,
                count: counts[k],
                window_avg: window_sum as f64 / (2 * half) as f64,
                expectation,
                variance,
            }
        })
        .collect();
    Ok(BinnedTable {
        d: config.d,
        x_bound: config.x_bound,
        bin_width: BIN_WIDTH,
        window: WINDOW,
        rows,
    })
}

fn largest_prime(x: u64) -> u64 {
    primes_up_to(x).last().copied().unwrap_or(2)
}

/// Bins whose count lies more than three standard deviations from the model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftCheck {
    pub bins: usize,
    pub outside: Vec<BinRow>,
}

impl SoftCheck {
    pub fn passed(&self) -> bool {
        self.outside.is_empty()
    }
}

pub fn three_sigma_check(table: &BinnedTable) -> SoftCheck {
    let outside = table
        .rows
        .iter()
        .filter(|r| (r.count as f64 - r.expectation).abs() > 3.0 * r.variance.sqrt())
        .copied()
        .collect();
    SoftCheck {
        bins: table.rows.len(),
        outside,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRow {
    pub x: u64,
    pub t_count: u64,
    /// Model primes up to `x` with a hit.
    pub u_count_s: u64,
    /// Model primes up to `x` in `P_{d,c}` for an examined `c`.
    pub u_count_p: u64,
    pub ratio: f64,
    /// Share of model primes that are in `U` and `11 mod 12`.
    pub ratio_11mod12: Option<f64>,
}

/// Whether the model primes for `d` can include classes other than
/// `11 mod 12`. When `3 | d` and `d ≡ 3 mod 4` they cannot.
pub fn has_11mod12_column(d: u32) -> bool {
    !(d % 3 == 0 && d % 4 == 3)
}

/// Running `#U / #T`, one row per model prime.
pub fn ratio_series(scan: &ScanOutput) -> Result<Vec<RatioRow>> {
    let d = scan.config.d;
    let model = model_primes(d, scan.config.x_bound)?;
    let with_column = has_11mod12_column(d);
    let mut rows = Vec::with_capacity(model.len());
    let (mut t, mut u_s, mut u_p, mut u_11) = (0u64, 0u64, 0u64, 0u64);
    for p in model {
        let Ok(i) = scan.primes.binary_search_by_key(&p, |s| s.p) else {
            return Err(Error::InvalidConfig(format!("prime {p} was not scanned")));
        };
        let s = &scan.primes[i];
        t += 1;
        if !s.hits.is_empty() {
            u_s += 1;
            if p % 12 == 11 {
                u_11 += 1;
            }
        }
        if s.in_p {
            u_p += 1;
        }
        rows.push(RatioRow {
            x: p,
            t_count: t,
            u_count_s: u_s,
            u_count_p: u_p,
            ratio: u_p as f64 / t as f64,
            ratio_11mod12: with_column.then(|| u_11 as f64 / t as f64),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DynatomicCount {
    pub d: u32,
    pub p: u64,
    /// `c in [1, p-1]` with `p` in `S_{d,c}`, by direct iteration.
    pub scan_count: u64,
    /// Nonzero roots of `W_p(c)` in `F_p`; `None` above the size cap.
    pub poly_count: Option<u64>,
}

/// `W_p(c) mod (p, c^p - c)`, iterating `w -> w^d + c` symbolically.
pub fn psi_reduced(d: u32, p: u64) -> Poly {
    let c = Poly::monomial(p, 1, 1);
    let mut w = Poly::zero(p);
    for _ in 0..p {
        w = w.pow_frobenius(d as u64).add(&c);
    }
    w
}

pub fn dynatomic_root_count(d: u32, p: u64) -> Result<DynatomicCount> {
    if !crate::arith::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Map::new(d, 0)?;
    let scan_count = (1..p)
        .map(|c| in_s(Map::new(d, c as i64)?, p))
        .filter(|r| !matches!(r, Ok(false)))
        .collect::<Result<Vec<_>>>()?
        .len() as u64;
    let poly_count = (p <= POLY_PRIME_CAP).then(|| {
        let w = psi_reduced(d, p);
        // c = 0 is always a root; it is the one root of W_1 = c
        w.count_roots() - u64::from(w.eval(0) == 0)
    });
    Ok(DynatomicCount {
        d,
        p,
        scan_count,
        poly_count,
    })
}

fn write_lines(path: &Path, header: &str, lines: impl Iterator<Item = String>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{header}")?;
    for line in lines {
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `pvsc.csv`, `pvsc_scaled.csv`, `binned.csv` and `ratio.csv`.
pub fn write_csvs(
    dir: &Path,
    records: &[ScanRecord],
    binned: &BinnedTable,
    ratios: &[RatioRow],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let paths: Vec<PathBuf> = ["pvsc.csv", "pvsc_scaled.csv", "binned.csv", "ratio.csv"]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    write_lines(
        &paths[0],
        "p,c",
        records.iter().map(|r| format!("{},{}", r.p, r.c)),
    )?;
    write_lines(
        &paths[1],
        "p,c_over_p",
        records
            .iter()
            .map(|r| format!("{},{:.6}", r.p, r.c as f64 / r.p as f64)),
    )?;
    write_lines(
        &paths[2],
        "bin_start,count,window_avg,expectation",
        binned.rows.iter().map(|r| {
            format!(
                "{},{},{:.6},{:.6}",
                r.bin_start, r.count, r.window_avg, r.expectation
            )
        }),
    )?;
    let column = has_11mod12_column(binned.d);
    write_lines(
        &paths[3],
        if column {
            "X,ratio,ratio_11mod12"
        } else {
            "X,ratio"
        },
        ratios.iter().map(|r| match r.ratio_11mod12 {
            Some(q) if column => format!("{},{:.6},{:.6}", r.x, r.ratio, q),
            _ => format!("{},{:.6}", r.x, r.ratio),
        }),
    )?;
    Ok(paths)
}
