//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! process exits nonzero if any check fails.
//!
//! Set `DYNDIV_FULL_SCALE=1` to also run the full-size cube scan
//! (`X = 37619`), which takes hours on one core.

use std::collections::BTreeSet;
use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dyndiv::arith::{is_prime, pow_mod, primes_up_to, smallest_prime_factor};
use dyndiv::divisibility::{check_rigid_divisibility, enumerate_d, enumerate_p, in_d, in_p, in_s};
use dyndiv::experiments::dynatomic_root_count;
use dyndiv::graph::{build_graph, EdgeLabel};
use dyndiv::hensel::{h_symmetries, hensel_lift};
use dyndiv::orbit::{orbit_exact, DEFAULT_DIGIT_CAP};
use dyndiv::permutation::{
    brute_force_permutation, cycle_structure, ord, parity, two_power_order, Parity,
    DEFAULT_ORACLE_CAP,
};
use dyndiv::Map;

const SEED: u64 = 20_240_607;

type Outcome = Result<String, String>;

fn map(d: u32, c: i64) -> Map {
    Map::new(d, c).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t <= limit, || format!("took {t:?}, limit {limit:?}"))
}

fn big(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

fn orbit_reproduction() -> Outcome {
    let start = Instant::now();
    let a = orbit_exact(map(2, 3), 5, DEFAULT_DIGIT_CAP).map_err(|e| e.to_string())?;
    let b = orbit_exact(map(3, 4), 3, DEFAULT_DIGIT_CAP).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    ensure(a.terms == big(&[0, 3, 12, 147, 21612, 467078547]), || {
        format!("{:?}", a.terms)
    })?;
    ensure(b.terms == big(&[0, 4, 68, 314436]), || {
        format!("{:?}", b.terms)
    })?;
    ensure(t < Duration::from_millis(1), || format!("took {t:?}"))?;
    Ok(format!("{t:?}"))
}

fn set_reproduction() -> Outcome {
    let start = Instant::now();
    let d = enumerate_d(map(2, 3), 50);
    let p = enumerate_p(map(2, 3), 100);
    within(start, Duration::from_secs(1))?;
    ensure(d == [1, 2, 3, 4, 6, 12, 21, 42], || format!("D = {d:?}"))?;
    ensure(p == [2, 3], || format!("P = {p:?}"))?;
    Ok(format!("{:?}", start.elapsed()))
}

fn graph_matches_enumeration() -> Outcome {
    let start = Instant::now();
    let mut maps = 0;
    for d in 2..=5 {
        for c in -10..=10 {
            let m = map(d, c);
            let g = build_graph(m, 5000).map_err(|e| e.to_string())?;
            let found = enumerate_d(m, 5000);
            ensure(g.vertices.iter().copied().eq(found.iter().copied()), || {
                format!(
                    "{m}: graph has {} vertices, D has {}",
                    g.vertices.len(),
                    found.len()
                )
            })?;
            maps += 1;
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("{maps} maps, B = 5000, {:?}", start.elapsed()))
}

fn figure_two_edges() -> Outcome {
    let g = build_graph(map(3, 4), 44).map_err(|e| e.to_string())?;
    let shown: BTreeSet<u64> = [1, 2, 3, 4, 6, 11, 12, 20, 22, 33, 34, 44].into();
    ensure(shown.is_subset(&g.vertices), || {
        format!("vertices {:?}", g.vertices)
    })?;
    let expected = [
        ((1, 11), EdgeLabel::new(false, true)),
        ((2, 6), EdgeLabel::new(true, true)),
        ((4, 44), EdgeLabel::new(false, true)),
        ((2, 34), EdgeLabel::new(true, false)),
        ((22, 44), EdgeLabel::new(true, false)),
    ];
    let wrong: Vec<String> = expected
        .iter()
        .filter(|(e, l)| g.edge(e.0, e.1) != *l)
        .map(|(e, l)| {
            let show = |l: Option<EdgeLabel>| l.map_or("none".to_string(), |l| format!("{{{l}}}"));
            format!(
                "({},{}) expected {} got {}",
                e.0,
                e.1,
                show(*l),
                show(g.edge(e.0, e.1))
            )
        })
        .collect();
    ensure(wrong.is_empty(), || wrong.join("; "))?;
    Ok("all five labels match".into())
}

fn even_classification() -> Outcome {
    let start = Instant::now();
    let primes = primes_up_to(200);
    let mut checked = 0;
    for d in [2, 4, 6] {
        for c in (-20..=20).filter(|&c| c != 0) {
            for &p in &primes {
                let member = in_p(map(d, c), p).map_err(|e| e.to_string())?.member;
                let predicted = p == 2 || c % p as i64 == 0;
                ensure(member == predicted, || {
                    format!("d={d} c={c} p={p}: member={member}")
                })?;
                checked += 1;
            }
        }
    }
    for (d, c) in [(2, 1), (2, -2), (4, 1), (6, 1)] {
        let found = enumerate_d(map(d, c), 10_000);
        ensure(found == [1, 2], || format!("D_({d},{c}) = {found:?}"))?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{checked} (d, c, p) cases, {:?}", start.elapsed()))
}

fn permutation_suite() -> Outcome {
    let start = Instant::now();
    let mut compared = 0;
    for p in primes_up_to(499) {
        for d in (1..50u64).step_by(2) {
            if d.gcd(&(p - 1)) != 1 {
                continue;
            }
            let cs = cycle_structure(p, d).map_err(|e| e.to_string())?;
            let par = parity(p, d).map_err(|e| e.to_string())?.parity;
            let (brute, brute_par) =
                brute_force_permutation(p, d, DEFAULT_ORACLE_CAP).map_err(|e| e.to_string())?;
            ensure(cs == brute && par == brute_par, || format!("p={p} d={d}"))?;
            compared += 1;
        }
    }
    let mut odd_cases = 0;
    for p in primes_up_to(1999).into_iter().filter(|p| p % 4 == 1) {
        for d in (3..100u64).step_by(4) {
            if d.gcd(&(p - 1)) != 1 {
                continue;
            }
            let par = parity(p, d).map_err(|e| e.to_string())?.parity;
            ensure(par == Parity::Odd, || format!("p={p} d={d} is even"))?;
            odd_cases += 1;
        }
    }
    for d in (1..200i64).step_by(2) {
        for k in 0..=12u32 {
            let m = 1u64 << k;
            let direct = ord(m, d as u64 % m).map_err(|e| e.to_string())?;
            let table = two_power_order(d, k).map_err(|e| e.to_string())?;
            ensure(direct == table, || {
                format!("d={d} k={k}: {direct} vs {table}")
            })?;
        }
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!(
        "{compared} structures, {odd_cases} odd-parity cases, {:?}",
        start.elapsed()
    ))
}

fn hensel_suite() -> Outcome {
    let start = Instant::now();
    for d in [2u32, 3, 5] {
        for n in 1..=6u32 {
            let r = hensel_lift(d, n).map_err(|e| e.to_string())?;
            let m = r.modulus;
            let mut roots: Vec<u64> = (0..m)
                .filter(|&c| {
                    let mut w = 0u64;
                    for _ in 0..d {
                        w = (pow_mod(w, d as u64, m) + c) % m;
                    }
                    w == 0
                })
                .collect();
            roots.sort_by_key(|&a| a % d as u64);
            ensure(r.lifts == roots, || {
                format!("d={d} n={n}: {:?} vs {roots:?}", r.lifts)
            })?;
        }
    }
    let mut members = 0;
    for n in 1..=4u32 {
        let r = hensel_lift(3, n).map_err(|e| e.to_string())?;
        let m = r.modulus as i64;
        for c in -100i64..=100 {
            if r.lifts.contains(&(c.rem_euclid(m) as u64)) {
                let ok = in_d(map(3, c), m as u64).map_err(|e| e.to_string())?.member;
                ensure(ok, || format!("3^{n} not in D for c={c}"))?;
                members += 1;
            }
        }
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!(
        "{members} lifted c values checked, {:?}",
        start.elapsed()
    ))
}

fn desk_scan() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_dyndiv"))
        .args(["scan", "-d", "3", "-X", "2000", "--out"])
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let stderr = String::from_utf8_lossy(&output.stderr).to_string();
    ensure(output.status.success(), || {
        format!("exit {:?}: {stderr}", output.status)
    })?;
    within(start, Duration::from_secs(120))?;

    let pvsc = fs::read_to_string(dir.path().join("pvsc.csv")).map_err(|e| e.to_string())?;
    let hits: Vec<(u64, u64)> = pvsc
        .lines()
        .skip(1)
        .map(|l| {
            let (p, c) = l.split_once(',').expect("two columns");
            (p.parse().unwrap(), c.parse().unwrap())
        })
        .collect();
    ensure(hits.contains(&(11, 4)), || "(11,4) missing".into())?;
    let bad: Vec<_> = hits
        .iter()
        .filter(|(p, _)| p % 4 == 1 || p % 3 == 1)
        .collect();
    ensure(bad.is_empty(), || {
        format!("hits at excluded primes: {bad:?}")
    })?;
    for &(p, c) in &hits {
        let ok = is_prime(p) && in_s(map(3, c as i64), p).map_err(|e| e.to_string())?;
        ensure(ok, || format!("({p},{c}) fails re-verification"))?;
    }

    let ratio_csv = fs::read_to_string(dir.path().join("ratio.csv")).map_err(|e| e.to_string())?;
    let last = ratio_csv.lines().last().unwrap_or_default();
    let ratio: f64 = last
        .split(',')
        .nth(1)
        .and_then(|r| r.parse().ok())
        .ok_or_else(|| format!("bad ratio row `{last}`"))?;
    ensure(ratio > 0.0 && ratio <= 1.0, || format!("ratio {ratio}"))?;

    let sigma = if stderr.contains("outside 3 sigma") {
        "3-sigma check raised a warning"
    } else {
        "3-sigma check clean"
    };
    let mut note = format!(
        "{} hits, ratio at X=2000 {ratio}, {sigma}, {elapsed:?}",
        hits.len()
    );
    if std::env::var("DYNDIV_FULL_SCALE").as_deref() == Ok("1") {
        note.push_str(&full_scale()?);
    }
    Ok(note)
}

fn full_scale() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let output = Command::new(env!("CARGO_BIN_EXE_dyndiv"))
        .args(["scan", "-d", "3", "-X", "37619", "--out"])
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(output.status.success(), || {
        String::from_utf8_lossy(&output.stderr).to_string()
    })?;
    let ratio_csv = fs::read_to_string(dir.path().join("ratio.csv")).map_err(|e| e.to_string())?;
    Ok(format!(
        "; full scale: {}",
        ratio_csv.lines().last().unwrap_or_default()
    ))
}

fn dynatomic_cross_check() -> Outcome {
    let start = Instant::now();
    let mut counts = Vec::new();
    for p in [5u64, 7, 11, 13, 17] {
        let n = dynatomic_root_count(3, p).map_err(|e| e.to_string())?;
        ensure(n.poly_count == Some(n.scan_count), || {
            format!(
                "p={p}: scan {} vs polynomial {:?}",
                n.scan_count, n.poly_count
            )
        })?;
        if p == 5 || p == 13 {
            ensure(n.scan_count == 0, || {
                format!("p={p} has {} roots", n.scan_count)
            })?;
        }
        counts.push(format!("{p}:{}", n.scan_count));
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!(
        "counts {}, {:?}",
        counts.join(" "),
        start.elapsed()
    ))
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    const CASES: usize = 1000;

    for _ in 0..CASES {
        let m = map(rng.gen_range(2..7), rng.gen_range(-50..=50));
        let report = check_rigid_divisibility(m, 11, 20).map_err(|e| e.to_string())?;
        ensure(report.is_clean(), || {
            format!("{m}: {:?}", report.violations)
        })?;
    }

    for _ in 0..CASES {
        let m = map(rng.gen_range(2..7), rng.gen_range(-200..=200));
        let found = enumerate_d(m, 200);
        for &n in found.iter().filter(|&&n| n > 1) {
            let q = smallest_prime_factor(n);
            let ok = in_p(m, q).map_err(|e| e.to_string())?.member;
            ensure(ok, || format!("{m}: n={n}, smallest prime {q} not in P"))?;
        }
        for (i, &a) in found.iter().enumerate() {
            for &b in &found[i + 1..] {
                if a * b <= 200 && a.gcd(&b) == 1 {
                    ensure(found.binary_search(&(a * b)).is_ok(), || {
                        format!("{m}: {a}, {b} in D but not {}", a * b)
                    })?;
                }
            }
        }
    }

    for _ in 0..CASES {
        let n = rng.gen_range(1..300u64);
        let m = map(rng.gen_range(2..10), rng.gen_range(-100_000..=100_000));
        let r = h_symmetries(n, m).map_err(|e| e.to_string())?;
        ensure(r.all_hold(), || format!("{m}, n={n}: {r:?}"))?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "3 x {CASES} random cases, seed {SEED}, {:?}",
        start.elapsed()
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("orbit reproduction", orbit_reproduction),
        ("set reproduction", set_reproduction),
        ("graph vertices equal D", graph_matches_enumeration),
        ("figure 2 edge labels", figure_two_edges),
        (
            "even-degree classification and finiteness",
            even_classification,
        ),
        ("permutation suite", permutation_suite),
        ("hensel lifts", hensel_suite),
        ("desk-scale scan", desk_scan),
        ("dynatomic cross-check", dynatomic_cross_check),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(note) => println!("PASS {:>2} {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} acceptance checks passed",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
