//! Membership in `D_{d,c}`, `P_{d,c}` and `S_{d,c}`, plus the structural
//! facts about them: rigid divisibility, the finiteness classification and
//! primitive prime divisors.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_prime, primes_up_to};
use crate::error::{Error, Result};
use crate::factor::{factorize, FactorBudget, FactorList};
use crate::orbit::{orbit_exact, probe_valuation, w_mod, Map, Valuation};

/// Cap used when probing valuations of orbit terms by repeated modular tests.
pub const VALUATION_PROBE_CAP: u32 = 64;

/// How 0 behaves under the map modulo a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Witness {
    /// 0 is periodic with this period.
    ZeroPeriod(u64),
    /// 0 never returns to itself.
    ZeroPreperiodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MembershipVerdict {
    pub n: u64,
    pub member: bool,
    /// Only filled in for prime `n`.
    pub witness: Option<Witness>,
}

fn zero_witness(map: Map, p: u64) -> Witness {
    match map.stepper(p).zero_return(p) {
        Some(k) => Witness::ZeroPeriod(k),
        None => Witness::ZeroPreperiodic,
    }
}

/// `n in D_{d,c}`, i.e. `n | W_n`.
pub fn in_d(map: Map, n: u64) -> Result<MembershipVerdict> {
    if n == 0 {
        return Err(Error::InvalidIndex { min: 1, got: 0 });
    }
    let member = w_mod(map, n, n)? == 0;
    let witness = is_prime(n).then(|| zero_witness(map, n));
    Ok(MembershipVerdict { n, member, witness })
}

/// `p in P_{d,c}`: the period of 0 modulo `p` is 1 or `p`.
pub fn in_p(map: Map, p: u64) -> Result<MembershipVerdict> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let witness = zero_witness(map, p);
    let member = matches!(witness, Witness::ZeroPeriod(k) if k == 1 || k == p);
    Ok(MembershipVerdict {
        n: p,
        member,
        witness: Some(witness),
    })
}

/// `p in S_{d,c}`: the map acts on `Z/pZ` as a single `p`-cycle.
pub fn in_s(map: Map, p: u64) -> Result<bool> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(map.stepper(p).zero_return(p) == Some(p))
}

/// `D_{d,c} ∩ [1, bound]`, each index tested independently.
pub fn enumerate_d(map: Map, bound: u64) -> Vec<u64> {
    (1..=bound)
        .into_par_iter()
        .filter(|&n| w_mod(map, n, n).is_ok_and(|r| r == 0))
        .collect()
}

pub fn enumerate_p(map: Map, bound: u64) -> Vec<u64> {
    primes_up_to(bound)
        .into_par_iter()
        .filter(|&p| in_p(map, p).is_ok_and(|v| v.member))
        .collect()
}

pub fn enumerate_s(map: Map, bound: u64) -> Vec<u64> {
    primes_up_to(bound)
        .into_par_iter()
        .filter(|&p| in_s(map, p).unwrap_or(false))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RigidityViolation {
    /// `v_p(W_n) > 0` but `v_p(W_{nk}) != v_p(W_n)`.
    Multiple {
        p: u64,
        n: u64,
        k: u64,
        v_n: u32,
        v_nk: u32,
    },
    /// `v_p(W_n), v_p(W_m) > 0` but the valuations at `n`, `m`, `gcd(n, m)` differ.
    Gcd {
        p: u64,
        n: u64,
        m: u64,
        v_n: u32,
        v_m: u32,
        v_gcd: Valuation,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RigidityReport {
    pub violations: Vec<RigidityViolation>,
    /// Individual comparisons carried out.
    pub checked: u64,
    /// Terms skipped because they are exactly zero or the probe saturated.
    pub skipped: u64,
}

impl RigidityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks both rigid divisibility properties for every prime `p <= prime_bound`
/// and indices up to `index_bound`, probing valuations modularly.
pub fn check_rigid_divisibility(
    map: Map,
    prime_bound: u64,
    index_bound: u64,
) -> Result<RigidityReport> {
    let primes = primes_up_to(prime_bound);
    let per_prime: Vec<Result<RigidityReport>> = primes
        .par_iter()
        .map(|&p| rigidity_for_prime(map, p, index_bound))
        .collect();
    let mut report = RigidityReport::default();
    for r in per_prime {
        let r = r?;
        report.violations.extend(r.violations);
        report.checked += r.checked;
        report.skipped += r.skipped;
    }
    Ok(report)
}

fn rigidity_for_prime(map: Map, p: u64, index_bound: u64) -> Result<RigidityReport> {
    let mut report = RigidityReport::default();
    // vals[n] is Some(v) for usable finite valuations
    let mut vals: Vec<Option<u32>> = vec![None; index_bound as usize + 1];
    for n in 1..=index_bound {
        let (v, saturated) = probe_valuation(map, n, p, VALUATION_PROBE_CAP)?;
        match (v, saturated) {
            (Valuation::Finite(e), false) => vals[n as usize] = Some(e),
            _ => report.skipped += 1,
        }
    }
    let positive = |n: u64| vals[n as usize].filter(|&e| e > 0);
    for n in 1..=index_bound {
        let Some(v_n) = positive(n) else { continue };
        for k in 2..=index_bound / n {
            let Some(v_nk) = vals[(n * k) as usize] else {
                continue;
            };
            report.checked += 1;
            if v_nk != v_n {
                report
                    .violations
                    .push(RigidityViolation::Multiple { p, n, k, v_n, v_nk });
            }
        }
        for m in n + 1..=index_bound {
            let Some(v_m) = positive(m) else { continue };
            let g = n.gcd(&m);
            report.checked += 1;
            let v_g = vals[g as usize];
            if v_n != v_m || v_g != Some(v_n) {
                report.violations.push(RigidityViolation::Gcd {
                    p,
                    n,
                    m,
                    v_n,
                    v_m,
                    v_gcd: v_g.map_or(Valuation::Infinite, Valuation::Finite),
                });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PrimitivePrime {
    /// `prime` is the largest primitive prime divisor among the factors
    /// found; `all` lists every one of them in ascending order.
    Found {
        prime: BigUint,
        all: Vec<BigUint>,
        factors: FactorList,
    },
    /// `W_n` is fully factored and has no primitive prime divisor (this
    /// includes `W_n` exactly zero or a unit).
    NoneExists { factors: Option<FactorList> },
    /// No primitive prime among the factors found before the budget ran out.
    Unknown { factors: FactorList },
}

/// A primitive prime divisor of `W_n`: one dividing `W_n` but no `W_i` for
/// `0 < i < n`.
pub fn primitive_prime(
    map: Map,
    n: u64,
    digit_cap: u64,
    budget: FactorBudget,
) -> Result<PrimitivePrime> {
    if n == 0 {
        return Err(Error::InvalidIndex { min: 1, got: 0 });
    }
    let orbit = orbit_exact(map, n, digit_cap)?;
    let w_n = &orbit.terms[n as usize];
    if w_n.is_zero() {
        return Ok(PrimitivePrime::NoneExists { factors: None });
    }
    let factors = factorize(w_n, budget)?;
    let earlier = &orbit.terms[1..n as usize];
    let all: Vec<BigUint> = factors
        .primes()
        .filter(|q| {
            let q = BigInt::from((*q).clone());
            earlier.iter().all(|w| !(w % &q).is_zero())
        })
        .cloned()
        .collect();
    Ok(match all.last() {
        Some(p) => PrimitivePrime::Found {
            prime: p.clone(),
            all,
            factors,
        },
        None if factors.is_complete() => PrimitivePrime::NoneExists {
            factors: Some(factors),
        },
        None => PrimitivePrime::Unknown { factors },
    })
}

/// Shape of `D_{d,c}` as decided by the finiteness classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DKind {
    /// `D = {1, 2}`: even `d` with `c = 1`, or `(d, c) = (2, -2)`.
    FiniteD,
    /// `c = 0`: every positive integer.
    AllIntegers,
    /// Even `d`, `c = -1`: the even positive integers.
    EvenIntegers,
    InfiniteGeneric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum PrimeSet {
    AllPrimes,
    Finite(Vec<u64>),
}

impl PrimeSet {
    pub fn contains(&self, p: u64) -> bool {
        match self {
            PrimeSet::AllPrimes => is_prime(p),
            PrimeSet::Finite(v) => v.binary_search(&p).is_ok(),
        }
    }
}

/// Exact `P` and `S` for even `d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvenDegreeSets {
    pub p_set: PrimeSet,
    pub s_set: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub kind: DKind,
    pub even: Option<EvenDegreeSets>,
}

pub fn classify(map: Map) -> Classification {
    let (d, c) = (map.d(), map.c());
    let even_d = d % 2 == 0;
    let kind = if c == 0 {
        DKind::AllIntegers
    } else if even_d && c == -1 {
        DKind::EvenIntegers
    } else if (even_d && c == 1) || (d == 2 && c == -2) {
        DKind::FiniteD
    } else {
        DKind::InfiniteGeneric
    };
    let even = even_d.then(|| {
        let p_set = if c == 0 {
            PrimeSet::AllPrimes
        } else {
            let mut ps: Vec<u64> = crate::arith::factor_u64(c.unsigned_abs())
                .into_iter()
                .map(|(p, _)| p)
                .collect();
            ps.push(2);
            ps.sort_unstable();
            ps.dedup();
            PrimeSet::Finite(ps)
        };
        let s_set = if c % 2 != 0 { vec![2] } else { Vec::new() };
        EvenDegreeSets { p_set, s_set }
    });
    Classification { kind, even }
}
