//! Cycle structure and parity of the power map `x -> x^d` on `Z/pZ`.
//!
//! The permutation fixes 0, and on the cyclic group of units each divisor
//! `k` of `p - 1` contributes `φ(k) / ord_k(d)` cycles of length `ord_k(d)`.
//! Since `x^d + c` is `x^d` followed by a translation, and every `p`-cycle is
//! even for odd `p`, an odd power map rules out a single `p`-cycle.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::arith::{divisors, factor_u64, is_prime, pow_mod, totient, valuation_u64};
use crate::error::{Error, Result};
use crate::orbit::Valuation;

/// Default size limit for the explicit-permutation oracle.
pub const DEFAULT_ORACLE_CAP: u64 = 10_000;

/// Multiplicative order of `a` modulo `m`.
pub fn ord(m: u64, a: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidModulus);
    }
    if m == 1 {
        return Ok(1);
    }
    let a = a % m;
    if a.gcd(&m) != 1 {
        return Err(Error::NotUnit { a, m });
    }
    let mut order = totient(m);
    for (q, _) in factor_u64(order) {
        while order % q == 0 && pow_mod(a, order / q, m) == 1 {
            order /= q;
        }
    }
    Ok(order)
}

fn v2(x: i128) -> Valuation {
    Valuation::of_i128(x, 2)
}

/// `ord_{2^k}(d)` for odd `d` in closed form: 1 up to `μ = v_2(d-1)`, 2 up
/// to `ν = v_2(d^2-1) - 1`, then `2^(k-ν)`.
pub fn two_power_order(d: i64, k: u32) -> Result<u64> {
    if d % 2 == 0 {
        return Err(Error::EvenExponent(d));
    }
    let d = d as i128;
    let mu = v2(d - 1);
    let nu = match v2(d * d - 1) {
        Valuation::Finite(e) => Valuation::Finite(e - 1),
        Valuation::Infinite => Valuation::Infinite,
    };
    let at_most = |v: Valuation| match v {
        Valuation::Finite(e) => k <= e,
        Valuation::Infinite => true,
    };
    Ok(if at_most(mu) {
        1
    } else if at_most(nu) {
        2
    } else {
        1u64 << (k - nu.finite().expect("finite below k"))
    })
}

/// Cycle counts of a permutation of `Z/pZ`, keyed by cycle length. The fixed
/// point 0 is included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleStructure {
    pub p: u64,
    pub d: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl CycleStructure {
    /// `Σ m N_m`, which is `p` for a genuine permutation.
    pub fn points(&self) -> u64 {
        self.counts.iter().map(|(m, n)| m * n).sum()
    }

    pub fn cycles(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn transpositions(&self) -> u64 {
        self.points() - self.cycles()
    }
}

impl fmt::Display for CycleStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .counts
            .iter()
            .map(|(m, n)| format!("{m}:{n}"))
            .collect();
        f.write_str(&parts.join(";"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(transpositions: u64) -> Parity {
        if transpositions % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// `p - 1 = 2^λ ω` with `ω` odd, together with `μ = v_2(d-1)` and
/// `ν = v_2(d^2-1) - 1` for odd `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TwoPart {
    pub lambda: u32,
    pub omega: u64,
    pub mu: Valuation,
    pub nu: Valuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityReport {
    pub p: u64,
    pub d: u64,
    pub transpositions: u64,
    pub parity: Parity,
    pub two_part: Option<TwoPart>,
}

fn check_permutation(p: u64, d: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let g = d.gcd(&(p - 1));
    if g != 1 {
        return Err(Error::NotPermutation { p, d, gcd: g });
    }
    Ok(())
}

/// Cycle structure of `x -> x^d` from the divisor/order count.
pub fn cycle_structure(p: u64, d: u64) -> Result<CycleStructure> {
    check_permutation(p, d)?;
    let mut counts = BTreeMap::new();
    for k in divisors(p - 1) {
        let m = ord(k, d % k)?;
        *counts.entry(m).or_insert(0) += totient(k) / m;
    }
    *counts.entry(1).or_insert(0) += 1;
    Ok(CycleStructure { p, d, counts })
}

pub fn parity(p: u64, d: u64) -> Result<ParityReport> {
    let cs = cycle_structure(p, d)?;
    // p - 1 - Σ_{k | p-1} N_k, the fixed point 0 contributing nothing
    let transpositions = cs.transpositions();
    let two_part = (d % 2 == 1).then(|| {
        let lambda = (p - 1).trailing_zeros();
        let d = d as i128;
        TwoPart {
            lambda,
            omega: (p - 1) >> lambda,
            mu: v2(d - 1),
            nu: match v2(d * d - 1) {
                Valuation::Finite(e) => Valuation::Finite(e - 1),
                Valuation::Infinite => Valuation::Infinite,
            },
        }
    });
    Ok(ParityReport {
        p,
        d,
        transpositions,
        parity: Parity::of(transpositions),
        two_part,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionReason {
    /// `gcd(d, p - 1) > 1`, so `x^d + c` is never a permutation.
    NotAPermutation,
    /// `x^d` is odd, so `x^d + c` is never a `p`-cycle.
    OddPermutation,
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExclusionReason::NotAPermutation => "not-a-permutation",
            ExclusionReason::OddPermutation => "odd-permutation",
        })
    }
}

/// Whether an odd prime `p` is ruled out of `S_{d,c}` for every `c`.
/// `None` means not excluded by these criteria.
pub fn excluded_from_s(p: u64, d: u64) -> Result<Option<ExclusionReason>> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    match parity(p, d) {
        Ok(r) if r.parity == Parity::Odd => Ok(Some(ExclusionReason::OddPermutation)),
        Ok(_) => Ok(None),
        Err(Error::NotPermutation { .. }) => Ok(Some(ExclusionReason::NotAPermutation)),
        Err(e) => Err(e),
    }
}

/// Decomposes the explicit permutation `x -> x^d mod p` by traversal.
pub fn brute_force_permutation(p: u64, d: u64, cap: u64) -> Result<(CycleStructure, Parity)> {
    if p > cap {
        return Err(Error::CapExceeded {
            what: "p",
            value: p,
            cap,
        });
    }
    check_permutation(p, d)?;
    let image: Vec<u64> = (0..p).map(|x| pow_mod(x, d, p)).collect();
    let mut seen = vec![false; p as usize];
    let mut counts = BTreeMap::new();
    for start in 0..p as usize {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = image[x] as usize;
            len += 1;
        }
        *counts.entry(len).or_insert(0) += 1;
    }
    let cs = CycleStructure { p, d, counts };
    let parity = Parity::of(cs.transpositions());
    Ok((cs, parity))
}

/// `v_2` of a positive integer as a plain count.
pub fn two_adic(x: u64) -> u32 {
    valuation_u64(x, 2).unwrap_or(0)
}
