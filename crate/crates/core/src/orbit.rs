//! The orbit of 0 under `x -> x^d + c`, exactly and modulo `m`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{add_mod, mul_mod, pow_mod, reduce_signed};
use crate::error::{Error, Result};

/// Default cap on the size of exact orbit terms, in decimal digits.
pub const DEFAULT_DIGIT_CAP: u64 = 1_000_000;

/// The polynomial map `x -> x^d + c` with `d >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Map {
    d: u32,
    c: i64,
}

impl Map {
    pub fn new(d: u32, c: i64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidExponent(d));
        }
        Ok(Map { d, c })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn c(&self) -> i64 {
        self.c
    }

    /// Period of 0 over the integers when the orbit is exactly periodic.
    ///
    /// Only `c = 0` (period 1) and `c = -1` with even `d` (period 2) qualify;
    /// everywhere else 0 wanders and no orbit term after `W_0` vanishes.
    pub fn zero_period_over_z(&self) -> Option<u64> {
        match self.c {
            0 => Some(1),
            -1 if self.d % 2 == 0 => Some(2),
            _ => None,
        }
    }

    /// Whether `W_n` is exactly zero.
    pub fn term_is_zero(&self, n: u64) -> bool {
        n == 0 || self.zero_period_over_z().is_some_and(|b| n % b == 0)
    }

    pub(crate) fn stepper(&self, m: u64) -> Stepper {
        Stepper {
            d: self.d as u64,
            c: reduce_signed(self.c, m),
            m,
        }
    }
}

impl fmt::Display for Map {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c < 0 {
            write!(f, "x^{} - {}", self.d, self.c.unsigned_abs())
        } else {
            write!(f, "x^{} + {}", self.d, self.c)
        }
    }
}

/// One application of the map modulo a fixed word-sized modulus.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stepper {
    d: u64,
    c: u64,
    m: u64,
}

impl Stepper {
    #[inline]
    pub(crate) fn apply(&self, x: u64) -> u64 {
        add_mod(pow_mod(x, self.d, self.m), self.c, self.m)
    }

    /// First `k in 1..=limit` with `W_k = 0 (mod m)`, i.e. the period of 0
    /// when it is at most `limit`.
    #[inline]
    pub(crate) fn zero_return(&self, limit: u64) -> Option<u64> {
        let mut x = 0u64;
        for k in 1..=limit {
            x = self.apply(x);
            if x == 0 {
                return Some(k);
            }
        }
        None
    }

    fn iterate(&self, steps: u64) -> u64 {
        (0..steps).fold(0, |x, _| self.apply(x))
    }
}

/// Exact terms `W_0..W_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigOrbit {
    pub map: Map,
    pub terms: Vec<BigInt>,
}

/// Computes `W_0..W_k` exactly, refusing any term longer than `digit_cap`
/// decimal digits.
pub fn orbit_exact(map: Map, k: u64, digit_cap: u64) -> Result<BigOrbit> {
    let c = BigInt::from(map.c);
    let mut terms = Vec::with_capacity(k as usize + 1);
    terms.push(BigInt::zero());
    for i in 1..=k {
        let prev = &terms[i as usize - 1];
        let bits = prev.bits();
        // |W^d| < 2^(bits*d), so digits <= bits*d*log10(2) + 1.
        let upper = (bits * map.d as u64).saturating_mul(30_103) / 100_000 + 2;
        let lower = (bits.saturating_sub(1) * map.d as u64).saturating_mul(30_103) / 100_000;
        if lower > digit_cap {
            return Err(Error::DigitCapExceeded {
                index: i,
                cap: digit_cap,
            });
        }
        let next = prev.pow(map.d) + &c;
        if upper > digit_cap && decimal_digits(&next) > digit_cap {
            return Err(Error::DigitCapExceeded {
                index: i,
                cap: digit_cap,
            });
        }
        terms.push(next);
    }
    Ok(BigOrbit { map, terms })
}

fn decimal_digits(x: &BigInt) -> u64 {
    x.magnitude().to_str_radix(10).len() as u64
}

/// The eventually periodic orbit of 0 modulo `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModOrbit {
    pub map: Map,
    pub modulus: u64,
    /// Number of residues before the cycle is entered.
    pub tail: u64,
    pub period: u64,
    /// Distinct residues in visiting order, `tail + period` of them.
    pub residues: Vec<u64>,
}

impl ModOrbit {
    /// `W_n mod m`.
    pub fn term(&self, n: u64) -> u64 {
        let len = self.residues.len() as u64;
        let idx = if n < len {
            n
        } else {
            self.tail + (n - self.tail) % self.period
        };
        self.residues[idx as usize]
    }

    /// Period of 0 itself, if 0 lies on the cycle.
    pub fn zero_period(&self) -> Option<u64> {
        (self.tail == 0).then_some(self.period)
    }
}

const DENSE_POSITION_LIMIT: u64 = 1 << 22;

/// Walks the orbit of 0 modulo `m` until the first repeated residue.
pub fn orbit_mod(map: Map, m: u64) -> Result<ModOrbit> {
    if m == 0 {
        return Err(Error::InvalidModulus);
    }
    let step = map.stepper(m);
    let mut residues = vec![0u64];
    let mut x = 0u64;
    let first_seen = if m <= DENSE_POSITION_LIMIT {
        let mut pos = vec![u32::MAX; m as usize];
        pos[0] = 0;
        loop {
            x = step.apply(x);
            let seen = pos[x as usize];
            if seen != u32::MAX {
                break seen as u64;
            }
            pos[x as usize] = residues.len() as u32;
            residues.push(x);
        }
    } else {
        let mut pos: HashMap<u64, u64> = HashMap::new();
        pos.insert(0, 0);
        loop {
            x = step.apply(x);
            if let Some(&seen) = pos.get(&x) {
                break seen;
            }
            pos.insert(x, residues.len() as u64);
            residues.push(x);
        }
    };
    let tail = first_seen;
    let period = residues.len() as u64 - tail;
    Ok(ModOrbit {
        map,
        modulus: m,
        tail,
        period,
        residues,
    })
}

/// `W_n mod m` without materializing `W_n`.
pub fn w_mod(map: Map, n: u64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidModulus);
    }
    if n == 0 || m == 1 {
        return Ok(0);
    }
    let step = map.stepper(m);
    if n <= m {
        // A return to 0 means 0 is purely periodic; reduce the index.
        let mut x = 0u64;
        for k in 1..=n {
            x = step.apply(x);
            if x == 0 {
                return Ok(step.iterate(n % k));
            }
        }
        Ok(x)
    } else {
        Ok(orbit_mod(map, m)?.term(n))
    }
}

/// `W_n mod m` for moduli beyond 64 bits.
pub fn w_mod_big(map: Map, n: u64, m: &BigUint) -> Result<BigUint> {
    if m.is_zero() {
        return Err(Error::InvalidModulus);
    }
    if let Some(small) = m.to_u64() {
        return w_mod(map, n, small).map(BigUint::from);
    }
    Ok(iterate_big(map, n, m))
}

fn iterate_big(map: Map, n: u64, m: &BigUint) -> BigUint {
    let c = {
        let r = BigInt::from(map.c).mod_floor(&BigInt::from_biguint(Sign::Plus, m.clone()));
        r.magnitude().clone()
    };
    let d = BigUint::from(map.d);
    let apply = |x: &BigUint| (x.modpow(&d, m) + &c) % m;
    let mut x = BigUint::zero();
    for k in 1..=n {
        x = apply(&x);
        if x.is_zero() {
            let mut y = BigUint::zero();
            for _ in 0..n % k {
                y = apply(&y);
            }
            return y;
        }
    }
    x
}

/// A p-adic valuation, with `v_p(0)` kept distinct from every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn of(x: &BigInt, p: u64) -> Valuation {
        match valuation(x, p) {
            Ok(e) => Valuation::Finite(e),
            Err(_) => Valuation::Infinite,
        }
    }

    pub fn of_i128(x: i128, p: u64) -> Valuation {
        Valuation::of(&BigInt::from(x), p)
    }

    pub fn exceeds(&self, t: u32) -> bool {
        match *self {
            Valuation::Finite(e) => e > t,
            Valuation::Infinite => true,
        }
    }

    pub fn finite(&self) -> Option<u32> {
        match *self {
            Valuation::Finite(e) => Some(e),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(e) => write!(f, "{e}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// Largest `e` with `p^e | x`, for nonzero `x` and prime `p`.
pub fn valuation(x: &BigInt, p: u64) -> Result<u32> {
    if x.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let p = BigUint::from(p);
    let mut rest = x.magnitude().clone();
    let mut e = 0;
    loop {
        let (q, r) = rest.div_rem(&p);
        if !r.is_zero() {
            return Ok(e);
        }
        rest = q;
        e += 1;
    }
}

/// Whether `v_p(W_n) > t`, decided by `W_n = 0 (mod p^(t+1))`.
pub fn w_valuation_exceeds(map: Map, n: u64, p: u64, t: u32) -> Result<bool> {
    if n == 0 {
        return Err(Error::InvalidIndex { min: 1, got: 0 });
    }
    match p.checked_pow(t + 1) {
        Some(m) => Ok(w_mod(map, n, m)? == 0),
        None => {
            let m = BigUint::from(p).pow(t + 1);
            Ok(w_mod_big(map, n, &m)?.is_zero())
        }
    }
}

/// `v_p(W_n)` found by galloping then bisecting on the exponent, exact below
/// `cap`.
///
/// Returns `(Valuation::Infinite, false)` when `W_n` is exactly zero and
/// `(Finite(cap), true)` when the probe saturates (`v_p(W_n) >= cap`).
pub fn probe_valuation(map: Map, n: u64, p: u64, cap: u32) -> Result<(Valuation, bool)> {
    if map.term_is_zero(n) {
        return Ok((Valuation::Infinite, false));
    }
    if cap == 0 {
        return Ok((Valuation::Finite(0), true));
    }
    // invariant: v_p(W_n) >= lo, and v_p(W_n) <= hi unless saturated
    let mut lo = 0u32;
    let mut step = 1u32;
    let hi = loop {
        let t = (lo + step - 1).min(cap - 1);
        if !w_valuation_exceeds(map, n, p, t)? {
            break t;
        }
        if t == cap - 1 {
            return Ok((Valuation::Finite(cap), true));
        }
        lo = t + 1;
        step *= 2;
    };
    let mut hi = hi;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if w_valuation_exceeds(map, n, p, mid)? {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok((Valuation::Finite(lo), false))
}

/// `(W_n(c) mod m, dW_n/dc (c) mod m)` via `W'_{k+1} = d W_k^(d-1) W'_k + 1`.
pub fn orbit_with_derivative(map: Map, n: u64, m: u64) -> Result<(u64, u64)> {
    if m == 0 {
        return Err(Error::InvalidModulus);
    }
    let d = map.d as u64;
    let c = reduce_signed(map.c, m);
    let d_mod = d % m;
    let (mut w, mut dw) = (0u64, 0u64);
    for _ in 0..n {
        let lower = pow_mod(w, d - 1, m);
        dw = add_mod(mul_mod(mul_mod(d_mod, lower, m), dw, m), 1 % m, m);
        w = add_mod(mul_mod(lower, w, m), c, m);
    }
    Ok((w, dw))
}

/// `|x| >= |y|`.
pub fn abs_at_least(x: &BigInt, y: &BigInt) -> bool {
    x.abs() >= y.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(d: u32, c: i64) -> Map {
        Map::new(d, c).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn exact_orbits() {
        assert_eq!(
            orbit_exact(map(2, 3), 5, DEFAULT_DIGIT_CAP).unwrap().terms,
            ints(&[0, 3, 12, 147, 21612, 467078547])
        );
        assert_eq!(
            orbit_exact(map(3, 4), 3, DEFAULT_DIGIT_CAP).unwrap().terms,
            ints(&[0, 4, 68, 314436])
        );
        assert_eq!(
            orbit_exact(map(5, 0), 3, DEFAULT_DIGIT_CAP).unwrap().terms,
            ints(&[0, 0, 0, 0])
        );
    }

    #[test]
    fn digit_cap_is_enforced() {
        let err = orbit_exact(map(2, 3), 40, 1000).unwrap_err();
        assert!(matches!(err, Error::DigitCapExceeded { cap: 1000, .. }));
        // W_5 of x^2+3 has 9 digits
        assert!(orbit_exact(map(2, 3), 5, 9).is_ok());
        assert!(orbit_exact(map(2, 3), 5, 8).is_err());
        assert_eq!(Map::new(1, 0).unwrap_err(), Error::InvalidExponent(1));
    }

    #[test]
    fn modular_orbits() {
        let o = orbit_mod(map(2, 3), 7).unwrap();
        assert_eq!(
            (o.residues.clone(), o.tail, o.period),
            (vec![0, 3, 5], 0, 3)
        );
        let o = orbit_mod(map(3, 4), 11).unwrap();
        assert_eq!((o.tail, o.period), (0, 11));
        let o = orbit_mod(map(4, -1), 9).unwrap();
        assert_eq!((o.residues.clone(), o.tail, o.period), (vec![0, 8], 0, 2));
        let o = orbit_mod(map(2, 3), 5).unwrap();
        assert_eq!(
            (o.residues.clone(), o.tail, o.period),
            (vec![0, 3, 2], 2, 1)
        );
        assert_eq!(orbit_mod(map(2, 3), 1).unwrap().period, 1);
        assert_eq!(orbit_mod(map(2, 3), 0), Err(Error::InvalidModulus));
    }

    #[test]
    fn single_terms() {
        assert_eq!(w_mod(map(2, 3), 3, 21).unwrap(), 0);
        assert_eq!(w_mod(map(2, 3), 4, 4).unwrap(), 0);
        assert_eq!(w_mod(map(7, -5), 0, 13).unwrap(), 0);
        // large index against a small modulus goes through the cycle
        let o = orbit_mod(map(2, 3), 97).unwrap();
        assert_eq!(
            w_mod(map(2, 3), 1_000_000_007, 97).unwrap(),
            o.term(1_000_000_007)
        );
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation(&BigInt::from(147), 7), Ok(2));
        assert_eq!(valuation(&BigInt::from(147), 5), Ok(0));
        assert_eq!(valuation(&BigInt::from(-68), 2), Ok(2));
        assert_eq!(valuation(&BigInt::zero(), 3), Err(Error::ZeroValuation));
        assert_eq!(Valuation::of(&BigInt::zero(), 3), Valuation::Infinite);
        assert!(Valuation::Infinite.exceeds(u32::MAX));
    }

    #[test]
    fn valuation_thresholds() {
        assert!(w_valuation_exceeds(map(2, 3), 3, 7, 0).unwrap());
        assert!(w_valuation_exceeds(map(2, 3), 3, 7, 1).unwrap());
        assert!(!w_valuation_exceeds(map(2, 3), 3, 7, 2).unwrap());
        assert!(!w_valuation_exceeds(map(2, 3), 3, 5, 0).unwrap());
        assert!(w_valuation_exceeds(map(3, 4), 2, 17, 0).unwrap());
        // 7^30 overflows u64, forcing the big modulus path
        assert!(!w_valuation_exceeds(map(2, 3), 3, 7, 29).unwrap());
        assert!(w_valuation_exceeds(map(2, 0), 3, 7, 29).unwrap());
    }

    #[test]
    fn valuation_probe() {
        assert_eq!(
            probe_valuation(map(2, 3), 3, 7, 64).unwrap(),
            (Valuation::Finite(2), false)
        );
        assert_eq!(
            probe_valuation(map(2, 3), 4, 2, 64).unwrap(),
            (Valuation::Finite(2), false)
        );
        assert_eq!(
            probe_valuation(map(4, -1), 6, 3, 64).unwrap(),
            (Valuation::Infinite, false)
        );
        // W_2 of x^2 + 2^40 is 2^80 + 2^40
        assert_eq!(
            probe_valuation(map(2, 1 << 40), 2, 2, 64).unwrap(),
            (Valuation::Finite(40), false)
        );
        assert_eq!(
            probe_valuation(map(2, 1 << 40), 2, 2, 30).unwrap(),
            (Valuation::Finite(30), true)
        );
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(orbit_with_derivative(map(3, 4), 1, 27).unwrap(), (4, 1));
        let (w, dw) = orbit_with_derivative(map(3, 1), 3, 3).unwrap();
        assert_eq!(w, w_mod(map(3, 1), 3, 3).unwrap());
        assert_eq!(dw, 1);
        assert_eq!(orbit_with_derivative(map(2, 3), 2, 100).unwrap(), (12, 7));
    }

    #[test]
    fn zero_terms() {
        assert!(map(4, -1).term_is_zero(6));
        assert!(!map(4, -1).term_is_zero(5));
        assert!(!map(3, -1).term_is_zero(2));
        assert!(map(3, 0).term_is_zero(5));
    }

    proptest! {
        #![proptest_config(crate::seeded(256))]

        #[test]
        fn modular_terms_match_exact(d in 2u32..6, c in -30i64..30, m in 1u64..500) {
            let mp = map(d, c);
            let exact = orbit_exact(mp, 7, 50_000).unwrap();
            let mb = BigInt::from(m);
            for (n, t) in exact.terms.iter().enumerate() {
                let expect = t.mod_floor(&mb).to_u64().unwrap();
                prop_assert_eq!(w_mod(mp, n as u64, m).unwrap(), expect);
            }
        }

        #[test]
        fn orbit_is_eventually_periodic(d in 2u32..8, c in -100i64..100, m in 1u64..3000) {
            let o = orbit_mod(map(d, c), m).unwrap();
            prop_assert!(o.tail + o.period <= m);
            prop_assert_eq!(o.residues[0], 0);
            prop_assert_eq!(o.residues.len() as u64, o.tail + o.period);
            let last = *o.residues.last().unwrap();
            prop_assert_eq!(map(d, c).stepper(m).apply(last), o.residues[o.tail as usize]);
            for n in 0..(2 * m + 5) {
                prop_assert_eq!(o.term(n), w_mod(map(d, c), n, m).unwrap());
            }
        }

        #[test]
        fn odd_degree_growth(d in (1u32..4).prop_map(|k| 2 * k + 1), c in prop_oneof![-20i64..=-1, 1i64..=20]) {
            let o = orbit_exact(map(d, c), 5, 100_000).unwrap();
            for n in 2..5 {
                let lower = o.terms[n].pow(d);
                prop_assert!(abs_at_least(&o.terms[n + 1], &lower));
            }
        }

        #[test]
        fn probe_matches_exact_valuation(d in 2u32..5, c in -40i64..40, n in 1u64..6, pi in 0usize..6) {
            let p = [2u64, 3, 5, 7, 11, 13][pi];
            let mp = map(d, c);
            let exact = orbit_exact(mp, n, 100_000).unwrap().terms.pop().unwrap();
            let (v, saturated) = probe_valuation(mp, n, p, 64).unwrap();
            prop_assert!(!saturated);
            prop_assert_eq!(v, Valuation::of(&exact, p));
        }

        #[test]
        fn big_modulus_agrees(d in 2u32..5, c in -50i64..50, n in 1u64..40, m in 2u64..1_000_000) {
            let big = iterate_big(map(d, c), n, &BigUint::from(m));
            prop_assert_eq!(big.to_u64().unwrap(), w_mod(map(d, c), n, m).unwrap());
        }

        // W(c+m) - W(c) = m W'(c) (mod m^2) for integer polynomials
        #[test]
        fn derivative_matches_finite_difference(d in 2u32..5, c in -20i64..20, n in 0u64..5, m in 2u64..60) {
            let (_, dw) = orbit_with_derivative(map(d, c), n, m).unwrap();
            let lo = orbit_exact(map(d, c), n, 100_000).unwrap().terms.pop().unwrap();
            let hi = orbit_exact(map(d, c + m as i64), n, 100_000).unwrap().terms.pop().unwrap();
            let mb = BigInt::from(m);
            let (q, r) = (hi - lo).div_rem(&mb);
            prop_assert!(r.is_zero());
            prop_assert_eq!(q.mod_floor(&mb).to_u64().unwrap(), dw);
        }
    }
}
