//! `d`-adic roots of `W_d(c)` as a polynomial in `c`, and the symmetries of
//! `H_n = {(d, c) : n in D_{d,c}}`.
//!
//! For prime `d`, `W_d(c) ≡ 0 mod d` for every `c` and `W_d'(c) ≡ 1 mod d`,
//! so each residue class mod `d` carries exactly one root mod `d^n`.

use serde::Serialize;

use crate::arith::{is_prime, mod_inverse, mul_mod, sub_mod};
use crate::divisibility::in_d;
use crate::error::{Error, Result};
use crate::orbit::{orbit_with_derivative, Map};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftResult {
    pub d: u32,
    pub target_exponent: u32,
    pub modulus: u64,
    /// `lifts[i] ≡ i mod d`.
    pub lifts: Vec<u64>,
}

// Moduli stay below 2^62 so residues are valid `i64` constants.
const MODULUS_LIMIT: u64 = 1 << 62;

fn lift_modulus(d: u32, n: u32) -> Result<u64> {
    (d as u64)
        .checked_pow(n)
        .filter(|&m| m <= MODULUS_LIMIT)
        .ok_or(Error::ModulusOverflow {
            base: d as u64,
            exp: n,
        })
}

/// `(W_d(c), W_d'(c)) mod m`.
pub fn w_d_at(d: u32, c: u64, m: u64) -> Result<(u64, u64)> {
    orbit_with_derivative(Map::new(d, c as i64)?, d as u64, m)
}

/// Newton iteration at the full modulus; precision doubles each step.
pub fn hensel_lift(d: u32, n: u32) -> Result<LiftResult> {
    if !is_prime(d as u64) {
        return Err(Error::NotPrime(d as u64));
    }
    if n == 0 {
        return Err(Error::InvalidIndex { min: 1, got: 0 });
    }
    let m = lift_modulus(d, n)?;
    let lifts = (0..d as u64)
        .map(|i| {
            let mut c = i;
            // correct digits go 1, 2, 4, ...
            for _ in 0..=(32 - n.leading_zeros()) {
                let (w, dw) = w_d_at(d, c, m)?;
                if w == 0 {
                    break;
                }
                let inv = mod_inverse(dw, m).ok_or(Error::NotUnit { a: dw, m })?;
                c = sub_mod(c, mul_mod(w, inv, m), m);
            }
            debug_assert_eq!(w_d_at(d, c, m)?.0, 0);
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LiftResult {
        d,
        target_exponent: n,
        modulus: m,
        lifts,
    })
}

pub fn in_h(n: u64, map: Map) -> Result<bool> {
    Ok(in_d(map, n)?.member)
}

/// Outcome of each symmetry of `H_n` at one point; `None` where the fact
/// does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SymmetryReport {
    pub n: u64,
    pub member: bool,
    /// Membership is unchanged by `c -> c + n`.
    pub translation: bool,
    /// Membership is unchanged by `c -> -c`, for odd `d`.
    pub negation: Option<bool>,
    /// `n | c` forces membership.
    pub divides_c: Option<bool>,
    /// `n` prime with `d ≡ 1 mod n - 1` forces membership.
    pub exponent_rule: Option<bool>,
}

impl SymmetryReport {
    pub fn all_hold(&self) -> bool {
        self.translation
            && [self.negation, self.divides_c, self.exponent_rule]
                .iter()
                .all(|f| f.unwrap_or(true))
    }
}

pub fn h_symmetries(n: u64, map: Map) -> Result<SymmetryReport> {
    let (d, c) = (map.d(), map.c());
    let member = in_h(n, map)?;
    let shifted = c
        .checked_add(n as i64)
        .ok_or(Error::InvalidConfig("c + n overflows".into()))?;
    let translation = in_h(n, Map::new(d, shifted)?)? == member;
    let negation = if d % 2 == 1 {
        Some(in_h(n, Map::new(d, -c)?)? == member)
    } else {
        None
    };
    let divides_c = (c % n as i64 == 0).then_some(member);
    let exponent_rule = (n >= 2 && is_prime(n) && (d as u64 - 1) % (n - 1) == 0).then_some(member);
    Ok(SymmetryReport {
        n,
        member,
        translation,
        negation,
        divides_c,
        exponent_rule,
    })
}
