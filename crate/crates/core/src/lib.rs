//! Index divisibility and cyclic orbits modulo p for the dynamical sequences
//! `W_n = φ^n(0)` with `φ(x) = x^d + c`.
//!
//! - [`orbit`]: exact and modular orbits of 0, valuations, derivatives in `c`
//! - [`divisibility`]: membership in `D`, `P`, `S`, structural checks, primitive primes
//! - [`graph`]: the index divisibility graph and its DOT/JSON export
//! - [`permutation`]: cycle structure and parity of `x -> x^d` on `Z/pZ`
//! - [`hensel`]: `d`-adic lifts of the `c` values with `d^n` in `D`
//! - [`experiments`]: the `(p, c)` scan, aggregate tables and dynatomic root counts

pub mod arith;
pub mod cli;
pub mod divisibility;
pub mod error;
pub mod experiments;
pub mod factor;
pub mod graph;
pub mod hensel;
pub mod orbit;
pub mod permutation;
pub mod poly;

pub use error::{Error, Result};
pub use orbit::Map;

#[cfg(test)]
pub(crate) fn seeded(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x00d1_5eed),
        ..Default::default()
    }
}
