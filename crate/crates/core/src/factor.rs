//! Factorization of orbit terms: trial division, then Pollard-Brent rho
//! under a wall-clock budget.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{is_prime, primes_up_to};
use crate::error::{Error, Result};

pub const DEFAULT_TRIAL_BOUND: u64 = 1_000_000;
pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorBudget {
    pub trial_bound: u64,
    pub time: Duration,
    pub seed: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_bound: DEFAULT_TRIAL_BOUND,
            time: DEFAULT_TIME_BUDGET,
            seed: 0,
        }
    }
}

/// Prime factorization of a nonzero integer.
///
/// When the budget runs out, the composite part that could not be split is
/// kept in `unfactored`; the product of `factors` times `unfactored` is
/// always `|value|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorList {
    pub value: BigInt,
    pub factors: Vec<(BigUint, u32)>,
    pub unfactored: Option<BigUint>,
}

impl FactorList {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_none()
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn product(&self) -> BigUint {
        let known = self
            .factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e));
        match &self.unfactored {
            Some(rest) => known * rest,
            None => known,
        }
    }
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| primes_up_to(DEFAULT_TRIAL_BOUND))
}

pub fn factorize(value: &BigInt, budget: FactorBudget) -> Result<FactorList> {
    if value.is_zero() {
        return Err(Error::InvalidConfig("cannot factor 0".into()));
    }
    let deadline = Instant::now() + budget.time;
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut n = value.magnitude().clone();
    let mut found: Vec<BigUint> = Vec::new();

    let owned;
    let trial: &[u64] = if budget.trial_bound <= DEFAULT_TRIAL_BOUND {
        small_primes()
    } else {
        owned = primes_up_to(budget.trial_bound);
        &owned
    };
    for &p in trial.iter().take_while(|&&p| p <= budget.trial_bound) {
        if BigUint::from(p) * p > n {
            break;
        }
        while (&n % p).is_zero() {
            n /= p;
            found.push(BigUint::from(p));
        }
    }

    let mut pending = Vec::new();
    let mut stuck = BigUint::one();
    if !n.is_one() {
        pending.push(n);
    }
    while let Some(m) = pending.pop() {
        if is_probable_prime(&m, &mut rng) {
            found.push(m);
            continue;
        }
        match split(&m, deadline, &mut rng) {
            Some(f) => {
                let other = &m / &f;
                pending.push(f);
                pending.push(other);
            }
            None => stuck *= m,
        }
    }

    found.sort();
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    for p in found {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Ok(FactorList {
        value: value.clone(),
        factors,
        unfactored: (!stuck.is_one()).then_some(stuck),
    })
}

const MR_BASES: [u32; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

/// Miller-Rabin: deterministic below 2^64, fixed bases plus seeded random
/// bases above.
pub fn is_probable_prime(n: &BigUint, rng: &mut ChaCha8Rng) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let two = BigUint::from(2u32);
    let randoms: Vec<BigUint> = (0..8)
        .map(|_| rng.gen_biguint_range(&two, &n_minus_1))
        .collect();
    let bases = MR_BASES.iter().map(|&b| BigUint::from(b)).chain(randoms);
    'bases: for a in bases {
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// A nontrivial factor of composite `n`, or `None` past the deadline.
fn split(n: &BigUint, deadline: Instant, rng: &mut ChaCha8Rng) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let one = BigUint::one();
    while Instant::now() < deadline {
        let c = rng.gen_biguint_range(&one, n);
        if let Some(f) = brent(n, &c, rng.gen_biguint_below(n), deadline) {
            if &f != n {
                return Some(f);
            }
        }
    }
    None
}

// Brent's variant of rho on x -> x^2 + c, with batched gcds.
fn brent(n: &BigUint, c: &BigUint, y0: BigUint, deadline: Instant) -> Option<BigUint> {
    const BATCH: u64 = 128;
    let f = |x: &BigUint| (x * x + c) % n;
    let mut y = y0;
    let mut r: u64 = 1;
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..BATCH.min(r - k) {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (q * diff) % n;
            }
            g = q.gcd(n);
            k += BATCH;
        }
        r *= 2;
        if Instant::now() >= deadline {
            return None;
        }
    }
    if &g == n {
        // the batch overshot; step back one at a time
        loop {
            ys = f(&ys);
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            g = diff.gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (!g.is_one()).then_some(g)
}
