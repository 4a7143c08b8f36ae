//! Dense polynomials over `F_p` for word-sized primes.

use crate::arith::{mod_inverse, mul_mod, sub_mod};

/// Coefficients low degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    p: u64,
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Poly {
        for a in coeffs.iter_mut() {
            *a %= p;
        }
        let mut f = Poly { p, coeffs };
        f.trim();
        f
    }

    pub fn zero(p: u64) -> Poly {
        Poly { p, coeffs: vec![] }
    }

    /// `a x^k`.
    pub fn monomial(p: u64, a: u64, k: usize) -> Poly {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = a;
        Poly::new(p, coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &a| (mul_mod(acc, x, self.p) + a) % self.p)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                (a + b) % self.p
            })
            .collect();
        Poly::new(self.p, coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                sub_mod(a, b, self.p)
            })
            .collect();
        Poly::new(self.p, coeffs)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.p);
        }
        let p = self.p as u128;
        let mut acc = vec![0u128; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u128 * b as u128) % p;
            }
        }
        Poly::new(self.p, acc.into_iter().map(|a| a as u64).collect())
    }

    /// Quotient and remainder by a nonzero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = mod_inverse(divisor.coeffs[dd], self.p).expect("prime modulus");
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1;
            let q = mul_mod(rem[k], lead_inv, self.p);
            if q != 0 {
                let shift = k - dd;
                quot[shift] = q;
                for (i, &b) in divisor.coeffs.iter().enumerate() {
                    rem[shift + i] = sub_mod(rem[shift + i], mul_mod(q, b, self.p), self.p);
                }
            }
            rem.pop();
        }
        (Poly::new(self.p, quot), Poly::new(self.p, rem))
    }

    pub fn monic(&self) -> Poly {
        match self.coeffs.last() {
            None => self.clone(),
            Some(&lead) => {
                let inv = mod_inverse(lead, self.p).expect("prime modulus");
                Poly::new(
                    self.p,
                    self.coeffs
                        .iter()
                        .map(|&a| mul_mod(a, inv, self.p))
                        .collect(),
                )
            }
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Reduction modulo `x^p - x`: `x^k -> x^(k - (p - 1))` for `k >= p`.
    pub fn reduce_frobenius(&self) -> Poly {
        let p = self.p as usize;
        if self.coeffs.len() <= p {
            return self.clone();
        }
        let mut out = self.coeffs[..p].to_vec();
        for (k, &a) in self.coeffs.iter().enumerate().skip(p) {
            let j = (k - 1) % (p - 1) + 1;
            out[j] = (out[j] + a) % self.p;
        }
        Poly::new(self.p, out)
    }

    /// `self^e mod (x^p - x)` by square and multiply.
    pub fn pow_frobenius(&self, mut e: u64) -> Poly {
        let mut base = self.reduce_frobenius();
        let mut acc = Poly::new(self.p, vec![1]);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).reduce_frobenius();
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).reduce_frobenius();
            }
        }
        acc
    }

    /// Number of distinct roots in `F_p`.
    pub fn count_roots(&self) -> u64 {
        if self.is_zero() {
            return self.p;
        }
        let frob = Poly::monomial(self.p, 1, self.p as usize).sub(&Poly::monomial(self.p, 1, 1));
        let reduced = self.reduce_frobenius();
        if reduced.is_zero() {
            return self.p;
        }
        reduced.gcd(&frob).degree().unwrap_or(0) as u64
    }
}
