use rand::{Rng, RngCore};
use serde_json::Value;

use super::{Field, FieldDescriptor};
use crate::error::{Error, Result};

/// The Mersenne prime `2^61 - 1`, the default working field.
pub const MERSENNE_61: u64 = (1u64 << 61) - 1;

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The prime field `F_p` with `p < 2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
    mersenne: bool,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1u64 << 63 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p, mersenne: p == MERSENNE_61 })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, v: u64) -> u64 {
        v % self.p
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField { p: MERSENNE_61, mersenne: true }
    }
}

impl Field for PrimeField {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }

    #[inline]
    fn one(&self) -> u64 {
        1 % self.p
    }

    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        if self.mersenne {
            let z = *a as u128 * *b as u128;
            let mut s = (z as u64 & MERSENNE_61) + (z >> 61) as u64;
            if s >= MERSENNE_61 {
                s -= MERSENNE_61;
            }
            if s >= MERSENNE_61 {
                s -= MERSENNE_61;
            }
            s
        } else {
            mulmod(*a, *b, self.p)
        }
    }

    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }

    fn inv(&self, a: &u64) -> Result<u64> {
        if *a == 0 {
            return Err(Error::DivisionByZero);
        }
        let (mut r0, mut r1) = (self.p as i128, *a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Ok(t0.rem_euclid(self.p as i128) as u64)
    }

    fn from_u64(&self, v: u64) -> u64 {
        v % self.p
    }

    fn random(&self, rng: &mut dyn RngCore) -> u64 {
        rng.gen_range(0..self.p)
    }

    fn characteristic(&self) -> u64 {
        self.p
    }

    fn ext_degree(&self) -> usize {
        1
    }

    fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor::prime(self.p)
    }

    fn nth_element(&self, idx: u64) -> u64 {
        idx % self.p
    }

    fn elem_to_json(&self, a: &u64) -> Value {
        Value::from(*a)
    }

    fn elem_from_json(&self, v: &Value) -> Result<u64> {
        if let Some(x) = v.as_u64() {
            return Ok(x % self.p);
        }
        if let Some(x) = v.as_i64() {
            return Ok(self.from_i64(x));
        }
        Err(Error::InvalidInput(format!("expected an integer field element, got {v}")))
    }

    fn as_prime_residue(&self, a: &u64) -> Option<u64> {
        Some(*a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn primality() {
        let primes = [2u64, 3, 5, 7, 101, 65537, MERSENNE_61, 18446744073709551557];
        for p in primes {
            assert!(is_prime(p), "{p}");
        }
        for c in [0u64, 1, 4, 561, 1105, 3215031751, 341550071728321, MERSENNE_61 + 2] {
            assert!(!is_prime(c), "{c}");
        }
    }

    #[test]
    fn inverse_in_f7() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.inv(&3).unwrap(), 5);
        assert_eq!(f.inv(&0), Err(Error::DivisionByZero));
    }

    #[test]
    fn mersenne_mul_matches_generic() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = f.random(&mut rng);
            let b = f.random(&mut rng);
            assert_eq!(f.mul(&a, &b), mulmod(a, b, MERSENNE_61));
        }
        assert_eq!(f.mul(&(MERSENNE_61 - 1), &(MERSENNE_61 - 1)), 1);
    }

    #[test]
    fn rejects_composite_modulus() {
        assert_eq!(PrimeField::new(15), Err(Error::NotPrime(15)));
    }
}
