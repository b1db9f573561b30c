use std::sync::Arc;

use num_bigint::BigUint;
use rand::RngCore;
use serde_json::Value;

use super::{Field, FieldDescriptor, PrimeField};
use crate::error::{Error, Result};

// Dense polynomials over F_p, coefficients low to high, no trailing zeros.

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn pmul(f: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(out)
}

fn psub(f: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| f.sub(a.get(i).unwrap_or(&0), b.get(i).unwrap_or(&0)))
        .collect();
    trim(out)
}

fn pdivrem(f: &PrimeField, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "polynomial division by zero");
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lc_inv = f.inv(b.last().unwrap()).expect("nonzero leading coefficient");
    let mut q = vec![0u64; r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = f.mul(r.last().unwrap(), &lc_inv);
        q[shift] = c;
        for (j, bj) in b.iter().enumerate() {
            r[shift + j] = f.sub(&r[shift + j], &f.mul(&c, bj));
        }
        r = trim(r);
    }
    (trim(q), r)
}

fn pmulmod(f: &PrimeField, a: &[u64], b: &[u64], m: &[u64]) -> Vec<u64> {
    pdivrem(f, &pmul(f, a, b), m).1
}

fn ppowmod(f: &PrimeField, base: &[u64], e: &BigUint, m: &[u64]) -> Vec<u64> {
    let mut acc = vec![1u64];
    for i in (0..e.bits()).rev() {
        acc = pmulmod(f, &acc, &acc, m);
        if e.bit(i) {
            acc = pmulmod(f, &acc, base, m);
        }
    }
    pdivrem(f, &acc, m).1
}

fn pgcd(f: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = pdivrem(f, &a, &b).1;
        a = b;
        b = r;
    }
    if let Some(lc) = a.last().copied() {
        let inv = f.inv(&lc).unwrap();
        for c in a.iter_mut() {
            *c = f.mul(c, &inv);
        }
    }
    a
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test for a polynomial over `F_p` (coefficients low to high).
pub fn is_irreducible(base: &PrimeField, poly: &[u64]) -> bool {
    let m = trim(poly.to_vec());
    if m.len() < 2 {
        return false;
    }
    let t = m.len() - 1;
    if t == 1 {
        return true;
    }
    let p = BigUint::from(base.p());
    let x = vec![0u64, 1];
    // frob[k] = x^(p^k) mod m
    let mut frob = vec![pdivrem(base, &x, &m).1];
    for _ in 0..t {
        let next = ppowmod(base, frob.last().unwrap(), &p, &m);
        frob.push(next);
    }
    if trim(psub(base, &frob[t], &x)).len() > 0 {
        return false;
    }
    for q in prime_factors(t) {
        let h = psub(base, &frob[t / q], &x);
        if pgcd(base, &h, &m).len() != 1 {
            return false;
        }
    }
    true
}

/// The first monic irreducible polynomial of degree `t` over `F_p` in
/// lexicographic order of `(c0, c1, ..., c_{t-1})` read as base-`p` digits.
pub fn find_irreducible(base: &PrimeField, t: usize) -> Result<Vec<u64>> {
    if t == 0 {
        return Err(Error::InvalidInput("extension degree must be positive".into()));
    }
    let p = base.p();
    let mut idx: u128 = 0;
    loop {
        let mut coeffs = Vec::with_capacity(t + 1);
        let mut rest = idx;
        for _ in 0..t {
            coeffs.push((rest % p as u128) as u64);
            rest /= p as u128;
        }
        if rest > 0 {
            return Err(Error::NotIrreducible);
        }
        coeffs.push(1);
        if is_irreducible(base, &coeffs) {
            return Ok(coeffs);
        }
        idx += 1;
    }
}

/// The extension `F_p[x]/(m)` with `m` monic irreducible of degree `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtField {
    base: PrimeField,
    modulus: Arc<Vec<u64>>,
}

impl ExtField {
    /// Build from an explicit modulus; it is normalised to be monic.
    pub fn new(base: PrimeField, modulus: Vec<u64>) -> Result<Self> {
        let mut m = trim(modulus.into_iter().map(|c| base.reduce(c)).collect());
        if m.len() < 2 {
            return Err(Error::NotIrreducible);
        }
        let lc_inv = base.inv(m.last().unwrap())?;
        for c in m.iter_mut() {
            *c = base.mul(c, &lc_inv);
        }
        if !is_irreducible(&base, &m) {
            return Err(Error::NotIrreducible);
        }
        Ok(ExtField { base, modulus: Arc::new(m) })
    }

    pub fn with_degree(base: PrimeField, t: usize) -> Result<Self> {
        let m = find_irreducible(&base, t)?;
        Ok(ExtField { base, modulus: Arc::new(m) })
    }

    pub fn base(&self) -> &PrimeField {
        &self.base
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    /// Embed a base-field residue.
    pub fn embed(&self, c: u64) -> Vec<u64> {
        let mut v = vec![0u64; self.degree()];
        v[0] = self.base.reduce(c);
        v
    }

    /// The class of `x`, a generator of the extension over the base.
    pub fn gen(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.degree()];
        if self.degree() == 1 {
            v[0] = self.base.neg(&self.modulus[0]);
        } else {
            v[1] = 1;
        }
        v
    }

    /// Build an element from base coefficients, reducing modulo the modulus.
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Vec<u64> {
        let c: Vec<u64> = coeffs.iter().map(|c| self.base.reduce(*c)).collect();
        self.pad(pdivrem(&self.base, &c, &self.modulus).1)
    }

    fn pad(&self, mut v: Vec<u64>) -> Vec<u64> {
        v.resize(self.degree(), 0);
        v
    }
}

impl Field for ExtField {
    type Elem = Vec<u64>;

    fn zero(&self) -> Vec<u64> {
        vec![0; self.degree()]
    }

    fn one(&self) -> Vec<u64> {
        self.embed(1)
    }

    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| self.base.add(x, y)).collect()
    }

    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| self.base.sub(x, y)).collect()
    }

    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let t = self.degree();
        let f = &self.base;
        let mut prod = vec![0u64; 2 * t - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] = f.add(&prod[i + j], &f.mul(x, y));
            }
        }
        let m = &self.modulus;
        for i in (t..2 * t - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            for j in 0..t {
                prod[i - t + j] = f.sub(&prod[i - t + j], &f.mul(&c, &m[j]));
            }
        }
        prod.truncate(t);
        prod
    }

    fn neg(&self, a: &Vec<u64>) -> Vec<u64> {
        a.iter().map(|x| self.base.neg(x)).collect()
    }

    fn inv(&self, a: &Vec<u64>) -> Result<Vec<u64>> {
        let f = &self.base;
        let a_t = trim(a.clone());
        if a_t.is_empty() {
            return Err(Error::DivisionByZero);
        }
        // extended Euclid: s * a + _ * m = g
        let (mut r0, mut r1) = (self.modulus.to_vec(), a_t);
        let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
        while !r1.is_empty() {
            let (q, r) = pdivrem(f, &r0, &r1);
            let s2 = psub(f, &s0, &pmul(f, &q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
        }
        // r0 is a nonzero constant since the modulus is irreducible
        let c = f.inv(&r0[0])?;
        let s: Vec<u64> = s0.iter().map(|x| f.mul(x, &c)).collect();
        Ok(self.pad(pdivrem(f, &s, &self.modulus).1))
    }

    fn from_u64(&self, v: u64) -> Vec<u64> {
        self.embed(v)
    }

    fn random(&self, rng: &mut dyn RngCore) -> Vec<u64> {
        (0..self.degree()).map(|_| self.base.random(rng)).collect()
    }

    fn characteristic(&self) -> u64 {
        self.base.p()
    }

    fn ext_degree(&self) -> usize {
        self.degree()
    }

    fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            prime: self.base.p(),
            ext_degree: Some(self.degree()),
            modulus: Some(self.modulus.to_vec()),
        }
    }

    fn nth_element(&self, idx: u64) -> Vec<u64> {
        let p = self.base.p();
        let mut rest = idx;
        (0..self.degree())
            .map(|_| {
                let d = rest % p;
                rest /= p;
                d
            })
            .collect()
    }

    fn elem_to_json(&self, a: &Vec<u64>) -> Value {
        Value::from(a.clone())
    }

    fn elem_from_json(&self, v: &Value) -> Result<Vec<u64>> {
        match v {
            Value::Array(items) => {
                let mut c = Vec::with_capacity(items.len());
                for it in items {
                    c.push(self.base.elem_from_json(it)?);
                }
                Ok(self.from_coeffs(&c))
            }
            other => Ok(self.embed(self.base.elem_from_json(other)?)),
        }
    }

    fn as_prime_residue(&self, a: &Vec<u64>) -> Option<u64> {
        if self.degree() == 1 {
            Some(a[0])
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn irreducible_search_small_cases() {
        let f2 = PrimeField::new(2).unwrap();
        assert_eq!(find_irreducible(&f2, 1).unwrap(), vec![0, 1]);
        assert_eq!(find_irreducible(&f2, 2).unwrap(), vec![1, 1, 1]);
        let f7 = PrimeField::new(7).unwrap();
        let m = find_irreducible(&f7, 2).unwrap();
        assert_eq!(m.len(), 3);
        // no roots in F_7
        for x in 0..7u64 {
            let v = (m[0] + m[1] * x + m[2] * x * x) % 7;
            assert_ne!(v, 0);
        }
    }

    #[test]
    fn rejects_reducible_modulus() {
        let f7 = PrimeField::new(7).unwrap();
        // x^2 - 1 = (x-1)(x+1)
        assert_eq!(ExtField::new(f7, vec![6, 0, 1]), Err(Error::NotIrreducible));
    }

    #[test]
    fn inverses_in_f49() {
        let f7 = PrimeField::new(7).unwrap();
        let e = ExtField::with_degree(f7, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = e.random_nonzero(&mut rng);
            let b = e.inv(&a).unwrap();
            assert_eq!(e.mul(&a, &b), e.one());
        }
        assert_eq!(e.inv(&e.zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn frobenius_order() {
        let f5 = PrimeField::new(5).unwrap();
        let e = ExtField::with_degree(f5, 3).unwrap();
        let g = e.gen();
        // g^(5^3) == g
        assert_eq!(e.pow(&g, 125), g);
        assert_ne!(e.pow(&g, 5), g);
    }
}
