use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::{is_prime, Field, PrimeField};

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let step = |x: u64| (mulmod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = step(x);
            y = step(step(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorisation as `(prime, exponent)` pairs in increasing order.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        let mut m = m;
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
            while m % p == 0 {
                primes.push(p);
                m /= p;
            }
        }
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            primes.push(m);
        } else {
            let d = pollard_rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// The smallest generator of `F_p^*`.
pub fn primitive_root(f: &PrimeField, factors: &[(u64, u32)]) -> u64 {
    let p = f.p();
    if p == 2 {
        return 1;
    }
    (2..p)
        .find(|&g| factors.iter().all(|(q, _)| f.pow(&g, (p - 1) / q) != 1))
        .expect("prime fields have primitive roots")
}

/// Largest subgroup order handled by baby-step giant-step.
const BSGS_LIMIT: u64 = 1 << 44;

fn bsgs(f: &PrimeField, g: u64, h: u64, order: u64) -> Option<u64> {
    let m = (order as f64).sqrt().ceil() as u64 + 1;
    let mut table = HashMap::with_capacity(m as usize);
    let mut cur = 1u64;
    for j in 0..m {
        table.entry(cur).or_insert(j);
        cur = f.mul(&cur, &g);
    }
    let giant = f.inv(&f.pow(&g, m)).ok()?;
    let mut y = h;
    for i in 0..=m {
        if let Some(j) = table.get(&y) {
            return Some((i * m + j) % order);
        }
        y = f.mul(&y, &giant);
    }
    None
}

/// `x` with `g^x = h` in `F_p^*`, for a generator `g` (Pohlig-Hellman).
pub fn discrete_log(f: &PrimeField, g: u64, h: u64, factors: &[(u64, u32)]) -> Result<u64> {
    if h == 0 {
        return Err(Error::DivisionByZero);
    }
    let n = f.p() - 1;
    let mut residues = Vec::new();
    for &(q, e) in factors {
        if q > BSGS_LIMIT {
            return Err(Error::FieldTooSmall(format!("p-1 has a prime factor {q} too large for discrete logs")));
        }
        let qe = q.pow(e);
        let gq = f.pow(&g, n / qe);
        let hq = f.pow(&h, n / qe);
        let gamma = f.pow(&gq, qe / q);
        let mut x = 0u64;
        let mut qk = 1u64;
        for k in 0..e {
            let shift = f.inv(&f.pow(&gq, x))?;
            let hk = f.pow(&f.mul(&shift, &hq), qe / q / qk);
            let dk = bsgs(f, gamma, hk, q).ok_or_else(|| Error::InvalidInput("element outside group".into()))?;
            x += dk * qk;
            if k + 1 < e {
                qk *= q;
            }
        }
        residues.push((x % qe, qe));
    }
    // CRT over the pairwise coprime prime powers
    let mut acc: u128 = 0;
    let mut modulus: u128 = 1;
    for (r, m) in residues {
        let (r, m) = (r as u128, m as u128);
        let mut t = acc;
        while t % m != r {
            t += modulus;
        }
        acc = t;
        modulus *= m;
    }
    Ok(acc as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::MERSENNE_61;

    #[test]
    fn factors_mersenne_minus_one() {
        let fac = factor_u64(MERSENNE_61 - 1);
        let prod: u128 = fac.iter().map(|(p, e)| (*p as u128).pow(*e)).product();
        assert_eq!(prod, (MERSENNE_61 - 1) as u128);
        assert!(fac.iter().all(|(p, _)| is_prime(*p)));
        assert_eq!(factor_u64(1_000_000_007 * 998_244_353), vec![(998_244_353, 1), (1_000_000_007, 1)]);
    }

    #[test]
    fn logs_round_trip() {
        for p in [101u64, 65537, MERSENNE_61] {
            let f = PrimeField::new(p).unwrap();
            let fac = factor_u64(p - 1);
            let g = primitive_root(&f, &fac);
            for x in [0u64, 1, 17, (p - 2) / 3] {
                let h = f.pow(&g, x);
                assert_eq!(discrete_log(&f, g, h, &fac).unwrap(), x);
            }
        }
    }
}
