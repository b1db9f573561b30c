//! Dense univariate polynomials over a [`Field`], stored low to high with no
//! trailing zeros. The zero polynomial is the empty vector.

use num_bigint::BigUint;
use num_traits::One;
use rand::RngCore;

use crate::field::Field;

pub type UPoly<F> = Vec<<F as Field>::Elem>;

pub fn trim<F: Field>(f: &F, mut v: UPoly<F>) -> UPoly<F> {
    while v.last().map_or(false, |c| f.is_zero(c)) {
        v.pop();
    }
    v
}

/// Degree, with `None` for the zero polynomial.
pub fn degree<F: Field>(a: &[F::Elem]) -> Option<usize> {
    a.len().checked_sub(1)
}

pub fn constant<F: Field>(f: &F, c: F::Elem) -> UPoly<F> {
    trim(f, vec![c])
}

/// The polynomial `x`.
pub fn x<F: Field>(f: &F) -> UPoly<F> {
    vec![f.zero(), f.one()]
}

pub fn add<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> UPoly<F> {
    let n = a.len().max(b.len());
    let z = f.zero();
    let out = (0..n).map(|i| f.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect();
    trim(f, out)
}

pub fn sub<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> UPoly<F> {
    let n = a.len().max(b.len());
    let z = f.zero();
    let out = (0..n).map(|i| f.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z))).collect();
    trim(f, out)
}

pub fn scale<F: Field>(f: &F, a: &[F::Elem], c: &F::Elem) -> UPoly<F> {
    trim(f, a.iter().map(|x| f.mul(x, c)).collect())
}

pub fn mul<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> UPoly<F> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(f, out)
}

/// Quotient and remainder; panics on division by the zero polynomial.
pub fn divrem<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> (UPoly<F>, UPoly<F>) {
    let b = trim(f, b.to_vec());
    assert!(!b.is_empty(), "polynomial division by zero");
    let mut r = trim(f, a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lc_inv = f.inv(b.last().unwrap()).expect("trimmed leading coefficient");
    let mut q = vec![f.zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = f.mul(r.last().unwrap(), &lc_inv);
        for (j, bj) in b.iter().enumerate() {
            r[shift + j] = f.sub(&r[shift + j], &f.mul(&c, bj));
        }
        q[shift] = c;
        r = trim(f, r);
    }
    (trim(f, q), r)
}

pub fn rem<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> UPoly<F> {
    divrem(f, a, b).1
}

pub fn monic<F: Field>(f: &F, a: &[F::Elem]) -> UPoly<F> {
    match a.last() {
        None => Vec::new(),
        Some(lc) => {
            let inv = f.inv(lc).expect("nonzero leading coefficient");
            scale(f, a, &inv)
        }
    }
}

/// Monic gcd (zero if both inputs are zero).
pub fn gcd<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> UPoly<F> {
    let mut a = trim(f, a.to_vec());
    let mut b = trim(f, b.to_vec());
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    monic(f, &a)
}

pub fn eval<F: Field>(f: &F, a: &[F::Elem], x: &F::Elem) -> F::Elem {
    crate::field::horner(f, a, x)
}

pub fn derivative<F: Field>(f: &F, a: &[F::Elem]) -> UPoly<F> {
    let out = a.iter().enumerate().skip(1).map(|(i, c)| f.mul(c, &f.from_u64(i as u64))).collect();
    trim(f, out)
}

pub fn mulmod<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem], m: &[F::Elem]) -> UPoly<F> {
    rem(f, &mul(f, a, b), m)
}

pub fn powmod<F: Field>(f: &F, base: &[F::Elem], e: &BigUint, m: &[F::Elem]) -> UPoly<F> {
    let mut acc = rem(f, &[f.one()], m);
    let base = rem(f, base, m);
    for i in (0..e.bits()).rev() {
        acc = mulmod(f, &acc, &acc, m);
        if e.bit(i) {
            acc = mulmod(f, &acc, &base, m);
        }
    }
    acc
}

/// `prod (x - r)` over the given roots.
pub fn from_roots<F: Field>(f: &F, roots: &[F::Elem]) -> UPoly<F> {
    let mut acc = vec![f.one()];
    for r in roots {
        acc = mul(f, &acc, &[f.neg(r), f.one()]);
    }
    acc
}

/// Compose `a(c * x)`.
pub fn scale_var<F: Field>(f: &F, a: &[F::Elem], c: &F::Elem) -> UPoly<F> {
    let mut pw = f.one();
    let mut out = Vec::with_capacity(a.len());
    for coef in a {
        out.push(f.mul(coef, &pw));
        pw = f.mul(&pw, c);
    }
    trim(f, out)
}

/// The square-free part `rad(a)`, made monic.
pub fn squarefree_part<F: Field>(f: &F, a: &[F::Elem]) -> UPoly<F> {
    let a = monic(f, &trim(f, a.to_vec()));
    if a.len() <= 2 {
        return a;
    }
    let da = derivative(f, &a);
    if da.is_empty() {
        // a = b(x^p); the p-th root of each coefficient is c^(q/p)
        let p = f.characteristic() as usize;
        let e = f.order() / BigUint::from(p as u64);
        let b: Vec<F::Elem> = a.iter().step_by(p).map(|c| f.pow_big(c, &e)).collect();
        return squarefree_part(f, &b);
    }
    let g = gcd(f, &a, &da);
    let mut core = divrem(f, &a, &g).0;
    // factors whose multiplicity is divisible by p survive in g
    let rest = divrem(f, &g, &gcd(f, &g, &core)).0;
    if rest.len() > 1 {
        let extra = squarefree_part(f, &rest);
        let shared = gcd(f, &core, &extra);
        core = mul(f, &core, &divrem(f, &extra, &shared).0);
    }
    monic(f, &core)
}

fn random_poly<F: Field>(f: &F, deg_below: usize, rng: &mut dyn RngCore) -> UPoly<F> {
    trim(f, (0..deg_below).map(|_| f.random(rng)).collect())
}

/// `sum_{i<m} a^(2^i) mod g`, the absolute trace for `q = 2^m`.
fn trace_map<F: Field>(f: &F, a: &[F::Elem], g: &[F::Elem], m: usize) -> UPoly<F> {
    let mut acc = rem(f, a, g);
    let mut cur = acc.clone();
    for _ in 1..m {
        cur = mulmod(f, &cur, &cur, g);
        acc = add(f, &acc, &cur);
    }
    acc
}

/// Split a monic square-free `g` whose irreducible factors all have degree
/// `deg` into those factors (Cantor-Zassenhaus).
pub fn equal_degree_factors<F: Field>(
    f: &F,
    g: &[F::Elem],
    deg: usize,
    rng: &mut dyn RngCore,
) -> Vec<UPoly<F>> {
    let g = monic(f, g);
    let n = g.len() - 1;
    if n == deg {
        return vec![g];
    }
    let q = f.order();
    let odd = f.characteristic() != 2;
    let qd = q.pow(deg as u32);
    loop {
        let a = random_poly(f, n, rng);
        if a.len() < 2 {
            continue;
        }
        let b = if odd {
            let e = (&qd - BigUint::one()) >> 1;
            sub(f, &powmod(f, &a, &e, &g), &[f.one()])
        } else {
            trace_map(f, &a, &g, f.ext_degree() * deg)
        };
        let h = gcd(f, &g, &b);
        if h.len() > 1 && h.len() < g.len() {
            let other = divrem(f, &g, &h).0;
            let mut out = equal_degree_factors(f, &h, deg, rng);
            out.extend(equal_degree_factors(f, &other, deg, rng));
            return out;
        }
    }
}

/// Distinct-degree factorisation of a monic square-free polynomial:
/// pairs `(product of all irreducible factors of degree i, i)`.
pub fn distinct_degree_factors<F: Field>(f: &F, a: &[F::Elem]) -> Vec<(UPoly<F>, usize)> {
    let mut rest = monic(f, a);
    let q = f.order();
    let xp = x(f);
    let mut h = rem(f, &xp, &rest);
    let mut out = Vec::new();
    let mut i = 0;
    while rest.len() > 1 {
        i += 1;
        if 2 * i > rest.len() - 1 {
            let d = rest.len() - 1;
            out.push((rest, d));
            break;
        }
        h = powmod(f, &h, &q, &rest);
        let g = gcd(f, &rest, &sub(f, &h, &xp));
        if g.len() > 1 {
            rest = divrem(f, &rest, &g).0;
            h = rem(f, &h, &rest);
            out.push((g, i));
        }
    }
    out
}

/// Distinct monic irreducible factors of `a` (multiplicities dropped).
pub fn irreducible_factors<F: Field>(f: &F, a: &[F::Elem], rng: &mut dyn RngCore) -> Vec<UPoly<F>> {
    let a = trim(f, a.to_vec());
    if a.len() < 2 {
        return Vec::new();
    }
    let sf = squarefree_part(f, &a);
    let mut out = Vec::new();
    for (g, d) in distinct_degree_factors(f, &sf) {
        out.extend(equal_degree_factors(f, &g, d, rng));
    }
    out.sort_by_key(|p| p.len());
    out
}

/// Distinct roots of `a` lying in the field itself.
pub fn roots<F: Field>(f: &F, a: &[F::Elem], rng: &mut dyn RngCore) -> Vec<F::Elem> {
    let a = trim(f, a.to_vec());
    if a.len() < 2 {
        return Vec::new();
    }
    let a = monic(f, &a);
    let xp = x(f);
    let xq = powmod(f, &xp, &f.order(), &a);
    let g = gcd(f, &a, &sub(f, &xq, &xp));
    if g.len() < 2 {
        return Vec::new();
    }
    equal_degree_factors(f, &g, 1, rng)
        .into_iter()
        .map(|lin| f.neg(&lin[0]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ExtField, PrimeField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roots_of_x2_minus_1_over_f7() {
        let f = PrimeField::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut r = roots(&f, &[6, 0, 1], &mut rng);
        r.sort();
        assert_eq!(r, vec![1, 6]);
        assert!(roots(&f, &[1, 0, 1], &mut rng).is_empty());
    }

    #[test]
    fn factors_over_f2_and_extension() {
        let f2 = PrimeField::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // x^4 + x = x (x + 1) (x^2 + x + 1)
        let fac = irreducible_factors(&f2, &[0, 1, 0, 0, 1], &mut rng);
        assert_eq!(fac, vec![vec![0, 1], vec![1, 1], vec![1, 1, 1]]);
        let f4 = ExtField::with_degree(f2, 2).unwrap();
        let p: Vec<Vec<u64>> = [1u64, 1, 1].iter().map(|c| f4.embed(*c)).collect();
        assert_eq!(roots(&f4, &p, &mut rng).len(), 2);
    }

    #[test]
    fn squarefree_handles_pth_powers() {
        let f3 = PrimeField::new(3).unwrap();
        // (x + 1)^3 (x + 2) = x^4 + 2x^3 + ... computed by multiplication
        let a = mul(&f3, &from_roots(&f3, &[2, 2, 2]), &[2, 1]);
        let sf = squarefree_part(&f3, &a);
        assert_eq!(sf, mul(&f3, &[1, 1], &[2, 1]));
    }
}
