//! Randomized identity testing, simple-part extraction and factoring of
//! multilinear black boxes.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::{Field, MERSENNE_61};
use crate::oracle::BlackBoxOracle;
use crate::poly::{DepthThreeCircuit, LinearForm};

#[derive(Debug, Clone, PartialEq)]
pub struct PitConfig {
    /// Size of the sampling set; `0` means the whole field, capped at `2^61 - 1`.
    pub sample_set_size: u128,
    /// Fixed number of rounds; `0` derives it from `epsilon_log2`.
    pub rounds: usize,
    /// Target failure probability `2^-epsilon_log2`.
    pub epsilon_log2: u32,
}

impl Default for PitConfig {
    fn default() -> Self {
        PitConfig { sample_set_size: 0, rounds: 0, epsilon_log2: 40 }
    }
}

impl PitConfig {
    /// Rounds needed so that `(d / |S|)^rounds <= 2^-epsilon_log2`.
    pub fn rounds_for<F: Field>(&self, f: &F, d: usize) -> usize {
        if self.rounds > 0 {
            return self.rounds;
        }
        let s = self.set_size(f) as f64;
        let d = d.max(1) as f64;
        if d >= s {
            log::warn!("sampling set of size {s} does not exceed degree {d}; identity test is heuristic");
            return 4 * self.epsilon_log2 as usize;
        }
        let bits = (s / d).log2();
        ((self.epsilon_log2 as f64) / bits).ceil().max(1.0) as usize
    }

    fn set_size<F: Field>(&self, f: &F) -> u128 {
        let cap = f.order_u128().min(MERSENNE_61 as u128);
        if self.sample_set_size == 0 {
            cap
        } else {
            self.sample_set_size.min(cap)
        }
    }

    fn sample<F: Field>(&self, f: &F, n: usize, rng: &mut dyn RngCore) -> Vec<F::Elem> {
        let s = self.set_size(f);
        if s >= f.order_u128() {
            return f.random_vec(n, rng);
        }
        (0..n).map(|_| f.nth_element((rng.next_u64() as u128 % s) as u64)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<E> {
    Zero,
    /// A point where the polynomial does not vanish.
    NonZero(Vec<E>),
}

impl<E> Verdict<E> {
    pub fn is_zero(&self) -> bool {
        matches!(self, Verdict::Zero)
    }
}

pub fn is_zero<F: Field>(o: &BlackBoxOracle<F>, cfg: &PitConfig, rng: &mut dyn RngCore) -> Verdict<F::Elem> {
    let f = o.field();
    for _ in 0..cfg.rounds_for(f, o.degree_bound()) {
        let x = cfg.sample(f, o.nvars(), rng);
        if !f.is_zero(&o.eval(&x)) {
            return Verdict::NonZero(x);
        }
    }
    Verdict::Zero
}

/// Identity test of an oracle against an explicit circuit.
pub fn equal<F: Field>(
    o: &BlackBoxOracle<F>,
    c: &DepthThreeCircuit<F::Elem>,
    cfg: &PitConfig,
    rng: &mut dyn RngCore,
) -> Verdict<F::Elem> {
    let co = BlackBoxOracle::from_circuit(o.field().clone(), c.clone());
    is_zero(&o.sub(&co), cfg, rng)
}

/// Identity test of two oracles on the same domain.
pub fn oracles_equal<F: Field>(
    a: &BlackBoxOracle<F>,
    b: &BlackBoxOracle<F>,
    cfg: &PitConfig,
    rng: &mut dyn RngCore,
) -> bool {
    is_zero(&a.sub(b), cfg, rng).is_zero()
}

/// An irreducible factor of a multilinear polynomial.
#[derive(Debug, Clone)]
pub struct Factor<F: Field> {
    pub support: Vec<usize>,
    pub oracle: BlackBoxOracle<F>,
}

fn find(uf: &mut [usize], mut i: usize) -> usize {
    while uf[i] != i {
        uf[i] = uf[uf[i]];
        i = uf[i];
    }
    i
}

/// Split a multilinear polynomial into variable-disjoint irreducible factors.
///
/// Variables `i, j` share a factor iff `f(p) f(p^ij) - f(p^i) f(p^j)` is
/// nonzero, where `p^i` changes coordinate `i` of a random base point.
pub fn factor_multilinear<F: Field>(
    o: &BlackBoxOracle<F>,
    cfg: &PitConfig,
    rng: &mut dyn RngCore,
) -> Result<Vec<Factor<F>>> {
    let f = o.field().clone();
    let n = o.nvars();
    let (p, fp) = nonzero_point(o, cfg, rng)?;
    let rounds = cfg.rounds_for(&f, 2).max(1);
    let mut live = vec![false; n];
    let mut uf: Vec<usize> = (0..n).collect();
    let mut base = p.clone();
    let mut fbase = fp.clone();
    for round in 0..rounds {
        if round > 0 {
            let (q, fq) = nonzero_point(o, cfg, rng)?;
            base = q;
            fbase = fq;
        }
        let alt: Vec<F::Elem> = (0..n).map(|_| f.random(rng)).collect();
        let vi: Vec<F::Elem> = (0..n)
            .map(|i| {
                let mut x = base.clone();
                x[i] = alt[i].clone();
                o.eval(&x)
            })
            .collect();
        for i in 0..n {
            if vi[i] != fbase && base[i] != alt[i] {
                live[i] = true;
            }
        }
        for i in 0..n {
            if !live[i] {
                continue;
            }
            for j in i + 1..n {
                if !live[j] || find(&mut uf, i) == find(&mut uf, j) {
                    continue;
                }
                let mut x = base.clone();
                x[i] = alt[i].clone();
                x[j] = alt[j].clone();
                let lhs = f.mul(&fbase, &o.eval(&x));
                let rhs = f.mul(&vi[i], &vi[j]);
                if lhs != rhs {
                    let (a, b) = (find(&mut uf, i), find(&mut uf, j));
                    uf[a] = b;
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        if !live[i] {
            continue;
        }
        let r = find(&mut uf, i);
        match root_of[r] {
            Some(b) => blocks[b].push(i),
            None => {
                root_of[r] = Some(blocks.len());
                blocks.push(vec![i]);
            }
        }
    }
    if blocks.is_empty() {
        let c = fp.clone();
        let oc = BlackBoxOracle::new(f.clone(), n, 0, "factor", move |_: &[F::Elem]| c.clone());
        return Ok(vec![Factor { support: Vec::new(), oracle: oc }]);
    }
    let inv = f.inv(&fp)?;
    let nb = blocks.len();
    let mut out = Vec::with_capacity(nb);
    for (bi, block) in blocks.into_iter().enumerate() {
        let scale = if bi + 1 == nb { f.one() } else { inv.clone() };
        let template = p.clone();
        let sup = block.clone();
        let inner = o.clone();
        let fc = f.clone();
        let oc = BlackBoxOracle::new(f.clone(), n, block.len().min(o.degree_bound()), "factor", move |x: &[F::Elem]| {
            let mut y = template.clone();
            for &v in &sup {
                y[v] = x[v].clone();
            }
            fc.mul(&inner.eval(&y), &scale)
        })
        .with_var_degree(1);
        out.push(Factor { support: block, oracle: oc });
    }
    Ok(out)
}

fn nonzero_point<F: Field>(
    o: &BlackBoxOracle<F>,
    cfg: &PitConfig,
    rng: &mut dyn RngCore,
) -> Result<(Vec<F::Elem>, F::Elem)> {
    let f = o.field();
    for _ in 0..cfg.rounds_for(f, o.degree_bound()).max(8) {
        let x = f.random_vec(o.nvars(), rng);
        let v = o.eval(&x);
        if !f.is_zero(&v) {
            return Ok((x, v));
        }
    }
    Err(Error::ZeroInput)
}

/// Learn an oracle as an affine form from `0` and the standard basis vectors
/// on `support`, then identity-test the difference.
pub fn learn_linear<F: Field>(
    o: &BlackBoxOracle<F>,
    support: &[usize],
    cfg: &PitConfig,
    rng: &mut dyn RngCore,
) -> Option<LinearForm<F::Elem>> {
    let f = o.field();
    let n = o.nvars();
    let zero = vec![f.zero(); n];
    let c0 = o.eval(&zero);
    let mut l = LinearForm::constant_form(f, n, c0.clone());
    for &i in support {
        let mut x = zero.clone();
        x[i] = f.one();
        l.coeffs[i] = f.sub(&o.eval(&x), &c0);
    }
    let fc = f.clone();
    let lc = l.clone();
    let lo = BlackBoxOracle::new(f.clone(), n, 1, "linear", move |x: &[F::Elem]| lc.eval(&fc, x));
    if is_zero(&o.sub(&lo).with_degree(o.degree_bound().max(1)), cfg, rng).is_zero() {
        Some(l)
    } else {
        None
    }
}

/// Linear factors `L_1..L_r` and the simple part of a multilinear polynomial.
#[derive(Debug, Clone)]
pub struct SimplePart<F: Field> {
    pub linear: Vec<LinearForm<F::Elem>>,
    pub simple: BlackBoxOracle<F>,
}

pub fn extract_simple<F: Field>(
    o: &BlackBoxOracle<F>,
    cfg: &PitConfig,
    rng: &mut dyn RngCore,
) -> Result<SimplePart<F>> {
    let f = o.field().clone();
    let n = o.nvars();
    let factors = factor_multilinear(o, cfg, rng)?;
    let mut linear = Vec::new();
    let mut lin_vars = Vec::new();
    for fac in &factors {
        if fac.support.is_empty() {
            continue;
        }
        if let Some(l) = learn_linear(&fac.oracle, &fac.support, cfg, rng) {
            linear.push(l.normalized(&f).1);
            lin_vars.extend(fac.support.iter().copied());
        }
    }
    if linear.is_empty() {
        return Ok(SimplePart { linear, simple: o.clone() });
    }
    let a = loop {
        let a = f.random_vec(n, rng);
        if linear.iter().all(|l| !f.is_zero(&l.eval(&f, &a))) {
            break a;
        }
    };
    let denom = linear.iter().fold(f.one(), |acc, l| f.mul(&acc, &l.eval(&f, &a)));
    let scale = f.inv(&denom)?;
    let inner = o.clone();
    let fc = f.clone();
    let deg = o.degree_bound().saturating_sub(linear.len());
    let simple = BlackBoxOracle::new(f.clone(), n, deg, "simple-part", move |x: &[F::Elem]| {
        let mut y = x.to_vec();
        for &v in &lin_vars {
            y[v] = a[v].clone();
        }
        fc.mul(&inner.eval(&y), &scale)
    })
    .with_var_degree(1);
    Ok(SimplePart { linear, simple })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::poly::SparsePoly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn poly(f: &PrimeField, n: usize, terms: &[(&[u32], u64)]) -> SparsePoly<u64> {
        SparsePoly::from_terms(f, n, terms.iter().map(|(m, c)| (m.to_vec(), *c)).collect())
    }

    #[test]
    fn zero_and_nonzero() {
        let f = PrimeField::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = PitConfig::default();
        let z = BlackBoxOracle::from_poly(f, SparsePoly::zero(2));
        assert!(is_zero(&z, &cfg, &mut rng).is_zero());
        let x = BlackBoxOracle::from_poly(f, poly(&f, 1, &[(&[1], 1)]));
        match is_zero(&x, &cfg, &mut rng) {
            Verdict::NonZero(w) => assert_ne!(x.eval(&w), 0),
            Verdict::Zero => panic!("x is not zero"),
        }
    }

    #[test]
    fn factors_split_by_variables() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = PitConfig::default();
        // (x0 + x1)(x2 + x3)
        let p = poly(&f, 4, &[(&[1, 0, 1, 0], 1), (&[1, 0, 0, 1], 1), (&[0, 1, 1, 0], 1), (&[0, 1, 0, 1], 1)]);
        let o = BlackBoxOracle::from_poly(f, p);
        let fs = factor_multilinear(&o, &cfg, &mut rng).unwrap();
        let sup: Vec<_> = fs.iter().map(|x| x.support.clone()).collect();
        assert_eq!(sup, vec![vec![0, 1], vec![2, 3]]);
        let x = f.random_vec(4, &mut rng);
        assert_eq!(f.mul(&fs[0].oracle.eval(&x), &fs[1].oracle.eval(&x)), o.eval(&x));
        // x0 x1 + x2 is irreducible
        let q = BlackBoxOracle::from_poly(f, poly(&f, 3, &[(&[1, 1, 0], 1), (&[0, 0, 1], 1)]));
        assert_eq!(factor_multilinear(&q, &cfg, &mut rng).unwrap().len(), 1);
    }

    #[test]
    fn simple_part_drops_linear_factor() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = PitConfig::default();
        // x0 (x1 x2 + x3)
        let p = poly(&f, 4, &[(&[1, 1, 1, 0], 1), (&[1, 0, 0, 1], 1)]);
        let sp = extract_simple(&BlackBoxOracle::from_poly(f, p), &cfg, &mut rng).unwrap();
        assert_eq!(sp.linear.len(), 1);
        assert_eq!(sp.linear[0].support(&f), vec![0]);
        let want = BlackBoxOracle::from_poly(f, poly(&f, 4, &[(&[0, 1, 1, 0], 1), (&[0, 0, 0, 1], 1)]));
        assert!(oracles_equal(&sp.simple, &want, &cfg, &mut rng));
    }
}
