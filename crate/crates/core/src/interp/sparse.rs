use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use super::dlog::{discrete_log, factor_u64, primitive_root};
use super::{transposed_vandermonde, vandermonde};
use crate::error::{Error, Result};
use crate::field::{Field, PrimeField};
use crate::linalg;
use crate::oracle::BlackBoxOracle;
use crate::poly::{SparsePoly, Tensor, VarPartition, DENSE_LIMIT};
use crate::upoly;

#[derive(Debug, Clone)]
pub struct SparseConfig {
    /// Random points used to verify a recovered polynomial.
    pub verify_points: usize,
    /// Attempts with fresh randomness before giving up.
    pub retries: usize,
    /// Largest evaluation grid used by the dense strategy.
    pub grid_limit: u128,
}

impl Default for SparseConfig {
    fn default() -> Self {
        SparseConfig { verify_points: 20, retries: 5, grid_limit: 2_000_000 }
    }
}

/// Connection polynomial `1 + c_1 z + ... + c_L z^L` of the shortest linear
/// recurrence generating `s`, padded to length `L + 1`.
pub fn berlekamp_massey<F: Field>(f: &F, s: &[F::Elem]) -> Vec<F::Elem> {
    let mut c = vec![f.one()];
    let mut b = vec![f.one()];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut bd = f.one();
    for n in 0..s.len() {
        let mut d = s[n].clone();
        for i in 1..=l.min(c.len() - 1) {
            d = f.add(&d, &f.mul(&c[i], &s[n - i]));
        }
        if f.is_zero(&d) {
            m += 1;
            continue;
        }
        let coef = f.div(&d, &bd).expect("nonzero discrepancy base");
        let mut next = c.clone();
        if next.len() < b.len() + m {
            next.resize(b.len() + m, f.zero());
        }
        for (i, bi) in b.iter().enumerate() {
            next[i + m] = f.sub(&next[i + m], &f.mul(&coef, bi));
        }
        if 2 * l <= n {
            b = c;
            l = n + 1 - l;
            bd = d;
            m = 1;
        } else {
            m += 1;
        }
        c = next;
    }
    c.resize(l + 1, f.zero());
    c
}

fn verify<F: Field>(o: &BlackBoxOracle<F>, p: &SparsePoly<F::Elem>, points: usize, rng: &mut dyn RngCore) -> bool {
    let f = o.field();
    (0..points).all(|_| {
        let x = f.random_vec(o.nvars(), rng);
        p.eval(f, &x) == o.eval(&x)
    })
}

fn code_range(e: usize, n: usize) -> u128 {
    let mut r: u128 = 1;
    for _ in 0..n {
        r = r.saturating_mul(e as u128 + 1);
    }
    r
}

/// Recover an explicit sparse polynomial from black-box access.
///
/// `d` bounds the total degree and `t` the number of terms. The per-variable
/// degree bound of the oracle shrinks the monomial code range.
pub fn sparse_interpolate<F: Field>(
    o: &BlackBoxOracle<F>,
    d: usize,
    t: usize,
    cfg: &SparseConfig,
    rng: &mut dyn RngCore,
) -> Result<SparsePoly<F::Elem>> {
    let f = o.field();
    let n = o.nvars();
    let e = o.var_degree().min(d);
    if n == 0 {
        return Ok(SparsePoly::constant(f, 0, o.eval(&[])));
    }
    let grid = code_range(e, n);
    let p = f.characteristic();
    let bt_ok = f.ext_degree() == 1 && grid <= (p - 1) as u128;
    let bt_cost = 2 * t as u128 + cfg.verify_points as u128;
    let use_grid = grid <= cfg.grid_limit && (!bt_ok || grid <= 32 * bt_cost);
    if !use_grid && !bt_ok {
        return Err(Error::FieldTooSmall(format!(
            "monomial code range {grid} exceeds the multiplicative group and the grid limit"
        )));
    }
    if use_grid && f.order_u128() <= e as u128 {
        return Err(Error::FieldTooSmall(format!("need {} distinct nodes", e + 1)));
    }
    for _ in 0..cfg.retries.max(1) {
        let cand = if use_grid {
            grid_interpolate(o, e, d)
        } else {
            match ben_or_tiwari(o, e, t, rng) {
                Ok(c) => c,
                Err(Error::FieldTooSmall(s)) => return Err(Error::FieldTooSmall(s)),
                Err(_) => continue,
            }
        };
        if cand.num_terms() <= t && verify(o, &cand, cfg.verify_points, rng) {
            return Ok(cand);
        }
        if use_grid {
            break;
        }
    }
    Err(Error::SparsityExceeded(t))
}

fn ben_or_tiwari<F: Field>(
    o: &BlackBoxOracle<F>,
    e: usize,
    t: usize,
    rng: &mut dyn RngCore,
) -> Result<SparsePoly<F::Elem>> {
    let f = o.field();
    let n = o.nvars();
    let fp = PrimeField::new(f.characteristic())?;
    let order = fp.p() - 1;
    let fac = factor_u64(order);
    let g0 = primitive_root(&fp, &fac);
    // a random generator: g0^s with s coprime to p - 1
    let s = loop {
        let s = rng.gen_range(1..order.max(2));
        if fac.iter().all(|(q, _)| s % q != 0) {
            break s;
        }
    };
    let g = fp.pow(&g0, s);
    let base = e as u64 + 1;
    let mut omegas = Vec::with_capacity(n);
    let mut w = g;
    for _ in 0..n {
        omegas.push(w);
        w = fp.pow(&w, base);
    }
    let to_f = |x: u64| f.from_u64(x);
    let mut seq = Vec::with_capacity(2 * t);
    let mut point: Vec<u64> = vec![1; n];
    for _ in 0..2 * t {
        let x: Vec<F::Elem> = point.iter().map(|&v| to_f(v)).collect();
        seq.push(o.eval(&x));
        for (pj, wj) in point.iter_mut().zip(&omegas) {
            *pj = fp.mul(pj, wj);
        }
    }
    let conn = berlekamp_massey(f, &seq);
    let l = conn.len() - 1;
    if l == 0 {
        return Ok(SparsePoly::zero(n));
    }
    let lambda: Vec<F::Elem> = conn.iter().rev().cloned().collect();
    let roots = upoly::roots(f, &lambda, rng);
    if roots.len() != l {
        return Err(Error::SparsityExceeded(t));
    }
    let mut monos = Vec::with_capacity(l);
    for r in &roots {
        let rr = f.as_prime_residue(r).expect("prime field");
        let code = discrete_log(&fp, g, rr, &fac)?;
        let mut c = code;
        let mut m = vec![0u32; n];
        for mj in m.iter_mut() {
            *mj = (c % base) as u32;
            c /= base;
        }
        if c != 0 {
            return Err(Error::SparsityExceeded(t));
        }
        monos.push(m);
    }
    let coeffs = transposed_vandermonde(f, &roots, &seq)?;
    Ok(SparsePoly::from_terms(f, n, monos.into_iter().zip(coeffs).collect()))
}

/// Tensor-grid interpolation with `e + 1` nodes per variable.
fn grid_interpolate<F: Field>(o: &BlackBoxOracle<F>, e: usize, d: usize) -> SparsePoly<F::Elem> {
    let f = o.field();
    let n = o.nvars();
    let k = e + 1;
    let nodes: Vec<F::Elem> = (0..k as u64).map(|i| f.nth_element(i)).collect();
    let total = k.pow(n as u32);
    let mut vals = Vec::with_capacity(total);
    let mut x = vec![nodes[0].clone(); n];
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        vals.push(o.eval(&x));
        for j in (0..n).rev() {
            idx[j] += 1;
            if idx[j] < k {
                x[j] = nodes[idx[j]].clone();
                break;
            }
            idx[j] = 0;
            x[j] = nodes[0].clone();
        }
    }
    let vinv = linalg::inverse(f, &vandermonde(f, &nodes, e)).expect("distinct nodes");
    // axis j has stride k^(n-1-j)
    for j in 0..n {
        let stride = k.pow((n - 1 - j) as u32);
        let mut line = vec![f.zero(); k];
        for start in 0..total {
            if (start / stride) % k != 0 {
                continue;
            }
            for (i, li) in line.iter_mut().enumerate() {
                *li = vals[start + i * stride].clone();
            }
            let c = linalg::mat_vec(f, &vinv, &line);
            for (i, ci) in c.into_iter().enumerate() {
                vals[start + i * stride] = ci;
            }
        }
    }
    let mut terms = Vec::new();
    for (flat, v) in vals.into_iter().enumerate() {
        if f.is_zero(&v) {
            continue;
        }
        let mut m = vec![0u32; n];
        let mut r = flat;
        for j in (0..n).rev() {
            m[j] = (r % k) as u32;
            r /= k;
        }
        if m.iter().sum::<u32>() as usize <= d {
            terms.push((m, v));
        }
    }
    SparsePoly::from_terms(f, n, terms)
}

/// Read the coefficient tensor of a set-multilinear polynomial by evaluating
/// at tuples of standard basis vectors, then verify at random points.
pub fn interpolate_set_multilinear<F: Field>(
    o: &BlackBoxOracle<F>,
    part: &VarPartition,
    cfg: &SparseConfig,
    rng: &mut dyn RngCore,
) -> Result<Tensor<F::Elem>> {
    let f = o.field();
    let shape = part.widths();
    let total: u128 = shape.iter().map(|&w| w as u128).product();
    if total > DENSE_LIMIT {
        return Err(Error::TensorTooLarge(total));
    }
    let mut entries = BTreeMap::new();
    for idx in crate::poly::multi_indices(&shape) {
        let mut x = vec![f.zero(); o.nvars()];
        for (j, &i) in idx.iter().enumerate() {
            x[part.parts[j][i]] = f.one();
        }
        let v = o.eval(&x);
        if !f.is_zero(&v) {
            entries.insert(idx, v);
        }
    }
    let t = Tensor::sparse(shape, entries);
    let (check, _) = crate::poly::tensor_to_oracle(f, &t);
    let owner_perm: Vec<usize> = part.parts.iter().flatten().copied().collect();
    for _ in 0..cfg.verify_points {
        let x = f.random_vec(o.nvars(), rng);
        let y: Vec<F::Elem> = owner_perm.iter().map(|&v| x[v].clone()).collect();
        if check.eval(&y) != o.eval(&x) {
            return Err(Error::VerificationFailed("polynomial is not set-multilinear in the given partition".into()));
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::MERSENNE_61;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bm_finds_fibonacci() {
        let f = PrimeField::new(101).unwrap();
        let s = [1u64, 1, 2, 3, 5, 8, 13, 21];
        // s_n - s_{n-1} - s_{n-2} = 0
        assert_eq!(berlekamp_massey(&f, &s), vec![1, 100, 100]);
    }

    #[test]
    fn recovers_planted_terms() {
        let f = PrimeField::new(MERSENNE_61).unwrap();
        let p = SparsePoly::from_terms(&f, 3, vec![(vec![2, 1, 0], 3), (vec![0, 0, 1], 5)]);
        let o = BlackBoxOracle::from_poly(f, p.clone()).with_var_degree(3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = SparseConfig { grid_limit: 0, ..Default::default() };
        assert_eq!(sparse_interpolate(&o, 3, 4, &cfg, &mut rng).unwrap(), p);
        assert_eq!(sparse_interpolate(&o, 3, 4, &SparseConfig::default(), &mut rng).unwrap(), p);
        let zero = BlackBoxOracle::from_poly(f, SparsePoly::zero(3));
        assert!(sparse_interpolate(&zero, 3, 4, &cfg, &mut rng).unwrap().is_zero());
    }
}
