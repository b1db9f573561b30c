//! Univariate interpolation, Berlekamp-Welch decoding and sparse multivariate
//! interpolation.

mod dlog;
mod sparse;

pub use dlog::{discrete_log, factor_u64, primitive_root};
pub use sparse::{berlekamp_massey, interpolate_set_multilinear, sparse_interpolate, SparseConfig};

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{self, Matrix};
use crate::upoly::{self, UPoly};

fn check_distinct<F: Field>(xs: &[F::Elem]) -> Result<()> {
    let mut seen = HashSet::with_capacity(xs.len());
    for x in xs {
        if !seen.insert(x) {
            return Err(Error::DuplicateAbscissa);
        }
    }
    Ok(())
}

/// The unique polynomial of degree `< xs.len()` through the points (Newton form).
pub fn interpolate_univariate<F: Field>(f: &F, xs: &[F::Elem], ys: &[F::Elem]) -> Result<UPoly<F>> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch(format!("{} abscissae, {} values", xs.len(), ys.len())));
    }
    if xs.is_empty() {
        return Err(Error::InsufficientPoints { need: 1, got: 0 });
    }
    check_distinct::<F>(xs)?;
    let n = xs.len();
    // divided differences
    let mut coef = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = f.sub(&coef[i], &coef[i - 1]);
            let den = f.sub(&xs[i], &xs[i - j]);
            coef[i] = f.div(&num, &den)?;
        }
    }
    let mut p: UPoly<F> = Vec::new();
    for i in (0..n).rev() {
        p = upoly::mul(f, &p, &[f.neg(&xs[i]), f.one()]);
        p = upoly::add(f, &p, &[coef[i].clone()]);
    }
    Ok(p)
}

/// Interpolate with an explicit degree bound `d`; extra points must agree.
pub fn interpolate_with_bound<F: Field>(f: &F, xs: &[F::Elem], ys: &[F::Elem], d: usize) -> Result<UPoly<F>> {
    if xs.len() < d + 1 {
        return Err(Error::InsufficientPoints { need: d + 1, got: xs.len() });
    }
    check_distinct::<F>(xs)?;
    let p = interpolate_univariate(f, &xs[..d + 1], &ys[..d + 1])?;
    for (x, y) in xs.iter().zip(ys).skip(d + 1) {
        if upoly::eval(f, &p, x) != *y {
            return Err(Error::NoConsistentCodeword);
        }
    }
    Ok(p)
}

/// Decode a degree-`d` polynomial from `m` evaluations with at most `e` errors.
pub fn berlekamp_welch<F: Field>(f: &F, xs: &[F::Elem], ys: &[F::Elem], d: usize, e: usize) -> Result<UPoly<F>> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch(format!("{} abscissae, {} values", xs.len(), ys.len())));
    }
    let m = xs.len();
    if m <= d || m - d <= 2 * e + 1 {
        return Err(Error::PreconditionViolated(format!("m - d > 2e + 1 fails for m={m}, d={d}, e={e}")));
    }
    check_distinct::<F>(xs)?;
    // unknowns: N_0..N_{d+e}, E_0..E_{e-1}; E is monic of degree e
    let nn = d + e + 1;
    let cols = nn + e;
    let mut a = linalg::zeros(f, m, cols);
    let mut rhs = Vec::with_capacity(m);
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        let mut pw = f.one();
        let mut pows = Vec::with_capacity(nn.max(e + 1));
        for _ in 0..nn.max(e + 1) {
            pows.push(pw.clone());
            pw = f.mul(&pw, x);
        }
        for j in 0..nn {
            a.set(i, j, pows[j].clone());
        }
        for j in 0..e {
            a.set(i, nn + j, f.neg(&f.mul(y, &pows[j])));
        }
        rhs.push(f.mul(y, &pows[e]));
    }
    let sol = linalg::solve(f, &a, &rhs).map_err(|_| Error::NoConsistentCodeword)?;
    let n_poly = upoly::trim(f, sol[..nn].to_vec());
    let mut e_poly = sol[nn..].to_vec();
    e_poly.push(f.one());
    let (p, r) = upoly::divrem(f, &n_poly, &e_poly);
    if !r.is_empty() || p.len() > d + 1 {
        return Err(Error::NoConsistentCodeword);
    }
    let agree = xs.iter().zip(ys).filter(|(x, y)| upoly::eval(f, &p, x) == **y).count();
    if agree + e < m {
        return Err(Error::NoConsistentCodeword);
    }
    Ok(p)
}

/// Solve `sum_j c_j r_j^i = a_i` for `i < t` given distinct nonzero `r_j`.
pub fn transposed_vandermonde<F: Field>(f: &F, roots: &[F::Elem], a: &[F::Elem]) -> Result<Vec<F::Elem>> {
    let t = roots.len();
    let lambda = upoly::from_roots(f, roots);
    let dl = upoly::derivative(f, &lambda);
    let mut out = Vec::with_capacity(t);
    for r in roots {
        // Q = lambda / (z - r) by synthetic division
        let mut q = vec![f.zero(); t];
        let mut carry = f.zero();
        for i in (1..=t).rev() {
            carry = f.add(&lambda[i], &f.mul(&carry, r));
            q[i - 1] = carry.clone();
        }
        let num = f.dot(&q, &a[..t]);
        out.push(f.div(&num, &upoly::eval(f, &dl, r))?);
    }
    Ok(out)
}

/// Vandermonde matrix rows `(1, x, ..., x^{d})`.
pub fn vandermonde<F: Field>(f: &F, xs: &[F::Elem], d: usize) -> Matrix<F::Elem> {
    let mut m = linalg::zeros(f, xs.len(), d + 1);
    for (i, x) in xs.iter().enumerate() {
        let mut pw = f.one();
        for j in 0..=d {
            m.set(i, j, pw.clone());
            pw = f.mul(&pw, x);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    #[test]
    fn univariate_examples() {
        let f = PrimeField::new(101).unwrap();
        assert_eq!(interpolate_univariate(&f, &[0, 1, 2], &[1, 3, 9]).unwrap(), vec![1, 0, 2]);
        assert_eq!(interpolate_with_bound(&f, &[0, 1], &[1, 1], 1).unwrap(), vec![1]);
        assert_eq!(
            interpolate_with_bound(&f, &[0, 1], &[1, 1], 2),
            Err(Error::InsufficientPoints { need: 3, got: 2 })
        );
        assert_eq!(interpolate_univariate(&f, &[1, 1], &[1, 2]), Err(Error::DuplicateAbscissa));
    }

    #[test]
    fn berlekamp_welch_examples() {
        let f = PrimeField::new(101).unwrap();
        let xs: Vec<u64> = (0..7).collect();
        let mut ys: Vec<u64> = xs.iter().map(|x| (2 * x + 1) % 101).collect();
        ys[3] = 50;
        assert_eq!(berlekamp_welch(&f, &xs, &ys, 1, 1).unwrap(), vec![1, 2]);
        let err = berlekamp_welch(&f, &xs[..4], &ys[..4], 1, 1);
        assert!(matches!(err, Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn vandermonde_solver() {
        let f = PrimeField::new(101).unwrap();
        let roots = [2u64, 3, 5];
        let c = [7u64, 11, 13];
        let a: Vec<u64> = (0..3u64)
            .map(|i| (0..3).fold(0, |acc, j| (acc + c[j] * f.pow(&roots[j], i)) % 101))
            .collect();
        assert_eq!(transposed_vandermonde(&f, &roots, &a).unwrap(), c.to_vec());
    }
}
