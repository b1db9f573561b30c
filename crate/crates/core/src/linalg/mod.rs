//! Dense linear algebra over a `Field`.

mod matrix;

pub use matrix::*;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::oracle::BlackBoxOracle;

/// Basis of `{c : sum c_i f_i = 0}` for black-box polynomials on a common domain.
///
/// Rows are added at random points until the rank stalls for two samples, and
/// each candidate relation is then checked on fresh points.
pub fn poly_dependence<F: Field>(fs: &[BlackBoxOracle<F>], rng: &mut dyn RngCore) -> Result<Vec<Vec<F::Elem>>> {
    let Some(first) = fs.first() else {
        return Ok(Vec::new());
    };
    let f = first.field().clone();
    let n = first.nvars();
    if fs.iter().any(|o| o.nvars() != n) {
        return Err(Error::ShapeMismatch("oracles on different numbers of variables".into()));
    }
    let k = fs.len();
    for _ in 0..5 {
        let mut rows: Vec<Vec<F::Elem>> = Vec::new();
        let mut r = 0;
        let mut stall = 0;
        while stall < 2 && rows.len() < k + 2 {
            let x = f.random_vec(n, rng);
            rows.push(fs.iter().map(|o| o.eval(&x)).collect());
            let nr = rank(&f, &Matrix::from_rows(rows.clone())?);
            if nr == r {
                stall += 1;
            } else {
                r = nr;
                stall = 0;
            }
        }
        let ker = kernel(&f, &Matrix::from_rows(rows)?);
        let ok = (0..30).all(|_| {
            let x = f.random_vec(n, rng);
            let v: Vec<F::Elem> = fs.iter().map(|o| o.eval(&x)).collect();
            ker.iter().all(|c| f.is_zero(&f.dot(c, &v)))
        });
        if ok {
            return Ok(ker);
        }
    }
    Err(Error::VerificationFailed("linear dependence did not verify".into()))
}
