//! Essential variables and black-box variable reduction.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{self, poly_dependence, Matrix};
use crate::oracle::BlackBoxOracle;
use crate::pit::{is_zero, PitConfig};

#[derive(Debug, Clone)]
pub struct VarRedResult<F: Field> {
    /// Number of essential variables.
    pub m: usize,
    /// Invertible change of coordinates; columns `m..n` span the derivative relations.
    pub a: Matrix<F::Elem>,
    /// `x -> f(A x)`, independent of `x_m, ..., x_{n-1}`.
    pub reduced: BlackBoxOracle<F>,
}

impl<F: Field> VarRedResult<F> {
    /// The reduced oracle on its first `m` variables only.
    pub fn compact(&self) -> BlackBoxOracle<F> {
        let f = self.reduced.field();
        let n = self.reduced.nvars();
        let fixed: Vec<Option<F::Elem>> = (0..n).map(|i| if i < self.m { None } else { Some(f.zero()) }).collect();
        self.reduced.restrict(&fixed)
    }
}

/// Find `A` so that `f(A x)` depends on the fewest variables.
pub fn reduce_variables<F: Field>(o: &BlackBoxOracle<F>, rng: &mut dyn RngCore) -> Result<VarRedResult<F>> {
    let f = o.field().clone();
    let n = o.nvars();
    let d = o.degree_bound();
    if f.characteristic() <= d as u64 {
        return Err(Error::CharTooSmall { p: f.characteristic(), d });
    }
    let derivs = (0..n).map(|i| o.derivative_oracle(i)).collect::<Result<Vec<_>>>()?;
    let cfg = PitConfig { epsilon_log2: 20, ..Default::default() };
    for _ in 0..5 {
        let ker = poly_dependence(&derivs, rng)?;
        let mut cols: Vec<Vec<F::Elem>> = Vec::new();
        let mut chosen = Vec::new();
        for j in 0..n {
            let mut e = vec![f.zero(); n];
            e[j] = f.one();
            let mut trial = ker.clone();
            trial.extend(chosen.iter().cloned());
            trial.push(e.clone());
            if linalg::rank(&f, &Matrix::from_rows(trial)?) == ker.len() + chosen.len() + 1 {
                chosen.push(e);
            }
        }
        let m = chosen.len();
        cols.extend(chosen);
        cols.extend(ker);
        let a = Matrix::from_rows(cols)?.transpose();
        let reduced = o.compose_linear(&a)?;
        let ok = (m..n).all(|i| match reduced.derivative_oracle(i) {
            Ok(di) => is_zero(&di, &cfg, rng).is_zero(),
            Err(_) => false,
        });
        if ok {
            return Ok(VarRedResult { m, a, reduced });
        }
    }
    Err(Error::VerificationFailed("reduced oracle still depends on eliminated variables".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::poly::SparsePoly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_essential_variables() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // (x0 + x1)^2
        let p = SparsePoly::from_terms(&f, 2, vec![(vec![2, 0], 1), (vec![1, 1], 2), (vec![0, 2], 1)]);
        let r = reduce_variables(&BlackBoxOracle::from_poly(f, p), &mut rng).unwrap();
        assert_eq!(r.m, 1);
        let q = SparsePoly::from_terms(&f, 3, vec![(vec![1, 1, 0], 1), (vec![0, 0, 1], 1)]);
        assert_eq!(reduce_variables(&BlackBoxOracle::from_poly(f, q), &mut rng).unwrap().m, 3);
        let x = SparsePoly::var(&f, 1, 0);
        assert_eq!(reduce_variables(&BlackBoxOracle::from_poly(f, x), &mut rng).unwrap().m, 1);
    }
}
