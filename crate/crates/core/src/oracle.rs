//! Black-box access to polynomials, with query accounting and derived oracles.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::interp::interpolate_univariate;
use crate::linalg::{self, Matrix};
use crate::poly::{DepthThreeCircuit, SparsePoly};
use crate::upoly;

pub type EvalFn<E> = Arc<dyn Fn(&[E]) -> E + Send + Sync>;

/// Evaluation access to an `nvars`-variate polynomial of total degree at most
/// `degree_bound`. Every call to [`BlackBoxOracle::eval`] is counted.
#[derive(Clone)]
pub struct BlackBoxOracle<F: Field> {
    field: F,
    nvars: usize,
    degree_bound: usize,
    var_degree: Option<usize>,
    provenance: String,
    func: EvalFn<F::Elem>,
    counter: Arc<AtomicU64>,
}

impl<F: Field> fmt::Debug for BlackBoxOracle<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBoxOracle")
            .field("nvars", &self.nvars)
            .field("degree_bound", &self.degree_bound)
            .field("var_degree", &self.var_degree)
            .field("provenance", &self.provenance)
            .field("queries", &self.queries())
            .finish()
    }
}

/// `(b_1, ..., b_i, a_{i+1}, ..., a_n)`.
pub fn hybrid<E: Clone>(a: &[E], b: &[E], i: usize) -> Vec<E> {
    b[..i].iter().chain(&a[i..]).cloned().collect()
}

impl<F: Field> BlackBoxOracle<F> {
    pub fn new<G>(field: F, nvars: usize, degree_bound: usize, provenance: &str, func: G) -> Self
    where
        G: Fn(&[F::Elem]) -> F::Elem + Send + Sync + 'static,
    {
        BlackBoxOracle {
            field,
            nvars,
            degree_bound,
            var_degree: None,
            provenance: provenance.to_string(),
            func: Arc::new(func),
            counter: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Declare a bound on the degree in each single variable.
    pub fn with_var_degree(mut self, e: usize) -> Self {
        self.var_degree = Some(e);
        self
    }

    pub fn with_provenance(mut self, p: &str) -> Self {
        self.provenance = p.to_string();
        self
    }

    pub fn from_poly(field: F, p: SparsePoly<F::Elem>) -> Self {
        let n = p.nvars;
        let d = p.degree();
        let e = (0..n).map(|i| p.var_degree(i)).max().unwrap_or(0);
        let fc = field.clone();
        BlackBoxOracle::new(field, n, d, "poly", move |x: &[F::Elem]| p.eval(&fc, x)).with_var_degree(e)
    }

    pub fn from_circuit(field: F, c: DepthThreeCircuit<F::Elem>) -> Self {
        let n = c.nvars;
        let d = c.degree(&field);
        let ml = c.is_multilinear(&field);
        let fc = field.clone();
        let o = BlackBoxOracle::new(field, n, d, "circuit", move |x: &[F::Elem]| c.eval(&fc, x));
        if ml {
            o.with_var_degree(1)
        } else {
            o
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Bound on the degree in any single variable.
    pub fn var_degree(&self) -> usize {
        self.var_degree.unwrap_or(self.degree_bound).min(self.degree_bound)
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn queries(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    pub fn eval(&self, x: &[F::Elem]) -> F::Elem {
        debug_assert_eq!(x.len(), self.nvars, "oracle {} arity", self.provenance);
        self.counter.fetch_add(1, Ordering::Relaxed);
        (self.func)(x)
    }

    /// Fix the variables with `Some` values; the result ranges over the free
    /// variables in their original order.
    pub fn restrict(&self, fixed: &[Option<F::Elem>]) -> Self {
        assert_eq!(fixed.len(), self.nvars);
        let free: Vec<usize> = (0..self.nvars).filter(|&i| fixed[i].is_none()).collect();
        let template: Vec<F::Elem> = fixed.iter().map(|v| v.clone().unwrap_or_else(|| self.field.zero())).collect();
        let parent = self.clone();
        let nfree = free.len();
        let mut o = BlackBoxOracle::new(self.field.clone(), nfree, self.degree_bound, "restrict", move |y: &[F::Elem]| {
            let mut x = template.clone();
            for (k, &i) in free.iter().enumerate() {
                x[i] = y[k].clone();
            }
            parent.eval(&x)
        });
        o.var_degree = self.var_degree;
        o
    }

    /// The restriction to `base + span(e_i : i in coords)`, over `coords` in order.
    pub fn coordinate_subspace(&self, coords: &[usize], base: &[F::Elem]) -> Self {
        let mut fixed: Vec<Option<F::Elem>> = base.iter().cloned().map(Some).collect();
        for &i in coords {
            fixed[i] = None;
        }
        let mut sorted = coords.to_vec();
        sorted.sort_unstable();
        let r = self.restrict(&fixed);
        if sorted == coords {
            return r;
        }
        // reorder the free variables to follow `coords`
        let perm: Vec<usize> = coords.iter().map(|c| sorted.iter().position(|s| s == c).unwrap()).collect();
        let m = coords.len();
        let mut o = BlackBoxOracle::new(self.field.clone(), m, self.degree_bound, "subspace", move |y: &[F::Elem]| {
            let mut z = y.to_vec();
            for (k, &p) in perm.iter().enumerate() {
                z[p] = y[k].clone();
            }
            r.eval(&z)
        });
        o.var_degree = self.var_degree;
        o
    }

    /// `g(y) = f(A y + b)` for an `n x m` matrix `A`.
    pub fn affine(&self, a: &Matrix<F::Elem>, b: &[F::Elem]) -> Self {
        assert_eq!(a.rows, self.nvars);
        let parent = self.clone();
        let a = a.clone();
        let b = b.to_vec();
        let fc = self.field.clone();
        BlackBoxOracle::new(self.field.clone(), a.cols, self.degree_bound, "affine", move |y: &[F::Elem]| {
            let mut x = linalg::mat_vec(&fc, &a, y);
            for (xi, bi) in x.iter_mut().zip(&b) {
                *xi = fc.add(xi, bi);
            }
            parent.eval(&x)
        })
    }

    /// `g(y) = f(A y)` for invertible `A`.
    pub fn compose_linear(&self, a: &Matrix<F::Elem>) -> Result<Self> {
        if a.rows != self.nvars || a.cols != self.nvars {
            return Err(Error::ShapeMismatch(format!("expected {0}x{0} matrix", self.nvars)));
        }
        if linalg::rank(&self.field, a) < self.nvars {
            return Err(Error::Singular);
        }
        let zero = vec![self.field.zero(); self.nvars];
        Ok(self.affine(a, &zero).with_provenance("compose_linear"))
    }

    /// `g(t) = f((1 - t) a + t b)`.
    pub fn line_restrict(&self, a: &[F::Elem], b: &[F::Elem]) -> Self {
        let parent = self.clone();
        let a = a.to_vec();
        let b = b.to_vec();
        let fc = self.field.clone();
        BlackBoxOracle::new(self.field.clone(), 1, self.degree_bound, "line", move |t: &[F::Elem]| {
            let s = fc.sub(&fc.one(), &t[0]);
            let x: Vec<F::Elem> = a.iter().zip(&b).map(|(ai, bi)| fc.add(&fc.mul(&s, ai), &fc.mul(&t[0], bi))).collect();
            parent.eval(&x)
        })
    }

    /// `∂f/∂x_i` by interpolation along the `x_i` axis.
    pub fn derivative_oracle(&self, i: usize) -> Result<Self> {
        let e = self.var_degree();
        let p = self.field.characteristic();
        if p <= e as u64 {
            return Err(Error::CharTooSmall { p, d: e });
        }
        let parent = self.clone();
        let fc = self.field.clone();
        let nodes: Vec<F::Elem> = (0..=e as u64).map(|t| fc.nth_element(t)).collect();
        let mut o = BlackBoxOracle::new(
            self.field.clone(),
            self.nvars,
            self.degree_bound.saturating_sub(1),
            "derivative",
            move |x: &[F::Elem]| {
                let mut y = x.to_vec();
                let vals: Vec<F::Elem> = nodes
                    .iter()
                    .map(|t| {
                        y[i] = t.clone();
                        parent.eval(&y)
                    })
                    .collect();
                let g = interpolate_univariate(&fc, &nodes, &vals).expect("distinct nodes");
                upoly::eval(&fc, &upoly::derivative(&fc, &g), &x[i])
            },
        );
        o.var_degree = self.var_degree;
        Ok(o)
    }

    /// `f - g`.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let (a, b) = (self.clone(), other.clone());
        let fc = self.field.clone();
        let mut o = BlackBoxOracle::new(
            self.field.clone(),
            self.nvars,
            self.degree_bound.max(other.degree_bound),
            "difference",
            move |x: &[F::Elem]| fc.sub(&a.eval(x), &b.eval(x)),
        );
        if let (Some(x), Some(y)) = (self.var_degree, other.var_degree) {
            o.var_degree = Some(x.max(y));
        }
        o
    }

    /// `c * f`.
    pub fn scale(&self, c: &F::Elem) -> Self {
        let a = self.clone();
        let c = c.clone();
        let fc = self.field.clone();
        let mut o = BlackBoxOracle::new(self.field.clone(), self.nvars, self.degree_bound, "scale", move |x: &[F::Elem]| {
            fc.mul(&c, &a.eval(x))
        });
        o.var_degree = self.var_degree;
        o
    }

    /// Replace the declared degree bounds.
    pub fn with_degree(mut self, d: usize) -> Self {
        self.degree_bound = d;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::poly::SparsePoly;

    fn xy_plus_z(f: &PrimeField) -> BlackBoxOracle<PrimeField> {
        let p = SparsePoly::from_terms(f, 3, vec![(vec![1, 1, 0], 1), (vec![0, 0, 2], 3)]);
        BlackBoxOracle::from_poly(*f, p)
    }

    #[test]
    fn counts_queries() {
        let f = PrimeField::new(101).unwrap();
        let o = xy_plus_z(&f);
        o.eval(&[1, 2, 3]);
        o.eval(&[1, 2, 3]);
        assert_eq!(o.queries(), 2);
    }

    #[test]
    fn derivative_matches_symbolic() {
        let f = PrimeField::new(101).unwrap();
        let o = xy_plus_z(&f);
        let d = o.derivative_oracle(2).unwrap();
        assert_eq!(d.eval(&[4, 5, 7]), 42);
        let small = PrimeField::new(2).unwrap();
        let o2 = xy_plus_z(&small);
        assert!(matches!(o2.derivative_oracle(0), Err(Error::CharTooSmall { .. })));
    }

    #[test]
    fn restrictions_and_lines() {
        let f = PrimeField::new(101).unwrap();
        let o = xy_plus_z(&f);
        let r = o.restrict(&[Some(2), None, None]);
        assert_eq!(r.eval(&[5, 1]), 13);
        let s = o.coordinate_subspace(&[2, 0], &[0, 3, 0]);
        assert_eq!(s.eval(&[1, 2]), 9);
        let l = o.line_restrict(&[0, 0, 0], &[1, 1, 1]);
        assert_eq!(l.eval(&[2]), 16);
        assert_eq!(hybrid(&[1, 2, 3], &[7, 8, 9], 2), vec![7, 8, 3]);
        let singular = Matrix::filled(3, 3, 1u64);
        assert!(matches!(o.compose_linear(&singular), Err(Error::Singular)));
    }
}
