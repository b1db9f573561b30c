//! Polynomials, linear forms, depth-3 circuits and tensors.

mod circuit;
mod sparse;
mod tensor;

pub use circuit::{
    circuit_gcd, eval_circuit, gcd_and_distance, CircuitKind, DepthThreeCircuit, Distance, Gate, MulGate,
    PowerGate, VarPartition,
};
pub use sparse::{Monomial, SparsePoly};
pub(crate) use tensor::multi_indices;
pub use tensor::{circuit_to_tensor, tensor_field, tensor_to_oracle, CpDecomposition, Tensor, TensorStorage, DENSE_LIMIT};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::Field;

/// Affine linear form `sum coeffs[i] x_i + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearForm<E> {
    pub coeffs: Vec<E>,
    pub constant: E,
}

impl<E: Clone + PartialEq> LinearForm<E> {
    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }
}

impl<E: Clone + PartialEq + std::fmt::Debug> LinearForm<E> {
    pub fn zero<F: Field<Elem = E>>(f: &F, n: usize) -> Self {
        LinearForm { coeffs: vec![f.zero(); n], constant: f.zero() }
    }

    pub fn constant_form<F: Field<Elem = E>>(f: &F, n: usize, c: E) -> Self {
        LinearForm { coeffs: vec![f.zero(); n], constant: c }
    }

    pub fn var<F: Field<Elem = E>>(f: &F, n: usize, i: usize) -> Self {
        let mut l = Self::zero(f, n);
        l.coeffs[i] = f.one();
        l
    }

    pub fn homogeneous(coeffs: Vec<E>, zero: E) -> Self {
        LinearForm { coeffs, constant: zero }
    }

    pub fn eval<F: Field<Elem = E>>(&self, f: &F, x: &[E]) -> E {
        f.add(&f.dot(&self.coeffs, x), &self.constant)
    }

    pub fn support<F: Field<Elem = E>>(&self, f: &F) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&i| !f.is_zero(&self.coeffs[i])).collect()
    }

    pub fn is_constant<F: Field<Elem = E>>(&self, f: &F) -> bool {
        self.coeffs.iter().all(|c| f.is_zero(c))
    }

    pub fn is_zero<F: Field<Elem = E>>(&self, f: &F) -> bool {
        self.is_constant(f) && f.is_zero(&self.constant)
    }

    pub fn scale<F: Field<Elem = E>>(&self, f: &F, c: &E) -> Self {
        LinearForm { coeffs: self.coeffs.iter().map(|x| f.mul(x, c)).collect(), constant: f.mul(&self.constant, c) }
    }

    pub fn add<F: Field<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        LinearForm {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| f.add(a, b)).collect(),
            constant: f.add(&self.constant, &o.constant),
        }
    }

    pub fn sub<F: Field<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        self.add(f, &o.scale(f, &f.neg(&f.one())))
    }

    /// The first nonzero entry among `coeffs..., constant`.
    pub fn leading<F: Field<Elem = E>>(&self, f: &F) -> Option<E> {
        self.coeffs.iter().chain(std::iter::once(&self.constant)).find(|c| !f.is_zero(c)).cloned()
    }

    /// `(c, l)` with `self = c * l` and the leading entry of `l` equal to one.
    pub fn normalized<F: Field<Elem = E>>(&self, f: &F) -> (E, Self) {
        match self.leading(f) {
            None => (f.zero(), self.clone()),
            Some(c) => {
                let inv = f.inv(&c).expect("nonzero leading entry");
                (c, self.scale(f, &inv))
            }
        }
    }

    pub fn proportional<F: Field<Elem = E>>(&self, f: &F, o: &Self) -> bool {
        self.normalized(f).1 == o.normalized(f).1
    }

    pub fn to_poly<F: Field<Elem = E>>(&self, f: &F) -> SparsePoly<E> {
        let n = self.coeffs.len();
        let mut p = SparsePoly::constant(f, n, self.constant.clone());
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut m = vec![0; n];
            m[i] = 1;
            p.add_term(f, m, c.clone());
        }
        p
    }

    /// Read an affine polynomial of degree at most one.
    pub fn from_poly<F: Field<Elem = E>>(f: &F, p: &SparsePoly<E>) -> Option<Self> {
        if p.degree() > 1 {
            return None;
        }
        let mut l = Self::zero(f, p.nvars);
        for (m, c) in &p.terms {
            match m.iter().position(|&e| e == 1) {
                None => l.constant = c.clone(),
                Some(i) => l.coeffs[i] = c.clone(),
            }
        }
        Some(l)
    }

    /// Substitute `x = A y + b` given by one form per original variable.
    pub fn compose<F: Field<Elem = E>>(&self, f: &F, sub: &[LinearForm<E>], nvars_out: usize) -> Self {
        let mut out = LinearForm::constant_form(f, nvars_out, self.constant.clone());
        for (c, s) in self.coeffs.iter().zip(sub) {
            if !f.is_zero(c) {
                out = out.add(f, &s.scale(f, c));
            }
        }
        out
    }

    pub fn to_json<F: Field<Elem = E>>(&self, f: &F) -> Value {
        let coeffs: Vec<Value> = self.coeffs.iter().map(|c| f.elem_to_json(c)).collect();
        json!({ "coeffs": coeffs, "const": f.elem_to_json(&self.constant) })
    }

    pub fn from_json<F: Field<Elem = E>>(f: &F, v: &Value) -> Result<Self> {
        let coeffs = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("linear form needs coeffs".into()))?
            .iter()
            .map(|c| f.elem_from_json(c))
            .collect::<Result<Vec<_>>>()?;
        let constant = match v.get("const") {
            Some(c) => f.elem_from_json(c)?,
            None => f.zero(),
        };
        Ok(LinearForm { coeffs, constant })
    }
}
