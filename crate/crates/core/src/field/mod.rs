//! Finite fields: prime fields `F_p` and extensions `F_p[x]/(m)`.

mod ext;
mod prime;

pub use ext::{find_irreducible, is_irreducible, ExtField};
pub use prime::{is_prime, PrimeField, MERSENNE_61};

use std::fmt;
use std::hash::Hash;

use num_bigint::BigUint;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Arithmetic over a finite field. Elements are plain values; all operations
/// go through the field descriptor.
pub trait Field: Clone + fmt::Debug + Send + Sync + 'static {
    type Elem: Clone + PartialEq + Eq + Hash + fmt::Debug + Send + Sync + 'static;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `DivisionByZero` on zero.
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    fn from_u64(&self, v: u64) -> Self::Elem;
    /// Uniform sample from the whole field.
    fn random(&self, rng: &mut dyn RngCore) -> Self::Elem;
    fn characteristic(&self) -> u64;
    fn ext_degree(&self) -> usize;
    fn descriptor(&self) -> FieldDescriptor;
    /// The `idx`-th element in a fixed enumeration of the field.
    fn nth_element(&self, idx: u64) -> Self::Elem;
    fn elem_to_json(&self, a: &Self::Elem) -> Value;
    fn elem_from_json(&self, v: &Value) -> Result<Self::Elem>;
    /// The residue of a prime-field element; `None` for proper extensions.
    fn as_prime_residue(&self, a: &Self::Elem) -> Option<u64>;

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn from_i64(&self, v: i64) -> Self::Elem {
        if v < 0 {
            self.neg(&self.from_u64(v.unsigned_abs()))
        } else {
            self.from_u64(v as u64)
        }
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn pow_big(&self, a: &Self::Elem, e: &BigUint) -> Self::Elem {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    /// Field size `p^t`.
    fn order(&self) -> BigUint {
        BigUint::from(self.characteristic()).pow(self.ext_degree() as u32)
    }

    /// Field size as `u128`, saturating.
    fn order_u128(&self) -> u128 {
        let p = self.characteristic() as u128;
        let mut acc: u128 = 1;
        for _ in 0..self.ext_degree() {
            acc = match acc.checked_mul(p) {
                Some(v) => v,
                None => return u128::MAX,
            };
        }
        acc
    }

    /// Field size as `f64`, for probability estimates.
    fn order_f64(&self) -> f64 {
        (self.characteristic() as f64).powi(self.ext_degree() as i32)
    }

    fn random_nonzero(&self, rng: &mut dyn RngCore) -> Self::Elem {
        loop {
            let v = self.random(rng);
            if !self.is_zero(&v) {
                return v;
            }
        }
    }

    fn random_vec(&self, n: usize, rng: &mut dyn RngCore) -> Vec<Self::Elem> {
        (0..n).map(|_| self.random(rng)).collect()
    }

    fn sum<'a, I: IntoIterator<Item = &'a Self::Elem>>(&self, it: I) -> Self::Elem {
        it.into_iter().fold(self.zero(), |acc, x| self.add(&acc, x))
    }

    fn dot(&self, a: &[Self::Elem], b: &[Self::Elem]) -> Self::Elem {
        let mut acc = self.zero();
        for (x, y) in a.iter().zip(b) {
            acc = self.add(&acc, &self.mul(x, y));
        }
        acc
    }
}

/// Serializable description of a field: `{"prime":p}` or
/// `{"prime":p,"ext_degree":t,"modulus":[c0,...,ct]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub prime: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ext_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modulus: Option<Vec<u64>>,
}

impl FieldDescriptor {
    pub fn prime(p: u64) -> Self {
        FieldDescriptor { prime: p, ext_degree: None, modulus: None }
    }

    pub fn is_extension(&self) -> bool {
        self.ext_degree.map_or(false, |t| t > 1)
    }

    pub fn to_prime_field(&self) -> Result<PrimeField> {
        PrimeField::new(self.prime)
    }

    pub fn to_ext_field(&self) -> Result<ExtField> {
        let base = PrimeField::new(self.prime)?;
        let t = self.ext_degree.unwrap_or(1);
        match &self.modulus {
            Some(m) => {
                if m.len() != t + 1 {
                    return Err(Error::InvalidInput(format!(
                        "modulus has {} coefficients, expected {}",
                        m.len(),
                        t + 1
                    )));
                }
                ExtField::new(base, m.clone())
            }
            None => ExtField::with_degree(base, t),
        }
    }
}

/// Warn when the field is smaller than the reconstruction guarantees need.
pub fn check_field_size<F: Field>(field: &F, n: usize, d: usize, k: usize) {
    let need = (n as f64) * (d as f64) * 2f64.powi(k as i32 + 1);
    if field.order_f64() < need {
        log::warn!(
            "field of size {} is below n*d*2^(k+1) = {}; success probabilities degrade",
            field.order(),
            need
        );
    }
}

/// Evaluate a dense univariate coefficient vector (low to high) at `x`.
pub fn horner<F: Field>(field: &F, coeffs: &[F::Elem], x: &F::Elem) -> F::Elem {
    let mut acc = field.zero();
    for c in coeffs.iter().rev() {
        acc = field.add(&field.mul(&acc, x), c);
    }
    acc
}
