use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::LinearForm;
use crate::error::{Error, Result};
use crate::field::Field;

pub type Monomial = Vec<u32>;

/// Sparse multivariate polynomial: exponent vectors mapped to nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly<E> {
    pub nvars: usize,
    pub terms: BTreeMap<Monomial, E>,
}

impl<E: Clone + PartialEq> SparsePoly<E> {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly { nvars, terms: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.iter().sum::<u32>() as usize).max().unwrap_or(0)
    }

    pub fn var_degree(&self, i: usize) -> usize {
        self.terms.keys().map(|m| m[i] as usize).max().unwrap_or(0)
    }

    /// Variables that occur in some term.
    pub fn vars(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&i| self.terms.keys().any(|m| m[i] > 0)).collect()
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e <= 1))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }
}

impl<E: Clone + PartialEq + std::fmt::Debug> SparsePoly<E> {
    pub fn constant<F: Field<Elem = E>>(f: &F, nvars: usize, c: E) -> Self {
        let mut p = SparsePoly::zero(nvars);
        p.add_term(f, vec![0; nvars], c);
        p
    }

    pub fn var<F: Field<Elem = E>>(f: &F, nvars: usize, i: usize) -> Self {
        let mut m = vec![0; nvars];
        m[i] = 1;
        let mut p = SparsePoly::zero(nvars);
        p.add_term(f, m, f.one());
        p
    }

    pub fn from_terms<F: Field<Elem = E>>(f: &F, nvars: usize, terms: Vec<(Monomial, E)>) -> Self {
        let mut p = SparsePoly::zero(nvars);
        for (m, c) in terms {
            p.add_term(f, m, c);
        }
        p
    }

    pub fn coeff<F: Field<Elem = E>>(&self, f: &F, m: &[u32]) -> E {
        self.terms.get(m).cloned().unwrap_or_else(|| f.zero())
    }

    pub fn add_term<F: Field<Elem = E>>(&mut self, f: &F, m: Monomial, c: E) {
        debug_assert_eq!(m.len(), self.nvars);
        if f.is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = f.add(v, &c);
                if f.is_zero(v) {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add<F: Field<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(f, m.clone(), c.clone());
        }
        out
    }

    pub fn sub<F: Field<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(f, m.clone(), f.neg(c));
        }
        out
    }

    pub fn scale<F: Field<Elem = E>>(&self, f: &F, c: &E) -> Self {
        if f.is_zero(c) {
            return SparsePoly::zero(self.nvars);
        }
        let terms = self.terms.iter().map(|(m, v)| (m.clone(), f.mul(v, c))).collect();
        SparsePoly { nvars: self.nvars, terms }
    }

    pub fn mul<F: Field<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        let mut out = SparsePoly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.add_term(f, m, f.mul(c1, c2));
            }
        }
        out
    }

    pub fn pow<F: Field<Elem = E>>(&self, f: &F, e: usize) -> Self {
        let mut acc = SparsePoly::constant(f, self.nvars, f.one());
        for _ in 0..e {
            acc = acc.mul(f, self);
        }
        acc
    }

    pub fn eval<F: Field<Elem = E>>(&self, f: &F, x: &[E]) -> E {
        debug_assert_eq!(x.len(), self.nvars);
        let maxdeg: Vec<usize> = (0..self.nvars).map(|i| self.var_degree(i)).collect();
        let pows: Vec<Vec<E>> = (0..self.nvars)
            .map(|i| {
                let mut v = Vec::with_capacity(maxdeg[i] + 1);
                v.push(f.one());
                for e in 1..=maxdeg[i] {
                    v.push(f.mul(&v[e - 1], &x[i]));
                }
                v
            })
            .collect();
        let mut acc = f.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = f.mul(&t, &pows[i][e as usize]);
                }
            }
            acc = f.add(&acc, &t);
        }
        acc
    }

    pub fn derivative<F: Field<Elem = E>>(&self, f: &F, i: usize) -> Self {
        let mut out = SparsePoly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[i] == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[i] -= 1;
            out.add_term(f, m2, f.mul(c, &f.from_u64(m[i] as u64)));
        }
        out
    }

    /// Fix the listed variables to values; the variable count is unchanged.
    pub fn restrict<F: Field<Elem = E>>(&self, f: &F, fixed: &[(usize, E)]) -> Self {
        let mut out = SparsePoly::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut m2 = m.clone();
            let mut t = c.clone();
            for (i, v) in fixed {
                if m2[*i] > 0 {
                    t = f.mul(&t, &f.pow(v, m2[*i] as u64));
                    m2[*i] = 0;
                }
            }
            out.add_term(f, m2, t);
        }
        out
    }

    /// Substitute `x_i -> forms[i]` where the forms live in `nvars_out` variables.
    pub fn compose_affine<F: Field<Elem = E>>(&self, f: &F, forms: &[LinearForm<E>], nvars_out: usize) -> Self {
        assert_eq!(forms.len(), self.nvars);
        let lin: Vec<SparsePoly<E>> = forms.iter().map(|l| l.to_poly(f)).collect();
        let mut cache: Vec<Vec<SparsePoly<E>>> =
            (0..self.nvars).map(|_| vec![SparsePoly::constant(f, nvars_out, f.one())]).collect();
        let mut out = SparsePoly::zero(nvars_out);
        for (m, c) in &self.terms {
            let mut t = SparsePoly::constant(f, nvars_out, c.clone());
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[i].len() <= e as usize {
                    let next = cache[i].last().unwrap().mul(f, &lin[i]);
                    cache[i].push(next);
                }
                t = t.mul(f, &cache[i][e as usize]);
            }
            out = out.add(f, &t);
        }
        out
    }

    /// Homogenise to total degree `d` with a new last variable.
    pub fn homogenize<F: Field<Elem = E>>(&self, f: &F, d: usize) -> Self {
        let mut out = SparsePoly::zero(self.nvars + 1);
        for (m, c) in &self.terms {
            let deg: u32 = m.iter().sum();
            let mut m2 = m.clone();
            m2.push(d as u32 - deg);
            out.add_term(f, m2, c.clone());
        }
        out
    }

    /// Drop the last variable by setting it to one.
    pub fn dehomogenize<F: Field<Elem = E>>(&self, f: &F) -> Self {
        let mut out = SparsePoly::zero(self.nvars - 1);
        for (m, c) in &self.terms {
            out.add_term(f, m[..self.nvars - 1].to_vec(), c.clone());
        }
        out
    }

    pub fn homogeneous_part<F: Field<Elem = E>>(&self, f: &F, deg: usize) -> Self {
        let mut out = SparsePoly::zero(self.nvars);
        for (m, c) in &self.terms {
            if m.iter().sum::<u32>() as usize == deg {
                out.add_term(f, m.clone(), c.clone());
            }
        }
        out
    }

    /// Coefficients with respect to `x_var`, as polynomials in the remaining variables
    /// (the variable count is unchanged, `x_var` never occurs).
    pub fn coeffs_in<F: Field<Elem = E>>(&self, f: &F, var: usize) -> Vec<Self> {
        let d = self.var_degree(var);
        let mut out = vec![SparsePoly::zero(self.nvars); d + 1];
        for (m, c) in &self.terms {
            let e = m[var] as usize;
            let mut m2 = m.clone();
            m2[var] = 0;
            out[e].add_term(f, m2, c.clone());
        }
        if self.is_zero() {
            out.clear();
        }
        out
    }

    /// Re-embed into a different variable count via an index map `old -> new`.
    pub fn remap(&self, nvars_out: usize, map: &[usize]) -> Self {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut m2 = vec![0u32; nvars_out];
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    m2[map[i]] += e;
                }
            }
            terms.insert(m2, c.clone());
        }
        SparsePoly { nvars: nvars_out, terms }
    }

    /// `self / d` when the division is exact (lex-order long division).
    pub fn exact_div<F: Field<Elem = E>>(&self, f: &F, d: &Self) -> Option<Self> {
        let (dm, dc) = d.terms.iter().next_back()?;
        let dinv = f.inv(dc).ok()?;
        let mut r = self.clone();
        let mut q = SparsePoly::zero(self.nvars);
        while let Some((m, c)) = r.terms.iter().next_back() {
            if m.iter().zip(dm).any(|(a, b)| a < b) {
                return None;
            }
            let qm: Monomial = m.iter().zip(dm).map(|(a, b)| a - b).collect();
            let qc = f.mul(c, &dinv);
            for (tm, tc) in &d.terms {
                let mm: Monomial = tm.iter().zip(&qm).map(|(a, b)| a + b).collect();
                r.add_term(f, mm, f.neg(&f.mul(tc, &qc)));
            }
            q.add_term(f, qm, qc);
        }
        Some(q)
    }

    /// Apply a coefficient map, e.g. an embedding into an extension field.
    pub fn map_coeffs<G: Field>(&self, g: &G, phi: impl Fn(&E) -> G::Elem) -> SparsePoly<G::Elem> {
        let mut out = SparsePoly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(g, m.clone(), phi(c));
        }
        out
    }

    pub fn to_json<F: Field<Elem = E>>(&self, f: &F) -> Value {
        let terms: Vec<Value> = self.terms.iter().map(|(m, c)| json!([m, f.elem_to_json(c)])).collect();
        json!({ "nvars": self.nvars, "terms": terms })
    }

    pub fn from_json<F: Field<Elem = E>>(f: &F, v: &Value) -> Result<Self> {
        let bad = |s: &str| Error::InvalidInput(format!("polynomial: {s}"));
        let nvars = v.get("nvars").and_then(Value::as_u64).ok_or_else(|| bad("missing nvars"))? as usize;
        let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("missing terms"))?;
        let mut p = SparsePoly::zero(nvars);
        for t in terms {
            let pair = t.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("term must be [exps, coeff]"))?;
            let exps: Vec<u32> = pair[0]
                .as_array()
                .ok_or_else(|| bad("exponents must be an array"))?
                .iter()
                .map(|e| e.as_u64().map(|x| x as u32).ok_or_else(|| bad("exponent")))
                .collect::<Result<_>>()?;
            if exps.len() != nvars {
                return Err(bad("exponent vector length"));
            }
            p.add_term(f, exps, f.elem_from_json(&pair[1])?);
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    #[test]
    fn arithmetic_and_eval() {
        let f = PrimeField::new(101).unwrap();
        let x = SparsePoly::var(&f, 2, 0);
        let y = SparsePoly::var(&f, 2, 1);
        let p = x.add(&f, &y).pow(&f, 2);
        assert_eq!(p.num_terms(), 3);
        assert_eq!(p.eval(&f, &[2, 3]), 25);
        let dx = p.derivative(&f, 0);
        assert_eq!(dx.eval(&f, &[2, 3]), 10);
        assert_eq!(p.sub(&f, &p), SparsePoly::zero(2));
    }

    #[test]
    fn compose_and_homogenize() {
        let f = PrimeField::new(101).unwrap();
        let p = SparsePoly::var(&f, 1, 0).pow(&f, 2);
        let l = LinearForm { coeffs: vec![1, 1], constant: 1 };
        let q = p.compose_affine(&f, &[l], 2);
        assert_eq!(q.eval(&f, &[1, 2]), 16);
        let h = q.homogenize(&f, 2);
        assert_eq!(h.eval(&f, &[2, 4, 2]), 64);
        assert_eq!(h.dehomogenize(&f), q);
    }

    #[test]
    fn json_round_trip() {
        let f = PrimeField::new(7).unwrap();
        let p = SparsePoly::from_terms(&f, 2, vec![(vec![1, 0], 3), (vec![0, 2], 5)]);
        assert_eq!(SparsePoly::from_json(&f, &p.to_json(&f)).unwrap(), p);
    }
}
