use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{CircuitKind, DepthThreeCircuit, Gate, LinearForm, MulGate, VarPartition};
use crate::error::{Error, Result};
use crate::field::{Field, FieldDescriptor};
use crate::linalg::Matrix;
use crate::oracle::BlackBoxOracle;

/// Explicit storage is refused above this many entries.
pub const DENSE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TensorStorage<E> {
    /// Nonzero entries by multi-index.
    Sparse(BTreeMap<Vec<usize>, E>),
    /// Sum of outer products, `terms[r][j]` is the mode-`j` vector of term `r`.
    RankOneSum(Vec<Vec<Vec<E>>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor<E> {
    pub shape: Vec<usize>,
    pub storage: TensorStorage<E>,
}

fn num_entries(shape: &[usize]) -> u128 {
    shape.iter().map(|&s| s as u128).product()
}

/// Iterate over all multi-indices of a shape in lexicographic order.
pub(crate) fn multi_indices(shape: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total = num_entries(shape) as usize;
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; shape.len()];
        for j in (0..shape.len()).rev() {
            idx[j] = flat % shape[j];
            flat /= shape[j];
        }
        idx
    })
}

impl<E: Clone + PartialEq + std::fmt::Debug> Tensor<E> {
    pub fn sparse(shape: Vec<usize>, entries: BTreeMap<Vec<usize>, E>) -> Self {
        Tensor { shape, storage: TensorStorage::Sparse(entries) }
    }

    pub fn rank_one_sum(shape: Vec<usize>, terms: Vec<Vec<Vec<E>>>) -> Self {
        Tensor { shape, storage: TensorStorage::RankOneSum(terms) }
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn entry<F: Field<Elem = E>>(&self, f: &F, idx: &[usize]) -> E {
        match &self.storage {
            TensorStorage::Sparse(m) => m.get(idx).cloned().unwrap_or_else(|| f.zero()),
            TensorStorage::RankOneSum(terms) => {
                let mut acc = f.zero();
                for t in terms {
                    let mut p = f.one();
                    for (j, &i) in idx.iter().enumerate() {
                        p = f.mul(&p, &t[j][i]);
                    }
                    acc = f.add(&acc, &p);
                }
                acc
            }
        }
    }

    /// Nonzero entries; expands rank-one sums up to the dense limit.
    pub fn to_entries<F: Field<Elem = E>>(&self, f: &F) -> Result<BTreeMap<Vec<usize>, E>> {
        match &self.storage {
            TensorStorage::Sparse(m) => Ok(m.clone()),
            TensorStorage::RankOneSum(_) => {
                let n = num_entries(&self.shape);
                if n > DENSE_LIMIT {
                    return Err(Error::TensorTooLarge(n));
                }
                let mut out = BTreeMap::new();
                for idx in multi_indices(&self.shape) {
                    let v = self.entry(f, &idx);
                    if !f.is_zero(&v) {
                        out.insert(idx, v);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Entry-wise equality (expanding where needed).
    pub fn equals<F: Field<Elem = E>>(&self, f: &F, o: &Self) -> Result<bool> {
        if self.shape != o.shape {
            return Ok(false);
        }
        Ok(self.to_entries(f)? == o.to_entries(f)?)
    }

    /// Flattening with the listed modes as rows and the rest as columns.
    pub fn flatten<F: Field<Elem = E>>(&self, f: &F, row_modes: &[usize]) -> Result<Matrix<E>> {
        let col_modes: Vec<usize> = (0..self.order()).filter(|j| !row_modes.contains(j)).collect();
        let rshape: Vec<usize> = row_modes.iter().map(|&j| self.shape[j]).collect();
        let cshape: Vec<usize> = col_modes.iter().map(|&j| self.shape[j]).collect();
        let (nr, nc) = (num_entries(&rshape), num_entries(&cshape));
        if nr * nc > DENSE_LIMIT * 4 {
            return Err(Error::TensorTooLarge(nr * nc));
        }
        let mut m = Matrix::filled(nr as usize, nc as usize, f.zero());
        let flat = |idx: &[usize], modes: &[usize], shape: &[usize]| {
            modes.iter().zip(shape).fold(0usize, |acc, (&j, &s)| acc * s + idx[j])
        };
        for (idx, v) in self.to_entries(f)? {
            let r = flat(&idx, row_modes, &rshape);
            let c = flat(&idx, &col_modes, &cshape);
            m.set(r, c, v);
        }
        Ok(m)
    }

    pub fn to_json<F: Field<Elem = E>>(&self, f: &F) -> Result<Value> {
        let entries: Vec<Value> =
            self.to_entries(f)?.iter().map(|(i, v)| json!([i, f.elem_to_json(v)])).collect();
        Ok(json!({ "shape": self.shape, "field": f.descriptor(), "entries": entries }))
    }

    /// Parse a tensor file against an already constructed field.
    pub fn from_json<F: Field<Elem = E>>(f: &F, v: &Value) -> Result<Self> {
        let bad = |s: &str| Error::InvalidInput(format!("tensor: {s}"));
        let shape: Vec<usize> = serde_json::from_value(v.get("shape").cloned().ok_or_else(|| bad("missing shape"))?)
            .map_err(|e| bad(&e.to_string()))?;
        if shape.is_empty() || shape.contains(&0) {
            return Err(bad("shape must be nonempty with positive sizes"));
        }
        let raw = v.get("entries").and_then(Value::as_array).ok_or_else(|| bad("missing entries"))?;
        let mut entries = BTreeMap::new();
        for e in raw {
            let pair = e.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("entry must be [index, value]"))?;
            let idx: Vec<usize> = serde_json::from_value(pair[0].clone()).map_err(|e| bad(&e.to_string()))?;
            if idx.len() != shape.len() || idx.iter().zip(&shape).any(|(i, s)| i >= s) {
                return Err(bad("index out of range"));
            }
            let val = f.elem_from_json(&pair[1])?;
            if !f.is_zero(&val) {
                entries.insert(idx, val);
            }
        }
        Ok(Tensor::sparse(shape, entries))
    }
}

/// Field descriptor embedded in a tensor file.
pub fn tensor_field(v: &Value) -> Result<FieldDescriptor> {
    serde_json::from_value(v.get("field").cloned().ok_or_else(|| Error::InvalidInput("tensor: missing field".into()))?)
        .map_err(|e| Error::InvalidInput(format!("tensor field: {e}")))
}

/// Sum of rank-one terms `sum_r a_r1 ⊗ ... ⊗ a_rd`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpDecomposition<E> {
    pub factors: Vec<Vec<Vec<E>>>,
}

impl<E: Clone + PartialEq + std::fmt::Debug> CpDecomposition<E> {
    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn to_tensor(&self, shape: Vec<usize>) -> Tensor<E> {
        Tensor::rank_one_sum(shape, self.factors.clone())
    }

    pub fn to_json<F: Field<Elem = E>>(&self, f: &F) -> Value {
        let factors: Vec<Value> = self
            .factors
            .iter()
            .map(|t| Value::Array(t.iter().map(|v| Value::Array(v.iter().map(|c| f.elem_to_json(c)).collect())).collect()))
            .collect();
        json!({ "rank": self.rank(), "factors": factors })
    }

    pub fn from_json<F: Field<Elem = E>>(f: &F, v: &Value) -> Result<Self> {
        let bad = |s: &str| Error::InvalidInput(format!("decomposition: {s}"));
        let raw = v.get("factors").and_then(Value::as_array).ok_or_else(|| bad("missing factors"))?;
        let mut factors = Vec::new();
        for term in raw {
            let modes = term.as_array().ok_or_else(|| bad("term must be a list of vectors"))?;
            let mut t = Vec::new();
            for m in modes {
                let vals = m.as_array().ok_or_else(|| bad("factor must be a vector"))?;
                t.push(vals.iter().map(|c| f.elem_from_json(c)).collect::<Result<Vec<_>>>()?);
            }
            factors.push(t);
        }
        if let Some(r) = v.get("rank").and_then(Value::as_u64) {
            if r as usize != factors.len() {
                return Err(bad("rank disagrees with factor count"));
            }
        }
        Ok(CpDecomposition { factors })
    }

    /// The set-multilinear circuit with one gate per term.
    pub fn to_circuit<F: Field<Elem = E>>(&self, f: &F, shape: &[usize]) -> DepthThreeCircuit<E> {
        let part = VarPartition::blocks(shape);
        let n = part.nvars();
        let gates = self
            .factors
            .iter()
            .map(|t| {
                let forms = t
                    .iter()
                    .zip(&part.parts)
                    .map(|(v, vars)| {
                        let mut l = LinearForm::zero(f, n);
                        for (c, &x) in v.iter().zip(vars) {
                            l.coeffs[x] = c.clone();
                        }
                        l
                    })
                    .collect();
                Gate::Mul(MulGate { forms })
            })
            .collect();
        DepthThreeCircuit { nvars: n, kind: CircuitKind::SetMultilinear, partition: Some(part), gates }
    }
}

/// The set-multilinear polynomial of a tensor, with its block partition.
pub fn tensor_to_oracle<F: Field>(f: &F, t: &Tensor<F::Elem>) -> (BlackBoxOracle<F>, VarPartition) {
    let part = VarPartition::blocks(&t.shape);
    let offsets: Vec<usize> = part.parts.iter().map(|p| p[0]).collect();
    let n = part.nvars();
    let d = t.order();
    let field = f.clone();
    let oracle = match &t.storage {
        TensorStorage::Sparse(entries) => {
            let entries: Vec<(Vec<usize>, F::Elem)> = entries.iter().map(|(i, v)| (i.clone(), v.clone())).collect();
            BlackBoxOracle::new(f.clone(), n, d, "tensor", move |x: &[F::Elem]| {
                let mut acc = field.zero();
                for (idx, v) in &entries {
                    let mut p = v.clone();
                    for (j, &i) in idx.iter().enumerate() {
                        p = field.mul(&p, &x[offsets[j] + i]);
                    }
                    acc = field.add(&acc, &p);
                }
                acc
            })
        }
        TensorStorage::RankOneSum(terms) => {
            let terms = terms.clone();
            BlackBoxOracle::new(f.clone(), n, d, "tensor", move |x: &[F::Elem]| {
                let mut acc = field.zero();
                for term in &terms {
                    let mut p = field.one();
                    for (j, v) in term.iter().enumerate() {
                        p = field.mul(&p, &field.dot(v, &x[offsets[j]..offsets[j] + v.len()]));
                    }
                    acc = field.add(&acc, &p);
                }
                acc
            })
        }
    };
    (oracle.with_var_degree(1), part)
}

/// The tensor of a set-multilinear circuit, kept in rank-one form.
pub fn circuit_to_tensor<F: Field>(f: &F, c: &DepthThreeCircuit<F::Elem>) -> Result<Tensor<F::Elem>> {
    let part = c
        .partition
        .as_ref()
        .filter(|_| c.is_set_multilinear(f))
        .ok_or_else(|| Error::InvalidInput("circuit is not set-multilinear".into()))?;
    let owner = part.part_of();
    let shape = part.widths();
    let mut terms = Vec::new();
    for g in &c.gates {
        let m = g.as_mul();
        let mut scalar = f.one();
        let mut modes: Vec<Vec<F::Elem>> = shape.iter().map(|&w| vec![f.zero(); w]).collect();
        for l in &m.forms {
            if l.is_constant(f) {
                scalar = f.mul(&scalar, &l.constant);
                continue;
            }
            let j = owner[l.support(f)[0]];
            for (pos, &v) in part.parts[j].iter().enumerate() {
                modes[j][pos] = l.coeffs[v].clone();
            }
        }
        for x in modes[0].iter_mut() {
            *x = f.mul(x, &scalar);
        }
        terms.push(modes);
    }
    Ok(Tensor::rank_one_sum(shape, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    #[test]
    fn oracle_matches_entries() {
        let f = PrimeField::new(101).unwrap();
        let mut e = BTreeMap::new();
        e.insert(vec![0, 0, 0], 1);
        e.insert(vec![1, 1, 1], 1);
        let t = Tensor::sparse(vec![2, 2, 2], e);
        let (o, part) = tensor_to_oracle(&f, &t);
        assert_eq!(part.parts, vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
        // x0 x2 x4 + x1 x3 x5
        assert_eq!(o.eval(&[2, 3, 4, 5, 6, 7]), (2 * 4 * 6 + 3 * 5 * 7) % 101);
    }

    #[test]
    fn cp_round_trip() {
        let f = PrimeField::new(101).unwrap();
        let cp = CpDecomposition { factors: vec![vec![vec![1, 0], vec![1, 0]], vec![vec![0, 1], vec![0, 1]]] };
        let t = cp.to_tensor(vec![2, 2]);
        let c = cp.to_circuit(&f, &[2, 2]);
        let back = circuit_to_tensor(&f, &c).unwrap();
        assert!(back.equals(&f, &t).unwrap());
        assert_eq!(CpDecomposition::from_json(&f, &cp.to_json(&f)).unwrap(), cp);
        let flat = t.flatten(&f, &[0]).unwrap();
        assert_eq!(crate::linalg::rank(&f, &flat), 2);
    }

    #[test]
    fn dense_limit_refused() {
        let f = PrimeField::new(101).unwrap();
        let t = Tensor::rank_one_sum(vec![1000, 1000, 2], vec![vec![vec![1; 1000], vec![1; 1000], vec![1; 2]]]);
        assert_eq!(t.to_entries(&f), Err(Error::TensorTooLarge(2_000_000)));
    }
}
