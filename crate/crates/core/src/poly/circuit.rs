use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{LinearForm, SparsePoly};
use crate::error::{Error, Result};
use crate::field::Field;

/// Partition of the variable indices into parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarPartition {
    pub parts: Vec<Vec<usize>>,
}

impl VarPartition {
    pub fn new(parts: Vec<Vec<usize>>, nvars: usize) -> Result<Self> {
        let mut seen = vec![false; nvars];
        for p in &parts {
            if p.is_empty() {
                return Err(Error::InvalidInput("empty part in partition".into()));
            }
            for &v in p {
                if v >= nvars || seen[v] {
                    return Err(Error::InvalidInput(format!("partition is not a disjoint cover (variable {v})")));
                }
                seen[v] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidInput("partition does not cover every variable".into()));
        }
        Ok(VarPartition { parts })
    }

    /// Consecutive blocks of the given widths.
    pub fn blocks(widths: &[usize]) -> Self {
        let mut parts = Vec::new();
        let mut next = 0;
        for &w in widths {
            parts.push((next..next + w).collect());
            next += w;
        }
        VarPartition { parts }
    }

    pub fn nvars(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    pub fn widths(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.len()).collect()
    }

    /// `part_of[v]` is the index of the part containing `v`.
    pub fn part_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.nvars()];
        for (j, p) in self.parts.iter().enumerate() {
            for &v in p {
                out[v] = j;
            }
        }
        out
    }
}

/// Product of affine linear forms; the empty product is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulGate<E> {
    pub forms: Vec<LinearForm<E>>,
}

/// A power `form^power`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerGate<E> {
    pub form: LinearForm<E>,
    pub power: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate<E> {
    Mul(MulGate<E>),
    Power(PowerGate<E>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitKind {
    General,
    Multilinear,
    SetMultilinear,
    Power,
}

impl fmt::Display for CircuitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CircuitKind::General => "general",
            CircuitKind::Multilinear => "multilinear",
            CircuitKind::SetMultilinear => "set-multilinear",
            CircuitKind::Power => "power",
        };
        f.write_str(s)
    }
}

/// Sum of gates over `nvars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthThreeCircuit<E> {
    pub nvars: usize,
    pub kind: CircuitKind,
    pub partition: Option<VarPartition>,
    pub gates: Vec<Gate<E>>,
}

impl<E: Clone + PartialEq + fmt::Debug> MulGate<E> {
    pub fn one() -> Self {
        MulGate { forms: Vec::new() }
    }

    pub fn eval<F: Field<Elem = E>>(&self, f: &F, x: &[E]) -> E {
        let mut acc = f.one();
        for l in &self.forms {
            acc = f.mul(&acc, &l.eval(f, x));
        }
        acc
    }

    /// Number of non-constant factors.
    pub fn degree<F: Field<Elem = E>>(&self, f: &F) -> usize {
        self.forms.iter().filter(|l| !l.is_constant(f)).count()
    }

    pub fn to_poly<F: Field<Elem = E>>(&self, f: &F, nvars: usize) -> SparsePoly<E> {
        let mut acc = SparsePoly::constant(f, nvars, f.one());
        for l in &self.forms {
            acc = acc.mul(f, &l.to_poly(f));
        }
        acc
    }

    /// Factors have pairwise disjoint supports.
    pub fn is_multilinear<F: Field<Elem = E>>(&self, f: &F) -> bool {
        let n = self.forms.first().map_or(0, |l| l.nvars());
        let mut used = vec![false; n];
        for l in &self.forms {
            for v in l.support(f) {
                if used[v] {
                    return false;
                }
                used[v] = true;
            }
        }
        true
    }

    /// Merge constant factors into one leading scalar and normalise the rest.
    pub fn canonical<F: Field<Elem = E>>(&self, f: &F) -> (E, Vec<LinearForm<E>>) {
        let mut scalar = f.one();
        let mut rest = Vec::new();
        for l in &self.forms {
            if l.is_constant(f) {
                scalar = f.mul(&scalar, &l.constant);
            } else {
                let (c, n) = l.normalized(f);
                scalar = f.mul(&scalar, &c);
                rest.push(n);
            }
        }
        (scalar, rest)
    }

    pub fn scale<F: Field<Elem = E>>(&self, f: &F, c: &E) -> Self {
        let mut forms = self.forms.clone();
        match forms.first_mut() {
            Some(l) => *l = l.scale(f, c),
            None => {
                let n = 0;
                forms.push(LinearForm::constant_form(f, n, c.clone()));
            }
        }
        MulGate { forms }
    }
}

impl<E: Clone + PartialEq + fmt::Debug> Gate<E> {
    pub fn eval<F: Field<Elem = E>>(&self, f: &F, x: &[E]) -> E {
        match self {
            Gate::Mul(g) => g.eval(f, x),
            Gate::Power(p) => f.pow(&p.form.eval(f, x), p.power as u64),
        }
    }

    pub fn to_poly<F: Field<Elem = E>>(&self, f: &F, nvars: usize) -> SparsePoly<E> {
        match self {
            Gate::Mul(g) => g.to_poly(f, nvars),
            Gate::Power(p) => p.form.to_poly(f).pow(f, p.power),
        }
    }

    /// The gate as an explicit product of forms.
    pub fn as_mul(&self) -> MulGate<E> {
        match self {
            Gate::Mul(g) => g.clone(),
            Gate::Power(p) => MulGate { forms: vec![p.form.clone(); p.power] },
        }
    }
}

impl<E: Clone + PartialEq + fmt::Debug> DepthThreeCircuit<E> {
    pub fn new(nvars: usize, kind: CircuitKind, gates: Vec<Gate<E>>) -> Self {
        DepthThreeCircuit { nvars, kind, partition: None, gates }
    }

    pub fn from_mul_gates(nvars: usize, kind: CircuitKind, gates: Vec<MulGate<E>>) -> Self {
        DepthThreeCircuit { nvars, kind, partition: None, gates: gates.into_iter().map(Gate::Mul).collect() }
    }

    pub fn fan_in(&self) -> usize {
        self.gates.len()
    }

    pub fn degree<F: Field<Elem = E>>(&self, f: &F) -> usize {
        self.gates
            .iter()
            .map(|g| match g {
                Gate::Mul(m) => m.degree(f),
                Gate::Power(p) => {
                    if p.form.is_constant(f) {
                        0
                    } else {
                        p.power
                    }
                }
            })
            .max()
            .unwrap_or(0)
    }

    pub fn eval<F: Field<Elem = E>>(&self, f: &F, x: &[E]) -> E {
        eval_circuit(f, self, x)
    }

    pub fn to_poly<F: Field<Elem = E>>(&self, f: &F) -> SparsePoly<E> {
        let mut acc = SparsePoly::zero(self.nvars);
        for g in &self.gates {
            acc = acc.add(f, &g.to_poly(f, self.nvars));
        }
        acc
    }

    pub fn mul_gates(&self) -> Vec<MulGate<E>> {
        self.gates.iter().map(|g| g.as_mul()).collect()
    }

    /// Every gate is a product of forms with disjoint supports.
    pub fn is_multilinear<F: Field<Elem = E>>(&self, f: &F) -> bool {
        self.gates.iter().all(|g| g.as_mul().is_multilinear(f))
    }

    /// Every gate takes exactly one homogeneous form supported in each part.
    pub fn is_set_multilinear<F: Field<Elem = E>>(&self, f: &F) -> bool {
        let Some(part) = &self.partition else { return false };
        let owner = part.part_of();
        self.gates.iter().all(|g| {
            let m = g.as_mul();
            let mut hit = vec![false; part.parts.len()];
            for l in &m.forms {
                if l.is_constant(f) {
                    continue;
                }
                if !f.is_zero(&l.constant) {
                    return false;
                }
                let sup = l.support(f);
                let j = owner[sup[0]];
                if sup.iter().any(|&v| owner[v] != j) || hit[j] {
                    return false;
                }
                hit[j] = true;
            }
            hit.iter().all(|h| *h)
        })
    }

    pub fn to_json<F: Field<Elem = E>>(&self, f: &F) -> Value {
        let gates: Vec<Value> = self
            .gates
            .iter()
            .map(|g| match g {
                Gate::Mul(m) => Value::Array(m.forms.iter().map(|l| l.to_json(f)).collect()),
                Gate::Power(p) => json!({ "form": p.form.to_json(f), "power": p.power }),
            })
            .collect();
        let mut v = json!({ "kind": self.kind, "nvars": self.nvars, "gates": gates });
        if let Some(p) = &self.partition {
            v["partition"] = json!(p.parts);
        }
        v
    }

    pub fn from_json<F: Field<Elem = E>>(f: &F, v: &Value) -> Result<Self> {
        let bad = |s: &str| Error::InvalidInput(format!("circuit: {s}"));
        let kind: CircuitKind = serde_json::from_value(v.get("kind").cloned().ok_or_else(|| bad("missing kind"))?)
            .map_err(|e| bad(&e.to_string()))?;
        let raw_gates = v.get("gates").and_then(Value::as_array).ok_or_else(|| bad("missing gates"))?;
        let mut gates = Vec::new();
        for g in raw_gates {
            match g {
                Value::Array(forms) => {
                    let forms = forms.iter().map(|l| LinearForm::from_json(f, l)).collect::<Result<Vec<_>>>()?;
                    gates.push(Gate::Mul(MulGate { forms }));
                }
                Value::Object(_) => {
                    let form = LinearForm::from_json(f, g.get("form").ok_or_else(|| bad("power gate needs form"))?)?;
                    let power = g.get("power").and_then(Value::as_u64).ok_or_else(|| bad("power gate needs power"))?;
                    gates.push(Gate::Power(PowerGate { form, power: power as usize }));
                }
                _ => return Err(bad("gate must be a list of forms or a power gate")),
            }
        }
        let nvars = match v.get("nvars").and_then(Value::as_u64) {
            Some(n) => n as usize,
            None => gates
                .iter()
                .find_map(|g| g.as_mul().forms.first().map(|l| l.nvars()))
                .ok_or_else(|| bad("cannot infer nvars"))?,
        };
        for g in &gates {
            if g.as_mul().forms.iter().any(|l| l.nvars() != nvars) {
                return Err(bad("form length differs from nvars"));
            }
        }
        let partition = match v.get("partition") {
            Some(p) => {
                let parts: Vec<Vec<usize>> = serde_json::from_value(p.clone()).map_err(|e| bad(&e.to_string()))?;
                Some(VarPartition::new(parts, nvars)?)
            }
            None => None,
        };
        Ok(DepthThreeCircuit { nvars, kind, partition, gates })
    }
}

pub fn eval_circuit<F: Field>(f: &F, c: &DepthThreeCircuit<F::Elem>, x: &[F::Elem]) -> F::Elem {
    let mut acc = f.zero();
    for g in &c.gates {
        acc = f.add(&acc, &g.eval(f, x));
    }
    acc
}

/// Gate distance: max gate degree over gcd degree, infinite for a constant gcd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Finite(Ratio<u64>),
    Infinite,
}

impl Distance {
    pub fn at_most(&self, bound: u64) -> bool {
        match self {
            Distance::Finite(r) => *r <= Ratio::from_integer(bound),
            Distance::Infinite => false,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(r) => write!(f, "{r}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

/// Common non-constant factors of two gates up to scalars, and their distance.
pub fn gcd_and_distance<F: Field>(
    f: &F,
    a: &MulGate<F::Elem>,
    b: &MulGate<F::Elem>,
) -> (MulGate<F::Elem>, Distance) {
    let (_, fa) = a.canonical(f);
    let (_, mut fb) = b.canonical(f);
    let mut common = Vec::new();
    for l in fa.iter() {
        if let Some(pos) = fb.iter().position(|m| m == l) {
            common.push(l.clone());
            fb.remove(pos);
        }
    }
    let dmax = a.degree(f).max(b.degree(f)) as u64;
    let dist = if common.is_empty() {
        Distance::Infinite
    } else {
        Distance::Finite(Ratio::new(dmax, common.len() as u64))
    };
    (MulGate { forms: common }, dist)
}

/// Product of the normalised forms shared by every gate.
pub fn circuit_gcd<F: Field>(f: &F, gates: &[MulGate<F::Elem>]) -> Vec<LinearForm<F::Elem>> {
    let Some(first) = gates.first() else { return Vec::new() };
    let mut common = first.canonical(f).1;
    for g in &gates[1..] {
        let mut other = g.canonical(f).1;
        common.retain(|l| match other.iter().position(|m| m == l) {
            Some(p) => {
                other.remove(p);
                true
            }
            None => false,
        });
    }
    common
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    fn var(f: &PrimeField, n: usize, i: usize) -> LinearForm<u64> {
        LinearForm::var(f, n, i)
    }

    #[test]
    fn distance_examples() {
        let f = PrimeField::new(101).unwrap();
        let t = MulGate { forms: vec![var(&f, 4, 0), var(&f, 4, 1), var(&f, 4, 2)] };
        let u = MulGate { forms: vec![var(&f, 4, 0), var(&f, 4, 1), var(&f, 4, 3)] };
        assert_eq!(gcd_and_distance(&f, &t, &t).1, Distance::Finite(Ratio::from_integer(1)));
        let (g, d) = gcd_and_distance(&f, &t, &u);
        assert_eq!(g.forms.len(), 2);
        assert_eq!(d, Distance::Finite(Ratio::new(3, 2)));
        let w = MulGate { forms: vec![var(&f, 4, 3)] };
        assert_eq!(gcd_and_distance(&f, &t, &w).1, Distance::Infinite);
    }

    #[test]
    fn gcd_ignores_scalars() {
        let f = PrimeField::new(101).unwrap();
        let t = MulGate { forms: vec![var(&f, 2, 0).scale(&f, &3), var(&f, 2, 1)] };
        let u = MulGate { forms: vec![var(&f, 2, 0).scale(&f, &5)] };
        assert_eq!(circuit_gcd(&f, &[t, u]), vec![var(&f, 2, 0)]);
    }

    #[test]
    fn circuit_json_round_trip() {
        let f = PrimeField::new(101).unwrap();
        let g1 = Gate::Mul(MulGate { forms: vec![var(&f, 2, 0), var(&f, 2, 1)] });
        let g2 = Gate::Power(PowerGate { form: var(&f, 2, 0), power: 2 });
        let c = DepthThreeCircuit::new(2, CircuitKind::General, vec![g1, g2]);
        let back = DepthThreeCircuit::from_json(&f, &c.to_json(&f)).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.eval(&f, &[2, 3]), 10);
    }
}
