//! Width reduction: compress every part onto the span of its coefficient functionals.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{self, poly_dependence, Matrix};
use crate::oracle::BlackBoxOracle;
use crate::poly::{CircuitKind, DepthThreeCircuit, Gate, LinearForm, MulGate, VarPartition};

/// Substitution `y_{j,i} = P_{j,i}(X_j)` with `f = h(P)`.
#[derive(Debug, Clone)]
pub struct WidthReductionMap<E> {
    pub partition: VarPartition,
    /// Consecutive blocks of widths `k_j`.
    pub y_partition: VarPartition,
    /// `basis[j][i]` is the original variable kept as `y_{j,i}`.
    pub basis: Vec<Vec<usize>>,
    /// `subst[j][i]` is `P_{j,i}` over the original variables.
    pub subst: Vec<Vec<LinearForm<E>>>,
}

impl<E: Clone + PartialEq + std::fmt::Debug> WidthReductionMap<E> {
    pub fn widths(&self) -> Vec<usize> {
        self.y_partition.widths()
    }

    /// Compose a form in `y` with the substitution.
    pub fn lift_form<F: Field<Elem = E>>(&self, f: &F, l: &LinearForm<E>) -> LinearForm<E> {
        let n = self.partition.nvars();
        let mut out = LinearForm::constant_form(f, n, l.constant.clone());
        for (j, ys) in self.y_partition.parts.iter().enumerate() {
            for (i, &y) in ys.iter().enumerate() {
                if f.is_zero(&l.coeffs[y]) {
                    continue;
                }
                out = out.add(f, &self.subst[j][i].scale(f, &l.coeffs[y]));
            }
        }
        out
    }

    /// Lift a circuit for `h` to a set-multilinear circuit for `f`.
    pub fn lift<F: Field<Elem = E>>(&self, f: &F, c: &DepthThreeCircuit<E>) -> DepthThreeCircuit<E> {
        let gates = c
            .mul_gates()
            .iter()
            .map(|g| Gate::Mul(MulGate { forms: g.forms.iter().map(|l| self.lift_form(f, l)).collect() }))
            .collect();
        DepthThreeCircuit {
            nvars: self.partition.nvars(),
            kind: CircuitKind::SetMultilinear,
            partition: Some(self.partition.clone()),
            gates,
        }
    }
}

/// Black-box access to `h` of width at most `k` with `f = h(P)`.
///
/// Part `j` keeps a basis `S_j` of its coefficient functionals; every other
/// variable of the part is folded into the `P_{j,i}`.
pub fn width_reduce<F: Field>(
    o: &BlackBoxOracle<F>,
    partition: &VarPartition,
    k: usize,
    rng: &mut dyn RngCore,
) -> Result<(BlackBoxOracle<F>, WidthReductionMap<F::Elem>)> {
    let f = o.field().clone();
    let n = o.nvars();
    if partition.nvars() != n {
        return Err(Error::ShapeMismatch("partition does not match the oracle".into()));
    }
    let mut basis = Vec::with_capacity(partition.parts.len());
    let mut subst = Vec::with_capacity(partition.parts.len());
    for part in &partition.parts {
        // coefficient of x_v: f with X_j set to e_v
        let coeff_oracles: Vec<BlackBoxOracle<F>> = part
            .iter()
            .map(|&v| {
                let fixed: Vec<Option<F::Elem>> = (0..n)
                    .map(|u| if part.contains(&u) { Some(if u == v { f.one() } else { f.zero() }) } else { None })
                    .collect();
                o.restrict(&fixed)
            })
            .collect();
        let rels = poly_dependence(&coeff_oracles, rng)?;
        let width = part.len() - rels.len();
        if width > k {
            return Err(Error::NotRepresentable(k));
        }
        let mut red = if rels.is_empty() {
            Matrix::filled(0, part.len(), f.zero())
        } else {
            Matrix::from_rows(rels)?
        };
        let pivots = linalg::rref(&f, &mut red);
        let keep: Vec<usize> = (0..part.len()).filter(|c| !pivots.contains(c)).collect();
        // c_p = -sum_{u kept} red[r][u] c_u for pivot p of row r
        let forms: Vec<LinearForm<F::Elem>> = keep
            .iter()
            .map(|&c| {
                let mut l = LinearForm::zero(&f, n);
                l.coeffs[part[c]] = f.one();
                for (r, &p) in pivots.iter().enumerate() {
                    l.coeffs[part[p]] = f.neg(red.get(r, c));
                }
                l
            })
            .collect();
        basis.push(keep.iter().map(|&c| part[c]).collect::<Vec<usize>>());
        subst.push(forms);
    }
    let widths: Vec<usize> = basis.iter().map(|b| b.len()).collect();
    let y_partition = VarPartition::blocks(&widths);
    let m = y_partition.nvars();
    let targets: Vec<usize> = basis.iter().flatten().copied().collect();
    let parent = o.clone();
    let fc = f.clone();
    let h = BlackBoxOracle::new(f.clone(), m, o.degree_bound(), "width-reduced", move |y: &[F::Elem]| {
        let mut x = vec![fc.zero(); n];
        for (yi, &v) in y.iter().zip(&targets) {
            x[v] = yi.clone();
        }
        parent.eval(&x)
    })
    .with_var_degree(1);
    Ok((h, WidthReductionMap { partition: partition.clone(), y_partition, basis, subst }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::pit::{equal, PitConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wide_rank_one_collapses() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let part = VarPartition::blocks(&[5, 5]);
        let n = 10;
        let mut a = LinearForm::zero(&f, n);
        let mut b = LinearForm::zero(&f, n);
        for v in 0..5 {
            a.coeffs[v] = f.random(&mut rng);
            b.coeffs[5 + v] = f.random(&mut rng);
        }
        let c = DepthThreeCircuit {
            nvars: n,
            kind: CircuitKind::SetMultilinear,
            partition: Some(part.clone()),
            gates: vec![Gate::Mul(MulGate { forms: vec![a, b] })],
        };
        let o = BlackBoxOracle::from_circuit(f, c);
        let (h, map) = width_reduce(&o, &part, 1, &mut rng).unwrap();
        assert_eq!(map.widths(), vec![1, 1]);
        // h is c * y0 * y1
        let cval = h.eval(&[f.one(), f.one()]);
        let mut hy = LinearForm::zero(&f, 2);
        hy.coeffs[0] = cval;
        let hc = DepthThreeCircuit::from_mul_gates(
            2,
            CircuitKind::SetMultilinear,
            vec![MulGate { forms: vec![hy, LinearForm::var(&f, 2, 1)] }],
        );
        assert!(equal(&o, &map.lift(&f, &hc), &PitConfig::default(), &mut rng).is_zero());
        assert_eq!(width_reduce(&o, &part, 0, &mut rng).unwrap_err(), Error::NotRepresentable(0));
    }
}
