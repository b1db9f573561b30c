//! Set-multilinear depth-3 reconstruction and tensor rank.

pub mod cp;
mod highdeg;
mod width;

pub use cp::{cp_decompose, rank_lower_bound, Terms};
pub use highdeg::{candidate_divisors, complete_circuit, find_linear_form_pairs, CandidateTuple, FormPair};
pub use width::{width_reduce, WidthReductionMap};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::{Field, PrimeField};
use crate::interp::{interpolate_set_multilinear, SparseConfig};
use crate::oracle::BlackBoxOracle;
use crate::pit::{equal, extract_simple, factor_multilinear, is_zero, learn_linear, PitConfig, Verdict};
use crate::poly::{
    circuit_to_tensor, tensor_to_oracle, CircuitKind, CpDecomposition, DepthThreeCircuit, Gate, LinearForm, MulGate,
    SparsePoly, Tensor, VarPartition,
};
use crate::syssolve::{solve_system, PolySystem};

#[derive(Debug, Clone)]
pub struct SmlConfig {
    pub pit: PitConfig,
    /// Completion attempts before giving up.
    pub candidate_budget: usize,
    /// Largest number of parts handled by the low-degree learner; `None` means `2k^2`.
    pub low_degree_max: Option<usize>,
    pub retries: usize,
}

impl Default for SmlConfig {
    fn default() -> Self {
        SmlConfig { pit: PitConfig::default(), candidate_budget: 100_000, low_degree_max: None, retries: 8 }
    }
}

impl SmlConfig {
    pub fn low_degree_threshold(&self, k: usize) -> usize {
        self.low_degree_max.unwrap_or(2 * k * k)
    }
}

/// `l` over sub-variables, re-indexed into `n` variables by `map`.
pub(crate) fn embed_form<F: Field>(f: &F, l: &LinearForm<F::Elem>, map: &[usize], n: usize) -> LinearForm<F::Elem> {
    let mut out = LinearForm::constant_form(f, n, l.constant.clone());
    for (i, c) in l.coeffs.iter().enumerate() {
        out.coeffs[map[i]] = c.clone();
    }
    out
}

/// Circuit with forms reordered by part.
pub(crate) fn sml_circuit<F: Field>(
    f: &F,
    part: &VarPartition,
    gates: Vec<Vec<LinearForm<F::Elem>>>,
) -> DepthThreeCircuit<F::Elem> {
    let owner = part.part_of();
    let key = |l: &LinearForm<F::Elem>| l.support(f).first().map_or(usize::MAX, |&v| owner[v]);
    let gates = gates
        .into_iter()
        .map(|mut forms| {
            forms.sort_by_key(key);
            Gate::Mul(MulGate { forms })
        })
        .collect();
    DepthThreeCircuit { nvars: part.nvars(), kind: CircuitKind::SetMultilinear, partition: Some(part.clone()), gates }
}

fn terms_circuit<F: Field>(f: &F, part: &VarPartition, terms: &Terms<F::Elem>) -> DepthThreeCircuit<F::Elem> {
    let n = part.nvars();
    let gates = terms
        .iter()
        .map(|t| {
            t.iter()
                .zip(&part.parts)
                .map(|(v, vars)| {
                    let mut l = LinearForm::zero(f, n);
                    for (c, &x) in v.iter().zip(vars) {
                        l.coeffs[x] = c.clone();
                    }
                    l
                })
                .collect()
        })
        .collect();
    sml_circuit(f, part, gates)
}

fn verified<F: Field>(
    o: &BlackBoxOracle<F>,
    c: DepthThreeCircuit<F::Elem>,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    match equal(o, &c, &cfg.pit, rng) {
        Verdict::Zero => Ok(c),
        Verdict::NonZero(_) => Err(Error::VerificationFailed("circuit differs from the oracle".into())),
    }
}

/// Coefficient matching for `t = sum_i a_{i,1} (x) ... (x) a_{i,d}`; unknown
/// `a_{i,j,l}` is named `a{i}_{j}_{l}`.
pub fn sml_system(fp: &PrimeField, t: &Tensor<u64>, k: usize) -> Result<PolySystem> {
    let shape = &t.shape;
    let d = shape.len();
    let offset: Vec<usize> = (0..d).map(|j| shape[..j].iter().sum()).collect();
    let per_gate: usize = shape.iter().sum();
    let nv = k * per_gate;
    let names = (0..k)
        .flat_map(|i| (0..d).flat_map(move |j| (0..shape[j]).map(move |l| format!("a{i}_{j}_{l}"))))
        .collect();
    let entries = t.to_entries(fp)?;
    let mut eqs = Vec::new();
    for idx in crate::poly::multi_indices(shape) {
        let mut p = SparsePoly::zero(nv);
        for i in 0..k {
            let mut mono = vec![0u32; nv];
            for (j, &l) in idx.iter().enumerate() {
                mono[i * per_gate + offset[j] + l] = 1;
            }
            p.add_term(fp, mono, 1);
        }
        let c = entries.get(&idx).copied().unwrap_or(0);
        p.add_term(fp, vec![0; nv], fp.neg(&c));
        eqs.push(p);
    }
    PolySystem::new(*fp, names, eqs)
}

fn system_fallback<F: Field>(f: &F, t: &Tensor<F::Elem>, k: usize, rng: &mut dyn RngCore) -> Result<Terms<F::Elem>> {
    let per_gate: usize = t.shape.iter().sum();
    if f.ext_degree() != 1 || k * per_gate > 8 {
        return Err(Error::SearchExhausted("coefficient system too large for the generic solver".into()));
    }
    let fp = PrimeField::new(f.characteristic())?;
    let entries = t
        .to_entries(f)?
        .into_iter()
        .map(|(i, v)| (i, f.as_prime_residue(&v).expect("prime field")))
        .collect();
    let sys = sml_system(&fp, &Tensor::sparse(t.shape.clone(), entries), k)?;
    let sol = match solve_system(&sys, false, rng) {
        Ok(s) => s,
        Err(Error::NoSolution) => return Err(Error::NotRepresentable(k)),
        Err(e) => return Err(e),
    };
    let mut it = sol.values.into_iter().map(|v| f.from_u64(v[0]));
    Ok((0..k).map(|_| t.shape.iter().map(|&w| (0..w).map(|_| it.next().unwrap()).collect()).collect()).collect())
}

/// Learn a set-multilinear circuit of fan-in at most `k` from its coefficient tensor.
pub fn reconstruct_low_degree<F: Field>(
    o: &BlackBoxOracle<F>,
    partition: &VarPartition,
    k: usize,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    let f = o.field().clone();
    let t = interpolate_set_multilinear(o, partition, &SparseConfig::default(), rng)?;
    let terms = match cp::cp_decompose(&f, &t, k, rng) {
        Ok(terms) => terms,
        Err(Error::SearchExhausted(why)) => system_fallback(&f, &t, k, rng).map_err(|e| match e {
            Error::SearchExhausted(_) => Error::SearchExhausted(why),
            other => other,
        })?,
        Err(e) => return Err(e),
    };
    verified(o, terms_circuit(&f, partition, &terms), cfg, rng)
}

/// One gate: every irreducible factor must be linear.
fn single_gate<F: Field>(
    o: &BlackBoxOracle<F>,
    partition: &VarPartition,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    let f = o.field().clone();
    let factors = factor_multilinear(o, &cfg.pit, rng)?;
    let mut forms = Vec::with_capacity(factors.len());
    for fac in &factors {
        match learn_linear(&fac.oracle, &fac.support, &cfg.pit, rng) {
            Some(l) => forms.push(l),
            None => return Err(Error::NotRepresentable(1)),
        }
    }
    // a constant factor carries the scalar of a variable-free polynomial
    if let Some(pos) = forms.iter().position(|l| l.is_constant(&f)) {
        if forms.len() > 1 {
            let c = forms.remove(pos).constant;
            forms[0] = forms[0].scale(&f, &c);
        }
    }
    let c = sml_circuit(&f, partition, vec![forms]);
    if !c.is_set_multilinear(&f) {
        return Err(Error::NotRepresentable(1));
    }
    verified(o, c, cfg, rng)
}

/// Width reduction followed by the low- or high-degree learner.
fn reconstruct_simple<F: Field>(
    o: &BlackBoxOracle<F>,
    partition: &VarPartition,
    k: usize,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    let f = o.field().clone();
    let (h, map) = width_reduce(o, partition, k, rng)?;
    let hc = if partition.parts.len() <= cfg.low_degree_threshold(k) {
        reconstruct_low_degree(&h, &map.y_partition, k, cfg, rng)?
    } else {
        highdeg::reconstruct_high_degree(&h, &map.y_partition, k, cfg, rng)?
    };
    Ok(map.lift(&f, &hc))
}

/// Fan-in exactly at most `k`, after stripping the linear factors shared by all gates.
fn reconstruct_exact<F: Field>(
    o: &BlackBoxOracle<F>,
    partition: &VarPartition,
    k: usize,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    if k == 1 {
        return single_gate(o, partition, cfg, rng);
    }
    let f = o.field().clone();
    let n = o.nvars();
    let sp = extract_simple(o, &cfg.pit, rng)?;
    let owner = partition.part_of();
    let lin_parts: Vec<usize> = sp.linear.iter().map(|l| owner[l.support(&f)[0]]).collect();
    for (l, &j) in sp.linear.iter().zip(&lin_parts) {
        if l.support(&f).iter().any(|&v| owner[v] != j) {
            return Err(Error::NotRepresentable(k));
        }
    }
    let rest: Vec<usize> = (0..partition.parts.len()).filter(|j| !lin_parts.contains(j)).collect();
    if rest.is_empty() {
        return single_gate(o, partition, cfg, rng);
    }
    let map: Vec<usize> = rest.iter().flat_map(|&j| partition.parts[j].iter().copied()).collect();
    let sub_part = VarPartition::new(
        {
            let mut next = 0;
            rest.iter()
                .map(|&j| {
                    let p: Vec<usize> = (next..next + partition.parts[j].len()).collect();
                    next += p.len();
                    p
                })
                .collect()
        },
        map.len(),
    )?;
    let sub = sp.simple.coordinate_subspace(&map, &vec![f.zero(); n]);
    let inner = reconstruct_simple(&sub, &sub_part, k, cfg, rng)?;
    let gates = inner
        .mul_gates()
        .into_iter()
        .map(|g| {
            let mut forms: Vec<LinearForm<F::Elem>> = g.forms.iter().map(|l| embed_form(&f, l, &map, n)).collect();
            forms.extend(sp.linear.iter().cloned());
            forms
        })
        .collect();
    verified(o, sml_circuit(&f, partition, gates), cfg, rng)
}

/// Smallest fan-in `k' <= k` with a verified set-multilinear circuit.
pub fn reconstruct_sml<F: Field>(
    o: &BlackBoxOracle<F>,
    partition: &VarPartition,
    k: usize,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    let f = o.field().clone();
    let o = o.clone().with_degree(partition.parts.len()).with_var_degree(1);
    if is_zero(&o, &cfg.pit, rng).is_zero() {
        return Ok(sml_circuit(&f, partition, Vec::new()));
    }
    let mut certified = true;
    let mut last = String::new();
    for kk in 1..=k {
        match reconstruct_exact(&o, partition, kk, cfg, rng) {
            Ok(c) => return Ok(c),
            Err(Error::NotRepresentable(_)) => {}
            Err(
                e @ (Error::SearchExhausted(_)
                | Error::VerificationFailed(_)
                | Error::CandidateRejected(_)
                | Error::ReconstructionFailed(_)
                | Error::BudgetExceeded(_)
                | Error::TensorTooLarge(_)
                | Error::ZeroInput),
            ) => {
                certified = false;
                last = e.to_string();
            }
            Err(e) => return Err(e),
        }
    }
    if certified {
        Err(Error::NotRepresentable(k))
    } else {
        Err(Error::ReconstructionFailed(last))
    }
}

#[derive(Debug, Clone)]
pub struct TensorRank<E> {
    pub rank: usize,
    pub decomposition: CpDecomposition<E>,
    /// Largest flattening rank, when the tensor is small enough to flatten.
    pub lower_bound: Option<usize>,
}

/// Smallest `k <= k_max` with a verified decomposition of `t`.
pub fn tensor_rank<F: Field>(
    f: &F,
    t: &Tensor<F::Elem>,
    k_max: usize,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Result<TensorRank<F::Elem>> {
    let (o, part) = tensor_to_oracle(f, t);
    let lower_bound = rank_lower_bound(f, t).ok();
    if lower_bound.is_some_and(|lb| lb > k_max) {
        return Err(Error::RankExceedsBound(k_max));
    }
    let c = match reconstruct_sml(&o, &part, k_max, cfg, rng) {
        Ok(c) => c,
        Err(Error::NotRepresentable(_)) | Err(Error::ReconstructionFailed(_)) => return Err(Error::RankExceedsBound(k_max)),
        Err(e) => return Err(e),
    };
    let factors = match circuit_to_tensor(f, &c)?.storage {
        crate::poly::TensorStorage::RankOneSum(terms) => terms,
        crate::poly::TensorStorage::Sparse(_) => unreachable!("circuit tensors are rank-one sums"),
    };
    Ok(TensorRank { rank: factors.len(), decomposition: CpDecomposition { factors }, lower_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    #[test]
    fn diagonal_cube_has_rank_two() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut e = BTreeMap::new();
        e.insert(vec![0, 0, 0], 1);
        e.insert(vec![1, 1, 1], 1);
        let t = Tensor::sparse(vec![2, 2, 2], e);
        let r = tensor_rank(&f, &t, 3, &SmlConfig::default(), &mut rng).unwrap();
        assert_eq!(r.rank, 2);
        assert!(r.decomposition.to_tensor(vec![2, 2, 2]).equals(&f, &t).unwrap());
        assert_eq!(tensor_rank(&f, &t, 1, &SmlConfig::default(), &mut rng).unwrap_err(), Error::RankExceedsBound(1));
    }

    #[test]
    fn zero_and_all_ones() {
        let f = PrimeField::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let zero = Tensor::sparse(vec![2, 2], BTreeMap::new());
        assert_eq!(tensor_rank(&f, &zero, 2, &SmlConfig::default(), &mut rng).unwrap().rank, 0);
        let ones = Tensor::rank_one_sum(vec![2, 2, 2], vec![vec![vec![1, 1]; 3]]);
        assert_eq!(tensor_rank(&f, &ones, 2, &SmlConfig::default(), &mut rng).unwrap().rank, 1);
    }

    #[test]
    fn system_is_satisfied_by_a_decomposition() {
        let f = PrimeField::new(13).unwrap();
        let terms: Terms<u64> = vec![vec![vec![1, 2], vec![3, 1]], vec![vec![0, 1], vec![5, 7]]];
        let t = cp::Dense::from_terms(&f, &[2, 2], &terms).to_tensor(&f);
        let sys = sml_system(&f, &t, 2).unwrap();
        let point: Vec<u64> = terms.iter().flatten().flatten().copied().collect();
        assert!(sys.eqs.iter().all(|e| e.eval(&f, &point) == 0));
        assert_eq!(sys.nvars(), 8);
    }
}
