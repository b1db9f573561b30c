//! Random planted instances.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use tensorforge::field::{Field, PrimeField};
use tensorforge::poly::{CircuitKind, CpDecomposition, DepthThreeCircuit, LinearForm, MulGate, SparsePoly, Tensor};
use tensorforge::syssolve::PolySystem;
use tensorforge::waring::WaringDecomposition;
use tensorforge::poly::PowerGate;
use tensorforge::Result;

/// Rank-`k` tensor of the given shape with nonzero random factor vectors.
pub fn plant_sml<F: Field>(f: &F, k: usize, shape: &[usize], rng: &mut dyn RngCore) -> CpDecomposition<F::Elem> {
    let factors = (0..k)
        .map(|_| {
            shape
                .iter()
                .map(|&w| loop {
                    let v = f.random_vec(w, rng);
                    if v.iter().any(|c| !f.is_zero(c)) {
                        break v;
                    }
                })
                .collect()
        })
        .collect();
    CpDecomposition { factors }
}

/// Explicit entries of a planted tensor.
pub fn sml_tensor<F: Field>(f: &F, dec: &CpDecomposition<F::Elem>, shape: &[usize]) -> Result<Tensor<F::Elem>> {
    Ok(Tensor::sparse(shape.to_vec(), dec.to_tensor(shape.to_vec()).to_entries(f)?))
}

/// `sum_{i<k} l_i^d` with random homogeneous forms in `n` variables.
pub fn plant_waring<F: Field>(f: &F, n: usize, d: usize, k: usize, rng: &mut dyn RngCore) -> WaringDecomposition<F::Elem> {
    let gates = (0..k)
        .map(|_| PowerGate { form: LinearForm::homogeneous(f.random_vec(n, rng), f.zero()), power: d })
        .collect();
    WaringDecomposition { nvars: n, degree: d, gates }
}

/// The symmetric tensor `sum_i a_i ⊗ ... ⊗ a_i` of a power sum.
pub fn symmetric_tensor<F: Field>(f: &F, dec: &WaringDecomposition<F::Elem>) -> Result<Tensor<F::Elem>> {
    let shape = vec![dec.nvars; dec.degree];
    let terms = dec.gates.iter().map(|g| vec![g.form.coeffs.clone(); dec.degree]).collect();
    Ok(Tensor::sparse(shape.clone(), Tensor::rank_one_sum(shape, terms).to_entries(f)?))
}

fn form_on<F: Field>(f: &F, n: usize, vars: &[usize], rng: &mut dyn RngCore) -> LinearForm<F::Elem> {
    let mut l = LinearForm::constant_form(f, n, f.random(rng));
    for &v in vars {
        l.coeffs[v] = f.random_nonzero(rng);
    }
    l
}

/// `G (T_1 + T_2)`: a shared gcd `G` of `gcd_len` univariate forms and two
/// products over the remaining variables, chunked 3 and 4 at a time after
/// independent shuffles.
pub fn plant_ml_clusters<F: Field>(f: &F, n: usize, gcd_len: usize, rng: &mut dyn RngCore) -> DepthThreeCircuit<F::Elem> {
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    let gcd: Vec<LinearForm<F::Elem>> = vars[..gcd_len].iter().map(|&v| form_on(f, n, &[v], rng)).collect();
    let rest = vars[gcd_len..].to_vec();
    let t1: Vec<LinearForm<F::Elem>> = rest.chunks(3).map(|c| form_on(f, n, c, rng)).collect();
    let mut shuffled = rest;
    shuffled.shuffle(rng);
    let t2: Vec<LinearForm<F::Elem>> = shuffled.chunks(4).map(|c| form_on(f, n, c, rng)).collect();
    let gates = vec![
        MulGate { forms: gcd.iter().cloned().chain(t1).collect() },
        MulGate { forms: gcd.into_iter().chain(t2).collect() },
    ];
    DepthThreeCircuit::from_mul_gates(n, CircuitKind::Multilinear, gates)
}

/// `k` multilinear gates of degree `d`, each over its own random disjoint supports.
pub fn plant_ml_lowdeg<F: Field>(f: &F, n: usize, k: usize, d: usize, rng: &mut dyn RngCore) -> DepthThreeCircuit<F::Elem> {
    let gates = (0..k)
        .map(|_| {
            let mut vars: Vec<usize> = (0..n).collect();
            vars.shuffle(rng);
            let used = rng.gen_range(d..=n.max(d));
            let mut cuts: Vec<usize> = rand::seq::index::sample(rng, used - 1, d - 1).into_vec().into_iter().map(|c| c + 1).collect();
            cuts.sort_unstable();
            let mut bounds = vec![0];
            bounds.extend(cuts);
            bounds.push(used);
            let forms = bounds.windows(2).map(|w| form_on(f, n, &vars[w[0]..w[1]], rng)).collect();
            MulGate { forms }
        })
        .collect();
    DepthThreeCircuit::from_mul_gates(n, CircuitKind::Multilinear, gates)
}

fn all_monomials(n: usize, d: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; n]];
    for v in 0..n {
        let mut next = Vec::new();
        for m in &out {
            let used: u32 = m.iter().sum();
            for e in 0..=(d as u32 - used) {
                let mut m2 = m.clone();
                m2[v] = e;
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

/// Random dense system of `m` equations of degree at most `d` in `n` unknowns.
/// With `plant`, every equation vanishes at a random point, which is returned.
pub fn plant_system(fp: &PrimeField, n: usize, m: usize, d: usize, plant: bool, rng: &mut dyn RngCore) -> Result<(PolySystem, Option<Vec<u64>>)> {
    let monos = all_monomials(n, d);
    let point = plant.then(|| fp.random_vec(n, rng));
    let mut eqs = Vec::with_capacity(m);
    for _ in 0..m {
        let mut terms = Vec::new();
        for e in &monos {
            if rng.gen_bool(0.6) {
                terms.push((e.clone(), fp.random(rng)));
            }
        }
        let mut p = SparsePoly::from_terms(fp, n, terms);
        if let Some(x) = &point {
            let v = p.eval(fp, x);
            p = p.sub(fp, &SparsePoly::constant(fp, n, v));
        }
        eqs.push(p);
    }
    Ok((PolySystem::anonymous(*fp, n, eqs)?, point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tensorforge::rng::from_seed;

    #[test]
    fn lowdeg_plants_are_multilinear() {
        let f = PrimeField::new(101).unwrap();
        let mut rng = from_seed(1);
        for _ in 0..20 {
            let c = plant_ml_lowdeg(&f, 7, 3, 4, &mut rng);
            assert!(c.is_multilinear(&f));
            assert!(c.mul_gates().iter().all(|g| g.forms.len() == 4));
        }
    }

    #[test]
    fn planted_system_vanishes() {
        let f = PrimeField::new(13).unwrap();
        let (sys, x) = plant_system(&f, 3, 4, 2, true, &mut from_seed(2)).unwrap();
        let x = x.unwrap();
        assert!(sys.eqs.iter().all(|e| e.eval(&f, &x) == 0));
    }
}
