//! Multilinear depth-3 reconstruction through clusters.

mod cluster;
mod lowdeg;
mod walk;

pub use cluster::{cluster, delta_rank, is_strong, ClusterConfig, ClusterPartition};
pub use lowdeg::{ml_system, reconstruct_ml_lowdeg, reconstruct_ml_lowrank, total_degree};
pub use walk::{
    choose_subspace_and_learn, eval_clusters, jump_one, moment_point, AffineSubspace, ClusterTuple, ClusterWalker,
};

use std::sync::{Arc, Mutex};

use rand::seq::index::sample;
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::oracle::BlackBoxOracle;
use crate::pit::{equal, is_zero, PitConfig, Verdict};
use crate::poly::{CircuitKind, DepthThreeCircuit, MulGate};

#[derive(Debug, Clone)]
pub struct MlConfig {
    pub pit: PitConfig,
    pub cluster: ClusterConfig,
    /// Size of `B`; `None` means `max(2^k r_init, kappa r_init + 2^k)`.
    pub subspace_size: Option<usize>,
    /// `(alpha, B)` candidates tried before giving up.
    pub budget: usize,
    /// Errors corrected per cluster when decoding along a line.
    pub line_errors: usize,
    pub retries: usize,
    /// Largest unknown count handed to the generic system solver.
    pub system_unknowns: usize,
}

impl Default for MlConfig {
    fn default() -> Self {
        MlConfig {
            pit: PitConfig::default(),
            cluster: ClusterConfig::default(),
            subspace_size: None,
            budget: 200,
            line_errors: 2,
            retries: 4,
            system_unknowns: 8,
        }
    }
}

impl MlConfig {
    pub fn subspace_size(&self, k: usize, n: usize) -> usize {
        let r = self.cluster.r_init.max(1);
        let pow = 1usize << k.min(20);
        self.subspace_size.unwrap_or((pow * r).max(self.cluster.kappa * r + pow)).min(n)
    }
}

fn verified<F: Field>(
    o: &BlackBoxOracle<F>,
    gates: Vec<MulGate<F::Elem>>,
    k: usize,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    let c = DepthThreeCircuit::from_mul_gates(o.nvars(), CircuitKind::Multilinear, gates);
    if c.fan_in() > k || !c.is_multilinear(o.field()) {
        return Err(Error::CandidateRejected("output is not a multilinear circuit of fan-in at most k".into()));
    }
    match equal(o, &c, &cfg.pit, rng) {
        Verdict::Zero => Ok(c),
        Verdict::NonZero(_) => Err(Error::CandidateRejected("assembled circuit differs from f".into())),
    }
}

/// Learn each cluster from black-box access simulated by the walker.
fn learn_clusters<F: Field>(
    o: &BlackBoxOracle<F>,
    k: usize,
    cfg: &MlConfig,
    walker: ClusterWalker<F>,
    sizes: &[usize],
    rng: &mut dyn RngCore,
) -> Result<Vec<MulGate<F::Elem>>> {
    let f = o.field().clone();
    let n = o.nvars();
    let walker = Arc::new(Mutex::new(walker));
    let failure: Arc<Mutex<Option<Error>>> = Arc::new(Mutex::new(None));
    let mut gates = Vec::new();
    for (i, &ki) in sizes.iter().enumerate() {
        let w = Arc::clone(&walker);
        let fail = Arc::clone(&failure);
        let fc = f.clone();
        let ci = BlackBoxOracle::new(f.clone(), n, o.degree_bound(), "cluster", move |x: &[F::Elem]| {
            if fail.lock().expect("flag").is_some() {
                return fc.zero();
            }
            match eval_clusters(&mut w.lock().expect("walker"), x) {
                Ok(v) => v[i].clone(),
                Err(e) => {
                    *fail.lock().expect("flag") = Some(e);
                    fc.zero()
                }
            }
        })
        .with_var_degree(1);
        let learned = reconstruct_ml_lowrank(&ci, ki, cfg, rng);
        if let Some(e) = failure.lock().expect("flag").take() {
            return Err(Error::CandidateRejected(e.to_string()));
        }
        gates.extend(learned.map_err(|e| Error::CandidateRejected(e.to_string()))?.mul_gates());
    }
    let _ = k;
    Ok(gates)
}

/// Multilinear circuit of fan-in at most `k`, through restriction, clustering
/// and per-cluster learning.
pub fn reconstruct_ml<F: Field>(
    o: &BlackBoxOracle<F>,
    k: usize,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    let f = o.field().clone();
    let n = o.nvars();
    let o = o.clone().with_var_degree(1);
    if is_zero(&o, &cfg.pit, rng).is_zero() {
        return Ok(DepthThreeCircuit::from_mul_gates(n, CircuitKind::Multilinear, Vec::new()));
    }
    let b = cfg.subspace_size(k, n);
    let mut direct_tried = false;
    let mut last = String::from("no candidate tried");
    for c in 0..cfg.budget {
        let alpha = f.nth_element(c as u64 + 2);
        let mut coords = sample(rng, n, b).into_vec();
        coords.sort_unstable();
        let (space, circ, part) = match choose_subspace_and_learn(&o, k, cfg, &alpha, &coords, rng) {
            Ok(t) => t,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        if part.clusters.len() == 1 {
            if direct_tried {
                continue;
            }
            direct_tried = true;
            match reconstruct_ml_lowrank(&o, k, cfg, rng).and_then(|c| verified(&o, c.mul_gates(), k, cfg, rng)) {
                Ok(c) => return Ok(c),
                Err(e) => {
                    last = e.to_string();
                    continue;
                }
            }
        }
        let sizes: Vec<usize> = part.clusters.iter().map(|c| c.len()).collect();
        let tuple = walk::tuple_from(&f, &circ, &part);
        let walker = ClusterWalker::new(o.clone(), k, cfg.clone(), space, tuple, ChaCha8Rng::seed_from_u64(rng.next_u64()));
        match learn_clusters(&o, k, cfg, walker, &sizes, rng).and_then(|g| verified(&o, g, k, cfg, rng)) {
            Ok(c) => return Ok(c),
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::ReconstructionFailed(format!("{} candidates exhausted: {last}", cfg.budget)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::poly::LinearForm;
    use rand::Rng;

    fn random_form(f: &PrimeField, n: usize, vars: &[usize], rng: &mut ChaCha8Rng) -> LinearForm<u64> {
        let mut l = LinearForm::constant_form(f, n, f.random(rng));
        for &v in vars {
            l.coeffs[v] = f.random_nonzero(rng);
        }
        l
    }

    #[test]
    fn single_gate_and_two_monomials() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 8;
        let g = MulGate { forms: (0..8).map(|v| random_form(&f, n, &[v], &mut rng)).collect() };
        let o = BlackBoxOracle::from_circuit(f, DepthThreeCircuit::from_mul_gates(n, CircuitKind::Multilinear, vec![g]));
        assert_eq!(reconstruct_ml(&o, 1, &MlConfig::default(), &mut rng).unwrap().fan_in(), 1);
        let n = 4;
        let gates = vec![
            MulGate { forms: vec![LinearForm::var(&f, n, 0), LinearForm::var(&f, n, 1)] },
            MulGate { forms: vec![LinearForm::var(&f, n, 2), LinearForm::var(&f, n, 3)] },
        ];
        let o = BlackBoxOracle::from_circuit(f, DepthThreeCircuit::from_mul_gates(n, CircuitKind::Multilinear, gates));
        assert_eq!(reconstruct_ml(&o, 2, &MlConfig::default(), &mut rng).unwrap().fan_in(), 2);
    }

    #[test]
    fn two_far_clusters_with_gcd() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 16;
        let mut vars: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        vars.shuffle(&mut rng);
        let gcd: Vec<LinearForm<u64>> = vars[..4].iter().map(|&v| random_form(&f, n, &[v], &mut rng)).collect();
        let rest = &vars[4..];
        let t1: Vec<LinearForm<u64>> = rest.chunks(3).map(|c| random_form(&f, n, c, &mut rng)).collect();
        let mut shuffled = rest.to_vec();
        shuffled.shuffle(&mut rng);
        let t2: Vec<LinearForm<u64>> = shuffled.chunks(4).map(|c| random_form(&f, n, c, &mut rng)).collect();
        let gates = vec![
            MulGate { forms: gcd.iter().cloned().chain(t1).collect() },
            MulGate { forms: gcd.iter().cloned().chain(t2).collect() },
        ];
        let o = BlackBoxOracle::from_circuit(f, DepthThreeCircuit::from_mul_gates(n, CircuitKind::Multilinear, gates));
        let cfg = MlConfig { subspace_size: Some(10), ..MlConfig::default() };
        let c = reconstruct_ml(&o, 2, &cfg, &mut rng).unwrap();
        assert!(c.fan_in() <= 2);
        let _ = rng.gen::<u8>();
    }
}
