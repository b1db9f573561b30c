//! Restrictions to shifted coordinate subspaces, cluster tuples and the hybrid walk.

use std::collections::HashMap;

use rand::RngCore;
use rand_chacha::ChaCha8Rng;

use super::cluster::{cluster, is_strong, ClusterPartition};
use super::lowdeg::reconstruct_ml_lowrank;
use super::MlConfig;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::interp::berlekamp_welch;
use crate::oracle::BlackBoxOracle;
use crate::pit::oracles_equal;
use crate::poly::{CircuitKind, DepthThreeCircuit};
use crate::upoly;

/// `V_B + shift`, parametrised by the coordinates in `coords`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSubspace<E> {
    pub coords: Vec<usize>,
    pub shift: Vec<E>,
}

impl<E: Clone + PartialEq + Send + Sync + 'static> AffineSubspace<E> {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn contains(&self, x: &[E]) -> bool {
        x.len() == self.shift.len() && (0..x.len()).all(|v| self.coords.contains(&v) || x[v] == self.shift[v])
    }

    pub fn with_coord(&self, i: usize) -> Self {
        let mut coords = self.coords.clone();
        coords.push(i);
        AffineSubspace { coords, shift: self.shift.clone() }
    }

    /// `y -> f(shift + sum_t y_t e_{coords[t]})`.
    pub fn restrict<F: Field<Elem = E>>(&self, o: &BlackBoxOracle<F>) -> BlackBoxOracle<F> {
        let f = o.field().clone();
        let parent = o.clone();
        let sp = self.clone();
        let deg = o.degree_bound().min(self.dim());
        BlackBoxOracle::new(f.clone(), self.dim(), deg, "affine-subspace", move |y: &[E]| {
            let mut x = sp.shift.clone();
            for (t, &v) in sp.coords.iter().enumerate() {
                x[v] = f.add(&x[v], &y[t]);
            }
            parent.eval(&x)
        })
        .with_var_degree(1)
    }
}

/// `(1, a, a^2, ..., a^{n-1})`.
pub fn moment_point<F: Field>(f: &F, alpha: &F::Elem, n: usize) -> Vec<F::Elem> {
    let mut out = Vec::with_capacity(n);
    let mut p = f.one();
    for _ in 0..n {
        out.push(p.clone());
        p = f.mul(&p, alpha);
    }
    out
}

/// Cluster polynomials restricted to one subspace, in a fixed order.
#[derive(Debug, Clone)]
pub struct ClusterTuple<F: Field> {
    pub parts: Vec<BlackBoxOracle<F>>,
}

fn sub_circuit<E: Clone + PartialEq + std::fmt::Debug>(c: &DepthThreeCircuit<E>, idx: &[usize]) -> DepthThreeCircuit<E> {
    let gates = c.mul_gates();
    DepthThreeCircuit::from_mul_gates(c.nvars, CircuitKind::Multilinear, idx.iter().map(|&i| gates[i].clone()).collect())
}

fn split<F: Field>(f: &F, c: &DepthThreeCircuit<F::Elem>, p: &ClusterPartition) -> ClusterTuple<F> {
    ClusterTuple {
        parts: p.clusters.iter().map(|cl| BlackBoxOracle::from_circuit(f.clone(), sub_circuit(c, cl))).collect(),
    }
}

/// Fix the last variable of an oracle.
fn fix_last<F: Field>(o: &BlackBoxOracle<F>, value: F::Elem) -> BlackBoxOracle<F> {
    let mut fixed: Vec<Option<F::Elem>> = vec![None; o.nvars()];
    *fixed.last_mut().expect("at least one variable") = Some(value);
    o.restrict(&fixed)
}

fn learn_and_cluster<F: Field>(
    o: &BlackBoxOracle<F>,
    k: usize,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Result<(DepthThreeCircuit<F::Elem>, ClusterPartition)> {
    let f = o.field().clone();
    let c = reconstruct_ml_lowrank(o, k, cfg, rng).map_err(|e| Error::CandidateRejected(e.to_string()))?;
    let gates = c.mul_gates();
    let p = cluster(&f, &gates, &cfg.cluster);
    if !is_strong(&f, &gates, &p, cfg.cluster.kappa) {
        return Err(Error::CandidateRejected("clustering is not strong".into()));
    }
    Ok((c, p))
}

/// Learn `f` on `V_B + a` for `a` on the moment curve and cluster the result.
pub fn choose_subspace_and_learn<F: Field>(
    o: &BlackBoxOracle<F>,
    k: usize,
    cfg: &MlConfig,
    alpha: &F::Elem,
    coords: &[usize],
    rng: &mut dyn RngCore,
) -> Result<(AffineSubspace<F::Elem>, DepthThreeCircuit<F::Elem>, ClusterPartition)> {
    let f = o.field().clone();
    let space = AffineSubspace { coords: coords.to_vec(), shift: moment_point(&f, alpha, o.nvars()) };
    let (c, p) = learn_and_cluster(&space.restrict(o), k, cfg, rng)?;
    Ok((space, c, p))
}

/// Move a tuple from `a` to the point differing from it only in coordinate `i`.
pub fn jump_one<F: Field>(
    o: &BlackBoxOracle<F>,
    k: usize,
    cfg: &MlConfig,
    at: &AffineSubspace<F::Elem>,
    i: usize,
    value: &F::Elem,
    tuple: &ClusterTuple<F>,
    rng: &mut dyn RngCore,
) -> Result<ClusterTuple<F>> {
    let f = o.field().clone();
    let delta = f.sub(value, &at.shift[i]);
    if f.is_zero(&delta) {
        return Ok(tuple.clone());
    }
    let mut moved = at.clone();
    moved.shift[i] = value.clone();
    if tuple.parts.len() == 1 {
        return Ok(ClusterTuple { parts: vec![moved.restrict(o)] });
    }
    let ext = at.with_coord(i);
    let (c, p) = learn_and_cluster(&ext.restrict(o), k, cfg, rng)?;
    if p.clusters.len() != tuple.parts.len() {
        return Err(Error::CandidateRejected("cluster count changed along the walk".into()));
    }
    let pieces: Vec<BlackBoxOracle<F>> = split(&f, &c, &p).parts;
    let mut out: Vec<Option<BlackBoxOracle<F>>> = vec![None; tuple.parts.len()];
    for piece in &pieces {
        let at_a = fix_last(piece, f.zero());
        let hits: Vec<usize> =
            (0..tuple.parts.len()).filter(|&t| oracles_equal(&at_a, &tuple.parts[t], &cfg.pit, rng)).collect();
        match hits.as_slice() {
            [t] if out[*t].is_none() => out[*t] = Some(fix_last(piece, delta.clone())),
            _ => return Err(Error::CandidateRejected("no unique cluster match".into())),
        }
    }
    Ok(ClusterTuple { parts: out.into_iter().map(|p| p.expect("all clusters matched")).collect() })
}

/// Walks from the base point to arbitrary points, caching tuples by walked prefix.
pub struct ClusterWalker<F: Field> {
    oracle: BlackBoxOracle<F>,
    k: usize,
    cfg: MlConfig,
    base: AffineSubspace<F::Elem>,
    tuple: ClusterTuple<F>,
    order: Vec<usize>,
    tuples: HashMap<Vec<F::Elem>, ClusterTuple<F>>,
    values: HashMap<Vec<F::Elem>, Vec<F::Elem>>,
    rng: ChaCha8Rng,
}

impl<F: Field> ClusterWalker<F> {
    pub fn new(
        oracle: BlackBoxOracle<F>,
        k: usize,
        cfg: MlConfig,
        base: AffineSubspace<F::Elem>,
        tuple: ClusterTuple<F>,
        rng: ChaCha8Rng,
    ) -> Self {
        let order = (0..oracle.nvars()).filter(|v| !base.coords.contains(v)).collect();
        ClusterWalker { oracle, k, cfg, base, tuple, order, tuples: HashMap::new(), values: HashMap::new(), rng }
    }

    pub fn clusters(&self) -> usize {
        self.tuple.parts.len()
    }

    /// Tuple on `V_B + p` where `p` agrees with `b` outside `B`.
    fn tuple_at(&mut self, b: &[F::Elem]) -> Result<ClusterTuple<F>> {
        let mut cur = self.base.clone();
        let mut tuple = self.tuple.clone();
        for t in 0..self.order.len() {
            let v = self.order[t];
            if cur.shift[v] == b[v] {
                continue;
            }
            let key: Vec<F::Elem> = self.order[..=t].iter().map(|&u| b[u].clone()).collect();
            tuple = match self.tuples.get(&key) {
                Some(tp) => tp.clone(),
                None => {
                    let tp = jump_one(&self.oracle, self.k, &self.cfg, &cur, v, &b[v], &tuple, &mut self.rng)?;
                    self.tuples.insert(key, tp.clone());
                    tp
                }
            };
            cur.shift[v] = b[v].clone();
        }
        Ok(tuple)
    }

    /// `(C_1(b), ..., C_s(b))` by one hybrid walk.
    pub fn eval_direct(&mut self, b: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if let Some(v) = self.values.get(b) {
            return Ok(v.clone());
        }
        let f = self.oracle.field().clone();
        let tuple = self.tuple_at(b)?;
        let y: Vec<F::Elem> = self.base.coords.iter().map(|&v| f.sub(&b[v], &self.base.shift[v])).collect();
        let vals: Vec<F::Elem> = tuple.parts.iter().map(|p| p.eval(&y)).collect();
        let total = vals.iter().fold(f.zero(), |a, v| f.add(&a, v));
        if total != self.oracle.eval(b) {
            return Err(Error::CandidateRejected("cluster values do not sum to f".into()));
        }
        self.values.insert(b.to_vec(), vals.clone());
        Ok(vals)
    }

    /// Walk to points of the line through the base point and `b`, then decode
    /// each cluster's restriction with Berlekamp-Welch.
    pub fn eval_line(&mut self, b: &[F::Elem]) -> Result<Vec<F::Elem>> {
        let f = self.oracle.field().clone();
        let a = self.base.shift.clone();
        let dir: Vec<F::Elem> = b.iter().zip(&a).map(|(x, y)| f.sub(x, y)).collect();
        let deg = self.order.iter().filter(|&&v| !f.is_zero(&dir[v])).count() + self.base.dim();
        let want = deg + 2 * self.cfg.line_errors + 2;
        let m = (want as u128).min(f.order_u128().saturating_sub(2)) as usize;
        if m <= deg + 1 {
            return Err(Error::CandidateRejected("field too small for line decoding".into()));
        }
        let e = (m - deg - 2) / 2;
        let ts: Vec<F::Elem> = (0..m as u64).map(|i| f.nth_element(i + 2)).collect();
        let s = self.clusters();
        let mut cols: Vec<Vec<F::Elem>> = vec![Vec::with_capacity(m); s];
        for t in &ts {
            let p: Vec<F::Elem> = a.iter().zip(&dir).map(|(x, d)| f.add(x, &f.mul(t, d))).collect();
            let vals = self.eval_direct(&p).unwrap_or_else(|_| vec![f.zero(); s]);
            for (c, v) in cols.iter_mut().zip(vals) {
                c.push(v);
            }
        }
        cols.iter()
            .map(|ys| {
                let poly = berlekamp_welch(&f, &ts, ys, deg, e).map_err(|e| Error::CandidateRejected(e.to_string()))?;
                Ok(upoly::eval(&f, &poly, &f.one()))
            })
            .collect()
    }

    /// Direct walk, falling back to line decoding.
    pub fn eval(&mut self, b: &[F::Elem]) -> Result<Vec<F::Elem>> {
        match self.eval_direct(b) {
            Ok(v) => Ok(v),
            Err(_) => {
                let v = self.eval_line(b)?;
                let f = self.oracle.field();
                let total = v.iter().fold(f.zero(), |acc, x| f.add(&acc, x));
                if total != self.oracle.eval(b) {
                    return Err(Error::CandidateRejected("decoded values do not sum to f".into()));
                }
                self.values.insert(b.to_vec(), v.clone());
                Ok(v)
            }
        }
    }
}

/// Values of every cluster polynomial at `b`.
pub fn eval_clusters<F: Field>(walker: &mut ClusterWalker<F>, b: &[F::Elem]) -> Result<Vec<F::Elem>> {
    walker.eval(b)
}

pub(crate) fn tuple_from<F: Field>(f: &F, c: &DepthThreeCircuit<F::Elem>, p: &ClusterPartition) -> ClusterTuple<F> {
    split(f, c, p)
}
