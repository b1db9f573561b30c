//! Rank distance between sub-circuits and strong clusterings.

use crate::field::Field;
use crate::linalg::{self, Matrix};
use crate::poly::{circuit_gcd, LinearForm, MulGate};

/// Radius and separation knobs.
#[derive(Debug, Clone)]
pub struct ClusterConfig {
    pub r_init: usize,
    pub kappa: usize,
    /// Constant `c` in `R_M(k) = c k^3 max(1, log2 k)`.
    pub rm_const: usize,
}

impl ClusterConfig {
    pub fn rm(&self, k: usize) -> usize {
        let lg = (k.max(1) as f64).log2().ceil().max(1.0) as usize;
        self.rm_const * k * k * k * lg
    }

    /// `r_init = R_M(2k)`, `kappa = max(k^3, k^2 + 1)`.
    pub fn canonical(k: usize) -> Self {
        let base = ClusterConfig { r_init: 1, kappa: 2, rm_const: 8 };
        ClusterConfig { r_init: base.rm(2 * k), kappa: (k * k * k).max(k * k + 1), rm_const: 8 }
    }
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig { r_init: 1, kappa: 5, rm_const: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    pub clusters: Vec<Vec<usize>>,
    pub r: usize,
}

fn strip<F: Field>(f: &F, gate: &MulGate<F::Elem>, common: &[LinearForm<F::Elem>]) -> Vec<LinearForm<F::Elem>> {
    let mut rest = gate.canonical(f).1;
    for l in common {
        if let Some(p) = rest.iter().position(|m| m == l) {
            rest.remove(p);
        }
    }
    rest
}

/// Rank of the linear forms left in `c1 + c2` after removing their gcd.
pub fn delta_rank<F: Field>(f: &F, c1: &[MulGate<F::Elem>], c2: &[MulGate<F::Elem>]) -> usize {
    let all: Vec<MulGate<F::Elem>> = c1.iter().chain(c2).cloned().collect();
    if all.is_empty() {
        return 0;
    }
    let common = circuit_gcd(f, &all);
    let rows: Vec<Vec<F::Elem>> = all.iter().flat_map(|g| strip(f, g, &common)).map(|l| l.coeffs).collect();
    if rows.is_empty() {
        return 0;
    }
    Matrix::from_rows(rows).map(|m| linalg::rank(f, &m)).unwrap_or(0)
}

fn pick<E: Clone>(gates: &[MulGate<E>], idx: &[usize]) -> Vec<MulGate<E>> {
    idx.iter().map(|&i| gates[i].clone()).collect()
}

/// Direct check of the `(kappa, r)`-strong conditions.
pub fn is_strong<F: Field>(f: &F, gates: &[MulGate<F::Elem>], p: &ClusterPartition, kappa: usize) -> bool {
    let cs: Vec<Vec<MulGate<F::Elem>>> = p.clusters.iter().map(|c| pick(gates, c)).collect();
    let inner = cs.iter().all(|c| delta_rank(f, c, &[]) <= p.r);
    let outer = (0..cs.len()).all(|i| (i + 1..cs.len()).all(|j| delta_rank(f, &cs[i], &cs[j]) >= kappa * p.r));
    let mut seen: Vec<usize> = p.clusters.iter().flatten().copied().collect();
    seen.sort_unstable();
    inner && outer && seen == (0..gates.len()).collect::<Vec<_>>()
}

fn merge_components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut [usize], mut i: usize) -> usize {
        while uf[i] != i {
            uf[i] = uf[uf[i]];
            i = uf[i];
        }
        i
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        uf[ra] = rb;
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut uf, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Iterative merging: link clusters closer than the current radius, grow the
/// radius by `k` per round, stop after `ceil(log_k kappa)` quiet rounds.
pub fn cluster<F: Field>(f: &F, gates: &[MulGate<F::Elem>], cfg: &ClusterConfig) -> ClusterPartition {
    let k = gates.len();
    if k <= 1 {
        return ClusterPartition { clusters: vec![(0..k).collect()], r: cfg.r_init };
    }
    let mut clusters: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
    let grow = k.max(2);
    let mut quiet_needed = 0;
    let mut span = 1;
    while span < cfg.kappa {
        span *= grow;
        quiet_needed += 1;
    }
    let mut r = cfg.r_init.max(1);
    let mut quiet = 0;
    loop {
        let cs: Vec<Vec<MulGate<F::Elem>>> = clusters.iter().map(|c| pick(gates, c)).collect();
        let mut edges = Vec::new();
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                if delta_rank(f, &cs[i], &cs[j]) < r {
                    edges.push((i, j));
                }
            }
        }
        if edges.is_empty() {
            quiet += 1;
        } else {
            quiet = 0;
            clusters = merge_components(clusters.len(), &edges)
                .into_iter()
                .map(|g| {
                    let mut m: Vec<usize> = g.iter().flat_map(|&c| clusters[c].iter().copied()).collect();
                    m.sort_unstable();
                    m
                })
                .collect();
        }
        if clusters.len() == 1 || quiet >= quiet_needed.max(1) {
            break;
        }
        r *= grow;
    }
    // settle on the smallest radius the clusters support, merging further if needed
    loop {
        let cs: Vec<Vec<MulGate<F::Elem>>> = clusters.iter().map(|c| pick(gates, c)).collect();
        let radius = cs.iter().map(|c| delta_rank(f, c, &[])).max().unwrap_or(0).max(cfg.r_init);
        let mut edges = Vec::new();
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                if delta_rank(f, &cs[i], &cs[j]) < cfg.kappa * radius {
                    edges.push((i, j));
                }
            }
        }
        if edges.is_empty() {
            return ClusterPartition { clusters, r: radius };
        }
        clusters = merge_components(clusters.len(), &edges)
            .into_iter()
            .map(|g| {
                let mut m: Vec<usize> = g.iter().flat_map(|&c| clusters[c].iter().copied()).collect();
                m.sort_unstable();
                m
            })
            .collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    fn mono(f: &PrimeField, n: usize, vars: &[usize], c: u64) -> MulGate<u64> {
        let mut forms: Vec<LinearForm<u64>> = vars.iter().map(|&v| LinearForm::var(f, n, v)).collect();
        forms[0] = forms[0].scale(f, &c);
        MulGate { forms }
    }

    #[test]
    fn distances() {
        let f = PrimeField::new(101).unwrap();
        let a = mono(&f, 4, &[0, 1], 1);
        assert_eq!(delta_rank(&f, &[a.clone()], &[]), 0);
        assert_eq!(delta_rank(&f, &[a.clone()], &[mono(&f, 4, &[2, 3], 1)]), 4);
        assert_eq!(delta_rank(&f, &[a.clone()], &[mono(&f, 4, &[0, 1], 5)]), 0);
    }

    #[test]
    fn far_gates_split() {
        let f = PrimeField::new(101).unwrap();
        let n = 40;
        let gates = vec![mono(&f, n, &(0..20).collect::<Vec<_>>(), 1), mono(&f, n, &(20..40).collect::<Vec<_>>(), 3)];
        let cfg = ClusterConfig { r_init: 2, kappa: 5, rm_const: 8 };
        let p = cluster(&f, &gates, &cfg);
        assert_eq!(p.clusters.len(), 2);
        assert!(is_strong(&f, &gates, &p, cfg.kappa));
        let same = vec![gates[0].clone(), mono(&f, n, &(0..20).collect::<Vec<_>>(), 7)];
        let q = cluster(&f, &same, &cfg);
        assert_eq!(q.clusters.len(), 1);
        assert!(is_strong(&f, &same, &q, cfg.kappa));
        assert_eq!(cluster(&f, &gates[..1], &cfg), ClusterPartition { clusters: vec![vec![0]], r: 2 });
    }
}
