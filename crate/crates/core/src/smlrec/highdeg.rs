//! High-degree learner: linear-form pairs, candidate partial gates, completion.

use rand::seq::index::sample;
use rand::RngCore;

use super::{embed_form, reconstruct_sml, sml_circuit, SmlConfig};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{self, Matrix};
use crate::oracle::BlackBoxOracle;
use crate::pit::{equal, Verdict};
use crate::poly::{DepthThreeCircuit, LinearForm, MulGate, VarPartition};

/// Two non-proportional forms on the same part, from different gates.
#[derive(Debug, Clone)]
pub struct FormPair<E> {
    pub part: usize,
    pub first: LinearForm<E>,
    pub second: LinearForm<E>,
}

/// Guessed gate restrictions to the parts in `support`.
#[derive(Debug, Clone)]
pub struct CandidateTuple<E> {
    pub support: Vec<usize>,
    pub gates: Vec<MulGate<E>>,
}

/// Lexicographic `r`-subsets of `0..n`.
struct Subsets {
    n: usize,
    cur: Option<Vec<usize>>,
}

impl Subsets {
    fn new(n: usize, r: usize) -> Self {
        Subsets { n, cur: (r <= n).then(|| (0..r).collect()) }
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let r = out.len();
        let mut next = out.clone();
        let mut i = r;
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - r + i {
                next[i] += 1;
                for j in i + 1..r {
                    next[j] = next[j - 1] + 1;
                }
                self.cur = Some(next);
                break;
            }
        }
        Some(out)
    }
}

fn form_on_part<F: Field>(f: &F, g: &MulGate<F::Elem>, vars: &[usize]) -> Option<LinearForm<F::Elem>> {
    g.forms.iter().find(|l| !l.is_constant(f) && l.support(f).iter().all(|v| vars.contains(v))).cloned()
}

fn gate_scalar<F: Field>(f: &F, g: &MulGate<F::Elem>) -> F::Elem {
    g.forms.iter().filter(|l| l.is_constant(f)).fold(f.one(), |acc, l| f.mul(&acc, &l.constant))
}

/// Restrict `threshold` random parts, learn the small circuit and collect
/// pairs of distinct forms sharing a part.
pub fn find_linear_form_pairs<F: Field>(
    o: &BlackBoxOracle<F>,
    partition: &VarPartition,
    k: usize,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Result<Vec<FormPair<F::Elem>>> {
    let f = o.field().clone();
    let n = o.nvars();
    let d = partition.parts.len();
    let t = cfg.low_degree_threshold(k).min(d);
    let mut sub_cfg = cfg.clone();
    sub_cfg.low_degree_max = Some(t);
    let cap = 2 * k * k * k;
    for _ in 0..cfg.retries {
        let mut chosen = sample(rng, d, t).into_vec();
        chosen.sort_unstable();
        let coords: Vec<usize> = chosen.iter().flat_map(|&j| partition.parts[j].iter().copied()).collect();
        let base = f.random_vec(n, rng);
        let sub = o.coordinate_subspace(&coords, &base).with_degree(t);
        let widths: Vec<usize> = chosen.iter().map(|&j| partition.parts[j].len()).collect();
        let sub_part = VarPartition::blocks(&widths);
        let c = match reconstruct_sml(&sub, &sub_part, k, &sub_cfg, rng) {
            Ok(c) => c,
            Err(Error::NotRepresentable(kk)) => return Err(Error::NotRepresentable(kk)),
            Err(_) => continue,
        };
        let gates = c.mul_gates();
        if gates.len() < 2 {
            continue;
        }
        let mut pairs: Vec<FormPair<F::Elem>> = Vec::new();
        for (si, &j) in chosen.iter().enumerate() {
            let forms: Vec<LinearForm<F::Elem>> =
                gates.iter().filter_map(|g| form_on_part(&f, g, &sub_part.parts[si])).collect();
            for a in 0..forms.len() {
                for b in a + 1..forms.len() {
                    if forms[a].proportional(&f, &forms[b]) {
                        continue;
                    }
                    let first = embed_form(&f, &forms[a], &coords, n);
                    let second = embed_form(&f, &forms[b], &coords, n);
                    if pairs.iter().any(|p| p.part == j && p.first.proportional(&f, &first) && p.second.proportional(&f, &second)) {
                        continue;
                    }
                    pairs.push(FormPair { part: j, first, second });
                    if pairs.len() >= cap {
                        return Ok(pairs);
                    }
                }
            }
        }
        if !pairs.is_empty() {
            return Ok(pairs);
        }
    }
    Ok(Vec::new())
}

/// `f` on the hyperplane `l = 0`, eliminating the first variable of `l`.
fn hyperplane<F: Field>(o: &BlackBoxOracle<F>, l: &LinearForm<F::Elem>) -> Result<BlackBoxOracle<F>> {
    let f = o.field().clone();
    let sup = l.support(&f);
    let v = *sup.first().ok_or_else(|| Error::InvalidInput("zero hyperplane".into()))?;
    let inv = f.inv(&l.coeffs[v])?;
    let others: Vec<(usize, F::Elem)> =
        sup[1..].iter().map(|&u| (u, f.neg(&f.mul(&inv, &l.coeffs[u])))).collect();
    let parent = o.clone();
    let fc = f.clone();
    Ok(BlackBoxOracle::new(f, o.nvars(), o.degree_bound(), "hyperplane", move |x: &[F::Elem]| {
        let mut y = x.to_vec();
        y[v] = others.iter().fold(fc.zero(), |acc, (u, c)| fc.add(&acc, &fc.mul(c, &x[*u])));
        parent.eval(&y)
    })
    .with_var_degree(1))
}

/// Gates of `f` on the two hyperplanes of `pair`, without their forms on the pair's part.
fn hyperplane_gates<F: Field>(
    o: &BlackBoxOracle<F>,
    partition: &VarPartition,
    k: usize,
    pair: &FormPair<F::Elem>,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Vec<MulGate<F::Elem>> {
    let f = o.field().clone();
    let mut s: Vec<MulGate<F::Elem>> = Vec::new();
    for l in [&pair.first, &pair.second] {
        let Ok(h) = hyperplane(o, l) else { continue };
        let Ok(c) = reconstruct_sml(&h, partition, k - 1, cfg, rng) else { continue };
        for g in c.mul_gates() {
            let mut forms: Vec<LinearForm<F::Elem>> = Vec::new();
            let mut ok = true;
            for (j, vars) in partition.parts.iter().enumerate() {
                if j == pair.part {
                    continue;
                }
                match form_on_part(&f, &g, vars) {
                    Some(l) => forms.push(l),
                    None => ok = false,
                }
            }
            if ok {
                forms[0] = forms[0].scale(&f, &gate_scalar(&f, &g));
                s.push(MulGate { forms });
            }
        }
    }
    s
}

/// Candidate restrictions of the `k` gates to `|Z|` parts avoiding the pair's part.
///
/// Returns a lazy stream over `Z` and `k`-subsets of the learned gates.
pub fn candidate_divisors<'a, F: Field>(
    o: &BlackBoxOracle<F>,
    partition: &'a VarPartition,
    k: usize,
    pair: &FormPair<F::Elem>,
    z_size: usize,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Box<dyn Iterator<Item = CandidateTuple<F::Elem>> + 'a>
where
    F: 'a,
{
    let s = hyperplane_gates(o, partition, k, pair, cfg, rng);
    let others: Vec<usize> = (0..partition.parts.len()).filter(|&j| j != pair.part).collect();
    let pick = k.min(s.len());
    let a = pair.part;
    Box::new(Subsets::new(others.len(), z_size).flat_map(move |zi| {
        let z: Vec<usize> = zi.iter().map(|&i| others[i]).collect();
        let s = s.clone();
        Subsets::new(s.len(), pick).map(move |ti| {
            let gates = ti
                .iter()
                .map(|&g| {
                    // forms in `s` skip part `a`
                    let forms = z.iter().map(|&j| s[g].forms[if j < a { j } else { j - 1 }].clone()).collect();
                    MulGate { forms }
                })
                .collect();
            CandidateTuple { support: z.clone(), gates }
        })
    }))
}

fn eval_product<F: Field>(f: &F, forms: &[LinearForm<F::Elem>], x: &[F::Elem]) -> F::Elem {
    forms.iter().fold(f.one(), |acc, l| f.mul(&acc, &l.eval(f, x)))
}

/// Recover the remaining forms of every gate from a candidate tuple.
pub fn complete_circuit<F: Field>(
    o: &BlackBoxOracle<F>,
    partition: &VarPartition,
    k: usize,
    cand: &CandidateTuple<F::Elem>,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    let f = o.field().clone();
    let n = o.nvars();
    let m = cand.gates.len();
    let z_vars: Vec<usize> = cand.support.iter().flat_map(|&j| partition.parts[j].iter().copied()).collect();
    let point = |rng: &mut dyn RngCore| {
        let mut x = vec![f.zero(); n];
        for &v in &z_vars {
            x[v] = f.random(rng);
        }
        x
    };
    // evaluations of the candidate products at random points
    let npts = m + 4;
    let pts: Vec<Vec<F::Elem>> = (0..npts).map(|_| point(rng)).collect();
    let ev = Matrix::from_rows(
        cand.gates.iter().map(|g| pts.iter().map(|p| eval_product(&f, &g.forms, p)).collect()).collect(),
    )?;
    let basis = linalg::independent_rows(&f, &ev);
    let c = basis.len();
    if c == 0 {
        return Err(Error::CandidateRejected("candidate products vanish".into()));
    }
    // G_i = sum_t M[i][t] G_{basis_t}
    let bt = Matrix::from_rows(basis.iter().map(|&b| ev.row(b).to_vec()).collect())?.transpose();
    let mut mrows = Vec::with_capacity(m);
    for i in 0..m {
        let row = linalg::solve(&f, &bt, ev.row(i)).map_err(|_| Error::CandidateRejected("dependent products".into()))?;
        mrows.push(row);
    }
    let (bmat, betas) = (0..cfg.retries.max(1))
        .find_map(|_| {
            let betas: Vec<Vec<F::Elem>> = (0..c).map(|_| point(rng)).collect();
            let b = Matrix::from_rows(
                betas.iter().map(|p| basis.iter().map(|&t| eval_product(&f, &cand.gates[t].forms, p)).collect()).collect(),
            )
            .ok()?;
            linalg::inverse(&f, &b).ok().map(|bi| (bi, betas))
        })
        .ok_or_else(|| Error::CandidateRejected("no invertible evaluation matrix".into()))?;
    let rest: Vec<usize> = (0..partition.parts.len()).filter(|j| !cand.support.contains(j)).collect();
    let rest_vars: Vec<usize> = rest.iter().flat_map(|&j| partition.parts[j].iter().copied()).collect();
    let mut widths = vec![c];
    widths.extend(rest.iter().map(|&j| partition.parts[j].len()));
    let gpart = VarPartition::blocks(&widths);
    let parent = o.clone();
    let fc = f.clone();
    let rv = rest_vars.clone();
    let g = BlackBoxOracle::new(f.clone(), c + rest_vars.len(), rest.len() + 1, "completion", move |x: &[F::Elem]| {
        let (z, y) = x.split_at(c);
        let mut acc = fc.zero();
        for (s, beta) in betas.iter().enumerate() {
            // (z^T B^-1)_s
            let w = (0..c).fold(fc.zero(), |a, t| fc.add(&a, &fc.mul(&z[t], bmat.get(t, s))));
            if fc.is_zero(&w) {
                continue;
            }
            let mut p = beta.clone();
            for (yi, &v) in y.iter().zip(&rv) {
                p[v] = yi.clone();
            }
            acc = fc.add(&acc, &fc.mul(&w, &parent.eval(&p)));
        }
        acc
    })
    .with_var_degree(1);
    let mut gcfg = cfg.clone();
    gcfg.low_degree_max = Some(usize::MAX);
    let gc = reconstruct_sml(&g, &gpart, k, &gcfg, rng).map_err(|e| Error::CandidateRejected(e.to_string()))?;
    let mut gates = Vec::new();
    for gate in gc.mul_gates() {
        let scalar = gate_scalar(&f, &gate);
        let zf = form_on_part(&f, &gate, &gpart.parts[0])
            .ok_or_else(|| Error::CandidateRejected("gate without a z-form".into()))?;
        let w = &zf.coeffs[..c];
        let (i, lambda) = mrows
            .iter()
            .enumerate()
            .find_map(|(i, r)| {
                let p = r.iter().position(|x| !f.is_zero(x))?;
                let lam = f.div(&w[p], &r[p]).ok()?;
                (0..c).all(|t| w[t] == f.mul(&lam, &r[t])).then_some((i, lam))
            })
            .ok_or_else(|| Error::CandidateRejected("z-form outside the candidate span".into()))?;
        let mut forms: Vec<LinearForm<F::Elem>> = cand.gates[i].forms.clone();
        forms[0] = forms[0].scale(&f, &f.mul(&lambda, &scalar));
        for (ri, _) in rest.iter().enumerate() {
            let l = form_on_part(&f, &gate, &gpart.parts[ri + 1])
                .ok_or_else(|| Error::CandidateRejected("gate misses a part".into()))?;
            let mut out = LinearForm::zero(&f, n);
            for &gv in &gpart.parts[ri + 1] {
                out.coeffs[rest_vars[gv - c]] = l.coeffs[gv].clone();
            }
            forms.push(out);
        }
        gates.push(forms);
    }
    let circuit = sml_circuit(&f, partition, gates);
    match equal(o, &circuit, &cfg.pit, rng) {
        Verdict::Zero => Ok(circuit),
        Verdict::NonZero(_) => Err(Error::CandidateRejected("completed circuit differs".into())),
    }
}

/// Pairs, then candidates, then completion, under the candidate budget.
pub(crate) fn reconstruct_high_degree<F: Field>(
    o: &BlackBoxOracle<F>,
    partition: &VarPartition,
    k: usize,
    cfg: &SmlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    let d = partition.parts.len();
    let t = cfg.low_degree_threshold(k);
    if k < 2 || d <= t || t < 2 {
        return Err(Error::PreconditionViolated("high-degree learner needs k >= 2 and more parts than the threshold".into()));
    }
    // completion sees the z-block plus the parts outside Z
    let z_size = d + 1 - t;
    let pairs = find_linear_form_pairs(o, partition, k, cfg, rng)?;
    if pairs.is_empty() {
        return Err(Error::ReconstructionFailed("no linear-form pair found".into()));
    }
    let mut tried = 0usize;
    for pair in &pairs {
        for cand in candidate_divisors(o, partition, k, pair, z_size, cfg, rng) {
            if tried >= cfg.candidate_budget {
                return Err(Error::BudgetExceeded(format!("{tried} candidates")));
            }
            tried += 1;
            match complete_circuit(o, partition, k, &cand, cfg, rng) {
                Ok(c) => return Ok(c),
                Err(Error::CandidateRejected(_)) | Err(Error::Singular) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Err(Error::ReconstructionFailed(format!("{tried} candidates rejected")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::poly::CircuitKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subsets_enumerate() {
        let all: Vec<Vec<usize>> = Subsets::new(4, 2).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[5], vec![2, 3]);
        assert_eq!(Subsets::new(3, 0).count(), 1);
        assert_eq!(Subsets::new(2, 3).count(), 0);
    }

    #[test]
    fn fan_in_two_degree_six() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let part = VarPartition::blocks(&[2; 6]);
        let n = part.nvars();
        let gates: Vec<MulGate<u64>> = (0..2)
            .map(|_| MulGate {
                forms: part
                    .parts
                    .iter()
                    .map(|vars| {
                        let mut l = LinearForm::zero(&f, n);
                        for &v in vars {
                            l.coeffs[v] = f.random(&mut rng);
                        }
                        l
                    })
                    .collect(),
            })
            .collect();
        let mut c = DepthThreeCircuit::from_mul_gates(n, CircuitKind::SetMultilinear, gates);
        c.partition = Some(part.clone());
        let o = BlackBoxOracle::from_circuit(f, c);
        let cfg = SmlConfig { low_degree_max: Some(3), ..SmlConfig::default() };
        let got = reconstruct_high_degree(&o, &part, 2, &cfg, &mut rng).unwrap();
        assert_eq!(got.fan_in(), 2);
        assert!(equal(&o, &got, &cfg.pit, &mut rng).is_zero());
    }
}
