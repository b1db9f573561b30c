//! Sums of powers of linear forms: reconstruction and symmetric rank.

use rand::RngCore;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{Field, PrimeField};
use crate::interp::{sparse_interpolate, SparseConfig};
use crate::linalg::{self, Matrix};
use crate::oracle::BlackBoxOracle;
use crate::pit::{equal, is_zero, PitConfig};
use crate::poly::{CircuitKind, DepthThreeCircuit, Gate, LinearForm, PowerGate, SparsePoly, Tensor};
use crate::syssolve::{solve_system, PolySystem};
use crate::upoly;
use crate::varred::reduce_variables;

#[derive(Debug, Clone, PartialEq)]
pub struct WaringDecomposition<E> {
    pub nvars: usize,
    pub degree: usize,
    pub gates: Vec<PowerGate<E>>,
}

impl<E: Clone + PartialEq + std::fmt::Debug> WaringDecomposition<E> {
    pub fn fan_in(&self) -> usize {
        self.gates.len()
    }

    pub fn to_circuit(&self) -> DepthThreeCircuit<E> {
        DepthThreeCircuit::new(self.nvars, CircuitKind::Power, self.gates.iter().cloned().map(Gate::Power).collect())
    }

    pub fn to_json<F: Field<Elem = E>>(&self, f: &F) -> Value {
        json!({
            "k": self.gates.len(),
            "degree": self.degree,
            "circuit": self.to_circuit().to_json(f),
        })
    }
}

#[derive(Debug, Clone)]
pub struct WaringConfig {
    pub pit: PitConfig,
    /// Random restarts of the structured decompositions.
    pub retries: usize,
}

impl Default for WaringConfig {
    fn default() -> Self {
        WaringConfig { pit: PitConfig::default(), retries: 8 }
    }
}

/// Polynomial `sum_j T[j_1..j_d] x_{j_1} ... x_{j_d}` of a cubical tensor.
pub fn symmetric_tensor_poly<F: Field>(f: &F, t: &Tensor<F::Elem>) -> Result<SparsePoly<F::Elem>> {
    let n = t.shape.first().copied().unwrap_or(0);
    if t.shape.iter().any(|&s| s != n) {
        return Err(Error::ShapeMismatch("symmetric tensor must be cubical".into()));
    }
    let mut p = SparsePoly::zero(n);
    for (idx, v) in t.to_entries(f)? {
        let mut m = vec![0u32; n];
        for j in idx {
            m[j] += 1;
        }
        p.add_term(f, m, v);
    }
    Ok(p)
}

/// `sum_i (a_i . y)^d` as an explicit polynomial.
fn power_sum<F: Field>(f: &F, forms: &[Vec<F::Elem>], d: usize, m: usize) -> SparsePoly<F::Elem> {
    forms.iter().fold(SparsePoly::zero(m), |acc, a| {
        acc.add(f, &LinearForm::homogeneous(a.clone(), f.zero()).to_poly(f).pow(f, d))
    })
}

fn dth_root<F: Field>(f: &F, c: &F::Elem, d: usize, rng: &mut dyn RngCore) -> Option<F::Elem> {
    if f.is_zero(c) {
        return Some(f.zero());
    }
    let mut poly = vec![f.zero(); d + 1];
    poly[0] = f.neg(c);
    poly[d] = f.one();
    upoly::roots(f, &poly, rng).into_iter().next()
}

fn is_square<F: Field>(f: &F, c: &F::Elem, rng: &mut dyn RngCore) -> Option<F::Elem> {
    dth_root(f, c, 2, rng)
}

/// Solve `g = sum_i lambda_i (a_i . y)^d` for the scalars, then take d-th roots.
fn fit_scalars<F: Field>(
    f: &F,
    g: &SparsePoly<F::Elem>,
    dirs: &[Vec<F::Elem>],
    d: usize,
    rng: &mut dyn RngCore,
) -> Option<Vec<Vec<F::Elem>>> {
    let m = g.nvars;
    let k = dirs.len();
    let npts = k + 4;
    let mut rows = Vec::with_capacity(npts);
    let mut rhs = Vec::with_capacity(npts);
    for _ in 0..npts {
        let y = f.random_vec(m, rng);
        rows.push(dirs.iter().map(|a| f.pow(&f.dot(a, &y), d as u64)).collect());
        rhs.push(g.eval(f, &y));
    }
    let lam = linalg::solve(f, &Matrix::from_rows(rows).ok()?, &rhs).ok()?;
    let mut out = Vec::with_capacity(k);
    for (a, l) in dirs.iter().zip(&lam) {
        if f.is_zero(l) {
            continue;
        }
        let r = dth_root(f, l, d, rng)?;
        out.push(a.iter().map(|x| f.mul(x, &r)).collect());
    }
    (power_sum(f, &out, d, m) == *g).then_some(out)
}

/// One variable: `c y^d` as a sum of at most `k` d-th powers.
fn univariate_case<F: Field>(f: &F, c: &F::Elem, d: usize, k: usize, rng: &mut dyn RngCore) -> Result<Vec<Vec<F::Elem>>> {
    if let Some(r) = dth_root(f, c, d, rng) {
        return Ok(vec![vec![r]]);
    }
    if k < 2 {
        return Err(Error::NotRepresentable(k));
    }
    for _ in 0..256 {
        let rest: Vec<F::Elem> = (1..k).map(|_| f.random(rng)).collect();
        let s = rest.iter().fold(c.clone(), |acc, a| f.sub(&acc, &f.pow(a, d as u64)));
        if let Some(r) = dth_root(f, &s, d, rng) {
            let mut out = vec![vec![r]];
            out.extend(rest.into_iter().map(|a| vec![a]));
            return Ok(out);
        }
    }
    Err(Error::SearchExhausted("no sum of d-th powers found".into()))
}

/// Quadratic forms: peel off `(R v)(R v)^T / R(v)` whenever `R(v)` is a square.
fn quadratic_case<F: Field>(f: &F, g: &SparsePoly<F::Elem>, k: usize, rng: &mut dyn RngCore) -> Result<Vec<Vec<F::Elem>>> {
    let m = g.nvars;
    let half = f.inv(&f.from_u64(2))?;
    let mut r = linalg::zeros(f, m, m);
    for (mono, c) in &g.terms {
        let idx: Vec<usize> = (0..m).filter(|&i| mono[i] > 0).collect();
        if idx.len() == 1 {
            r.set(idx[0], idx[0], c.clone());
        } else {
            let h = f.mul(c, &half);
            r.set(idx[0], idx[1], h.clone());
            r.set(idx[1], idx[0], h);
        }
    }
    let mut out = Vec::new();
    loop {
        let rk = linalg::rank(f, &r);
        if rk == 0 {
            break;
        }
        let mut peeled = false;
        for _ in 0..64 {
            let v = f.random_vec(m, rng);
            let rv = linalg::mat_vec(f, &r, &v);
            let val = f.dot(&v, &rv);
            if f.is_zero(&val) {
                continue;
            }
            let parts: Vec<F::Elem> = if let Some(c) = is_square(f, &val, rng) {
                vec![c]
            } else if rk == 1 && out.len() + 2 <= k {
                // val = s^2 + t^2
                let mut st = None;
                for _ in 0..256 {
                    let s = f.random(rng);
                    if let Some(t) = is_square(f, &f.sub(&val, &f.mul(&s, &s)), rng) {
                        st = Some((s, t));
                        break;
                    }
                }
                let Some((s, t)) = st else { continue };
                let inv = f.inv(&val)?;
                let (s, t) = (f.mul(&s, &inv), f.mul(&t, &inv));
                out.push(rv.iter().map(|x| f.mul(x, &s)).collect());
                out.push(rv.iter().map(|x| f.mul(x, &t)).collect());
                r = linalg::zeros(f, m, m);
                peeled = true;
                break;
            } else {
                continue;
            };
            let ci = f.inv(&parts[0])?;
            let l: Vec<F::Elem> = rv.iter().map(|x| f.mul(x, &ci)).collect();
            for i in 0..m {
                for j in 0..m {
                    let t = f.sub(r.get(i, j), &f.mul(&l[i], &l[j]));
                    r.set(i, j, t);
                }
            }
            out.push(l);
            peeled = true;
            break;
        }
        if !peeled {
            // a rank-one remainder with a non-square coefficient and no spare gate
            return Err(if rk == 1 { Error::NotRepresentable(k) } else { Error::SearchExhausted("no square value found".into()) });
        }
    }
    if out.len() > k {
        return Err(Error::NotRepresentable(k));
    }
    Ok(out)
}

/// Binary forms: kernel of the catalecticant gives the forms.
fn binary_case<F: Field>(f: &F, g: &SparsePoly<F::Elem>, d: usize, k: usize, rng: &mut dyn RngCore) -> Result<Vec<Vec<F::Elem>>> {
    if k > d {
        return binary_case(f, g, d, d, rng);
    }
    // c_j = g_j / binom(d, j), g_j the coefficient of y1^{d-j} y2^j
    let mut binom = f.one();
    let mut c = Vec::with_capacity(d + 1);
    for j in 0..=d {
        if j > 0 {
            binom = f.div(&f.mul(&binom, &f.from_u64((d - j + 1) as u64)), &f.from_u64(j as u64))?;
        }
        let gj = g.coeff(f, &[(d - j) as u32, j as u32]);
        c.push(f.div(&gj, &binom)?);
    }
    let rows: Vec<Vec<F::Elem>> = (0..=d - k).map(|i| c[i..=i + k].to_vec()).collect();
    let ker = linalg::kernel(f, &Matrix::from_rows(rows)?);
    if ker.is_empty() {
        return Err(Error::NotRepresentable(k));
    }
    let tries = if ker.len() == 1 { 4 } else { 4096 };
    for _ in 0..tries {
        let mut h = vec![f.zero(); k + 1];
        for v in &ker {
            let s = f.random(rng);
            for (hj, vj) in h.iter_mut().zip(v) {
                *hj = f.add(hj, &f.mul(&s, vj));
            }
        }
        let h = upoly::trim(f, h);
        if h.len() < 2 {
            continue;
        }
        let roots = upoly::roots(f, &h, rng);
        let deg = h.len() - 1;
        if roots.len() != deg || deg + 1 < k {
            continue;
        }
        let mut dirs: Vec<Vec<F::Elem>> = roots.into_iter().map(|z| vec![f.one(), z]).collect();
        if deg < k {
            dirs.push(vec![f.zero(), f.one()]);
        }
        if let Some(out) = fit_scalars(f, g, &dirs, d, rng) {
            return Ok(out);
        }
    }
    Err(Error::SearchExhausted("no catalecticant kernel element split into valid forms".into()))
}

fn hessian<F: Field>(f: &F, second: &[Vec<SparsePoly<F::Elem>>], p: &[F::Elem]) -> Matrix<F::Elem> {
    let m = second.len();
    let mut h = linalg::zeros(f, m, m);
    for i in 0..m {
        for j in 0..m {
            h.set(i, j, second[i][j].eval(f, p));
        }
    }
    h
}

/// `m = k`, `d >= 3`: eigenvectors of `H(p) H(q)^{-1}` are the forms.
fn pencil_case<F: Field>(f: &F, g: &SparsePoly<F::Elem>, d: usize, retries: usize, rng: &mut dyn RngCore) -> Result<Vec<Vec<F::Elem>>> {
    let m = g.nvars;
    let second: Vec<Vec<SparsePoly<F::Elem>>> =
        (0..m).map(|i| (0..m).map(|j| g.derivative(f, i).derivative(f, j)).collect()).collect();
    for _ in 0..retries {
        let hp = hessian(f, &second, &f.random_vec(m, rng));
        let Ok(hq_inv) = linalg::inverse(f, &hessian(f, &second, &f.random_vec(m, rng))) else { continue };
        let x = linalg::mat_mul(f, &hp, &hq_inv)?;
        let cp = linalg::charpoly(f, &x)?;
        let eig = upoly::roots(f, &cp, rng);
        if eig.len() != m {
            continue;
        }
        let mut dirs = Vec::with_capacity(m);
        for lam in &eig {
            let mut shifted = x.clone();
            for i in 0..m {
                let t = f.sub(shifted.get(i, i), lam);
                shifted.set(i, i, t);
            }
            let ker = linalg::kernel(f, &shifted);
            if ker.len() != 1 {
                break;
            }
            dirs.push(ker[0].clone());
        }
        if dirs.len() != m {
            continue;
        }
        if let Some(out) = fit_scalars(f, g, &dirs, d, rng) {
            return Ok(out);
        }
    }
    Err(Error::SearchExhausted("Hessian pencil did not split".into()))
}

/// Coefficient matching handed to the polynomial-system solver.
fn solver_case<F: Field>(f: &F, g: &SparsePoly<F::Elem>, d: usize, k: usize, rng: &mut dyn RngCore) -> Result<Vec<Vec<F::Elem>>> {
    let m = g.nvars;
    if f.ext_degree() != 1 || k * m > 6 {
        return Err(Error::SearchExhausted(format!("{} unknowns exceed the generic solver budget", k * m)));
    }
    let fp = PrimeField::new(f.characteristic())?;
    let res = |e: &F::Elem| f.as_prime_residue(e).expect("prime field");
    let nv = k * m;
    // unknown a_{i,j} is variable i*m + j; gates in y live in nv + m variables
    let total = (0..k).fold(SparsePoly::zero(nv + m), |acc, i| {
        let mut form = SparsePoly::zero(nv + m);
        for j in 0..m {
            let mut mono = vec![0u32; nv + m];
            mono[i * m + j] = 1;
            mono[nv + j] = 1;
            form.add_term(&fp, mono, 1);
        }
        acc.add(&fp, &form.pow(&fp, d))
    });
    let mut by_mono: std::collections::BTreeMap<Vec<u32>, SparsePoly<u64>> = Default::default();
    for (mono, c) in &total.terms {
        let key = mono[nv..].to_vec();
        by_mono.entry(key).or_insert_with(|| SparsePoly::zero(nv)).add_term(&fp, mono[..nv].to_vec(), *c);
    }
    for mono in g.terms.keys() {
        by_mono.entry(mono.clone()).or_insert_with(|| SparsePoly::zero(nv));
    }
    let mut eqs: Vec<SparsePoly<u64>> = by_mono
        .into_iter()
        .map(|(mono, p)| p.sub(&fp, &SparsePoly::constant(&fp, nv, res(&g.coeff(f, &mono)))))
        .collect();
    eqs.dedup();
    let sys = PolySystem::anonymous(fp, nv, eqs)?;
    match solve_system(&sys, false, rng) {
        Ok(sol) => Ok((0..k)
            .map(|i| (0..m).map(|j| f.from_u64(sol.values[i * m + j][0])).collect())
            .filter(|a: &Vec<F::Elem>| a.iter().any(|x| !f.is_zero(x)))
            .collect()),
        Err(Error::NoSolution) => Err(Error::NotRepresentable(k)),
        Err(e) => Err(e),
    }
}

/// Forms `a_i` in `m` coordinates with `g = sum (a_i . y)^d`, at most `k` of them.
fn decompose_explicit<F: Field>(
    f: &F,
    g: &SparsePoly<F::Elem>,
    d: usize,
    k: usize,
    cfg: &WaringConfig,
    rng: &mut dyn RngCore,
) -> Result<Vec<Vec<F::Elem>>> {
    let m = g.nvars;
    if g.is_zero() {
        return Ok(Vec::new());
    }
    if k == 0 || m > k {
        return Err(Error::NotRepresentable(k));
    }
    let structured = if m == 1 {
        univariate_case(f, &g.coeff(f, &[d as u32]), d, k, rng)
    } else if d == 2 {
        quadratic_case(f, g, k, rng)
    } else if m == 2 {
        binary_case(f, g, d, k, rng)
    } else if m == k {
        pencil_case(f, g, d, cfg.retries, rng)
    } else {
        Err(Error::SearchExhausted("no structured method applies".into()))
    };
    match structured {
        Ok(forms) if forms.len() <= k && power_sum(f, &forms, d, m) == *g => Ok(forms),
        Ok(_) => Err(Error::NotRepresentable(k)),
        Err(Error::SearchExhausted(why)) => solver_case(f, g, d, k, rng).map_err(|e| match e {
            Error::SearchExhausted(_) => Error::SearchExhausted(why),
            other => other,
        }),
        Err(e) => Err(e),
    }
}

/// Learn a sum of at most `k` d-th powers of linear forms computing `o`.
pub fn reconstruct_waring<F: Field>(
    o: &BlackBoxOracle<F>,
    d: usize,
    k: usize,
    cfg: &WaringConfig,
    rng: &mut dyn RngCore,
) -> Result<WaringDecomposition<F::Elem>> {
    let f = o.field().clone();
    let n = o.nvars();
    if f.characteristic() <= d as u64 {
        return Err(Error::CharTooSmall { p: f.characteristic(), d });
    }
    let o = o.clone().with_degree(d);
    let red = reduce_variables(&o, rng)?;
    let m = red.m;
    if m > k {
        return Err(Error::NotRepresentable(k));
    }
    let compact = red.compact().with_var_degree(d);
    let terms = binomial_u(m + d - 1, d).max(1);
    let g = sparse_interpolate(&compact, d, terms, &SparseConfig::default(), rng)?;
    let g = g.homogeneous_part(&f, d);
    let forms = decompose_explicit(&f, &g, d, k, cfg, rng)?;
    let a_inv = linalg::inverse(&f, &red.a)?;
    let gates: Vec<PowerGate<F::Elem>> = forms
        .into_iter()
        .map(|a| {
            let mut coeffs = vec![f.zero(); n];
            for (j, aj) in a.iter().enumerate() {
                for (c, inv) in coeffs.iter_mut().zip(a_inv.row(j)) {
                    *c = f.add(c, &f.mul(aj, inv));
                }
            }
            PowerGate { form: LinearForm::homogeneous(coeffs, f.zero()), power: d }
        })
        .collect();
    let dec = WaringDecomposition { nvars: n, degree: d, gates };
    match equal(&o, &dec.to_circuit(), &cfg.pit, rng) {
        crate::pit::Verdict::Zero => Ok(dec),
        crate::pit::Verdict::NonZero(_) => Err(Error::VerificationFailed("lifted decomposition differs from the oracle".into())),
    }
}

fn binomial_u(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone)]
pub struct SymmetricRank<E> {
    pub rank: usize,
    pub decomposition: WaringDecomposition<E>,
    /// Every smaller fan-in was ruled out by a certificate.
    pub certified_minimal: bool,
}

/// Smallest `k <= k_max` with a verified decomposition.
pub fn symmetric_rank<F: Field>(
    o: &BlackBoxOracle<F>,
    d: usize,
    k_max: usize,
    cfg: &WaringConfig,
    rng: &mut dyn RngCore,
) -> Result<SymmetricRank<F::Elem>> {
    let n = o.nvars();
    if is_zero(&o.clone().with_degree(d), &cfg.pit, rng).is_zero() {
        let decomposition = WaringDecomposition { nvars: n, degree: d, gates: Vec::new() };
        return Ok(SymmetricRank { rank: 0, decomposition, certified_minimal: false });
    }
    let mut certified = true;
    for k in 1..=k_max {
        match reconstruct_waring(o, d, k, cfg, rng) {
            Ok(dec) => {
                return Ok(SymmetricRank { rank: dec.fan_in(), decomposition: dec, certified_minimal: certified });
            }
            Err(Error::NotRepresentable(_)) => {}
            Err(Error::SearchExhausted(_)) | Err(Error::VerificationFailed(_)) => certified = false,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RankExceedsBound(k_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn oracle(f: PrimeField, n: usize, terms: &[(&[u32], u64)]) -> BlackBoxOracle<PrimeField> {
        BlackBoxOracle::from_poly(f, SparsePoly::from_terms(&f, n, terms.iter().map(|(m, c)| (m.to_vec(), *c)).collect()))
    }

    #[test]
    fn rank_witnesses() {
        let f = PrimeField::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = WaringConfig::default();
        let xy = oracle(f, 2, &[(&[1, 1], 1)]);
        let r = symmetric_rank(&xy, 2, 3, &cfg, &mut rng).unwrap();
        assert_eq!(r.rank, 2);
        assert!(r.certified_minimal);
        let x2 = oracle(f, 2, &[(&[2, 0], 1)]);
        assert_eq!(symmetric_rank(&x2, 2, 3, &cfg, &mut rng).unwrap().rank, 1);
        let sq = oracle(f, 3, &[(&[2, 0, 0], 1), (&[0, 2, 0], 1), (&[0, 0, 2], 1)]);
        assert_eq!(reconstruct_waring(&sq, 2, 1, &cfg, &mut rng), Err(Error::NotRepresentable(1)));
    }

    #[test]
    fn cubes_and_pencils() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = WaringConfig::default();
        let cubes = oracle(f, 2, &[(&[3, 0], 1), (&[0, 3], 1)]);
        assert_eq!(reconstruct_waring(&cubes, 3, 2, &cfg, &mut rng).unwrap().fan_in(), 2);
        // three independent forms in four variables, degree 4
        let forms = [vec![1u64, 2, 0, 5], vec![3, 0, 1, 1], vec![0, 7, 2, 9]];
        let p = forms.iter().fold(SparsePoly::zero(4), |acc, a| {
            acc.add(&f, &LinearForm::homogeneous(a.clone(), 0).to_poly(&f).pow(&f, 4))
        });
        let o = BlackBoxOracle::from_poly(f, p);
        assert_eq!(reconstruct_waring(&o, 4, 3, &cfg, &mut rng).unwrap().fan_in(), 3);
    }
}
