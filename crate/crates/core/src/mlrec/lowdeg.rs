//! Low-degree and low-rank multilinear learning.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::RngCore;

use super::MlConfig;
use crate::error::{Error, Result};
use crate::field::{Field, PrimeField};
use crate::interp::{interpolate_univariate, sparse_interpolate, SparseConfig};
use crate::linalg::{self, rref, Matrix};
use crate::oracle::BlackBoxOracle;
use crate::pit::{equal, extract_simple, is_zero, learn_linear, Verdict};
use crate::poly::{CircuitKind, DepthThreeCircuit, LinearForm, Monomial, MulGate, SparsePoly, VarPartition};
use crate::smlrec::{reconstruct_sml, SmlConfig};
use crate::syssolve::{solve_system, PolySystem};
use crate::varred::reduce_variables;

/// `d_W f` of a multilinear polynomial by inclusion-exclusion over `W`.
pub(crate) fn mderiv<F: Field>(o: &BlackBoxOracle<F>, w: &[usize]) -> BlackBoxOracle<F> {
    let f = o.field().clone();
    let parent = o.clone();
    let w = w.to_vec();
    let deg = o.degree_bound().saturating_sub(w.len());
    BlackBoxOracle::new(f.clone(), o.nvars(), deg, "multilinear-derivative", move |x: &[F::Elem]| {
        let mut acc = f.zero();
        let mut y = x.to_vec();
        for mask in 0u32..(1 << w.len()) {
            for (b, &v) in w.iter().enumerate() {
                y[v] = if mask >> b & 1 == 1 { f.one() } else { f.zero() };
            }
            let val = parent.eval(&y);
            if (w.len() - mask.count_ones() as usize) % 2 == 0 {
                acc = f.add(&acc, &val);
            } else {
                acc = f.sub(&acc, &val);
            }
        }
        acc
    })
    .with_var_degree(1)
}

fn abscissae<F: Field>(f: &F, count: usize) -> Vec<F::Elem> {
    (1..=count as u64).map(|i| f.nth_element(i)).collect()
}

/// `t -> o(t x)` as a univariate polynomial.
fn radial<F: Field>(o: &BlackBoxOracle<F>, x: &[F::Elem]) -> Result<Vec<F::Elem>> {
    let f = o.field();
    let ts = abscissae(f, o.degree_bound() + 1);
    let ys: Vec<F::Elem> = ts.iter().map(|t| o.eval(&x.iter().map(|v| f.mul(t, v)).collect::<Vec<_>>())).collect();
    interpolate_univariate(f, &ts, &ys)
}

/// Total degree, with high probability.
pub fn total_degree<F: Field>(o: &BlackBoxOracle<F>, rng: &mut dyn RngCore) -> Result<usize> {
    let f = o.field();
    let mut best = 0;
    for _ in 0..2 {
        let p = radial(o, &f.random_vec(o.nvars(), rng))?;
        if let Some(d) = crate::upoly::degree::<F>(&p) {
            best = best.max(d);
        }
    }
    Ok(best)
}

/// Degree-`d` homogeneous component of `o`.
fn top_part<F: Field>(o: &BlackBoxOracle<F>, d: usize) -> BlackBoxOracle<F> {
    let f = o.field().clone();
    let parent = o.clone();
    BlackBoxOracle::new(f.clone(), o.nvars(), d, "top-part", move |x: &[F::Elem]| {
        radial(&parent, x).ok().and_then(|p| p.get(d).cloned()).unwrap_or_else(|| f.zero())
    })
}

fn form_at<F: Field>(o: &BlackBoxOracle<F>, w: &[usize], rng: &mut dyn RngCore, cfg: &MlConfig) -> Option<LinearForm<F::Elem>> {
    let all: Vec<usize> = (0..o.nvars()).collect();
    let l = learn_linear(&mderiv(o, w), &all, &cfg.pit, rng)?;
    (!l.is_constant(o.field())).then_some(l)
}

fn homogeneous<F: Field>(f: &F, l: &LinearForm<F::Elem>) -> LinearForm<F::Elem> {
    let mut h = l.clone();
    h.constant = f.zero();
    h.normalized(f).1
}

/// Constants of form `j` voted over transversals of the other supports, best first.
fn vote_constant<F: Field>(
    o: &BlackBoxOracle<F>,
    homs: &[LinearForm<F::Elem>],
    j: usize,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Option<Vec<F::Elem>> {
    let f = o.field().clone();
    let supports: Vec<Vec<usize>> = homs.iter().map(|h| h.support(&f)).collect();
    let distinct: usize =
        supports.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, s)| s.len()).fold(1, |a, b| a.saturating_mul(b));
    let want = distinct.min(7);
    let mut tried: Vec<Vec<usize>> = Vec::new();
    let mut votes: Vec<(F::Elem, usize)> = Vec::new();
    for _ in 0..4 * want + 4 {
        if tried.len() >= want {
            break;
        }
        let w: Vec<usize> = supports
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, s)| s[(rng.next_u32() as usize) % s.len()])
            .collect();
        if tried.contains(&w) {
            continue;
        }
        tried.push(w.clone());
        let Some(l) = form_at(o, &w, rng, cfg) else { continue };
        if homogeneous(&f, &l) != homs[j] {
            continue;
        }
        let mut h = l.clone();
        h.constant = f.zero();
        let scale = h.normalized(&f).0;
        let c = f.mul(&l.constant, &f.inv(&scale).ok()?);
        match votes.iter_mut().find(|(v, _)| *v == c) {
            Some(e) => e.1 += 1,
            None => votes.push((c, 1)),
        }
    }
    votes.sort_by_key(|e| std::cmp::Reverse(e.1));
    let top = votes.first().map_or(0, |e| e.1);
    let tied = votes.iter().take_while(|e| e.1 == top).count();
    let mut out = if top < 2 || tied > 1 { deflate_constant(o, homs, j, cfg, rng) } else { Vec::new() };
    for (c, _) in votes.into_iter().take_while(|e| e.1 == top).take(2) {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    (!out.is_empty()).then_some(out)
}

/// Constant of form `j` when every transversal view is offset by lower gates.
/// Over a grid (variable of one other form) x (transversal of the rest) the raw
/// constants are `c G + E` with `G` of rank one and `E` of rank at most two;
/// `c` is the value that drops the rank of `K - c G`.
fn deflate_constant<F: Field>(
    o: &BlackBoxOracle<F>,
    homs: &[LinearForm<F::Elem>],
    j: usize,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Vec<F::Elem> {
    let f = o.field().clone();
    let others: Vec<Vec<usize>> = homs.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, h)| h.support(&f)).collect();
    if others.len() < 2 {
        return Vec::new();
    }
    let mut rows = others[0].clone();
    rows.shuffle(rng);
    rows.truncate(4);
    let mut cols: Vec<Vec<usize>> = vec![Vec::new()];
    for s in &others[1..] {
        cols = cols.into_iter().flat_map(|c| s.iter().map(move |&v| [c.clone(), vec![v]].concat())).collect();
    }
    cols.shuffle(rng);
    cols.truncate(6);
    let mut k = vec![vec![None; cols.len()]; rows.len()];
    for (r, &u) in rows.iter().enumerate() {
        for (c, rest) in cols.iter().enumerate() {
            let w = [vec![u], rest.clone()].concat();
            let Some(l) = form_at(o, &w, rng, cfg) else { continue };
            if homogeneous(&f, &l) != homs[j] {
                continue;
            }
            let mut h = l.clone();
            h.constant = f.zero();
            k[r][c] = Some((l.constant.clone(), h.normalized(&f).0));
        }
    }
    let mut out = Vec::new();
    for size in 2..=3usize {
        if rows.len() < size || cols.len() < size {
            break;
        }
        let mut found: Vec<(F::Elem, usize)> = Vec::new();
        let mut minors = 0;
        let mut ri: Vec<usize> = (0..size).collect();
        loop {
            let mut ci: Vec<usize> = (0..size).collect();
            loop {
                let cells: Option<Vec<Vec<(F::Elem, F::Elem)>>> =
                    ri.iter().map(|&r| ci.iter().map(|&c| k[r][c].clone()).collect::<Option<Vec<_>>>()).collect();
                if let Some(cells) = cells {
                    let at = |t: &F::Elem| {
                        let m: Vec<Vec<F::Elem>> = cells.iter().map(|row| row.iter().map(|(kc, g)| f.sub(kc, &f.mul(t, g))).collect()).collect();
                        Matrix::from_rows(m).ok().and_then(|m| linalg::det(&f, &m).ok())
                    };
                    if let (Some(d0), Some(d1)) = (at(&f.zero()), at(&f.one())) {
                        let slope = f.sub(&d1, &d0);
                        if !(f.is_zero(&slope) && f.is_zero(&d0)) {
                            minors += 1;
                        }
                        if let Ok(inv) = f.inv(&slope) {
                            let c = f.neg(&f.mul(&d0, &inv));
                            match found.iter_mut().find(|e| e.0 == c) {
                                Some(e) => e.1 += 1,
                                None => found.push((c, 1)),
                            }
                        }
                    }
                }
                if !next_subset(&mut ci, cols.len()) {
                    break;
                }
            }
            if !next_subset(&mut ri, rows.len()) {
                break;
            }
        }
        if let Some((c, n)) = found.into_iter().max_by_key(|e| e.1) {
            if n >= 2 && n == minors && !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}

/// Homogeneous parts of a top gate and the surviving constants of each form.
struct TopGate<E> {
    homs: Vec<LinearForm<E>>,
    consts: Vec<Vec<E>>,
}

fn disjoint<F: Field>(f: &F, forms: &[LinearForm<F::Elem>]) -> bool {
    let mut used = std::collections::BTreeSet::new();
    forms.iter().all(|l| l.support(f).into_iter().all(|v| used.insert(v)))
}

/// Candidate top gates read off a near-transversal `W`: the derivative along
/// `W` gives one form, swapping each `w` for a variable of that form gives the
/// form through `w`. Views disturbed by other gates are kept as alternatives.
fn gates_from_transversal<F: Field>(
    o: &BlackBoxOracle<F>,
    w: &[usize],
    cap: usize,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Vec<(Vec<LinearForm<F::Elem>>, F::Elem)> {
    let f = o.field().clone();
    let Some(l0) = form_at(o, w, rng, cfg) else { return Vec::new() };
    let s0 = l0.support(&f);
    let mut combos: Vec<Vec<LinearForm<F::Elem>>> = vec![vec![homogeneous(&f, &l0)]];
    for (idx, &wv) in w.iter().enumerate() {
        let mut views: Vec<LinearForm<F::Elem>> = Vec::new();
        for &u in s0.iter().take(4) {
            let mut w2 = w.to_vec();
            w2[idx] = u;
            if let Some(l) = form_at(o, &w2, rng, cfg) {
                let h = homogeneous(&f, &l);
                if h.support(&f).contains(&wv) && !views.contains(&h) {
                    views.push(h);
                }
            }
        }
        combos = combos
            .into_iter()
            .flat_map(|c| {
                views.iter().filter_map(move |h| {
                    let mut c2 = c.clone();
                    c2.push(h.clone());
                    Some(c2)
                })
            })
            .filter(|c| disjoint(&f, c))
            .take(cap)
            .collect();
        if combos.is_empty() {
            break;
        }
    }
    // an isolating W gives d_W f = mu prod_i h_i(w_i) (h_0 + c_0)
    let mut h0 = l0.clone();
    h0.constant = f.zero();
    let lead = h0.normalized(&f).0;
    combos
        .into_iter()
        .filter(|c| c.len() == w.len() + 1)
        .filter_map(|c| {
            let denom = w.iter().zip(&c[1..]).fold(f.one(), |acc, (&v, h)| f.mul(&acc, &h.coeffs[v]));
            let mu = f.mul(&lead, &f.inv(&denom).ok()?);
            Some((c, mu))
        })
        .collect()
}

/// Constants for every form of a fitted gate.
fn top_gate<F: Field>(o: &BlackBoxOracle<F>, homs: Vec<LinearForm<F::Elem>>, cfg: &MlConfig, rng: &mut dyn RngCore) -> Option<TopGate<F::Elem>> {
    let consts = (0..homs.len()).map(|j| vote_constant(o, &homs, j, cfg, rng)).collect::<Option<Vec<_>>>()?;
    Some(TopGate { homs, consts })
}

fn same_gate<E: PartialEq>(a: &[LinearForm<E>], b: &[LinearForm<E>]) -> bool {
    a.len() == b.len() && a.iter().all(|l| b.contains(l))
}

/// A candidate top gate and the scalar read off each transversal producing it.
struct Candidate<E> {
    homs: Vec<LinearForm<E>>,
    mus: Vec<(Vec<usize>, E)>,
}

impl<E: Clone + PartialEq> Candidate<E> {
    /// Most frequent scalar over distinct transversals, with its support.
    fn best_mu(&self) -> Option<(E, usize)> {
        let mut votes: Vec<(E, usize)> = Vec::new();
        for (_, m) in &self.mus {
            match votes.iter_mut().find(|(v, _)| v == m) {
                Some(e) => e.1 += 1,
                None => votes.push((m.clone(), 1)),
            }
        }
        votes.into_iter().max_by_key(|e| e.1)
    }
}

/// Candidate top-degree gates from random greedy near-transversals.
fn top_candidates<F: Field>(
    o: &BlackBoxOracle<F>,
    d: usize,
    room: usize,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Vec<Candidate<F::Elem>> {
    let n = o.nvars();
    let mut pool: Vec<Candidate<F::Elem>> = Vec::new();
    let mut stale = 0;
    for _ in 0..16 * room + 16 {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut w = Vec::with_capacity(d - 1);
        for u in order {
            if w.len() + 1 == d {
                break;
            }
            w.push(u);
            if is_zero(&mderiv(o, &w), &cfg.pit, rng).is_zero() {
                w.pop();
            }
        }
        if w.len() + 1 != d {
            continue;
        }
        let mut key = w.clone();
        key.sort_unstable();
        let mut fresh = false;
        for (homs, mu) in gates_from_transversal(o, &w, 6, cfg, rng) {
            match pool.iter_mut().find(|c| same_gate(&c.homs, &homs)) {
                Some(c) => {
                    if !c.mus.iter().any(|(k, _)| *k == key) {
                        c.mus.push((key.clone(), mu));
                    }
                }
                None => {
                    pool.push(Candidate { homs, mus: vec![(key.clone(), mu)] });
                    fresh = true;
                }
            }
        }
        if fresh {
            stale = 0;
        } else {
            stale += 1;
            if stale > 6 * room + 6 || pool.len() > 120 {
                break;
            }
        }
    }
    pool
}

/// Scalars `mu` with `top(o) = sum mu_c top(G_c)`.
fn fit_top<F: Field>(
    o: &BlackBoxOracle<F>,
    d: usize,
    pool: &[Candidate<F::Elem>],
    rng: &mut dyn RngCore,
) -> Result<Vec<F::Elem>> {
    let f = o.field().clone();
    if pool.is_empty() {
        return Err(Error::SearchExhausted("no isolated gate".into()));
    }
    let top = top_part(o, d);
    let npts = pool.len() + 6;
    let mut rows = Vec::with_capacity(npts);
    let mut rhs = Vec::with_capacity(npts);
    for _ in 0..npts {
        let x = f.random_vec(o.nvars(), rng);
        rows.push(pool.iter().map(|g| g.homs.iter().fold(f.one(), |acc, h| f.mul(&acc, &h.eval(&f, &x)))).collect());
        rhs.push(top.eval(&x));
    }
    linalg::solve(&f, &Matrix::from_rows(rows)?, &rhs)
        .map_err(|_| Error::SearchExhausted("top component outside the candidate span".into()))
}

fn circuit_oracle<F: Field>(f: &F, n: usize, gates: &[MulGate<F::Elem>]) -> BlackBoxOracle<F> {
    BlackBoxOracle::from_circuit(f.clone(), DepthThreeCircuit::from_mul_gates(n, CircuitKind::Multilinear, gates.to_vec()))
}

/// Every choice of constants for the fitted gates, capped.
fn constant_choices<F: Field>(f: &F, fitted: &[(F::Elem, &TopGate<F::Elem>)], cap: usize) -> Vec<Vec<MulGate<F::Elem>>> {
    let mut out: Vec<Vec<MulGate<F::Elem>>> = vec![Vec::new()];
    for (m, g) in fitted {
        let mut partial: Vec<Vec<LinearForm<F::Elem>>> = vec![Vec::new()];
        for (h, cs) in g.homs.iter().zip(&g.consts) {
            partial = partial
                .into_iter()
                .flat_map(|p| {
                    cs.iter().map(move |c| {
                        let mut l = h.clone();
                        l.constant = c.clone();
                        let mut q = p.clone();
                        q.push(l);
                        q
                    })
                })
                .take(cap)
                .collect();
        }
        out = out
            .into_iter()
            .flat_map(|gs| {
                partial.iter().map(move |forms| {
                    let mut forms = forms.clone();
                    forms[0] = forms[0].scale(f, m);
                    let mut gs = gs.clone();
                    gs.push(MulGate { forms });
                    gs
                })
            })
            .take(cap)
            .collect();
    }
    out
}

/// Constant, linear and quadratic coefficients of a multilinear `o` of degree two.
fn quadratic_coeffs<F: Field>(o: &BlackBoxOracle<F>) -> (F::Elem, Vec<F::Elem>, Vec<Vec<F::Elem>>) {
    let f = o.field();
    let n = o.nvars();
    let at = |vs: &[usize]| {
        let mut x = vec![f.zero(); n];
        for &v in vs {
            x[v] = f.one();
        }
        o.eval(&x)
    };
    let c0 = at(&[]);
    let single: Vec<F::Elem> = (0..n).map(|v| at(&[v])).collect();
    let lin = single.iter().map(|s| f.sub(s, &c0)).collect();
    let mut q = vec![vec![f.zero(); n]; n];
    for u in 0..n {
        for v in u + 1..n {
            let c = f.add(&f.sub(&f.sub(&at(&[u, v]), &single[u]), &single[v]), &c0);
            q[u][v] = c.clone();
            q[v][u] = c;
        }
    }
    (c0, lin, q)
}

fn normalize_vec<F: Field>(f: &F, v: &[F::Elem]) -> Option<Vec<F::Elem>> {
    let lead = v.iter().find(|c| !f.is_zero(c))?;
    let inv = f.inv(lead).ok()?;
    Some(v.iter().map(|c| f.mul(c, &inv)).collect())
}

fn next_subset(idx: &mut [usize], n: usize) -> bool {
    let r = idx.len();
    for i in (0..r).rev() {
        if idx[i] < n - r + i {
            idx[i] += 1;
            for j in i + 1..r {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The rows and the unusually sparse vectors of their span, sparsest first.
fn sparse_forms<F: Field>(f: &F, q: &[Vec<F::Elem>], cap: usize) -> Vec<Vec<F::Elem>> {
    let Some(n) = q.first().map(Vec::len) else { return Vec::new() };
    let weight = |v: &[F::Elem]| v.iter().filter(|c| !f.is_zero(c)).count();
    let mut out: Vec<(Vec<F::Elem>, usize)> = Vec::new();
    let push = |v: Vec<F::Elem>, out: &mut Vec<(Vec<F::Elem>, usize)>| {
        if let Some(v) = normalize_vec(f, &v) {
            match out.iter_mut().find(|e| e.0 == v) {
                Some(e) => e.1 += 1,
                None => out.push((v, 1)),
            }
        }
    };
    for row in q {
        push(row.clone(), &mut out);
    }
    let live: Vec<usize> = (0..n).filter(|&v| q.iter().any(|row| !f.is_zero(&row[v]))).collect();
    let mut m = Matrix::from_rows(q.to_vec()).expect("rectangular");
    let r = rref(f, &mut m).len();
    let nl = live.len();
    if r >= 2 && r < nl && binom(nl, r - 1) <= 40_000 {
        let basis = m.select_rows(&(0..r).collect::<Vec<_>>());
        let mut z: Vec<usize> = (0..r - 1).collect();
        loop {
            let cols: Vec<usize> = z.iter().map(|&i| live[i]).collect();
            let ker = linalg::left_kernel(f, &basis.select_cols(&cols));
            if ker.len() == 1 {
                let v = linalg::vec_mat(f, &ker[0], &basis);
                if weight(&v) <= nl - r {
                    push(v, &mut out);
                }
            }
            if !next_subset(&mut z, nl) {
                break;
            }
        }
    }
    out.sort_by_key(|e| (weight(&e.0), std::cmp::Reverse(e.1)));
    let mut seen: Vec<Vec<bool>> = Vec::new();
    let mut forms = Vec::new();
    for (v, _) in out {
        let supp: Vec<bool> = v.iter().map(|c| !f.is_zero(c)).collect();
        if !seen.contains(&supp) {
            seen.push(supp);
            forms.push(v);
        }
    }
    forms.truncate(cap);
    forms
}

/// Forms `y_h`, supported off `h`, with `sum_h h y_h` equal to the quadratic part `q`.
fn partner_forms<F: Field>(f: &F, q: &[Vec<F::Elem>], hs: &[&Vec<F::Elem>]) -> Option<Vec<Vec<F::Elem>>> {
    let n = q.len();
    let slots: Vec<(usize, usize)> = hs.iter().enumerate().flat_map(|(i, h)| (0..n).filter(move |&v| f.is_zero(&h[v])).map(move |v| (i, v))).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            rows.push(
                slots
                    .iter()
                    .map(|&(i, w)| {
                        if w == v {
                            hs[i][u].clone()
                        } else if w == u {
                            hs[i][v].clone()
                        } else {
                            f.zero()
                        }
                    })
                    .collect(),
            );
            rhs.push(q[u][v].clone());
        }
    }
    let sol = linalg::solve(f, &Matrix::from_rows(rows).ok()?, &rhs).ok()?;
    let mut ys = vec![vec![f.zero(); n]; hs.len()];
    for (&(i, v), c) in slots.iter().zip(sol) {
        ys[i][v] = c;
    }
    ys.iter().all(|y| y.iter().any(|c| !f.is_zero(c))).then_some(ys)
}

/// Degree-two gates `(h + a)(y + b)` matching the constant and linear parts, if any.
fn quadratic_gates<F: Field>(f: &F, c0: &F::Elem, lin: &[F::Elem], pairs: &[(Vec<F::Elem>, Vec<F::Elem>)]) -> Option<Vec<MulGate<F::Elem>>> {
    let n = lin.len();
    let rows: Vec<Vec<F::Elem>> = (0..n).map(|v| pairs.iter().flat_map(|(h, y)| [h[v].clone(), y[v].clone()]).collect()).collect();
    let sol = linalg::solve(f, &Matrix::from_rows(rows).ok()?, lin).ok()?;
    let c = pairs.iter().enumerate().fold(f.zero(), |acc, (i, _)| f.add(&acc, &f.mul(&sol[2 * i], &sol[2 * i + 1])));
    (c == *c0).then(|| {
        pairs
            .iter()
            .enumerate()
            .map(|(i, (h, y))| MulGate {
                forms: vec![LinearForm { coeffs: h.clone(), constant: sol[2 * i + 1].clone() }, LinearForm { coeffs: y.clone(), constant: sol[2 * i].clone() }],
            })
            .collect()
    })
}

/// Quadratic top gates from sparse forms of the derivative span, fewest first.
/// With room to spare a zero-constant variant is offered too, leaving an affine residual.
fn quadratic_fit<F: Field>(o: &BlackBoxOracle<F>, room: usize, cap: usize) -> Vec<Vec<MulGate<F::Elem>>> {
    let f = o.field();
    let (c0, lin, q) = quadratic_coeffs(o);
    let forms = sparse_forms(f, &q, 12);
    let mut out = Vec::new();
    for s in 1..=room.min(forms.len()) {
        let mut idx: Vec<usize> = (0..s).collect();
        loop {
            let hs: Vec<&Vec<F::Elem>> = idx.iter().map(|&i| &forms[i]).collect();
            if let Some(ys) = partner_forms(f, &q, &hs) {
                let pairs: Vec<(Vec<F::Elem>, Vec<F::Elem>)> = hs.iter().map(|h| (*h).clone()).zip(ys).collect();
                if let Some(g) = quadratic_gates(f, &c0, &lin, &pairs) {
                    out.push(g);
                } else if s < room {
                    let zero = f.zero();
                    out.push(
                        pairs
                            .into_iter()
                            .map(|(h, y)| MulGate { forms: vec![LinearForm::homogeneous(h, zero.clone()), LinearForm::homogeneous(y, zero.clone())] })
                            .collect(),
                    );
                }
                if out.len() >= cap {
                    return out;
                }
            }
            if !next_subset(&mut idx, forms.len()) {
                break;
            }
        }
    }
    out
}

/// Top gates assembled from pairwise disjoint sparse forms of the derivative
/// span, each with the scalars read off the transversals that isolate it.
fn sparse_candidates<F: Field>(o: &BlackBoxOracle<F>, d: usize, cfg: &MlConfig, rng: &mut dyn RngCore) -> Vec<Candidate<F::Elem>> {
    let f = o.field().clone();
    let n = o.nvars();
    if d < 2 || n < d {
        return Vec::new();
    }
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut rows = Vec::new();
    for _ in 0..120 {
        if rows.len() >= 60 {
            break;
        }
        let mut w: Vec<usize> = rand::seq::index::sample(rng, n, d - 1).into_vec();
        w.sort_unstable();
        if seen.contains(&w) {
            continue;
        }
        seen.push(w.clone());
        if let Some(l) = form_at(o, &w, rng, cfg) {
            rows.push(l.coeffs);
        }
    }
    let forms: Vec<LinearForm<F::Elem>> = sparse_forms(&f, &rows, 18).into_iter().map(|v| LinearForm::homogeneous(v, f.zero())).collect();
    let supports: Vec<Vec<usize>> = forms.iter().map(|h| h.support(&f)).collect();
    let mut out = Vec::new();
    if forms.len() < d {
        return out;
    }
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let homs: Vec<LinearForm<F::Elem>> = idx.iter().map(|&i| forms[i].clone()).collect();
        if disjoint(&f, &homs) {
            let mut mus: Vec<(Vec<usize>, F::Elem)> = Vec::new();
            for j in 0..d {
                for _ in 0..3 {
                    let w: Vec<usize> =
                        idx.iter().enumerate().filter(|(m, _)| *m != j).map(|(_, &i)| *supports[i].choose(rng).expect("nonzero form")).collect();
                    let mut key = w.clone();
                    key.sort_unstable();
                    if mus.iter().any(|(k, _)| *k == key) {
                        continue;
                    }
                    let Some(l) = form_at(o, &w, rng, cfg) else { continue };
                    if homogeneous(&f, &l) != homs[j] {
                        continue;
                    }
                    let mut h = l.clone();
                    h.constant = f.zero();
                    let lead = h.normalized(&f).0;
                    let others = homs.iter().enumerate().filter(|(m, _)| *m != j).map(|(_, h)| h);
                    let denom = w.iter().zip(others).fold(f.one(), |acc, (&v, h)| f.mul(&acc, &h.coeffs[v]));
                    if let Ok(inv) = f.inv(&denom) {
                        mus.push((key, f.mul(&lead, &inv)));
                    }
                }
            }
            if !mus.is_empty() {
                out.push(Candidate { homs, mus });
            }
        }
        if !next_subset(&mut idx, forms.len()) {
            break;
        }
    }
    out
}

/// Every form is the view of at least two distinct transversals of the others,
/// or of the only one there is.
fn reproduced<F: Field>(o: &BlackBoxOracle<F>, homs: &[LinearForm<F::Elem>], cfg: &MlConfig, rng: &mut dyn RngCore) -> bool {
    let f = o.field().clone();
    let supports: Vec<Vec<usize>> = homs.iter().map(|h| h.support(&f)).collect();
    (0..homs.len()).all(|j| {
        let total = supports.iter().enumerate().filter(|(i, _)| *i != j).fold(1usize, |a, (_, s)| a.saturating_mul(s.len()));
        let need = total.min(2);
        let mut tried: Vec<Vec<usize>> = Vec::new();
        let mut hits = 0;
        for _ in 0..12 {
            if hits >= need || tried.len() >= total.min(6) {
                break;
            }
            let w: Vec<usize> = supports.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, s)| *s.choose(rng).expect("nonzero form")).collect();
            if tried.contains(&w) {
                continue;
            }
            tried.push(w.clone());
            if form_at(o, &w, rng, cfg).is_some_and(|l| homogeneous(&f, &l) == homs[j]) {
                hits += 1;
            }
        }
        hits >= need
    })
}

/// Candidates chosen by the joint fit of the top component, with their scalars.
fn fit_chosen<'a, F: Field>(
    cur: &BlackBoxOracle<F>,
    d: usize,
    room: usize,
    pool: &'a [Candidate<F::Elem>],
    rng: &mut dyn RngCore,
) -> Result<Vec<(F::Elem, &'a Candidate<F::Elem>)>> {
    let f = cur.field().clone();
    let mu = fit_top(cur, d, pool, rng)?;
    let chosen: Vec<(F::Elem, &Candidate<F::Elem>)> = mu.into_iter().zip(pool).filter(|(m, _)| !f.is_zero(m)).collect();
    if chosen.is_empty() || chosen.len() > room {
        return Err(Error::SearchExhausted("top component not matched".into()));
    }
    Ok(chosen)
}

/// Top product `mu prod h_i` with zero constants.
fn bare_gate<F: Field>(f: &F, mu: &F::Elem, homs: &[LinearForm<F::Elem>]) -> MulGate<F::Elem> {
    let mut forms = homs.to_vec();
    forms[0] = forms[0].scale(f, mu);
    MulGate { forms }
}

/// Constants of the pending top gates from the next homogeneous component,
/// when nothing of lower degree remains.
fn settle_pending<F: Field>(
    o: &BlackBoxOracle<F>,
    gates: &[MulGate<F::Elem>],
    pending: &[MulGate<F::Elem>],
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Result<Vec<MulGate<F::Elem>>> {
    let f = o.field().clone();
    let n = o.nvars();
    let d = pending[0].forms.len();
    let rest = if gates.is_empty() { o.clone() } else { o.sub(&circuit_oracle(&f, n, gates)).with_degree(o.degree_bound().max(1)).with_var_degree(1) };
    let below = top_part(&rest, d - 1);
    let slots: Vec<(usize, usize)> = pending.iter().enumerate().flat_map(|(g, m)| (0..m.forms.len()).map(move |i| (g, i))).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for _ in 0..slots.len() + 6 {
        let x = f.random_vec(n, rng);
        let vals: Vec<Vec<F::Elem>> = pending.iter().map(|g| g.forms.iter().map(|l| l.eval(&f, &x)).collect()).collect();
        rows.push(
            slots
                .iter()
                .map(|&(g, i)| vals[g].iter().enumerate().filter(|(m, _)| *m != i).fold(f.one(), |acc, (_, v)| f.mul(&acc, v)))
                .collect(),
        );
        rhs.push(below.eval(&x));
    }
    let c = linalg::solve(&f, &Matrix::from_rows(rows)?, &rhs).map_err(|_| Error::SearchExhausted("no constants fit the pending gates".into()))?;
    let mut out = gates.to_vec();
    let mut settled = pending.to_vec();
    for (&(g, i), c) in slots.iter().zip(c) {
        settled[g].forms[i].constant = c;
    }
    out.extend(settled);
    let cur = o.sub(&circuit_oracle(&f, n, &out)).with_degree(o.degree_bound().max(1)).with_var_degree(1);
    if is_zero(&cur, &cfg.pit, rng).is_zero() {
        Ok(out)
    } else {
        Err(Error::SearchExhausted("pending gates leave a residual".into()))
    }
}

/// Peel gates by degree: isolate top-degree gates through derivatives, fit
/// their scalars on the top component, subtract, recurse. Ambiguous constants
/// are resolved by backtracking. Gates in `pending` carry their top part only;
/// their constants are solved together once the fan-in is used up.
fn peel<F: Field>(
    o: &BlackBoxOracle<F>,
    gates: Vec<MulGate<F::Elem>>,
    pending: Vec<MulGate<F::Elem>>,
    k: usize,
    calls: &mut usize,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Result<Vec<MulGate<F::Elem>>> {
    if *calls == 0 {
        return Err(Error::SearchExhausted("peeling budget spent".into()));
    }
    *calls -= 1;
    let f = o.field().clone();
    let n = o.nvars();
    let deg = o.degree_bound();
    let all: Vec<MulGate<F::Elem>> = gates.iter().chain(&pending).cloned().collect();
    let cur = if all.is_empty() { o.clone() } else { o.sub(&circuit_oracle(&f, n, &all)).with_degree(deg.max(1)).with_var_degree(1) };
    if is_zero(&cur, &cfg.pit, rng).is_zero() {
        return Ok(all);
    }
    if all.len() >= k {
        if pending.is_empty() {
            return Err(Error::SearchExhausted(format!("more than {k} gates peeled")));
        }
        return settle_pending(o, &gates, &pending, cfg, rng);
    }
    let d = total_degree(&cur, rng)?;
    if let Some(p) = pending.first() {
        if d != p.forms.len() {
            return settle_pending(o, &gates, &pending, cfg, rng);
        }
    }
    if d <= 1 {
        let all_vars: Vec<usize> = (0..n).collect();
        let l = learn_linear(&cur, &all_vars, &cfg.pit, rng)
            .ok_or_else(|| Error::SearchExhausted("residual is not affine".into()))?;
        let mut gates = gates;
        gates.push(MulGate { forms: vec![l] });
        return Ok(gates);
    }
    let room = k - all.len();
    let mut last = Error::SearchExhausted("no isolated gate".into());
    let attempt = |next: Vec<MulGate<F::Elem>>, pend: Vec<MulGate<F::Elem>>, calls: &mut usize, rng: &mut dyn RngCore, last: &mut Error| {
        match peel(o, next, pend, k, calls, cfg, rng) {
            Ok(g) => Some(g),
            Err(e) => {
                *last = e;
                None
            }
        }
    };
    if d == 2 && pending.is_empty() {
        for extra in quadratic_fit(&cur, room, 6) {
            let mut next = gates.clone();
            next.extend(extra);
            if let Some(g) = attempt(next, Vec::new(), calls, rng, &mut last) {
                return Ok(g);
            }
        }
    }
    let mut pool = top_candidates(&cur, d, room, cfg, rng);
    for c in sparse_candidates(&cur, d, cfg, rng) {
        match pool.iter_mut().find(|p| same_gate(&p.homs, &c.homs)) {
            Some(p) => p.mus.extend(c.mus.into_iter().filter(|(w, _)| !p.mus.iter().any(|(v, _)| v == w)).collect::<Vec<_>>()),
            None => pool.push(c),
        }
    }
    match fit_chosen(&cur, d, room, &pool, rng) {
        Ok(chosen) => {
            let tops: Vec<MulGate<F::Elem>> = chosen.iter().map(|(m, c)| bare_gate(&f, m, &c.homs)).collect();
            if chosen.len() == room {
                let pend: Vec<MulGate<F::Elem>> = pending.iter().cloned().chain(tops.iter().cloned()).collect();
                match settle_pending(o, &gates, &pend, cfg, rng) {
                    Ok(g) => return Ok(g),
                    Err(e) => last = e,
                }
            }
            if pending.is_empty() {
                let fitted: Option<Vec<(F::Elem, TopGate<F::Elem>)>> =
                    chosen.iter().map(|(m, c)| top_gate(&cur, c.homs.clone(), cfg, rng).map(|g| (m.clone(), g))).collect();
                match fitted {
                    Some(tops) => {
                        let fitted: Vec<(F::Elem, &TopGate<F::Elem>)> = tops.iter().map(|(m, g)| (m.clone(), g)).collect();
                        for extra in constant_choices(&f, &fitted, 8) {
                            let mut next = gates.clone();
                            next.extend(extra);
                            if let Some(g) = attempt(next, Vec::new(), calls, rng, &mut last) {
                                return Ok(g);
                            }
                        }
                    }
                    None => last = Error::SearchExhausted("no consistent constants".into()),
                }
            }
        }
        Err(e) => last = e,
    }
    // one gate at a time: a gate whose scalar agrees across transversals
    let mut confirmed: Vec<(usize, F::Elem, usize)> =
        pool.iter().enumerate().filter_map(|(i, c)| c.best_mu().filter(|m| m.1 >= 2).map(|(m, t)| (i, m, t))).collect();
    confirmed.sort_by_key(|c| std::cmp::Reverse(c.2));
    confirmed.truncate(6);
    let mut ranked: Vec<(bool, usize, F::Elem)> = confirmed.into_iter().map(|(i, m, _)| (reproduced(&cur, &pool[i].homs, cfg, rng), i, m)).collect();
    ranked.sort_by_key(|r| !r.0);
    for (_, i, mu) in ranked.into_iter().take(3) {
        if pending.is_empty() {
            if let Some(g) = top_gate(&cur, pool[i].homs.clone(), cfg, rng) {
                for extra in constant_choices(&f, &[(mu.clone(), &g)], 4) {
                    let mut next = gates.clone();
                    next.extend(extra);
                    if let Some(g) = attempt(next, Vec::new(), calls, rng, &mut last) {
                        return Ok(g);
                    }
                }
            }
        }
        let mut pend = pending.clone();
        pend.push(bare_gate(&f, &mu, &pool[i].homs));
        if let Some(g) = attempt(gates.clone(), pend, calls, rng, &mut last) {
            return Ok(g);
        }
    }
    Err(last)
}

fn derivative_learn<F: Field>(
    o: &BlackBoxOracle<F>,
    k: usize,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Result<Vec<MulGate<F::Elem>>> {
    peel(o, Vec::new(), Vec::new(), k, &mut 40, cfg, rng)
}

/// Variable classes `u ~ v` iff `d_u d_v f = 0`, when they form a set-multilinear
/// partition of a homogeneous `f`.
fn detect_partition<F: Field>(o: &BlackBoxOracle<F>, d: usize, cfg: &MlConfig, rng: &mut dyn RngCore) -> Option<VarPartition> {
    let n = o.nvars();
    let essential: Vec<usize> = (0..n).filter(|&v| !is_zero(&mderiv(o, &[v]), &cfg.pit, rng).is_zero()).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in &essential {
        let hit: Vec<usize> = classes
            .iter()
            .enumerate()
            .filter(|(_, c)| is_zero(&mderiv(o, &[c[0], v]), &cfg.pit, rng).is_zero())
            .map(|(i, _)| i)
            .collect();
        match hit.as_slice() {
            [] => classes.push(vec![v]),
            [i] => classes[*i].push(v),
            _ => return None,
        }
    }
    if classes.len() != d {
        return None;
    }
    for c in &classes {
        for (a, &u) in c.iter().enumerate() {
            for &v in &c[a + 1..] {
                if !is_zero(&mderiv(o, &[u, v]), &cfg.pit, rng).is_zero() {
                    return None;
                }
            }
        }
    }
    if !is_zero(&o.sub(&top_part(o, d)), &cfg.pit, rng).is_zero() {
        return None;
    }
    let rest: Vec<usize> = (0..n).filter(|v| !essential.contains(v)).collect();
    classes[0].extend(rest);
    VarPartition::new(classes, n).ok()
}

/// Coefficient matching for `g(y) = sum_i prod_j (a_{i,j,0} + sum_l a_{i,j,l} y_l)`
/// together with the constraints that every lifted gate is multilinear:
/// `coef_t(L_{i,j}) coef_t(L_{i,r}) = 0` where `L = a . (A^{-1} x)`.
pub fn ml_system(fp: &PrimeField, g: &SparsePoly<u64>, ainv: &Matrix<u64>, k: usize, d: usize) -> Result<PolySystem> {
    let m = g.nvars;
    let n = ainv.cols;
    let per_form = m + 1;
    let nv = k * d * per_form;
    let idx = |i: usize, j: usize, l: usize| (i * d + j) * per_form + l;
    let names = (0..k)
        .flat_map(|i| (0..d).flat_map(move |j| (0..per_form).map(move |l| format!("a{i}_{j}_{l}"))))
        .collect();
    let unit = |v: usize| {
        let mut e = vec![0u32; nv];
        e[v] = 1;
        e
    };
    // y-monomial -> coefficient polynomial in the unknowns
    let mut total: BTreeMap<Monomial, SparsePoly<u64>> = BTreeMap::new();
    for i in 0..k {
        let mut prod: BTreeMap<Monomial, SparsePoly<u64>> = BTreeMap::new();
        prod.insert(vec![0; m], SparsePoly::constant(fp, nv, 1));
        for j in 0..d {
            let mut next: BTreeMap<Monomial, SparsePoly<u64>> = BTreeMap::new();
            for (ym, c) in &prod {
                for l in 0..per_form {
                    let mut ym2 = ym.clone();
                    if l > 0 {
                        ym2[l - 1] += 1;
                    }
                    let term = c.mul(fp, &SparsePoly::from_terms(fp, nv, vec![(unit(idx(i, j, l)), 1)]));
                    let e = next.entry(ym2).or_insert_with(|| SparsePoly::zero(nv));
                    *e = e.add(fp, &term);
                }
            }
            prod = next;
        }
        for (ym, c) in prod {
            let e = total.entry(ym).or_insert_with(|| SparsePoly::zero(nv));
            *e = e.add(fp, &c);
        }
    }
    for (ym, c) in &g.terms {
        let e = total.entry(ym.clone()).or_insert_with(|| SparsePoly::zero(nv));
        e.add_term(fp, vec![0; nv], fp.neg(c));
    }
    let mut eqs: Vec<SparsePoly<u64>> = total.into_values().filter(|p| !p.is_zero()).collect();
    for i in 0..k {
        let lifted: Vec<SparsePoly<u64>> = (0..d * n)
            .map(|jt| {
                let (j, t) = (jt / n, jt % n);
                SparsePoly::from_terms(fp, nv, (0..m).map(|l| (unit(idx(i, j, l + 1)), *ainv.get(l, t))).collect())
            })
            .collect();
        for j in 0..d {
            for r in j + 1..d {
                for t in 0..n {
                    let p = lifted[j * n + t].mul(fp, &lifted[r * n + t]);
                    if !p.is_zero() {
                        eqs.push(p);
                    }
                }
            }
        }
    }
    PolySystem::new(*fp, names, eqs)
}

fn system_learn<F: Field>(
    o: &BlackBoxOracle<F>,
    k: usize,
    d: usize,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Result<Vec<MulGate<F::Elem>>> {
    let f = o.field().clone();
    if f.ext_degree() != 1 {
        return Err(Error::SearchExhausted("coefficient system needs a prime field".into()));
    }
    let red = reduce_variables(o, rng)?;
    let m = red.m;
    if k * d * (m + 1) > cfg.system_unknowns {
        return Err(Error::SearchExhausted("coefficient system too large for the generic solver".into()));
    }
    let g = red.compact();
    let g = g.restrict(&(0..g.nvars()).map(|i| if i < m { None } else { Some(f.zero()) }).collect::<Vec<_>>());
    let terms = (0..=d).map(|e| binom(m + e - 1, e)).sum();
    let gp = sparse_interpolate(&g, d, terms, &SparseConfig::default(), rng)?;
    let fp = PrimeField::new(f.characteristic())?;
    let to_u = |e: &F::Elem| f.as_prime_residue(e).expect("prime field");
    let gp = SparsePoly::from_terms(&fp, m, gp.terms.iter().map(|(mo, c)| (mo.clone(), to_u(c))).collect());
    let ainv = linalg::inverse(&f, &red.a)?;
    let ainv_u = Matrix::from_rows((0..m).map(|l| ainv.row(l).iter().map(to_u).collect()).collect())?;
    let sys = ml_system(&fp, &gp, &ainv_u, k, d)?;
    let sol = match solve_system(&sys, false, rng) {
        Ok(s) => s,
        Err(Error::NoSolution) => return Err(Error::NotRepresentable(k)),
        Err(e) => return Err(e),
    };
    let a: Vec<F::Elem> = sol.values.iter().map(|v| f.from_u64(v[0])).collect();
    let n = o.nvars();
    let per_form = m + 1;
    Ok((0..k)
        .map(|i| {
            let forms = (0..d)
                .map(|j| {
                    let base = (i * d + j) * per_form;
                    let mut l = LinearForm::constant_form(&f, n, a[base].clone());
                    for t in 0..n {
                        let c = (0..m).fold(f.zero(), |acc, s| f.add(&acc, &f.mul(&a[base + s + 1], ainv.get(s, t))));
                        l.coeffs[t] = c;
                    }
                    l
                })
                .collect();
            MulGate { forms }
        })
        .collect())
}

fn binom(n: usize, r: usize) -> usize {
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn verify<F: Field>(
    o: &BlackBoxOracle<F>,
    gates: Vec<MulGate<F::Elem>>,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    let c = DepthThreeCircuit::from_mul_gates(o.nvars(), CircuitKind::Multilinear, gates);
    if !c.is_multilinear(o.field()) {
        return Err(Error::VerificationFailed("learned gates are not multilinear".into()));
    }
    match equal(o, &c, &cfg.pit, rng) {
        Verdict::Zero => Ok(c),
        Verdict::NonZero(_) => Err(Error::VerificationFailed("learned circuit differs from the oracle".into())),
    }
}

/// Multilinear circuit of fan-in at most `k` for a degree-`d` oracle.
pub fn reconstruct_ml_lowdeg<F: Field>(
    o: &BlackBoxOracle<F>,
    k: usize,
    d: usize,
    cfg: &MlConfig,
    rng: &mut dyn RngCore,
) -> Result<DepthThreeCircuit<F::Elem>> {
    let f = o.field().clone();
    if f.characteristic() <= d as u64 {
        return Err(Error::CharTooSmall { p: f.characteristic(), d });
    }
    let o = o.clone().with_degree(d).with_var_degree(1);
    if is_zero(&o, &cfg.pit, rng).is_zero() {
        return Ok(DepthThreeCircuit::from_mul_gates(o.nvars(), CircuitKind::Multilinear, Vec::new()));
    }
    let mut last = Error::SearchExhausted("no attempt".into());
    for _ in 0..cfg.retries.max(1) {
        match derivative_learn(&o, k, cfg, rng).and_then(|g| verify(&o, g, cfg, rng)) {
            Ok(c) => return Ok(c),
            Err(e) => last = e,
        }
    }
    let deg = total_degree(&o, rng)?;
    if let Some(part) = detect_partition(&o, deg, cfg, rng) {
        let scfg = SmlConfig { pit: cfg.pit.clone(), ..SmlConfig::default() };
        if let Ok(c) = reconstruct_sml(&o, &part, k, &scfg, rng) {
            return verify(&o, c.mul_gates(), cfg, rng);
        }
    }
    match system_learn(&o, k, deg, cfg, rng) {
        Ok(g) => verify(&o, g, cfg, rng),
        Err(Error::NotRepresentable(kk)) => Err(Error::NotRepresentable(kk)),
        Err(_) => Err(match last {
            Error::VerificationFailed(s) | Error::SearchExhausted(s) => Error::SearchExhausted(s),
            e => e,
        }),
    }
}

/// Strip the linear factors shared by all gates, learn the rest, multiply back.
pub fn reconstruct_ml_lowrank<F: Field>(
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
    let sp = extract_simple(&o, &cfg.pit, rng)?;
    let rest_deg = o.degree_bound().saturating_sub(sp.linear.len());
    let d = total_degree(&sp.simple.clone().with_degree(rest_deg), rng)?;
    let inner = if d == 0 {
        let c = sp.simple.eval(&vec![f.zero(); n]);
        vec![MulGate { forms: vec![LinearForm::constant_form(&f, n, c)] }]
    } else {
        reconstruct_ml_lowdeg(&sp.simple, k, d, cfg, rng)?.mul_gates()
    };
    let gates = inner
        .into_iter()
        .map(|mut g| {
            g.forms.extend(sp.linear.iter().cloned());
            g
        })
        .collect();
    verify(&o, gates, cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lf(f: &PrimeField, n: usize, c: u64, terms: &[(usize, u64)]) -> LinearForm<u64> {
        let mut l = LinearForm::constant_form(f, n, c);
        for &(v, a) in terms {
            l.coeffs[v] = a;
        }
        l
    }

    #[test]
    fn derivative_isolates_single_form() {
        let f = PrimeField::new(101).unwrap();
        // (x0 + 2 x1)(x2 + 3)
        let g = MulGate { forms: vec![lf(&f, 3, 0, &[(0, 1), (1, 2)]), lf(&f, 3, 3, &[(2, 1)])] };
        let o = circuit_oracle(&f, 3, &[g]);
        let d = mderiv(&o, &[2]);
        let x = [5, 7, 11];
        assert_eq!(d.eval(&x), (5 + 14) % 101);
    }

    #[test]
    fn two_products_of_four_variables() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 4;
        let gates = vec![
            MulGate { forms: vec![LinearForm::var(&f, n, 0), LinearForm::var(&f, n, 1)] },
            MulGate { forms: vec![LinearForm::var(&f, n, 2), LinearForm::var(&f, n, 3)] },
        ];
        let o = circuit_oracle(&f, n, &gates);
        let c = reconstruct_ml_lowdeg(&o, 2, 2, &MlConfig::default(), &mut rng).unwrap();
        assert_eq!(c.fan_in(), 2);
        assert!(c.is_multilinear(&f));
    }

    #[test]
    fn gcd_is_stripped() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 5;
        // x0 x1 (x2 x3 + x4)
        let gates = vec![
            MulGate { forms: (0..4).map(|v| LinearForm::var(&f, n, v)).collect() },
            MulGate { forms: vec![LinearForm::var(&f, n, 0), LinearForm::var(&f, n, 1), LinearForm::var(&f, n, 4)] },
        ];
        let o = circuit_oracle(&f, n, &gates);
        let c = reconstruct_ml_lowrank(&o, 2, &MlConfig::default(), &mut rng).unwrap();
        assert_eq!(c.fan_in(), 2);
        let pure = circuit_oracle(&f, 6, &[MulGate { forms: (0..6).map(|v| LinearForm::var(&f, 6, v)).collect() }]);
        assert_eq!(reconstruct_ml_lowrank(&pure, 1, &MlConfig::default(), &mut rng).unwrap().fan_in(), 1);
    }

    #[test]
    fn mixed_supports_with_constants() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 6;
        let gates = vec![
            MulGate { forms: vec![lf(&f, n, 3, &[(0, 2), (3, 5)]), lf(&f, n, 1, &[(1, 7)]), lf(&f, n, 0, &[(2, 1), (4, 9)])] },
            MulGate { forms: vec![lf(&f, n, 4, &[(0, 1), (1, 1)]), lf(&f, n, 0, &[(2, 3), (5, 2)]), lf(&f, n, 2, &[(3, 1)])] },
            MulGate { forms: vec![lf(&f, n, 1, &[(4, 1)]), lf(&f, n, 5, &[(5, 3), (0, 8)])] },
        ];
        let o = circuit_oracle(&f, n, &gates);
        let c = reconstruct_ml_lowdeg(&o, 3, 3, &MlConfig::default(), &mut rng).unwrap();
        assert!(c.fan_in() <= 3);
    }

    #[test]
    fn system_lifts_to_a_multilinear_gate() {
        let fp = PrimeField::new(11).unwrap();
        // g = y0 y1 with the identity change of coordinates
        let g = SparsePoly::from_terms(&fp, 2, vec![(vec![1, 1], 1)]);
        let ainv = Matrix::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let sys = ml_system(&fp, &g, &ainv, 1, 2).unwrap();
        assert_eq!(sys.nvars(), 6);
        // (y0)(y1) is a solution; (y0 + y1)(y0) is not
        let good = [0, 1, 0, 0, 0, 1];
        assert!(sys.eqs.iter().all(|e| e.eval(&fp, &good) == 0));
        let bad = [0, 1, 1, 0, 1, 0];
        assert!(sys.eqs.iter().any(|e| e.eval(&fp, &bad) != 0));
    }
}
