//! Exact CP decomposition of small explicit tensors.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{self, Matrix};
use crate::poly::Tensor;
use crate::upoly::{self, UPoly};

/// `terms[r][j]` is the mode-`j` vector of term `r`.
pub type Terms<E> = Vec<Vec<Vec<E>>>;

/// Dense row-major tensor.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense<E> {
    pub shape: Vec<usize>,
    pub data: Vec<E>,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for j in (0..shape.len().saturating_sub(1)).rev() {
        s[j] = s[j + 1] * shape[j + 1];
    }
    s
}

fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for j in (0..shape.len()).rev() {
        idx[j] = flat % shape[j];
        flat /= shape[j];
    }
    idx
}

impl<E: Clone + PartialEq + std::fmt::Debug> Dense<E> {
    pub fn from_tensor<F: Field<Elem = E>>(f: &F, t: &Tensor<E>) -> Result<Self> {
        let total: u128 = t.shape.iter().map(|&s| s as u128).product();
        if total > crate::poly::DENSE_LIMIT {
            return Err(Error::TensorTooLarge(total));
        }
        let mut data = vec![f.zero(); total as usize];
        let st = strides(&t.shape);
        for (idx, v) in t.to_entries(f)? {
            data[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()] = v;
        }
        Ok(Dense { shape: t.shape.clone(), data })
    }

    pub fn from_terms<F: Field<Elem = E>>(f: &F, shape: &[usize], terms: &Terms<E>) -> Self {
        let total: usize = shape.iter().product();
        let mut data = vec![f.zero(); total];
        for (flat, slot) in data.iter_mut().enumerate() {
            let idx = unflatten(flat, shape);
            for t in terms {
                let mut p = f.one();
                for (j, &i) in idx.iter().enumerate() {
                    p = f.mul(&p, &t[j][i]);
                }
                *slot = f.add(slot, &p);
            }
        }
        Dense { shape: shape.to_vec(), data }
    }

    #[cfg(test)]
    pub fn to_tensor<F: Field<Elem = E>>(&self, f: &F) -> Tensor<E> {
        let entries = self
            .data
            .iter()
            .enumerate()
            .filter(|(_, v)| !f.is_zero(v))
            .map(|(i, v)| (unflatten(i, &self.shape), v.clone()))
            .collect();
        Tensor::sparse(self.shape.clone(), entries)
    }

    fn is_zero<F: Field<Elem = E>>(&self, f: &F) -> bool {
        self.data.iter().all(|v| f.is_zero(v))
    }

    fn get(&self, idx: &[usize]) -> &E {
        let st = strides(&self.shape);
        &self.data[idx.iter().zip(&st).map(|(i, s)| i * s).sum::<usize>()]
    }

    /// Rows indexed by `row_modes` (in the given order), columns by the rest in ascending order.
    pub fn flatten<F: Field<Elem = E>>(&self, f: &F, row_modes: &[usize]) -> Matrix<E> {
        let col_modes: Vec<usize> = (0..self.shape.len()).filter(|j| !row_modes.contains(j)).collect();
        let nr: usize = row_modes.iter().map(|&j| self.shape[j]).product();
        let nc: usize = col_modes.iter().map(|&j| self.shape[j]).product();
        let mut m = Matrix::filled(nr, nc, f.zero());
        for (flat, v) in self.data.iter().enumerate() {
            let idx = unflatten(flat, &self.shape);
            let r = row_modes.iter().fold(0, |acc, &j| acc * self.shape[j] + idx[j]);
            let c = col_modes.iter().fold(0, |acc, &j| acc * self.shape[j] + idx[j]);
            m.set(r, c, v.clone());
        }
        m
    }

    /// Sub-tensor on the listed indices per mode.
    fn select(&self, keep: &[Vec<usize>]) -> Self {
        let shape: Vec<usize> = keep.iter().map(|k| k.len()).collect();
        let total: usize = shape.iter().product();
        let data = (0..total)
            .map(|flat| {
                let idx = unflatten(flat, &shape);
                let orig: Vec<usize> = idx.iter().enumerate().map(|(j, &i)| keep[j][i]).collect();
                self.get(&orig).clone()
            })
            .collect();
        Dense { shape, data }
    }

    /// Slice with mode `c` fixed to `l`.
    fn slice(&self, c: usize, l: usize) -> Self {
        let keep: Vec<Vec<usize>> =
            self.shape.iter().enumerate().map(|(j, &s)| if j == c { vec![l] } else { (0..s).collect() }).collect();
        let mut d = self.select(&keep);
        d.shape.remove(c);
        d
    }

    fn sub<F: Field<Elem = E>>(&self, f: &F, o: &Self) -> Self {
        Dense { shape: self.shape.clone(), data: self.data.iter().zip(&o.data).map(|(a, b)| f.sub(a, b)).collect() }
    }

    fn combine<F: Field<Elem = E>>(f: &F, parts: &[Self], coeffs: &[E]) -> Self {
        let mut data = vec![f.zero(); parts[0].data.len()];
        for (p, c) in parts.iter().zip(coeffs) {
            for (acc, v) in data.iter_mut().zip(&p.data) {
                *acc = f.add(acc, &f.mul(c, v));
            }
        }
        Dense { shape: parts[0].shape.clone(), data }
    }
}

/// Mode vectors of a rank-one tensor, `None` if it is zero or of higher rank.
fn factor_rank_one<F: Field>(f: &F, t: &Dense<F::Elem>) -> Option<Vec<Vec<F::Elem>>> {
    let flat0 = t.data.iter().position(|v| !f.is_zero(v))?;
    let idx0 = unflatten(flat0, &t.shape);
    let c = t.data[flat0].clone();
    let m = t.shape.len();
    let mut vecs: Vec<Vec<F::Elem>> = (0..m)
        .map(|j| {
            (0..t.shape[j])
                .map(|i| {
                    let mut idx = idx0.clone();
                    idx[j] = i;
                    t.get(&idx).clone()
                })
                .collect()
        })
        .collect();
    // t = c^{1-m} * outer(vecs)
    let lam = f.pow(&f.inv(&c).ok()?, (m as u64).saturating_sub(1));
    for x in vecs[0].iter_mut() {
        *x = f.mul(x, &lam);
    }
    (Dense::from_terms(f, &t.shape, &vec![vecs.clone()]) == *t).then_some(vecs)
}

/// Largest rank over all flattenings with mode 0 among the rows.
pub(crate) fn flattening_bound<F: Field>(f: &F, t: &Dense<F::Elem>) -> usize {
    let m = t.shape.len();
    if m < 2 {
        return usize::from(!t.is_zero(f));
    }
    (0..1usize << (m - 1))
        .filter_map(|mask| {
            let rows: Vec<usize> = std::iter::once(0).chain((1..m).filter(|j| mask >> (j - 1) & 1 == 1)).collect();
            (rows.len() < m).then(|| linalg::rank(f, &t.flatten(f, &rows)))
        })
        .max()
        .unwrap_or(0)
}

/// Lower bound on the rank from all flattenings.
pub fn rank_lower_bound<F: Field>(f: &F, t: &Tensor<F::Elem>) -> Result<usize> {
    Ok(flattening_bound(f, &Dense::from_tensor(f, t)?))
}

/// Write `M = C R` with `R` made of independent rows of `M`.
fn row_factor<F: Field>(f: &F, m: &Matrix<F::Elem>) -> Result<(Vec<usize>, Matrix<F::Elem>)> {
    let idx = linalg::independent_rows(f, m);
    let basis_t = m.select_rows(&idx).transpose();
    let mut c = linalg::zeros(f, m.rows, idx.len());
    for u in 0..m.rows {
        let x = linalg::solve(f, &basis_t, m.row(u))?;
        for (l, v) in x.into_iter().enumerate() {
            c.set(u, l, v);
        }
    }
    Ok((idx, c))
}

/// At most `k` rank-one terms summing exactly to `t`.
pub fn cp_decompose<F: Field>(f: &F, t: &Tensor<F::Elem>, k: usize, rng: &mut dyn RngCore) -> Result<Terms<F::Elem>> {
    decompose(f, &Dense::from_tensor(f, t)?, k, true, rng)
}

pub(crate) fn decompose<F: Field>(
    f: &F,
    t: &Dense<F::Elem>,
    k: usize,
    allow_peel: bool,
    rng: &mut dyn RngCore,
) -> Result<Terms<F::Elem>> {
    if t.is_zero(f) {
        return Ok(Vec::new());
    }
    let m = t.shape.len();
    let lb = flattening_bound(f, t);
    if lb > k {
        return Err(Error::NotRepresentable(k));
    }
    // compress every mode onto independent rows of its flattening
    let mut keep = Vec::with_capacity(m);
    let mut lift = Vec::with_capacity(m);
    for j in 0..m {
        let (idx, c) = row_factor(f, &t.flatten(f, &[j]))?;
        keep.push(idx);
        lift.push(c);
    }
    let core = t.select(&keep);
    let active: Vec<usize> = (0..m).filter(|&j| core.shape[j] >= 2).collect();
    let reduced = Dense { shape: active.iter().map(|&j| core.shape[j]).collect(), data: core.data.clone() };
    let core_terms: Terms<F::Elem> = match active.len() {
        0 => vec![Vec::new()],
        1 => vec![vec![reduced.data.clone()]],
        2 => {
            let mat = reduced.flatten(f, &[0]);
            let (idx, c) = row_factor(f, &mat)?;
            idx.iter().enumerate().map(|(l, &r)| vec![c.col(l), mat.row(r).to_vec()]).collect()
        }
        _ => higher(f, &reduced, lb, k, allow_peel, rng)?,
    };
    let scalar = if active.is_empty() { core.data[0].clone() } else { f.one() };
    let mut out = Vec::with_capacity(core_terms.len());
    for ct in core_terms {
        let mut term = Vec::with_capacity(m);
        let mut a = 0;
        for j in 0..m {
            let v = if core.shape[j] >= 2 {
                a += 1;
                ct[a - 1].clone()
            } else {
                vec![if j == 0 { scalar.clone() } else { f.one() }]
            };
            term.push(linalg::mat_vec(f, &lift[j], &v));
        }
        out.push(term);
    }
    if Dense::from_terms(f, &t.shape, &out) != *t {
        return Err(Error::VerificationFailed("lifted terms disagree with the tensor".into()));
    }
    Ok(out)
}

/// Order at least three, every mode of dimension at least two.
fn higher<F: Field>(
    f: &F,
    t: &Dense<F::Elem>,
    lb: usize,
    k: usize,
    allow_peel: bool,
    rng: &mut dyn RngCore,
) -> Result<Terms<F::Elem>> {
    let check = |terms: Terms<F::Elem>| (Dense::from_terms(f, &t.shape, &terms) == *t).then_some(terms);
    for r in lb.max(1)..=k {
        for c in 0..t.shape.len() {
            if t.shape[c] == r && r <= 3 {
                if let Some(terms) = slice_method(f, t, c, rng).and_then(check) {
                    return Ok(terms);
                }
            }
        }
        if let Some(terms) = jennrich_any(f, t, r, rng).and_then(check) {
            return Ok(terms);
        }
        if allow_peel && r >= 2 {
            for _ in 0..48 {
                let peel: Vec<Vec<F::Elem>> = t.shape.iter().map(|&s| f.random_vec(s, rng)).collect();
                let rest = t.sub(f, &Dense::from_terms(f, &t.shape, &vec![peel.clone()]));
                if let Ok(mut terms) = decompose(f, &rest, r - 1, false, rng) {
                    terms.push(peel);
                    if let Some(terms) = check(terms) {
                        return Ok(terms);
                    }
                }
            }
        }
    }
    Err(Error::SearchExhausted(format!("no decomposition of a {:?} tensor with {k} terms", t.shape)))
}

/// Homogeneous quadratic `sum_{l<=m} q[l][m] x_l x_m`, stored upper triangular.
type Quad<E> = Vec<Vec<E>>;

fn quad_eval<F: Field>(f: &F, q: &Quad<F::Elem>, x: &[F::Elem]) -> F::Elem {
    let mut acc = f.zero();
    for l in 0..x.len() {
        for m in l..x.len() {
            acc = f.add(&acc, &f.mul(&q[l][m], &f.mul(&x[l], &x[m])));
        }
    }
    acc
}

/// Random combinations of all 2x2 minors of all mode flattenings of `sum x_l S_l`.
fn minor_quadrics<F: Field>(f: &F, slices: &[Dense<F::Elem>], count: usize, rng: &mut dyn RngCore) -> Vec<Quad<F::Elem>> {
    let r = slices.len();
    let m = slices[0].shape.len();
    let mut qs: Vec<Quad<F::Elem>> = vec![vec![vec![f.zero(); r]; r]; count];
    for j in 0..m {
        let mats: Vec<Matrix<F::Elem>> = slices.iter().map(|s| s.flatten(f, &[j])).collect();
        let (nr, nc) = (mats[0].rows, mats[0].cols);
        let entry = |a: usize, b: usize| -> Vec<F::Elem> { mats.iter().map(|mm| mm.get(a, b).clone()).collect() };
        for a in 0..nr {
            for b in a + 1..nr {
                for c in 0..nc {
                    for d in c + 1..nc {
                        let (eac, ebd, ead, ebc) = (entry(a, c), entry(b, d), entry(a, d), entry(b, c));
                        let w: Vec<F::Elem> = (0..count).map(|_| f.random(rng)).collect();
                        for l in 0..r {
                            for mm in 0..r {
                                let v = f.sub(&f.mul(&eac[l], &ebd[mm]), &f.mul(&ead[l], &ebc[mm]));
                                if f.is_zero(&v) {
                                    continue;
                                }
                                let (lo, hi) = if l <= mm { (l, mm) } else { (mm, l) };
                                for (q, wi) in qs.iter_mut().zip(&w) {
                                    q[lo][hi] = f.add(&q[lo][hi], &f.mul(wi, &v));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    qs
}

/// `q(u + t v)` as a univariate polynomial in `t`.
fn quad_on_line<F: Field>(f: &F, q: &Quad<F::Elem>, u: &[F::Elem], v: &[F::Elem]) -> UPoly<F> {
    let c0 = quad_eval(f, q, u);
    let c2 = quad_eval(f, q, v);
    let sum: Vec<F::Elem> = u.iter().zip(v).map(|(a, b)| f.add(a, b)).collect();
    let c1 = f.sub(&f.sub(&quad_eval(f, q, &sum), &c0), &c2);
    upoly::trim(f, vec![c0, c1, c2])
}

/// Common roots in `t` of the quadrics restricted to the line `u + t v`.
fn line_roots<F: Field>(f: &F, qs: &[Quad<F::Elem>], u: &[F::Elem], v: &[F::Elem], rng: &mut dyn RngCore) -> Vec<F::Elem> {
    let mut g: UPoly<F> = Vec::new();
    for q in qs {
        g = upoly::gcd(f, &g, &quad_on_line(f, q, u, v));
    }
    if g.is_empty() {
        // the whole line lies on the locus; sample a few points
        return (0..4).map(|_| f.random(rng)).collect();
    }
    upoly::roots(f, &g, rng)
}

/// Coefficient vectors `x` with `sum x_l S_l` of rank one, for two or three slices.
fn rank_one_points<F: Field>(f: &F, slices: &[Dense<F::Elem>], rng: &mut dyn RngCore) -> Vec<Vec<F::Elem>> {
    let r = slices.len();
    let qs = minor_quadrics(f, slices, 3, rng);
    let e = |i: usize| -> Vec<F::Elem> { (0..r).map(|l| if l == i { f.one() } else { f.zero() }).collect() };
    let mut pts = Vec::new();
    if r == 2 {
        for t in line_roots(f, &qs, &e(0), &e(1), rng) {
            pts.push(vec![f.one(), t]);
        }
        pts.push(e(1));
        return pts;
    }
    // random chart: x = u0 + s u1 + t u2
    let u: Vec<Vec<F::Elem>> = loop {
        let u: Vec<Vec<F::Elem>> = (0..3).map(|_| f.random_vec(3, rng)).collect();
        if linalg::rank(f, &Matrix::from_rows(u.clone()).expect("square")) == 3 {
            break u;
        }
    };
    let at = |s: &F::Elem, t: &F::Elem| -> Vec<F::Elem> {
        (0..3).map(|l| f.add(&u[0][l], &f.add(&f.mul(s, &u[1][l]), &f.mul(t, &u[2][l])))).collect()
    };
    // each quadric as a quadratic in t with coefficients in s
    let in_t = |q: &Quad<F::Elem>| -> [UPoly<F>; 3] {
        let c0 = quad_on_line(f, q, &u[0], &u[1]);
        // bilinear part between u1 and u2 contributes s t, between u0 and u2 contributes t
        let b = |a: &[F::Elem], c: &[F::Elem]| -> F::Elem {
            let sum: Vec<F::Elem> = a.iter().zip(c).map(|(x, y)| f.add(x, y)).collect();
            f.sub(&f.sub(&quad_eval(f, q, &sum), &quad_eval(f, q, a)), &quad_eval(f, q, c))
        };
        let c1 = upoly::trim(f, vec![b(&u[0], &u[2]), b(&u[1], &u[2])]);
        let c2 = upoly::trim(f, vec![quad_eval(f, q, &u[2])]);
        [c0, c1, c2]
    };
    let coeffs: Vec<[UPoly<F>; 3]> = qs.iter().map(in_t).collect();
    let res = |a: &[UPoly<F>; 3], b: &[UPoly<F>; 3]| -> UPoly<F> {
        // (a2 b0 - a0 b2)^2 - (a2 b1 - a1 b2)(a1 b0 - a0 b1)
        let m = |x: &UPoly<F>, y: &UPoly<F>| upoly::mul(f, x, y);
        let d20 = upoly::sub(f, &m(&a[2], &b[0]), &m(&a[0], &b[2]));
        let d21 = upoly::sub(f, &m(&a[2], &b[1]), &m(&a[1], &b[2]));
        let d10 = upoly::sub(f, &m(&a[1], &b[0]), &m(&a[0], &b[1]));
        upoly::sub(f, &m(&d20, &d20), &m(&d21, &d10))
    };
    let mut svals: Vec<F::Elem> = Vec::new();
    let r01 = res(&coeffs[0], &coeffs[1]);
    let r02 = res(&coeffs[0], &coeffs[2]);
    let rr = upoly::gcd(f, &r01, &r02);
    if rr.is_empty() {
        svals.extend((0..16).map(|_| f.random(rng)));
    } else {
        svals.extend(upoly::roots(f, &rr, rng));
    }
    for s in svals {
        let base = at(&s, &f.zero());
        for t in line_roots(f, &qs, &base, &u[2], rng) {
            pts.push(at(&s, &t));
        }
    }
    // points at infinity of the chart: the line through u1 and u2
    for t in line_roots(f, &qs, &u[1], &u[2], rng) {
        pts.push(u[1].iter().zip(&u[2]).map(|(a, b)| f.add(a, &f.mul(&t, b))).collect());
    }
    pts.push(u[2].clone());
    pts
}

/// Rank-one elements spanning the slices along a mode of dimension `r`.
fn slice_method<F: Field>(f: &F, t: &Dense<F::Elem>, c: usize, rng: &mut dyn RngCore) -> Option<Terms<F::Elem>> {
    let r = t.shape[c];
    let slices: Vec<Dense<F::Elem>> = (0..r).map(|l| t.slice(c, l)).collect();
    let mut chosen: Vec<(Vec<F::Elem>, Vec<Vec<F::Elem>>)> = Vec::new();
    for x in rank_one_points(f, &slices, rng) {
        if chosen.len() == r {
            break;
        }
        let mut rows: Vec<Vec<F::Elem>> = chosen.iter().map(|(y, _)| y.clone()).collect();
        rows.push(x.clone());
        if linalg::rank(f, &Matrix::from_rows(rows).ok()?) < chosen.len() + 1 {
            continue;
        }
        if let Some(vecs) = factor_rank_one(f, &Dense::combine(f, &slices, &x)) {
            chosen.push((x, vecs));
        }
    }
    if chosen.len() < r {
        return None;
    }
    // P_i = sum_l K[i][l] S_l, so t = sum_i P_i (x) column i of K^{-1}
    let kmat = Matrix::from_rows(chosen.iter().map(|(x, _)| x.clone()).collect()).ok()?;
    let kinv = linalg::inverse(f, &kmat).ok()?;
    Some(
        chosen
            .into_iter()
            .enumerate()
            .map(|(i, (_, mut vecs))| {
                vecs.insert(c, kinv.col(i));
                vecs
            })
            .collect(),
    )
}

fn jennrich_any<F: Field>(f: &F, t: &Dense<F::Elem>, r: usize, rng: &mut dyn RngCore) -> Option<Terms<F::Elem>> {
    let m = t.shape.len();
    if m > 7 {
        return None;
    }
    let mut rank_cache = std::collections::HashMap::new();
    let mut flat_rank = |modes: &[usize]| -> usize {
        *rank_cache.entry(modes.to_vec()).or_insert_with(|| linalg::rank(f, &t.flatten(f, modes)))
    };
    let total = 3usize.pow(m as u32);
    for code in 0..total {
        let labels: Vec<usize> = (0..m).map(|j| code / 3usize.pow(j as u32) % 3).collect();
        let group = |g: usize| -> Vec<usize> { (0..m).filter(|&j| labels[j] == g).collect() };
        let (a, b, c) = (group(0), group(1), group(2));
        if a.is_empty() || b.is_empty() || c.is_empty() || a[0] > b[0] {
            continue;
        }
        if flat_rank(&a) < r || flat_rank(&b) < r {
            continue;
        }
        for _ in 0..3 {
            if let Some(terms) = jennrich(f, t, &a, &b, &c, r, rng) {
                return Some(terms);
            }
        }
    }
    None
}

/// Simultaneous diagonalisation of two random contractions over the `c` modes.
fn jennrich<F: Field>(
    f: &F,
    t: &Dense<F::Elem>,
    a: &[usize],
    b: &[usize],
    c: &[usize],
    r: usize,
    rng: &mut dyn RngCore,
) -> Option<Terms<F::Elem>> {
    let dims = |g: &[usize]| -> usize { g.iter().map(|&j| t.shape[j]).product() };
    let (na, nb, nc) = (dims(a), dims(b), dims(c));
    let w1 = f.random_vec(nc, rng);
    let w2 = f.random_vec(nc, rng);
    let mut m1 = linalg::zeros(f, na, nb);
    let mut m2 = linalg::zeros(f, na, nb);
    for (flat, v) in t.data.iter().enumerate() {
        if f.is_zero(v) {
            continue;
        }
        let idx = unflatten(flat, &t.shape);
        let pos = |g: &[usize]| g.iter().fold(0, |acc, &j| acc * t.shape[j] + idx[j]);
        let (i, jb, kc) = (pos(a), pos(b), pos(c));
        let x1 = f.add(m1.get(i, jb), &f.mul(v, &w1[kc]));
        let x2 = f.add(m2.get(i, jb), &f.mul(v, &w2[kc]));
        m1.set(i, jb, x1);
        m2.set(i, jb, x2);
    }
    let p = Matrix::from_rows((0..r).map(|_| f.random_vec(na, rng)).collect()).ok()?;
    let q = Matrix::from_rows((0..nb).map(|_| f.random_vec(r, rng)).collect()).ok()?;
    let m2q = linalg::mat_mul(f, &m2, &q).ok()?;
    let small2 = linalg::mat_mul(f, &p, &m2q).ok()?;
    let inv2 = linalg::inverse(f, &small2).ok()?;
    let small1 = linalg::mat_mul(f, &p, &linalg::mat_mul(f, &m1, &q).ok()?).ok()?;
    let x = linalg::mat_mul(f, &small1, &inv2).ok()?;
    let eig = upoly::roots(f, &linalg::charpoly(f, &x).ok()?, rng);
    if eig.len() != r {
        return None;
    }
    let g = linalg::mat_mul(f, &m2q, &inv2).ok()?;
    let a_shape: Vec<usize> = a.iter().map(|&j| t.shape[j]).collect();
    let mut alphas = Vec::with_capacity(r);
    let mut a_vecs = Vec::with_capacity(r);
    for lam in &eig {
        let mut s = x.clone();
        for i in 0..r {
            let v = f.sub(s.get(i, i), lam);
            s.set(i, i, v);
        }
        let ker = linalg::kernel(f, &s);
        if ker.len() != 1 {
            return None;
        }
        let alpha = linalg::mat_vec(f, &g, &ker[0]);
        a_vecs.push(factor_rank_one(f, &Dense { shape: a_shape.clone(), data: alpha.clone() })?);
        alphas.push(alpha);
    }
    // t_A = alpha Gamma
    let alpha_mat = Matrix::from_rows(alphas).ok()?.transpose();
    let rows = linalg::independent_rows(f, &alpha_mat);
    if rows.len() != r {
        return None;
    }
    let t_a = t.flatten(f, a);
    let sq_inv = linalg::inverse(f, &alpha_mat.select_rows(&rows)).ok()?;
    let gamma = linalg::mat_mul(f, &sq_inv, &t_a.select_rows(&rows)).ok()?;
    let rest: Vec<usize> = (0..t.shape.len()).filter(|j| !a.contains(j)).collect();
    let rest_shape: Vec<usize> = rest.iter().map(|&j| t.shape[j]).collect();
    let mut terms = Vec::with_capacity(r);
    for (i, av) in a_vecs.into_iter().enumerate() {
        let rv = factor_rank_one(f, &Dense { shape: rest_shape.clone(), data: gamma.row(i).to_vec() })?;
        let mut term = vec![Vec::new(); t.shape.len()];
        for (pos, &j) in a.iter().enumerate() {
            term[j] = av[pos].clone();
        }
        for (pos, &j) in rest.iter().enumerate() {
            term[j] = rv[pos].clone();
        }
        terms.push(term);
    }
    Some(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_terms(f: &PrimeField, shape: &[usize], k: usize, rng: &mut ChaCha8Rng) -> Terms<u64> {
        (0..k).map(|_| shape.iter().map(|&s| f.random_vec(s, rng)).collect()).collect()
    }

    #[test]
    fn recovers_planted_shapes() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cases: &[(&[usize], usize)] =
            &[(&[3, 3, 3], 3), (&[2, 2, 3], 3), (&[2, 2, 2], 2), (&[4, 1, 3], 2), (&[2, 2, 2, 2, 2], 3), (&[3, 2], 2), (&[5], 1)];
        for &(shape, k) in cases {
            let t = Dense::from_terms(&f, shape, &random_terms(&f, shape, k, &mut rng));
            let terms = decompose(&f, &t, k, true, &mut rng).unwrap();
            assert!(terms.len() <= k, "{shape:?}");
            assert_eq!(Dense::from_terms(&f, shape, &terms), t);
        }
    }

    #[test]
    fn flattening_bound_certifies() {
        let f = PrimeField::new(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let t = Dense::from_terms(&f, &[3, 3, 3], &random_terms(&f, &[3, 3, 3], 3, &mut rng));
        assert_eq!(decompose(&f, &t, 2, true, &mut rng), Err(Error::NotRepresentable(2)));
    }

    #[test]
    fn nonsplit_pencil_needs_three() {
        // slices I and [[0,-1],[1,0]]: x^2 + 1 has no root mod 7
        let f = PrimeField::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut e = std::collections::BTreeMap::new();
        e.insert(vec![0, 0, 0], 1);
        e.insert(vec![1, 1, 0], 1);
        e.insert(vec![0, 1, 1], 6);
        e.insert(vec![1, 0, 1], 1);
        let t = Dense::from_tensor(&f, &Tensor::sparse(vec![2, 2, 2], e)).unwrap();
        assert!(decompose(&f, &t, 2, true, &mut rng).is_err());
        assert_eq!(decompose(&f, &t, 3, true, &mut rng).unwrap().len(), 3);
    }
}
