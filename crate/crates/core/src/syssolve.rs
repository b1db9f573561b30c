//! Exact solving of small polynomial systems by resultant elimination.

use rand::RngCore;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::field::{ExtField, Field, FieldDescriptor, PrimeField};
use crate::linalg::{self, Matrix};
use crate::poly::{LinearForm, SparsePoly};
use crate::upoly::{self, UPoly};

/// Enumerate a coordinate space exhaustively up to this many points.
const ENUM_CAP: u128 = 1 << 17;
/// Random fibres tried when enumeration is out of reach.
const RANDOM_FIBERS: usize = 64;
const SHIFT_TRIES: usize = 20;
const MAX_EXT_DEGREE: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    pub unknowns: Vec<String>,
    pub field: PrimeField,
    pub eqs: Vec<SparsePoly<u64>>,
}

impl PolySystem {
    pub fn new(field: PrimeField, unknowns: Vec<String>, eqs: Vec<SparsePoly<u64>>) -> Result<Self> {
        if let Some(e) = eqs.iter().find(|e| e.nvars != unknowns.len()) {
            return Err(Error::ShapeMismatch(format!("equation in {} variables, {} unknowns", e.nvars, unknowns.len())));
        }
        Ok(PolySystem { unknowns, field, eqs })
    }

    /// Unknowns named `x0, x1, ...`.
    pub fn anonymous(field: PrimeField, nvars: usize, eqs: Vec<SparsePoly<u64>>) -> Result<Self> {
        Self::new(field, (0..nvars).map(|i| format!("x{i}")).collect(), eqs)
    }

    pub fn nvars(&self) -> usize {
        self.unknowns.len()
    }

    pub fn degree(&self) -> usize {
        self.eqs.iter().map(|e| e.degree()).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": self.field.descriptor(),
            "unknowns": self.unknowns,
            "equations": self.eqs.iter().map(|e| e.to_json(&self.field)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |s: &str| Error::InvalidInput(format!("system: {s}"));
        let desc: FieldDescriptor =
            serde_json::from_value(v.get("field").cloned().ok_or_else(|| bad("missing field"))?)
                .map_err(|e| bad(&e.to_string()))?;
        if desc.is_extension() {
            return Err(bad("only prime-field systems are supported"));
        }
        let field = desc.to_prime_field()?;
        let unknowns: Vec<String> = v
            .get("unknowns")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing unknowns"))?
            .iter()
            .map(|u| u.as_str().map(str::to_string).ok_or_else(|| bad("unknown names must be strings")))
            .collect::<Result<_>>()?;
        let eqs = v
            .get("equations")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing equations"))?
            .iter()
            .map(|e| SparsePoly::from_json(&field, e))
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, unknowns, eqs)
    }
}

/// A common root, possibly over an extension `F_{p^t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub field: ExtField,
    pub values: Vec<Vec<u64>>,
}

impl Solution {
    pub fn ext_degree(&self) -> usize {
        self.field.degree()
    }

    /// Exact substitution into every equation.
    pub fn check(&self, sys: &PolySystem) -> bool {
        let k = &self.field;
        sys.eqs.iter().all(|e| {
            let ek = e.map_coeffs(k, |c| k.embed(*c));
            k.is_zero(&ek.eval(k, &self.values))
        })
    }

    pub fn to_json(&self, sys: &PolySystem) -> Value {
        let mut values = Map::new();
        for (name, v) in sys.unknowns.iter().zip(&self.values) {
            let jv = if self.ext_degree() == 1 { json!(v[0]) } else { json!(v) };
            values.insert(name.clone(), jv);
        }
        let field = if self.ext_degree() == 1 { sys.field.descriptor() } else { self.field.descriptor() };
        json!({ "field": field, "ext_degree": self.ext_degree(), "values": values })
    }
}

/// A root of a univariate polynomial and the field containing it.
#[derive(Debug, Clone, PartialEq)]
pub enum Root {
    Base(u64),
    Ext { field: ExtField, root: Vec<u64> },
}

/// Base-field roots; with `allow_extension` and none in the base field, one
/// root in `F_{p^t}` for the smallest degree `t` of an irreducible factor.
pub fn univariate_roots(fp: &PrimeField, poly: &[u64], allow_extension: bool, rng: &mut dyn RngCore) -> Result<Vec<Root>> {
    let a = upoly::trim(fp, poly.to_vec());
    if a.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    let roots = upoly::roots(fp, &a, rng);
    if !roots.is_empty() || !allow_extension || a.len() == 1 {
        let mut r = roots;
        r.sort_unstable();
        return Ok(r.into_iter().map(Root::Base).collect());
    }
    let factors = upoly::irreducible_factors(fp, &a, rng);
    let g = factors.into_iter().min_by_key(|g| (g.len(), g.clone())).expect("nonconstant polynomial has a factor");
    let field = ExtField::new(*fp, g)?;
    let root = field.gen();
    Ok(vec![Root::Ext { field, root }])
}

/// Sylvester-matrix resultant in `var`, with the rows of `a` first.
pub fn resultant<F: Field>(f: &F, a: &SparsePoly<F::Elem>, b: &SparsePoly<F::Elem>, var: usize) -> Result<SparsePoly<F::Elem>> {
    let (da, db) = (a.var_degree(var), b.var_degree(var));
    if (da == 0 || a.is_zero()) && (db == 0 || b.is_zero()) {
        return Err(Error::BothConstantInVar);
    }
    let n = a.nvars;
    let ca = a.coeffs_in(f, var);
    let cb = b.coeffs_in(f, var);
    if ca.is_empty() || cb.is_empty() {
        return Ok(SparsePoly::zero(n));
    }
    let size = da + db;
    let mut m = vec![vec![SparsePoly::zero(n); size]; size];
    for i in 0..db {
        for (j, c) in ca.iter().rev().enumerate() {
            m[i][i + j] = c.clone();
        }
    }
    for i in 0..da {
        for (j, c) in cb.iter().rev().enumerate() {
            m[db + i][i + j] = c.clone();
        }
    }
    Ok(bareiss_det(f, m, n))
}

/// Fraction-free determinant over the polynomial ring.
fn bareiss_det<F: Field>(f: &F, mut m: Vec<Vec<SparsePoly<F::Elem>>>, nvars: usize) -> SparsePoly<F::Elem> {
    let size = m.len();
    if size == 0 {
        return SparsePoly::constant(f, nvars, f.one());
    }
    let mut prev = SparsePoly::constant(f, nvars, f.one());
    let mut negate = false;
    for k in 0..size {
        if m[k][k].is_zero() {
            match (k + 1..size).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    negate = !negate;
                }
                None => return SparsePoly::zero(nvars),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let t = m[i][j].mul(f, &m[k][k]).sub(f, &m[i][k].mul(f, &m[k][j]));
                m[i][j] = t.exact_div(f, &prev).expect("Bareiss division is exact");
            }
            m[i][k] = SparsePoly::zero(nvars);
        }
        prev = m[k][k].clone();
    }
    let det = m[size - 1][size - 1].clone();
    if negate {
        det.scale(f, &f.neg(&f.one()))
    } else {
        det
    }
}

/// All solutions with coordinates in the field itself, by enumeration.
pub fn brute_force_solve<F: Field>(f: &F, eqs: &[SparsePoly<F::Elem>], n: usize) -> Result<Vec<Vec<F::Elem>>> {
    let q = f.order_u128();
    let total = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(q)).unwrap_or(u128::MAX);
    if total > 10_000_000 {
        return Err(Error::ScaleExceeded(format!("{total} points to enumerate")));
    }
    Ok(enumerate(f, n)
        .filter(|x| eqs.iter().all(|e| f.is_zero(&e.eval(f, x))))
        .collect())
}

fn enumerate<F: Field>(f: &F, n: usize) -> impl Iterator<Item = Vec<F::Elem>> + '_ {
    let q = f.order_u128() as u64;
    let total = q.pow(n as u32);
    (0..total).map(move |mut idx| {
        let mut x = Vec::with_capacity(n);
        for _ in 0..n {
            x.push(f.nth_element(idx % q));
            idx /= q;
        }
        x
    })
}

pub fn brute_force(sys: &PolySystem) -> Result<Vec<Vec<u64>>> {
    brute_force_solve(&sys.field, &sys.eqs, sys.nvars())
}

struct Found<E> {
    points: Vec<Vec<E>>,
    /// Every solution rational over the working field was examined.
    complete: bool,
    /// Inconsistency proven: a resultant reduced to a nonzero constant.
    certified_empty: bool,
}

impl<E> Found<E> {
    fn empty(complete: bool, certified_empty: bool) -> Self {
        Found { points: Vec::new(), complete, certified_empty }
    }
}

/// `None` when some equation is a nonzero constant.
fn clean<F: Field>(eqs: Vec<SparsePoly<F::Elem>>) -> Option<Vec<SparsePoly<F::Elem>>> {
    let mut out: Vec<SparsePoly<F::Elem>> = Vec::new();
    for e in eqs {
        if e.is_zero() {
            continue;
        }
        if e.is_constant() {
            return None;
        }
        if !out.contains(&e) {
            out.push(e);
        }
    }
    Some(out)
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Keep a linearly independent subset once `m` exceeds `C(n + d, d)`.
fn cap_redundancy<F: Field>(f: &F, eqs: Vec<SparsePoly<F::Elem>>, n: usize) -> Vec<SparsePoly<F::Elem>> {
    let d = eqs.iter().map(|e| e.degree()).max().unwrap_or(0);
    if (eqs.len() as u128) <= binomial(n + d, d) {
        return eqs;
    }
    let mut monos: Vec<Vec<u32>> = eqs.iter().flat_map(|e| e.terms.keys().cloned()).collect();
    monos.sort();
    monos.dedup();
    let rows: Vec<Vec<F::Elem>> = eqs.iter().map(|e| monos.iter().map(|m| e.coeff(f, m)).collect()).collect();
    let keep = linalg::independent_rows(f, &Matrix::from_rows(rows).expect("rectangular"));
    keep.into_iter().map(|i| eqs[i].clone()).collect()
}

/// Points of `F^k`: all of them when few enough, else random samples.
fn coordinate_points<F: Field>(f: &F, k: usize, rng: &mut dyn RngCore) -> (Vec<Vec<F::Elem>>, bool) {
    let q = f.order_u128();
    let total = (0..k).try_fold(1u128, |acc, _| acc.checked_mul(q)).unwrap_or(u128::MAX);
    if total <= ENUM_CAP {
        (enumerate(f, k).collect(), true)
    } else {
        ((0..RANDOM_FIBERS).map(|_| f.random_vec(k, rng)).collect(), false)
    }
}

fn to_upoly<F: Field>(f: &F, p: &SparsePoly<F::Elem>, var: usize) -> UPoly<F> {
    let mut out = vec![f.zero(); p.var_degree(var) + 1];
    for (m, c) in &p.terms {
        out[m[var] as usize] = f.add(&out[m[var] as usize], c);
    }
    upoly::trim(f, out)
}

/// Values of `x_var` completing `rest` (which holds placeholders at `var`).
fn fiber<F: Field>(
    f: &F,
    eqs: &[SparsePoly<F::Elem>],
    var: usize,
    rest: &[F::Elem],
    rng: &mut dyn RngCore,
) -> (Vec<F::Elem>, bool) {
    let fixed: Vec<(usize, F::Elem)> =
        (0..rest.len()).filter(|&i| i != var).map(|i| (i, rest[i].clone())).collect();
    let mut g: UPoly<F> = Vec::new();
    for e in eqs {
        let u = to_upoly(f, &e.restrict(f, &fixed), var);
        g = upoly::gcd(f, &g, &u);
        if g.len() == 1 {
            return (Vec::new(), true);
        }
    }
    if g.is_empty() {
        let (pts, complete) = coordinate_points(f, 1, rng);
        return (pts.into_iter().map(|mut p| p.pop().unwrap()).collect(), complete);
    }
    (upoly::roots(f, &g, rng), true)
}

/// Shift `x_i -> x_i + a_i x_0` until `eq` is monic in `x_0`.
fn monicize<F: Field>(
    f: &F,
    eq: &SparsePoly<F::Elem>,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<(Vec<F::Elem>, F::Elem)> {
    let top = eq.homogeneous_part(f, eq.degree());
    let mut a = vec![f.zero(); n];
    for attempt in 0..=SHIFT_TRIES {
        if attempt > 0 {
            for ai in a.iter_mut().skip(1) {
                *ai = f.random(rng);
            }
        }
        let mut x = a.clone();
        x[0] = f.one();
        let lc = top.eval(f, &x);
        if !f.is_zero(&lc) {
            return Ok((a, lc));
        }
    }
    Err(Error::RandomShiftExhausted)
}

fn shift_forms<F: Field>(f: &F, a: &[F::Elem]) -> Vec<LinearForm<F::Elem>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            let mut l = LinearForm::var(f, n, i);
            if i > 0 {
                l.coeffs[0] = a[i].clone();
            }
            l
        })
        .collect()
}

/// All solutions rational over `f` (up to `limit`), by recursive elimination.
fn rational<F: Field>(
    f: &F,
    eqs: Vec<SparsePoly<F::Elem>>,
    n: usize,
    limit: usize,
    rng: &mut dyn RngCore,
) -> Result<Found<F::Elem>> {
    let Some(eqs) = clean::<F>(eqs) else {
        return Ok(Found::empty(true, true));
    };
    if eqs.is_empty() {
        let (mut pts, complete) = coordinate_points(f, n, rng);
        pts.truncate(limit);
        return Ok(Found { points: pts, complete, certified_empty: false });
    }
    if n == 1 {
        let g = eqs.iter().fold(Vec::new(), |g, e| upoly::gcd(f, &g, &to_upoly(f, e, 0)));
        let mut roots = upoly::roots(f, &g, rng);
        roots.truncate(limit);
        let certified = g.len() == 1;
        return Ok(Found { points: roots.into_iter().map(|r| vec![r]).collect(), complete: true, certified_empty: certified });
    }
    let eqs = cap_redundancy(f, eqs, n);
    if eqs.len() == 1 {
        // one equation: search the fibres over the other coordinates
        let var = eqs[0].vars()[0];
        let (cands, mut complete) = coordinate_points(f, n - 1, rng);
        let mut points = Vec::new();
        for c in cands {
            let mut x = c;
            x.insert(var, f.zero());
            let (roots, fc) = fiber(f, &eqs, var, &x, rng);
            complete &= fc;
            for r in roots {
                x[var] = r;
                points.push(x.clone());
                if points.len() >= limit {
                    return Ok(Found { points, complete: false, certified_empty: false });
                }
            }
        }
        return Ok(Found { points, complete, certified_empty: false });
    }
    // eliminate x_0 against the equation of least positive degree
    let pivot = (0..eqs.len()).min_by_key(|&i| eqs[i].degree()).unwrap();
    let (a, lc) = monicize(f, &eqs[pivot], n, rng)?;
    let forms = shift_forms(f, &a);
    let shifted: Vec<SparsePoly<F::Elem>> = eqs.iter().map(|e| e.compose_affine(f, &forms, n)).collect();
    let f1 = shifted[pivot].scale(f, &f.inv(&lc)?);
    let others: Vec<&SparsePoly<F::Elem>> = (0..shifted.len()).filter(|&i| i != pivot).map(|i| &shifted[i]).collect();
    let dmax = eqs.iter().map(|e| e.degree()).max().unwrap_or(0);
    if f1.degree() * dmax > 4096 {
        return Err(Error::ScaleExceeded(format!("resultant degree {} too large", f1.degree() * dmax)));
    }
    let samples = if others.len() == 1 { 1 } else { others.len().min(n + 1) };
    let drop0: Vec<usize> = (0..n).map(|i| i.saturating_sub(1)).collect();
    let mut reduced = Vec::with_capacity(samples);
    for s in 0..samples {
        let g = others.iter().fold(SparsePoly::zero(n), |acc, o| {
            let u = if others.len() == 1 && s == 0 { f.one() } else { f.random(rng) };
            acc.add(f, &o.scale(f, &u))
        });
        let h = if g.var_degree(0) == 0 { g } else { resultant(f, &f1, &g, 0)? };
        debug_assert!(h.degree() <= 2 * dmax * dmax);
        if !h.is_zero() && h.is_constant() {
            return Ok(Found::empty(true, true));
        }
        reduced.push(h.remap(n - 1, &drop0));
    }
    let sub = if reduced.iter().all(|h| h.is_zero()) {
        let (pts, complete) = coordinate_points(f, n - 1, rng);
        Found { points: pts, complete, certified_empty: false }
    } else {
        rational(f, reduced, n - 1, usize::MAX, rng)?
    };
    if sub.certified_empty {
        return Ok(sub);
    }
    let mut complete = sub.complete;
    let mut points = Vec::new();
    for c in sub.points {
        let mut y = c;
        y.insert(0, f.zero());
        let (roots, fc) = fiber(f, &shifted, 0, &y, rng);
        complete &= fc;
        for r in roots {
            y[0] = r.clone();
            let x: Vec<F::Elem> = (0..n).map(|i| if i == 0 { r.clone() } else { f.add(&y[i], &f.mul(&a[i], &r)) }).collect();
            points.push(x);
            if points.len() >= limit {
                return Ok(Found { points, complete: false, certified_empty: false });
            }
        }
    }
    Ok(Found { points, complete, certified_empty: false })
}

/// Solve `f_1 = ... = f_m = 0`. Without `allow_extension` the answer is a
/// base-field point or `NoSolution`; otherwise extensions `F_{p^s}` are tried
/// in increasing degree.
pub fn solve_system(sys: &PolySystem, allow_extension: bool, rng: &mut dyn RngCore) -> Result<Solution> {
    let n = sys.nvars();
    if n > 12 || sys.degree() > 64 {
        return Err(Error::ScaleExceeded(format!("{n} unknowns of degree {}", sys.degree())));
    }
    let fp = sys.field;
    let base = ExtField::with_degree(fp, 1)?;
    if n == 0 {
        return match clean::<PrimeField>(sys.eqs.clone()) {
            Some(_) => Ok(Solution { field: base, values: Vec::new() }),
            None => Err(Error::NoSolution),
        };
    }
    let found = rational(&fp, sys.eqs.clone(), n, 1, rng)?;
    if let Some(p) = found.points.first() {
        return Ok(Solution { values: p.iter().map(|&v| base.embed(v)).collect(), field: base });
    }
    if found.certified_empty || (found.complete && !allow_extension) {
        return Err(Error::NoSolution);
    }
    if !allow_extension {
        return Err(Error::SearchExhausted("no base-field solution found among sampled fibres".into()));
    }
    for s in 2..=MAX_EXT_DEGREE {
        let k = ExtField::with_degree(fp, s)?;
        let eqs: Vec<SparsePoly<Vec<u64>>> = sys.eqs.iter().map(|e| e.map_coeffs(&k, |c| k.embed(*c))).collect();
        let found = rational(&k, eqs, n, 1, rng)?;
        if let Some(p) = found.points.into_iter().next() {
            return Ok(Solution { field: k, values: p });
        }
        if found.certified_empty {
            return Err(Error::NoSolution);
        }
    }
    Err(Error::SearchExhausted(format!("no solution over extensions of degree <= {MAX_EXT_DEGREE}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(f: &PrimeField, n: usize, terms: &[(&[u32], i64)]) -> SparsePoly<u64> {
        SparsePoly::from_terms(f, n, terms.iter().map(|(m, c)| (m.to_vec(), f.from_i64(*c))).collect())
    }

    #[test]
    fn resultant_conventions() {
        let f = PrimeField::new(101).unwrap();
        // Res_x(x - a, x - b) = a - b, with a = y, b = 2
        let a = p(&f, 2, &[(&[1, 0], 1), (&[0, 1], -1)]);
        let b = p(&f, 2, &[(&[1, 0], 1), (&[0, 0], -2)]);
        assert_eq!(resultant(&f, &a, &b, 0).unwrap(), p(&f, 2, &[(&[0, 1], 1), (&[0, 0], -2)]));
        let c = p(&f, 2, &[(&[0, 0], 5)]);
        let sq = p(&f, 2, &[(&[2, 0], 1), (&[0, 0], 1)]);
        assert_eq!(resultant(&f, &sq, &c, 0).unwrap(), p(&f, 2, &[(&[0, 0], 25)]));
        // common factor (x - 3)
        let g1 = p(&f, 1, &[(&[2], 1), (&[1], -4), (&[0], 3)]);
        let g2 = p(&f, 1, &[(&[1], 1), (&[0], -3)]);
        assert!(resultant(&f, &g1, &g2, 0).unwrap().is_zero());
        assert_eq!(resultant(&f, &c, &c, 0), Err(Error::BothConstantInVar));
    }

    #[test]
    fn univariate_root_fields() {
        let f = PrimeField::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(univariate_roots(&f, &[6, 0, 1], false, &mut rng).unwrap(), vec![Root::Base(1), Root::Base(6)]);
        match &univariate_roots(&f, &[1, 0, 1], true, &mut rng).unwrap()[0] {
            Root::Ext { field, root } => {
                assert_eq!(field.degree(), 2);
                assert_eq!(field.mul(root, root), field.embed(6));
            }
            r => panic!("expected an extension root, got {r:?}"),
        }
        assert_eq!(univariate_roots(&f, &[0, 1], false, &mut rng).unwrap(), vec![Root::Base(0)]);
        assert_eq!(univariate_roots(&f, &[], false, &mut rng), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn small_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = PrimeField::new(101).unwrap();
        let sys = PolySystem::anonymous(
            f,
            2,
            vec![p(&f, 2, &[(&[1, 0], 1), (&[0, 1], 1), (&[0, 0], -3)]), p(&f, 2, &[(&[1, 1], 1), (&[0, 0], -2)])],
        )
        .unwrap();
        let s = solve_system(&sys, false, &mut rng).unwrap();
        assert!(s.check(&sys));
        let mut v = vec![s.values[0][0], s.values[1][0]];
        v.sort();
        assert_eq!(v, vec![1, 2]);

        let f7 = PrimeField::new(7).unwrap();
        let inconsistent =
            PolySystem::anonymous(f7, 1, vec![p(&f7, 1, &[(&[2], 1), (&[0], 1)]), p(&f7, 1, &[(&[1], 1), (&[0], 1)])]).unwrap();
        assert_eq!(solve_system(&inconsistent, true, &mut rng), Err(Error::NoSolution));
        let ext = PolySystem::anonymous(f7, 1, vec![p(&f7, 1, &[(&[2], 1), (&[0], 1)])]).unwrap();
        assert_eq!(solve_system(&ext, false, &mut rng), Err(Error::NoSolution));
        let s = solve_system(&ext, true, &mut rng).unwrap();
        assert_eq!(s.ext_degree(), 2);
        assert!(s.check(&ext));
    }

    #[test]
    fn brute_force_examples() {
        let f5 = PrimeField::new(5).unwrap();
        let sys = PolySystem::anonymous(f5, 1, vec![p(&f5, 1, &[(&[2], 1), (&[0], -1)])]).unwrap();
        assert_eq!(brute_force(&sys).unwrap(), vec![vec![1], vec![4]]);
        let f3 = PrimeField::new(3).unwrap();
        assert_eq!(brute_force(&PolySystem::anonymous(f3, 1, vec![]).unwrap()).unwrap().len(), 3);
        let one = PolySystem::anonymous(f3, 1, vec![p(&f3, 1, &[(&[0], 1)])]).unwrap();
        assert!(brute_force(&one).unwrap().is_empty());
    }
}
