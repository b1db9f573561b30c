use crate::error::{Error, Result};
use crate::field::Field;

/// Dense row-major matrix over a field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<E> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn filled(rows: usize, cols: usize, v: E) -> Self {
        Matrix { rows, cols, data: vec![v; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: E) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<E> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix { rows: self.cols, cols: self.rows, data }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let rows = idx.iter().map(|&i| self.row(i).to_vec()).collect();
        Matrix::from_rows(rows).unwrap_or(Matrix { rows: 0, cols: self.cols, data: Vec::new() })
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for i in 0..self.rows {
            for &j in idx {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix { rows: self.rows, cols: idx.len(), data }
    }
}

pub fn zeros<F: Field>(f: &F, rows: usize, cols: usize) -> Matrix<F::Elem> {
    Matrix::filled(rows, cols, f.zero())
}

pub fn identity<F: Field>(f: &F, n: usize) -> Matrix<F::Elem> {
    let mut m = zeros(f, n, n);
    for i in 0..n {
        m.set(i, i, f.one());
    }
    m
}

pub fn mat_mul<F: Field>(f: &F, a: &Matrix<F::Elem>, b: &Matrix<F::Elem>) -> Result<Matrix<F::Elem>> {
    if a.cols != b.rows {
        return Err(Error::ShapeMismatch(format!("{}x{} * {}x{}", a.rows, a.cols, b.rows, b.cols)));
    }
    let mut out = zeros(f, a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = a.get(i, k);
            if f.is_zero(x) {
                continue;
            }
            for j in 0..b.cols {
                let v = f.add(out.get(i, j), &f.mul(x, b.get(k, j)));
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}

pub fn mat_vec<F: Field>(f: &F, a: &Matrix<F::Elem>, v: &[F::Elem]) -> Vec<F::Elem> {
    (0..a.rows).map(|i| f.dot(a.row(i), v)).collect()
}

/// `v^T A`.
pub fn vec_mat<F: Field>(f: &F, v: &[F::Elem], a: &Matrix<F::Elem>) -> Vec<F::Elem> {
    let mut out = vec![f.zero(); a.cols];
    for (i, vi) in v.iter().enumerate() {
        if f.is_zero(vi) {
            continue;
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o = f.add(o, &f.mul(vi, a.get(i, j)));
        }
    }
    out
}

pub fn mat_add<F: Field>(f: &F, a: &Matrix<F::Elem>, b: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    let data = a.data.iter().zip(&b.data).map(|(x, y)| f.add(x, y)).collect();
    Matrix { rows: a.rows, cols: a.cols, data }
}

pub fn mat_scale<F: Field>(f: &F, a: &Matrix<F::Elem>, c: &F::Elem) -> Matrix<F::Elem> {
    let data = a.data.iter().map(|x| f.mul(x, c)).collect();
    Matrix { rows: a.rows, cols: a.cols, data }
}

/// In-place reduced row echelon form; returns the pivot columns.
pub fn rref<F: Field>(f: &F, m: &mut Matrix<F::Elem>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !f.is_zero(m.get(i, c))) else {
            continue;
        };
        m.swap_rows(r, p);
        let inv = f.inv(m.get(r, c)).expect("nonzero pivot");
        for j in c..m.cols {
            let v = f.mul(m.get(r, j), &inv);
            m.set(r, j, v);
        }
        for i in 0..m.rows {
            if i == r || f.is_zero(m.get(i, c)) {
                continue;
            }
            let factor = m.get(i, c).clone();
            for j in c..m.cols {
                let v = f.sub(m.get(i, j), &f.mul(&factor, m.get(r, j)));
                m.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(f: &F, m: &Matrix<F::Elem>) -> usize {
    let mut a = m.clone();
    rref(f, &mut a).len()
}

/// Basis of the right kernel `{v : M v = 0}`.
pub fn kernel<F: Field>(f: &F, m: &Matrix<F::Elem>) -> Vec<Vec<F::Elem>> {
    let mut a = m.clone();
    let pivots = rref(f, &mut a);
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..m.cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![f.zero(); m.cols];
        v[free] = f.one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = f.neg(a.get(r, free));
        }
        basis.push(v);
    }
    basis
}

/// Basis of the left kernel `{v : v^T M = 0}`.
pub fn left_kernel<F: Field>(f: &F, m: &Matrix<F::Elem>) -> Vec<Vec<F::Elem>> {
    kernel(f, &m.transpose())
}

/// Some solution of `A x = b`; `NoSolution` if inconsistent.
pub fn solve<F: Field>(f: &F, a: &Matrix<F::Elem>, b: &[F::Elem]) -> Result<Vec<F::Elem>> {
    if b.len() != a.rows {
        return Err(Error::ShapeMismatch(format!("{} rows vs rhs of length {}", a.rows, b.len())));
    }
    let mut aug = zeros(f, a.rows, a.cols + 1);
    for i in 0..a.rows {
        for j in 0..a.cols {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, a.cols, b[i].clone());
    }
    let pivots = rref(f, &mut aug);
    if pivots.last() == Some(&a.cols) {
        return Err(Error::NoSolution);
    }
    let mut x = vec![f.zero(); a.cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = aug.get(r, a.cols).clone();
    }
    Ok(x)
}

/// Unique solution of a square system; `Singular` otherwise.
pub fn solve_square<F: Field>(f: &F, a: &Matrix<F::Elem>, b: &[F::Elem]) -> Result<Vec<F::Elem>> {
    if a.rows != a.cols {
        return Err(Error::ShapeMismatch("matrix is not square".into()));
    }
    let inv = inverse(f, a)?;
    Ok(mat_vec(f, &inv, b))
}

pub fn inverse<F: Field>(f: &F, a: &Matrix<F::Elem>) -> Result<Matrix<F::Elem>> {
    if a.rows != a.cols {
        return Err(Error::ShapeMismatch("matrix is not square".into()));
    }
    let n = a.rows;
    let mut aug = zeros(f, n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, n + i, f.one());
    }
    let pivots = rref(f, &mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return Err(Error::Singular);
    }
    Ok(aug.select_cols(&(n..2 * n).collect::<Vec<_>>()))
}

pub fn det<F: Field>(f: &F, a: &Matrix<F::Elem>) -> Result<F::Elem> {
    if a.rows != a.cols {
        return Err(Error::ShapeMismatch("matrix is not square".into()));
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut acc = f.one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !f.is_zero(m.get(i, c))) else {
            return Ok(f.zero());
        };
        if p != c {
            m.swap_rows(p, c);
            acc = f.neg(&acc);
        }
        let piv = m.get(c, c).clone();
        acc = f.mul(&acc, &piv);
        let inv = f.inv(&piv)?;
        for i in c + 1..n {
            if f.is_zero(m.get(i, c)) {
                continue;
            }
            let factor = f.mul(m.get(i, c), &inv);
            for j in c..n {
                let v = f.sub(m.get(i, j), &f.mul(&factor, m.get(c, j)));
                m.set(i, j, v);
            }
        }
    }
    Ok(acc)
}

/// Indices of a maximal linearly independent subset of rows, chosen greedily in order.
pub fn independent_rows<F: Field>(f: &F, m: &Matrix<F::Elem>) -> Vec<usize> {
    let mut a = m.transpose();
    rref(f, &mut a)
}

/// Characteristic polynomial `det(x I - A)`, low to high, by interpolation.
pub fn charpoly<F: Field>(f: &F, a: &Matrix<F::Elem>) -> Result<Vec<F::Elem>> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::ShapeMismatch("matrix is not square".into()));
    }
    let order = f.order_u128();
    if order <= n as u128 {
        return Err(Error::FieldTooSmall("characteristic polynomial interpolation".into()));
    }
    let mut xs = Vec::with_capacity(n + 1);
    let mut ys = Vec::with_capacity(n + 1);
    for t in 0..=n as u64 {
        let x = f.nth_element(t);
        let mut m = mat_scale(f, a, &f.neg(&f.one()));
        for i in 0..n {
            let v = f.add(m.get(i, i), &x);
            m.set(i, i, v);
        }
        ys.push(det(f, &m)?);
        xs.push(x);
    }
    crate::interp::interpolate_univariate(f, &xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    fn f7() -> PrimeField {
        PrimeField::new(7).unwrap()
    }

    #[test]
    fn rank_of_dependent_rows() {
        let f = f7();
        let m = Matrix::from_rows(vec![vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(rank(&f, &m), 1);
        let k = kernel(&f, &m);
        assert_eq!(k.len(), 1);
        assert_eq!(mat_vec(&f, &m, &k[0]), vec![0, 0]);
    }

    #[test]
    fn inverse_and_det() {
        let f = f7();
        let m = Matrix::from_rows(vec![vec![2, 1], vec![1, 1]]).unwrap();
        let inv = inverse(&f, &m).unwrap();
        assert_eq!(mat_mul(&f, &m, &inv).unwrap(), identity(&f, 2));
        assert_eq!(det(&f, &m).unwrap(), 1);
        let s = Matrix::from_rows(vec![vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(inverse(&f, &s), Err(Error::Singular));
        assert_eq!(det(&f, &s).unwrap(), 0);
    }

    #[test]
    fn inconsistent_system() {
        let f = f7();
        let m = Matrix::from_rows(vec![vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(solve(&f, &m, &[1, 2]), Err(Error::NoSolution));
        assert_eq!(solve(&f, &m, &[1]), Err(Error::ShapeMismatch("2 rows vs rhs of length 1".into())));
    }

    #[test]
    fn charpoly_of_diagonal() {
        let f = f7();
        let m = Matrix::from_rows(vec![vec![2, 0], vec![0, 3]]).unwrap();
        // (x-2)(x-3) = x^2 - 5x + 6
        assert_eq!(charpoly(&f, &m).unwrap(), vec![6, 2, 1]);
    }
}
