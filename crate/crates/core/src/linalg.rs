//! Exact integer and rational linear algebra.

use std::fmt;
use std::ops::{Deref, DerefMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::ExactField;

/// A vector of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerVector(pub Vec<BigInt>);

impl IntegerVector {
    pub fn from_i64(entries: &[i64]) -> Self {
        Self(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![BigInt::zero(); n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = BigInt::one();
        v
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot<R: ExactField>(&self, x: &[R]) -> R {
        self.0
            .iter()
            .zip(x)
            .fold(R::zero(), |acc, (a, b)| acc + R::from_bigint(a) * b.clone())
    }

    pub fn dot_int(&self, other: &[BigInt]) -> BigInt {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        use num_traits::ToPrimitive;
        self.0.iter().map(|x| x.to_i64()).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.0.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn gcd(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
    }
}

impl Deref for IntegerVector {
    type Target = [BigInt];
    fn deref(&self) -> &[BigInt] {
        &self.0
    }
}

impl DerefMut for IntegerVector {
    fn deref_mut(&mut self) -> &mut [BigInt] {
        &mut self.0
    }
}

impl fmt::Display for IntegerVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A vector of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalVector<R>(pub Vec<R>);

impl<R: ExactField> RationalVector<R> {
    pub fn zeros(n: usize) -> Self {
        Self(vec![R::zero(); n])
    }

    pub fn from_integers(v: &IntegerVector) -> Self {
        Self(v.iter().map(R::from_bigint).collect())
    }

    pub fn add(&self, other: &[R]) -> Self {
        Self(self.0.iter().zip(other).map(|(a, b)| a.clone() + b.clone()).collect())
    }

    pub fn sub(&self, other: &[R]) -> Self {
        Self(self.0.iter().zip(other).map(|(a, b)| a.clone() - b.clone()).collect())
    }

    pub fn scale(&self, s: &R) -> Self {
        Self(self.0.iter().map(|a| a.clone() * s.clone()).collect())
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|a| -a.clone()).collect())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(ExactField::is_integral)
    }

    pub fn to_integers(&self) -> Option<IntegerVector> {
        self.is_integral()
            .then(|| IntegerVector(self.0.iter().map(ExactField::numer_big).collect()))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(ExactField::to_f64_lossy).collect()
    }

    pub fn norm_squared(&self) -> R {
        self.0.iter().fold(R::zero(), |acc, x| acc + x.clone() * x.clone())
    }
}

impl<R> Deref for RationalVector<R> {
    type Target = [R];
    fn deref(&self) -> &[R] {
        &self.0
    }
}

impl<R> DerefMut for RationalVector<R> {
    fn deref_mut(&mut self) -> &mut [R] {
        &mut self.0
    }
}

impl<R: ExactField> fmt::Display for RationalVector<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", crate::scalar::format_exact(x))?;
        }
        write!(f, ")")
    }
}

/// Divide `v` by the gcd of its entries.
pub fn primitive_part(v: &IntegerVector) -> Result<IntegerVector> {
    let g = v.gcd();
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(IntegerVector(v.iter().map(|x| x / &g).collect()))
}

/// Row-major matrix of arbitrary-precision integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged rows");
                r.iter().map(|&x| BigInt::from(x))
            })
            .collect();
        Self { rows: rows.len(), cols, data }
    }

    pub fn from_rows(rows: &[IntegerVector]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows.iter().flat_map(|r| r.iter().cloned()).collect();
        Self { rows: rows.len(), cols, data }
    }

    pub fn from_columns(cols: &[IntegerVector], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn row(&self, i: usize) -> IntegerVector {
        IntegerVector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn column(&self, j: usize) -> IntegerVector {
        IntegerVector((0..self.rows).map(|i| self[(i, j)].clone()).collect())
    }

    pub fn row_vectors(&self) -> Vec<IntegerVector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn column_vectors(&self) -> Vec<IntegerVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { left: self.cols, right: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                out[(i, j)] = (0..self.cols).map(|l| &self[(i, l)] * &other[(l, j)]).sum();
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> IntegerVector {
        IntegerVector((0..self.rows).map(|i| self.row(i).dot_int(v)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i).0).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    pub fn is_unimodular(&self) -> Result<bool> {
        Ok(self.determinant()?.abs().is_one())
    }

    /// Inverse of a unimodular matrix, via the adjugate.
    pub fn unimodular_inverse(&self) -> Result<Self> {
        let det = self.determinant()?;
        if !det.abs().is_one() {
            return Err(Error::NotUnimodular { det: det.to_string() });
        }
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let minor = self.minor(j, i).determinant()?;
                let cof = if (i + j) % 2 == 0 { minor } else { -minor };
                inv[(i, j)] = cof * &det;
            }
        }
        Ok(inv)
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        let data = (0..self.rows)
            .filter(|&i| i != skip_row)
            .flat_map(|i| {
                (0..self.cols).filter(move |&j| j != skip_col).map(move |j| self[(i, j)].clone())
            })
            .collect();
        Self { rows: self.rows - 1, cols: self.cols - 1, data }
    }

    pub fn rank(&self) -> usize {
        let (h, _) = hermite_normal_form(self);
        (0..h.rows).filter(|&i| !h.row(i).is_zero()).count()
    }
}

impl std::ops::Index<(usize, usize)> for IntegerMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntegerMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", self.row(i))?;
        }
        write!(f, "]")
    }
}

fn row_axpy(rows: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let src = rows[source].clone();
    for (t, s) in rows[target].iter_mut().zip(&src) {
        *t -= q * s;
    }
}

/// Row-style Hermite normal form: returns `(H, U)` with `U` unimodular and
/// `U * A = H`. Pivots are positive and entries above each pivot lie in
/// `[0, pivot)`. Zero rows sink to the bottom.
pub fn hermite_normal_form(a: &IntegerMatrix) -> (IntegerMatrix, IntegerMatrix) {
    let (m, n) = (a.rows, a.cols);
    let mut h: Vec<Vec<BigInt>> = (0..m).map(|i| a.row(i).0).collect();
    let mut u: Vec<Vec<BigInt>> = (0..m).map(|i| IntegerVector::unit(m, i).0).collect();
    let mut pivot_row = 0;
    for col in 0..n {
        if pivot_row == m {
            break;
        }
        loop {
            let best = (pivot_row..m)
                .filter(|&i| !h[i][col].is_zero())
                .min_by(|&x, &y| h[x][col].abs().cmp(&h[y][col].abs()));
            let Some(best) = best else { break };
            h.swap(pivot_row, best);
            u.swap(pivot_row, best);
            let mut done = true;
            for i in pivot_row + 1..m {
                if h[i][col].is_zero() {
                    continue;
                }
                let q = h[i][col].div_floor(&h[pivot_row][col]);
                row_axpy(&mut h, i, pivot_row, &q);
                row_axpy(&mut u, i, pivot_row, &q);
                if !h[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[pivot_row][col].is_zero() {
            continue;
        }
        if h[pivot_row][col].is_negative() {
            for x in h[pivot_row].iter_mut().chain(u[pivot_row].iter_mut()) {
                *x = -x.clone();
            }
        }
        for i in 0..pivot_row {
            let q = h[i][col].div_floor(&h[pivot_row][col]);
            row_axpy(&mut h, i, pivot_row, &q);
            row_axpy(&mut u, i, pivot_row, &q);
        }
        pivot_row += 1;
    }
    let h = IntegerMatrix { rows: m, cols: n, data: h.into_iter().flatten().collect() };
    let u = IntegerMatrix { rows: m, cols: m, data: u.into_iter().flatten().collect() };
    (h, u)
}

/// Z-basis of `{x in Z^cols : M x = 0}`, one basis vector per column.
///
/// The basis is put in Hermite normal form so the output is canonical.
pub fn integer_kernel_basis(m: &IntegerMatrix) -> IntegerMatrix {
    let (h, u) = hermite_normal_form(&m.transpose());
    let kernel_rows: Vec<IntegerVector> =
        (0..h.rows).filter(|&i| h.row(i).is_zero()).map(|i| u.row(i)).collect();
    if kernel_rows.is_empty() {
        return IntegerMatrix::zeros(m.cols, 0);
    }
    let (reduced, _) = hermite_normal_form(&IntegerMatrix::from_rows(&kernel_rows));
    reduced.transpose()
}

/// Nonzero invariant factors of the Smith normal form, in divisibility order.
pub fn smith_invariants(m: &IntegerMatrix) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = (0..m.rows).map(|i| m.row(i).0).collect();
    let (rows, cols) = (m.rows, m.cols);
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !a[i][j].is_zero())
            .min_by(|&(i, j), &(k, l)| a[i][j].abs().cmp(&a[k][l].abs()));
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            let q = a[i][t].div_floor(&a[t][t]);
            row_axpy(&mut a, i, t, &q);
            clean &= a[i][t].is_zero();
        }
        for j in t + 1..cols {
            let q = a[t][j].div_floor(&a[t][t]);
            if !q.is_zero() {
                for row in a.iter_mut() {
                    let v = &row[t] * &q;
                    row[j] -= v;
                }
            }
            clean &= a[t][j].is_zero();
        }
        if !clean {
            continue;
        }
        let offender = (t + 1..rows)
            .find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
        if let Some(i) = offender {
            let r = a[i].clone();
            for (x, y) in a[t].iter_mut().zip(&r) {
                *x += y;
            }
            continue;
        }
        out.push(a[t][t].abs());
        t += 1;
    }
    out
}

/// Solve the square system `A x = b` exactly; `None` when singular.
pub fn solve_exact<R: ExactField>(a: &[Vec<R>], b: &[R]) -> Option<Vec<R>> {
    let n = a.len();
    let mut m: Vec<Vec<R>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, p);
        let inv = R::one() / m[col][col].clone();
        for x in m[col].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..n {
            if i != col && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                let pivot_row = m[col].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

/// Rank of a set of rational vectors.
pub fn rank_exact<R: ExactField>(vectors: &[Vec<R>]) -> usize {
    let mut m: Vec<Vec<R>> = vectors.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            if !m[i][col].is_zero() {
                let f = m[i][col].clone() / m[rank][col].clone();
                let pivot_row = m[rank].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Integer generator of the line orthogonal to `n - 1` vectors in `Z^n`
/// (signed maximal minors). Zero when the vectors are dependent.
pub fn orthogonal_complement_line(vectors: &[IntegerVector], n: usize) -> IntegerVector {
    debug_assert_eq!(vectors.len() + 1, n);
    let m = IntegerMatrix::from_rows(vectors);
    IntegerVector(
        (0..n)
            .map(|j| {
                let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
                let data = (0..n - 1)
                    .flat_map(|i| cols.iter().map(move |&c| (i, c)))
                    .map(|idx| m[idx].clone())
                    .collect();
                let det = IntegerMatrix { rows: n - 1, cols: n - 1, data }
                    .determinant()
                    .expect("square minor");
                if j % 2 == 0 {
                    det
                } else {
                    -det
                }
            })
            .collect(),
    )
}
