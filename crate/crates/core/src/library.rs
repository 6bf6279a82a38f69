//! Standard Delzant polytopes in 2π-units, all prequantized (integral vertices).

use crate::delzant::{validate_delzant, DelzantPolytope};
use crate::linalg::IntegerMatrix;
use crate::polytope::HPolytope;
use crate::scalar::{int, ExactField};

#[derive(Clone, Debug)]
pub struct Named<R> {
    pub name: &'static str,
    pub polytope: DelzantPolytope<R>,
}

fn build<R: ExactField>(dim: usize, data: &[(&[i64], i64)]) -> DelzantPolytope<R> {
    let data: Vec<(&[i64], R)> = data.iter().map(|&(n, o)| (n, int(o))).collect();
    let p = HPolytope::from_i64(dim, &data).expect("library polytope is well formed");
    validate_delzant(&p).expect("library polytope is Delzant")
}

/// `[0, 1]`: the sphere with area 2π.
pub fn cp1<R: ExactField>() -> DelzantPolytope<R> {
    build(1, &[(&[1], 0), (&[-1], 1)])
}

/// The standard simplex.
pub fn cp2<R: ExactField>() -> DelzantPolytope<R> {
    build(2, &[(&[1, 0], 0), (&[0, 1], 0), (&[-1, -1], 1)])
}

/// `[0, 1]^2`, i.e. CP¹ × CP¹.
pub fn square<R: ExactField>() -> DelzantPolytope<R> {
    build(2, &[(&[1, 0], 0), (&[0, 1], 0), (&[-1, 0], 1), (&[0, -1], 1)])
}

/// Hirzebruch trapezoid with vertices `(0,0), (a+1,0), (1,1), (0,1)`.
pub fn hirzebruch<R: ExactField>(a: i64) -> DelzantPolytope<R> {
    build(2, &[(&[0, 1], 0), (&[1, 0], 0), (&[0, -1], 1), (&[-1, -a], a + 1)])
}

/// Simplex `{x >= 0, sum x <= size}` in dimension `n`.
pub fn simplex<R: ExactField>(n: usize, size: i64) -> DelzantPolytope<R> {
    let mut rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    rows.push(vec![-1; n]);
    let data: Vec<(&[i64], i64)> =
        rows.iter().enumerate().map(|(i, r)| (r.as_slice(), if i < n { 0 } else { size })).collect();
    build(n, &data)
}

/// `[0, side]^n`.
pub fn cube<R: ExactField>(n: usize, side: i64) -> DelzantPolytope<R> {
    let mut rows = Vec::new();
    for i in 0..n {
        rows.push(((0..n).map(|j| i64::from(i == j)).collect::<Vec<_>>(), 0));
    }
    for i in 0..n {
        rows.push(((0..n).map(|j| -i64::from(i == j)).collect(), side));
    }
    let data: Vec<(&[i64], i64)> = rows.iter().map(|(r, o)| (r.as_slice(), *o)).collect();
    build(n, &data)
}

/// CP¹, CP², CP¹×CP¹, and the Hirzebruch surfaces H₁, H₂.
pub fn all<R: ExactField>() -> Vec<Named<R>> {
    vec![
        Named { name: "CP1", polytope: cp1() },
        Named { name: "CP2", polytope: cp2() },
        Named { name: "CP1xCP1", polytope: square() },
        Named { name: "H1", polytope: hirzebruch(1) },
        Named { name: "H2", polytope: hirzebruch(2) },
    ]
}

/// Planar seeds used by randomized tests.
pub fn planar_seeds<R: ExactField>() -> Vec<DelzantPolytope<R>> {
    vec![cp2(), square(), hirzebruch(1), hirzebruch(2), simplex(2, 2)]
}

/// Product of elementary shears `I + c E_ij` (entries with `i == j` are skipped).
pub fn shear_product(n: usize, ops: &[(usize, usize, i64)]) -> IntegerMatrix {
    let mut m = IntegerMatrix::identity(n);
    for &(i, j, c) in ops {
        if i == j || c == 0 {
            continue;
        }
        let mut e = IntegerMatrix::identity(n);
        e[(i, j)] = c.into();
        m = e.mul(&m).expect("square");
    }
    m
}
