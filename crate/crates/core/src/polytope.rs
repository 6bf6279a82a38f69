//! H-represented rational polytopes: vertices, lattice points, volume.
//!
//! Coordinates follow the crate-wide convention: a stored value `x` stands
//! for the absolute quantity `2*pi*x`.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg::{orthogonal_complement_line, rank_exact, solve_exact, IntegerVector, RationalVector};
use crate::scalar::ExactField;

/// `<normal, x> + offset >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Halfspace<R> {
    pub normal: IntegerVector,
    pub offset: R,
}

impl<R: ExactField> Halfspace<R> {
    pub fn new(normal: IntegerVector, offset: R) -> Self {
        Self { normal, offset }
    }

    pub fn evaluate(&self, x: &[R]) -> R {
        self.normal.dot(x) + self.offset.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HPolytope<R> {
    dim: usize,
    halfspaces: Vec<Halfspace<R>>,
}

/// A vertex with the indices of the halfspaces tight at it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex<R> {
    pub point: RationalVector<R>,
    pub facets: Vec<usize>,
}

impl<R: ExactField> HPolytope<R> {
    /// Rejects dimension mismatches, zero normals and duplicate halfspaces.
    /// Boundedness and full-dimensionality are checked by
    /// [`HPolytope::vertex_enumeration`].
    pub fn new(dim: usize, halfspaces: Vec<Halfspace<R>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        for h in &halfspaces {
            if h.normal.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: h.normal.len() });
            }
            if h.normal.is_zero() {
                return Err(Error::ZeroVector);
            }
        }
        for (i, j) in (0..halfspaces.len()).tuple_combinations() {
            if halfspaces[i] == halfspaces[j] {
                return Err(Error::InvalidInput(format!("halfspaces {i} and {j} coincide")));
            }
        }
        Ok(Self { dim, halfspaces })
    }

    pub fn from_i64(dim: usize, data: &[(&[i64], R)]) -> Result<Self> {
        Self::new(
            dim,
            data.iter()
                .map(|(n, o)| Halfspace::new(IntegerVector::from_i64(n), o.clone()))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace<R>] {
        &self.halfspaces
    }

    pub fn contains(&self, x: &[R]) -> bool {
        self.halfspaces.iter().all(|h| !h.evaluate(x).is_negative())
    }

    /// Translate by `t`: returns `{x + t : x in P}`.
    pub fn translate(&self, t: &[R]) -> Self {
        let halfspaces = self
            .halfspaces
            .iter()
            .map(|h| Halfspace::new(h.normal.clone(), h.offset.clone() - h.normal.dot(t)))
            .collect();
        Self { dim: self.dim, halfspaces }
    }

    /// True when the recession cone `{d : <X_f, d> >= 0 for all f}` is `{0}`.
    pub fn is_bounded(&self) -> bool {
        let n = self.dim;
        let normals: Vec<Vec<R>> = self
            .halfspaces
            .iter()
            .map(|h| RationalVector::<R>::from_integers(&h.normal).0)
            .collect();
        if rank_exact(&normals) < n {
            return false;
        }
        let in_cone = |d: &IntegerVector| {
            self.halfspaces.iter().all(|h| !h.normal.dot_int(d).is_negative())
        };
        // Extreme rays of a pointed cone sit on n-1 independent tight constraints.
        for subset in (0..self.halfspaces.len()).combinations(n - 1) {
            let rows: Vec<IntegerVector> =
                subset.iter().map(|&i| self.halfspaces[i].normal.clone()).collect();
            let d = if n == 1 {
                IntegerVector::from_i64(&[1])
            } else {
                orthogonal_complement_line(&rows, n)
            };
            if d.is_zero() {
                continue;
            }
            let neg = IntegerVector(d.iter().map(|x| -x).collect());
            if in_cone(&d) || in_cone(&neg) {
                return false;
            }
        }
        true
    }

    /// All points solving `n` independent tight constraints that satisfy every
    /// halfspace. No simplicity or boundedness assumption; sorted, deduplicated.
    pub fn candidate_vertices(&self) -> Vec<Vertex<R>> {
        let n = self.dim;
        let mut found: BTreeMap<RationalVector<R>, ()> = BTreeMap::new();
        for subset in (0..self.halfspaces.len()).combinations(n) {
            let a: Vec<Vec<R>> = subset
                .iter()
                .map(|&i| RationalVector::<R>::from_integers(&self.halfspaces[i].normal).0)
                .collect();
            let b: Vec<R> = subset.iter().map(|&i| -self.halfspaces[i].offset.clone()).collect();
            let Some(x) = solve_exact(&a, &b) else { continue };
            if self.contains(&x) {
                found.insert(RationalVector(x), ());
            }
        }
        found
            .into_keys()
            .map(|point| {
                let facets = self
                    .halfspaces
                    .iter()
                    .enumerate()
                    .filter(|(_, h)| h.evaluate(&point).is_zero())
                    .map(|(i, _)| i)
                    .collect();
                Vertex { point, facets }
            })
            .collect()
    }

    /// Exact vertices of a bounded, full-dimensional, simple polytope,
    /// sorted lexicographically.
    pub fn vertex_enumeration(&self) -> Result<Vec<Vertex<R>>> {
        if !self.is_bounded() {
            return Err(Error::Unbounded);
        }
        let vertices = self.candidate_vertices();
        if vertices.is_empty() {
            return Err(Error::NotFullDimensional);
        }
        if self.halfspaces.iter().enumerate().any(|(i, _)| vertices.iter().all(|v| v.facets.contains(&i))) {
            return Err(Error::NotFullDimensional);
        }
        if let Some(v) = vertices.iter().find(|v| v.facets.len() > self.dim) {
            return Err(Error::NotSimple { vertex: v.point.to_string(), facets: v.facets.clone() });
        }
        Ok(vertices)
    }

    /// `(o + s Z^n) ∩ P`, sorted lexicographically, boundary included.
    pub fn lattice_points(&self, scale: &R, offset: &[R]) -> Result<Vec<RationalVector<R>>> {
        if !scale.is_positive() {
            return Err(Error::InvalidInput("lattice scale must be positive".into()));
        }
        let vertices = self.vertex_enumeration()?;
        Ok(self.lattice_points_with(&vertices, scale, offset))
    }

    pub(crate) fn lattice_points_with(
        &self,
        vertices: &[Vertex<R>],
        scale: &R,
        offset: &[R],
    ) -> Vec<RationalVector<R>> {
        let n = self.dim;
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for (i, o) in offset.iter().enumerate().take(n) {
            let min = vertices.iter().map(|v| &v.point[i]).min().expect("vertices");
            let max = vertices.iter().map(|v| &v.point[i]).max().expect("vertices");
            lo.push(((min.clone() - o.clone()) / scale.clone()).ceil_big());
            hi.push(((max.clone() - o.clone()) / scale.clone()).floor_big());
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Vec::new();
        }
        // <X, o + s m> + l >= 0  <=>  <X, m> >= ceil(-(<X, o> + l) / s)
        let thresholds: Vec<BigInt> = self
            .halfspaces
            .iter()
            .map(|h| (-(h.evaluate(offset)) / scale.clone()).ceil_big())
            .collect();
        let to_point = |m: &[BigInt]| {
            RationalVector(
                m.iter()
                    .zip(offset)
                    .map(|(mi, oi)| oi.clone() + scale.clone() * R::from_bigint(mi))
                    .collect(),
            )
        };
        if let Some(fast) = SmallScan::new(&self.halfspaces, &thresholds, &lo, &hi) {
            return fast.run().into_iter().map(|m| to_point(&m)).collect();
        }
        let mut out = Vec::new();
        let mut m = lo.clone();
        loop {
            if self
                .halfspaces
                .iter()
                .zip(&thresholds)
                .all(|(h, t)| h.normal.dot_int(&m) >= *t)
            {
                out.push(to_point(&m));
            }
            if !odometer_step(&mut m, &lo, &hi) {
                break;
            }
        }
        out
    }

    /// Exact volume (in 2π-units) by a pulling triangulation over the face
    /// lattice of a simple polytope.
    pub fn volume(&self) -> Result<R> {
        let vertices = self.vertex_enumeration()?;
        Ok(volume_of_simple(self.dim, self.halfspaces.len(), &vertices))
    }
}

pub(crate) fn volume_of_simple<R: ExactField>(n: usize, facet_count: usize, vertices: &[Vertex<R>]) -> R {
    let all: Vec<usize> = (0..vertices.len()).collect();
    let mut simplices = Vec::new();
    pull_triangulate(vertices, facet_count, &[], &all, n, &mut simplices);
    let mut total = R::zero();
    for simplex in &simplices {
        let base = &vertices[simplex[0]].point;
        let rows: Vec<Vec<R>> = simplex[1..]
            .iter()
            .map(|&i| vertices[i].point.sub(base).0)
            .collect();
        total = total + det_exact(rows).abs();
    }
    let factorial = (1..=n as i64).fold(R::one(), |acc, k| acc * R::from_i64(k).expect("small"));
    total / factorial
}

/// Simplices (as vertex index lists) triangulating the face cut out by
/// `tight`, whose vertex indices are `face`, of dimension `dim`.
fn pull_triangulate<R: ExactField>(
    vertices: &[Vertex<R>],
    facet_count: usize,
    tight: &[usize],
    face: &[usize],
    dim: usize,
    out: &mut Vec<Vec<usize>>,
) {
    let apex = face[0];
    if dim == 0 {
        out.push(vec![apex]);
        return;
    }
    for f in 0..facet_count {
        if tight.contains(&f) || vertices[apex].facets.contains(&f) {
            continue;
        }
        let sub: Vec<usize> = face.iter().copied().filter(|&v| vertices[v].facets.contains(&f)).collect();
        if sub.is_empty() {
            continue;
        }
        let mut sub_tight = tight.to_vec();
        sub_tight.push(f);
        let mut pieces = Vec::new();
        pull_triangulate(vertices, facet_count, &sub_tight, &sub, dim - 1, &mut pieces);
        for mut piece in pieces {
            piece.insert(0, apex);
            out.push(piece);
        }
    }
}

pub(crate) fn det_exact<R: ExactField>(mut m: Vec<Vec<R>>) -> R {
    let n = m.len();
    let mut det = R::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&i| !m[i][col].is_zero()) else { return R::zero() };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det = det * pivot.clone();
        for i in col + 1..n {
            if !m[i][col].is_zero() {
                let f = m[i][col].clone() / pivot.clone();
                let pivot_row = m[col].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
    }
    det
}

fn odometer_step(m: &mut [BigInt], lo: &[BigInt], hi: &[BigInt]) -> bool {
    for i in (0..m.len()).rev() {
        if m[i] < hi[i] {
            m[i] += 1;
            return true;
        }
        m[i] = lo[i].clone();
    }
    false
}

/// Machine-integer scan used when every quantity fits in `i64`.
struct SmallScan {
    normals: Vec<Vec<i64>>,
    thresholds: Vec<i128>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl SmallScan {
    fn new<R>(halfspaces: &[Halfspace<R>], thresholds: &[BigInt], lo: &[BigInt], hi: &[BigInt]) -> Option<Self> {
        Some(Self {
            normals: halfspaces.iter().map(|h| h.normal.to_i64()).collect::<Option<_>>()?,
            thresholds: thresholds.iter().map(|t| t.to_i128()).collect::<Option<_>>()?,
            lo: lo.iter().map(|x| x.to_i64()).collect::<Option<_>>()?,
            hi: hi.iter().map(|x| x.to_i64()).collect::<Option<_>>()?,
        })
    }

    fn run(&self) -> Vec<Vec<BigInt>> {
        let mut out = Vec::new();
        let mut m = self.lo.clone();
        loop {
            let inside = self.normals.iter().zip(&self.thresholds).all(|(x, &t)| {
                x.iter().zip(&m).map(|(&a, &b)| a as i128 * b as i128).sum::<i128>() >= t
            });
            if inside {
                out.push(m.iter().map(|&x| BigInt::from(x)).collect());
            }
            let mut i = m.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if m[i] < self.hi[i] {
                    m[i] += 1;
                    break;
                }
                m[i] = self.lo[i];
            }
        }
    }
}

/// Edges of a simple polytope: vertex pairs sharing `n - 1` facets.
pub fn edges<R: ExactField>(dim: usize, vertices: &[Vertex<R>]) -> Vec<(usize, usize)> {
    (0..vertices.len())
        .tuple_combinations()
        .filter(|&(a, b)| {
            let shared = vertices[a].facets.iter().filter(|f| vertices[b].facets.contains(f)).count();
            shared + 1 == dim || (dim == 1 && shared == 0)
        })
        .collect()
}
