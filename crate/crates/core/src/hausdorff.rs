//! Hausdorff distance between finite point sets.

use num_traits::Float;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::RationalVector;
use crate::scalar::ExactField;

/// Static k-d tree for exact nearest-neighbour queries.
pub struct KdTree<'a, F> {
    points: &'a [Vec<F>],
    order: Vec<usize>,
    dim: usize,
}

impl<'a, F: Float + Send + Sync> KdTree<'a, F> {
    pub fn new(points: &'a [Vec<F>]) -> Self {
        let dim = points.first().map_or(0, Vec::len);
        let mut order: Vec<usize> = (0..points.len()).collect();
        build(points, &mut order, 0, dim);
        Self { points, order, dim }
    }

    /// Squared distance to, and index of, the nearest point.
    pub fn nearest(&self, q: &[F]) -> (F, usize) {
        let mut best = (F::infinity(), usize::MAX);
        self.search(q, 0, self.order.len(), 0, &mut best);
        best
    }

    fn search(&self, q: &[F], lo: usize, hi: usize, depth: usize, best: &mut (F, usize)) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.order[mid];
        let p = &self.points[idx];
        let d = squared(p, q);
        if d < best.0 || (d == best.0 && idx < best.1) {
            *best = (d, idx);
        }
        let axis = depth % self.dim;
        let diff = q[axis] - p[axis];
        let (near, far) = if diff < F::zero() { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(q, near.0, near.1, depth + 1, best);
        if diff * diff <= best.0 {
            self.search(q, far.0, far.1, depth + 1, best);
        }
    }
}

fn build<F: Float>(points: &[Vec<F>], order: &mut [usize], depth: usize, dim: usize) {
    if order.len() <= 1 || dim == 0 {
        return;
    }
    let axis = depth % dim;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a][axis]
            .partial_cmp(&points[b][axis])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let (left, right) = order.split_at_mut(mid);
    build(points, left, depth + 1, dim);
    build(points, &mut right[1..], depth + 1, dim);
}

fn squared<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

/// `sup_{a in A} inf_{b in B} |a - b|` with the index of the worst `a`.
pub fn directed_hausdorff<F: Float + Send + Sync>(a: &[Vec<F>], b: &[Vec<F>]) -> Result<(F, usize)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let tree = KdTree::new(b);
    let (d2, idx) = a
        .par_iter()
        .enumerate()
        .map(|(i, p)| (tree.nearest(p).0, i))
        .reduce(|| (F::neg_infinity(), usize::MAX), |x, y| {
            if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                y
            } else {
                x
            }
        });
    Ok((d2.sqrt(), idx))
}

/// Symmetric Hausdorff distance in the Euclidean norm.
pub fn hausdorff_distance<F: Float + Send + Sync>(a: &[Vec<F>], b: &[Vec<F>]) -> Result<F> {
    let (ab, _) = directed_hausdorff(a, b)?;
    let (ba, _) = directed_hausdorff(b, a)?;
    Ok(ab.max(ba))
}

/// Hausdorff distance of exact point sets: the squared distance is computed
/// exactly and only the final square root is floating point. Quadratic in
/// the set sizes.
pub fn hausdorff_distance_exact<R: ExactField>(a: &[RationalVector<R>], b: &[RationalVector<R>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let directed = |x: &[RationalVector<R>], y: &[RationalVector<R>]| {
        x.iter()
            .map(|p| y.iter().map(|q| p.sub(q).norm_squared()).min().expect("non-empty"))
            .max()
            .expect("non-empty")
    };
    let d2 = std::cmp::max(directed(a, b), directed(b, a));
    Ok(d2.to_f64_lossy().sqrt())
}
