//! Incremental convex hull of a floating point cloud in dimension >= 2.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A facet of the hull: outward unit normal `normal`, with
/// `<normal, x> <= offset` for every input point.
#[derive(Clone, Debug)]
pub struct HullFacet {
    pub normal: Vec<f64>,
    pub offset: f64,
    /// Indices of the input points spanning the facet.
    pub vertices: Vec<usize>,
}

impl HullFacet {
    pub fn distance(&self, p: &[f64]) -> f64 {
        dot(&self.normal, p) - self.offset
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Largest coordinate spread of the cloud, used to scale tolerances.
pub fn extent(points: &[Vec<f64>]) -> f64 {
    let n = points.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[i]), hi.max(p[i]))
            });
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// Orthonormal basis of the span of `vectors`, ignoring directions shorter
/// than `tol` after projection.
fn gram_schmidt(vectors: impl IntoIterator<Item = Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in vectors {
        for b in &basis {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > tol {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// Affine rank of a point set, with directions below `tol` treated as flat.
pub fn affine_rank(points: &[&[f64]], tol: f64) -> usize {
    let Some(first) = points.first() else { return 0 };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let dim = first.len();
    // Greedy: repeatedly take the point farthest from the current flat.
    loop {
        if basis.len() == dim {
            return dim;
        }
        let residual = |p: &[f64]| {
            let mut v = sub(p, first);
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            v
        };
        let best = points
            .iter()
            .map(|p| residual(p))
            .max_by(|a, b| dot(a, a).partial_cmp(&dot(b, b)).unwrap_or(std::cmp::Ordering::Equal));
        match best {
            Some(v) if dot(&v, &v).sqrt() > tol => {
                let norm = dot(&v, &v).sqrt();
                basis.push(v.into_iter().map(|x| x / norm).collect());
            }
            _ => return basis.len(),
        }
    }
}

/// Unit normal to the hyperplane through `pts` (n points in R^n).
fn hyperplane_normal(pts: &[&[f64]]) -> Option<Vec<f64>> {
    let n = pts[0].len();
    let diffs: Vec<Vec<f64>> = pts[1..].iter().map(|p| sub(p, pts[0])).collect();
    let span = gram_schmidt(diffs, 0.0);
    if span.len() != n - 1 {
        return None;
    }
    // The first coordinate direction with a nonzero residual gives the normal.
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            for b in &span {
                let c = dot(&e, b);
                e.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            e
        })
        .max_by(|a, b| dot(a, a).partial_cmp(&dot(b, b)).unwrap_or(std::cmp::Ordering::Equal))
        .map(|v| {
            let norm = dot(&v, &v).sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
}

fn make_facet(points: &[Vec<f64>], vertices: Vec<usize>, interior: &[f64]) -> Option<HullFacet> {
    let pts: Vec<&[f64]> = vertices.iter().map(|&i| points[i].as_slice()).collect();
    let mut normal = hyperplane_normal(&pts)?;
    let mut offset = dot(&normal, pts[0]);
    if dot(&normal, interior) > offset {
        normal.iter_mut().for_each(|x| *x = -*x);
        offset = -offset;
    }
    Some(HullFacet { normal, offset, vertices })
}

/// Convex hull facets of `points` (dimension >= 2).
///
/// Points closer than `eps` to a facet plane are treated as lying on it.
/// Fails with [`Error::HullDegenerate`] when the cloud is not full-dimensional.
pub fn convex_hull(points: &[Vec<f64>], eps: f64) -> Result<Vec<HullFacet>> {
    let n = points.first().map_or(0, Vec::len);
    if n < 2 || points.len() <= n {
        return Err(Error::HullDegenerate);
    }
    // Initial simplex: lex-smallest point, then greedy farthest from the flat.
    let start = (0..points.len())
        .min_by(|&a, &b| points[a].partial_cmp(&points[b]).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty");
    let mut simplex = vec![start];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while simplex.len() <= n {
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for (i, p) in points.iter().enumerate() {
            let mut v = sub(p, &points[start]);
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let d = dot(&v, &v).sqrt();
            if best.as_ref().is_none_or(|(_, bd, _)| d > *bd) {
                best = Some((i, d, v));
            }
        }
        let (i, d, v) = best.expect("nonempty");
        if d <= eps {
            return Err(Error::HullDegenerate);
        }
        basis.push(v.into_iter().map(|x| x / d).collect());
        simplex.push(i);
    }
    let interior: Vec<f64> = (0..n)
        .map(|j| simplex.iter().map(|&i| points[i][j]).sum::<f64>() / (n + 1) as f64)
        .collect();
    let mut facets: Vec<HullFacet> = (0..=n)
        .map(|skip| {
            let verts: Vec<usize> = simplex.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &i)| i).collect();
            make_facet(points, verts, &interior).ok_or(Error::HullDegenerate)
        })
        .collect::<Result<_>>()?;

    // Process remaining points farthest-first so that interior points are
    // usually discarded against an almost complete hull.
    let mut order: Vec<usize> = (0..points.len()).filter(|i| !simplex.contains(i)).collect();
    let dist2 = |i: usize| {
        let d = sub(&points[i], &interior);
        dot(&d, &d)
    };
    order.sort_by(|&a, &b| dist2(b).partial_cmp(&dist2(a)).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));

    for p in order {
        let visible: Vec<bool> = facets.iter().map(|f| f.distance(&points[p]) > eps).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut ridges: HashMap<Vec<usize>, (usize, Vec<usize>)> = HashMap::new();
        for (f, _) in facets.iter().zip(&visible).filter(|(_, &v)| v) {
            for skip in 0..f.vertices.len() {
                let ridge: Vec<usize> =
                    f.vertices.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &i)| i).collect();
                let mut key = ridge.clone();
                key.sort_unstable();
                ridges.entry(key).or_insert((0, ridge)).0 += 1;
            }
        }
        let mut horizon: Vec<Vec<usize>> =
            ridges.into_values().filter(|(count, _)| *count == 1).map(|(_, r)| r).collect();
        horizon.sort();
        let mut kept: Vec<HullFacet> =
            facets.into_iter().zip(visible).filter(|(_, v)| !v).map(|(f, _)| f).collect();
        for mut ridge in horizon {
            ridge.push(p);
            if let Some(f) = make_facet(points, ridge, &interior) {
                kept.push(f);
            }
        }
        facets = kept;
    }
    Ok(facets)
}
