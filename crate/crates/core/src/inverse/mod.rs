//! Reconstruction of a Delzant polytope from joint-spectrum clouds.
//!
//! Pipeline: hull of the finest cloud, rationalized facet normals, offsets
//! extrapolated in `1/k`, snapping to the lattice, exact validation, and
//! residuals against the predicted model spectrum.

pub mod hull;
pub mod rationalize;

use std::f64::consts::TAU;
use std::fmt::Write as _;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::delzant::{check_prequantizable, polytope_equal, validate_delzant, DelzantPolytope, ValidationReport, Violation};
use crate::error::{Error, RawPolytope, Result};
use crate::hausdorff::{directed_hausdorff, hausdorff_distance};
use crate::linalg::{rank_exact, IntegerVector, RationalVector};
use crate::polytope::{HPolytope, Halfspace};
use crate::scalar::{format_exact, ExactField};
use crate::spectrum::{model_spectrum, SpectrumCloud};

use hull::{affine_rank, convex_hull, extent, HullFacet};
use rationalize::{best_rational, rationalize_direction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionConfig {
    /// Largest denominator allowed when rationalizing a normal direction.
    pub denominator_bound: u64,
    /// Snap tolerance in absolute units; `None` means `0.4 * 2pi / k_max`.
    pub snap_tolerance: Option<f64>,
    pub minimum_clouds: usize,
    /// Exponent `N` of the assumed residual decay `C k^-N`.
    pub noise_order: f64,
    /// Degree in `1/k` of the offset extrapolation fit.
    pub extrapolation_order: usize,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self { denominator_bound: 32, snap_tolerance: None, minimum_clouds: 1, noise_order: 1.0, extrapolation_order: 1 }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.denominator_bound < 1 {
            return Err(Error::InvalidInput("denominator_bound must be >= 1".into()));
        }
        if let Some(t) = self.snap_tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidInput(format!("snap_tolerance must be positive, got {t}")));
            }
        }
        if !self.noise_order.is_finite() {
            return Err(Error::InvalidInput("noise_order must be finite".into()));
        }
        Ok(())
    }

    pub fn tolerance_for(&self, k_max: u64) -> f64 {
        self.snap_tolerance.unwrap_or(0.4 * TAU / k_max as f64)
    }
}

/// Fitted residual model `d_H ≈ c * k^-exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub c: f64,
    pub exponent: f64,
}

/// A hull facet discarded before snapping, and why.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RejectedFacet {
    pub normal: Vec<f64>,
    pub reason: String,
}

/// Intermediate values of every pipeline stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StageLog {
    pub hull_facets: usize,
    pub rejected: Vec<RejectedFacet>,
    /// Rationalized normals surviving the support filter.
    pub normals: Vec<Vec<i64>>,
    /// Per normal, `(k, -min <X, p>)` for every cloud.
    pub raw_offsets: Vec<Vec<(u64, f64)>>,
    /// Extrapolated absolute offsets.
    pub offsets: Vec<f64>,
    pub base_vertex: Vec<f64>,
    /// Distance moved by each halfspace when snapped.
    pub snap_errors: Vec<f64>,
    pub tolerance: f64,
    /// Snapped halfspaces that touch the polytope in less than a facet.
    pub redundant: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<R> {
    pub validation: ValidationReport,
    /// Prequantization translation of the snapped polytope.
    pub prequantization: RationalVector<R>,
    pub stages: StageLog,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult<R> {
    /// In canonical position: the lex-smallest vertex is the origin.
    pub polytope: DelzantPolytope<R>,
    /// Added (in 2π-units) to cloud coordinates to land in the polytope's frame.
    pub translation_used: RationalVector<R>,
    pub per_k_residuals: Vec<(u64, f64)>,
    pub rate_fit: RateFit,
    pub certificate: Certificate<R>,
}

impl<R: ExactField> ReconstructionResult<R> {
    pub fn certificate_text(&self) -> String {
        let s = &self.certificate.stages;
        let mut out = String::new();
        let _ = writeln!(out, "hull: {} facets, {} rejected", s.hull_facets, s.rejected.len());
        for r in &s.rejected {
            let _ = writeln!(out, "  rejected normal {:?}: {}", r.normal, r.reason);
        }
        let _ = writeln!(out, "normals: {:?}", s.normals);
        let _ = writeln!(out, "extrapolated offsets: {:?}", s.offsets);
        let _ = writeln!(out, "base vertex estimate: {:?}", s.base_vertex);
        let _ = writeln!(out, "snap errors (tolerance {:.3e}): {:?}", s.tolerance, s.snap_errors);
        if !s.redundant.is_empty() {
            let _ = writeln!(out, "redundant halfspaces dropped: {:?}", s.redundant);
        }
        let _ = writeln!(out, "Delzant: OK ({} facets, {} vertices)", self.polytope.facets().len(), self.polytope.vertices().len());
        let _ = writeln!(out, "prequantizable: c = {}", self.certificate.prequantization);
        let _ = writeln!(out, "translation used: {}", self.translation_used);
        for (k, d) in &self.per_k_residuals {
            let _ = writeln!(out, "k = {k}: d_H = {d:.6e}");
        }
        let _ = writeln!(out, "rate fit: C = {:.6e}, exponent = {}", self.rate_fit.c, self.rate_fit.exponent);
        out
    }
}

fn dot(x: &IntegerVector, p: &[f64]) -> f64 {
    x.iter().zip(p).map(|(a, b)| bigint_f64(a) * b).sum()
}

fn bigint_f64(a: &BigInt) -> f64 {
    num_traits::ToPrimitive::to_f64(a).unwrap_or(f64::NAN)
}

fn norm(x: &IntegerVector) -> f64 {
    x.iter().map(|a| bigint_f64(a).powi(2)).sum::<f64>().sqrt()
}

fn to_i64(x: &IntegerVector) -> Vec<i64> {
    x.to_i64().expect("rationalized normals are small")
}

fn check_clouds(clouds: &[SpectrumCloud], cfg: &ReconstructionConfig) -> Result<Vec<SpectrumCloud>> {
    if clouds.len() < cfg.minimum_clouds.max(1) {
        return Err(Error::InvalidInput(format!(
            "need at least {} cloud(s), got {}",
            cfg.minimum_clouds.max(1),
            clouds.len()
        )));
    }
    let mut sorted = clouds.to_vec();
    sorted.sort_by_key(|c| c.k);
    if let Some(w) = sorted.windows(2).find(|w| w[0].k == w[1].k) {
        return Err(Error::InvalidInput(format!("two clouds share k = {}", w[0].k)));
    }
    let n = sorted[0].dim();
    for c in &sorted {
        if c.k == 0 {
            return Err(Error::InvalidInput("semiclassical index k must be >= 1".into()));
        }
        if c.points.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(p) = c.points.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch { left: n, right: p.len() });
        }
        if c.points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("cloud k = {} has a non-finite coordinate", c.k)));
        }
    }
    if n == 0 {
        return Err(Error::InvalidInput("points have dimension 0".into()));
    }
    Ok(sorted)
}

/// Rationalized, merged normals of the hull facets of the finest cloud.
fn hull_normals(points: &[Vec<f64>], cfg: &ReconstructionConfig, tau: f64, k_max: u64, log: &mut StageLog) -> Result<Vec<IntegerVector>> {
    let eps = 1e-9 * extent(points).max(1.0);
    let facets = convex_hull(points, eps)?;
    log.hull_facets = facets.len();
    let large = 2.0 * TAU / k_max as f64;
    let mut normals: Vec<IntegerVector> = Vec::new();
    for f in &facets {
        let inward: Vec<f64> = f.normal.iter().map(|x| -x).collect();
        let verdict = rationalize_direction(&inward, cfg.denominator_bound)
            .ok_or_else(|| format!("no rational direction with denominators <= {}", cfg.denominator_bound))
            .and_then(|x| {
                let gap = support_gap(&x, points, f);
                if gap <= tau {
                    Ok(x)
                } else {
                    Err(format!("rationalized normal {:?} misses the facet by {gap:.3e}", to_i64(&x)))
                }
            });
        match verdict {
            Ok(x) => normals.push(x),
            Err(reason) if facet_diameter(points, f) > large => {
                let _ = reason;
                return Err(Error::RationalizationFailed { bound: cfg.denominator_bound, normal: inward });
            }
            Err(reason) => log.rejected.push(RejectedFacet { normal: inward, reason }),
        }
    }
    normals.sort();
    normals.dedup();
    Ok(normals)
}

/// How far the hull facet's vertices sit from the supporting hyperplane with normal `x`.
fn support_gap(x: &IntegerVector, points: &[Vec<f64>], f: &HullFacet) -> f64 {
    let min = points.iter().map(|p| dot(x, p)).fold(f64::INFINITY, f64::min);
    let worst = f.vertices.iter().map(|&i| dot(x, &points[i]) - min).fold(0.0, f64::max);
    worst / norm(x)
}

fn facet_diameter(points: &[Vec<f64>], f: &HullFacet) -> f64 {
    f.vertices
        .iter()
        .tuple_combinations()
        .map(|(&a, &b)| points[a].iter().zip(&points[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Keep normals whose near-supporting points span a hyperplane.
fn support_filter(normals: Vec<IntegerVector>, points: &[Vec<f64>], tau: f64, k_max: u64, log: &mut StageLog) -> Vec<IntegerVector> {
    let n = points[0].len();
    let rank_tol = 0.5 * TAU / k_max as f64;
    normals
        .into_iter()
        .filter(|x| {
            let nx = norm(x);
            let min = points.iter().map(|p| dot(x, p)).fold(f64::INFINITY, f64::min);
            let near: Vec<&[f64]> =
                points.iter().filter(|p| (dot(x, p) - min) / nx <= tau).map(Vec::as_slice).collect();
            let rank = affine_rank(&near, rank_tol);
            if rank + 1 >= n {
                true
            } else {
                log.rejected.push(RejectedFacet {
                    normal: x.to_f64(),
                    reason: format!("supporting points span only dimension {rank}"),
                });
                false
            }
        })
        .collect()
}

/// Least-squares polynomial in `1/k` through `(k, value)`; returns the value at `1/k = 0`.
pub fn extrapolate(samples: &[(u64, f64)], order: usize) -> f64 {
    let m = samples.len();
    let degree = order.min(m.saturating_sub(1));
    let a = DMatrix::from_fn(m, degree + 1, |i, j| (1.0 / samples[i].0 as f64).powi(j as i32));
    let b = DVector::from_iterator(m, samples.iter().map(|s| s.1));
    let svd = a.svd(true, true);
    let coef = svd.solve(&b, 1e-14).expect("U and V were computed");
    coef[0]
}

/// Vertices of `{<X, ξ> + λ >= 0}` in floating point, with feasibility slack `tol`.
fn estimate_vertices(normals: &[IntegerVector], offsets: &[f64], tol: f64) -> Vec<Vec<f64>> {
    let n = normals[0].len();
    let mut out = Vec::new();
    for subset in (0..normals.len()).combinations(n) {
        let a = DMatrix::from_fn(n, n, |i, j| bigint_f64(&normals[subset[i]][j]));
        let b = DVector::from_iterator(n, subset.iter().map(|&i| -offsets[i]));
        let Some(x) = a.lu().solve(&b) else { continue };
        let x: Vec<f64> = x.iter().copied().collect();
        if x.iter().any(|v| !v.is_finite()) {
            continue;
        }
        if normals.iter().zip(offsets).all(|(nx, l)| (dot(nx, &x) + l) / norm(nx) >= -tol) {
            out.push(x);
        }
    }
    out
}

/// Halfspaces of `hp` whose tight vertices span a hyperplane.
fn drop_redundant<R: ExactField>(hp: &HPolytope<R>, log: &mut StageLog) -> Result<HPolytope<R>> {
    let n = hp.dim();
    let vertices = hp.candidate_vertices();
    let mut kept = Vec::new();
    for (i, h) in hp.halfspaces().iter().enumerate() {
        let tight: Vec<&RationalVector<R>> = vertices.iter().filter(|v| v.facets.contains(&i)).map(|v| &v.point).collect();
        let spans = match tight.split_first() {
            None => false,
            Some((first, rest)) => {
                let diffs: Vec<Vec<R>> = rest.iter().map(|p| p.sub(first).0).collect();
                rank_exact(&diffs) + 1 >= n
            }
        };
        if spans {
            kept.push(h.clone());
        } else {
            log.redundant.push(to_i64(&h.normal));
        }
    }
    HPolytope::new(n, kept)
}

/// Rational approximation of `x`: small denominators first if within `tol`.
fn rationalize_coordinate<R: ExactField>(x: f64, small: u64, tol: f64) -> R {
    let (p, q) = best_rational(x, small);
    let (p, q) = if (x - p as f64 / q as f64).abs() <= tol { (p, q) } else { best_rational(x, 1_000_000) };
    R::from_fraction(&BigInt::from(p), &BigInt::from(q))
}

/// `C` in `d ≈ C k^-exponent`, fitted in log-log with the slope fixed.
/// Zero residuals carry no slope information and are skipped; all zero gives `C = 0`.
pub fn fit_rate(residuals: &[(u64, f64)], exponent: f64) -> RateFit {
    let logs: Vec<f64> = residuals
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|&(k, d)| d.ln() + exponent * (k as f64).ln())
        .collect();
    let c = if logs.is_empty() { 0.0 } else { (logs.iter().sum::<f64>() / logs.len() as f64).exp() };
    RateFit { c, exponent }
}

/// Recover the Delzant polytope whose model spectra the clouds approximate.
pub fn limit_polytope<R: ExactField>(clouds: &[SpectrumCloud], cfg: &ReconstructionConfig) -> Result<ReconstructionResult<R>> {
    cfg.validate()?;
    let clouds = check_clouds(clouds, cfg)?;
    let finest = clouds.last().expect("nonempty");
    let n = finest.dim();
    let k_max = finest.k;
    let tau = cfg.tolerance_for(k_max);
    let mut log = StageLog { tolerance: tau, ..StageLog::default() };

    let normals = if n == 1 {
        let distinct = finest.points.iter().any(|p| (p[0] - finest.points[0][0]).abs() > 1e-12);
        if !distinct {
            return Err(Error::HullDegenerate);
        }
        vec![IntegerVector::from_i64(&[1]), IntegerVector::from_i64(&[-1])]
    } else {
        let merged = hull_normals(&finest.points, cfg, tau, k_max, &mut log)?;
        support_filter(merged, &finest.points, tau, k_max, &mut log)
    };
    log.normals = normals.iter().map(to_i64).collect();

    log.raw_offsets = normals
        .par_iter()
        .map(|x| {
            clouds
                .iter()
                .map(|c| (c.k, -c.points.iter().map(|p| dot(x, p)).fold(f64::INFINITY, f64::min)))
                .collect()
        })
        .collect();
    log.offsets = log.raw_offsets.iter().map(|s| extrapolate(s, cfg.extrapolation_order)).collect();

    let raw = || RawPolytope { normals: log.normals.clone(), offsets: log.offsets.clone() };
    let not_full = || Error::NotDelzant(Box::new(ValidationReport { violations: vec![Violation::NotFullDimensional] }));
    if normals.len() <= n {
        return Err(not_full());
    }
    let estimates = estimate_vertices(&normals, &log.offsets, tau);
    let v0 = estimates
        .into_iter()
        .min_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or_else(not_full)?;
    let v0: Vec<f64> = v0.into_iter().map(|x| x + 0.0).collect();
    log.base_vertex = v0.clone();

    let mut halfspaces = Vec::with_capacity(normals.len());
    for (f, (x, l)) in normals.iter().zip(&log.offsets).enumerate() {
        let mu = (l + dot(x, &v0)) / TAU;
        let snapped = mu.round();
        let error = (mu - snapped).abs() * TAU / norm(x);
        log.snap_errors.push(error);
        if error > tau {
            return Err(Error::SnapExceeded { facet: f, error, tolerance: tau, raw: raw() });
        }
        halfspaces.push(Halfspace::new(x.clone(), R::from_bigint(&BigInt::from(snapped as i64))));
    }
    let snapped = HPolytope::new(n, halfspaces)?;
    let trimmed = drop_redundant(&snapped, &mut log)?;
    let polytope = validate_delzant(&trimmed).map_err(|r| Error::NotDelzant(Box::new(r)))?;
    let c = check_prequantizable(&polytope)?;
    let polytope = polytope.translate(&c);

    let v0_units: Vec<R> = v0
        .iter()
        .map(|x| rationalize_coordinate(x / TAU, cfg.denominator_bound, tau / TAU))
        .collect();
    let translation_used = c.sub(&v0_units);

    let per_k_residuals = residuals(&clouds, &polytope, &translation_used)?;
    let rate_fit = fit_rate(&per_k_residuals, cfg.noise_order);
    Ok(ReconstructionResult {
        polytope,
        translation_used,
        per_k_residuals,
        rate_fit,
        certificate: Certificate { validation: ValidationReport::default(), prequantization: c, stages: log },
    })
}

fn residuals<R: ExactField>(clouds: &[SpectrumCloud], p: &DelzantPolytope<R>, t: &RationalVector<R>) -> Result<Vec<(u64, f64)>> {
    let shift: Vec<f64> = t.to_f64().iter().map(|x| x * TAU).collect();
    clouds
        .par_iter()
        .map(|c| {
            let moved: Vec<Vec<f64>> =
                c.points.iter().map(|p| p.iter().zip(&shift).map(|(x, s)| x + s).collect()).collect();
            let model = model_spectrum(p, c.k)?;
            Ok((c.k, hausdorff_distance(&moved, &model.points)?))
        })
        .collect()
}

/// Where the Hausdorff distance at one `k` is attained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceEntry {
    pub k: u64,
    pub distance: f64,
    /// Cloud point farthest from the model spectrum, and its distance.
    pub worst_cloud_point: (Vec<f64>, f64),
    /// Model point farthest from the cloud, and its distance.
    pub worst_model_point: (Vec<f64>, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
    pub rate_fit: RateFit,
}

/// Distance of each cloud to the model spectrum of `p`, with `C` fitted at exponent 1.
pub fn convergence_report<R: ExactField>(clouds: &[SpectrumCloud], p: &DelzantPolytope<R>) -> Result<ConvergenceReport> {
    let entries: Vec<ConvergenceEntry> = clouds
        .par_iter()
        .map(|c| {
            if c.dim() != p.dim() {
                return Err(Error::DimensionMismatch { left: p.dim(), right: c.dim() });
            }
            let model = model_spectrum(p, c.k)?;
            let (d_cloud, i_cloud) = directed_hausdorff(&c.points, &model.points)?;
            let (d_model, i_model) = directed_hausdorff(&model.points, &c.points)?;
            Ok(ConvergenceEntry {
                k: c.k,
                distance: d_cloud.max(d_model),
                worst_cloud_point: (c.points[i_cloud].clone(), d_cloud),
                worst_model_point: (model.points[i_model].clone(), d_model),
            })
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(u64, f64)> = entries.iter().map(|e| (e.k, e.distance)).collect();
    Ok(ConvergenceReport { rate_fit: fit_rate(&pairs, 1.0), entries })
}

/// Isospectrality verdict: equal polytopes, hence isomorphic toric systems.
pub fn isomorphic<R: ExactField>(a: &DelzantPolytope<R>, b: &DelzantPolytope<R>) -> Result<bool> {
    polytope_equal(a, b)
}

/// Human-readable offsets of a polytope, used by reports.
pub fn describe_facets<R: ExactField>(p: &DelzantPolytope<R>) -> String {
    p.facets()
        .iter()
        .map(|f| format!("<{}, x> + {} >= 0", f.normal, format_exact(&f.offset)))
        .join("; ")
}
