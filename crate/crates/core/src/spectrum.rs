//! Forward spectral model: the exact joint spectrum of a quantized toric
//! system, its metaplectic variant, deformations, Weyl counts and torus
//! orbit averages.

use std::f64::consts::TAU;

use num_traits::{Float, FromPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::delzant::{check_prequantizable, half_form_vector, DelzantPolytope};
use crate::error::{Error, Result};
use crate::linalg::RationalVector;
use crate::scalar::{int, ExactField};

/// A joint-spectrum sample at semiclassical index `k` (ħ = 1/k), in
/// absolute units.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumCloud {
    pub k: u64,
    pub points: Vec<Vec<f64>>,
    pub exact: bool,
    pub source: String,
    /// Number of deformed points that landed on an earlier point.
    pub collisions: usize,
}

impl SpectrumCloud {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }
}

pub fn to_absolute<R: ExactField>(points: &[RationalVector<R>]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.iter().map(|x| x.to_f64_lossy() * TAU).collect()).collect()
}

fn check_k(k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidInput("semiclassical index k must be >= 1".into()));
    }
    Ok(())
}

/// `(v + Z^n / k) ∩ Δ` in 2π-units, sorted; `v` is the lexicographically
/// smallest vertex.
pub fn model_lattice<R: ExactField>(p: &DelzantPolytope<R>, k: u64) -> Result<Vec<RationalVector<R>>> {
    check_k(k)?;
    check_prequantizable(p)?;
    let scale = R::one() / int::<R>(k as i64);
    Ok(p.lattice_points(&scale, &p.vertices()[0].point))
}

/// `(v + (Z^n + u/2) / k) ∩ Δ` in 2π-units, sorted.
pub fn metaplectic_lattice<R: ExactField>(p: &DelzantPolytope<R>, k: u64) -> Result<Vec<RationalVector<R>>> {
    check_k(k)?;
    check_prequantizable(p)?;
    let u = half_form_vector(p)?;
    let kk = int::<R>(k as i64);
    let offset: Vec<R> = p.vertices()[0]
        .point
        .iter()
        .zip(&u)
        .map(|(v, &ui)| v.clone() + int::<R>(i64::from(ui)) / (int::<R>(2) * kk.clone()))
        .collect();
    Ok(p.lattice_points(&(R::one() / kk), &offset))
}

pub fn model_spectrum<R: ExactField>(p: &DelzantPolytope<R>, k: u64) -> Result<SpectrumCloud> {
    Ok(SpectrumCloud {
        k,
        points: to_absolute(&model_lattice(p, k)?),
        exact: true,
        source: format!("model spectrum, k = {k}"),
        collisions: 0,
    })
}

pub fn metaplectic_spectrum<R: ExactField>(p: &DelzantPolytope<R>, k: u64) -> Result<SpectrumCloud> {
    Ok(SpectrumCloud {
        k,
        points: to_absolute(&metaplectic_lattice(p, k)?),
        exact: true,
        source: format!("metaplectic model spectrum, k = {k}"),
        collisions: 0,
    })
}

/// Dimension of the quantum space: the number of joint eigenvalues.
pub fn quantum_dimension<R: ExactField>(p: &DelzantPolytope<R>, k: u64, metaplectic: bool) -> Result<usize> {
    let points = if metaplectic { metaplectic_lattice(p, k)? } else { model_lattice(p, k)? };
    Ok(points.len())
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeylReport {
    pub k: u64,
    pub count: usize,
    /// `(k/2π)^n vol(Δ)`, i.e. `k^n` times the volume in 2π-units.
    pub leading: f64,
    /// `|count - leading| / k^(n-1)`.
    pub relative_gap: f64,
}

pub fn weyl_report<R: ExactField>(p: &DelzantPolytope<R>, k: u64) -> Result<WeylReport> {
    let count = quantum_dimension(p, k, false)?;
    let n = p.dim() as i32;
    let kk = int::<R>(k as i64);
    let leading_exact = (0..n).fold(p.volume(), |acc, _| acc * kk.clone());
    let gap_exact = (R::from_usize(count).expect("count fits") - leading_exact.clone()).abs()
        / (0..n - 1).fold(R::one(), |acc, _| acc * kk.clone());
    Ok(WeylReport {
        k,
        count,
        leading: leading_exact.to_f64_lossy(),
        relative_gap: gap_exact.to_f64_lossy(),
    })
}

/// `Σ coeff · x^powers` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial<R> {
    pub terms: Vec<(R, Vec<u32>)>,
}

impl<R: ExactField> Polynomial<R> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: R, dim: usize) -> Self {
        Self { terms: vec![(c, vec![0; dim])] }
    }

    pub fn eval_exact(&self, x: &[R]) -> R {
        self.terms.iter().fold(R::zero(), |acc, (c, powers)| {
            let mono = powers
                .iter()
                .zip(x)
                .fold(R::one(), |m, (&p, xi)| m * num_traits::pow(xi.clone(), p as usize));
            acc + c.clone() * mono
        })
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms.iter().fold(0.0, |acc, (c, powers)| {
            let mono: f64 = powers.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product();
            acc + c.to_f64_lossy() * mono
        })
    }

    /// Upper bound of `|p|` over the box `[lo_i, hi_i]`.
    pub fn abs_bound(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, powers)| {
                let m: f64 = powers
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| lo[i].abs().max(hi[i].abs()).powi(p as i32))
                    .product();
                c.to_f64_lossy().abs() * m
            })
            .sum()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, p)| p.iter().sum::<u32>()).max().unwrap_or(0)
    }
}

/// Truncated deformation `g(x; k) = x + Σ_{j=1..J} k^{-j} g_j(x)`, each `g_j`
/// an `n`-tuple of polynomials in the absolute coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeformationSeries<R> {
    pub dim: usize,
    pub coefficients: Vec<Vec<Polynomial<R>>>,
}

impl<R: ExactField> DeformationSeries<R> {
    pub fn identity(dim: usize) -> Self {
        Self { dim, coefficients: Vec::new() }
    }

    pub fn first_order(g1: Vec<Polynomial<R>>) -> Self {
        Self { dim: g1.len(), coefficients: vec![g1] }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// `g_j(x)` evaluated exactly (j starts at 1).
    pub fn eval_term_exact(&self, j: usize, x: &[R]) -> Vec<R> {
        self.coefficients[j - 1].iter().map(|p| p.eval_exact(x)).collect()
    }

    pub fn displacement(&self, x: &[f64], k: u64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let mut weight = 1.0;
        for g in &self.coefficients {
            weight /= k as f64;
            for (o, p) in out.iter_mut().zip(g) {
                *o += weight * p.eval_f64(x);
            }
        }
        out
    }

    /// Upper bound on `sup |g_j|` (Euclidean) over the box.
    pub fn sup_norm_bound(&self, j: usize, lo: &[f64], hi: &[f64]) -> f64 {
        self.coefficients[j - 1]
            .iter()
            .map(|p| p.abs_bound(lo, hi).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest `|g_j(x)|` over the given sample points.
    pub fn sup_norm_on(&self, j: usize, points: &[Vec<f64>]) -> f64 {
        points
            .iter()
            .map(|x| self.coefficients[j - 1].iter().map(|p| p.eval_f64(x).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Replace each point `x` by `x + Σ k^{-j} g_j(x)`. Coinciding images are
/// kept and counted in `collisions`.
pub fn apply_deformation<R: ExactField>(cloud: &SpectrumCloud, g: &DeformationSeries<R>) -> Result<SpectrumCloud> {
    check_k(cloud.k)?;
    if g.order() == 0 {
        return Ok(SpectrumCloud { exact: cloud.exact, ..cloud.clone() });
    }
    if cloud.dim() != g.dim && !cloud.points.is_empty() {
        return Err(Error::DimensionMismatch { left: cloud.dim(), right: g.dim });
    }
    let points: Vec<Vec<f64>> = cloud
        .points
        .iter()
        .map(|x| {
            let d = g.displacement(x, cloud.k);
            x.iter().zip(d).map(|(a, b)| a + b).collect()
        })
        .collect();
    let mut sorted = points.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let collisions = sorted.windows(2).filter(|w| w[0] == w[1]).count();
    Ok(SpectrumCloud {
        k: cloud.k,
        points,
        exact: false,
        source: format!("{} + deformation of order {}", cloud.source, g.order()),
        collisions: cloud.collisions + collisions,
    })
}

/// Bounded noise of radius `r(k) = scale * k^{-order}`, uniform in the ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub scale: f64,
    pub order: i32,
}

impl NoiseModel {
    pub fn radius(&self, k: u64) -> f64 {
        self.scale * (k as f64).powi(-self.order)
    }
}

pub fn inject_noise(cloud: &SpectrumCloud, noise: NoiseModel, seed: u64) -> SpectrumCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ cloud.k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let r = noise.radius(cloud.k);
    let n = cloud.dim();
    let points = cloud
        .points
        .iter()
        .map(|x| {
            let dir: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            let rho = r * rng.random::<f64>().powf(1.0 / n as f64);
            x.iter().zip(&dir).map(|(xi, di)| xi + rho * di / norm).collect()
        })
        .collect();
    SpectrumCloud {
        k: cloud.k,
        points,
        exact: false,
        source: format!("{} + noise r = {r:.3e}", cloud.source),
        collisions: cloud.collisions,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AverageMode {
    /// Average along the flow of the `i`-th action (0-based).
    Flow(usize),
    FullTorus,
}

/// Average of `f(angles, action)` over a torus orbit through `base_angles`
/// in the fiber over `action` (absolute units), by an `samples`-point
/// uniform grid per averaged angle. Angles are in turns, `[0, 1)`.
pub fn orbit_average<R, F, G>(
    p: &DelzantPolytope<R>,
    f: G,
    action: &[F],
    base_angles: &[F],
    mode: AverageMode,
    samples: usize,
) -> Result<F>
where
    R: ExactField,
    F: Float + FromPrimitive,
    G: Fn(&[F], &[F]) -> F,
{
    let n = p.dim();
    if action.len() != n || base_angles.len() != n {
        return Err(Error::DimensionMismatch { left: n, right: action.len() });
    }
    if samples == 0 {
        return Err(Error::InvalidInput("orbit average needs at least one sample".into()));
    }
    let two_pi = F::from_f64(TAU).expect("float");
    let tol = F::from_f64(1e-12).expect("float");
    for h in p.facets() {
        let value = h.normal.iter().zip(action).fold(F::from_f64(h.offset.to_f64_lossy()).expect("float"), |acc, (x, &e)| {
            acc + F::from_f64(num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)).expect("float") * e / two_pi
        });
        if value < -tol {
            return Err(Error::OutOfPolytope);
        }
    }
    let step = |j: usize| F::from_usize(j).expect("float") / F::from_usize(samples).expect("float");
    let wrap = |x: F| x - x.floor();
    match mode {
        AverageMode::Flow(i) => {
            if i >= n {
                return Err(Error::InvalidInput(format!("flow index {i} out of range")));
            }
            let mut angles = base_angles.to_vec();
            let mut sum = F::zero();
            for j in 0..samples {
                angles[i] = wrap(base_angles[i] + step(j));
                sum = sum + f(&angles, action);
            }
            Ok(sum / F::from_usize(samples).expect("float"))
        }
        AverageMode::FullTorus => {
            let mut idx = vec![0usize; n];
            let mut angles = vec![F::zero(); n];
            let mut sum = F::zero();
            let total = samples.pow(n as u32);
            for _ in 0..total {
                for (a, &j) in angles.iter_mut().zip(&idx) {
                    *a = step(j);
                }
                sum = sum + f(&angles, action);
                for d in (0..n).rev() {
                    idx[d] += 1;
                    if idx[d] < samples {
                        break;
                    }
                    idx[d] = 0;
                }
            }
            Ok(sum / F::from_usize(total).expect("float"))
        }
    }
}

/// Smallest `<X_f, x> + λ_f` over the points and facets (2π-units).
pub fn min_facet_margin<R: ExactField>(p: &DelzantPolytope<R>, points: &[RationalVector<R>]) -> Option<R> {
    points.iter().flat_map(|x| p.facets().iter().map(move |h| h.evaluate(x))).min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::scalar::frac;
    use num_rational::BigRational;
    use num_traits::One;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    type Q = BigRational;

    fn close(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| x.iter().zip(y).all(|(u, v)| (u - v).abs() < 1e-12))
    }

    #[test]
    fn model_examples() {
        let s = model_spectrum(&library::cp1::<Q>(), 3).unwrap();
        assert!(close(&s.points, &[vec![0.0], vec![2.0 * PI / 3.0], vec![4.0 * PI / 3.0], vec![2.0 * PI]]));
        let s = model_spectrum(&library::cp2::<Q>(), 1).unwrap();
        assert!(close(&s.points, &[vec![0.0, 0.0], vec![0.0, TAU], vec![TAU, 0.0]]));
        assert_eq!(model_spectrum(&library::square::<Q>(), 2).unwrap().points.len(), 9);
        assert!(s.exact);
    }

    #[test]
    fn metaplectic_examples() {
        let s = metaplectic_spectrum(&library::cp1::<Q>(), 2).unwrap();
        assert!(close(&s.points, &[vec![PI / 2.0], vec![3.0 * PI / 2.0]]));
        assert!(matches!(metaplectic_spectrum(&library::cp2::<Q>(), 3), Err(Error::NoHalfForm { .. })));
        let s = metaplectic_spectrum(&library::square::<Q>(), 1).unwrap();
        assert!(close(&s.points, &[vec![PI, PI]]));
    }

    #[test]
    fn non_prequantizable_is_rejected() {
        let p = library::cp1::<Q>();
        let half = crate::delzant::validate_delzant(&crate::polytope::HPolytope::from_i64(1, &[(&[1], frac::<Q>(0, 1)), (&[-1], frac(1, 2))]).unwrap()).unwrap();
        assert!(matches!(model_spectrum(&half, 2), Err(Error::NotPrequantizable { .. })));
        assert!(model_spectrum(&p, 0).is_err());
    }

    #[test]
    fn dimension_closed_forms() {
        for k in 1..=20u64 {
            let ku = k as usize;
            assert_eq!(quantum_dimension(&library::cp1::<Q>(), k, false).unwrap(), ku + 1);
            assert_eq!(quantum_dimension(&library::cp2::<Q>(), k, false).unwrap(), (ku + 1) * (ku + 2) / 2);
            assert_eq!(quantum_dimension(&library::cp1::<Q>(), k, true).unwrap(), ku);
        }
    }

    #[test]
    fn weyl_examples() {
        let r = weyl_report(&library::square::<Q>(), 10).unwrap();
        assert_eq!((r.count, r.leading), (121, 100.0));
        assert!((r.relative_gap - 2.1).abs() < 1e-12);
        let r = weyl_report(&library::cp1::<Q>(), 100).unwrap();
        assert_eq!((r.count, r.leading, r.relative_gap), (101, 100.0, 1.0));
        let r = weyl_report(&library::cp2::<Q>(), 4).unwrap();
        assert_eq!((r.count, r.leading, r.relative_gap), (15, 8.0, 1.75));
    }

    fn poly(terms: &[(i64, i64, &[u32])]) -> Polynomial<Q> {
        Polynomial { terms: terms.iter().map(|&(p, q, e)| (frac(p, q), e.to_vec())).collect() }
    }

    #[test]
    fn deformation_examples() {
        let cloud = model_spectrum(&library::cp1::<Q>(), 2).unwrap();
        let same = apply_deformation(&cloud, &DeformationSeries::<Q>::identity(1)).unwrap();
        assert_eq!(same.points, cloud.points);
        let shift = DeformationSeries::first_order(vec![poly(&[(3, 1, &[0])])]);
        let moved = apply_deformation(&cloud, &shift).unwrap();
        assert!(close(&moved.points, &[vec![1.5], vec![PI + 1.5], vec![TAU + 1.5]]));
        assert!(!moved.exact);
        let square = DeformationSeries::first_order(vec![poly(&[(1, 1, &[2])])]);
        let bent = apply_deformation(&cloud, &square).unwrap();
        assert!(close(&bent.points, &[vec![0.0], vec![PI + PI * PI / 2.0], vec![TAU + 2.0 * PI * PI]]));
    }

    #[test]
    fn deformation_counts_collisions() {
        let cloud = SpectrumCloud { k: 1, points: vec![vec![0.0], vec![-1.0]], exact: true, source: String::new(), collisions: 0 };
        let fold = DeformationSeries::first_order(vec![poly(&[(1, 1, &[1]), (1, 1, &[2])])]);
        // 0 -> 0, -1 -> -1 - 1 + 1 = -1
        assert_eq!(apply_deformation(&cloud, &fold).unwrap().collisions, 0);
        let collapse = DeformationSeries::first_order(vec![poly(&[(-1, 1, &[1])])]);
        // x -> x - x = 0 for both points at k = 1
        assert_eq!(apply_deformation(&cloud, &collapse).unwrap().collisions, 1);
    }

    #[test]
    fn polynomial_exact_and_bounds() {
        let p = poly(&[(1, 2, &[2, 0]), (-3, 1, &[0, 1]), (1, 1, &[0, 0])]);
        assert_eq!(p.eval_exact(&[int::<Q>(2), frac(1, 3)]), int(2));
        assert!((p.eval_f64(&[2.0, 1.0 / 3.0]) - 2.0).abs() < 1e-15);
        assert_eq!(p.abs_bound(&[-1.0, 0.0], &[2.0, 1.0]), 2.0 + 3.0 + 1.0);
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn noise_is_bounded_and_seeded() {
        let cloud = model_spectrum(&library::square::<Q>(), 4).unwrap();
        let noise = NoiseModel { scale: 0.5, order: 1 };
        let a = inject_noise(&cloud, noise, 7);
        let b = inject_noise(&cloud, noise, 7);
        assert_eq!(a, b);
        for (x, y) in a.points.iter().zip(&cloud.points) {
            let d: f64 = x.iter().zip(y).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
            assert!(d <= 0.125 + 1e-15);
        }
        assert_ne!(inject_noise(&cloud, noise, 8).points, a.points);
    }

    #[test]
    fn orbit_average_examples() {
        let p = library::square::<Q>();
        let e = [1.0, 2.0];
        let th = [0.1, 0.3];
        let constant = orbit_average(&p, |_, a: &[f64]| a[0] * 3.0 + a[1], &e, &th, AverageMode::Flow(0), 256).unwrap();
        assert_eq!(constant, 5.0);
        let sine = orbit_average(&p, |t: &[f64], _| (TAU * t[0]).sin(), &e, &th, AverageMode::Flow(0), 256).unwrap();
        assert!(sine.abs() < 1e-12);
        let cos2 = orbit_average(&p, |t: &[f64], _| (TAU * t[0]).cos().powi(2), &e, &th, AverageMode::Flow(0), 256).unwrap();
        assert!((cos2 - 0.5).abs() < 1e-10);
        let mixed = orbit_average(&p, |t: &[f64], _| (TAU * t[0]).cos().powi(2) * (TAU * t[1]).sin().powi(2), &e, &th, AverageMode::FullTorus, 64).unwrap();
        assert!((mixed - 0.25).abs() < 1e-12);
        let partial = orbit_average(&p, |t: &[f64], _| (TAU * t[1]).sin(), &e, &th, AverageMode::Flow(0), 16).unwrap();
        assert!((partial - (TAU * 0.3).sin()).abs() < 1e-12);
        assert!(matches!(
            orbit_average(&p, |_, _| 1.0, &[-0.5, 1.0], &th, AverageMode::FullTorus, 4),
            Err(Error::OutOfPolytope)
        ));
        let single = orbit_average(&p, |t: &[f32], _| (std::f32::consts::TAU * t[0]).sin(), &[1.0f32, 1.0], &[0.0, 0.0], AverageMode::Flow(0), 64).unwrap();
        assert!(single.abs() < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn vertex_choice_invariance(seed in 0usize..5, vi in 0usize..8, k in 1u64..7) {
            let p = library::planar_seeds::<Q>()[seed].clone();
            let v = &p.vertices()[vi % p.vertices().len()].point;
            let s = Q::one() / int::<Q>(k as i64);
            prop_assert_eq!(p.lattice_points(&s, v), model_lattice(&p, k).unwrap());
        }

        #[test]
        fn refinement_monotonicity(seed in 0usize..5, k in 1u64..5, m in 1u64..4) {
            let p = library::planar_seeds::<Q>()[seed].clone();
            let fine = model_lattice(&p, k * m).unwrap();
            for x in model_lattice(&p, k).unwrap() {
                prop_assert!(fine.binary_search(&x).is_ok());
            }
        }

        #[test]
        fn metaplectic_points_are_interior(k in 1u64..12, which in 0usize..3) {
            let p = [library::cp1::<Q>(), library::square(), library::hirzebruch(2)][which].clone();
            let points = metaplectic_lattice(&p, k).unwrap();
            let bound = frac::<Q>(1, 2 * k as i64);
            for x in &points {
                for h in p.facets() {
                    prop_assert!(h.evaluate(x) >= bound);
                }
            }
        }
    }

}
