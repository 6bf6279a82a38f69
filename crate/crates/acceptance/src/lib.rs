//! Fixtures shared by the acceptance suite: the published deformation,
//! random lattice symmetries and brute-force reference computations.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::FromPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use toric_core::library;
use toric_core::linalg::{IntegerMatrix, IntegerVector};
use toric_core::polytope::{HPolytope, Halfspace};
use toric_core::scalar::{int, ExactField};
use toric_core::spectrum::{apply_deformation, model_spectrum, Polynomial, SpectrumCloud};
use toric_core::{Deformation, Polytope, Rational};

pub fn rat(x: f64) -> Rational {
    BigRational::from_f64(x).expect("finite")
}

/// Largest vertex coordinate of Δ in absolute units.
fn width(p: &Polytope) -> f64 {
    TAU * p
        .vertices()
        .iter()
        .flat_map(|v| v.point.iter().map(|x| x.to_f64_lossy()))
        .fold(0.0, f64::max)
}

/// The published first-order deformation. With `ξ = x / w`, `w` the largest
/// vertex coordinate of Δ in absolute units:
/// n = 1: `g1 = 0.12 ξ - 0.06 ξ²`;
/// n = 2: `g1 = (0.10 ξ2 + 0.03 ξ1 ξ2, 0.08 ξ1 - 0.04 ξ1² + 0.02 ξ2)`.
/// On `[0,1]^n` the termwise bound gives `|g1| <= 0.18` and `<= 0.191`.
pub fn published_g1(p: &Polytope) -> Deformation {
    let s = 1.0 / width(p);
    let term = |c: f64, powers: &[u32]| {
        let degree: u32 = powers.iter().sum();
        (rat(c * s.powi(degree as i32)), powers.to_vec())
    };
    let g1 = match p.dim() {
        1 => vec![Polynomial { terms: vec![term(0.12, &[1]), term(-0.06, &[2])] }],
        _ => vec![
            Polynomial { terms: vec![term(0.10, &[0, 1]), term(0.03, &[1, 1])] },
            Polynomial { terms: vec![term(0.08, &[1, 0]), term(-0.04, &[2, 0]), term(0.02, &[0, 1])] },
        ],
    };
    Deformation::first_order(g1)
}

pub fn deformed_clouds(p: &Polytope, g: &Deformation, ks: &[u64]) -> Vec<SpectrumCloud> {
    ks.iter()
        .map(|&k| apply_deformation(&model_spectrum(p, k).expect("prequantized"), g).expect("dimensions agree"))
        .collect()
}

/// `sup |g1|` sampled on the k = 256 lattice of Δ, and the termwise upper
/// bound over the enclosing box.
pub fn sup_g1(p: &Polytope, g: &Deformation) -> (f64, f64) {
    let dense = model_spectrum(p, 256).expect("prequantized");
    let n = p.dim();
    (g.sup_norm_on(1, &dense.points), g.sup_norm_bound(1, &vec![0.0; n], &vec![width(p); n]))
}

/// Three random elementary shears, composed with a reflection half the time.
pub fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> IntegerMatrix {
    let ops: Vec<(usize, usize, i64)> = (0..3).map(|_| (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(-2..=2))).collect();
    let mut a = library::shear_product(n, &ops);
    if rng.random_bool(0.5) {
        // A reflection keeps |det| = 1.
        for j in 0..n {
            let v = -a[(0, j)].clone();
            a[(0, j)] = v;
        }
    }
    a
}

pub fn random_shift(rng: &mut ChaCha8Rng, n: usize) -> IntegerVector {
    IntegerVector((0..n).map(|_| BigInt::from(rng.random_range(-5..=5))).collect())
}

pub fn random_set(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vec<f64>> {
    let size = rng.random_range(1..=25);
    (0..size).map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect()).collect()
}

/// Quadratic-time Hausdorff distance.
pub fn brute_hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let dist = |x: &Vec<f64>, y: &Vec<f64>| x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    let directed = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.iter().map(|x| b.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Vertices (0,0), (2,0), (0,1); the normals at (0,1) have determinant -2.
pub fn fake_triangle() -> HPolytope<Rational> {
    HPolytope::from_i64(2, &[(&[1, 0], int(0)), (&[0, 1], int(0)), (&[-1, -2], int(2))]).expect("well formed")
}

/// `{A ξ + t}` for an arbitrary H-polytope, without validation.
pub fn image_of(p: &HPolytope<Rational>, a: &IntegerMatrix, t: &IntegerVector) -> HPolytope<Rational> {
    let inv_t = a.unimodular_inverse().expect("unimodular").transpose();
    let halfspaces = p
        .halfspaces()
        .iter()
        .map(|h| {
            let normal = inv_t.mul_vec(&h.normal.0);
            let shift: BigInt = normal.0.iter().zip(&t.0).map(|(x, y)| x * y).sum();
            Halfspace::new(normal, h.offset.clone() - Rational::from_integer(shift))
        })
        .collect();
    HPolytope::new(p.dim(), halfspaces).expect("well formed")
}
