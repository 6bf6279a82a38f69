use std::f64::consts::TAU;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toric_core::delzant::{check_prequantizable, polytope_equal, unimodular_image, validate_delzant};
use toric_core::inverse::{convergence_report, extrapolate, fit_rate, isomorphic, limit_polytope, ReconstructionConfig};
use toric_core::library;
use toric_core::linalg::{IntegerVector, RationalVector};
use toric_core::polytope::HPolytope;
use toric_core::scalar::{frac, int};
use toric_core::spectrum::{apply_deformation, inject_noise, model_spectrum, NoiseModel, Polynomial, SpectrumCloud};
use toric_core::{Deformation, Error, Polytope, Rational};

fn clouds(p: &Polytope, ks: &[u64]) -> Vec<SpectrumCloud> {
    ks.iter().map(|&k| model_spectrum(p, k).unwrap()).collect()
}

fn rat(x: f64) -> Rational {
    BigRational::from_f64(x).unwrap()
}

fn mono(c: f64, powers: &[u32]) -> (Rational, Vec<u32>) {
    (rat(c), powers.to_vec())
}

/// `g1(x) = (0.3 x1 (1 - x1/2π), 0.2 x2)`.
fn cp2_deformation() -> Deformation {
    Deformation::first_order(vec![
        Polynomial { terms: vec![mono(0.3, &[1, 0]), mono(-0.3 / TAU, &[2, 0])] },
        Polynomial { terms: vec![mono(0.2, &[0, 1])] },
    ])
}

fn canonical(p: &Polytope) -> Polytope {
    p.translate(&check_prequantizable(p).unwrap())
}

#[test]
fn exact_square_clouds_round_trip() {
    let square = library::square::<Rational>();
    let r = limit_polytope::<Rational>(&clouds(&square, &[8, 32]), &ReconstructionConfig::default()).unwrap();
    assert!(polytope_equal(&r.polytope, &square).unwrap());
    assert_eq!(r.translation_used, RationalVector::zeros(2));
    for (_, d) in &r.per_k_residuals {
        assert!(*d < 1e-12);
    }
    assert_eq!(r.rate_fit.c, 0.0);
    assert!(r.certificate_text().contains("Delzant: OK"));
}

#[test]
fn single_cp1_cloud() {
    let cp1 = library::cp1::<Rational>();
    let r = limit_polytope::<Rational>(&clouds(&cp1, &[4]), &ReconstructionConfig::default()).unwrap();
    assert!(polytope_equal(&r.polytope, &cp1).unwrap());
    let v: Vec<_> = r.polytope.vertices().iter().map(|v| v.point.clone()).collect();
    assert_eq!(v, vec![RationalVector(vec![int(0)]), RationalVector(vec![int(1)])]);
}

#[test]
fn deformed_cp2_snaps_to_ground_truth() {
    let cp2 = library::cp2::<Rational>();
    let g = cp2_deformation();
    let input: Vec<SpectrumCloud> =
        clouds(&cp2, &[16, 32, 64]).iter().map(|c| apply_deformation(c, &g).unwrap()).collect();
    let r = limit_polytope::<Rational>(&input, &ReconstructionConfig::default()).unwrap();
    assert!(polytope_equal(&r.polytope, &cp2).unwrap());
    // Residuals shrink like 1/k.
    let d: Vec<f64> = r.per_k_residuals.iter().map(|x| x.1).collect();
    assert!(d[0] > 0.0 && d[1] <= 2.0 * d[0] && d[2] <= 2.0 * d[1]);
    assert!(r.rate_fit.c.is_finite());
}

#[test]
fn library_and_three_dimensional_round_trips() {
    let mut cases: Vec<Polytope> = library::all::<Rational>().into_iter().map(|n| n.polytope).collect();
    cases.push(library::simplex(3, 1));
    cases.push(library::cube(3, 1));
    cases.push(library::simplex(2, 2));
    for p in cases {
        let r = limit_polytope::<Rational>(&clouds(&p, &[8, 16, 32]), &ReconstructionConfig::default()).unwrap();
        assert!(polytope_equal(&r.polytope, &canonical(&p)).unwrap(), "{p:?}");
        assert!(isomorphic(&r.polytope, &p).unwrap());
    }
}

#[test]
fn translated_frame_is_reported() {
    let t = RationalVector(vec![frac(1, 2), int(3)]);
    let p = library::square::<Rational>().translate(&t.0);
    let r = limit_polytope::<Rational>(&clouds(&p, &[8, 16]), &ReconstructionConfig::default()).unwrap();
    assert!(polytope_equal(&r.polytope, &library::square()).unwrap());
    assert_eq!(r.translation_used, t.neg());
    assert!(r.per_k_residuals.iter().all(|(_, d)| *d < 1e-9));
}

#[test]
fn deterministic() {
    let cp2 = library::cp2::<Rational>();
    let g = cp2_deformation();
    let input: Vec<SpectrumCloud> =
        clouds(&cp2, &[16, 32, 64]).iter().map(|c| apply_deformation(c, &g).unwrap()).collect();
    let cfg = ReconstructionConfig::default();
    let a = limit_polytope::<Rational>(&input, &cfg).unwrap();
    let b = limit_polytope::<Rational>(&input, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.certificate_text(), b.certificate_text());
}

#[test]
fn noisy_clouds_recovered() {
    let p = library::hirzebruch::<Rational>(2);
    let noise = NoiseModel { scale: 0.5, order: 1 };
    let input: Vec<SpectrumCloud> = clouds(&p, &[16, 32, 64])
        .iter()
        .enumerate()
        .map(|(i, c)| inject_noise(c, noise, 7 + i as u64))
        .collect();
    let r = limit_polytope::<Rational>(&input, &ReconstructionConfig::default()).unwrap();
    assert!(polytope_equal(&r.polytope, &p).unwrap());
}

#[test]
fn stage_errors() {
    let square = library::square::<Rational>();
    let collinear = SpectrumCloud {
        k: 4,
        points: (0..5).map(|i| vec![i as f64, i as f64]).collect(),
        exact: true,
        source: "line".into(),
        collisions: 0,
    };
    assert!(matches!(limit_polytope::<Rational>(&[collinear], &Default::default()), Err(Error::HullDegenerate)));

    let h2 = library::hirzebruch::<Rational>(2);
    let cfg = ReconstructionConfig { denominator_bound: 1, ..Default::default() };
    assert!(matches!(limit_polytope::<Rational>(&clouds(&h2, &[16]), &cfg), Err(Error::RationalizationFailed { .. })));

    // Offsets of a shrunken square sit midway between lattice values.
    let half: Vec<SpectrumCloud> = clouds(&square, &[8, 16])
        .into_iter()
        .map(|mut c| {
            c.points.iter_mut().flatten().for_each(|x| *x *= 1.5);
            c
        })
        .collect();
    match limit_polytope::<Rational>(&half, &Default::default()) {
        Err(Error::SnapExceeded { error, tolerance, raw, .. }) => {
            assert!(error > tolerance);
            assert_eq!(raw.normals.len(), 4);
        }
        other => panic!("expected SnapExceeded, got {other:?}"),
    }

    let fake = HPolytope::<Rational>::from_i64(2, &[(&[1, 0], int(0)), (&[0, 1], int(0)), (&[-1, -2], int(2))]).unwrap();
    let fake_cloud = |k: u64| SpectrumCloud {
        k,
        points: fake
            .lattice_points(&frac(1, k as i64), &[Rational::zero(), Rational::zero()])
            .unwrap()
            .iter()
            .map(|p| p.to_f64().iter().map(|x| x * TAU).collect())
            .collect(),
        exact: true,
        source: "fake".into(),
        collisions: 0,
    };
    match limit_polytope::<Rational>(&[fake_cloud(8), fake_cloud(16)], &Default::default()) {
        Err(Error::NotDelzant(report)) => {
            let text = report.to_string();
            assert!(text.contains("det = -2") || text.contains("det = 2"), "{text}");
        }
        other => panic!("expected NotDelzant, got {other:?}"),
    }

    assert!(matches!(
        limit_polytope::<Rational>(&clouds(&square, &[8, 16]), &ReconstructionConfig { minimum_clouds: 3, ..Default::default() }),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn convergence_report_examples() {
    let cp2 = library::cp2::<Rational>();
    let exact = convergence_report(&clouds(&cp2, &[8, 16, 32]), &cp2).unwrap();
    assert!(exact.entries.iter().all(|e| e.distance == 0.0));
    assert_eq!(exact.rate_fit.c, 0.0);

    let g = cp2_deformation();
    let lattice_k256 = model_spectrum(&cp2, 256).unwrap();
    let bound = g.sup_norm_on(1, &lattice_k256.points);
    let deformed: Vec<SpectrumCloud> =
        clouds(&cp2, &[16, 32, 64, 128]).iter().map(|c| apply_deformation(c, &g).unwrap()).collect();
    let report = convergence_report(&deformed, &cp2).unwrap();
    assert!(report.rate_fit.c <= bound * 1.1, "C = {} vs B = {bound}", report.rate_fit.c);

    // Square clouds against the triangle stay a fixed distance away.
    let square = library::square::<Rational>();
    let far = convergence_report(&clouds(&square, &[8, 16, 32]), &cp2).unwrap();
    for e in &far.entries {
        assert!(e.distance >= 0.5 * TAU / 2.0_f64.sqrt(), "{}", e.distance);
        assert!(e.worst_cloud_point.1 >= e.worst_model_point.1);
    }
}

#[test]
fn isomorphism_verdicts() {
    let cp1 = library::cp1::<Rational>();
    let cp2 = library::cp2::<Rational>();
    assert!(matches!(isomorphic(&cp1, &cp2), Err(Error::DimensionMismatch { .. })));
    let square = library::square::<Rational>();
    let shear = library::shear_product(2, &[(0, 1, 1)]);
    let sheared = unimodular_image(&square, &shear, &IntegerVector::zeros(2)).unwrap();
    assert!(!isomorphic(&square, &sheared).unwrap());
    assert!(validate_delzant(sheared.polytope()).is_ok());
}

#[test]
fn extrapolation_and_rate_fit() {
    let samples: Vec<(u64, f64)> = [8u64, 16, 32].iter().map(|&k| (k, 2.0 + 3.0 / k as f64)).collect();
    assert!((extrapolate(&samples, 1) - 2.0).abs() < 1e-12);
    let quad: Vec<(u64, f64)> = [8u64, 16, 32, 64].iter().map(|&k| (k, 1.0 - 1.0 / k as f64 + 5.0 / (k * k) as f64)).collect();
    assert!((extrapolate(&quad, 2) - 1.0).abs() < 1e-10);
    assert_eq!(extrapolate(&[(4, 7.5)], 1), 7.5);
    let fit = fit_rate(&[(10, 0.3), (20, 0.15), (40, 0.075)], 1.0);
    assert!((fit.c - 3.0).abs() < 1e-12);
}

fn random_image(seed: u64) -> Polytope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds = library::planar_seeds::<Rational>();
    let base = &seeds[rng.random_range(0..seeds.len())];
    let ops: Vec<(usize, usize, i64)> =
        (0..3).map(|_| (rng.random_range(0..2), rng.random_range(0..2), rng.random_range(-1..=1))).collect();
    let a = library::shear_product(2, &ops);
    let t = IntegerVector::from_i64(&[rng.random_range(-3..=3), rng.random_range(-3..=3)]);
    unimodular_image(base, &a, &t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_unimodular_images_round_trip(seed in 0u64..1_000_000) {
        let p = random_image(seed);
        let r = limit_polytope::<Rational>(&clouds(&p, &[8, 16, 32]), &ReconstructionConfig::default()).unwrap();
        prop_assert!(polytope_equal(&r.polytope, &canonical(&p)).unwrap());
    }

    #[test]
    fn small_deformations_absorbed(seed in 0u64..1_000_000) {
        let p = random_image(seed);
        let k_min = 16u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        // Affine g1 rescaled so its sup over the polytope is 0.25 * 2π / k_min.
        let raw: Vec<[f64; 3]> = (0..2).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let samples = model_spectrum(&p, 64).unwrap().points;
        let eval = |x: &[f64]| -> f64 {
            raw.iter().map(|c| (c[0] + c[1] * x[0] + c[2] * x[1]).powi(2)).sum::<f64>().sqrt()
        };
        let sup = samples.iter().map(|x| eval(x)).fold(0.0, f64::max).max(1e-9);
        let s = 0.25 * TAU / k_min as f64 / sup * 0.99;
        let g = Deformation::first_order(raw.iter().map(|c| Polynomial {
            terms: vec![mono(s * c[0], &[0, 0]), mono(s * c[1], &[1, 0]), mono(s * c[2], &[0, 1])],
        }).collect());
        let input: Vec<SpectrumCloud> = clouds(&p, &[16, 32, 64]).iter().map(|c| apply_deformation(c, &g).unwrap()).collect();
        let r = limit_polytope::<Rational>(&input, &ReconstructionConfig::default()).unwrap();
        prop_assert!(polytope_equal(&r.polytope, &canonical(&p)).unwrap());
    }
}
