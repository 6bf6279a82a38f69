//! Joint spectrum recomputed from the Fock side of the Delzant construction.
//!
//! The monomials `z^α` of the Bargmann space are joint eigenvectors of the
//! Kostant–Souriau operators with eigenvalue `<X, (2π/k) α - λ>`. The
//! reduced space keeps the `α` annihilated by the kernel directions; each
//! survivor gives one joint eigenvalue `ℓ` with `π*(ℓ) + λ = (2π/k) α`.
//! Nothing here touches the lattice-side enumeration of `quantum-model`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::delzant::{check_prequantizable, construction_data, solve_gf2_all_ones, ConstructionData, DelzantPolytope};
use crate::error::{Error, Result};
use crate::linalg::{IntegerMatrix, IntegerVector, RationalVector};
use crate::polytope::{HPolytope, Halfspace};
use crate::spectrum::{metaplectic_lattice, model_lattice};
use crate::scalar::{int, ExactField};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockIndex {
    pub alpha: Vec<u64>,
    /// Represents `α + ½𝕀` (metaplectic correction).
    pub half_shifted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleSpectrum<R> {
    pub k: u64,
    /// Sorted by eigenvalue; eigenvalues in 2π-units.
    pub entries: Vec<(FockIndex, RationalVector<R>)>,
}

/// `γ` with every `<γ, X_f>` odd, and `d` with `π*γ = 𝕀 + 2d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaplecticTwist {
    pub gamma: IntegerVector,
    pub divisor: IntegerVector,
}

pub fn metaplectic_twist(c: &ConstructionData<impl ExactField>) -> Result<MetaplecticTwist> {
    let n = c.pi.rows();
    let columns = c.pi.column_vectors();
    let parity: Vec<Vec<u8>> = columns
        .iter()
        .map(|x| x.iter().map(|v| u8::from((v % 2u8) != BigInt::zero())).collect())
        .collect();
    let gamma = solve_gf2_all_ones(&parity, n).map_err(|certificate| Error::NoHalfForm { certificate })?;
    let gamma = IntegerVector(gamma.into_iter().map(BigInt::from).collect());
    let divisor = IntegerVector(columns.iter().map(|x| (x.dot_int(&gamma) - 1) / 2).collect());
    Ok(MetaplecticTwist { gamma, divisor })
}

struct Problem {
    kernel: Vec<Vec<i64>>,
    /// Right-hand side per kernel column: `k<Y,λ>` (or `2k<Y,λ>` when shifted).
    targets: Vec<i64>,
    bounds: Vec<i64>,
    metaplectic: bool,
}

impl Problem {
    fn admissible(&self, alpha: &[i64]) -> bool {
        self.kernel.iter().zip(&self.targets).all(|(y, &t)| {
            let s: i64 = if self.metaplectic {
                y.iter().zip(alpha).map(|(a, b)| a * (2 * b + 1)).sum()
            } else {
                y.iter().zip(alpha).map(|(a, b)| a * b).sum()
            };
            s == t
        })
    }
}

fn small(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or(Error::Overflow("Fock index box"))
}

/// All `α ∈ N^F` (or `α + ½𝕀`) in the reduced quantum space at level `k`,
/// by brute force over the box `0 <= α_f <= k · max_Δ(<X_f, ·> + λ_f)`.
pub fn admissible_indices<R: ExactField>(c: &ConstructionData<R>, k: u64, metaplectic: bool) -> Result<Vec<FockIndex>> {
    if k == 0 {
        return Err(Error::InvalidInput("semiclassical index k must be >= 1".into()));
    }
    if metaplectic {
        metaplectic_twist(c)?;
    }
    if !c.lambda.is_integral() {
        return Err(Error::NotPrequantized);
    }
    let facet_count = c.pi.cols();
    let kk = k as i64;
    let lambda: Vec<i64> = c.lambda.iter().map(|l| small(&l.numer_big())).collect::<Result<_>>()?;

    // Heights come from the vertex list of the polytope the data describes.
    let halfspaces = c
        .pi
        .column_vectors()
        .into_iter()
        .zip(c.lambda.iter())
        .map(|(x, l)| Halfspace::new(x, l.clone()))
        .collect();
    let poly = HPolytope::new(c.pi.rows(), halfspaces)?;
    let vertices = poly.vertex_enumeration()?;
    let bounds: Vec<i64> = poly
        .halfspaces()
        .iter()
        .map(|h| {
            let height = vertices.iter().map(|v| h.evaluate(&v.point)).max().expect("vertices");
            let top = height * int::<R>(kk);
            // α_f + ½ <= k·height  <=>  α_f <= floor(k·height - ½)
            let top = if metaplectic { top - int::<R>(1) / int::<R>(2) } else { top };
            small(&top.floor_big())
        })
        .collect::<Result<_>>()?;

    let kernel: Vec<Vec<i64>> = c
        .kernel_basis
        .column_vectors()
        .iter()
        .map(|y| y.iter().map(small).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let targets: Vec<i64> = kernel
        .iter()
        .map(|y| {
            let s: i64 = y.iter().zip(&lambda).map(|(a, b)| a * b).sum();
            if metaplectic {
                2 * kk * s
            } else {
                kk * s
            }
        })
        .collect();
    let problem = Problem { kernel, targets, bounds, metaplectic };
    if problem.bounds.iter().any(|&b| b < 0) {
        return Ok(Vec::new());
    }

    let mut found: Vec<Vec<i64>> = (0..=problem.bounds[0])
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut out = Vec::new();
            let mut alpha = vec![0i64; facet_count];
            alpha[0] = first;
            scan(&problem, &mut alpha, 1, &mut out);
            out
        })
        .collect();
    found.sort();
    Ok(found
        .into_iter()
        .map(|a| FockIndex { alpha: a.into_iter().map(|x| x as u64).collect(), half_shifted: metaplectic })
        .collect())
}

fn scan(p: &Problem, alpha: &mut Vec<i64>, pos: usize, out: &mut Vec<Vec<i64>>) {
    if pos == alpha.len() {
        if p.admissible(alpha) {
            out.push(alpha.clone());
        }
        return;
    }
    for v in 0..=p.bounds[pos] {
        alpha[pos] = v;
        scan(p, alpha, pos + 1, out);
    }
}

/// Joint eigenvalues `ℓ` solving `π*(ℓ) = (α [+ ½𝕀]) / k - λ` (2π-units).
pub fn oracle_spectrum<R: ExactField>(c: &ConstructionData<R>, k: u64, metaplectic: bool) -> Result<OracleSpectrum<R>> {
    let indices = admissible_indices(c, k, metaplectic)?;
    let normals = c.pi.column_vectors();
    let tight: Vec<usize> = (0..normals.len())
        .filter(|&f| (normals[f].dot(&c.base_vertex) + c.lambda[f].clone()).is_zero())
        .collect();
    let n = c.pi.rows();
    if tight.len() != n {
        return Err(Error::InvalidInput("base vertex is not a simple vertex".into()));
    }
    let base = IntegerMatrix::from_rows(&tight.iter().map(|&f| normals[f].clone()).collect::<Vec<_>>());
    let inverse = base.unimodular_inverse()?;
    let kk = int::<R>(k as i64);
    let half = int::<R>(1) / int::<R>(2);
    let target = |alpha: &[u64], f: usize| {
        let a = int::<R>(alpha[f] as i64);
        let a = if metaplectic { a + half.clone() } else { a };
        a / kk.clone() - c.lambda[f].clone()
    };

    let mut entries = Vec::with_capacity(indices.len());
    for idx in indices {
        let rhs: Vec<R> = tight.iter().map(|&f| target(&idx.alpha, f)).collect();
        let ell: Vec<R> = (0..n)
            .map(|i| {
                (0..n).fold(R::zero(), |acc, j| acc + R::from_bigint(&inverse[(i, j)]) * rhs[j].clone())
            })
            .collect();
        for (f, x) in normals.iter().enumerate() {
            if x.dot(&ell) != target(&idx.alpha, f) {
                return Err(Error::InconsistentSystem(idx.alpha.iter().map(|&a| a as i64).collect()));
            }
        }
        entries.push((idx, RationalVector(ell)));
    }
    entries.sort_by(|a, b| a.1.cmp(&b.1));
    if let Some(w) = entries.windows(2).find(|w| w[0].1 == w[1].1) {
        return Err(Error::InconsistentSystem(w[1].0.alpha.iter().map(|&a| a as i64).collect()));
    }
    Ok(OracleSpectrum { k, entries })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectionReport<R> {
    pub k: u64,
    pub metaplectic: bool,
    pub dimension_lattice: usize,
    pub dimension_oracle: usize,
    /// Lattice eigenvalues with no Fock pre-image.
    pub lattice_only: Vec<RationalVector<R>>,
    /// Fock eigenvalues missing from the lattice side.
    pub oracle_only: Vec<(FockIndex, RationalVector<R>)>,
}

impl<R> BijectionReport<R> {
    pub fn agrees(&self) -> bool {
        self.lattice_only.is_empty() && self.oracle_only.is_empty()
    }
}

/// Compare the oracle eigenvalues with the lattice model as exact point sets.
/// Both sides are computed on the canonical prequantized translate of `P`.
pub fn bijection_check<R: ExactField>(p: &DelzantPolytope<R>, k: u64, metaplectic: bool) -> Result<BijectionReport<R>> {
    let c = check_prequantizable(p)?;
    let p = p.translate(&c);
    let lattice = if metaplectic { metaplectic_lattice(&p, k)? } else { model_lattice(&p, k)? };
    let oracle = oracle_spectrum(&construction_data(&p)?, k, metaplectic)?;
    let lattice_only = lattice
        .iter()
        .filter(|x| oracle.entries.binary_search_by(|e| e.1.cmp(x)).is_err())
        .map(|x| x.sub(&c))
        .collect();
    let oracle_only = oracle
        .entries
        .iter()
        .filter(|(_, l)| lattice.binary_search(l).is_err())
        .map(|(a, l)| (a.clone(), l.sub(&c)))
        .collect();
    Ok(BijectionReport {
        k,
        metaplectic,
        dimension_lattice: lattice.len(),
        dimension_oracle: oracle.entries.len(),
        lattice_only,
        oracle_only,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delzant::{construction_data, unimodular_image};
    use crate::library;
    use crate::scalar::frac;
    use crate::spectrum::quantum_dimension;
    use num_rational::BigRational;

    type Q = BigRational;

    fn alphas(v: &[FockIndex]) -> Vec<Vec<u64>> {
        v.iter().map(|i| i.alpha.clone()).collect()
    }

    #[test]
    fn admissible_examples() {
        let c = construction_data(&library::cp1::<Q>()).unwrap();
        assert_eq!(alphas(&admissible_indices(&c, 3, false).unwrap()), vec![vec![0, 3], vec![1, 2], vec![2, 1], vec![3, 0]]);
        let meta = admissible_indices(&c, 2, true).unwrap();
        assert_eq!(alphas(&meta), vec![vec![0, 1], vec![1, 0]]);
        assert!(meta.iter().all(|i| i.half_shifted));
        let c2 = construction_data(&library::cp2::<Q>()).unwrap();
        let idx = admissible_indices(&c2, 1, false).unwrap();
        assert_eq!(idx.len(), 3);
        assert!(idx.iter().all(|i| i.alpha.iter().sum::<u64>() == 1));
        assert!(matches!(admissible_indices(&c2, 1, true), Err(Error::NoHalfForm { .. })));
    }

    #[test]
    fn oracle_examples() {
        let c = construction_data(&library::cp1::<Q>()).unwrap();
        let s = oracle_spectrum(&c, 3, false).unwrap();
        let ells: Vec<Q> = s.entries.iter().map(|e| e.1[0].clone()).collect();
        assert_eq!(ells, vec![frac(0, 1), frac(1, 3), frac(2, 3), frac(1, 1)]);
        let c2 = construction_data(&library::cp2::<Q>()).unwrap();
        let s = oracle_spectrum(&c2, 2, false).unwrap();
        assert_eq!(s.entries.len(), 6);
        for (idx, ell) in &s.entries {
            for (f, x) in c2.pi.column_vectors().iter().enumerate() {
                assert_eq!(x.dot(ell) + c2.lambda[f].clone(), frac(idx.alpha[f] as i64, 2));
            }
        }
    }

    #[test]
    fn twist_divisor() {
        let c = construction_data(&library::hirzebruch::<Q>(2)).unwrap();
        let t = metaplectic_twist(&c).unwrap();
        assert_eq!(t.gamma, IntegerVector::from_i64(&[1, 1]));
        // <γ, X_f> = 1, 1, -1, -3  =>  d = 0, 0, -1, -2
        assert_eq!(t.divisor, IntegerVector::from_i64(&[0, 0, -1, -2]));
    }

    #[test]
    fn bijection_on_examples() {
        for k in 1..=6 {
            assert!(bijection_check(&library::cp1::<Q>(), k, false).unwrap().agrees());
            assert!(bijection_check(&library::cp2::<Q>(), k, false).unwrap().agrees());
            assert!(bijection_check(&library::hirzebruch::<Q>(2), k, true).unwrap().agrees());
        }
        // Non-canonical position is handled by translating first.
        let moved = library::square::<Q>().translate(&[frac(1, 3), frac(-2, 1)]);
        let r = bijection_check(&moved, 3, true).unwrap();
        assert!(r.agrees());
        assert_eq!(r.dimension_oracle, 9);
    }

    #[test]
    fn dimensions_match_and_eigenvalues_lie_inside() {
        for named in library::all::<Q>() {
            let p = &named.polytope;
            let c = construction_data(p).unwrap();
            for k in 1..=6 {
                for meta in [false, true] {
                    let Ok(s) = oracle_spectrum(&c, k, meta) else {
                        assert!(meta);
                        continue;
                    };
                    assert_eq!(s.entries.len(), quantum_dimension(p, k, meta).unwrap(), "{} k={k}", named.name);
                    for (_, ell) in &s.entries {
                        for h in p.facets() {
                            let v = h.evaluate(ell);
                            if meta {
                                assert!(v > frac(0, 1));
                            } else {
                                assert!(v >= frac(0, 1));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bijection_on_randomized_images() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let seeds = library::planar_seeds::<Q>();
        for _ in 0..25 {
            let base = &seeds[rng.random_range(0..seeds.len())];
            let ops: Vec<(usize, usize, i64)> =
                (0..rng.random_range(0..=5)).map(|_| (rng.random_range(0..2), rng.random_range(0..2), rng.random_range(-2..=2))).collect();
            let a = library::shear_product(2, &ops);
            let t = IntegerVector::from_i64(&[rng.random_range(-3..=3), rng.random_range(-3..=3)]);
            let p = unimodular_image(base, &a, &t).unwrap();
            for k in [1, 2, 3, 5, 8] {
                let r = bijection_check(&p, k, false).unwrap();
                assert!(r.agrees(), "k = {k}: {r:?}");
            }
        }
    }
}
