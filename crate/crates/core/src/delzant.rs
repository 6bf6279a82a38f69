//! Delzant polytopes: validation, prequantization and half-form criteria,
//! and the integer data of the Delzant construction.
//!
//! Facets are stored inward: the polytope is `{ξ : <X_f, ξ> + λ_f >= 0}`
//! with primitive integer `X_f`. Offsets and vertices are in 2π-units.

use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{integer_kernel_basis, smith_invariants, IntegerMatrix, IntegerVector, RationalVector};
use crate::polytope::{edges, HPolytope, Halfspace, Vertex};
use crate::scalar::{format_exact, ExactField};

pub type Facet<R> = Halfspace<R>;

/// Unit in which polytope coordinates are written.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
pub enum Unit {
    /// A stored value `x` means `2*pi*x`.
    #[default]
    #[serde(rename = "2pi")]
    TwoPi,
    /// Stored values are absolute; prequantization is then impossible
    /// because a nonzero rational is never an integer multiple of 2π.
    #[serde(rename = "absolute")]
    Absolute,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelzantPolytope<R> {
    polytope: HPolytope<R>,
    vertices: Vec<Vertex<R>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonPrimitiveNormal { facet: usize, gcd: String },
    Unbounded,
    NotFullDimensional,
    RedundantFacet { facet: usize },
    NotSimple { vertex: String, facets: Vec<usize> },
    NotUnimodular { vertex: String, facets: Vec<usize>, det: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPrimitiveNormal { facet, gcd } => {
                write!(f, "facet {facet}: normal is not primitive (gcd {gcd})")
            }
            Self::Unbounded => write!(f, "polytope is unbounded"),
            Self::NotFullDimensional => write!(f, "polytope is empty or not full-dimensional"),
            Self::RedundantFacet { facet } => write!(f, "facet {facet}: halfspace touches no vertex"),
            Self::NotSimple { vertex, facets } => {
                write!(f, "vertex {vertex}: lies on {} facets {facets:?}", facets.len())
            }
            Self::NotUnimodular { vertex, facets, det } => {
                write!(f, "vertex {vertex}: normals of facets {facets:?} have det = {det}")
            }
        }
    }
}

/// Every violated Delzant condition, collected rather than thrown.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeReport {
    pub from: String,
    pub to: String,
    pub length: String,
    pub unit: Unit,
}

/// Check every Delzant condition on `candidate`.
pub fn validate_delzant<R: ExactField>(
    candidate: &HPolytope<R>,
) -> std::result::Result<DelzantPolytope<R>, ValidationReport> {
    let mut report = ValidationReport::default();
    for (i, h) in candidate.halfspaces().iter().enumerate() {
        let g = h.normal.gcd();
        if !g.is_one() {
            report.violations.push(Violation::NonPrimitiveNormal { facet: i, gcd: g.to_string() });
        }
    }
    if !candidate.is_bounded() {
        report.violations.push(Violation::Unbounded);
        return Err(report);
    }
    let vertices = candidate.candidate_vertices();
    let n = candidate.dim();
    let facet_count = candidate.halfspaces().len();
    let never_strict = (0..facet_count).any(|f| vertices.iter().all(|v| v.facets.contains(&f)));
    if vertices.is_empty() || never_strict {
        report.violations.push(Violation::NotFullDimensional);
        return Err(report);
    }
    for f in 0..facet_count {
        if !vertices.iter().any(|v| v.facets.contains(&f)) {
            report.violations.push(Violation::RedundantFacet { facet: f });
        }
    }
    for v in &vertices {
        if v.facets.len() != n {
            report.violations.push(Violation::NotSimple {
                vertex: v.point.to_string(),
                facets: v.facets.clone(),
            });
            continue;
        }
        let rows: Vec<IntegerVector> =
            v.facets.iter().map(|&f| candidate.halfspaces()[f].normal.clone()).collect();
        let det = IntegerMatrix::from_rows(&rows).determinant().expect("square");
        if !det.abs().is_one() {
            report.violations.push(Violation::NotUnimodular {
                vertex: v.point.to_string(),
                facets: v.facets.clone(),
                det: det.to_string(),
            });
        }
    }
    if report.is_ok() {
        Ok(DelzantPolytope { polytope: candidate.clone(), vertices })
    } else {
        Err(report)
    }
}

impl<R: ExactField> DelzantPolytope<R> {
    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    pub fn facets(&self) -> &[Facet<R>] {
        self.polytope.halfspaces()
    }

    /// Vertices sorted lexicographically, each with its active facet set.
    pub fn vertices(&self) -> &[Vertex<R>] {
        &self.vertices
    }

    pub fn polytope(&self) -> &HPolytope<R> {
        &self.polytope
    }

    pub fn contains(&self, x: &[R]) -> bool {
        self.polytope.contains(x)
    }

    pub fn translate(&self, t: &[R]) -> Self {
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex { point: v.point.add(t), facets: v.facets.clone() })
            .collect();
        Self { polytope: self.polytope.translate(t), vertices }
    }

    /// Vertex pairs joined by an edge.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        edges(self.dim(), &self.vertices)
    }

    pub fn volume(&self) -> R {
        crate::polytope::volume_of_simple(self.dim(), self.facets().len(), &self.vertices)
    }

    pub fn lattice_points(&self, scale: &R, offset: &[R]) -> Vec<RationalVector<R>> {
        self.polytope.lattice_points_with(&self.vertices, scale, offset)
    }

    /// Facets sorted by `(normal, offset)`: the canonical form used for equality.
    pub fn normalized_facets(&self) -> Vec<Facet<R>> {
        let mut f = self.facets().to_vec();
        f.sort();
        f
    }

    /// Largest value of `<X_f, ξ> + λ_f` over the polytope, attained at a vertex.
    pub fn facet_height(&self, f: usize) -> R {
        let h = &self.facets()[f];
        self.vertices.iter().map(|v| h.evaluate(&v.point)).max().expect("vertices")
    }
}

/// The smallest positive `l` with `e / l` a (primitive) integer vector.
pub fn edge_length<R: ExactField>(e: &[R]) -> Result<R> {
    if e.iter().all(Zero::is_zero) {
        return Err(Error::ZeroVector);
    }
    let lcm = e.iter().fold(BigInt::one(), |acc, x| acc.lcm(&x.denom_big()));
    let g = e
        .iter()
        .map(|x| x.numer_big() * (&lcm / x.denom_big()))
        .fold(BigInt::zero(), |acc, x| acc.gcd(&x));
    Ok(R::from_fraction(&g, &lcm))
}

/// Translation `c` making every vertex of `P + c` integral (in 2π-units):
/// `c = -v0` for the lexicographically smallest vertex `v0`.
pub fn check_prequantizable<R: ExactField>(p: &DelzantPolytope<R>) -> Result<RationalVector<R>> {
    check_prequantizable_in(p, Unit::TwoPi)
}

pub fn check_prequantizable_in<R: ExactField>(p: &DelzantPolytope<R>, unit: Unit) -> Result<RationalVector<R>> {
    let mut offending = Vec::new();
    for (a, b) in p.edges() {
        let e = p.vertices[b].point.sub(&p.vertices[a].point);
        let length = edge_length(&e)?;
        if unit == Unit::Absolute || !length.is_integral() {
            offending.push(EdgeReport {
                from: p.vertices[a].point.to_string(),
                to: p.vertices[b].point.to_string(),
                length: format_exact(&length),
                unit,
            });
        }
    }
    if !offending.is_empty() {
        return Err(Error::NotPrequantizable { edges: offending });
    }
    let c = p.vertices[0].point.neg();
    debug_assert!(p.vertices.iter().all(|v| v.point.add(&c).is_integral()));
    if !p.vertices.iter().all(|v| v.point.add(&c).is_integral()) {
        return Err(Error::InvalidInput("edge lengths integral but vertices are not congruent".into()));
    }
    Ok(c)
}

/// The class `u ∈ {0,1}^n` of integer vectors `γ` with `<γ, X_f>` odd for every facet.
pub fn half_form_vector<R: ExactField>(p: &DelzantPolytope<R>) -> Result<Vec<u8>> {
    let n = p.dim();
    let normals: Vec<Vec<u8>> = p
        .facets()
        .iter()
        .map(|f| f.normal.iter().map(|x| u8::from(x.is_odd())).collect())
        .collect();
    solve_gf2_all_ones(&normals, n).map_err(|certificate| Error::NoHalfForm { certificate })
}

/// Solve `A γ = 1` over GF(2). On failure returns the rows whose sum gives `0 = 1`.
pub(crate) fn solve_gf2_all_ones(rows: &[Vec<u8>], n: usize) -> std::result::Result<Vec<u8>, Vec<usize>> {
    let m = rows.len();
    // [coefficients | rhs | combination of original rows]
    let mut a: Vec<Vec<u8>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.push(1);
            row.extend((0..m).map(|j| u8::from(i == j)));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m).find(|&i| a[i][col] == 1) else { continue };
        a.swap(r, p);
        for i in 0..m {
            if i != r && a[i][col] == 1 {
                let pivot_row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                    *x ^= y;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if let Some(bad) = (r..m).find(|&i| a[i][n] == 1) {
        return Err((0..m).filter(|&j| a[bad][n + 1 + j] == 1).collect());
    }
    let mut gamma = vec![0u8; n];
    for (row, &col) in pivots.iter().enumerate() {
        gamma[col] = a[row][n];
    }
    Ok(gamma)
}

/// Exact equality as point sets (same normalized facet list).
pub fn polytope_equal<R: ExactField>(a: &DelzantPolytope<R>, b: &DelzantPolytope<R>) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(a.normalized_facets() == b.normalized_facets())
}

/// Integer data of the Delzant construction for a prequantized polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionData<R> {
    /// `n x |F|`, column `f` is `X_f`.
    pub pi: IntegerMatrix,
    /// `|F| x (|F| - n)`, columns form a Z-basis of `ker pi`.
    pub kernel_basis: IntegerMatrix,
    /// The offsets `λ_f` in facet order.
    pub lambda: RationalVector<R>,
    pub base_vertex: RationalVector<R>,
}

pub fn construction_data<R: ExactField>(p: &DelzantPolytope<R>) -> Result<ConstructionData<R>> {
    if !p.facets().iter().all(|f| f.offset.is_integral()) {
        return Err(Error::NotPrequantized);
    }
    let n = p.dim();
    let normals: Vec<IntegerVector> = p.facets().iter().map(|f| f.normal.clone()).collect();
    let pi = IntegerMatrix::from_columns(&normals, n);
    let invariants = smith_invariants(&pi);
    if invariants.len() != n || !invariants.iter().all(One::is_one) {
        return Err(Error::InvalidInput(format!(
            "facet normals do not generate Z^{n} (Smith invariants {invariants:?})"
        )));
    }
    let kernel_basis = integer_kernel_basis(&pi);
    debug_assert_eq!(kernel_basis.cols(), normals.len() - n);
    Ok(ConstructionData {
        pi,
        kernel_basis,
        lambda: RationalVector(p.facets().iter().map(|f| f.offset.clone()).collect()),
        base_vertex: p.vertices()[0].point.clone(),
    })
}

/// The image `{A ξ + t : ξ ∈ P}` under a unimodular `A` and integer shift `t`.
pub fn unimodular_image<R: ExactField>(
    p: &DelzantPolytope<R>,
    a: &IntegerMatrix,
    t: &IntegerVector,
) -> Result<DelzantPolytope<R>> {
    if a.rows() != p.dim() || t.len() != p.dim() {
        return Err(Error::DimensionMismatch { left: p.dim(), right: a.rows() });
    }
    let det = a.determinant()?;
    if !det.abs().is_one() {
        return Err(Error::NotUnimodular { det: det.to_string() });
    }
    // <X, ξ> + λ >= 0 with ξ = A⁻¹(η - t) becomes <A⁻ᵀX, η> + λ - <A⁻ᵀX, t> >= 0.
    let inv_t = a.unimodular_inverse()?.transpose();
    let halfspaces = p
        .facets()
        .iter()
        .map(|f| {
            let normal = inv_t.mul_vec(&f.normal);
            let offset = f.offset.clone() - R::from_bigint(&normal.dot_int(t));
            Halfspace::new(normal, offset)
        })
        .collect_vec();
    let image = HPolytope::new(p.dim(), halfspaces)?;
    validate_delzant(&image).map_err(|r| Error::NotDelzant(Box::new(r)))
}
