use thiserror::Error;

use crate::delzant::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero vector has no primitive part or length")]
    ZeroVector,
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: String },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope is not full-dimensional")]
    NotFullDimensional,
    #[error("polytope is not simple: vertex {vertex} lies on facets {facets:?}")]
    NotSimple { vertex: String, facets: Vec<usize> },
    #[error("point set is empty")]
    EmptySet,
    #[error("input cannot be expressed exactly: {0}")]
    Irrational(String),
    #[error("not prequantizable: {} offending edge(s)", .edges.len())]
    NotPrequantizable { edges: Vec<crate::delzant::EdgeReport> },
    #[error("offsets are not integral in 2pi-units; translate by the prequantization vector first")]
    NotPrequantized,
    #[error("no half-form bundle: facets {certificate:?} sum to 0 = 1 over GF(2)")]
    NoHalfForm { certificate: Vec<usize> },
    #[error("not a Delzant polytope:\n{0}")]
    NotDelzant(Box<ValidationReport>),
    #[error("point lies outside the polytope")]
    OutOfPolytope,
    #[error("inconsistent linear system at index {0:?}")]
    InconsistentSystem(Vec<i64>),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("hull stage: point cloud is not full-dimensional")]
    HullDegenerate,
    #[error("rationalization stage: no primitive normal with denominators <= {bound} fits hull facet with normal {normal:?}")]
    RationalizationFailed { bound: u64, normal: Vec<f64> },
    #[error("snap stage: offset of facet {facet} is {error:.3e} from the lattice, tolerance {tolerance:.3e}")]
    SnapExceeded {
        facet: usize,
        error: f64,
        tolerance: f64,
        raw: RawPolytope,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Unsnapped halfspaces reported when snapping fails: normals, absolute offsets.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RawPolytope {
    pub normals: Vec<Vec<i64>>,
    pub offsets: Vec<f64>,
}
