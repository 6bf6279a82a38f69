//! JSON file formats. Every document may carry `"schema": 1`; other
//! versions and unknown fields are rejected.

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::{json, Value};

use crate::delzant::{DelzantPolytope, Unit};
use crate::error::{Error, Result};
use crate::inverse::{ReconstructionConfig, ReconstructionResult};
use crate::linalg::IntegerVector;
use crate::oracle::OracleSpectrum;
use crate::polytope::{HPolytope, Halfspace};
use crate::scalar::{format_exact, parse_exact, ExactField};
use crate::spectrum::{to_absolute, DeformationSeries, Polynomial, SpectrumCloud};

pub const SCHEMA_VERSION: u64 = 1;

fn parse_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

/// Parse `text`, check and strip the optional schema field.
fn load(text: &str) -> Result<Value> {
    let mut value: Value = serde_json::from_str(text).map_err(parse_err)?;
    strip_schema(&mut value)?;
    Ok(value)
}

fn strip_schema(value: &mut Value) -> Result<()> {
    let Value::Object(map) = value else {
        return Err(Error::Parse("expected a JSON object".into()));
    };
    match map.remove("schema") {
        None => Ok(()),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(Error::Parse(format!("unsupported schema version {v}"))),
    }
}

fn rational<R: ExactField>(v: &Value, what: &str) -> Result<R> {
    match v {
        Value::String(s) => parse_exact(s).ok_or_else(|| Error::Parse(format!("{what}: cannot parse {s:?} as a rational"))),
        Value::Number(n) if n.is_i64() || n.is_u64() => parse_exact(&n.to_string()).ok_or_else(|| Error::Parse(format!("{what}: bad integer"))),
        other => Err(Error::Parse(format!("{what}: expected an exact rational string like \"p/q\", got {other}"))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FacetDoc {
    normal: Vec<i64>,
    offset: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeDoc {
    dim: usize,
    #[serde(default)]
    unit: Unit,
    facets: Vec<FacetDoc>,
    #[serde(default)]
    name: Option<String>,
}

/// A polytope file: halfspaces as written, before Delzant validation.
#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeFile<R> {
    pub name: Option<String>,
    pub unit: Unit,
    pub polytope: HPolytope<R>,
}

pub fn parse_polytope<R: ExactField>(text: &str) -> Result<PolytopeFile<R>> {
    polytope_from_value(load(text)?)
}

fn polytope_from_value<R: ExactField>(value: Value) -> Result<PolytopeFile<R>> {
    let doc: PolytopeDoc = serde_json::from_value(value).map_err(parse_err)?;
    let halfspaces = doc
        .facets
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let offset = rational(&f.offset, &format!("facet {i} offset"))?;
            Ok(Halfspace::new(IntegerVector::from_i64(&f.normal), offset))
        })
        .collect::<Result<Vec<_>>>()?;
    let polytope = HPolytope::new(doc.dim, halfspaces).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(PolytopeFile { name: doc.name, unit: doc.unit, polytope })
}

pub fn polytope_value<R: ExactField>(p: &HPolytope<R>, name: Option<&str>, unit: Unit) -> Value {
    let facets: Vec<Value> = p
        .halfspaces()
        .iter()
        .map(|h| {
            let normal: Vec<Value> = h.normal.iter().map(|x| Value::from(x.to_string().parse::<i64>().unwrap_or(0))).collect();
            json!({ "normal": normal, "offset": format_exact(&h.offset) })
        })
        .collect();
    let mut doc = json!({ "schema": SCHEMA_VERSION, "dim": p.dim(), "unit": unit, "facets": facets });
    if let Some(name) = name {
        doc["name"] = Value::from(name);
    }
    doc
}

/// Polytope document with one facet per line.
pub fn hpolytope_to_json<R: ExactField>(p: &HPolytope<R>, name: Option<&str>, unit: Unit) -> String {
    let doc = polytope_value(p, name, unit);
    let mut out = format!("{{\n  \"schema\": {SCHEMA_VERSION},\n");
    if let Some(name) = name {
        out.push_str(&format!("  \"name\": {},\n", Value::from(name)));
    }
    out.push_str(&format!("  \"dim\": {},\n  \"unit\": {},\n  \"facets\": [\n", p.dim(), doc["unit"]));
    let facets = doc["facets"].as_array().expect("facets array");
    for (i, f) in facets.iter().enumerate() {
        let sep = if i + 1 < facets.len() { "," } else { "" };
        out.push_str(&format!("    {{\"normal\": {}, \"offset\": {}}}{sep}\n", f["normal"], f["offset"]));
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn polytope_to_json<R: ExactField>(p: &DelzantPolytope<R>, name: Option<&str>) -> String {
    hpolytope_to_json(p.polytope(), name, Unit::TwoPi)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// `x` with 17 significant digits.
fn float17(x: f64) -> Result<Box<RawValue>> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("cannot write non-finite coordinate {x}")));
    }
    Ok(RawValue::from_string(format!("{x:.16e}")).expect("scientific notation is valid JSON"))
}

fn points17(points: &[Vec<f64>]) -> Result<Vec<Vec<Box<RawValue>>>> {
    points.iter().map(|p| p.iter().map(|&x| float17(x)).collect()).collect()
}

#[derive(Serialize)]
struct CloudOut<'a> {
    schema: u64,
    k: u64,
    points: Vec<Vec<Box<RawValue>>>,
    exact: bool,
    source: &'a str,
    #[serde(skip_serializing_if = "is_zero")]
    collisions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<Vec<Value>>>,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CloudDoc {
    k: u64,
    points: Vec<Vec<f64>>,
    #[serde(default)]
    exact: bool,
    #[serde(default)]
    source: String,
    #[serde(default)]
    collisions: usize,
}

pub fn cloud_to_json(cloud: &SpectrumCloud) -> Result<String> {
    let out = CloudOut {
        schema: SCHEMA_VERSION,
        k: cloud.k,
        points: points17(&cloud.points)?,
        exact: cloud.exact,
        source: &cloud.source,
        collisions: cloud.collisions,
        alpha: None,
    };
    let mut s = serde_json::to_string(&out).map_err(parse_err)?;
    s.push('\n');
    Ok(s)
}

fn cloud_from_value(value: Value) -> Result<SpectrumCloud> {
    let doc: CloudDoc = serde_json::from_value(value).map_err(parse_err)?;
    Ok(SpectrumCloud { k: doc.k, points: doc.points, exact: doc.exact, source: doc.source, collisions: doc.collisions })
}

pub fn parse_cloud(text: &str) -> Result<SpectrumCloud> {
    cloud_from_value(load(text)?)
}

/// One cloud, or a bundle `{"clouds": [...]}`.
pub fn parse_clouds(text: &str) -> Result<Vec<SpectrumCloud>> {
    let mut value = load(text)?;
    match value.as_object_mut().and_then(|m| m.remove("clouds")) {
        Some(Value::Array(items)) => {
            if value.as_object().is_some_and(|m| !m.is_empty()) {
                return Err(Error::Parse("a cloud bundle has only the \"clouds\" field".into()));
            }
            items
                .into_iter()
                .map(|mut c| {
                    strip_schema(&mut c)?;
                    cloud_from_value(c)
                })
                .collect()
        }
        Some(_) => Err(Error::Parse("\"clouds\" must be an array".into())),
        None => Ok(vec![cloud_from_value(value)?]),
    }
}

/// Oracle spectrum in the cloud format, with the Fock index of each point.
pub fn oracle_to_json<R: ExactField>(spectrum: &OracleSpectrum<R>, source: &str) -> Result<String> {
    let points: Vec<_> = spectrum.entries.iter().map(|(_, x)| x.clone()).collect();
    let alpha = spectrum
        .entries
        .iter()
        .map(|(idx, _)| {
            idx.alpha
                .iter()
                .map(|&a| if idx.half_shifted { Value::from(format!("{}/2", 2 * a + 1)) } else { Value::from(a) })
                .collect()
        })
        .collect();
    let out = CloudOut {
        schema: SCHEMA_VERSION,
        k: spectrum.k,
        points: points17(&to_absolute(&points))?,
        exact: true,
        source,
        collisions: 0,
        alpha: Some(alpha),
    };
    let mut s = serde_json::to_string(&out).map_err(parse_err)?;
    s.push('\n');
    Ok(s)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    coeff: Value,
    powers: Vec<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeformationDoc {
    dim: usize,
    coefficients: Vec<Vec<Vec<TermDoc>>>,
}

/// `{"dim": n, "coefficients": [g_1, g_2, ...]}`, each `g_j` a list of `n`
/// polynomials, each a list of `{"coeff": "p/q", "powers": [..]}` terms in
/// the absolute coordinates.
pub fn parse_deformation<R: ExactField>(text: &str) -> Result<DeformationSeries<R>> {
    let doc: DeformationDoc = serde_json::from_value(load(text)?).map_err(parse_err)?;
    let mut coefficients = Vec::with_capacity(doc.coefficients.len());
    for (j, g) in doc.coefficients.iter().enumerate() {
        if g.len() != doc.dim {
            return Err(Error::Parse(format!("g_{} has {} components, expected {}", j + 1, g.len(), doc.dim)));
        }
        let mut components = Vec::with_capacity(doc.dim);
        for (i, poly) in g.iter().enumerate() {
            let terms = poly
                .iter()
                .map(|t| {
                    if t.powers.len() != doc.dim {
                        return Err(Error::Parse(format!("g_{} component {i}: powers must have length {}", j + 1, doc.dim)));
                    }
                    Ok((rational(&t.coeff, "coefficient")?, t.powers.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            components.push(Polynomial { terms });
        }
        coefficients.push(components);
    }
    Ok(DeformationSeries { dim: doc.dim, coefficients })
}

pub fn deformation_to_json<R: ExactField>(g: &DeformationSeries<R>) -> String {
    let coefficients: Vec<Value> = g
        .coefficients
        .iter()
        .map(|gj| {
            Value::Array(
                gj.iter()
                    .map(|p| {
                        Value::Array(
                            p.terms.iter().map(|(c, pw)| json!({ "coeff": format_exact(c), "powers": pw })).collect(),
                        )
                    })
                    .collect(),
            )
        })
        .collect();
    pretty(&json!({ "schema": SCHEMA_VERSION, "dim": g.dim, "coefficients": coefficients }))
}

pub fn parse_config(text: &str) -> Result<ReconstructionConfig> {
    let cfg: ReconstructionConfig = serde_json::from_value(load(text)?).map_err(parse_err)?;
    cfg.validate().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(cfg)
}

pub fn result_to_json<R: ExactField>(r: &ReconstructionResult<R>) -> String {
    let residuals: Vec<Value> = r.per_k_residuals.iter().map(|(k, d)| json!({ "k": k, "distance": d })).collect();
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "polytope": polytope_value(r.polytope.polytope(), Some("reconstructed"), Unit::TwoPi),
        "translation_used": r.translation_used.iter().map(format_exact).collect::<Vec<_>>(),
        "per_k_residuals": residuals,
        "rate_fit": r.rate_fit,
        "stages": r.certificate.stages,
        "certificate": r.certificate_text(),
    });
    pretty(&doc)
}

/// The polytope inside a reconstruction result, or a plain polytope file.
pub fn parse_polytope_or_result<R: ExactField>(text: &str) -> Result<PolytopeFile<R>> {
    let mut value = load(text)?;
    match value.as_object_mut().and_then(|m| m.remove("polytope")) {
        Some(mut inner) => {
            strip_schema(&mut inner)?;
            polytope_from_value(inner)
        }
        None => polytope_from_value(value),
    }
}
