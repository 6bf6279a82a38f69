use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use toric_core::delzant::{check_prequantizable, check_prequantizable_in, construction_data, half_form_vector, validate_delzant, Unit};
use toric_core::inverse::{isomorphic, limit_polytope, ReconstructionConfig};
use toric_core::io::{
    cloud_to_json, oracle_to_json, parse_clouds, parse_config, parse_deformation, parse_polytope,
    parse_polytope_or_result, polytope_to_json, result_to_json, PolytopeFile,
};
use toric_core::library;
use toric_core::linalg::RationalVector;
use toric_core::oracle::{bijection_check, oracle_spectrum, OracleSpectrum};
use toric_core::spectrum::{
    apply_deformation, inject_noise, metaplectic_spectrum, model_lattice, model_spectrum, weyl_report, NoiseModel,
    SpectrumCloud,
};
use toric_core::{Error, Polytope, Rational};

use crate::files::Touched;
use crate::CliError;

fn load_polytope(path: &Path, touched: &mut Touched) -> Result<PolytopeFile<Rational>, CliError> {
    Ok(parse_polytope(&touched.read(path)?)?)
}

/// Validate, printing the report and failing with exit code 1 if not Delzant.
fn delzant(file: &PolytopeFile<Rational>) -> Result<Polytope, CliError> {
    validate_delzant(&file.polytope).map_err(|report| {
        CliError::Domain(format!("Delzant: INVALID\n{}", report.to_string().trim_end()))
    })
}

fn require_prequantized(p: &Polytope, unit: Unit) -> Result<(), CliError> {
    check_prequantizable_in(p, unit)?;
    Ok(())
}

fn show_vector(v: &RationalVector<Rational>) -> String {
    if v.iter().all(|x| *x == Rational::from_integer(0.into())) {
        "0".into()
    } else {
        v.to_string()
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ValidateArgs {
    /// Polytope JSON file.
    pub polytope: PathBuf,
}

pub fn validate(args: &ValidateArgs, touched: &mut Touched) -> Result<u8, CliError> {
    let file = load_polytope(&args.polytope, touched)?;
    let p = match validate_delzant(&file.polytope) {
        Ok(p) => p,
        Err(report) => {
            println!("Delzant: INVALID");
            print!("{report}");
            return Ok(1);
        }
    };
    let mut offending = Vec::new();
    let prequant = match check_prequantizable_in(&p, file.unit) {
        Ok(c) => format!("c = {}", show_vector(&c)),
        Err(Error::NotPrequantizable { edges }) => {
            offending = edges;
            "no".to_string()
        }
        Err(e) => return Err(e.into()),
    };
    let half = match half_form_vector(&p) {
        Ok(u) => format!("u = ({})", u.iter().map(u8::to_string).collect::<Vec<_>>().join(",")),
        Err(Error::NoHalfForm { certificate }) => format!("none (facets {certificate:?} sum to zero mod 2)"),
        Err(e) => return Err(e.into()),
    };
    println!("Delzant: OK, prequantizable: {prequant}, half-form: {half}");
    for e in &offending {
        println!("  edge {} -> {} has length {} in {}", e.from, e.to, e.length, unit_name(e.unit));
    }
    if let Some(name) = &file.name {
        println!("name: {name}");
    }
    println!("facets: {}, vertices: {}", p.facets().len(), p.vertices().len());
    for v in p.vertices() {
        println!("  vertex {} on facets {:?}", v.point, v.facets);
    }
    Ok(0)
}

fn unit_name(unit: Unit) -> &'static str {
    match unit {
        Unit::TwoPi => "2pi-units",
        Unit::Absolute => "absolute units",
    }
}

fn parse_noise(s: &str) -> Result<(f64, i32), String> {
    let (c, n) = s.split_once(',').ok_or("expected C,N")?;
    let c: f64 = c.trim().parse().map_err(|_| format!("bad noise scale {c:?}"))?;
    let n: i32 = n.trim().parse().map_err(|_| format!("bad noise order {n:?}"))?;
    if !(c.is_finite() && c >= 0.0) {
        return Err("noise scale must be finite and non-negative".into());
    }
    Ok((c, n))
}

#[derive(Args, Debug, Serialize)]
pub struct SpectrumArgs {
    pub polytope: PathBuf,
    /// Semiclassical index (ħ = 1/k).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Use the half-form corrected quantization.
    #[arg(long)]
    pub metaplectic: bool,
    /// Deformation series JSON applied to every point.
    #[arg(long)]
    pub deform: Option<PathBuf>,
    /// Noise of radius C·k^-N, written C,N.
    #[arg(long, value_parser = parse_noise)]
    pub noise: Option<(f64, i32)>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cloud JSON destination; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV of the points, header x1,...,xn.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

fn plot_csv(cloud: &SpectrumCloud) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Domain(format!("csv: {e}"));
    w.write_record((1..=cloud.dim().max(1)).map(|i| format!("x{i}"))).map_err(fail)?;
    for p in &cloud.points {
        w.write_record(p.iter().map(f64::to_string)).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Domain(format!("csv: {e}")))
}

pub fn spectrum(args: &SpectrumArgs, touched: &mut Touched) -> Result<u8, CliError> {
    let file = load_polytope(&args.polytope, touched)?;
    let deformation = match &args.deform {
        Some(path) => Some(parse_deformation::<Rational>(&touched.read(path)?)?),
        None => None,
    };
    let p = delzant(&file)?;
    require_prequantized(&p, file.unit)?;
    let mut cloud = if args.metaplectic { metaplectic_spectrum(&p, args.k)? } else { model_spectrum(&p, args.k)? };
    if let Some(g) = &deformation {
        cloud = apply_deformation(&cloud, g)?;
    }
    if let Some((scale, order)) = args.noise {
        cloud = inject_noise(&cloud, NoiseModel { scale, order }, args.seed);
    }
    let json = cloud_to_json(&cloud)?;
    match &args.out {
        Some(out) => {
            touched.write(out, json.as_bytes())?;
            println!("k = {}: {} points written to {}", cloud.k, cloud.points.len(), out.display());
        }
        None => print!("{json}"),
    }
    if cloud.collisions > 0 {
        eprintln!("warning: {} deformed points coincide with earlier ones", cloud.collisions);
    }
    if let Some(csv_path) = &args.plot_data {
        touched.write(csv_path, &plot_csv(&cloud)?)?;
    }
    Ok(0)
}

#[derive(Args, Debug, Serialize)]
pub struct OracleArgs {
    pub polytope: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long)]
    pub metaplectic: bool,
    /// Oracle spectrum JSON (cloud format plus Fock indices).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn oracle(args: &OracleArgs, touched: &mut Touched) -> Result<u8, CliError> {
    let file = load_polytope(&args.polytope, touched)?;
    let p = delzant(&file)?;
    require_prequantized(&p, file.unit)?;
    let report = bijection_check(&p, args.k, args.metaplectic)?;
    if let Some(out) = &args.out {
        let c = check_prequantizable(&p)?;
        let canonical = p.translate(&c);
        let spectrum = oracle_spectrum(&construction_data(&canonical)?, args.k, args.metaplectic)?;
        let shifted = OracleSpectrum {
            k: spectrum.k,
            entries: spectrum.entries.into_iter().map(|(i, x)| (i, x.sub(&c))).collect(),
        };
        let source = format!("Fock oracle, k = {}{}", args.k, if args.metaplectic { ", metaplectic" } else { "" });
        touched.write(out, oracle_to_json(&shifted, &source)?.as_bytes())?;
    }
    if report.agrees() {
        println!("dim {}, sets identical", report.dimension_lattice);
        Ok(0)
    } else {
        println!(
            "MISMATCH: lattice dim {}, oracle dim {}",
            report.dimension_lattice, report.dimension_oracle
        );
        for x in report.lattice_only.iter().take(5) {
            println!("  lattice only: {x}");
        }
        for (i, x) in report.oracle_only.iter().take(5) {
            println!("  oracle only: {x} from alpha {:?}", i.alpha);
        }
        Ok(1)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ReconstructArgs {
    /// Cloud JSON files (single clouds or bundles).
    #[arg(required = true)]
    pub clouds: Vec<PathBuf>,
    /// Reconstruction config JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn reconstruct(args: &ReconstructArgs, touched: &mut Touched) -> Result<u8, CliError> {
    let cfg = match &args.config {
        Some(path) => parse_config(&touched.read(path)?)?,
        None => ReconstructionConfig::default(),
    };
    let mut clouds = Vec::new();
    for path in &args.clouds {
        clouds.extend(parse_clouds(&touched.read(path)?)?);
    }
    let result = match limit_polytope::<Rational>(&clouds, &cfg) {
        Ok(r) => r,
        Err(Error::SnapExceeded { facet, error, tolerance, raw }) => {
            let raw = serde_json::to_string(&raw).unwrap_or_default();
            return Err(CliError::Domain(format!(
                "reconstruction failed: snap stage: facet {facet} is {error:.3e} from the lattice (tolerance {tolerance:.3e})\nraw polytope: {raw}"
            )));
        }
        Err(e) => return Err(CliError::Domain(format!("reconstruction failed: {e}"))),
    };
    let json = result_to_json(&result);
    print!("{}", result.certificate_text());
    match &args.out {
        Some(out) => touched.write(out, json.as_bytes())?,
        None => print!("{json}"),
    }
    Ok(0)
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    /// Polytope or reconstruction-result JSON.
    pub a: PathBuf,
    pub b: PathBuf,
    /// Compare model spectra for k = 1..kmax.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub kmax: u64,
}

fn spectral_verdict(a: &Polytope, b: &Polytope, kmax: u64) -> Result<String, CliError> {
    if a.dim() != b.dim() {
        return Ok("differ (dimensions differ)".into());
    }
    if check_prequantizable(a).is_err() || check_prequantizable(b).is_err() {
        return Ok("not defined (a polytope is not prequantizable)".into());
    }
    for k in 1..=kmax {
        let (sa, sb) = (model_lattice(a, k)?, model_lattice(b, k)?);
        if sa != sb {
            return Ok(format!("differ at k = {k} ({} vs {} points)", sa.len(), sb.len()));
        }
    }
    Ok(format!("identical for k = 1..{kmax}"))
}

pub fn compare(args: &CompareArgs, touched: &mut Touched) -> Result<u8, CliError> {
    let fa = parse_polytope_or_result::<Rational>(&touched.read(&args.a)?)?;
    let fb = parse_polytope_or_result::<Rational>(&touched.read(&args.b)?)?;
    let (a, b) = (delzant(&fa)?, delzant(&fb)?);
    let same = match isomorphic(&a, &b) {
        Ok(v) => v,
        Err(Error::DimensionMismatch { .. }) => false,
        Err(e) => return Err(e.into()),
    };
    println!("polytopes: {}", if same { "isomorphic" } else { "NOT isomorphic" });
    println!("spectra: {}", spectral_verdict(&a, &b, args.kmax)?);
    Ok(if same { 0 } else { 1 })
}

#[derive(Args, Debug, Serialize)]
pub struct WeylArgs {
    pub polytope: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub kmax: u64,
}

pub fn weyl(args: &WeylArgs, touched: &mut Touched) -> Result<u8, CliError> {
    let file = load_polytope(&args.polytope, touched)?;
    let p = delzant(&file)?;
    require_prequantized(&p, file.unit)?;
    println!("{:>6} {:>12} {:>16} {:>14}", "k", "count", "leading", "relative_gap");
    for k in 1..=args.kmax {
        let r = weyl_report(&p, k)?;
        println!("{:>6} {:>12} {:>16.6} {:>14.6}", r.k, r.count, r.leading, r.relative_gap);
    }
    Ok(0)
}

#[derive(Args, Debug, Serialize)]
pub struct LibraryArgs {
    /// cp1, cp2, square, h<a> (Hirzebruch), simplex<n>x<size>, cube<n>x<side>.
    pub name: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn library_polytope(name: &str) -> Option<Polytope> {
    let pair = |rest: &str| -> Option<(usize, i64)> {
        let (n, s) = rest.split_once('x')?;
        let (n, s): (usize, i64) = (n.parse().ok()?, s.parse().ok()?);
        (n >= 1 && s >= 1).then_some((n, s))
    };
    match name {
        "cp1" => Some(library::cp1()),
        "cp2" => Some(library::cp2()),
        "square" | "cp1xcp1" => Some(library::square()),
        _ => {
            if let Some(a) = name.strip_prefix('h') {
                let a: i64 = a.parse().ok()?;
                return (a >= 0).then(|| library::hirzebruch(a));
            }
            if let Some(rest) = name.strip_prefix("simplex") {
                let (n, s) = pair(rest)?;
                return Some(library::simplex(n, s));
            }
            if let Some(rest) = name.strip_prefix("cube") {
                let (n, s) = pair(rest)?;
                return Some(library::cube(n, s));
            }
            None
        }
    }
}

pub fn library_cmd(args: &LibraryArgs, touched: &mut Touched) -> Result<u8, CliError> {
    let p = library_polytope(&args.name).ok_or_else(|| CliError::Usage(format!("unknown library polytope {:?}", args.name)))?;
    let json = polytope_to_json(&p, Some(&args.name));
    match &args.out {
        Some(out) => touched.write(out, json.as_bytes())?,
        None => print!("{json}"),
    }
    Ok(0)
}
