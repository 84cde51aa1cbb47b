//! Command-line interface: argument parsing and the subcommands.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use lagpolar::convex::ConvexBody;
use lagpolar::extremal::{john, loewner, ExtremalResult};
use lagpolar::linalg;
use lagpolar::polar::{blaschke_santalo_product, polar_dual, santalo_bound, santalo_point, CenterPolicy};
use lagpolar::quantum::{blob_to_gaussian, gaussian_to_blob, standard_form, state_to_blob};
use lagpolar::symplectic::{is_symplectic, PhaseVector};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Value};

use crate::document::{self, from_matrix, Document, Metadata, Object, SCHEMA_VERSION};
use crate::error::{CliError, EXIT_FAILURE};
use crate::figure::{body_figure, state_figure};
use crate::verify::{self, VerifyOptions, VerifyReport};

/// Largest inclusion residual accepted from a John or Löwner certificate.
pub const INCLUSION_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(name = "lagpolar", version, about = "Lagrangian polar duality, extremal ellipsoids and Gaussian quantum states")]
pub struct Cli {
    /// Overrides the document's `metadata.hbar`.
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    /// Overrides the document's `metadata.tol`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Overrides the document's `metadata.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the output here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CenterArg {
    Origin,
    Centroid,
    Santalo,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Polar dual of a body (`-` reads stdin).
    Polar {
        input: String,
        /// Default: the center of symmetry, else the Santaló point.
        #[arg(long, value_enum, conflicts_with = "point")]
        center: Option<CenterArg>,
        /// Explicit center, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Option<Vec<f64>>,
    },
    /// Maximum-volume inscribed ellipsoid.
    John { input: String },
    /// Minimum-volume enclosing ellipsoid.
    Lowner { input: String },
    /// The point minimising the volume of the polar.
    SantaloPoint { input: String },
    /// Volume of a body times the volume of its polar.
    BsProduct {
        input: String,
        #[arg(long, value_enum)]
        center: Option<CenterArg>,
    },
    /// Dual, John ellipsoid (quantum blob) and standard form of a state.
    State { input: String },
    /// Gaussian wavefunction whose Wigner function is carried by a blob.
    BlobToGaussian { input: String },
    /// Quantum blob of a Gaussian wavefunction.
    GaussianToBlob { input: String },
    /// Wigner function of a Gaussian at phase-space points.
    Wigner {
        input: String,
        /// A point `x₁,…,xₙ,p₁,…,pₙ`; repeatable.
        #[arg(long = "at", allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// Figure of an n = 1 state or a planar body.
    Render { input: String },
    /// Run the invariant suites.
    Verify {
        /// Restrict to these suites; repeatable.
        #[arg(long)]
        suite: Vec<String>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

/// What a command produced: the text to emit and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
    /// Explanation printed to stderr when `exit_code` is non-zero.
    pub diagnostic: Option<String>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self {
            text,
            exit_code: 0,
            diagnostic: None,
        }
    }
}

fn read_input(input: &str) -> Result<String, CliError> {
    let io = |e: std::io::Error| CliError::Io {
        path: input.into(),
        message: e.to_string(),
    };
    if input == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(input).map_err(io)
    }
}

fn effective(cli: &Cli, doc: Option<&Document>) -> Result<Metadata, CliError> {
    let base = doc.map(|d| d.metadata.clone()).unwrap_or_default();
    let meta = Metadata {
        hbar: cli.hbar.unwrap_or(base.hbar),
        seed: cli.seed.unwrap_or(base.seed),
        tol: cli.tol.unwrap_or(base.tol),
    };
    if !(meta.hbar > 0.0 && meta.hbar.is_finite()) {
        return Err(CliError::Schema {
            path: "metadata.hbar".into(),
            message: format!("hbar must be positive, found {}", meta.hbar),
        });
    }
    if !(meta.tol > 0.0 && meta.tol.is_finite()) {
        return Err(CliError::Schema {
            path: "metadata.tol".into(),
            message: format!("tol must be positive, found {}", meta.tol),
        });
    }
    Ok(meta)
}

fn vector(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

fn output(object: Object, metadata: Metadata, results: BTreeMap<String, Value>) -> Document {
    Document {
        version: SCHEMA_VERSION.into(),
        object,
        metadata,
        results,
    }
}

fn json_only(cli: &Cli, doc: &Document) -> Result<String, CliError> {
    match cli.format {
        Format::Json => Ok(document::serialize(doc)),
        other => Err(CliError::Unsupported(format!(
            "this command writes JSON documents; --format {other:?} is available for `render` (and csv for `wigner`)"
        ))),
    }
}

fn center_policy(arg: Option<CenterArg>, point: Option<Vec<f64>>, body: &ConvexBody) -> CenterPolicy {
    match (arg, point) {
        (_, Some(p)) => CenterPolicy::Point(DVector::from_vec(p)),
        (Some(CenterArg::Origin), _) => CenterPolicy::Origin,
        (Some(CenterArg::Centroid), _) => CenterPolicy::Centroid,
        (Some(CenterArg::Santalo), _) => CenterPolicy::Santalo,
        (None, None) => CenterPolicy::default_for(body),
    }
}

/// Bodies are written with the run's `ℏ` so that documents stay consistent.
fn body_object(body: &ConvexBody, hbar: f64) -> Result<Object, CliError> {
    match body {
        ConvexBody::Ellipsoid(e) => Object::from_body(&ConvexBody::from(e.with_hbar(hbar)?)),
        other => Object::from_body(other),
    }
}

fn extremal_outcome(cli: &Cli, r: ExtremalResult, meta: Metadata) -> Result<Outcome, CliError> {
    let e = r.ellipsoid.with_hbar(meta.hbar)?;
    let mut results = BTreeMap::new();
    results.insert("kind".into(), json!(r.kind.name()));
    results.insert("volume".into(), json!(r.certificate.volume));
    results.insert("inclusion_residual".into(), json!(r.certificate.inclusion_residual));
    results.insert("sampled".into(), json!(r.certificate.sampled));
    results.insert("iterations".into(), json!(r.iterations));
    let doc = output(Object::from_body(&ConvexBody::from(e))?, meta, results);
    let text = json_only(cli, &doc)?;
    if r.certificate.inclusion_residual > INCLUSION_TOL {
        return Ok(Outcome {
            text,
            exit_code: EXIT_FAILURE,
            diagnostic: Some(format!(
                "{} certificate failed: inclusion residual {:e} exceeds {INCLUSION_TOL:e}",
                r.kind.name(),
                r.certificate.inclusion_residual
            )),
        });
    }
    Ok(Outcome::ok(text))
}

fn parse_point(s: &str, n: usize) -> Result<PhaseVector, CliError> {
    let bad = |message: String| CliError::Schema {
        path: "--at".into(),
        message,
    };
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| bad(format!("`{t}`: {e}"))))
        .collect::<Result<Vec<f64>, CliError>>()?;
    if v.len() != 2 * n {
        return Err(bad(format!("expected {} coordinates, found {}", 2 * n, v.len())));
    }
    Ok(PhaseVector::from_slice(&v)?)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    version: &'a str,
    metadata: Metadata,
    #[serde(flatten)]
    report: &'a VerifyReport,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let load = |input: &str| -> Result<(Document, Metadata), CliError> {
        let doc = document::parse(&read_input(input)?)?;
        let meta = effective(cli, Some(&doc))?;
        Ok((doc, meta))
    };
    match &cli.command {
        Command::Polar { input, center, point } => {
            let (doc, meta) = load(input)?;
            let body = doc.object.to_body(meta.hbar)?;
            let policy = center_policy(*center, point.clone(), &body);
            let c = lagpolar::polar::resolve_center(&body, meta.hbar, &policy)?;
            let dual = polar_dual(&body, meta.hbar, &CenterPolicy::Point(c.clone()))?;
            let mut results = BTreeMap::new();
            results.insert("center".into(), vector(&c));
            results.insert("center_policy".into(), json!(policy.name()));
            let doc = output(body_object(&dual, meta.hbar)?, meta, results);
            Ok(Outcome::ok(json_only(cli, &doc)?))
        }
        Command::John { input } | Command::Lowner { input } => {
            let (doc, meta) = load(input)?;
            let body = doc.object.to_body(meta.hbar)?;
            let r = if matches!(cli.command, Command::John { .. }) {
                john(&body)?
            } else {
                loewner(&body)?
            };
            extremal_outcome(cli, r, meta)
        }
        Command::SantaloPoint { input } => {
            let (doc, meta) = load(input)?;
            let body = doc.object.to_body(meta.hbar)?;
            let sp = santalo_point(&body, meta.hbar)?;
            let mut results = BTreeMap::new();
            results.insert("polar_volume".into(), json!(sp.polar_volume));
            results.insert("iterations".into(), json!(sp.iterations));
            let object = Object::Point {
                coords: sp.point.iter().copied().collect(),
            };
            Ok(Outcome::ok(json_only(cli, &output(object, meta, results))?))
        }
        Command::BsProduct { input, center } => {
            let (doc, meta) = load(input)?;
            let body = doc.object.to_body(meta.hbar)?;
            let policy = center_policy(*center, None, &body);
            let v = blaschke_santalo_product(&body, meta.hbar, &policy)?;
            let n = body.dim();
            let bound = santalo_bound(n, meta.hbar);
            let factorial: f64 = (1..=n).map(|k| k as f64).product();
            let mut results = BTreeMap::new();
            results.insert("center".into(), vector(&v.center));
            results.insert("center_policy".into(), json!(policy.name()));
            results.insert("volume".into(), json!(v.volume.value));
            results.insert("polar_volume".into(), json!(v.polar_volume.value));
            results.insert("exact".into(), json!(v.volume.is_exact() && v.polar_volume.is_exact()));
            results.insert("product".into(), json!(v.product));
            results.insert("santalo_bound".into(), json!(bound));
            results.insert("mahler_bound".into(), json!((4.0 * meta.hbar).powi(n as i32) / factorial));
            let symmetric = body.symmetry_center(lagpolar::polar::TOL_SYMMETRY).is_some();
            let violated = symmetric && v.volume.is_exact() && v.polar_volume.is_exact() && v.product > bound * (1.0 + meta.tol);
            let text = json_only(cli, &output(doc.object.clone(), meta, results))?;
            if violated {
                return Ok(Outcome {
                    text,
                    exit_code: EXIT_FAILURE,
                    diagnostic: Some(format!("volume product {} exceeds the bound {bound}", v.product)),
                });
            }
            Ok(Outcome::ok(text))
        }
        Command::State { input } => {
            let (doc, meta) = load(input)?;
            let state = doc.object.to_state(meta.hbar)?;
            let n = state.n();
            let blob = state_to_blob(&state)?;
            let sf = standard_form(&state)?;
            let mut results = BTreeMap::new();
            results.insert("center".into(), vector(state.center().as_vector()));
            results.insert("dual_shape".into(), json!(from_matrix(state.dual().shape())));
            results.insert("blob_G".into(), json!(from_matrix(blob.g())));
            results.insert("standard_form_S".into(), json!(from_matrix(sf.s.matrix())));
            results.insert("standard_form_x0".into(), vector(&sf.x0));
            results.insert("standard_form_p0".into(), vector(&sf.p0));
            let volume = state.body().volume() * state.dual().volume() * linalg::hstack(&[state.frame().ell.basis(), state.frame().ell_prime.basis()]).determinant().abs();
            results.insert("volume".into(), json!(volume));
            results.insert("blob_volume".into(), json!(blob.ellipsoid().volume()));
            if n == 1 {
                results.insert("parallelogram_area".into(), json!(volume));
            }
            if state.is_centered() {
                let psi = blob_to_gaussian(&blob)?;
                results.insert("gaussian_A".into(), json!(from_matrix(psi.a())));
                results.insert("gaussian_B".into(), json!(from_matrix(psi.b())));
            }
            Ok(Outcome::ok(json_only(cli, &output(doc.object.clone(), meta, results))?))
        }
        Command::BlobToGaussian { input } => {
            let (doc, meta) = load(input)?;
            let q = doc.object.to_blob(meta.hbar)?;
            let psi = blob_to_gaussian(&q)?;
            let mut results = BTreeMap::new();
            results.insert("phase".into(), json!(psi.phase()));
            Ok(Outcome::ok(json_only(cli, &output(Object::from_gaussian(&psi), meta, results))?))
        }
        Command::GaussianToBlob { input } => {
            let (doc, meta) = load(input)?;
            let psi = doc.object.to_gaussian(meta.hbar)?;
            let q = gaussian_to_blob(&psi)?;
            let mut results = BTreeMap::new();
            results.insert("symplectic_residual".into(), json!(is_symplectic(q.g(), meta.tol)?.residual));
            results.insert("det_G".into(), json!(q.g().determinant()));
            Ok(Outcome::ok(json_only(cli, &output(Object::from_blob(&q), meta, results))?))
        }
        Command::Wigner { input, at } => {
            let (doc, meta) = load(input)?;
            let psi = doc.object.to_gaussian(meta.hbar)?;
            let w = psi.wigner_function();
            let points = at.iter().map(|s| parse_point(s, psi.n())).collect::<Result<Vec<_>, _>>()?;
            let values = points.iter().map(|z| w.eval(z)).collect::<Result<Vec<f64>, _>>()?;
            match cli.format {
                Format::Csv => {
                    let n = psi.n();
                    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
                    header.extend((1..=n).map(|i| format!("p{i}")));
                    header.push("w".into());
                    let mut text = header.join(",") + "\n";
                    for (z, v) in points.iter().zip(&values) {
                        let row: Vec<String> = z.as_vector().iter().chain(std::iter::once(v)).map(f64::to_string).collect();
                        text += &(row.join(",") + "\n");
                    }
                    Ok(Outcome::ok(text))
                }
                _ => {
                    let mut results = BTreeMap::new();
                    results.insert("normalization".into(), json!(w.normalization()));
                    results.insert("G".into(), json!(from_matrix(&w.g)));
                    results.insert(
                        "points".into(),
                        json!(points.iter().map(|z| z.as_vector().iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>()),
                    );
                    results.insert("values".into(), json!(values));
                    Ok(Outcome::ok(json_only(cli, &output(doc.object.clone(), meta, results))?))
                }
            }
        }
        Command::Render { input } => {
            let (doc, meta) = load(input)?;
            let figure = match &doc.object {
                Object::State { .. } => state_figure(&doc.object.to_state(meta.hbar)?)?,
                Object::Ellipsoid { .. } | Object::Polytope { .. } => body_figure(&doc.object.to_body(meta.hbar)?, meta.hbar)?,
                other => {
                    return Err(CliError::Schema {
                        path: "object.type".into(),
                        message: format!("render draws states and bodies, found {}", other.type_name()),
                    })
                }
            };
            let text = match cli.format {
                Format::Svg => figure.to_svg(),
                Format::Csv => figure.to_csv(),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&json!({
                        "version": SCHEMA_VERSION,
                        "metadata": meta,
                        "figure": figure,
                    }))
                    .expect("finite figure");
                    s.push('\n');
                    s
                }
            };
            Ok(Outcome::ok(text))
        }
        Command::Verify { suite, inject_fault } => {
            let meta = effective(cli, None)?;
            let opts = VerifyOptions {
                seed: meta.seed,
                hbar: meta.hbar,
                inject_fault: *inject_fault,
            };
            let report = verify::run(suite, &opts)?;
            let out = VerifyOutput {
                version: SCHEMA_VERSION,
                metadata: meta,
                report: &report,
            };
            let mut text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&out).expect("finite report"),
                other => return Err(CliError::Unsupported(format!("verify writes JSON, not {other:?}"))),
            };
            text.push('\n');
            if report.passed {
                return Ok(Outcome::ok(text));
            }
            let failed: Vec<String> = report
                .suites
                .iter()
                .flat_map(|s| s.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}: {}", s.suite, c.name)))
                .collect();
            Ok(Outcome {
                text,
                exit_code: EXIT_FAILURE,
                diagnostic: Some(format!("failed checks: {}", failed.join("; "))),
            })
        }
    }
}
