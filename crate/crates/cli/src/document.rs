//! JSON documents: a versioned envelope around one geometric or quantum
//! object, plus the run metadata (`hbar`, `seed`, `tol`).

use std::collections::BTreeMap;

use lagpolar::convex::{ConvexBody, Ellipsoid, Halfspace, Polytope};
use lagpolar::lagrangian::{canonical_frame, LagrangianFrame, LagrangianPlane, TOL_LAGRANGIAN};
use lagpolar::linalg;
use lagpolar::quantum::{make_state, GaussianWavepacket, LagrangianQuantumState, QuantumBlob};
use lagpolar::symplectic::PhaseVector;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "lagpolar/1";
pub const DEFAULT_HBAR: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Row-major matrix.
pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub version: String,
    pub object: Object,
    #[serde(default)]
    pub metadata: Metadata,
    /// Scalar and vector outputs of a command.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub results: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_hbar() -> f64 {
    DEFAULT_HBAR
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl Default for Metadata {
    fn default() -> Self {
        Self {
            hbar: DEFAULT_HBAR,
            seed: 0,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceDoc {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Object {
    /// `{x : shape(x − center)·(x − center) ≤ ℏ}`.
    Ellipsoid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        shape: Rows,
    },
    /// Either representation may be given; outputs carry both.
    Polytope {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vertices: Option<Rows>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        halfspaces: Option<Vec<HalfspaceDoc>>,
    },
    /// A Lagrangian quantum state. `ell` and `ell_prime` are `2n × n` bases
    /// (default: the canonical frame); `shape` describes the ellipsoid
    /// `{u : shape·u·u ≤ ℏ}` in the coordinates of the `ell` basis columns.
    State {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ell: Option<Rows>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ell_prime: Option<Rows>,
        shape: Rows,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z0: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z0_prime: Option<Vec<f64>>,
    },
    Gaussian {
        #[serde(rename = "A")]
        a: Rows,
        #[serde(rename = "B")]
        b: Rows,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z0: Option<Vec<f64>>,
    },
    Blob {
        #[serde(rename = "G")]
        g: Rows,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z0: Option<Vec<f64>>,
    },
    Matrix {
        data: Rows,
    },
    Point {
        coords: Vec<f64>,
    },
}

impl Object {
    pub fn type_name(&self) -> &'static str {
        match self {
            Object::Ellipsoid { .. } => "ellipsoid",
            Object::Polytope { .. } => "polytope",
            Object::State { .. } => "state",
            Object::Gaussian { .. } => "gaussian",
            Object::Blob { .. } => "blob",
            Object::Matrix { .. } => "matrix",
            Object::Point { .. } => "point",
        }
    }
}

pub fn parse(text: &str) -> Result<Document, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Schema {
            path: if path == "." { "document".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;
    if doc.version != SCHEMA_VERSION {
        return Err(CliError::Schema {
            path: "version".into(),
            message: format!("expected \"{SCHEMA_VERSION}\", found \"{}\"", doc.version),
        });
    }
    Ok(doc)
}

pub fn serialize(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents contain only finite numbers");
    s.push('\n');
    s
}

fn schema(path: &str, message: impl ToString) -> CliError {
    CliError::Schema {
        path: path.into(),
        message: message.to_string(),
    }
}

pub fn to_matrix(rows: &Rows, path: &str) -> Result<DMatrix<f64>, CliError> {
    let r = rows.len();
    if r == 0 {
        return Err(schema(path, "matrix has no rows"));
    }
    let c = rows[0].len();
    if c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(schema(path, "rows must be non-empty and of equal length"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(schema(path, "entries must be finite"));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn from_matrix(m: &DMatrix<f64>) -> Rows {
    // Adding 0.0 turns −0.0 into 0.0.
    (0..m.nrows()).map(|i| m.row(i).iter().map(|v| v + 0.0).collect()).collect()
}

fn to_vector(v: &[f64], len: usize, path: &str) -> Result<DVector<f64>, CliError> {
    if v.len() != len {
        return Err(schema(path, format!("expected {len} entries, found {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(schema(path, "entries must be finite"));
    }
    Ok(DVector::from_column_slice(v))
}

fn symmetric_matrix(rows: &Rows, path: &str) -> Result<DMatrix<f64>, CliError> {
    let m = to_matrix(rows, path)?;
    if m.nrows() != m.ncols() {
        return Err(schema(path, format!("expected a square matrix, found {}x{}", m.nrows(), m.ncols())));
    }
    let asym = linalg::asymmetry(&m);
    if asym > 1e-12 * (1.0 + linalg::max_abs(&m)) {
        return Err(schema(path, format!("matrix is not symmetric (asymmetry {asym:e})")));
    }
    Ok(linalg::symmetrize(&m))
}

fn phase_vector(v: &Option<Vec<f64>>, n: usize, path: &str) -> Result<PhaseVector, CliError> {
    match v {
        None => Ok(PhaseVector::zeros(n)),
        Some(v) => Ok(PhaseVector::from_vector(to_vector(v, 2 * n, path)?).expect("even length")),
    }
}

fn at(path: &str, e: lagpolar::Error) -> CliError {
    schema(path, e)
}

impl Object {
    pub fn to_body(&self, hbar: f64) -> Result<ConvexBody, CliError> {
        match self {
            Object::Ellipsoid { center, shape } => {
                let m = symmetric_matrix(shape, "object.shape")?;
                let c = match center {
                    Some(c) => to_vector(c, m.nrows(), "object.center")?,
                    None => DVector::zeros(m.nrows()),
                };
                Ok(Ellipsoid::new(c, m, hbar).map_err(|e| at("object.shape", e))?.into())
            }
            Object::Polytope { vertices, halfspaces } => {
                if let Some(vs) = vertices {
                    let m = to_matrix(vs, "object.vertices")?;
                    let pts = (0..m.nrows()).map(|i| m.row(i).transpose()).collect();
                    Ok(Polytope::from_vertices(pts).map_err(|e| at("object.vertices", e))?.into())
                } else if let Some(hs) = halfspaces {
                    let d = hs.first().map(|h| h.a.len()).unwrap_or(0);
                    let hs = hs
                        .iter()
                        .enumerate()
                        .map(|(i, h)| {
                            Ok(Halfspace::new(to_vector(&h.a, d, &format!("object.halfspaces[{i}].a"))?, h.b))
                        })
                        .collect::<Result<Vec<_>, CliError>>()?;
                    Ok(Polytope::from_halfspaces(hs).map_err(|e| at("object.halfspaces", e))?.into())
                } else {
                    Err(schema("object", "a polytope needs vertices or halfspaces"))
                }
            }
            other => Err(schema(
                "object.type",
                format!("expected a body (ellipsoid or polytope), found {}", other.type_name()),
            )),
        }
    }

    pub fn from_body(body: &ConvexBody) -> Result<Self, CliError> {
        match body {
            ConvexBody::Ellipsoid(e) => Ok(Object::Ellipsoid {
                center: Some(e.center().iter().map(|x| x + 0.0).collect()),
                shape: from_matrix(e.shape()),
            }),
            ConvexBody::Polytope(p) => Ok(Object::Polytope {
                vertices: Some(p.vertices().iter().map(|v| v.iter().map(|x| x + 0.0).collect()).collect()),
                halfspaces: Some(
                    p.halfspaces()
                        .iter()
                        .map(|h| HalfspaceDoc {
                            a: h.a.iter().map(|x| x + 0.0).collect(),
                            b: h.b,
                        })
                        .collect(),
                ),
            }),
            ConvexBody::Product(_) => Err(CliError::Unsupported("product bodies have no document form".into())),
        }
    }

    pub fn to_state(&self, hbar: f64) -> Result<LagrangianQuantumState, CliError> {
        let Object::State {
            ell,
            ell_prime,
            shape,
            z0,
            z0_prime,
        } = self
        else {
            return Err(schema("object.type", format!("expected a state, found {}", self.type_name())));
        };
        let m = symmetric_matrix(shape, "object.shape")?;
        let n = m.nrows();
        let canonical = canonical_frame(n).map_err(|e| at("object.shape", e))?;
        let plane = |rows: &Option<Rows>, path: &str, default: &LagrangianPlane| match rows {
            None => Ok((default.clone(), DMatrix::identity(n, n))),
            Some(rows) => {
                let b = to_matrix(rows, path)?;
                if b.shape() != (2 * n, n) {
                    return Err(schema(path, format!("expected a {}x{n} basis", 2 * n)));
                }
                let plane = LagrangianPlane::new(&b, TOL_LAGRANGIAN).map_err(|e| at(path, e))?;
                // Coordinates in the given basis map to orthonormal ones by R = QᵀB.
                let r = plane.basis().transpose() * &b;
                Ok((plane, r))
            }
        };
        let (l, r) = plane(ell, "object.ell", &canonical.ell)?;
        let (lp, _) = plane(ell_prime, "object.ell_prime", &canonical.ell_prime)?;
        let frame = LagrangianFrame::new(l, lp).map_err(|e| at("object.ell_prime", e))?;
        let body = Ellipsoid::centered(m, hbar)
            .and_then(|e| e.linear_image(&r))
            .map_err(|e| at("object.shape", e))?;
        let z0 = phase_vector(z0, n, "object.z0")?;
        let z0_prime = phase_vector(z0_prime, n, "object.z0_prime")?;
        make_state(frame, body, z0, z0_prime, hbar).map_err(|e| at("object", e))
    }

    pub fn to_gaussian(&self, hbar: f64) -> Result<GaussianWavepacket, CliError> {
        let Object::Gaussian { a, b, z0 } = self else {
            return Err(schema("object.type", format!("expected a gaussian, found {}", self.type_name())));
        };
        let am = symmetric_matrix(a, "object.A")?;
        let bm = symmetric_matrix(b, "object.B")?;
        let n = am.nrows();
        let z0 = phase_vector(z0, n, "object.z0")?;
        GaussianWavepacket::new(am, bm, z0, hbar).map_err(|e| at("object.A", e))
    }

    pub fn from_gaussian(psi: &GaussianWavepacket) -> Self {
        Object::Gaussian {
            a: from_matrix(psi.a()),
            b: from_matrix(psi.b()),
            z0: Some(psi.z0().as_vector().iter().map(|x| x + 0.0).collect()),
        }
    }

    pub fn to_blob(&self, hbar: f64) -> Result<QuantumBlob, CliError> {
        let Object::Blob { g, z0 } = self else {
            return Err(schema("object.type", format!("expected a blob, found {}", self.type_name())));
        };
        let gm = symmetric_matrix(g, "object.G")?;
        if gm.nrows() % 2 != 0 {
            return Err(schema("object.G", "G must have even dimension"));
        }
        let z0 = phase_vector(z0, gm.nrows() / 2, "object.z0")?;
        QuantumBlob::new(gm, z0, hbar).map_err(|e| at("object.G", e))
    }

    pub fn from_blob(q: &QuantumBlob) -> Self {
        Object::Blob {
            g: from_matrix(q.g()),
            z0: Some(q.z0().as_vector().iter().map(|x| x + 0.0).collect()),
        }
    }
}
