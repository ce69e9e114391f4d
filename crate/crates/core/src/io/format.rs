//! JSON framework files.
//!
//! ```json
//! {
//!   "format": 1,
//!   "dimension": 2,
//!   "period_vectors": [[1, 0], [0, 1]],
//!   "vertices": [{"id": "p1", "position": [0, 0]}],
//!   "edges": [
//!     {"from": {"v": "p1", "cell": [0, 0]}, "to": {"v": "p1", "cell": [1, 0]}},
//!     {"from": {"v": "p1", "cell": [0, 0]}, "to": {"v": "p1", "cell": [0, 1]}}
//!   ],
//!   "symmetries": [{"name": "C4", "linear": [[0, -1], [1, 0]], "translation": [0, 0]}],
//!   "tolerance": 1e-9
//! }
//! ```
//!
//! Matrices are lists of rows. A vertex with `"frac": true` gives its
//! position in lattice coordinates. `symmetries` and `tolerance` are optional.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::lattice::{CrystalFramework, Endpoint, MotifEdge, MotifVertex, PeriodLattice};
use crate::rigidity::MatrixSpace;
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameworkFile {
    pub format: u32,
    pub dimension: usize,
    pub period_vectors: Vec<Vec<f64>>,
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symmetries: Vec<SymmetryRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: String,
    pub position: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub frac: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndRecord {
    pub v: String,
    pub cell: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub from: EndRecord,
    pub to: EndRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryRecord {
    pub name: String,
    pub linear: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

/// Why a document could not be turned into a framework.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("{0}")]
    Framework(Error),

    #[error("symmetry {name:?}: {source}")]
    Symmetry { name: String, source: Error },
}

impl FormatError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

fn decode<'de, D: Deserialize<'de>>(text: &'de str) -> Result<D, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let out = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => FormatError::schema(path, strip_position(&inner)),
            _ => FormatError::Syntax {
                line: inner.line(),
                column: inner.column(),
                message: strip_position(&inner),
            },
        }
    })?;
    Ok(out)
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

fn check_len(path: String, found: usize, expected: usize) -> Result<(), FormatError> {
    if found != expected {
        return Err(FormatError::schema(
            path,
            format!("expected {expected} entries, found {found}"),
        ));
    }
    Ok(())
}

fn vector<T: Scalar>(x: &[f64]) -> DVector<T> {
    DVector::from_iterator(x.len(), x.iter().map(|&a| T::lit(a)))
}

fn matrix_rows<T: Scalar>(
    path: &str,
    rows: &[Vec<f64>],
    d: usize,
) -> Result<DMatrix<T>, FormatError> {
    check_len(path.to_string(), rows.len(), d)?;
    for (i, r) in rows.iter().enumerate() {
        check_len(format!("{path}[{i}]"), r.len(), d)?;
    }
    Ok(DMatrix::from_fn(d, d, |i, j| T::lit(rows[i][j])))
}

impl FrameworkFile {
    /// Converts to a validated framework and resolves the declared symmetries.
    pub fn to_framework<T: Scalar>(&self) -> Result<CrystalFramework<T>, FormatError> {
        if self.format != FORMAT_VERSION {
            return Err(FormatError::schema(
                "format",
                format!(
                    "unsupported format {}, expected {FORMAT_VERSION}",
                    self.format
                ),
            ));
        }
        let d = self.dimension;
        if d == 0 {
            return Err(FormatError::schema("dimension", "must be positive"));
        }
        check_len("period_vectors".into(), self.period_vectors.len(), d)?;
        for (i, p) in self.period_vectors.iter().enumerate() {
            check_len(format!("period_vectors[{i}]"), p.len(), d)?;
        }
        let tol = match self.tolerance {
            Some(t) if t <= 0.0 || t.is_nan() => {
                return Err(FormatError::schema("tolerance", "must be positive"))
            }
            Some(t) => T::lit(t),
            None => T::default_tol(),
        };
        let periods: Vec<DVector<T>> = self.period_vectors.iter().map(|p| vector(p)).collect();
        let lattice = PeriodLattice::from_vectors(&periods, tol).map_err(FormatError::Framework)?;

        let mut ids = HashMap::new();
        let mut vertices = Vec::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            check_len(format!("vertices[{i}].position"), v.position.len(), d)?;
            if ids.insert(v.id.as_str(), i).is_some() {
                return Err(FormatError::schema(
                    format!("vertices[{i}].id"),
                    format!("duplicate id {:?}", v.id),
                ));
            }
            let raw = vector::<T>(&v.position);
            let position = if v.frac { lattice.matrix() * raw } else { raw };
            vertices.push(MotifVertex::named(position, v.id.clone()));
        }

        let end = |path: String, e: &EndRecord| -> Result<Endpoint, FormatError> {
            check_len(format!("{path}.cell"), e.cell.len(), d)?;
            let vertex = *ids.get(e.v.as_str()).ok_or_else(|| {
                FormatError::schema(format!("{path}.v"), format!("unknown vertex id {:?}", e.v))
            })?;
            Ok(Endpoint::new(vertex, e.cell.clone()))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            edges.push(MotifEdge::new(
                end(format!("edges[{i}].from"), &e.from)?,
                end(format!("edges[{i}].to"), &e.to)?,
            ));
        }

        let mut fw = CrystalFramework::new(lattice, vertices, edges).with_tolerance(tol);
        fw.ensure_valid().map_err(FormatError::Framework)?;
        for (i, s) in self.symmetries.iter().enumerate() {
            let linear = matrix_rows(&format!("symmetries[{i}].linear"), &s.linear, d)?;
            check_len(
                format!("symmetries[{i}].translation"),
                s.translation.len(),
                d,
            )?;
            fw = fw
                .with_symmetry(s.name.clone(), linear, vector(&s.translation))
                .map_err(|source| FormatError::Symmetry {
                    name: s.name.clone(),
                    source,
                })?;
        }
        Ok(fw)
    }

    /// Describes `fw` with Cartesian positions and explicit endpoint cells.
    pub fn from_framework<T: Scalar>(fw: &CrystalFramework<T>) -> Self {
        let ids = vertex_ids(fw);
        let f = |x: &DVector<T>| x.iter().map(|a| a.as_f64()).collect::<Vec<_>>();
        let z = fw.lattice().matrix();
        let end = |e: &Endpoint| EndRecord {
            v: ids[e.vertex].clone(),
            cell: e.cell.clone(),
        };
        FrameworkFile {
            format: FORMAT_VERSION,
            dimension: fw.dim(),
            period_vectors: z
                .column_iter()
                .map(|c| c.iter().map(|a| a.as_f64()).collect())
                .collect(),
            vertices: fw
                .vertices()
                .iter()
                .zip(&ids)
                .map(|(v, id)| VertexRecord {
                    id: id.clone(),
                    position: f(&v.position),
                    frac: false,
                })
                .collect(),
            edges: fw
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    from: end(&e.from),
                    to: end(&e.to),
                })
                .collect(),
            symmetries: fw
                .symmetries()
                .iter()
                .map(|g| SymmetryRecord {
                    name: g.name().to_string(),
                    linear: g
                        .linear()
                        .row_iter()
                        .map(|r| r.iter().map(|a| a.as_f64()).collect())
                        .collect(),
                    translation: f(g.translation()),
                })
                .collect(),
            tolerance: Some(fw.tol().as_f64()),
        }
    }
}

/// Vertex names when present and unique, otherwise `v0, v1, ...`.
fn vertex_ids<T: Scalar>(fw: &CrystalFramework<T>) -> Vec<String> {
    let names: Vec<Option<&String>> = fw.vertices().iter().map(|v| v.name.as_ref()).collect();
    let mut seen = std::collections::HashSet::new();
    let usable = names
        .iter()
        .all(|n| n.is_some_and(|s| seen.insert(s.as_str())));
    if usable {
        names.into_iter().map(|n| n.unwrap().clone()).collect()
    } else {
        (0..fw.vertex_count()).map(|i| format!("v{i}")).collect()
    }
}

/// Parses and validates a framework document.
pub fn parse_framework<T: Scalar>(text: &str) -> Result<CrystalFramework<T>, FormatError> {
    decode::<FrameworkFile>(text)?.to_framework()
}

/// Pretty-printed JSON that [`parse_framework`] reads back to an equal framework.
pub fn serialize_framework<T: Scalar>(fw: &CrystalFramework<T>) -> String {
    let mut s = serde_json::to_string_pretty(&FrameworkFile::from_framework(fw))
        .expect("plain data serializes");
    s.push('\n');
    s
}

/// Parses a custom space of lattice velocities: a JSON list of `d x d`
/// matrices given as lists of rows.
pub fn parse_matrix_space<T: Scalar>(
    text: &str,
    d: usize,
    tol: T,
) -> Result<MatrixSpace<T>, FormatError> {
    let raw: Vec<Vec<Vec<f64>>> = decode(text)?;
    let mut basis = Vec::with_capacity(raw.len());
    for (i, m) in raw.iter().enumerate() {
        basis.push(matrix_rows(&format!("[{i}]"), m, d)?);
    }
    MatrixSpace::custom(d, basis, tol).map_err(FormatError::Framework)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{builtin_framework, BUILTIN_NAMES};

    const SQUARE: &str = r#"{
        "format": 1,
        "dimension": 2,
        "period_vectors": [[1, 0], [0, 1]],
        "vertices": [{"id": "a", "position": [0, 0]}],
        "edges": [
            {"from": {"v": "a", "cell": [0, 0]}, "to": {"v": "a", "cell": [1, 0]}},
            {"from": {"v": "a", "cell": [0, 0]}, "to": {"v": "a", "cell": [0, 1]}}
        ]
    }"#;

    #[test]
    fn builtins_round_trip() {
        for name in BUILTIN_NAMES {
            let fw = builtin_framework::<f64>(name).unwrap();
            let back: CrystalFramework<f64> = parse_framework(&serialize_framework(&fw)).unwrap();
            assert_eq!(back, fw, "{name}");
        }
    }

    #[test]
    fn minimal_document() {
        let fw: CrystalFramework<f64> = parse_framework(SQUARE).unwrap();
        assert_eq!((fw.dim(), fw.vertex_count(), fw.edge_count()), (2, 1, 2));
        assert_eq!(fw.tol(), 1e-9);
    }

    #[test]
    fn wrong_period_vector_length() {
        let text = SQUARE.replace("[[1, 0], [0, 1]]", "[[1, 0], [0, 1, 0]]");
        match parse_framework::<f64>(&text) {
            Err(FormatError::Schema { path, .. }) => assert_eq!(path, "period_vectors[1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_errors_carry_a_path() {
        let text = SQUARE.replace(r#""cell": [1, 0]"#, r#""cell": [1.5, 0]"#);
        match parse_framework::<f64>(&text) {
            Err(FormatError::Schema { path, .. }) => assert_eq!(path, "edges[0].to.cell[0]"),
            other => panic!("{other:?}"),
        }
        let text = SQUARE.replace(r#""id": "a","#, r#""id": "a", "colour": 1,"#);
        assert!(matches!(
            parse_framework::<f64>(&text),
            Err(FormatError::Schema { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_a_position() {
        match parse_framework::<f64>("{\n  \"format\": 1,\n  oops\n}") {
            Err(FormatError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_framework::<f64>("{"),
            Err(FormatError::Syntax { .. })
        ));
    }

    #[test]
    fn unknown_and_duplicate_ids() {
        let text = SQUARE.replace(
            r#""to": {"v": "a", "cell": [0, 1]}"#,
            r#""to": {"v": "b", "cell": [0, 1]}"#,
        );
        match parse_framework::<f64>(&text) {
            Err(FormatError::Schema { path, .. }) => assert_eq!(path, "edges[1].to.v"),
            other => panic!("{other:?}"),
        }
        let text = SQUARE.replace(
            r#"[{"id": "a", "position": [0, 0]}]"#,
            r#"[{"id": "a", "position": [0, 0]}, {"id": "a", "position": [0.5, 0.5]}]"#,
        );
        assert!(matches!(
            parse_framework::<f64>(&text),
            Err(FormatError::Schema { .. })
        ));
    }

    #[test]
    fn validation_failures_are_forwarded() {
        let text = SQUARE.replace(r#""cell": [1, 0]"#, r#""cell": [0, 0]"#);
        match parse_framework::<f64>(&text) {
            Err(FormatError::Framework(Error::InvalidFramework(r))) => {
                assert!(r.to_string().contains("self-loop"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fractional_positions() {
        let text = r#"{
            "format": 1, "dimension": 2,
            "period_vectors": [[2, 0], [0, 4]],
            "vertices": [{"id": "a", "position": [0.5, 0.25], "frac": true}],
            "edges": []
        }"#;
        let fw: CrystalFramework<f64> = parse_framework(text).unwrap();
        assert_eq!(
            fw.vertices()[0].position,
            DVector::from_column_slice(&[1.0, 1.0])
        );
    }

    #[test]
    fn kagome_symmetry_resolves_from_file() {
        let fw = builtin_framework::<f64>("kagome").unwrap();
        let back: CrystalFramework<f64> = parse_framework(&serialize_framework(&fw)).unwrap();
        assert_eq!(back.symmetry("C3").unwrap().edge_orbits().len(), 2);
    }

    #[test]
    fn bad_symmetry_names_the_element() {
        let text = SQUARE.replace(
            "\"edges\"",
            r#""symmetries": [{"name": "shift", "linear": [[1, 0], [0, 1]], "translation": [0.3, 0]}], "edges""#,
        );
        match parse_framework::<f64>(&text) {
            Err(FormatError::Symmetry { name, .. }) => assert_eq!(name, "shift"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn custom_spaces() {
        let e: MatrixSpace<f64> =
            parse_matrix_space("[[[1, 0], [0, 1]], [[0, 1], [-1, 0]]]", 2, 1e-9).unwrap();
        assert_eq!(e.dim(), 2);
        assert!(matches!(
            parse_matrix_space::<f64>("[[[1, 0], [0, 1]], [[2, 0], [0, 2]]]", 2, 1e-9),
            Err(FormatError::Framework(Error::DependentBasis))
        ));
        match parse_matrix_space::<f64>("[[[1, 0], [0, 1, 2]]]", 2, 1e-9) {
            Err(FormatError::Schema { path, .. }) => assert_eq!(path, "[0][1]"),
            other => panic!("{other:?}"),
        }
    }
}
