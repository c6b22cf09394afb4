//! JSON documents for algebras, matrices and subspaces, and JSON records
//! for every result type. Complex numbers are always `[re, im]` pairs.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{BasisChange, Element, EvolutionAlgebra, Subspace};
use crate::condition_p::{CanonicalForm, Dim2Class, PDecision, PWitness};
use crate::conjecture::{CampaignReport, ReduceOutcome, ReduceReport, SolutionSet};
use crate::linalg::Matrix;
use crate::natural_basis::{SearchError, SubspaceClass};
use crate::permutation::DecompositionReport;
use crate::scalar::Tolerance;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DocumentError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },
    #[error(transparent)]
    Algebra(#[from] crate::Error),
}

fn schema(location: impl Into<String>, message: impl Into<String>) -> DocumentError {
    DocumentError::Schema { location: location.into(), message: message.into() }
}

/// A square complex matrix with optional metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDocument {
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eps: Option<f64>,
}

fn parse_complex(v: &Value, loc: &str) -> Result<[f64; 2], DocumentError> {
    let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| schema(loc, "expected [re, im]"))?;
    let mut out = [0.0; 2];
    for (k, x) in pair.iter().enumerate() {
        let f = x.as_f64().ok_or_else(|| schema(loc, "expected a number"))?;
        if !f.is_finite() {
            return Err(schema(loc, "non-finite number"));
        }
        out[k] = f;
    }
    Ok(out)
}

fn parse_vector(v: &Value, n: usize, loc: &str) -> Result<Vec<[f64; 2]>, DocumentError> {
    let arr = v.as_array().ok_or_else(|| schema(loc, "expected an array"))?;
    if arr.len() != n {
        return Err(schema(loc, format!("expected {n} entries, found {}", arr.len())));
    }
    arr.iter().enumerate().map(|(j, x)| parse_complex(x, &format!("{loc}, column {}", j + 1))).collect()
}

fn parse_json(text: &str) -> Result<Value, DocumentError> {
    serde_json::from_str(text).map_err(|e| DocumentError::Json(e.to_string()))
}

/// Parses and validates a document. Row lengths are checked before the row
/// count so that a short matrix reports its first bad row.
pub fn parse_document(text: &str) -> Result<AlgebraDocument, DocumentError> {
    let v = parse_json(text)?;
    let obj = v.as_object().ok_or_else(|| schema("document", "expected an object"))?;
    let dim = obj
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| schema("dim", "expected a positive integer"))? as usize;
    if dim == 0 {
        return Err(schema("dim", "must be positive"));
    }
    let rows = obj
        .get("matrix")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("matrix", "expected an array of rows"))?;
    let mut matrix = Vec::with_capacity(dim);
    for (i, r) in rows.iter().enumerate() {
        matrix.push(parse_vector(r, dim, &format!("row {}", i + 1))?);
    }
    if matrix.len() != dim {
        return Err(schema(format!("row {}", matrix.len() + 1), format!("expected {dim} rows, found {}", matrix.len())));
    }
    let name = match obj.get("name") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(schema("name", "expected a string")),
    };
    let eps = match obj.get("eps") {
        None | Some(Value::Null) => None,
        Some(x) => {
            let e = x.as_f64().filter(|e| e.is_finite() && *e > 0.0).ok_or_else(|| schema("eps", "expected a positive number"))?;
            Some(e)
        }
    };
    Ok(AlgebraDocument { dim, matrix, name, eps })
}

impl AlgebraDocument {
    pub fn from_matrix(m: &Matrix<f64>, name: Option<String>) -> Self {
        let matrix = (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect();
        Self { dim: m.rows(), matrix, name, eps: None }
    }

    pub fn from_algebra(alg: &EvolutionAlgebra<f64>, name: Option<String>) -> Self {
        Self::from_matrix(alg.structure(), name)
    }

    pub fn to_matrix(&self) -> Matrix<f64> {
        let rows: Vec<Vec<Complex<f64>>> =
            self.matrix.iter().map(|r| r.iter().map(|&[re, im]| Complex::new(re, im)).collect()).collect();
        Matrix::from_rows(&rows, self.dim)
    }

    pub fn to_algebra(&self) -> Result<EvolutionAlgebra<f64>, DocumentError> {
        Ok(EvolutionAlgebra::new(self.to_matrix())?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

pub fn parse_algebra(text: &str) -> Result<EvolutionAlgebra<f64>, DocumentError> {
    parse_document(text)?.to_algebra()
}

pub fn serialize_algebra(alg: &EvolutionAlgebra<f64>) -> String {
    AlgebraDocument::from_algebra(alg, None).to_json()
}

/// A list of coordinate vectors, either bare or as `{"vectors": [...]}`.
pub fn parse_vectors(text: &str, n: usize) -> Result<Vec<Element<f64>>, DocumentError> {
    let v = parse_json(text)?;
    let list = match &v {
        Value::Array(a) => a,
        Value::Object(o) => o.get("vectors").and_then(Value::as_array).ok_or_else(|| schema("vectors", "expected an array"))?,
        _ => return Err(schema("document", "expected an array of vectors")),
    };
    list.iter()
        .enumerate()
        .map(|(i, x)| {
            let c = parse_vector(x, n, &format!("vector {}", i + 1))?;
            Ok(Element::new(c.into_iter().map(|[re, im]| Complex::new(re, im)).collect()))
        })
        .collect()
}

pub fn complex_json(z: Complex<f64>) -> Value {
    json!([z.re, z.im])
}

pub fn vector_json(v: &[Complex<f64>]) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

pub fn element_json(x: &Element<f64>) -> Value {
    vector_json(x.coords())
}

pub fn elements_json(xs: &[Element<f64>]) -> Value {
    Value::Array(xs.iter().map(element_json).collect())
}

pub fn matrix_json(m: &Matrix<f64>) -> Value {
    Value::Array((0..m.rows()).map(|i| vector_json(m.row(i))).collect())
}

/// Reduced row-echelon basis.
pub fn subspace_json(s: &Subspace<f64>) -> Value {
    matrix_json(s.echelon())
}

pub fn change_json(c: &BasisChange<f64>) -> Value {
    matrix_json(c.matrix())
}

pub fn class_json(c: &SubspaceClass<f64>) -> Value {
    json!({
        "kind": c.kind,
        "certainty": c.certainty,
        "natural_basis": c.natural_basis.as_deref().map(elements_json),
        "extension": c.extension.as_deref().map(elements_json),
    })
}

pub fn search_error_json(e: &SearchError) -> Value {
    json!({ "kind": "Inconclusive", "reason": e.to_string() })
}

fn witness_json(w: &PWitness<f64>) -> Value {
    json!({ "subspace": subspace_json(&w.subspace), "class": class_json(&w.class) })
}

pub fn canonical_json(c: &CanonicalForm<f64>) -> Value {
    json!({ "k": c.k, "matrix": matrix_json(c.matrix.structure()), "change": change_json(&c.change) })
}

pub fn dim2_json(c: &Dim2Class<f64>) -> Value {
    let params = match c {
        Dim2Class::E5 { a2, a3 } => json!({ "a2": complex_json(*a2), "a3": complex_json(*a3) }),
        Dim2Class::E6 { a4 } => json!({ "a4": complex_json(*a4) }),
        _ => json!({}),
    };
    json!({
        "class": c.tag(),
        "params": params,
        "normal_form": matrix_json(c.normal_form().structure()),
        "satisfies_p": c.satisfies_p(),
    })
}

pub fn decision_json(d: &PDecision<f64>) -> Value {
    json!({
        "verdict": d.verdict,
        "route": d.route,
        "exact": d.route.is_exact(),
        "witness": d.witness.as_ref().map(witness_json),
        "canonical": d.canonical.as_ref().map(canonical_json),
        "dim2": d.dim2.as_ref().map(dim2_json),
    })
}

pub fn decomposition_json(r: &DecompositionReport<f64>) -> Value {
    let blocks: Vec<Value> = r
        .blocks
        .iter()
        .map(|b| json!({ "kind": b.kind, "size": b.size(), "vertices": b.vertices.iter().map(|v| v + 1).collect::<Vec<_>>() }))
        .collect();
    json!({ "cycles": r.cycles, "chains": r.chains, "blocks": blocks, "witness": change_json(&r.witness) })
}

pub fn solutions_json(s: &SolutionSet<f64>) -> Value {
    json!({
        "roots": elements_json(&s.roots),
        "root_count": s.roots.len(),
        "path_failures": s.path_failures,
        "full_support": s.full_support,
    })
}

pub fn campaign_json(r: &CampaignReport<f64>) -> Value {
    let failures: Vec<Value> = r
        .failures
        .iter()
        .map(|f| json!({ "index": f.index, "matrix": matrix_json(&f.matrix), "roots_found": f.roots_found }))
        .collect();
    json!({
        "n": r.n,
        "samples": r.samples,
        "seed": r.seed,
        "distribution": r.distribution,
        "success_count": r.success_count,
        "success_rate": if r.samples == 0 { 1.0 } else { r.success_count as f64 / r.samples as f64 },
        "bezout_count": r.bezout_count,
        "path_failures": r.path_failures,
        "failures": failures,
    })
}

pub fn reduce_json(r: &ReduceReport<f64>) -> Value {
    let outcome = match &r.outcome {
        ReduceOutcome::Fails { witness } => json!({ "kind": "Fails", "witness": witness_json(witness) }),
        ReduceOutcome::Certificate { level, system, witness } => json!({
            "kind": "Certificate",
            "level": level,
            "system": matrix_json(system.matrix()),
            "witness": witness.as_ref().map(witness_json),
        }),
        ReduceOutcome::ConjecturalSatisfies { s, matrix, change } => json!({
            "kind": "ConjecturalSatisfies",
            "s": s,
            "matrix": matrix_json(matrix.structure()),
            "change": change_json(change),
        }),
        ReduceOutcome::Nilpotent(d) => json!({ "kind": "Nilpotent", "decision": decision_json(d) }),
    };
    json!({ "steps": r.steps, "outcome": outcome })
}

/// Report envelope written by the command-line tool.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub command: Vec<String>,
    pub input_digest: Option<String>,
    pub tool_version: String,
    pub seed: u64,
    pub eps: f64,
    pub result: Value,
    pub timing_seconds: f64,
}

/// Tolerance from a document override, then the command-line value.
pub fn tolerance_for(doc: Option<&AlgebraDocument>, cli_eps: Option<f64>) -> Result<Tolerance<f64>, DocumentError> {
    match doc.and_then(|d| d.eps).or(cli_eps) {
        Some(e) => Ok(Tolerance::new(e)?),
        None => Ok(Tolerance::default()),
    }
}
