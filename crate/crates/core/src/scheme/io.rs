//! JSON scheme files.
//!
//! ```json
//! { "field": "gf:11", "N": 6, "K": 4, "L": 5,
//!   "F": [[...]], "D": [[...]], "E": [[...]], "C": [[...]] }
//! ```
//!
//! Entries are integers or `"a/b"` strings, read in the declared field. `"C"` is
//! optional; its presence makes the file a secured scheme.

use std::path::Path;

use num::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::Scheme;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::Matrix;
use crate::transform::SecuredScheme;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Text(String),
}

impl Entry {
    fn parse(&self, field: FieldSpec) -> Result<FieldElement> {
        match self {
            Entry::Int(v) => Ok(field.from_i64(*v)),
            Entry::Text(s) => field.parse_entry(s),
        }
    }

    fn from_element(x: &FieldElement) -> Entry {
        match x {
            FieldElement::Prime(a) => Entry::Int(a.value() as i64),
            FieldElement::Rational(r) => match (r.denom().is_one(), r.numer().to_i64()) {
                (true, Some(v)) => Entry::Int(v),
                _ => Entry::Text(x.to_string()),
            },
        }
    }
}

fn parse_matrix(name: &str, rows: &[Vec<Entry>], field: FieldSpec, cols_if_empty: usize) -> Result<Matrix> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|e| e.parse(field)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Parse(format!("matrix {name}: {e}")))?;
    Matrix::from_rows(field, rows, cols_if_empty).map_err(|e| Error::Parse(format!("matrix {name}: {e}")))
}

fn write_matrix(m: &Matrix) -> Vec<Vec<Entry>> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(Entry::from_element).collect())
        .collect()
}

fn check_shape(name: &str, m: &Matrix, rows: usize, cols: usize) -> Result<()> {
    if (m.rows(), m.cols()) != (rows, cols) {
        return Err(Error::Structure(format!(
            "matrix {name} is {}×{}, declared dimensions require {rows}×{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeDocument {
    pub field: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "F")]
    pub f: Vec<Vec<Entry>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<Entry>>,
    #[serde(rename = "E")]
    pub e: Vec<Vec<Entry>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<Entry>>>,
}

impl SchemeDocument {
    pub fn from_parts(s: &Scheme, c: Option<&Matrix>) -> Self {
        SchemeDocument {
            field: s.field().to_string(),
            n: s.n(),
            k: s.k(),
            l: s.l(),
            f: write_matrix(s.f()),
            d: write_matrix(s.d()),
            e: write_matrix(s.e()),
            c: c.map(write_matrix),
        }
    }

    pub fn field_spec(&self) -> Result<FieldSpec> {
        self.field.parse()
    }

    /// Validates the matrices into a [`Scheme`]; `"C"` is ignored here.
    pub fn to_scheme(&self) -> Result<Scheme> {
        let field = self.field_spec()?;
        let (n, k, l) = (self.n, self.k, self.l);
        if n < k {
            return Err(Error::DimensionViolation(format!("N = {n} < K = {k}")));
        }
        if l < k {
            return Err(Error::DimensionViolation(format!("L = {l} < K = {k}")));
        }
        let f = parse_matrix("F", &self.f, field, l)?;
        let d = parse_matrix("D", &self.d, field, n)?;
        let e = parse_matrix("E", &self.e, field, l)?;
        check_shape("F", &f, k, l)?;
        check_shape("D", &d, k, n)?;
        check_shape("E", &e, n, l)?;
        Scheme::new(f, d, e)
    }

    /// The randomness coefficients, when present.
    pub fn randomness(&self, field: FieldSpec) -> Result<Option<Matrix>> {
        let Some(c) = &self.c else { return Ok(None) };
        let m = parse_matrix("C", c, field, 0)?;
        if m.rows() != self.n && !(m.rows() == 0 && c.is_empty()) {
            return Err(Error::Structure(format!(
                "matrix C has {} rows, expected N = {}",
                m.rows(),
                self.n
            )));
        }
        if m.rows() == 0 {
            return Ok(Some(Matrix::zeros(field, self.n, 0)));
        }
        Ok(Some(m))
    }

    pub fn load(&self) -> Result<LoadedScheme> {
        let scheme = self.to_scheme()?;
        match self.randomness(scheme.field())? {
            None => Ok(LoadedScheme::Plain(scheme)),
            Some(c) => Ok(LoadedScheme::Secured(SecuredScheme::with_randomness(scheme, c)?)),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }
}

/// A scheme file, with or without randomness coefficients.
#[derive(Debug, Clone)]
pub enum LoadedScheme {
    Plain(Scheme),
    Secured(SecuredScheme),
}

impl LoadedScheme {
    pub fn base(&self) -> &Scheme {
        match self {
            LoadedScheme::Plain(s) => s,
            LoadedScheme::Secured(ss) => ss.base(),
        }
    }

    pub fn secured(&self) -> Option<&SecuredScheme> {
        match self {
            LoadedScheme::Plain(_) => None,
            LoadedScheme::Secured(ss) => Some(ss),
        }
    }
}

pub fn load_scheme_file(path: impl AsRef<Path>) -> Result<LoadedScheme> {
    let text = std::fs::read_to_string(path.as_ref())?;
    SchemeDocument::from_json(&text)?.load()
}

/// Input to factorization: the request matrix, and optionally the number of
/// servers for systematic forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestsDocument {
    pub field: String,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "F")]
    pub f: Vec<Vec<Entry>>,
}

impl RequestsDocument {
    pub fn requests(&self) -> Result<(FieldSpec, Matrix)> {
        let field: FieldSpec = self.field.parse()?;
        let f = parse_matrix("F", &self.f, field, self.l)?;
        check_shape("F", &f, self.k, self.l)?;
        Ok((field, f))
    }
}

/// Parses a bare matrix (`[[...]]`) or an object holding one under `key`.
pub fn parse_matrix_json(text: &str, key: &str, field: FieldSpec) -> Result<Matrix> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let rows = match value {
        serde_json::Value::Object(mut map) => map
            .remove(key)
            .ok_or_else(|| Error::Parse(format!("missing key {key:?}")))?,
        other => other,
    };
    let rows: Vec<Vec<Entry>> = serde_json::from_value(rows)?;
    parse_matrix(key, &rows, field, 0)
}
