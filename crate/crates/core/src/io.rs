//! JSON instance formats, position-annotated parsing and content hashing.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::FamilyMatrix;
use crate::rational::Rational;
use crate::representation::PolyhedralSublinear;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedRow {
    pub name: String,
    pub values: Vec<Rational>,
}

/// `{ "points": [...], "functions": [{"name", "values"}], "targets": [...] }`.
/// `targets` is only read by domination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreInstance {
    pub points: Vec<String>,
    pub functions: Vec<NamedRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<NamedRow>,
}

fn matrix_of(points: &[String], rows: &[NamedRow]) -> Result<FamilyMatrix> {
    FamilyMatrix::new(
        rows.iter().map(|r| r.name.clone()).collect(),
        points.to_vec(),
        rows.iter().map(|r| r.values.clone()).collect(),
    )
}

impl CoreInstance {
    pub fn family(&self) -> Result<FamilyMatrix> {
        matrix_of(&self.points, &self.functions)
    }

    pub fn targets(&self) -> Result<Option<FamilyMatrix>> {
        if self.targets.is_empty() {
            Ok(None)
        } else {
            matrix_of(&self.points, &self.targets).map(Some)
        }
    }

    pub fn from_family(a: &FamilyMatrix) -> Self {
        CoreInstance {
            points: a.col_labels().to_vec(),
            functions: a
                .row_labels()
                .iter()
                .zip(a.rows())
                .map(|(name, values)| NamedRow {
                    name: name.clone(),
                    values: values.clone(),
                })
                .collect(),
            targets: Vec::new(),
        }
    }

    pub fn with_targets(mut self, g: &FamilyMatrix) -> Self {
        self.targets = g
            .row_labels()
            .iter()
            .zip(g.rows())
            .map(|(name, values)| NamedRow {
                name: name.clone(),
                values: values.clone(),
            })
            .collect();
        self
    }

    /// The family with the roles of functions and points swapped.
    pub fn transposed_family(&self) -> Result<FamilyMatrix> {
        if !self.targets.is_empty() {
            return Err(Error::Invalid("an instance with targets cannot be transposed".into()));
        }
        Ok(self.family()?.transpose())
    }

    /// Family as used by a subcommand: transposed when requested.
    pub fn oriented_family(&self, transposed: bool) -> Result<FamilyMatrix> {
        if transposed {
            self.transposed_family()
        } else {
            self.family()
        }
    }
}

/// Points of `Q^d` with one value each, for the polyhedral-norm case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanInstance {
    pub vectors: Vec<Vec<Rational>>,
    pub values: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrassenInstance {
    pub dimension: usize,
    pub functionals: Vec<PolyhedralSublinear>,
}

impl StrassenInstance {
    pub fn validate(&self) -> Result<()> {
        for f in &self.functionals {
            if f.generators.iter().any(|a| a.len() != self.dimension) {
                return Err(Error::Dimension(format!(
                    "`{}` has a generator outside dimension {}",
                    f.name, self.dimension
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub matrix: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorFile {
    pub vectors: Vec<Vec<Rational>>,
}

/// Operator, dual net and sample points of a p-summing estimate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PietschInstance {
    pub matrix: Vec<Vec<Rational>>,
    pub net: Vec<Vec<Rational>>,
    pub sample: Vec<Vec<Rational>>,
}

/// Any instance a certificate can refer to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Core(CoreInstance),
    Fan(FanInstance),
    Strassen(StrassenInstance),
    Pietsch(PietschInstance),
}

impl Instance {
    /// Hex SHA-256 of the canonical JSON form.
    pub fn content_hash(&self) -> String {
        match self {
            Instance::Core(i) => hash_json(i),
            Instance::Fan(i) => hash_json(i),
            Instance::Strassen(i) => hash_json(i),
            Instance::Pietsch(i) => hash_json(i),
        }
    }
}

/// Canonical JSON: struct fields in declaration order, scalars as "p/q".
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serialisable value")
}

pub fn hash_json<T: Serialize>(value: &T) -> String {
    hex::encode(Sha256::digest(canonical_json(value).as_bytes()))
}

/// Parse JSON text; errors carry the line and column reported by the parser.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
}

/// Comma-separated scalars such as `1,1/2,-3`.
pub fn parse_vector(text: &str) -> Result<Vec<Rational>> {
    text.split(',').map(|s| s.trim().parse()).collect()
}

/// Comma-separated labels.
pub fn parse_labels(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

/// `f1,f2;f3` into groups of labels.
pub fn parse_groups(text: &str) -> Vec<Vec<String>> {
    text.split(';').map(parse_labels).filter(|g| !g.is_empty()).collect()
}
