//! Shared data model: function families over finite point sets and
//! finitely supported measures.
//!
//! On a finite set a finitely additive probability is nothing more than a
//! weight vector, so every integral below is a finite weighted sum and is
//! computed exactly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A finite family `F` of functions on a finite set `X`, stored as the matrix
/// `A[f][x] = f(x)`. Rows are functions, columns are points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyMatrix {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    values: Vec<Vec<Rational>>,
}

fn check_unique(labels: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

impl FamilyMatrix {
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        values: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        if row_labels.is_empty() || col_labels.is_empty() {
            return Err(Error::Dimension(
                "a family needs at least one function and one point".into(),
            ));
        }
        if values.len() != row_labels.len() {
            return Err(Error::Dimension(format!(
                "{} row labels but {} rows",
                row_labels.len(),
                values.len()
            )));
        }
        for (label, row) in row_labels.iter().zip(&values) {
            if row.len() != col_labels.len() {
                return Err(Error::Dimension(format!(
                    "function `{label}` has {} values, expected {}",
                    row.len(),
                    col_labels.len()
                )));
            }
        }
        check_unique(&row_labels)?;
        check_unique(&col_labels)?;
        Ok(FamilyMatrix {
            row_labels,
            col_labels,
            values,
        })
    }

    /// Matrix with default labels `f1..fn` for rows and `x1..xm` for columns.
    pub fn from_rows(values: Vec<Vec<Rational>>) -> Result<Self> {
        let rows = default_labels("f", values.len());
        let cols = default_labels("x", values.first().map_or(0, Vec::len));
        FamilyMatrix::new(rows, cols, values)
    }

    /// Integer convenience constructor with default labels.
    pub fn from_ints(values: &[&[i64]]) -> Result<Self> {
        FamilyMatrix::from_rows(
            values
                .iter()
                .map(|row| row.iter().map(|&v| Rational::from(v)).collect())
                .collect(),
        )
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.values[i]
    }

    pub fn value(&self, i: usize, j: usize) -> &Rational {
        &self.values[i][j]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        self.values.iter().map(|row| row[j].clone()).collect()
    }

    pub fn row_index(&self, label: &str) -> Result<usize> {
        self.row_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn col_index(&self, label: &str) -> Result<usize> {
        self.col_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Swap the roles of functions and points.
    pub fn transpose(&self) -> FamilyMatrix {
        let values = (0..self.n_cols()).map(|j| self.column(j)).collect();
        FamilyMatrix {
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            values,
        }
    }

    /// Apply `op` entrywise, keeping labels.
    pub fn map(&self, op: impl Fn(&Rational) -> Rational) -> FamilyMatrix {
        FamilyMatrix {
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(&op).collect())
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> FamilyMatrix {
        self.map(|v| v * c)
    }

    pub fn abs(&self) -> FamilyMatrix {
        self.map(Rational::abs)
    }

    /// Sub-family made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<FamilyMatrix> {
        FamilyMatrix::new(
            rows.iter().map(|&i| self.row_labels[i].clone()).collect(),
            self.col_labels.clone(),
            rows.iter().map(|&i| self.values[i].clone()).collect(),
        )
    }

    /// Restriction to the given columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Result<FamilyMatrix> {
        FamilyMatrix::new(
            self.row_labels.clone(),
            cols.iter().map(|&j| self.col_labels[j].clone()).collect(),
            self.values
                .iter()
                .map(|row| cols.iter().map(|&j| row[j].clone()).collect())
                .collect(),
        )
    }

    /// Resolve a list of row labels to indices.
    pub fn row_indices<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.row_index(l.as_ref())).collect()
    }

    /// Resolve a list of column labels to indices.
    pub fn col_indices<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.col_index(l.as_ref())).collect()
    }

    /// Largest entry minus smallest entry.
    pub fn range(&self) -> Rational {
        let all = self.values.iter().flatten();
        let hi = all.clone().cloned().reduce(Rational::max).unwrap_or_default();
        let lo = all.cloned().reduce(Rational::min).unwrap_or_default();
        hi - lo
    }
}

pub(crate) fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// A finitely supported nonnegative measure: parallel lists of labels and weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub support: Vec<String>,
    pub weights: Vec<Rational>,
}

impl DiscreteMeasure {
    pub fn new(support: Vec<String>, weights: Vec<Rational>) -> Result<Self> {
        let m = DiscreteMeasure { support, weights };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.support.len() != self.weights.len() {
            return Err(Error::Dimension(format!(
                "measure has {} labels and {} weights",
                self.support.len(),
                self.weights.len()
            )));
        }
        check_unique(&self.support)?;
        if let Some((l, w)) = self
            .support
            .iter()
            .zip(&self.weights)
            .find(|(_, w)| w.is_negative())
        {
            return Err(Error::Invalid(format!("negative weight {w} on `{l}`")));
        }
        Ok(())
    }

    pub fn point_mass(label: impl Into<String>) -> Self {
        DiscreteMeasure {
            support: vec![label.into()],
            weights: vec![Rational::one()],
        }
    }

    pub fn uniform<S: AsRef<str>>(labels: &[S]) -> Self {
        let w = Rational::new(1, labels.len() as i64);
        DiscreteMeasure {
            support: labels.iter().map(|l| l.as_ref().to_string()).collect(),
            weights: vec![w; labels.len()],
        }
    }

    /// Sparse measure from a dense weight vector; zero weights are dropped.
    pub fn from_dense<S: AsRef<str>>(labels: &[S], weights: &[Rational]) -> Self {
        let (support, weights) = labels
            .iter()
            .zip(weights)
            .filter(|(_, w)| !w.is_zero())
            .map(|(l, w)| (l.as_ref().to_string(), w.clone()))
            .unzip();
        DiscreteMeasure { support, weights }
    }

    pub fn total_mass(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        self.validate().is_ok() && self.total_mass() == Rational::one()
    }

    pub fn weight_of(&self, label: &str) -> Rational {
        self.support
            .iter()
            .position(|l| l == label)
            .map(|i| self.weights[i].clone())
            .unwrap_or_default()
    }

    /// Dense weight vector aligned with `labels`; fails if the support leaves `labels`.
    pub fn dense_over<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<Rational>> {
        let index: HashMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_ref(), i))
            .collect();
        let mut dense = vec![Rational::zero(); labels.len()];
        for (l, w) in self.support.iter().zip(&self.weights) {
            let i = *index
                .get(l.as_str())
                .ok_or_else(|| Error::UnknownLabel(l.clone()))?;
            dense[i] += w;
        }
        Ok(dense)
    }

    /// Scale all weights so the total mass is one.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.total_mass();
        if !mass.is_positive() {
            return Err(Error::Invalid("cannot normalise a zero measure".into()));
        }
        Ok(DiscreteMeasure {
            support: self.support.clone(),
            weights: self.weights.iter().map(|w| w / &mass).collect(),
        })
    }

    pub(crate) fn require_probability(&self, what: &str) -> Result<()> {
        self.validate()?;
        if self.total_mass() != Rational::one() {
            return Err(Error::Invalid(format!(
                "{what} must have total mass 1, found {}",
                self.total_mass()
            )));
        }
        Ok(())
    }
}

/// The mixture `x ↦ Σ_f m(f)·A[f][x]`, a point of the integral hull of the rows
/// when `m` is a probability.
pub fn integral(m: &DiscreteMeasure, a: &FamilyMatrix) -> Result<Vec<Rational>> {
    let w = m.dense_over(a.row_labels())?;
    Ok(mixture(&w, a))
}

/// Dense-weight version of [`integral`].
pub fn mixture(weights: &[Rational], a: &FamilyMatrix) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.n_cols()];
    for (w, row) in weights.iter().zip(a.rows()) {
        if w.is_zero() {
            continue;
        }
        for (o, v) in out.iter_mut().zip(row) {
            *o += w * v;
        }
    }
    out
}

/// Column-side pairing `f ↦ Σ_x m(x)·A[f][x]` for a measure over points.
pub fn pairing_over_points(m: &DiscreteMeasure, a: &FamilyMatrix) -> Result<Vec<Rational>> {
    let w = m.dense_over(a.col_labels())?;
    Ok(a.rows()
        .iter()
        .map(|row| crate::rational::dot(row, &w))
        .collect())
}

/// Convex-combination representation of a probability over points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteApproximation {
    pub points: Vec<String>,
    pub weights: Vec<Rational>,
    /// `max_f |∫f dm − Σ_j f(x_j)α_j|`; identically zero for finite support.
    pub error: Rational,
}

/// Approximate a probability over points by finitely many points and convex
/// weights. With finite support the approximation is the measure itself and
/// the error is exactly zero, so no tolerance parameter is needed.
pub fn finite_approximation(m: &DiscreteMeasure, a: &FamilyMatrix) -> Result<FiniteApproximation> {
    m.require_probability("approximated measure")?;
    let exact = pairing_over_points(m, a)?;
    let points: Vec<String> = m.support.clone();
    let weights: Vec<Rational> = m.weights.clone();
    let cols = a.col_indices(&points)?;
    let error = a
        .rows()
        .iter()
        .zip(&exact)
        .map(|(row, e)| {
            let approx: Rational = cols.iter().zip(&weights).map(|(&j, w)| &row[j] * w).sum();
            (e - approx).abs()
        })
        .reduce(Rational::max)
        .unwrap_or_default();
    Ok(FiniteApproximation {
        points,
        weights,
        error,
    })
}
