//! The exhaustion functional `I_F` and finite exhaustions of the point set.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimax::{expect_optimal, mixed_column_lp, mixed_row_lp};
use crate::lp::solve;
use crate::model::{integral, DiscreteMeasure, FamilyMatrix};
use crate::rational::{q, Rational};

/// A family with every value replaced by `|f(x)| ∧ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClippedFamily(FamilyMatrix);

impl ClippedFamily {
    pub fn new(a: &FamilyMatrix) -> Self {
        let one = Rational::one();
        ClippedFamily(a.map(|v| v.abs().min(one.clone())))
    }

    pub fn matrix(&self) -> &FamilyMatrix {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionBound {
    /// `I_F(U) = min_{δ∈Δ(U)} max_f ⟨f,δ⟩`.
    pub value: Rational,
    /// Optimal `δ` over `U`.
    pub delta: DiscreteMeasure,
    /// Optimal `m` over `F` for `max_m min_{x∈U} Σ m(f) f(x)`.
    pub measure: DiscreteMeasure,
}

/// Compute `I_F(U)` and its dual form as two separate LPs; the values must agree.
pub fn intersection_bound<S: AsRef<str>>(a: &ClippedFamily, subset: &[S]) -> Result<IntersectionBound> {
    if subset.is_empty() {
        return Err(Error::Invalid("subset must be non-empty".into()));
    }
    let m = a.matrix();
    let cols = m.col_indices(subset)?;
    // Rows are the points of U, columns the functions.
    let sub = m.select_cols(&cols)?.transpose();
    let primal = expect_optimal(solve(&mixed_row_lp(&sub))?, "I_F primal")?;
    let dual = expect_optimal(solve(&mixed_column_lp(&sub))?, "I_F dual")?;
    if primal.value != dual.value {
        return Err(Error::Internal(format!(
            "I_F duality gap {} vs {}",
            primal.value, dual.value
        )));
    }
    Ok(IntersectionBound {
        value: primal.value,
        delta: DiscreteMeasure::from_dense(sub.row_labels(), &primal.primal[..sub.n_rows()]),
        measure: DiscreteMeasure::from_dense(sub.col_labels(), &dual.primal[..sub.n_cols()]),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub label: String,
    pub points: Vec<String>,
}

/// A clipped family and labelled pieces of its points. Pieces may overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExhaustionInstance {
    pub family: ClippedFamily,
    pub pieces: Vec<Piece>,
}

impl ExhaustionInstance {
    pub fn new(family: ClippedFamily, pieces: Vec<Piece>) -> Result<Self> {
        for p in &pieces {
            family.matrix().col_indices(&p.points)?;
        }
        Ok(ExhaustionInstance { family, pieces })
    }

    /// `X₀ = X \ ∪ X_α`, in column order.
    pub fn remainder(&self) -> Vec<String> {
        let covered: BTreeSet<&str> = self.pieces.iter().flat_map(|p| p.points.iter().map(String::as_str)).collect();
        self.family
            .matrix()
            .col_labels()
            .iter()
            .filter(|x| !covered.contains(x.as_str()))
            .cloned()
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceBound {
    pub label: String,
    /// `1/p_α`.
    pub threshold: Rational,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustionBuild {
    pub pieces: Vec<Piece>,
    pub remainder: Vec<String>,
    /// `I_F(X_α)` for every non-empty piece, each strictly above its threshold.
    pub bounds: Vec<PieceBound>,
}

fn check_levels(generators: &[DiscreteMeasure], levels: &[u64]) -> Result<()> {
    if generators.len() != levels.len() {
        return Err(Error::Dimension(format!(
            "{} measures but {} levels",
            generators.len(),
            levels.len()
        )));
    }
    if levels.contains(&0) {
        return Err(Error::Invalid("levels must be positive integers".into()));
    }
    for g in generators {
        g.require_probability("generating measure")?;
    }
    Ok(())
}

/// Pieces `X_α = {x : g_α(x) > 1/p_α}` with `g_α = ∫ f G_α(df)`. Empty pieces
/// are dropped; each kept piece has `I_F(X_α) ≥ 1/p_α`, checked here.
pub fn build_exhaustion(a: &ClippedFamily, generators: &[DiscreteMeasure], levels: &[u64]) -> Result<ExhaustionBuild> {
    check_levels(generators, levels)?;
    let m = a.matrix();
    let mut pieces = Vec::new();
    let mut bounds = Vec::new();
    for (k, (g, &p)) in generators.iter().zip(levels).enumerate() {
        let threshold = q(1, p as i64);
        let values = integral(g, m)?;
        let points: Vec<String> = values
            .iter()
            .zip(m.col_labels())
            .filter(|(v, _)| **v > threshold)
            .map(|(_, x)| x.clone())
            .collect();
        if points.is_empty() {
            continue;
        }
        let label = format!("X{}", k + 1);
        let value = intersection_bound(a, &points)?.value;
        if value < threshold {
            return Err(Error::Internal(format!("piece {label} has I_F {value} below {threshold}")));
        }
        bounds.push(PieceBound {
            label: label.clone(),
            threshold,
            value,
        });
        pieces.push(Piece { label, points });
    }
    let remainder = ExhaustionInstance::new(a.clone(), pieces.clone())?.remainder();
    Ok(ExhaustionBuild { pieces, remainder, bounds })
}

/// Smallest `p_α` with `1/p_α` strictly below the least positive value of
/// `g_α`, so the piece is the whole positivity set of `g_α`.
pub fn auto_levels(a: &ClippedFamily, generators: &[DiscreteMeasure]) -> Result<Vec<u64>> {
    generators
        .iter()
        .map(|g| {
            let values = integral(g, a.matrix())?;
            let least = values.into_iter().filter(Rational::is_positive).reduce(Rational::min);
            Ok(match least {
                // 1/p < v ⟺ p > 1/v; values are ≤ 1 after clipping.
                Some(v) => {
                    let inv = v.recip();
                    let floor = inv.numer() / inv.denom();
                    u64::try_from(floor + 1u32).map_err(|_| Error::TooLarge("level exceeds u64".into()))?
                }
                None => 1,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustionReport {
    /// Cardinality of the index set; trivially satisfied for finitely many pieces.
    pub cardinality: bool,
    /// `I_F(X_α) > 0` for every piece.
    pub pieces_positive: bool,
    /// `I_F(X_α)` per piece; `None` for an empty piece.
    pub piece_values: Vec<Option<Rational>>,
    /// Every function vanishes on the remainder.
    pub remainder_null: bool,
    pub remainder: Vec<String>,
    pub valid: bool,
}

pub fn verify_exhaustion(inst: &ExhaustionInstance) -> Result<ExhaustionReport> {
    let mut piece_values = Vec::new();
    for p in &inst.pieces {
        piece_values.push(if p.points.is_empty() {
            None
        } else {
            Some(intersection_bound(&inst.family, &p.points)?.value)
        });
    }
    let pieces_positive = piece_values.iter().all(|v| v.as_ref().is_some_and(Rational::is_positive));
    let remainder = inst.remainder();
    let m = inst.family.matrix();
    let rest = m.col_indices(&remainder)?;
    let remainder_null = m.rows().iter().all(|f| rest.iter().all(|&j| f[j].is_zero()));
    Ok(ExhaustionReport {
        cardinality: true,
        pieces_positive,
        piece_values,
        remainder_null,
        remainder,
        valid: pieces_positive && remainder_null,
    })
}

/// `Σ_k w_k G_k`, with default weights proportional to `2^{−k}`. Given weights
/// must be positive and are normalised.
pub fn combine_countable(generators: &[DiscreteMeasure], weights: Option<&[Rational]>) -> Result<DiscreteMeasure> {
    if generators.is_empty() {
        return Err(Error::Invalid("no measures to combine".into()));
    }
    let raw: Vec<Rational> = match weights {
        Some(w) if w.len() != generators.len() => {
            return Err(Error::Dimension(format!(
                "{} weights for {} measures",
                w.len(),
                generators.len()
            )))
        }
        Some(w) => {
            if w.iter().any(|v| !v.is_positive()) {
                return Err(Error::Invalid("weights must be positive".into()));
            }
            w.to_vec()
        }
        None => (1..=generators.len()).map(|k| Rational::from(2).pow(-(k as i32))).collect(),
    };
    let total: Rational = raw.iter().sum();
    let mut support: Vec<String> = Vec::new();
    let mut mass: Vec<Rational> = Vec::new();
    for (g, w) in generators.iter().zip(&raw) {
        g.require_probability("combined measure")?;
        for (label, v) in g.support.iter().zip(&g.weights) {
            let share = w / &total * v;
            match support.iter().position(|s| s == label) {
                Some(i) => mass[i] += share,
                None => {
                    support.push(label.clone());
                    mass.push(share);
                }
            }
        }
    }
    Ok(DiscreteMeasure::from_dense(&support, &mass))
}

/// Normalised default weights `(2^{−1}, …, 2^{−n})`.
pub fn default_weights(n: usize) -> Vec<Rational> {
    let raw: Vec<Rational> = (1..=n).map(|k| Rational::from(2).pow(-(k as i32))).collect();
    let total: Rational = raw.iter().sum();
    raw.iter().map(|w| w / &total).collect()
}
