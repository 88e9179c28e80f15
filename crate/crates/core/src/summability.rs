//! Summing constants `C_g`, the `ℓ_F(X)` norm, and a net-relaxed
//! p-summing estimate for matrices.

use serde::{Deserialize, Serialize};

use crate::domination::PolyNorm;
use crate::error::{Error, Result};
use crate::lp::{solve, LpOutcome, Relation, Sense, StandardLp};
use crate::model::{default_labels, DiscreteMeasure, FamilyMatrix};
use crate::rational::{dot, max_of, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummingWitness {
    pub finite: bool,
    /// Least `C` with `|g| ≤ C·Σ_f m(f)|f|` for some probability `m`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub constant: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub measure: Option<DiscreteMeasure>,
    /// Dual weights `ν ≥ 0` over the points with `Σ_x ν(x)|f(x)| ≤ 1` for every
    /// `f` and `Σ_x ν(x)|g(x)| = C`, certifying that `C` is least.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dual_weights: Option<Vec<Rational>>,
    /// A point where `g ≠ 0` but every `f` vanishes.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_point: Option<String>,
}

fn check_target(a: &FamilyMatrix, g: &[Rational]) -> Result<()> {
    if g.len() != a.n_cols() {
        return Err(Error::Dimension(format!(
            "target has {} entries, family has {} points",
            g.len(),
            a.n_cols()
        )));
    }
    Ok(())
}

/// `min Σ μ(f)` s.t. `Σ_f μ(f)|f(x)| ≥ |g(x)|`, `μ ≥ 0`; `C = Σμ`, `m = μ/C`.
pub fn summing_constant(a: &FamilyMatrix, g: &[Rational]) -> Result<SummingWitness> {
    check_target(a, g)?;
    let abs = a.abs();
    let mut lp = StandardLp::new(Sense::Minimize, vec![Rational::one(); a.n_rows()]);
    for (x, gv) in g.iter().enumerate() {
        lp.add_constraint(abs.column(x), Relation::Ge, gv.abs());
    }
    match solve(&lp)? {
        LpOutcome::Optimal(opt) => {
            let c = opt.value;
            let measure = if c.is_zero() {
                DiscreteMeasure::point_mass(a.row_labels()[0].clone())
            } else {
                let w: Vec<Rational> = opt.primal.iter().map(|v| v / &c).collect();
                DiscreteMeasure::from_dense(a.row_labels(), &w)
            };
            Ok(SummingWitness {
                finite: true,
                constant: Some(c),
                measure: Some(measure),
                dual_weights: Some(
                    opt.dual
                        .into_iter()
                        .zip(g)
                        .map(|(nu, gv)| if gv.is_zero() { Rational::zero() } else { nu })
                        .collect(),
                ),
                witness_point: None,
            })
        }
        LpOutcome::Infeasible { farkas } => {
            let x = (0..a.n_cols())
                .find(|&x| farkas[x].is_positive() && !g[x].is_zero())
                .ok_or_else(|| Error::Internal("Farkas ray names no point".into()))?;
            if a.rows().iter().any(|f| !f[x].is_zero()) {
                return Err(Error::Internal("infeasibility point has a non-zero function".into()));
            }
            Ok(SummingWitness {
                finite: false,
                constant: None,
                measure: None,
                dual_weights: None,
                witness_point: Some(a.col_labels()[x].clone()),
            })
        }
        LpOutcome::Unbounded { .. } => Err(Error::Internal("summing LP reported unbounded".into())),
    }
}

/// Exact re-check of a [`SummingWitness`] against `(A, g)`.
pub fn verify_summing(a: &FamilyMatrix, g: &[Rational], w: &SummingWitness) -> Result<bool> {
    check_target(a, g)?;
    if !w.finite {
        let Some(label) = &w.witness_point else {
            return Ok(false);
        };
        let x = a.col_index(label)?;
        return Ok(!g[x].is_zero() && a.rows().iter().all(|f| f[x].is_zero()));
    }
    let (Some(c), Some(m), Some(nu)) = (&w.constant, &w.measure, &w.dual_weights) else {
        return Ok(false);
    };
    m.require_probability("summing measure")?;
    if c.is_negative() || nu.len() != a.n_cols() || nu.iter().any(Rational::is_negative) {
        return Ok(false);
    }
    if nu.iter().zip(g).any(|(v, gv)| gv.is_zero() && !v.is_zero()) {
        return Ok(false);
    }
    let weights = m.dense_over(a.row_labels())?;
    let abs = a.abs();
    for (x, gv) in g.iter().enumerate() {
        if gv.abs() > c * dot(&weights, &abs.column(x)) {
            return Ok(false);
        }
    }
    let dual_ok = abs.rows().iter().all(|f| dot(f, nu) <= Rational::one());
    let gabs: Vec<Rational> = g.iter().map(Rational::abs).collect();
    Ok(dual_ok && dot(nu, &gabs) == *c)
}

/// `max_f Σ_x |f(x)·h(x)|`.
pub fn ell_norm(a: &FamilyMatrix, h: &[Rational]) -> Result<Rational> {
    check_target(a, h)?;
    Ok(max_of(a.rows().iter().map(|f| f.iter().zip(h).map(|(u, v)| (u * v).abs()).sum())).unwrap())
}

/// The summing instance behind a net-relaxed p-summing estimate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PietschEstimate {
    /// Certified least constant for the net relaxation: a lower bound for the
    /// constant over the whole dual sphere.
    pub witness: SummingWitness,
    /// Net functionals as rows, sample points as columns.
    pub family: FamilyMatrix,
    /// `‖T x‖^p` per sample point.
    pub target: Vec<Rational>,
}

pub(crate) fn check_pietsch_shapes(
    operator: &[Vec<Rational>],
    net: &[Vec<Rational>],
    sample: &[Vec<Rational>],
) -> Result<usize> {
    if operator.is_empty() || net.is_empty() || sample.is_empty() {
        return Err(Error::Invalid("operator, net and sample must be non-empty".into()));
    }
    let d = operator[0].len();
    if d == 0 || operator.iter().any(|r| r.len() != d) {
        return Err(Error::Dimension("operator rows must share a positive length".into()));
    }
    if net.iter().chain(sample).any(|v| v.len() != d) {
        return Err(Error::Dimension(format!("net and sample vectors must have dimension {d}")));
    }
    Ok(d)
}

pub(crate) fn apply(operator: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
    operator.iter().map(|row| dot(row, x)).collect()
}

/// Family `F = {x ↦ |⟨x*, x⟩|^p : x* ∈ net}` and target `g(x) = ‖Tx‖^p`, both
/// on the sample, solved exactly. `p` must be a positive integer here.
pub fn pietsch_estimate(
    operator: &[Vec<Rational>],
    p: u32,
    net: &[Vec<Rational>],
    sample: &[Vec<Rational>],
    norm: PolyNorm,
) -> Result<PietschEstimate> {
    if p == 0 {
        return Err(Error::Invalid("p must be at least 1".into()));
    }
    check_pietsch_shapes(operator, net, sample)?;
    let e = p as i32;
    let rows: Vec<Vec<Rational>> = net
        .iter()
        .map(|xs| sample.iter().map(|x| dot(xs, x).abs().pow(e)).collect())
        .collect();
    let target: Vec<Rational> = sample.iter().map(|x| norm.norm(&apply(operator, x)).pow(e)).collect();
    let family = FamilyMatrix::new(default_labels("n", net.len()), default_labels("s", sample.len()), rows)?;
    let witness = summing_constant(&family, &target)?;
    Ok(PietschEstimate {
        witness,
        family,
        target,
    })
}
