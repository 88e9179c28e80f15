//! Domination by mixtures: a dominating measure or a finite balancedness
//! violation, integral-hull membership, and the polyhedral-norm Fan case.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve, LpOutcome, Relation, StandardLp};
use crate::model::{mixture, DiscreteMeasure, FamilyMatrix};
use crate::rational::{dot, max_of, primitive_direction, Rational};

/// A family `F` and targets `G` over the same points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominationInstance {
    pub family: FamilyMatrix,
    pub targets: FamilyMatrix,
}

impl DominationInstance {
    /// Target columns are reordered to match the family's column order.
    pub fn new(family: FamilyMatrix, targets: FamilyMatrix) -> Result<Self> {
        if family.n_cols() != targets.n_cols() {
            return Err(Error::Dimension(format!(
                "family has {} points, targets have {}",
                family.n_cols(),
                targets.n_cols()
            )));
        }
        let order = targets.col_indices(family.col_labels())?;
        let targets = targets.select_cols(&order)?;
        Ok(DominationInstance { family, targets })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancePair {
    pub target: String,
    pub delta: DiscreteMeasure,
    /// Positive integer replication count.
    pub multiplicity: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceViolation {
    pub pairs: Vec<BalancePair>,
    /// `Σ k_i⟨g_i, δ_i⟩ − sup_f ⟨f, Σ k_i δ_i⟩`, strictly positive.
    pub margin: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DominationOutcome {
    Dominated(DiscreteMeasure),
    Violation(BalanceViolation),
}

/// `Σ k_i⟨g_i, δ_i⟩ − max_f ⟨f, Σ k_i δ_i⟩`; the balance inequality holds for
/// the pairs iff this is `≤ 0`. An empty list gives 0.
pub fn balance_margin(inst: &DominationInstance, pairs: &[BalancePair]) -> Result<Rational> {
    let x = inst.family.col_labels();
    let mut lhs = Rational::zero();
    let mut total = vec![Rational::zero(); x.len()];
    for p in pairs {
        if !p.multiplicity.is_integer() || !p.multiplicity.is_positive() {
            return Err(Error::Invalid(format!(
                "multiplicity {} is not a positive integer",
                p.multiplicity
            )));
        }
        p.delta.require_probability("balance delta")?;
        let g = inst.targets.row(inst.targets.row_index(&p.target)?);
        let d = p.delta.dense_over(x)?;
        lhs += &p.multiplicity * dot(g, &d);
        for (t, v) in total.iter_mut().zip(&d) {
            *t += &p.multiplicity * v;
        }
    }
    let rhs = max_of(inst.family.rows().iter().map(|f| dot(f, &total))).unwrap();
    Ok(lhs - rhs)
}

/// Evaluate the balance inequality on a finite list of pairs.
pub fn verify_balance(inst: &DominationInstance, pairs: &[BalancePair]) -> Result<bool> {
    Ok(!balance_margin(inst, pairs)?.is_positive())
}

/// `g(x) ≤ Σ_f m(f) f(x)` for every target and point.
pub fn verify_dominating(inst: &DominationInstance, m: &DiscreteMeasure) -> Result<bool> {
    m.require_probability("dominating measure")?;
    let w = m.dense_over(inst.family.row_labels())?;
    let mix = mixture(&w, &inst.family);
    Ok(inst
        .targets
        .rows()
        .iter()
        .all(|g| g.iter().zip(&mix).all(|(gv, mv)| gv <= mv)))
}

/// Decide whether some `m ∈ Δ(F)` dominates every target pointwise.
///
/// On infeasibility the Farkas multipliers `y(g,x) ≥ 0` are grouped per target,
/// normalised into `δ_g`, and their masses scaled to coprime integers.
pub fn find_dominating_measure(inst: &DominationInstance) -> Result<DominationOutcome> {
    let a = &inst.family;
    let nf = a.n_rows();
    let nx = a.n_cols();
    let mut lp = StandardLp::feasibility(nf);
    for g in inst.targets.rows() {
        for (x, gv) in g.iter().enumerate() {
            lp.add_constraint(a.column(x), Relation::Ge, gv.clone());
        }
    }
    lp.add_constraint(vec![Rational::one(); nf], Relation::Eq, Rational::one());

    match solve(&lp)? {
        LpOutcome::Optimal(opt) => Ok(DominationOutcome::Dominated(DiscreteMeasure::from_dense(
            a.row_labels(),
            &opt.primal,
        ))),
        LpOutcome::Infeasible { farkas } => {
            let mut masses = Vec::new();
            let mut deltas = Vec::new();
            for (k, chunk) in farkas.chunks(nx).take(inst.targets.n_rows()).enumerate() {
                let mass: Rational = chunk.iter().sum();
                if mass.is_positive() {
                    let d: Vec<Rational> = chunk.iter().map(|y| y / &mass).collect();
                    deltas.push((k, DiscreteMeasure::from_dense(a.col_labels(), &d)));
                    masses.push(mass);
                }
            }
            let counts = primitive_direction(&masses);
            let pairs: Vec<BalancePair> = deltas
                .into_iter()
                .zip(counts)
                .map(|((k, delta), multiplicity)| BalancePair {
                    target: inst.targets.row_labels()[k].clone(),
                    delta,
                    multiplicity,
                })
                .collect();
            let margin = balance_margin(inst, &pairs)?;
            if !margin.is_positive() {
                return Err(Error::Internal("Farkas ray did not yield a balance violation".into()));
            }
            Ok(DominationOutcome::Violation(BalanceViolation { pairs, margin }))
        }
        LpOutcome::Unbounded { .. } => Err(Error::Internal("feasibility LP reported unbounded".into())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HullOutcome {
    InHull(DiscreteMeasure),
    /// Integer weights `w` over the points with `⟨g,w⟩ > max_f ⟨f,w⟩`.
    NotInHull { weights: Vec<Rational>, margin: Rational },
}

/// `⟨g,w⟩ − max_f ⟨f,w⟩`.
pub fn separation_margin(a: &FamilyMatrix, g: &[Rational], w: &[Rational]) -> Result<Rational> {
    if g.len() != a.n_cols() || w.len() != a.n_cols() {
        return Err(Error::Dimension("separating weights must be indexed by the points".into()));
    }
    let best = max_of(a.rows().iter().map(|f| dot(f, w))).unwrap();
    Ok(dot(g, w) - best)
}

/// Decide `g ∈ conv(rows of A)` by an equality-constrained LP.
pub fn hull_membership(a: &FamilyMatrix, g: &[Rational]) -> Result<HullOutcome> {
    if g.len() != a.n_cols() {
        return Err(Error::Dimension(format!(
            "target has {} entries, family has {} points",
            g.len(),
            a.n_cols()
        )));
    }
    let nf = a.n_rows();
    let mut lp = StandardLp::feasibility(nf);
    for (x, gv) in g.iter().enumerate() {
        lp.add_constraint(a.column(x), Relation::Eq, gv.clone());
    }
    lp.add_constraint(vec![Rational::one(); nf], Relation::Eq, Rational::one());
    match solve(&lp)? {
        LpOutcome::Optimal(opt) => Ok(HullOutcome::InHull(DiscreteMeasure::from_dense(a.row_labels(), &opt.primal))),
        LpOutcome::Infeasible { farkas } => {
            let weights = primitive_direction(&farkas[..a.n_cols()]);
            let margin = separation_margin(a, g, &weights)?;
            if !margin.is_positive() {
                return Err(Error::Internal("Farkas ray does not separate".into()));
            }
            Ok(HullOutcome::NotInHull { weights, margin })
        }
        LpOutcome::Unbounded { .. } => Err(Error::Internal("feasibility LP reported unbounded".into())),
    }
}

/// The instance `{±f}` against targets `{g, −g}`, written over doubled points
/// `x` and `−x` so one mixture must dominate `g` and `−g` simultaneously.
pub fn symmetrized_instance(a: &FamilyMatrix, g: &[Rational]) -> Result<DominationInstance> {
    if g.len() != a.n_cols() {
        return Err(Error::Dimension("target must be indexed by the points".into()));
    }
    let mut cols = a.col_labels().to_vec();
    cols.extend(a.col_labels().iter().map(|x| format!("-{x}")));
    let double = |v: &[Rational]| -> Vec<Rational> { v.iter().cloned().chain(v.iter().map(|e| -e)).collect() };
    let family = FamilyMatrix::new(
        a.row_labels().to_vec(),
        cols.clone(),
        a.rows().iter().map(|f| double(f)).collect(),
    )?;
    let targets = FamilyMatrix::new(vec!["g".into()], cols, vec![double(g)])?;
    DominationInstance::new(family, targets)
}

/// Hull membership decided through domination of `g` and `−g`.
pub fn hull_via_domination(a: &FamilyMatrix, g: &[Rational]) -> Result<DominationOutcome> {
    find_dominating_measure(&symmetrized_instance(a, g)?)
}

/// Polyhedral norms on `Q^d`; the functional side uses the dual norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyNorm {
    L1,
    Linf,
}

impl PolyNorm {
    pub fn norm(self, v: &[Rational]) -> Rational {
        match self {
            PolyNorm::L1 => v.iter().map(Rational::abs).sum(),
            PolyNorm::Linf => max_of(v.iter().map(Rational::abs)).unwrap_or_else(Rational::zero),
        }
    }

    pub fn dual(self) -> PolyNorm {
        match self {
            PolyNorm::L1 => PolyNorm::Linf,
            PolyNorm::Linf => PolyNorm::L1,
        }
    }
}

impl std::str::FromStr for PolyNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(PolyNorm::L1),
            "linf" => Ok(PolyNorm::Linf),
            other => Err(Error::Parse(format!("unknown norm `{other}` (expected l1 or linf)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FanOutcome {
    Functional(Vec<Rational>),
    /// Convex weights `p` with `Σ p_i g_i > ρ‖Σ p_i x_i‖`.
    Violation { weights: Vec<Rational>, margin: Rational },
}

fn check_fan_input(points: &[Vec<Rational>], values: &[Rational], rho: &Rational) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::Invalid("empty point list".into()));
    }
    if points.len() != values.len() {
        return Err(Error::Dimension(format!("{} points but {} values", points.len(), values.len())));
    }
    if !rho.is_positive() {
        return Err(Error::Invalid("radius must be positive".into()));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::Dimension("points have different dimensions".into()));
    }
    Ok(d)
}

/// `Σ p_i g_i − ρ‖Σ p_i x_i‖`.
pub fn fan_margin(points: &[Vec<Rational>], values: &[Rational], rho: &Rational, norm: PolyNorm, p: &[Rational]) -> Rational {
    let d = points[0].len();
    let mut sum = vec![Rational::zero(); d];
    for (pi, x) in p.iter().zip(points) {
        for (s, v) in sum.iter_mut().zip(x) {
            *s += pi * v;
        }
    }
    dot(p, values) - rho * norm.norm(&sum)
}

/// `g_i ≤ ⟨φ, x_i⟩` for all `i` and dual-norm(φ) ≤ ρ.
pub fn verify_fan_functional(points: &[Vec<Rational>], values: &[Rational], rho: &Rational, norm: PolyNorm, phi: &[Rational]) -> bool {
    norm.dual().norm(phi) <= *rho
        && points
            .iter()
            .zip(values)
            .all(|(x, g)| x.len() == phi.len() && *g <= dot(phi, x))
}

/// Find `φ` with dual norm at most `ρ` dominating `g` on the points, or convex
/// weights violating the balance condition `Σ p_i g(x_i) ≤ ρ‖Σ p_i x_i‖`.
pub fn fan_norm_domination(points: &[Vec<Rational>], values: &[Rational], rho: &Rational, norm: PolyNorm) -> Result<FanOutcome> {
    let d = check_fan_input(points, values, rho)?;
    let n = points.len();
    let lp = match norm {
        // Dual ℓ∞ ball: a box on φ.
        PolyNorm::L1 => {
            let mut lp = StandardLp::feasibility(d);
            for k in 0..d {
                lp.set_bounds(k, Some(-rho), Some(rho.clone()));
            }
            for (x, g) in points.iter().zip(values) {
                lp.add_constraint(x.clone(), Relation::Ge, g.clone());
            }
            lp
        }
        // Dual ℓ1 ball: φ = φ⁺ − φ⁻ with Σ(φ⁺ + φ⁻) ≤ ρ.
        PolyNorm::Linf => {
            let mut lp = StandardLp::feasibility(2 * d);
            for (x, g) in points.iter().zip(values) {
                let coeffs = x.iter().cloned().chain(x.iter().map(|v| -v)).collect();
                lp.add_constraint(coeffs, Relation::Ge, g.clone());
            }
            lp.add_constraint(vec![Rational::one(); 2 * d], Relation::Le, rho.clone());
            lp
        }
    };
    match solve(&lp)? {
        LpOutcome::Optimal(opt) => {
            let phi = match norm {
                PolyNorm::L1 => opt.primal,
                PolyNorm::Linf => (0..d).map(|k| &opt.primal[k] - &opt.primal[d + k]).collect(),
            };
            Ok(FanOutcome::Functional(phi))
        }
        LpOutcome::Infeasible { farkas } => {
            let u = &farkas[..n];
            let total: Rational = u.iter().sum();
            if !total.is_positive() {
                return Err(Error::Internal("Farkas ray has no weight on the points".into()));
            }
            let weights: Vec<Rational> = u.iter().map(|v| v / &total).collect();
            let margin = fan_margin(points, values, rho, norm, &weights);
            if !margin.is_positive() {
                return Err(Error::Internal("Farkas ray does not violate the balance condition".into()));
            }
            Ok(FanOutcome::Violation { weights, margin })
        }
        LpOutcome::Unbounded { .. } => Err(Error::Internal("feasibility LP reported unbounded".into())),
    }
}

/// One marginal target: a function on the points of one factor of a product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalTarget {
    pub name: String,
    pub factor: usize,
    pub values: Vec<Rational>,
}

/// Labels of the product points, in lexicographic order, joined by `|`.
pub fn product_points<S: AsRef<str>>(factors: &[Vec<S>]) -> Vec<(String, Vec<usize>)> {
    let mut out = vec![(String::new(), Vec::new())];
    for (k, factor) in factors.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * factor.len());
        for (label, idx) in &out {
            for (i, p) in factor.iter().enumerate() {
                let l = if k == 0 {
                    p.as_ref().to_string()
                } else {
                    format!("{label}|{}", p.as_ref())
                };
                let mut j = idx.clone();
                j.push(i);
                next.push((l, j));
            }
        }
        out = next;
    }
    out
}

/// Target rows `g_α∘π_α` over the product of the factors. Together with any
/// family over the same product this is an ordinary [`DominationInstance`].
pub fn lift_marginals<S: AsRef<str>>(factors: &[Vec<S>], marginals: &[MarginalTarget]) -> Result<FamilyMatrix> {
    if factors.is_empty() || marginals.is_empty() {
        return Err(Error::Invalid("need at least one factor and one marginal".into()));
    }
    let points = product_points(factors);
    let mut rows = Vec::new();
    for m in marginals {
        let factor = factors
            .get(m.factor)
            .ok_or_else(|| Error::Invalid(format!("marginal `{}` names factor {}", m.name, m.factor)))?;
        if m.values.len() != factor.len() {
            return Err(Error::Dimension(format!("marginal `{}` has the wrong length", m.name)));
        }
        rows.push(points.iter().map(|(_, idx)| m.values[idx[m.factor]].clone()).collect());
    }
    FamilyMatrix::new(
        marginals.iter().map(|m| m.name.clone()).collect(),
        points.into_iter().map(|(l, _)| l).collect(),
        rows,
    )
}
