//! Exact rational linear programming.
//!
//! A dense two-phase simplex over [`Rational`] with Bland's least-index rule,
//! so it terminates on every instance and is deterministic. Every outcome
//! carries a certificate that can be checked without trusting the solver:
//!
//! * `Optimal`: primal point, dual multipliers and the common value. The
//!   Lagrangian bound built from the duals equals the primal value exactly.
//! * `Infeasible`: nonnegative row multipliers whose combination, taken over
//!   the variable box, yields `0 ≥ positive` (Farkas).
//! * `Unbounded`: a feasible point and an improving recession direction.
//!
//! Sign conventions (user level):
//!
//! * Duals of a maximisation: `y ≥ 0` on `≤` rows, `y ≤ 0` on `≥` rows, free on
//!   `=` rows; for a minimisation the inequality signs swap.
//! * Farkas multipliers apply to rows written in `≥` form (a `≤` row is
//!   negated first); they are `≥ 0` on inequalities and free on equalities.

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }

    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Box constraint on one variable. `None` means unbounded on that side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarBounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Default for VarBounds {
    fn default() -> Self {
        VarBounds {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }
}

impl VarBounds {
    pub fn free() -> Self {
        VarBounds {
            lower: None,
            upper: None,
        }
    }

    fn contains(&self, x: &Rational) -> bool {
        self.lower.as_ref().is_none_or(|l| x >= l) && self.upper.as_ref().is_none_or(|u| x <= u)
    }

    /// `sup { w·x : x in the box }`, or `None` if unbounded.
    fn sup_linear(&self, w: &Rational) -> Option<Rational> {
        if w.is_zero() {
            Some(Rational::zero())
        } else if w.is_positive() {
            self.upper.as_ref().map(|u| w * u)
        } else {
            self.lower.as_ref().map(|l| w * l)
        }
    }

    fn inf_linear(&self, w: &Rational) -> Option<Rational> {
        self.sup_linear(&-w).map(|v| -v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `optimise objective·x` subject to row constraints and per-variable boxes.
/// Variables default to `x ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardLp {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBounds>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimum {
    pub primal: Vec<Rational>,
    pub dual: Vec<Rational>,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(Optimum),
    Infeasible { farkas: Vec<Rational> },
    Unbounded { point: Vec<Rational>, direction: Vec<Rational> },
}

impl StandardLp {
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        StandardLp {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![VarBounds::default(); n],
        }
    }

    /// Pure feasibility problem in `n` nonnegative variables.
    pub fn feasibility(n: usize) -> Self {
        StandardLp::new(Sense::Maximize, vec![Rational::zero(); n])
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> usize {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_free(&mut self, var: usize) {
        self.bounds[var] = VarBounds::free();
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Rational>, upper: Option<Rational>) {
        self.bounds[var] = VarBounds { lower, upper };
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.bounds.len() != n {
            return Err(Error::Dimension(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Dimension(format!(
                    "row {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
                if l > u {
                    return Err(Error::Invalid(format!("variable {j} has lower bound above upper")));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        crate::rational::dot(&self.objective, x)
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.n_vars()
            && self.bounds.iter().zip(x).all(|(b, v)| b.contains(v))
            && self
                .constraints
                .iter()
                .all(|c| c.relation.holds(&crate::rational::dot(&c.coeffs, x), &c.rhs))
    }

    /// Exact optimality check: primal feasibility, dual sign conditions, and
    /// equality between the primal value and the Lagrangian dual bound.
    pub fn verify_optimum(&self, opt: &Optimum) -> bool {
        if !self.is_feasible(&opt.primal)
            || opt.dual.len() != self.constraints.len()
            || self.objective_value(&opt.primal) != opt.value
        {
            return false;
        }
        let max = self.sense == Sense::Maximize;
        for (c, y) in self.constraints.iter().zip(&opt.dual) {
            let ok = match (c.relation, max) {
                (Relation::Eq, _) => true,
                (Relation::Le, true) | (Relation::Ge, false) => !y.is_negative(),
                (Relation::Ge, true) | (Relation::Le, false) => !y.is_positive(),
            };
            if !ok {
                return false;
            }
        }
        let mut bound: Rational = self
            .constraints
            .iter()
            .zip(&opt.dual)
            .map(|(c, y)| &c.rhs * y)
            .sum();
        for (j, b) in self.bounds.iter().enumerate() {
            let reduced = &self.objective[j]
                - self
                    .constraints
                    .iter()
                    .zip(&opt.dual)
                    .map(|(c, y)| &c.coeffs[j] * y)
                    .sum::<Rational>();
            let term = if max {
                b.sup_linear(&reduced)
            } else {
                b.inf_linear(&reduced)
            };
            match term {
                Some(t) => bound += t,
                None => return false,
            }
        }
        bound == opt.value
    }

    /// Combined `≥`-form row `(w, β)` of a set of Farkas multipliers.
    pub fn farkas_combination(&self, multipliers: &[Rational]) -> (Vec<Rational>, Rational) {
        let mut w = vec![Rational::zero(); self.n_vars()];
        let mut beta = Rational::zero();
        for (c, u) in self.constraints.iter().zip(multipliers) {
            let s = if c.relation == Relation::Le { -u } else { u.clone() };
            if s.is_zero() {
                continue;
            }
            for (wj, a) in w.iter_mut().zip(&c.coeffs) {
                *wj += &s * a;
            }
            beta += &s * &c.rhs;
        }
        (w, beta)
    }

    /// Exact check that `multipliers` prove infeasibility: every feasible point
    /// would satisfy `w·x ≥ β`, yet `sup_box w·x < β`.
    pub fn verify_farkas(&self, multipliers: &[Rational]) -> bool {
        if multipliers.len() != self.constraints.len() {
            return false;
        }
        if self
            .constraints
            .iter()
            .zip(multipliers)
            .any(|(c, u)| c.relation != Relation::Eq && u.is_negative())
        {
            return false;
        }
        let (w, beta) = self.farkas_combination(multipliers);
        let mut sup = Rational::zero();
        for (b, wj) in self.bounds.iter().zip(&w) {
            match b.sup_linear(wj) {
                Some(t) => sup += t,
                None => return false,
            }
        }
        sup < beta
    }

    pub fn verify_unbounded(&self, point: &[Rational], direction: &[Rational]) -> bool {
        if !self.is_feasible(point) || direction.len() != self.n_vars() {
            return false;
        }
        for c in &self.constraints {
            let ad = crate::rational::dot(&c.coeffs, direction);
            let ok = match c.relation {
                Relation::Le => !ad.is_positive(),
                Relation::Ge => !ad.is_negative(),
                Relation::Eq => ad.is_zero(),
            };
            if !ok {
                return false;
            }
        }
        for (b, d) in self.bounds.iter().zip(direction) {
            if (b.lower.is_some() && d.is_negative()) || (b.upper.is_some() && d.is_positive()) {
                return false;
            }
        }
        let gain = self.objective_value(direction);
        match self.sense {
            Sense::Maximize => gain.is_positive(),
            Sense::Minimize => gain.is_negative(),
        }
    }
}

/// How a user variable is expressed through nonnegative internal columns.
#[derive(Clone, Debug)]
enum VarMap {
    /// `x = lower + x'`
    Shift { col: usize, lower: Rational },
    /// `x = upper - x'`
    Reflect { col: usize, upper: Rational },
    /// `x = x⁺ - x⁻`
    Split { pos: usize, neg: usize },
}

struct InternalRow {
    coeffs: Vec<Rational>,
    relation: Relation,
    rhs: Rational,
    /// Index of the user constraint, or `None` for an upper-bound row.
    origin: Option<usize>,
    /// `-1` when the row was negated to make the right-hand side nonnegative.
    flip: i8,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    obj: Vec<Rational>,
    basis: Vec<usize>,
    rhs_col: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if p != Rational::one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<Rational>| {
            let factor = row[c].clone();
            if factor.is_zero() {
                return;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    /// Bland's rule: least-index improving column, least-index leaving variable.
    /// Returns `Ok(true)` at optimality, `Err(col)` when `col` is an unbounded ray.
    fn run(&mut self, allowed: impl Fn(usize) -> bool) -> std::result::Result<(), usize> {
        loop {
            let entering = (0..self.rhs_col).find(|&j| allowed(j) && self.obj[j].is_positive());
            let Some(c) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.rhs_col] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(c),
            }
        }
    }

    fn set_objective(&mut self, costs: &[Rational]) {
        let mut obj: Vec<Rational> = costs.to_vec();
        obj.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(&self.rows[i]) {
                if !v.is_zero() {
                    *o -= cb * v;
                }
            }
        }
        self.obj = obj;
    }

    /// `y = c_Bᵀ B⁻¹`, read from the reduced costs of the initial identity columns.
    fn duals(&self, costs: &[Rational], identity: &[usize]) -> Vec<Rational> {
        identity.iter().map(|&j| &costs[j] - &self.obj[j]).collect()
    }
}

/// Solve an LP exactly. Deterministic: identical inputs give identical outputs.
pub fn solve(lp: &StandardLp) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.n_vars();
    let maximize = lp.sense == Sense::Maximize;

    // Variable substitution to nonnegative internal columns.
    let mut maps = Vec::with_capacity(n);
    let mut n_struct = 0usize;
    for b in &lp.bounds {
        let m = match (&b.lower, &b.upper) {
            (Some(l), _) => {
                n_struct += 1;
                VarMap::Shift { col: n_struct - 1, lower: l.clone() }
            }
            (None, Some(u)) => {
                n_struct += 1;
                VarMap::Reflect { col: n_struct - 1, upper: u.clone() }
            }
            (None, None) => {
                n_struct += 2;
                VarMap::Split { pos: n_struct - 2, neg: n_struct - 1 }
            }
        };
        maps.push(m);
    }

    let mut irows: Vec<InternalRow> = Vec::new();
    for (r, c) in lp.constraints.iter().enumerate() {
        let mut coeffs = vec![Rational::zero(); n_struct];
        let mut rhs = c.rhs.clone();
        for (a, m) in c.coeffs.iter().zip(&maps) {
            if a.is_zero() {
                continue;
            }
            match m {
                VarMap::Shift { col, lower } => {
                    coeffs[*col] += a;
                    rhs -= a * lower;
                }
                VarMap::Reflect { col, upper } => {
                    coeffs[*col] -= a;
                    rhs -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[*pos] += a;
                    coeffs[*neg] -= a;
                }
            }
        }
        irows.push(InternalRow { coeffs, relation: c.relation, rhs, origin: Some(r), flip: 1 });
    }
    for (b, m) in lp.bounds.iter().zip(&maps) {
        if let (VarMap::Shift { col, lower }, Some(u)) = (m, &b.upper) {
            let mut coeffs = vec![Rational::zero(); n_struct];
            coeffs[*col] = Rational::one();
            irows.push(InternalRow { coeffs, relation: Relation::Le, rhs: u - lower, origin: None, flip: 1 });
        }
    }
    for row in irows.iter_mut() {
        if row.rhs.is_negative() {
            for v in row.coeffs.iter_mut() {
                *v = -&*v;
            }
            row.rhs = -&row.rhs;
            row.relation = row.relation.flipped();
            row.flip = -1;
        }
    }

    // Internal objective in maximisation form.
    let mut c_struct = vec![Rational::zero(); n_struct];
    for (cj, m) in lp.objective.iter().zip(&maps) {
        let cj = if maximize { cj.clone() } else { -cj };
        match m {
            VarMap::Shift { col, .. } => c_struct[*col] += &cj,
            VarMap::Reflect { col, .. } => c_struct[*col] -= &cj,
            VarMap::Split { pos, neg } => {
                c_struct[*pos] += &cj;
                c_struct[*neg] -= &cj;
            }
        }
    }

    // Column layout: structural | slack/surplus | artificial.
    let m_rows = irows.len();
    let n_slack = irows.iter().filter(|r| r.relation != Relation::Eq).count();
    let n_art = irows.iter().filter(|r| r.relation != Relation::Le).count();
    let n_cols = n_struct + n_slack + n_art;
    let rhs_col = n_cols;
    let art_start = n_struct + n_slack;

    let mut rows = Vec::with_capacity(m_rows);
    let mut basis = Vec::with_capacity(m_rows);
    let mut identity = Vec::with_capacity(m_rows);
    let (mut next_slack, mut next_art) = (n_struct, art_start);
    for row in &irows {
        let mut t = vec![Rational::zero(); n_cols + 1];
        t[..n_struct].clone_from_slice(&row.coeffs);
        t[rhs_col] = row.rhs.clone();
        match row.relation {
            Relation::Le => {
                t[next_slack] = Rational::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                t[next_slack] = -Rational::one();
                next_slack += 1;
                t[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                t[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        identity.push(*basis.last().unwrap());
        rows.push(t);
    }
    let mut tab = Tableau { rows, obj: Vec::new(), basis, rhs_col };

    // Phase I: maximise -Σ artificials.
    let mut phase1 = vec![Rational::zero(); n_cols];
    for c in phase1[art_start..].iter_mut() {
        *c = -Rational::one();
    }
    tab.set_objective(&phase1);
    if tab.run(|_| true).is_err() {
        return Err(Error::Internal("phase I reported an unbounded ray".into()));
    }
    let infeasibility = tab.obj[rhs_col].clone();
    if infeasibility.is_positive() {
        // -z > 0: the artificials cannot be driven to zero.
        let y = tab.duals(&phase1, &identity);
        let mut farkas = vec![Rational::zero(); lp.constraints.len()];
        for (row, yi) in irows.iter().zip(&y) {
            let Some(r) = row.origin else { continue };
            let signed = if row.flip < 0 { yi.clone() } else { -yi };
            farkas[r] = if lp.constraints[r].relation == Relation::Le { -signed } else { signed };
        }
        if !lp.verify_farkas(&farkas) {
            return Err(Error::Internal("Farkas ray failed verification".into()));
        }
        return Ok(LpOutcome::Infeasible { farkas });
    }

    // Drive zero-level artificials out of the basis where possible.
    for i in 0..m_rows {
        if tab.basis[i] >= art_start {
            if let Some(j) = (0..art_start).find(|&j| !tab.rows[i][j].is_zero()) {
                tab.pivot(i, j);
            }
        }
    }

    // Phase II.
    let mut phase2 = vec![Rational::zero(); n_cols];
    phase2[..n_struct].clone_from_slice(&c_struct);
    tab.set_objective(&phase2);
    let internal_point = |tab: &Tableau| {
        let mut x = vec![Rational::zero(); n_cols];
        for (i, &b) in tab.basis.iter().enumerate() {
            x[b] = tab.rows[i][rhs_col].clone();
        }
        x
    };
    let to_user = |x: &[Rational], homogeneous: bool| -> Vec<Rational> {
        maps.iter()
            .map(|m| match m {
                VarMap::Shift { col, lower } => {
                    if homogeneous {
                        x[*col].clone()
                    } else {
                        lower + &x[*col]
                    }
                }
                VarMap::Reflect { col, upper } => {
                    if homogeneous {
                        -&x[*col]
                    } else {
                        upper - &x[*col]
                    }
                }
                VarMap::Split { pos, neg } => &x[*pos] - &x[*neg],
            })
            .collect()
    };

    match tab.run(|j| j < art_start) {
        Err(col) => {
            let point = to_user(&internal_point(&tab), false);
            let mut d = vec![Rational::zero(); n_cols];
            d[col] = Rational::one();
            for (i, &b) in tab.basis.iter().enumerate() {
                d[b] = -&tab.rows[i][col];
            }
            let direction = to_user(&d, true);
            if !lp.verify_unbounded(&point, &direction) {
                return Err(Error::Internal("recession ray failed verification".into()));
            }
            Ok(LpOutcome::Unbounded { point, direction })
        }
        Ok(()) => {
            let primal = to_user(&internal_point(&tab), false);
            let y = tab.duals(&phase2, &identity);
            let mut dual = vec![Rational::zero(); lp.constraints.len()];
            for (row, yi) in irows.iter().zip(&y) {
                let Some(r) = row.origin else { continue };
                let v = if row.flip < 0 { -yi } else { yi.clone() };
                dual[r] = if maximize { v } else { -v };
            }
            let value = lp.objective_value(&primal);
            let opt = Optimum { primal, dual, value };
            if !lp.verify_optimum(&opt) {
                return Err(Error::Internal("optimality certificate failed verification".into()));
            }
            Ok(LpOutcome::Optimal(opt))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, r};

    fn optimum(outcome: LpOutcome) -> Optimum {
        match outcome {
            LpOutcome::Optimal(o) => o,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn bounded_single_variable() {
        let mut lp = StandardLp::new(Sense::Maximize, vec![r(1)]);
        lp.add_constraint(vec![r(1)], Relation::Le, r(1));
        let o = optimum(solve(&lp).unwrap());
        assert_eq!(o.primal, vec![r(1)]);
        assert_eq!(o.value, r(1));
        assert_eq!(o.dual, vec![r(1)]);
    }

    #[test]
    fn unbounded_single_variable() {
        let lp = StandardLp::new(Sense::Maximize, vec![r(1)]);
        match solve(&lp).unwrap() {
            LpOutcome::Unbounded { point, direction } => {
                assert_eq!(point, vec![r(0)]);
                assert_eq!(direction, vec![r(1)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn contradictory_bounds_give_farkas_ray() {
        // x >= 1 and x <= 0: the ≥-form sum 1·(x ≥ 1) + 1·(-x ≥ 0) reads 0 ≥ 1.
        let mut lp = StandardLp::feasibility(1);
        lp.add_constraint(vec![r(1)], Relation::Ge, r(1));
        lp.add_constraint(vec![r(1)], Relation::Le, r(0));
        match solve(&lp).unwrap() {
            LpOutcome::Infeasible { farkas } => {
                assert_eq!(farkas, vec![r(1), r(1)]);
                let (w, beta) = lp.farkas_combination(&farkas);
                assert_eq!(w, vec![r(0)]);
                assert_eq!(beta, r(1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classic_two_variable_max() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36
        let mut lp = StandardLp::new(Sense::Maximize, vec![r(3), r(5)]);
        lp.add_constraint(vec![r(1), r(0)], Relation::Le, r(4));
        lp.add_constraint(vec![r(0), r(2)], Relation::Le, r(12));
        lp.add_constraint(vec![r(3), r(2)], Relation::Le, r(18));
        let o = optimum(solve(&lp).unwrap());
        assert_eq!(o.primal, vec![r(2), r(6)]);
        assert_eq!(o.value, r(36));
        assert_eq!(o.dual, vec![r(0), q(3, 2), r(1)]);
    }

    #[test]
    fn minimisation_with_equality_and_free_variable() {
        // min v s.t. v >= x - 1, v >= -x, x in [0, 3], v free  -> x = 1/2, v = -1/2
        let mut lp = StandardLp::new(Sense::Minimize, vec![r(0), r(1)]);
        lp.set_bounds(0, Some(r(0)), Some(r(3)));
        lp.set_free(1);
        lp.add_constraint(vec![r(-1), r(1)], Relation::Ge, r(-1));
        lp.add_constraint(vec![r(1), r(1)], Relation::Ge, r(0));
        let o = optimum(solve(&lp).unwrap());
        assert_eq!(o.primal, vec![q(1, 2), q(-1, 2)]);
        assert_eq!(o.value, q(-1, 2));
    }

    #[test]
    fn negative_lower_and_upper_only_bounds() {
        // max x + y, x in [-2, -1], y <= 4 with y otherwise free
        let mut lp = StandardLp::new(Sense::Maximize, vec![r(1), r(1)]);
        lp.set_bounds(0, Some(r(-2)), Some(r(-1)));
        lp.set_bounds(1, None, Some(r(4)));
        let o = optimum(solve(&lp).unwrap());
        assert_eq!(o.primal, vec![r(-1), r(4)]);
        assert_eq!(o.value, r(3));
    }

    #[test]
    fn redundant_equalities_and_empty_rows() {
        let mut lp = StandardLp::new(Sense::Minimize, vec![r(1), r(2)]);
        lp.add_constraint(vec![r(1), r(1)], Relation::Eq, r(1));
        lp.add_constraint(vec![r(2), r(2)], Relation::Eq, r(2));
        lp.add_constraint(vec![r(0), r(0)], Relation::Le, r(0));
        let o = optimum(solve(&lp).unwrap());
        assert_eq!(o.primal, vec![r(1), r(0)]);
        assert_eq!(o.value, r(1));
    }

    #[test]
    fn zero_row_with_positive_requirement_is_infeasible() {
        let mut lp = StandardLp::feasibility(2);
        lp.add_constraint(vec![r(0), r(0)], Relation::Ge, r(1));
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Infeasible { .. }));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut lp = StandardLp::feasibility(2);
        lp.add_constraint(vec![r(1)], Relation::Le, r(1));
        assert!(matches!(solve(&lp), Err(Error::Dimension(_))));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under the largest-coefficient rule.
        let mut lp = StandardLp::new(Sense::Maximize, vec![q(3, 4), r(-150), q(1, 50), r(-6)]);
        lp.add_constraint(vec![q(1, 4), r(-60), q(-1, 25), r(9)], Relation::Le, r(0));
        lp.add_constraint(vec![q(1, 2), r(-90), q(-1, 50), r(3)], Relation::Le, r(0));
        lp.add_constraint(vec![r(0), r(0), r(1), r(0)], Relation::Le, r(1));
        let o = optimum(solve(&lp).unwrap());
        assert_eq!(o.value, q(1, 20));
    }
}
