//! Minimax values of a finite family and the integral-hull minimax equality.
//!
//! Orientation is fixed throughout: rows of the [`FamilyMatrix`] are the
//! functions `F`, columns are the points `X`. The pseudo (2⁻ⁿ-slack) forms of
//! concavity and sub-barycentres coincide with their exact forms on a finite
//! set, because any sequence in a finite set has a constant subsequence; the
//! checks below are therefore exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve, LpOutcome, Relation, Sense, StandardLp};
use crate::model::{mixture, pairing_over_points, DiscreteMeasure, FamilyMatrix};
use crate::rational::{dot, Rational};

/// `max_x min_f f(x)` together with the first column attaining it.
pub fn lower_value_attained(a: &FamilyMatrix) -> (Rational, usize) {
    let mut best: Option<(Rational, usize)> = None;
    for j in 0..a.n_cols() {
        let col_min = a.rows().iter().map(|row| row[j].clone()).reduce(Rational::min).unwrap();
        if best.as_ref().is_none_or(|(b, _)| col_min > *b) {
            best = Some((col_min, j));
        }
    }
    best.expect("family has at least one column")
}

/// `η = max_x min_f f(x)` by exact scan.
pub fn lower_value(a: &FamilyMatrix) -> Rational {
    lower_value_attained(a).0
}

/// `min_f max_x f(x)` by exact scan.
pub fn upper_value(a: &FamilyMatrix) -> Rational {
    a.rows()
        .iter()
        .map(|row| row.iter().cloned().reduce(Rational::max).unwrap())
        .reduce(Rational::min)
        .expect("family has at least one row")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullMinimax {
    /// `min_{m ∈ Δ(F)} max_x Σ_f m(f)·f(x)`.
    pub value: Rational,
    /// An attaining mixture `m₀` over the rows.
    pub measure: DiscreteMeasure,
    /// Optimal dual weights over the columns: `min_f Σ_x h(x) f(x) = value`.
    pub point_weights: DiscreteMeasure,
}

/// LP for `min v` s.t. `Σ_f m_f·B[f][j] ≤ v` for all columns, `m ∈ Δ(F)`.
pub(crate) fn mixed_row_lp(b: &FamilyMatrix) -> StandardLp {
    let nf = b.n_rows();
    let mut obj = vec![Rational::zero(); nf + 1];
    obj[nf] = Rational::one();
    let mut lp = StandardLp::new(Sense::Minimize, obj);
    lp.set_free(nf);
    for j in 0..b.n_cols() {
        let mut coeffs = b.column(j);
        coeffs.push(-Rational::one());
        lp.add_constraint(coeffs, Relation::Le, Rational::zero());
    }
    let mut simplex = vec![Rational::one(); nf];
    simplex.push(Rational::zero());
    lp.add_constraint(simplex, Relation::Eq, Rational::one());
    lp
}

/// LP for `max w` s.t. `Σ_j λ_j·B[f][j] ≥ w` for all rows, `λ ∈ Δ(columns)`.
pub(crate) fn mixed_column_lp(b: &FamilyMatrix) -> StandardLp {
    let nc = b.n_cols();
    let mut obj = vec![Rational::zero(); nc + 1];
    obj[nc] = Rational::one();
    let mut lp = StandardLp::new(Sense::Maximize, obj);
    lp.set_free(nc);
    for row in b.rows() {
        let mut coeffs = row.clone();
        coeffs.push(-Rational::one());
        lp.add_constraint(coeffs, Relation::Ge, Rational::zero());
    }
    let mut simplex = vec![Rational::one(); nc];
    simplex.push(Rational::zero());
    lp.add_constraint(simplex, Relation::Eq, Rational::one());
    lp
}

pub(crate) fn expect_optimal(outcome: LpOutcome, what: &str) -> Result<crate::lp::Optimum> {
    match outcome {
        LpOutcome::Optimal(o) => Ok(o),
        other => Err(Error::Internal(format!("{what}: unexpected LP outcome {other:?}"))),
    }
}

/// Minimax value over the integral hull, with an attaining mixture.
///
/// Equals [`lower_value`] whenever the family is concave-like on the points;
/// in general it is the value of the convexified problem.
pub fn hull_minimax(a: &FamilyMatrix) -> Result<HullMinimax> {
    let nf = a.n_rows();
    let opt = expect_optimal(solve(&mixed_row_lp(a))?, "hull minimax")?;
    let weights = &opt.primal[..nf];
    let h: Vec<Rational> = opt.dual[..a.n_cols()].iter().map(|y| -y).collect();
    Ok(HullMinimax {
        value: opt.value,
        measure: DiscreteMeasure::from_dense(a.row_labels(), weights),
        point_weights: DiscreteMeasure::from_dense(a.col_labels(), &h),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameValue {
    pub value: Rational,
    /// Optimal mixture over the functions.
    pub measure: DiscreteMeasure,
    /// Optimal element of the generated convex set, as weights over the points.
    pub point_weights: DiscreteMeasure,
    /// Convex weights on the generators producing `point_weights`.
    pub generator_weights: Vec<Rational>,
}

/// Bilinear game `min_{F ∈ intr(F)} sup_{h ∈ H} ⟨F,h⟩ = sup_{h ∈ H} inf_f ⟨f,h⟩`
/// where `H` is the convex hull of `generators` (all point masses if `None`).
///
/// Both sides are solved as separate LPs and must agree exactly.
pub fn game_value(a: &FamilyMatrix, generators: Option<&[DiscreteMeasure]>) -> Result<GameValue> {
    let gens: Vec<DiscreteMeasure> = match generators {
        Some([]) => return Err(Error::Invalid("empty generator list".into())),
        Some(g) => {
            for h in g {
                h.require_probability("generator")?;
            }
            g.to_vec()
        }
        None => a.col_labels().iter().map(|x| DiscreteMeasure::point_mass(x.clone())).collect(),
    };
    // Payoff B[f][j] = ⟨f, h_j⟩.
    let dense: Vec<Vec<Rational>> = gens
        .iter()
        .map(|h| h.dense_over(a.col_labels()))
        .collect::<Result<_>>()?;
    let payoff_rows: Vec<Vec<Rational>> = a
        .rows()
        .iter()
        .map(|row| dense.iter().map(|h| dot(row, h)).collect())
        .collect();
    let gen_labels = crate::model::default_labels("h", gens.len());
    let b = FamilyMatrix::new(a.row_labels().to_vec(), gen_labels, payoff_rows)?;

    let nf = b.n_rows();
    let ng = b.n_cols();
    let primal = expect_optimal(solve(&mixed_row_lp(&b))?, "game value (functions side)")?;
    let dual = expect_optimal(solve(&mixed_column_lp(&b))?, "game value (points side)")?;
    if primal.value != dual.value {
        return Err(Error::Internal(format!(
            "duality gap {} vs {}",
            primal.value, dual.value
        )));
    }
    let lambda = dual.primal[..ng].to_vec();
    let mut h = vec![Rational::zero(); a.n_cols()];
    for (l, hj) in lambda.iter().zip(&dense) {
        for (acc, v) in h.iter_mut().zip(hj) {
            *acc += l * v;
        }
    }
    Ok(GameValue {
        value: primal.value,
        measure: DiscreteMeasure::from_dense(a.row_labels(), &primal.primal[..nf]),
        point_weights: DiscreteMeasure::from_dense(a.col_labels(), &h),
        generator_weights: lambda,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcavityViolation {
    pub x: String,
    pub x_prime: String,
    /// Open interval `(lo, hi)` of mixing weights `t` that no point dominates.
    pub gap_lo: Rational,
    pub gap_hi: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcavityCheck {
    pub concave_like: bool,
    pub violation: Option<ConcavityViolation>,
}

/// `{t ∈ [0,1] : t·a_f + (1−t)·b_f ≤ c_f for all f}` as a closed interval.
fn dominated_interval(a: &FamilyMatrix, x: usize, xp: usize, xpp: usize) -> Option<(Rational, Rational)> {
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    for row in a.rows() {
        let slope = &row[x] - &row[xp];
        let room = &row[xpp] - &row[xp];
        if slope.is_zero() {
            if room.is_negative() {
                return None;
            }
        } else {
            let t = &room / &slope;
            if slope.is_positive() {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
        }
        if lo > hi {
            return None;
        }
    }
    Some((lo, hi))
}

/// First uncovered open sub-interval of `[0,1]`, if any.
fn first_gap(mut intervals: Vec<(Rational, Rational)>) -> Option<(Rational, Rational)> {
    intervals.sort();
    let mut reach = Rational::zero();
    let mut covered = false;
    for (lo, hi) in intervals {
        if lo > reach {
            return Some((reach, lo));
        }
        covered = true;
        reach = reach.max(hi);
    }
    if !covered || reach < Rational::one() {
        return Some((reach, Rational::one()));
    }
    None
}

/// Decide whether the family is concave-like on its points: for all `x, x'` and
/// `t ∈ [0,1]` some `x''` has `t·f(x) + (1−t)·f(x') ≤ f(x'')` for every `f`.
///
/// For each pair the admissible `t` per candidate `x''` form a closed interval,
/// so the property reduces to exact interval-union covering of `[0,1]`.
pub fn is_concave_like(a: &FamilyMatrix) -> ConcavityCheck {
    let n = a.n_cols();
    for x in 0..n {
        for xp in x + 1..n {
            let intervals: Vec<_> = (0..n).filter_map(|xpp| dominated_interval(a, x, xp, xpp)).collect();
            if let Some((gap_lo, gap_hi)) = first_gap(intervals) {
                return ConcavityCheck {
                    concave_like: false,
                    violation: Some(ConcavityViolation {
                        x: a.col_labels()[x].clone(),
                        x_prime: a.col_labels()[xp].clone(),
                        gap_lo,
                        gap_hi,
                    }),
                };
            }
        }
    }
    ConcavityCheck {
        concave_like: true,
        violation: None,
    }
}

/// A column `x*` with `f(x*) ≤ Σ_x m(x) f(x)` for every row, if one exists.
/// Columns in the support of `m` are tried first.
pub fn find_sub_barycentre(a: &FamilyMatrix, m: &DiscreteMeasure) -> Result<Option<String>> {
    m.require_probability("barycentre measure")?;
    let bary = pairing_over_points(m, a)?;
    let (inside, outside): (Vec<usize>, Vec<usize>) =
        (0..a.n_cols()).partition(|&j| m.weight_of(&a.col_labels()[j]).is_positive());
    Ok(inside
        .into_iter()
        .chain(outside)
        .find(|&j| a.rows().iter().zip(&bary).all(|(row, b)| row[j] <= *b))
        .map(|j| a.col_labels()[j].clone()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalMinimax {
    pub value: Rational,
    /// Attaining measure on the whole family, zero off the best sub-family.
    pub measure: DiscreteMeasure,
    pub best: usize,
    /// Hull minimax value of each sub-family in input order.
    pub values: Vec<Rational>,
    /// `max_x min_{f ∈ F_α} f(x)` of each sub-family.
    pub lower_values: Vec<Rational>,
}

/// Minimax over mixtures supported on one of several sub-families.
pub fn local_minimax<S: AsRef<str>>(a: &FamilyMatrix, subfamilies: &[Vec<S>]) -> Result<LocalMinimax> {
    if subfamilies.is_empty() {
        return Err(Error::Invalid("empty sub-family list".into()));
    }
    let mut values = Vec::new();
    let mut lower_values = Vec::new();
    let mut best: Option<(usize, HullMinimax)> = None;
    for (k, labels) in subfamilies.iter().enumerate() {
        if labels.is_empty() {
            return Err(Error::Invalid(format!("sub-family {k} is empty")));
        }
        let sub = a.select_rows(&a.row_indices(labels)?)?;
        let hm = hull_minimax(&sub)?;
        values.push(hm.value.clone());
        lower_values.push(lower_value(&sub));
        if best.as_ref().is_none_or(|(_, b)| hm.value < b.value) {
            best = Some((k, hm));
        }
    }
    let (best, hm) = best.unwrap();
    Ok(LocalMinimax {
        value: hm.value,
        measure: hm.measure,
        best,
        values,
        lower_values,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimaxReport {
    /// `η = max_x min_f f(x)`.
    pub lower: Rational,
    /// First column attaining `lower`.
    pub lower_attained_at: String,
    /// `min_f max_x f(x)`.
    pub upper: Rational,
    /// `min_{m} max_x ∫ f(x) m(df)`.
    pub hull_value: Rational,
    pub optimal_measure: DiscreteMeasure,
    pub optimal_point_weights: DiscreteMeasure,
    pub concave_like: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub concavity: Option<ConcavityCheck>,
    /// A row `f*` with `f* ≤ ∫ f m₀(df)` pointwise, when one exists; its
    /// existence forces `upper = lower`.
    pub sub_barycentre: Option<String>,
}

pub fn minimax_report(a: &FamilyMatrix, include_concavity: bool) -> Result<MinimaxReport> {
    let (lower, at) = lower_value_attained(a);
    let hm = hull_minimax(a)?;
    let check = is_concave_like(a);
    let sub_barycentre = find_sub_barycentre(&a.transpose(), &hm.measure)?;
    Ok(MinimaxReport {
        lower,
        lower_attained_at: a.col_labels()[at].clone(),
        upper: upper_value(a),
        hull_value: hm.value,
        optimal_measure: hm.measure,
        optimal_point_weights: hm.point_weights,
        concave_like: check.concave_like,
        concavity: include_concavity.then_some(check),
        sub_barycentre,
    })
}

/// `max_x Σ_f m(f) f(x)` for dense row weights.
pub fn mixture_sup(weights: &[Rational], a: &FamilyMatrix) -> Rational {
    mixture(weights, a).into_iter().reduce(Rational::max).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, r};

    fn pennies() -> FamilyMatrix {
        FamilyMatrix::from_ints(&[&[1, -1], &[-1, 1]]).unwrap()
    }

    fn skew() -> FamilyMatrix {
        FamilyMatrix::from_ints(&[&[0, 6], &[3, 0]]).unwrap()
    }

    #[test]
    fn lower_value_examples() {
        assert_eq!(lower_value(&FamilyMatrix::from_ints(&[&[5]]).unwrap()), r(5));
        assert_eq!(lower_value(&pennies()), r(-1));
        assert_eq!(lower_value(&skew()), r(0));
    }

    #[test]
    fn hull_minimax_examples() {
        let hm = hull_minimax(&FamilyMatrix::from_ints(&[&[5]]).unwrap()).unwrap();
        assert_eq!(hm.value, r(5));
        assert_eq!(hm.measure, DiscreteMeasure::point_mass("f1"));

        let hm = hull_minimax(&pennies()).unwrap();
        assert_eq!(hm.value, r(0));
        assert_eq!(hm.measure.weights, vec![q(1, 2), q(1, 2)]);
        assert_eq!(hm.point_weights.weights, vec![q(1, 2), q(1, 2)]);

        let same = FamilyMatrix::from_ints(&[&[1, 4, 2], &[1, 4, 2]]).unwrap();
        let hm = hull_minimax(&same).unwrap();
        assert_eq!(hm.value, r(4));
        assert!(hm.measure.is_probability());
    }

    #[test]
    fn game_value_examples() {
        let g = game_value(&pennies(), None).unwrap();
        assert_eq!(g.value, r(0));
        assert_eq!(g.measure.weights, vec![q(1, 2), q(1, 2)]);
        assert_eq!(g.point_weights.weights, vec![q(1, 2), q(1, 2)]);

        let g = game_value(&FamilyMatrix::from_ints(&[&[7, 7, 7]]).unwrap(), None).unwrap();
        assert_eq!(g.value, r(7));

        // 2×2 closed form: v = (ad − bc)/(a + d − b − c) = (0·0 − 6·3)/(0 + 0 − 6 − 3) = 2.
        let a = skew();
        let g = game_value(&a, None).unwrap();
        assert_eq!(g.value, r(2));
        assert_eq!(g.measure.weights, vec![q(1, 3), q(2, 3)]);
        // Equalising 6·h2 = 3·h1 gives h = (2/3, 1/3); both rows then pair to 2.
        assert_eq!(g.point_weights.weights, vec![q(2, 3), q(1, 3)]);
        let paired = pairing_over_points(&g.point_weights, &a).unwrap();
        assert_eq!(paired, vec![r(2), r(2)]);
    }

    #[test]
    fn game_value_with_generators() {
        // H = {uniform} only: value is min_f of the row averages.
        let h = DiscreteMeasure::uniform(&["x1", "x2"]);
        let g = game_value(&skew(), Some(&[h])).unwrap();
        assert_eq!(g.value, q(3, 2));
        assert!(matches!(game_value(&skew(), Some(&[])), Err(Error::Invalid(_))));
    }

    #[test]
    fn concavity_examples() {
        assert!(is_concave_like(&FamilyMatrix::from_ints(&[&[3], &[1]]).unwrap()).concave_like);
        let monotone = FamilyMatrix::from_ints(&[&[0, 1, 5], &[-2, -2, 4], &[1, 2, 3]]).unwrap();
        assert!(is_concave_like(&monotone).concave_like);

        let c = is_concave_like(&pennies());
        assert!(!c.concave_like);
        let v = c.violation.unwrap();
        assert_eq!((v.x.as_str(), v.x_prime.as_str()), ("x1", "x2"));
        assert!(v.gap_lo < q(1, 2) && q(1, 2) < v.gap_hi);
        assert_eq!((v.gap_lo, v.gap_hi), (r(0), r(1)));
    }

    #[test]
    fn gap_detection_between_intervals() {
        let gap = first_gap(vec![(r(0), q(1, 3)), (q(1, 2), r(1))]);
        assert_eq!(gap, Some((q(1, 3), q(1, 2))));
        assert_eq!(first_gap(vec![(r(0), q(1, 2)), (q(1, 2), r(1))]), None);
        assert_eq!(first_gap(vec![]), Some((r(0), r(1))));
    }

    #[test]
    fn sub_barycentre_examples() {
        let a = FamilyMatrix::from_ints(&[&[4, 1, 9]]).unwrap();
        assert_eq!(
            find_sub_barycentre(&a, &DiscreteMeasure::point_mass("x3")).unwrap(),
            Some("x3".into())
        );
        let increasing = FamilyMatrix::from_ints(&[&[1, 2, 6]]).unwrap();
        assert_eq!(
            find_sub_barycentre(&increasing, &DiscreteMeasure::uniform(&["x1", "x2", "x3"])).unwrap(),
            Some("x1".into())
        );
        assert_eq!(
            find_sub_barycentre(&pennies(), &DiscreteMeasure::uniform(&["x1", "x2"])).unwrap(),
            None
        );
    }

    #[test]
    fn local_minimax_examples() {
        let a = skew();
        let all = local_minimax(&a, &[vec!["f1", "f2"]]).unwrap();
        assert_eq!(all.value, hull_minimax(&a).unwrap().value);

        let singles = local_minimax(&a, &[vec!["f1"], vec!["f2"]]).unwrap();
        assert_eq!(singles.value, r(3));
        assert_eq!(singles.best, 1);
        assert_eq!(singles.measure, DiscreteMeasure::point_mass("f2"));
        assert_eq!(singles.value, upper_value(&a));

        assert!(local_minimax::<&str>(&a, &[]).is_err());
        assert!(local_minimax::<&str>(&a, &[vec![]]).is_err());
    }

    #[test]
    fn report_on_pennies() {
        let rep = minimax_report(&pennies(), true).unwrap();
        assert_eq!(rep.lower, r(-1));
        assert_eq!(rep.upper, r(1));
        assert_eq!(rep.hull_value, r(0));
        assert!(!rep.concave_like);
        assert!(rep.concavity.is_some());
        assert_eq!(rep.sub_barycentre, None);
    }
}
