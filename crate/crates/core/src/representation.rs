//! Sufficient subsets, representing measures, and the finite polyhedral
//! decomposition of a linear functional dominated by sublinear ones.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve, LpOutcome, Relation, Sense, StandardLp};
use crate::model::{DiscreteMeasure, FamilyMatrix};
use crate::rational::{dot, max_of, primitive_direction, Rational};

/// Functions `H` over points `X` together with a candidate subset `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SufficiencyInstance {
    pub functions: FamilyMatrix,
    subset: Vec<usize>,
}

impl SufficiencyInstance {
    pub fn new<S: AsRef<str>>(functions: FamilyMatrix, subset: &[S]) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::Invalid("subset must be non-empty".into()));
        }
        let mut idx = functions.col_indices(subset)?;
        idx.sort_unstable();
        idx.dedup();
        Ok(SufficiencyInstance { functions, subset: idx })
    }

    pub fn subset_indices(&self) -> &[usize] {
        &self.subset
    }

    pub fn subset_labels(&self) -> Vec<String> {
        self.subset.iter().map(|&j| self.functions.col_labels()[j].clone()).collect()
    }

    fn contains(&self, j: usize) -> bool {
        self.subset.binary_search(&j).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SufficiencyViolation {
    pub point: String,
    /// Mixture over the functions.
    pub delta: DiscreteMeasure,
    /// `⟨δ, h(x)⟩ − max_{z∈Z} ⟨δ, h(z)⟩`, strictly positive.
    pub margin: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRepresentation {
    pub point: String,
    pub measure: DiscreteMeasure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SufficiencyOutcome {
    /// A representing measure on `Z` for every point outside `Z`.
    Sufficient(Vec<PointRepresentation>),
    Violation(SufficiencyViolation),
}

/// `⟨δ, h(x)⟩ − max_{z∈Z} ⟨δ, h(z)⟩` for a mixture over the functions.
pub fn sufficiency_margin(inst: &SufficiencyInstance, point: &str, delta: &DiscreteMeasure) -> Result<Rational> {
    delta.require_probability("function mixture")?;
    let a = &inst.functions;
    let w = delta.dense_over(a.row_labels())?;
    let at = |j: usize| dot(&w, &a.column(j));
    let best = max_of(inst.subset.iter().map(|&z| at(z))).unwrap();
    Ok(at(a.col_index(point)?) - best)
}

/// `h(x) ≤ Σ_z m(z) h(z)` for every function, with `m` a probability on `Z`.
pub fn verify_representation(inst: &SufficiencyInstance, point: &str, m: &DiscreteMeasure) -> Result<bool> {
    m.require_probability("representing measure")?;
    let a = &inst.functions;
    let x = a.col_index(point)?;
    let zs = inst.subset_labels();
    if m.support.iter().zip(&m.weights).any(|(s, w)| w.is_positive() && !zs.contains(s)) {
        return Ok(false);
    }
    let w = m.dense_over(a.col_labels())?;
    Ok(a.rows().iter().all(|h| h[x] <= dot(h, &w)))
}

/// Epigraph LP `max ⟨δ,h(x)⟩ − s` s.t. `s ≥ ⟨δ,h(z)⟩` on `Z`, `δ ∈ Δ(H)`.
fn worst_mixture(inst: &SufficiencyInstance, x: usize) -> Result<(Rational, Vec<Rational>)> {
    let a = &inst.functions;
    let nh = a.n_rows();
    let mut obj = a.column(x);
    obj.push(-Rational::one());
    let mut lp = StandardLp::new(Sense::Maximize, obj);
    lp.set_free(nh);
    for &z in &inst.subset {
        let mut row = a.column(z);
        row.push(-Rational::one());
        lp.add_constraint(row, Relation::Le, Rational::zero());
    }
    let mut simplex = vec![Rational::one(); nh];
    simplex.push(Rational::zero());
    lp.add_constraint(simplex, Relation::Eq, Rational::one());
    match solve(&lp)? {
        LpOutcome::Optimal(opt) => Ok((opt.value, opt.primal[..nh].to_vec())),
        other => Err(Error::Internal(format!("sufficiency LP: {other:?}"))),
    }
}

/// Decide whether `Z` is sufficient for `X` relative to `H`. On success every
/// point outside `Z` gets a representing measure on `Z`; on failure the first
/// offending point and its maximising mixture are returned.
pub fn check_sufficiency(inst: &SufficiencyInstance) -> Result<SufficiencyOutcome> {
    let a = &inst.functions;
    let mut reps = Vec::new();
    for x in 0..a.n_cols() {
        if inst.contains(x) {
            continue;
        }
        let (value, delta) = worst_mixture(inst, x)?;
        let point = a.col_labels()[x].clone();
        if value.is_positive() {
            let delta = DiscreteMeasure::from_dense(a.row_labels(), &delta);
            let margin = sufficiency_margin(inst, &point, &delta)?;
            if margin != value {
                return Err(Error::Internal("sufficiency margin disagrees with LP value".into()));
            }
            return Ok(SufficiencyOutcome::Violation(SufficiencyViolation { point, delta, margin }));
        }
        match representing_measure(inst, &point, None)? {
            RepresentationOutcome::Measure(measure) => reps.push(PointRepresentation { point, measure }),
            RepresentationOutcome::Infeasible(_) => {
                return Err(Error::Internal("duality failure between sufficiency LPs".into()))
            }
        }
    }
    Ok(SufficiencyOutcome::Sufficient(reps))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepresentationOutcome {
    Measure(DiscreteMeasure),
    Infeasible(SufficiencyViolation),
}

/// Order a chain by size and check it is nested; returns the smallest member.
fn smallest_chain_member(a: &FamilyMatrix, chain: &[Vec<String>]) -> Result<Vec<usize>> {
    let mut sets: Vec<HashSet<usize>> = chain
        .iter()
        .map(|z| a.col_indices(z).map(|v| v.into_iter().collect()))
        .collect::<Result<_>>()?;
    if sets.iter().any(HashSet::is_empty) {
        return Err(Error::Invalid("chain members must be non-empty".into()));
    }
    sets.sort_by_key(HashSet::len);
    if sets.windows(2).any(|w| !w[0].is_subset(&w[1])) {
        return Err(Error::Invalid("chain is not nested".into()));
    }
    let mut first: Vec<usize> = sets[0].iter().copied().collect();
    first.sort_unstable();
    Ok(first)
}

/// A probability `m_x` on `Z` (or on the smallest member of `chain`) with
/// `h(x) ≤ Σ_z m_x(z) h(z)` for all `h`.
pub fn representing_measure(
    inst: &SufficiencyInstance,
    point: &str,
    chain: Option<&[Vec<String>]>,
) -> Result<RepresentationOutcome> {
    let a = &inst.functions;
    let x = a.col_index(point)?;
    let base = match chain {
        Some([]) => return Err(Error::Invalid("empty chain".into())),
        Some(c) => smallest_chain_member(a, c)?,
        None => inst.subset.clone(),
    };
    let base_inst = SufficiencyInstance {
        functions: a.clone(),
        subset: base.clone(),
    };
    if base.contains(&x) {
        return Ok(RepresentationOutcome::Measure(DiscreteMeasure::point_mass(point)));
    }
    let labels: Vec<&String> = base.iter().map(|&z| &a.col_labels()[z]).collect();
    let mut lp = StandardLp::feasibility(base.len());
    for h in a.rows() {
        let coeffs = base.iter().map(|&z| h[z].clone()).collect();
        lp.add_constraint(coeffs, Relation::Ge, h[x].clone());
    }
    lp.add_constraint(vec![Rational::one(); base.len()], Relation::Eq, Rational::one());
    match solve(&lp)? {
        LpOutcome::Optimal(opt) => Ok(RepresentationOutcome::Measure(DiscreteMeasure::from_dense(&labels, &opt.primal))),
        LpOutcome::Infeasible { farkas } => {
            let u = &farkas[..a.n_rows()];
            let total: Rational = u.iter().sum();
            if !total.is_positive() {
                return Err(Error::Internal("Farkas ray has no weight on the functions".into()));
            }
            let d: Vec<Rational> = u.iter().map(|v| v / &total).collect();
            let delta = DiscreteMeasure::from_dense(a.row_labels(), &d);
            let margin = sufficiency_margin(&base_inst, point, &delta)?;
            if !margin.is_positive() {
                return Err(Error::Internal("Farkas ray does not violate sufficiency".into()));
            }
            Ok(RepresentationOutcome::Infeasible(SufficiencyViolation {
                point: point.to_string(),
                delta,
                margin,
            }))
        }
        LpOutcome::Unbounded { .. } => Err(Error::Internal("feasibility LP reported unbounded".into())),
    }
}

/// `x ↦ max_j ⟨a_j, x⟩` on `Q^d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyhedralSublinear {
    pub name: String,
    pub generators: Vec<Vec<Rational>>,
}

impl PolyhedralSublinear {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        max_of(self.generators.iter().map(|a| dot(a, x))).unwrap()
    }

    pub fn dimension(&self) -> usize {
        self.generators[0].len()
    }

    /// Generators as rows of a matrix over coordinate labels.
    pub fn generator_matrix(&self) -> Result<FamilyMatrix> {
        FamilyMatrix::from_rows(self.generators.clone())
    }
}

fn check_functionals(phi: &[Rational], fs: &[PolyhedralSublinear]) -> Result<()> {
    if fs.is_empty() {
        return Err(Error::Invalid("no sublinear functionals given".into()));
    }
    let mut names = HashSet::new();
    for f in fs {
        if !names.insert(f.name.as_str()) {
            return Err(Error::DuplicateLabel(f.name.clone()));
        }
        if f.generators.is_empty() {
            return Err(Error::Invalid(format!("`{}` has no generators", f.name)));
        }
        if f.generators.iter().any(|a| a.len() != phi.len()) {
            return Err(Error::Dimension(format!(
                "`{}` has a generator outside dimension {}",
                f.name,
                phi.len()
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrassenDecomposition {
    /// Probability over the functionals.
    pub lambda: DiscreteMeasure,
    /// One linear functional per sublinear one, in input order.
    pub t: Vec<Vec<Rational>>,
    /// Convex weights over each functional's generators reproducing `t`.
    pub hull_weights: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrassenOutcome {
    Decomposition(StrassenDecomposition),
    /// A direction `x` with `⟨φ,x⟩ > max_f f(x)`.
    Violation { x: Vec<Rational>, margin: Rational },
}

/// `⟨φ,x⟩ − max_f f(x)`.
pub fn strassen_margin(phi: &[Rational], fs: &[PolyhedralSublinear], x: &[Rational]) -> Rational {
    dot(phi, x) - max_of(fs.iter().map(|f| f.eval(x))).unwrap()
}

/// Decompose `φ = Σ_f λ(f) t_f` with each `t_f` in the hull of `f`'s
/// generators, or return a direction where `φ` exceeds `max_f f`.
pub fn strassen_decompose(phi: &[Rational], fs: &[PolyhedralSublinear]) -> Result<StrassenOutcome> {
    check_functionals(phi, fs)?;
    let d = phi.len();
    let gens: Vec<(usize, &Vec<Rational>)> = fs
        .iter()
        .enumerate()
        .flat_map(|(k, f)| f.generators.iter().map(move |a| (k, a)))
        .collect();
    let mut lp = StandardLp::feasibility(gens.len());
    for (k, target) in phi.iter().enumerate() {
        lp.add_constraint(gens.iter().map(|(_, a)| a[k].clone()).collect(), Relation::Eq, target.clone());
    }
    lp.add_constraint(vec![Rational::one(); gens.len()], Relation::Eq, Rational::one());
    match solve(&lp)? {
        LpOutcome::Optimal(opt) => {
            let mut offset = 0;
            let mut lambda = Vec::new();
            let mut t = Vec::new();
            let mut hull_weights = Vec::new();
            for f in fs {
                let w = &opt.primal[offset..offset + f.generators.len()];
                offset += f.generators.len();
                let mass: Rational = w.iter().sum();
                let conv: Vec<Rational> = if mass.is_positive() {
                    w.iter().map(|v| v / &mass).collect()
                } else {
                    let mut e = vec![Rational::zero(); w.len()];
                    e[0] = Rational::one();
                    e
                };
                let mut tf = vec![Rational::zero(); d];
                for (c, a) in conv.iter().zip(&f.generators) {
                    for (acc, v) in tf.iter_mut().zip(a) {
                        *acc += c * v;
                    }
                }
                lambda.push(mass);
                t.push(tf);
                hull_weights.push(conv);
            }
            let names: Vec<&str> = fs.iter().map(|f| f.name.as_str()).collect();
            Ok(StrassenOutcome::Decomposition(StrassenDecomposition {
                lambda: DiscreteMeasure::from_dense(&names, &lambda),
                t,
                hull_weights,
            }))
        }
        LpOutcome::Infeasible { farkas } => {
            let x = primitive_direction(&farkas[..d]);
            let margin = strassen_margin(phi, fs, &x);
            if !margin.is_positive() {
                return Err(Error::Internal("Farkas ray does not separate φ".into()));
            }
            Ok(StrassenOutcome::Violation { x, margin })
        }
        LpOutcome::Unbounded { .. } => Err(Error::Internal("feasibility LP reported unbounded".into())),
    }
}

/// Whether `φ ≤ max_f f` on all of `Q^d`.
pub fn strassen_dominated(phi: &[Rational], fs: &[PolyhedralSublinear]) -> Result<bool> {
    Ok(matches!(strassen_decompose(phi, fs)?, StrassenOutcome::Decomposition(_)))
}

/// Exact re-substitution: `λ` a probability, each `t_f` the stated convex
/// combination of `f`'s generators, and `Σ λ(f) t_f = φ`.
pub fn verify_decomposition(phi: &[Rational], fs: &[PolyhedralSublinear], dec: &StrassenDecomposition) -> Result<bool> {
    check_functionals(phi, fs)?;
    dec.lambda.require_probability("λ")?;
    if dec.t.len() != fs.len() || dec.hull_weights.len() != fs.len() {
        return Ok(false);
    }
    let names: Vec<&str> = fs.iter().map(|f| f.name.as_str()).collect();
    let lambda = dec.lambda.dense_over(&names)?;
    let mut sum = vec![Rational::zero(); phi.len()];
    for ((f, tf), c) in fs.iter().zip(&dec.t).zip(&dec.hull_weights) {
        if tf.len() != phi.len() || c.len() != f.generators.len() {
            return Ok(false);
        }
        if c.iter().any(Rational::is_negative) || c.iter().sum::<Rational>() != Rational::one() {
            return Ok(false);
        }
        for (k, tk) in tf.iter().enumerate() {
            let combo: Rational = c.iter().zip(&f.generators).map(|(w, a)| w * &a[k]).sum();
            if combo != *tk {
                return Ok(false);
            }
        }
    }
    for (l, tf) in lambda.iter().zip(&dec.t) {
        for (s, v) in sum.iter_mut().zip(tf) {
            *s += l * v;
        }
    }
    Ok(sum == phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domination::{hull_membership, HullOutcome};
    use crate::rational::{q, r};

    /// Square vertices, then its centre, with `±` coordinate functionals.
    fn square() -> FamilyMatrix {
        let pts = [(1, 1), (1, -1), (-1, 1), (-1, -1), (0, 0)];
        let cols: Vec<String> = ["v1", "v2", "v3", "v4", "c"].iter().map(|s| s.to_string()).collect();
        let row = |f: &dyn Fn((i64, i64)) -> i64| pts.iter().map(|&p| r(f(p))).collect::<Vec<_>>();
        FamilyMatrix::new(
            vec!["x".into(), "-x".into(), "y".into(), "-y".into()],
            cols,
            vec![row(&|p| p.0), row(&|p| -p.0), row(&|p| p.1), row(&|p| -p.1)],
        )
        .unwrap()
    }

    #[test]
    fn whole_set_is_sufficient() {
        let a = square();
        let inst = SufficiencyInstance::new(a.clone(), a.col_labels()).unwrap();
        assert_eq!(check_sufficiency(&inst).unwrap(), SufficiencyOutcome::Sufficient(vec![]));
        assert!(SufficiencyInstance::new::<&str>(a, &[]).is_err());
    }

    #[test]
    fn square_vertices_are_sufficient() {
        let inst = SufficiencyInstance::new(square(), &["v1", "v2", "v3", "v4"]).unwrap();
        match check_sufficiency(&inst).unwrap() {
            SufficiencyOutcome::Sufficient(reps) => {
                assert_eq!(reps.len(), 1);
                assert!(verify_representation(&inst, "c", &reps[0].measure).unwrap());
            }
            other => panic!("{other:?}"),
        }
        let uniform = DiscreteMeasure::uniform(&["v1", "v2", "v3", "v4"]);
        assert!(verify_representation(&inst, "c", &uniform).unwrap());
    }

    #[test]
    fn single_function_gap() {
        let a = FamilyMatrix::from_ints(&[&[0, 5, 2]]).unwrap();
        let inst = SufficiencyInstance::new(a, &["x1"]).unwrap();
        match check_sufficiency(&inst).unwrap() {
            SufficiencyOutcome::Violation(v) => {
                assert_eq!(v.point, "x2");
                assert_eq!(v.delta, DiscreteMeasure::point_mass("f1"));
                assert_eq!(v.margin, r(5));
            }
            other => panic!("{other:?}"),
        }
        match representing_measure(&inst, "x2", None).unwrap() {
            RepresentationOutcome::Infeasible(v) => assert_eq!(v.margin, r(5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn representing_point_in_subset_and_chains() {
        let inst = SufficiencyInstance::new(square(), &["v1", "v2", "v3", "v4"]).unwrap();
        assert_eq!(
            representing_measure(&inst, "v2", None).unwrap(),
            RepresentationOutcome::Measure(DiscreteMeasure::point_mass("v2"))
        );
        let chain = vec![
            vec!["v1".to_string(), "v2".into(), "v3".into(), "v4".into(), "c".into()],
            vec!["v1".to_string(), "v2".into(), "v3".into(), "v4".into()],
        ];
        match representing_measure(&inst, "c", Some(&chain)).unwrap() {
            RepresentationOutcome::Measure(m) => {
                assert!(m.support.iter().all(|s| s.starts_with('v')));
                assert!(verify_representation(&inst, "c", &m).unwrap());
            }
            other => panic!("{other:?}"),
        }
        let broken = vec![vec!["v1".to_string()], vec!["v2".to_string(), "v3".into()]];
        assert!(representing_measure(&inst, "c", Some(&broken)).is_err());
    }

    fn abs1() -> Vec<PolyhedralSublinear> {
        vec![PolyhedralSublinear {
            name: "abs".into(),
            generators: vec![vec![r(1)], vec![r(-1)]],
        }]
    }

    #[test]
    fn strassen_examples() {
        let fs = abs1();
        assert!(strassen_dominated(&[r(1)], &fs).unwrap());
        match strassen_decompose(&[q(1, 3)], &fs).unwrap() {
            StrassenOutcome::Decomposition(dec) => {
                assert_eq!(dec.lambda, DiscreteMeasure::point_mass("abs"));
                assert_eq!(dec.t, vec![vec![q(1, 3)]]);
                assert_eq!(dec.hull_weights, vec![vec![q(2, 3), q(1, 3)]]);
                assert!(verify_decomposition(&[q(1, 3)], &fs, &dec).unwrap());
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            strassen_decompose(&[r(2)], &fs).unwrap(),
            StrassenOutcome::Violation {
                x: vec![r(1)],
                margin: r(1)
            }
        );
    }

    #[test]
    fn strassen_zero_and_copies() {
        let f = PolyhedralSublinear {
            name: "f".into(),
            generators: vec![vec![r(1), r(0)], vec![r(-1), r(0)], vec![r(0), r(2)]],
        };
        let g = PolyhedralSublinear { name: "g".into(), ..f.clone() };
        let phi = vec![r(0), q(1, 2)];
        match strassen_decompose(&phi, &[f.clone(), g.clone()]).unwrap() {
            StrassenOutcome::Decomposition(dec) => {
                assert!(verify_decomposition(&phi, &[f.clone(), g.clone()], &dec).unwrap());
                for (tf, gen) in dec.t.iter().zip([&f, &g]) {
                    let hull = gen.generator_matrix().unwrap();
                    assert!(matches!(hull_membership(&hull, tf).unwrap(), HullOutcome::InHull(_)));
                }
            }
            other => panic!("{other:?}"),
        }
        match strassen_decompose(&[r(0), r(0)], &[f.clone()]).unwrap() {
            StrassenOutcome::Decomposition(dec) => {
                assert_eq!(dec.lambda, DiscreteMeasure::point_mass("f"));
                assert_eq!(dec.t, vec![vec![r(0), r(0)]]);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            strassen_decompose(&[r(0)], &[f.clone()]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            strassen_decompose(&[r(0), r(0)], &[f.clone(), f]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn tampered_decomposition_fails() {
        let fs = abs1();
        let StrassenOutcome::Decomposition(mut dec) = strassen_decompose(&[q(1, 3)], &fs).unwrap() else {
            panic!()
        };
        dec.t[0][0] = q(1, 2);
        assert!(!verify_decomposition(&[q(1, 3)], &fs, &dec).unwrap());
    }
}
