//! Certificates for every decision procedure, sealed in an envelope that binds
//! them to an instance, and their re-verification by substitution.
//!
//! The substitution checks are written once over [`Scalar`] and run exactly on
//! [`Rational`] (zero tolerance) or approximately on `f64`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::domination::{
    find_dominating_measure, hull_membership, fan_norm_domination, BalancePair, BalanceViolation, DominationInstance,
    DominationOutcome, FanOutcome, HullOutcome, PolyNorm,
};
use crate::error::Result;
use crate::exhaustion::{intersection_bound, ClippedFamily, ExhaustionInstance, IntersectionBound, Piece};
use crate::io::{hash_json, CoreInstance, FanInstance, Instance, PietschInstance, StrassenInstance};
use crate::minimax::{
    find_sub_barycentre, game_value, hull_minimax, is_concave_like, lower_value_attained, minimax_report, upper_value,
    MinimaxReport,
};
use crate::model::{DiscreteMeasure, FamilyMatrix};
use crate::rational::Rational;
use crate::representation::{
    check_sufficiency, strassen_decompose, PointRepresentation, PolyhedralSublinear, StrassenDecomposition,
    StrassenOutcome, SufficiencyInstance, SufficiencyOutcome, SufficiencyViolation,
};
use crate::summability::{pietsch_estimate, summing_constant, SummingWitness};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityPair {
    pub value: Rational,
    /// Mixture over the functions.
    pub measure: DiscreteMeasure,
    /// Probability over the points.
    pub point_weights: DiscreteMeasure,
    /// When present, `point_weights` must be this convex combination of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<DiscreteMeasure>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_weights: Option<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalMinimaxCert {
    pub subfamilies: Vec<Vec<String>>,
    pub best: usize,
    pub value: Rational,
    /// Duality pair of each sub-family, in order.
    pub pairs: Vec<DualityPair>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubBarycentreCert {
    /// Probability over the points.
    pub measure: DiscreteMeasure,
    pub point: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullCert {
    pub target: Vec<Rational>,
    pub measure: DiscreteMeasure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullSeparationCert {
    pub target: Vec<Rational>,
    pub weights: Vec<Rational>,
    pub margin: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanFunctionalCert {
    pub rho: Rational,
    pub norm: PolyNorm,
    pub phi: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanViolationCert {
    pub rho: Rational,
    pub norm: PolyNorm,
    pub weights: Vec<Rational>,
    pub margin: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustionCover {
    pub pieces: Vec<Piece>,
    /// Optimal pair for `I_F` on each piece; `None` for an empty piece.
    pub witnesses: Vec<Option<IntersectionBound>>,
    pub remainder: Vec<String>,
    pub pieces_positive: bool,
    pub remainder_null: bool,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SufficiencyWitnessCert {
    pub subset: Vec<String>,
    pub representations: Vec<PointRepresentation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SufficiencyViolationCert {
    pub subset: Vec<String>,
    pub violation: SufficiencyViolation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrassenCert {
    pub phi: Vec<Rational>,
    pub decomposition: StrassenDecomposition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrassenViolationCert {
    pub phi: Vec<Rational>,
    pub x: Vec<Rational>,
    pub margin: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummingCert {
    pub target: Vec<Rational>,
    pub witness: SummingWitness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PietschCert {
    pub p: u32,
    pub norm: PolyNorm,
    /// `‖T x‖^p` per sample point.
    pub target: Vec<Rational>,
    pub witness: SummingWitness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum Certificate {
    MinimaxReport(MinimaxReport),
    DualityPair(DualityPair),
    LocalMinimax(LocalMinimaxCert),
    SubBarycentre(SubBarycentreCert),
    DominatingMeasure(DiscreteMeasure),
    BalanceViolation(BalanceViolation),
    HullMembership(HullCert),
    HullSeparation(HullSeparationCert),
    FanFunctional(FanFunctionalCert),
    FanViolation(FanViolationCert),
    ExhaustionCover(ExhaustionCover),
    SufficiencyWitness(SufficiencyWitnessCert),
    SufficiencyViolation(SufficiencyViolationCert),
    StrassenDecomposition(StrassenCert),
    StrassenViolation(StrassenViolationCert),
    SummingWitness(SummingCert),
    PietschEstimate(PietschCert),
}

impl Certificate {
    /// Whether the certificate reports the negative branch of its decision.
    pub fn is_violation(&self) -> bool {
        match self {
            Certificate::BalanceViolation(_)
            | Certificate::HullSeparation(_)
            | Certificate::FanViolation(_)
            | Certificate::SufficiencyViolation(_)
            | Certificate::StrassenViolation(_) => true,
            Certificate::ExhaustionCover(c) => !c.valid,
            Certificate::SummingWitness(c) => !c.witness.finite,
            Certificate::PietschEstimate(c) => !c.witness.finite,
            _ => false,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::MinimaxReport(_) => "MinimaxReport",
            Certificate::DualityPair(_) => "DualityPair",
            Certificate::LocalMinimax(_) => "LocalMinimax",
            Certificate::SubBarycentre(_) => "SubBarycentre",
            Certificate::DominatingMeasure(_) => "DominatingMeasure",
            Certificate::BalanceViolation(_) => "BalanceViolation",
            Certificate::HullMembership(_) => "HullMembership",
            Certificate::HullSeparation(_) => "HullSeparation",
            Certificate::FanFunctional(_) => "FanFunctional",
            Certificate::FanViolation(_) => "FanViolation",
            Certificate::ExhaustionCover(_) => "ExhaustionCover",
            Certificate::SufficiencyWitness(_) => "SufficiencyWitness",
            Certificate::SufficiencyViolation(_) => "SufficiencyViolation",
            Certificate::StrassenDecomposition(_) => "StrassenDecomposition",
            Certificate::StrassenViolation(_) => "StrassenViolation",
            Certificate::SummingWitness(_) => "SummingWitness",
            Certificate::PietschEstimate(_) => "PietschEstimate",
        }
    }

    // Issuers: run a decision procedure and wrap its answer.

    pub fn minimax(a: &FamilyMatrix, include_concavity: bool) -> Result<Certificate> {
        Ok(Certificate::MinimaxReport(minimax_report(a, include_concavity)?))
    }

    pub fn game(a: &FamilyMatrix, generators: Option<&[DiscreteMeasure]>) -> Result<Certificate> {
        let g = game_value(a, generators)?;
        Ok(Certificate::DualityPair(DualityPair {
            value: g.value,
            measure: g.measure,
            point_weights: g.point_weights,
            generators: generators.map(<[DiscreteMeasure]>::to_vec),
            generator_weights: generators.map(|_| g.generator_weights),
        }))
    }

    pub fn local_minimax(a: &FamilyMatrix, subfamilies: &[Vec<String>]) -> Result<Certificate> {
        let local = crate::minimax::local_minimax(a, subfamilies)?;
        let mut pairs = Vec::new();
        for labels in subfamilies {
            let hm = hull_minimax(&a.select_rows(&a.row_indices(labels)?)?)?;
            pairs.push(DualityPair {
                value: hm.value,
                measure: hm.measure,
                point_weights: hm.point_weights,
                generators: None,
                generator_weights: None,
            });
        }
        Ok(Certificate::LocalMinimax(LocalMinimaxCert {
            subfamilies: subfamilies.to_vec(),
            best: local.best,
            value: local.value,
            pairs,
        }))
    }

    /// `None` when no sub-barycentre exists for `m`.
    pub fn sub_barycentre(a: &FamilyMatrix, m: &DiscreteMeasure) -> Result<Option<Certificate>> {
        Ok(find_sub_barycentre(a, m)?.map(|point| {
            Certificate::SubBarycentre(SubBarycentreCert {
                measure: m.clone(),
                point,
            })
        }))
    }

    pub fn domination(inst: &DominationInstance) -> Result<Certificate> {
        Ok(match find_dominating_measure(inst)? {
            DominationOutcome::Dominated(m) => Certificate::DominatingMeasure(m),
            DominationOutcome::Violation(v) => Certificate::BalanceViolation(v),
        })
    }

    pub fn hull(a: &FamilyMatrix, target: &[Rational]) -> Result<Certificate> {
        Ok(match hull_membership(a, target)? {
            HullOutcome::InHull(measure) => Certificate::HullMembership(HullCert {
                target: target.to_vec(),
                measure,
            }),
            HullOutcome::NotInHull { weights, margin } => Certificate::HullSeparation(HullSeparationCert {
                target: target.to_vec(),
                weights,
                margin,
            }),
        })
    }

    pub fn fan(inst: &FanInstance, rho: &Rational, norm: PolyNorm) -> Result<Certificate> {
        Ok(match fan_norm_domination(&inst.vectors, &inst.values, rho, norm)? {
            FanOutcome::Functional(phi) => Certificate::FanFunctional(FanFunctionalCert {
                rho: rho.clone(),
                norm,
                phi,
            }),
            FanOutcome::Violation { weights, margin } => Certificate::FanViolation(FanViolationCert {
                rho: rho.clone(),
                norm,
                weights,
                margin,
            }),
        })
    }

    pub fn exhaustion(inst: &ExhaustionInstance) -> Result<Certificate> {
        let mut witnesses = Vec::new();
        for p in &inst.pieces {
            witnesses.push(if p.points.is_empty() {
                None
            } else {
                Some(intersection_bound(&inst.family, &p.points)?)
            });
        }
        let report = crate::exhaustion::verify_exhaustion(inst)?;
        Ok(Certificate::ExhaustionCover(ExhaustionCover {
            pieces: inst.pieces.clone(),
            witnesses,
            remainder: report.remainder,
            pieces_positive: report.pieces_positive,
            remainder_null: report.remainder_null,
            valid: report.valid,
        }))
    }

    pub fn sufficiency(inst: &SufficiencyInstance) -> Result<Certificate> {
        let subset = inst.subset_labels();
        Ok(match check_sufficiency(inst)? {
            SufficiencyOutcome::Sufficient(representations) => {
                Certificate::SufficiencyWitness(SufficiencyWitnessCert { subset, representations })
            }
            SufficiencyOutcome::Violation(violation) => {
                Certificate::SufficiencyViolation(SufficiencyViolationCert { subset, violation })
            }
        })
    }

    pub fn strassen(phi: &[Rational], fs: &[PolyhedralSublinear]) -> Result<Certificate> {
        Ok(match strassen_decompose(phi, fs)? {
            StrassenOutcome::Decomposition(decomposition) => Certificate::StrassenDecomposition(StrassenCert {
                phi: phi.to_vec(),
                decomposition,
            }),
            StrassenOutcome::Violation { x, margin } => Certificate::StrassenViolation(StrassenViolationCert {
                phi: phi.to_vec(),
                x,
                margin,
            }),
        })
    }

    pub fn summing(a: &FamilyMatrix, target: &[Rational]) -> Result<Certificate> {
        Ok(Certificate::SummingWitness(SummingCert {
            target: target.to_vec(),
            witness: summing_constant(a, target)?,
        }))
    }

    pub fn pietsch(inst: &PietschInstance, p: u32, norm: PolyNorm) -> Result<Certificate> {
        let est = pietsch_estimate(&inst.matrix, p, &inst.net, &inst.sample, norm)?;
        Ok(Certificate::PietschEstimate(PietschCert {
            p,
            norm,
            target: est.target,
            witness: est.witness,
        }))
    }
}

/// A certificate bound to the instance it speaks about.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub instance_hash: String,
    #[serde(default)]
    pub transposed: bool,
    pub certificate: Certificate,
    /// Hex SHA-256 of the canonical certificate JSON.
    pub digest: String,
}

impl Envelope {
    pub fn seal(instance: &Instance, transposed: bool, certificate: Certificate) -> Envelope {
        Envelope {
            instance_hash: instance.content_hash(),
            transposed,
            digest: hash_json(&certificate),
            certificate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Verdict {
    fn from_check(r: Result<(), String>) -> Verdict {
        match r {
            Ok(()) => Verdict { valid: true, reason: None },
            Err(reason) => Verdict {
                valid: false,
                reason: Some(reason),
            },
        }
    }
}

/// Full exact verification: instance hash, digest, and the certificate's
/// defining inequalities with zero tolerance.
pub fn verify(env: &Envelope, instance: &Instance) -> Verdict {
    if env.instance_hash != instance.content_hash() {
        return Verdict::from_check(Err("certificate refers to a different instance".into()));
    }
    if env.digest != hash_json(&env.certificate) {
        return Verdict::from_check(Err("certificate digest mismatch".into()));
    }
    verify_content(&env.certificate, instance, env.transposed)
}

/// Exact re-verification of the certificate content alone, ignoring the
/// instance hash and digest.
pub fn verify_content(cert: &Certificate, instance: &Instance, transposed: bool) -> Verdict {
    let exact = check::<Rational>(cert, instance, transposed, Rational::zero())
        .and_then(|()| check_exact_only(cert, instance, transposed));
    Verdict::from_check(exact)
}

pub trait Scalar:
    Clone + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn from_rational(r: &Rational) -> Self;
    fn zero() -> Self;
    fn one() -> Self;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
}

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn lift<T>(r: Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Tolerance-aware comparisons; `eps = 0` gives exact ones.
struct Tol<T> {
    eps: T,
}

impl<T: Scalar> Tol<T> {
    fn le(&self, a: &T, b: &T) -> bool {
        *a <= b.clone() + self.eps.clone()
    }

    fn eq(&self, a: &T, b: &T) -> bool {
        (a.clone() - b.clone()).abs() <= self.eps
    }

    fn nonneg(&self, a: &T) -> bool {
        self.le(&T::zero(), &(a.clone() + self.eps.clone()))
    }
}

fn vec_of<T: Scalar>(v: &[Rational]) -> Vec<T> {
    v.iter().map(T::from_rational).collect()
}

fn mat_of<T: Scalar>(a: &FamilyMatrix) -> Vec<Vec<T>> {
    a.rows().iter().map(|r| vec_of(r)).collect()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn max_t<T: Scalar>(it: impl IntoIterator<Item = T>) -> T {
    it.into_iter().reduce(|a, b| if b > a { b } else { a }).expect("non-empty")
}

fn min_t<T: Scalar>(it: impl IntoIterator<Item = T>) -> T {
    it.into_iter().reduce(|a, b| if b < a { b } else { a }).expect("non-empty")
}

fn column<T: Scalar>(a: &[Vec<T>], j: usize) -> Vec<T> {
    a.iter().map(|r| r[j].clone()).collect()
}

fn mix<T: Scalar>(w: &[T], a: &[Vec<T>]) -> Vec<T> {
    (0..a[0].len()).map(|j| dot(w, &column(a, j))).collect()
}

fn norm_t<T: Scalar>(norm: PolyNorm, v: &[T]) -> T {
    match norm {
        PolyNorm::L1 => v.iter().fold(T::zero(), |acc, x| acc + x.abs()),
        PolyNorm::Linf => v.iter().fold(T::zero(), |acc, x| if x.abs() > acc { x.abs() } else { acc }),
    }
}

fn pow_t<T: Scalar>(x: &T, p: u32) -> T {
    (0..p).fold(T::one(), |acc, _| acc * x.clone())
}

/// Dense weights of a probability over `labels`.
fn probability<T: Scalar>(tol: &Tol<T>, m: &DiscreteMeasure, labels: &[String], what: &str) -> Result<Vec<T>, String> {
    ensure!(m.support.len() == m.weights.len(), "{what}: malformed measure");
    let dense = lift(m.dense_over(labels))?;
    let w: Vec<T> = vec_of(&dense);
    ensure!(w.iter().all(|v| tol.nonneg(v)), "{what}: negative weight");
    let total = w.iter().fold(T::zero(), |acc, v| acc + v.clone());
    ensure!(tol.eq(&total, &T::one()), "{what}: total mass is not 1");
    Ok(w)
}

fn convex_weights<T: Scalar>(tol: &Tol<T>, w: &[Rational], what: &str) -> Result<Vec<T>, String> {
    let w: Vec<T> = vec_of(w);
    ensure!(w.iter().all(|v| tol.nonneg(v)), "{what}: negative weight");
    let total = w.iter().fold(T::zero(), |acc, v| acc + v.clone());
    ensure!(tol.eq(&total, &T::one()), "{what}: weights do not sum to 1");
    Ok(w)
}

fn core(instance: &Instance) -> Result<&CoreInstance, String> {
    match instance {
        Instance::Core(c) => Ok(c),
        _ => Err("certificate needs a function-family instance".into()),
    }
}

fn family(instance: &Instance, transposed: bool) -> Result<FamilyMatrix, String> {
    lift(core(instance)?.oriented_family(transposed))
}

fn check_duality<T: Scalar>(tol: &Tol<T>, a: &FamilyMatrix, d: &DualityPair) -> Check {
    let am = mat_of::<T>(a);
    let m = probability(tol, &d.measure, a.row_labels(), "function mixture")?;
    let h = probability(tol, &d.point_weights, a.col_labels(), "point weights")?;
    let v = T::from_rational(&d.value);
    let upper = max_t(mix(&m, &am));
    let lower = min_t(am.iter().map(|f| dot(f, &h)));
    ensure!(tol.eq(&upper, &v), "mixture maximum does not equal the value");
    ensure!(tol.eq(&lower, &v), "point weights do not attain the value");
    match (&d.generators, &d.generator_weights) {
        (None, None) => {}
        (Some(gens), Some(lambda)) => {
            ensure!(gens.len() == lambda.len() && !gens.is_empty(), "generator weights misaligned");
            let lw = convex_weights(tol, lambda, "generator weights")?;
            let mut combo = vec![T::zero(); a.n_cols()];
            for (g, l) in gens.iter().zip(&lw) {
                let gd = probability(tol, g, a.col_labels(), "generator")?;
                for (c, x) in combo.iter_mut().zip(gd) {
                    *c = c.clone() + l.clone() * x;
                }
            }
            ensure!(combo.iter().zip(&h).all(|(c, x)| tol.eq(c, x)), "point weights are not the stated combination");
        }
        _ => return Err("generators and their weights must appear together".into()),
    }
    Ok(())
}

fn check_sub_barycentre<T: Scalar>(tol: &Tol<T>, a: &FamilyMatrix, m: &DiscreteMeasure, point: &str) -> Check {
    let am = mat_of::<T>(a);
    let w = probability(tol, m, a.col_labels(), "barycentre measure")?;
    let x = lift(a.col_index(point))?;
    ensure!(
        am.iter().all(|f| tol.le(&f[x], &dot(f, &w))),
        "`{point}` is not below the barycentre"
    );
    Ok(())
}

fn domination_instance(instance: &Instance) -> Result<DominationInstance, String> {
    let c = core(instance)?;
    let targets = lift(c.targets())?.ok_or("instance has no targets")?;
    lift(DominationInstance::new(lift(c.family())?, targets))
}

fn check_balance<T: Scalar>(tol: &Tol<T>, inst: &DominationInstance, v: &BalanceViolation) -> Check {
    let f = mat_of::<T>(&inst.family);
    let x = inst.family.col_labels();
    let mut lhs = T::zero();
    let mut total = vec![T::zero(); x.len()];
    for BalancePair {
        target,
        delta,
        multiplicity,
    } in &v.pairs
    {
        ensure!(
            multiplicity.is_integer() && multiplicity.is_positive(),
            "multiplicity {multiplicity} is not a positive integer"
        );
        let k = T::from_rational(multiplicity);
        let d = probability(tol, delta, x, "balance delta")?;
        let g: Vec<T> = vec_of(inst.targets.row(lift(inst.targets.row_index(target))?));
        lhs = lhs + k.clone() * dot(&g, &d);
        for (t, dv) in total.iter_mut().zip(d) {
            *t = t.clone() + k.clone() * dv;
        }
    }
    let margin = lhs - max_t(f.iter().map(|row| dot(row, &total)));
    ensure!(v.margin.is_positive(), "stated margin is not positive");
    ensure!(tol.eq(&margin, &T::from_rational(&v.margin)), "balance margin does not match");
    Ok(())
}

fn check_hull_separation<T: Scalar>(tol: &Tol<T>, a: &FamilyMatrix, c: &HullSeparationCert) -> Check {
    ensure!(
        c.target.len() == a.n_cols() && c.weights.len() == a.n_cols(),
        "separation has the wrong length"
    );
    let am = mat_of::<T>(a);
    let w: Vec<T> = vec_of(&c.weights);
    let margin = dot(&vec_of(&c.target), &w) - max_t(am.iter().map(|f| dot(f, &w)));
    ensure!(c.margin.is_positive(), "stated margin is not positive");
    ensure!(tol.eq(&margin, &T::from_rational(&c.margin)), "separation margin does not match");
    Ok(())
}

fn fan_instance(instance: &Instance) -> Result<&FanInstance, String> {
    match instance {
        Instance::Fan(f) => {
            ensure!(!f.vectors.is_empty(), "empty point list");
            ensure!(f.vectors.len() == f.values.len(), "points and values differ in number");
            let d = f.vectors[0].len();
            ensure!(f.vectors.iter().all(|v| v.len() == d), "points have different dimensions");
            Ok(f)
        }
        _ => Err("certificate needs a point/value instance".into()),
    }
}

fn strassen_instance(instance: &Instance) -> Result<&StrassenInstance, String> {
    match instance {
        Instance::Strassen(s) => {
            lift(s.validate())?;
            ensure!(!s.functionals.is_empty(), "no functionals");
            ensure!(s.functionals.iter().all(|f| !f.generators.is_empty()), "functional without generators");
            Ok(s)
        }
        _ => Err("certificate needs a sublinear-functional instance".into()),
    }
}

fn sublinear<T: Scalar>(f: &PolyhedralSublinear, x: &[T]) -> T {
    max_t(f.generators.iter().map(|a| dot(&vec_of(a), x)))
}

fn check_summing<T: Scalar>(tol: &Tol<T>, a: &FamilyMatrix, target: &[Rational], w: &SummingWitness) -> Check {
    ensure!(target.len() == a.n_cols(), "target has the wrong length");
    let abs: Vec<Vec<T>> = mat_of::<T>(a).iter().map(|r| r.iter().map(Scalar::abs).collect()).collect();
    let g: Vec<T> = target.iter().map(|v| T::from_rational(v).abs()).collect();
    if !w.finite {
        let label = w.witness_point.as_ref().ok_or("infeasible witness names no point")?;
        let x = lift(a.col_index(label))?;
        ensure!(!tol.le(&g[x], &T::zero()), "target vanishes at the witness point");
        ensure!(abs.iter().all(|f| tol.le(&f[x], &T::zero())), "a function is non-zero at the witness point");
        return Ok(());
    }
    let (Some(c), Some(m), Some(nu)) = (&w.constant, &w.measure, &w.dual_weights) else {
        return Err("finite witness is missing fields".into());
    };
    let ct = T::from_rational(c);
    let mw = probability(tol, m, a.row_labels(), "summing measure")?;
    ensure!(tol.nonneg(&ct), "negative constant");
    ensure!(nu.len() == a.n_cols(), "dual weights have the wrong length");
    let nut: Vec<T> = vec_of(nu);
    ensure!(nut.iter().all(|v| tol.nonneg(v)), "negative dual weight");
    ensure!(
        nu.iter().zip(target).all(|(v, gv)| !gv.is_zero() || v.is_zero()),
        "dual weight on a point where the target vanishes"
    );
    let mixed = mix(&mw, &abs);
    ensure!(
        g.iter().zip(&mixed).all(|(gv, mv)| tol.le(gv, &(ct.clone() * mv.clone()))),
        "|g| exceeds C times the mixture"
    );
    ensure!(abs.iter().all(|f| tol.le(&dot(f, &nut), &T::one())), "dual weights are infeasible");
    ensure!(tol.eq(&dot(&nut, &g), &ct), "dual objective does not equal C");
    Ok(())
}

fn pietsch_family(inst: &PietschInstance, p: u32) -> Result<FamilyMatrix, String> {
    let est_rows: Vec<Vec<Rational>> = inst
        .net
        .iter()
        .map(|xs| {
            inst.sample
                .iter()
                .map(|x| crate::rational::dot(xs, x).abs().pow(p as i32))
                .collect()
        })
        .collect();
    lift(FamilyMatrix::new(
        crate::model::default_labels("n", inst.net.len()),
        crate::model::default_labels("s", inst.sample.len()),
        est_rows,
    ))
}

/// Substitution checks shared by exact and floating verification.
pub fn check<T: Scalar>(cert: &Certificate, instance: &Instance, transposed: bool, eps: T) -> Check {
    let tol = Tol { eps };
    match cert {
        Certificate::MinimaxReport(r) => {
            let a = family(instance, transposed)?;
            let am = mat_of::<T>(&a);
            let lower = max_t((0..a.n_cols()).map(|j| min_t(column(&am, j))));
            let upper = min_t(am.iter().map(|f| max_t(f.iter().cloned())));
            ensure!(tol.eq(&lower, &T::from_rational(&r.lower)), "lower value does not match");
            ensure!(tol.eq(&upper, &T::from_rational(&r.upper)), "upper value does not match");
            let x = lift(a.col_index(&r.lower_attained_at))?;
            ensure!(
                tol.eq(&min_t(column(&am, x)), &T::from_rational(&r.lower)),
                "stated column does not attain the lower value"
            );
            check_duality(
                &tol,
                &a,
                &DualityPair {
                    value: r.hull_value.clone(),
                    measure: r.optimal_measure.clone(),
                    point_weights: r.optimal_point_weights.clone(),
                    generators: None,
                    generator_weights: None,
                },
            )?;
            if let Some(f) = &r.sub_barycentre {
                check_sub_barycentre(&tol, &a.transpose(), &r.optimal_measure, f)?;
            }
            Ok(())
        }
        Certificate::DualityPair(d) => check_duality(&tol, &family(instance, transposed)?, d),
        Certificate::LocalMinimax(c) => {
            let a = family(instance, transposed)?;
            ensure!(
                !c.subfamilies.is_empty() && c.subfamilies.len() == c.pairs.len(),
                "one duality pair per sub-family is required"
            );
            ensure!(c.best < c.pairs.len(), "best index out of range");
            for (labels, pair) in c.subfamilies.iter().zip(&c.pairs) {
                ensure!(!labels.is_empty(), "empty sub-family");
                let sub = lift(a.select_rows(&lift(a.row_indices(labels))?))?;
                check_duality(&tol, &sub, pair)?;
            }
            let v = T::from_rational(&c.value);
            ensure!(
                tol.eq(&T::from_rational(&c.pairs[c.best].value), &v),
                "best sub-family does not attain the value"
            );
            ensure!(
                c.pairs.iter().all(|p| tol.le(&v, &T::from_rational(&p.value))),
                "a sub-family has a smaller value"
            );
            Ok(())
        }
        Certificate::SubBarycentre(c) => check_sub_barycentre(&tol, &family(instance, transposed)?, &c.measure, &c.point),
        Certificate::DominatingMeasure(m) => {
            let inst = domination_instance(instance)?;
            let w = probability(&tol, m, inst.family.row_labels(), "dominating measure")?;
            let mixed = mix(&w, &mat_of::<T>(&inst.family));
            for g in mat_of::<T>(&inst.targets) {
                ensure!(g.iter().zip(&mixed).all(|(gv, mv)| tol.le(gv, mv)), "a target is not dominated");
            }
            Ok(())
        }
        Certificate::BalanceViolation(v) => check_balance(&tol, &domination_instance(instance)?, v),
        Certificate::HullMembership(c) => {
            let a = family(instance, transposed)?;
            ensure!(c.target.len() == a.n_cols(), "target has the wrong length");
            let w = probability(&tol, &c.measure, a.row_labels(), "hull measure")?;
            let mixed = mix(&w, &mat_of::<T>(&a));
            ensure!(
                mixed.iter().zip(vec_of::<T>(&c.target)).all(|(m, g)| tol.eq(m, &g)),
                "mixture differs from the target"
            );
            Ok(())
        }
        Certificate::HullSeparation(c) => check_hull_separation(&tol, &family(instance, transposed)?, c),
        Certificate::FanFunctional(c) => {
            let f = fan_instance(instance)?;
            ensure!(c.rho.is_positive(), "radius must be positive");
            ensure!(c.phi.len() == f.vectors[0].len(), "functional has the wrong dimension");
            let phi: Vec<T> = vec_of(&c.phi);
            ensure!(
                tol.le(&norm_t(c.norm.dual(), &phi), &T::from_rational(&c.rho)),
                "functional exceeds the dual-norm radius"
            );
            for (x, g) in f.vectors.iter().zip(&f.values) {
                ensure!(tol.le(&T::from_rational(g), &dot(&phi, &vec_of(x))), "a value is not dominated");
            }
            Ok(())
        }
        Certificate::FanViolation(c) => {
            let f = fan_instance(instance)?;
            ensure!(c.rho.is_positive(), "radius must be positive");
            ensure!(c.weights.len() == f.vectors.len(), "weights have the wrong length");
            let p: Vec<T> = vec_of(&c.weights);
            ensure!(p.iter().all(|v| tol.nonneg(v)), "negative weight");
            let total = p.iter().fold(T::zero(), |acc, v| acc + v.clone());
            ensure!(tol.le(&total, &T::one()), "weights exceed total mass 1");
            let d = f.vectors[0].len();
            let mut sum = vec![T::zero(); d];
            for (pi, x) in p.iter().zip(&f.vectors) {
                for (s, v) in sum.iter_mut().zip(vec_of::<T>(x)) {
                    *s = s.clone() + pi.clone() * v;
                }
            }
            let margin = dot(&p, &vec_of(&f.values)) - T::from_rational(&c.rho) * norm_t(c.norm, &sum);
            ensure!(c.margin.is_positive(), "stated margin is not positive");
            ensure!(tol.eq(&margin, &T::from_rational(&c.margin)), "violation margin does not match");
            Ok(())
        }
        Certificate::ExhaustionCover(c) => {
            let clipped = ClippedFamily::new(&family(instance, transposed)?);
            let a = clipped.matrix();
            let am = mat_of::<T>(a);
            ensure!(c.pieces.len() == c.witnesses.len(), "one witness per piece is required");
            let mut positive = true;
            for (piece, w) in c.pieces.iter().zip(&c.witnesses) {
                let cols = lift(a.col_indices(&piece.points))?;
                let Some(w) = w else {
                    ensure!(piece.points.is_empty(), "missing witness for a non-empty piece");
                    positive = false;
                    continue;
                };
                ensure!(!piece.points.is_empty(), "witness given for an empty piece");
                let delta = probability(&tol, &w.delta, &piece.points, "piece delta")?;
                let m = probability(&tol, &w.measure, a.row_labels(), "piece measure")?;
                let v = T::from_rational(&w.value);
                let sub: Vec<Vec<T>> = am.iter().map(|f| cols.iter().map(|&j| f[j].clone()).collect()).collect();
                ensure!(
                    tol.eq(&max_t(sub.iter().map(|f| dot(f, &delta))), &v),
                    "piece `{}`: δ does not attain I_F",
                    piece.label
                );
                ensure!(
                    tol.eq(&min_t(mix(&m, &sub)), &v),
                    "piece `{}`: m does not attain I_F",
                    piece.label
                );
                positive &= w.value.is_positive();
            }
            let inst = lift(ExhaustionInstance::new(clipped.clone(), c.pieces.clone()))?;
            let remainder = inst.remainder();
            ensure!(remainder == c.remainder, "remainder does not match the pieces");
            let rest = lift(a.col_indices(&remainder))?;
            let null = am.iter().all(|f| rest.iter().all(|&j| tol.le(&f[j].abs(), &T::zero())));
            ensure!(positive == c.pieces_positive, "piece positivity flag is wrong");
            ensure!(null == c.remainder_null, "remainder flag is wrong");
            ensure!(c.valid == (positive && null), "validity flag is wrong");
            Ok(())
        }
        Certificate::SufficiencyWitness(c) => {
            let a = family(instance, transposed)?;
            let am = mat_of::<T>(&a);
            let zs = lift(a.col_indices(&c.subset))?;
            ensure!(!zs.is_empty(), "empty subset");
            let outside: Vec<&String> = (0..a.n_cols())
                .filter(|j| !zs.contains(j))
                .map(|j| &a.col_labels()[j])
                .collect();
            let named: Vec<&String> = c.representations.iter().map(|r| &r.point).collect();
            ensure!(outside == named, "representations must cover exactly the points outside the subset");
            for rep in &c.representations {
                let m = probability(&tol, &rep.measure, &c.subset, "representing measure")?;
                let x = lift(a.col_index(&rep.point))?;
                for h in &am {
                    let on_z: Vec<T> = zs.iter().map(|&j| h[j].clone()).collect();
                    ensure!(tol.le(&h[x], &dot(&on_z, &m)), "`{}` is not represented", rep.point);
                }
            }
            Ok(())
        }
        Certificate::SufficiencyViolation(c) => {
            let a = family(instance, transposed)?;
            let am = mat_of::<T>(&a);
            let zs = lift(a.col_indices(&c.subset))?;
            ensure!(!zs.is_empty(), "empty subset");
            let v = &c.violation;
            let x = lift(a.col_index(&v.point))?;
            ensure!(!zs.contains(&x), "violating point lies in the subset");
            let d = probability(&tol, &v.delta, a.row_labels(), "function mixture")?;
            let at = |j: usize| dot(&d, &column(&am, j));
            let margin = at(x) - max_t(zs.iter().map(|&z| at(z)));
            ensure!(v.margin.is_positive(), "stated margin is not positive");
            ensure!(tol.eq(&margin, &T::from_rational(&v.margin)), "sufficiency margin does not match");
            Ok(())
        }
        Certificate::StrassenDecomposition(c) => {
            let s = strassen_instance(instance)?;
            let fs = &s.functionals;
            let dec = &c.decomposition;
            ensure!(c.phi.len() == s.dimension, "φ has the wrong dimension");
            ensure!(dec.t.len() == fs.len() && dec.hull_weights.len() == fs.len(), "one t per functional is required");
            let names: Vec<String> = fs.iter().map(|f| f.name.clone()).collect();
            let lambda = probability(&tol, &dec.lambda, &names, "λ")?;
            let mut sum = vec![T::zero(); s.dimension];
            for (((f, tf), cw), l) in fs.iter().zip(&dec.t).zip(&dec.hull_weights).zip(&lambda) {
                ensure!(tf.len() == s.dimension && cw.len() == f.generators.len(), "`{}`: shape mismatch", f.name);
                let w = convex_weights(&tol, cw, "hull weights")?;
                let t: Vec<T> = vec_of(tf);
                for (k, tk) in t.iter().enumerate() {
                    let combo = w
                        .iter()
                        .zip(&f.generators)
                        .fold(T::zero(), |acc, (wi, a)| acc + wi.clone() * T::from_rational(&a[k]));
                    ensure!(tol.eq(&combo, tk), "`{}`: t is not the stated hull point", f.name);
                }
                for (s, tk) in sum.iter_mut().zip(t) {
                    *s = s.clone() + l.clone() * tk;
                }
            }
            ensure!(
                sum.iter().zip(vec_of::<T>(&c.phi)).all(|(s, p)| tol.eq(s, &p)),
                "Σ λ(f) t_f differs from φ"
            );
            Ok(())
        }
        Certificate::StrassenViolation(c) => {
            let s = strassen_instance(instance)?;
            ensure!(c.phi.len() == s.dimension && c.x.len() == s.dimension, "wrong dimension");
            let x: Vec<T> = vec_of(&c.x);
            let margin = dot(&vec_of(&c.phi), &x) - max_t(s.functionals.iter().map(|f| sublinear(f, &x)));
            ensure!(c.margin.is_positive(), "stated margin is not positive");
            ensure!(tol.eq(&margin, &T::from_rational(&c.margin)), "Strassen margin does not match");
            Ok(())
        }
        Certificate::SummingWitness(c) => check_summing(&tol, &family(instance, transposed)?, &c.target, &c.witness),
        Certificate::PietschEstimate(c) => {
            let Instance::Pietsch(inst) = instance else {
                return Err("certificate needs an operator instance".into());
            };
            lift(crate::summability::check_pietsch_shapes(&inst.matrix, &inst.net, &inst.sample))?;
            ensure!(c.p >= 1, "p must be at least 1");
            ensure!(c.target.len() == inst.sample.len(), "target has the wrong length");
            for (x, g) in inst.sample.iter().zip(&c.target) {
                let tx: Vec<T> = inst.matrix.iter().map(|row| dot(&vec_of(row), &vec_of(x))).collect();
                ensure!(
                    tol.eq(&pow_t(&norm_t(c.norm, &tx), c.p), &T::from_rational(g)),
                    "target value does not match ‖Tx‖^p"
                );
            }
            check_summing(&tol, &pietsch_family(inst, c.p)?, &c.target, &c.witness)
        }
    }
}

/// Parts of a certificate that restate deterministic exact computations
/// rather than inequalities: recomputed and compared.
fn check_exact_only(cert: &Certificate, instance: &Instance, transposed: bool) -> Check {
    match cert {
        Certificate::MinimaxReport(r) => {
            let a = family(instance, transposed)?;
            let (_, at) = lower_value_attained(&a);
            ensure!(a.col_labels()[at] == r.lower_attained_at, "lower value is attained first elsewhere");
            ensure!(upper_value(&a) == r.upper, "upper value does not match");
            let c = is_concave_like(&a);
            ensure!(c.concave_like == r.concave_like, "concavity flag is wrong");
            if let Some(stated) = &r.concavity {
                ensure!(*stated == c, "concavity analysis does not match");
            }
            let sub = lift(find_sub_barycentre(&a.transpose(), &r.optimal_measure))?;
            ensure!(sub == r.sub_barycentre, "sub-barycentre does not match the exhaustive scan");
            Ok(())
        }
        _ => Ok(()),
    }
}
