//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use mmcert_core::certificate::{verify, Certificate, Envelope};
use mmcert_core::domination::{
    find_dominating_measure, hull_membership, hull_via_domination, verify_balance, verify_dominating,
    DominationInstance, DominationOutcome, HullOutcome,
};
use mmcert_core::exhaustion::{
    auto_levels, build_exhaustion, intersection_bound, verify_exhaustion, ClippedFamily, ExhaustionInstance,
};
use mmcert_core::io::{CoreInstance, Instance, StrassenInstance};
use mmcert_core::minimax::{find_sub_barycentre, game_value, hull_minimax, lower_value};
use mmcert_core::model::{DiscreteMeasure, FamilyMatrix};
use mmcert_core::oracle::{enumerate_balance, expand_to_point_masses, grid_minimax, point_pair_margin};
use mmcert_core::rational::{dot, q, r, Rational};
use mmcert_core::representation::{
    strassen_decompose, strassen_margin, verify_decomposition, PolyhedralSublinear, StrassenOutcome,
};
use mmcert_core::summability::summing_constant;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and sizes pinned by the acceptance criteria.
const DUALITY_INSTANCES: usize = 200;
const DUALITY_MAX_DIM: usize = 8;
const DUALITY_TIME_LIMIT: Duration = Duration::from_secs(30);
const CONCAVE_INSTANCES: usize = 100;
const DOMINATION_INSTANCES: usize = 200;
const DOMINATION_MAX: (usize, usize, usize) = (6, 6, 4);
const HULL_INSTANCES: usize = 100;
const EXHAUSTION_INSTANCES: usize = 100;
const STRASSEN_INSTANCES: usize = 100;
const STRASSEN_MAX_DIM: usize = 4;
const SUMMING_INSTANCES: usize = 50;
const GRID_RESOLUTION: u32 = 50;
const SUITE_TIME_LIMIT: Duration = Duration::from_secs(180);

/// Exhaustive balance search: multisets of this many (target, point) pairs.
const BALANCE_SEARCH_SUPPORT: usize = 2;
const BALANCE_SEARCH_CAP: u64 = 2_000_000;
/// Scalars perturbed per certificate in criterion 10.
const PERTURBATIONS_PER_CERT: usize = 12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], detail: String) -> Outcome {
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            detail
        } else {
            format!("{detail}; first failure: {}", failures[0])
        },
    }
}

/// Certificates emitted by criteria 1–8 with the instance each refers to.
type Issued = Vec<(Envelope, Instance)>;

fn issue(issued: &mut Issued, instance: Instance, cert: Certificate) {
    issued.push((Envelope::seal(&instance, false, cert), instance));
}

fn scalar(rng: &mut ChaCha8Rng) -> Rational {
    q(rng.gen_range(-20..=20), rng.gen_range(1..=6))
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Matrix with between 1 and `max_rows` × `max_cols` random entries.
fn random_matrix(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> FamilyMatrix {
    let (rows, cols) = (rng.gen_range(1..=max_rows), rng.gen_range(1..=max_cols));
    FamilyMatrix::from_rows((0..rows).map(|_| (0..cols).map(|_| scalar(rng)).collect()).collect()).unwrap()
}

fn random_probability(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    loop {
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=5)).collect();
        let total: i64 = raw.iter().sum();
        if total > 0 {
            return raw.into_iter().map(|v| q(v, total)).collect();
        }
    }
}

fn core(a: &FamilyMatrix) -> Instance {
    Instance::Core(CoreInstance::from_family(a))
}

// Independent evaluations by direct substitution.

fn mixture(w: &[Rational], a: &FamilyMatrix) -> Vec<Rational> {
    (0..a.n_cols()).map(|j| dot(w, &a.column(j))).collect()
}

fn max_mixture(m: &DiscreteMeasure, a: &FamilyMatrix) -> Rational {
    mixture(&m.dense_over(a.row_labels()).unwrap(), a).into_iter().reduce(Rational::max).unwrap()
}

fn min_against(h: &DiscreteMeasure, a: &FamilyMatrix) -> Rational {
    let w = h.dense_over(a.col_labels()).unwrap();
    a.rows().iter().map(|f| dot(f, &w)).reduce(Rational::min).unwrap()
}

fn lower_by_scan(a: &FamilyMatrix) -> Rational {
    (0..a.n_cols())
        .map(|j| a.column(j).into_iter().reduce(Rational::min).unwrap())
        .reduce(Rational::max)
        .unwrap()
}

/// Value of a 2×2 game `[[a, b], [c, d]]` (rows minimise the column maximum).
fn closed_form_2x2(m: [[i64; 2]; 2]) -> (Rational, Rational) {
    let [[a, b], [c, d]] = m;
    let den = a - b - c + d;
    // Weight p on row 1 equalising both columns: p·a + (1−p)·c = p·b + (1−p)·d.
    let p = q(d - c, den);
    let v = &p * r(a) + (r(1) - &p) * r(c);
    (v, p)
}

fn criterion_1(rng: &mut ChaCha8Rng, issued: &mut Issued, instances: &mut Vec<FamilyMatrix>) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for k in 0..DUALITY_INSTANCES {
        let a = random_matrix(rng, DUALITY_MAX_DIM, DUALITY_MAX_DIM);
        let hull = hull_minimax(&a).unwrap();
        let game = game_value(&a, None).unwrap();
        if hull.value != game.value {
            failures.push(format!("instance {k}: hull {} vs game {}", hull.value, game.value));
        }
        if max_mixture(&hull.measure, &a) != hull.value || min_against(&hull.point_weights, &a) != hull.value {
            failures.push(format!("instance {k}: optimal pair does not attain {}", hull.value));
        }
        issue(issued, core(&a), Certificate::game(&a, None).unwrap());
        if k % 5 == 0 {
            issue(issued, core(&a), Certificate::minimax(&a, false).unwrap());
        }
        instances.push(a);
    }
    let elapsed = start.elapsed();
    if elapsed > DUALITY_TIME_LIMIT {
        failures.push(format!("took {elapsed:?}, limit {DUALITY_TIME_LIMIT:?}"));
    }
    outcome(
        &failures,
        format!("{DUALITY_INSTANCES} matrices up to 8x8, hull value = game value exactly, {elapsed:.2?}"),
    )
}

/// Close a family under pointwise min (and max when `with_max`); `None` if it
/// grows past `cap` rows.
fn lattice_closure(mut rows: Vec<Vec<Rational>>, with_max: bool, cap: usize) -> Option<Vec<Vec<Rational>>> {
    rows.sort();
    rows.dedup();
    loop {
        let mut added = Vec::new();
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                let lo: Vec<Rational> = rows[i].iter().zip(&rows[j]).map(|(a, b)| a.clone().min(b.clone())).collect();
                added.push(lo);
                if with_max {
                    added.push(rows[i].iter().zip(&rows[j]).map(|(a, b)| a.clone().max(b.clone())).collect());
                }
            }
        }
        let before = rows.len();
        rows.extend(added);
        rows.sort();
        rows.dedup();
        if rows.len() > cap {
            return None;
        }
        if rows.len() == before {
            return Some(rows);
        }
    }
}

fn concave_family(rng: &mut ChaCha8Rng, monotone: bool) -> FamilyMatrix {
    loop {
        let cols = rng.gen_range(1..=DUALITY_MAX_DIM);
        let seeds = rng.gen_range(1..=3);
        let rows: Vec<Vec<Rational>> = (0..seeds)
            .map(|_| {
                if monotone {
                    let mut row = vec![scalar(rng)];
                    for _ in 1..cols {
                        let step = q(rng.gen_range(0..=6), rng.gen_range(1..=3));
                        row.push(row.last().unwrap() + &step);
                    }
                    row
                } else {
                    (0..cols).map(|_| scalar(rng)).collect()
                }
            })
            .collect();
        if let Some(rows) = lattice_closure(rows, !monotone, DUALITY_MAX_DIM) {
            return FamilyMatrix::from_rows(rows).unwrap();
        }
    }
}

fn criterion_2(rng: &mut ChaCha8Rng, issued: &mut Issued) -> Outcome {
    let mut failures = Vec::new();
    for k in 0..CONCAVE_INSTANCES {
        let a = concave_family(rng, k % 2 == 0);
        let hull = hull_minimax(&a).unwrap();
        let lower = lower_value(&a);
        if hull.value != lower || lower != lower_by_scan(&a) {
            failures.push(format!("family {k}: hull {} vs lower {lower}", hull.value));
        }
        let at = a.transpose();
        match find_sub_barycentre(&at, &hull.measure).unwrap() {
            Some(f) => {
                let i = a.row_index(&f).unwrap();
                let mix = mixture(&hull.measure.dense_over(a.row_labels()).unwrap(), &a);
                if a.row(i).iter().zip(&mix).any(|(v, m)| v > m) {
                    failures.push(format!("family {k}: `{f}` is not below the optimal mixture"));
                }
            }
            None => failures.push(format!("family {k}: no sub-barycentre")),
        }
        issue(issued, core(&a), Certificate::minimax(&a, true).unwrap());
    }
    outcome(
        &failures,
        format!("{CONCAVE_INSTANCES} monotone / lattice families, hull value = lower value, sub-barycentre found"),
    )
}

fn domination_instance(rng: &mut ChaCha8Rng) -> (DominationInstance, Instance) {
    let (max_f, max_x, max_g) = DOMINATION_MAX;
    let family = random_matrix(rng, max_f, max_x);
    let (nf, nx, ng) = (family.n_rows(), family.n_cols(), rng.gen_range(1..=max_g));
    let targets = if rng.gen_bool(0.5) {
        // Targets below a random mixture, so the dominated branch is exercised.
        let w = random_probability(rng, nf);
        let mix = mixture(&w, &family);
        (0..ng)
            .map(|_| mix.iter().map(|v| v - q(rng.gen_range(0..=3), 2)).collect())
            .collect()
    } else {
        (0..ng).map(|_| (0..nx).map(|_| scalar(rng)).collect()).collect()
    };
    let targets = FamilyMatrix::new(labels("g", ng), family.col_labels().to_vec(), targets).unwrap();
    let instance = Instance::Core(CoreInstance::from_family(&family).with_targets(&targets));
    (DominationInstance::new(family, targets).unwrap(), instance)
}

fn criterion_3(rng: &mut ChaCha8Rng, issued: &mut Issued) -> Outcome {
    let mut failures = Vec::new();
    let (mut dominated, mut violated, mut enumerated) = (0, 0, 0);
    for k in 0..DOMINATION_INSTANCES {
        let (inst, instance) = domination_instance(rng);
        let search = enumerate_balance(&inst, BALANCE_SEARCH_SUPPORT, BALANCE_SEARCH_CAP).unwrap();
        let cert = Certificate::domination(&inst).unwrap();
        match find_dominating_measure(&inst).unwrap() {
            DominationOutcome::Dominated(m) => {
                dominated += 1;
                if !verify_dominating(&inst, &m).unwrap() {
                    failures.push(format!("instance {k}: dominating measure fails"));
                }
                if search.violation_found() {
                    failures.push(format!("instance {k}: oracle finds a violation the LP missed"));
                }
            }
            DominationOutcome::Violation(v) => {
                violated += 1;
                if verify_balance(&inst, &v.pairs).unwrap() {
                    failures.push(format!("instance {k}: balance holds on the returned pairs"));
                }
                // The violation as integer counts of point-mass pairs: one
                // element of the oracle's search space.
                let counts = expand_to_point_masses(&v);
                let margin = point_pair_margin(&inst, &counts).unwrap();
                if !margin.is_positive() {
                    failures.push(format!("instance {k}: oracle margin {margin} on the expanded violation"));
                }
                let size: Rational = counts.iter().map(|c| c.2.clone()).sum();
                if size <= r(6) {
                    let support = size.numer().try_into().unwrap();
                    match enumerate_balance(&inst, support, BALANCE_SEARCH_CAP) {
                        Ok(s) if s.violation_found() => enumerated += 1,
                        Ok(_) => failures.push(format!("instance {k}: exhaustive search finds no violation")),
                        Err(_) => {}
                    }
                }
            }
        }
        issue(issued, instance, cert);
    }
    outcome(
        &failures,
        format!(
            "{DOMINATION_INSTANCES} instances up to 6x6x4: {dominated} dominated, {violated} violations \
             ({enumerated} re-found by exhaustive search)"
        ),
    )
}

fn criterion_4(rng: &mut ChaCha8Rng, issued: &mut Issued) -> Outcome {
    let mut failures = Vec::new();
    let mut inside = 0;
    for k in 0..HULL_INSTANCES {
        let a = random_matrix(rng, 6, 6);
        let g = if k % 2 == 0 {
            mixture(&random_probability(rng, a.n_rows()), &a)
        } else {
            (0..a.n_cols()).map(|_| scalar(rng)).collect()
        };
        let direct = matches!(hull_membership(&a, &g).unwrap(), HullOutcome::InHull(_));
        let routed = matches!(hull_via_domination(&a, &g).unwrap(), DominationOutcome::Dominated(_));
        if direct != routed {
            failures.push(format!("pair {k}: direct {direct} vs symmetrised {routed}"));
        }
        inside += usize::from(direct);
        issue(issued, core(&a), Certificate::hull(&a, &g).unwrap());
    }
    outcome(
        &failures,
        format!("{HULL_INSTANCES} pairs, {inside} inside the hull, both routes agree"),
    )
}

fn criterion_5(rng: &mut ChaCha8Rng, issued: &mut Issued) -> Outcome {
    let mut failures = Vec::new();
    let mut pieces = 0;
    for k in 0..EXHAUSTION_INSTANCES {
        let (nf, nx) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let values = (0..nf)
            .map(|_| (0..nx).map(|_| if rng.gen_bool(0.3) { r(0) } else { scalar(rng) }).collect())
            .collect();
        let a = FamilyMatrix::from_rows(values).unwrap();
        let clipped = ClippedFamily::new(&a);
        let m = clipped.matrix();
        let mut subset: Vec<String> = m.col_labels().iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if subset.is_empty() {
            subset.push(m.col_labels()[0].clone());
        }
        let b = intersection_bound(&clipped, &subset).unwrap();
        let cols = m.col_indices(&subset).unwrap();
        let delta = b.delta.dense_over(&subset).unwrap();
        let primal = m
            .rows()
            .iter()
            .map(|f| cols.iter().zip(&delta).map(|(&j, d)| &f[j] * d).sum::<Rational>())
            .reduce(Rational::max)
            .unwrap();
        let mix = mixture(&b.measure.dense_over(m.row_labels()).unwrap(), m);
        let dual = cols.iter().map(|&j| mix[j].clone()).reduce(Rational::min).unwrap();
        if primal != b.value || dual != b.value {
            failures.push(format!("instance {k}: primal {primal}, dual {dual}, stated {}", b.value));
        }

        let generators: Vec<DiscreteMeasure> = (0..rng.gen_range(1..=3))
            .map(|_| DiscreteMeasure::from_dense(m.row_labels(), &random_probability(rng, nf)))
            .collect();
        let levels: Vec<u64> = if k % 2 == 0 {
            auto_levels(&clipped, &generators).unwrap()
        } else {
            generators.iter().map(|_| rng.gen_range(1..=5)).collect()
        };
        let build = build_exhaustion(&clipped, &generators, &levels).unwrap();
        let inst = ExhaustionInstance::new(clipped.clone(), build.pieces.clone()).unwrap();
        let report = verify_exhaustion(&inst).unwrap();
        for (bound, value) in build.bounds.iter().zip(&report.piece_values) {
            match value {
                Some(v) if *v >= bound.threshold && *v == bound.value => {}
                _ => failures.push(format!("instance {k}: piece {} below 1/p = {}", bound.label, bound.threshold)),
            }
        }
        if !report.pieces_positive {
            failures.push(format!("instance {k}: a built piece has I_F = 0"));
        }
        pieces += build.pieces.len();
        issue(issued, core(&a), Certificate::exhaustion(&inst).unwrap());
    }
    outcome(
        &failures,
        format!("{EXHAUSTION_INSTANCES} clipped instances, primal = dual; {pieces} built pieces all ≥ 1/p"),
    )
}

fn random_functionals(rng: &mut ChaCha8Rng, d: usize) -> Vec<PolyhedralSublinear> {
    (1..=rng.gen_range(1..=4))
        .map(|k| PolyhedralSublinear {
            name: format!("p{k}"),
            generators: (0..rng.gen_range(1..=4)).map(|_| (0..d).map(|_| scalar(rng)).collect()).collect(),
        })
        .collect()
}

fn criterion_6(rng: &mut ChaCha8Rng, issued: &mut Issued) -> Outcome {
    let mut failures = Vec::new();
    for k in 0..STRASSEN_INSTANCES {
        let d = rng.gen_range(1..=STRASSEN_MAX_DIM);
        let fs = random_functionals(rng, d);
        let instance = Instance::Strassen(StrassenInstance {
            dimension: d,
            functionals: fs.clone(),
        });

        // φ = Σ λ_f t_f with each t_f a random convex combination of generators.
        let lambda = random_probability(rng, fs.len());
        let mut phi = vec![r(0); d];
        for (f, l) in fs.iter().zip(&lambda) {
            let w = random_probability(rng, f.generators.len());
            for (i, p) in phi.iter_mut().enumerate() {
                *p += l * &w.iter().zip(&f.generators).map(|(c, a)| c * &a[i]).sum::<Rational>();
            }
        }
        match strassen_decompose(&phi, &fs).unwrap() {
            StrassenOutcome::Decomposition(dec) => {
                let l = dec.lambda.dense_over(&fs.iter().map(|f| f.name.clone()).collect::<Vec<_>>()).unwrap();
                let mut sum = vec![r(0); d];
                for (((f, t), c), lf) in fs.iter().zip(&dec.t).zip(&dec.hull_weights).zip(&l) {
                    let residual: Vec<Rational> = (0..d)
                        .map(|i| &t[i] - c.iter().zip(&f.generators).map(|(w, a)| w * &a[i]).sum::<Rational>())
                        .collect();
                    let convex = c.iter().all(|w| !w.is_negative()) && c.iter().cloned().sum::<Rational>() == r(1);
                    if !convex || residual.iter().any(|v| !v.is_zero()) {
                        failures.push(format!("instance {k}: t for {} leaves its hull", f.name));
                    }
                    for (s, v) in sum.iter_mut().zip(t) {
                        *s += lf * v;
                    }
                }
                if sum != phi || !verify_decomposition(&phi, &fs, &dec).unwrap() {
                    failures.push(format!("instance {k}: Σ λ t ≠ φ"));
                }
            }
            StrassenOutcome::Violation { .. } => failures.push(format!("instance {k}: hull point reported outside")),
        }
        issue(issued, instance.clone(), Certificate::strassen(&phi, &fs).unwrap());

        // φ outside: ⟨φ, x⟩ = M + 1 for a direction x with max_f f(x) = M.
        let x: Vec<Rational> = loop {
            let x: Vec<Rational> = (0..d).map(|_| r(rng.gen_range(-3..=3))).collect();
            if x.iter().any(|v| !v.is_zero()) {
                break x;
            }
        };
        let top = fs.iter().map(|f| f.eval(&x)).reduce(Rational::max).unwrap();
        let scale = (top + r(1)) / dot(&x, &x);
        let outside: Vec<Rational> = x.iter().map(|v| v * &scale).collect();
        match strassen_decompose(&outside, &fs).unwrap() {
            StrassenOutcome::Violation { x, margin } => {
                if !margin.is_positive() || strassen_margin(&outside, &fs, &x) != margin {
                    failures.push(format!("instance {k}: violation margin {margin} does not hold"));
                }
            }
            StrassenOutcome::Decomposition(_) => failures.push(format!("instance {k}: outside point decomposed")),
        }
        issue(issued, instance, Certificate::strassen(&outside, &fs).unwrap());
    }
    outcome(
        &failures,
        format!("{STRASSEN_INSTANCES} instances in dimension ≤ 4: inside points decomposed, outside points separated"),
    )
}

fn criterion_7(issued: &mut Issued) -> Outcome {
    let mut failures = Vec::new();
    let half = vec![q(1, 2), q(1, 2)];
    for (m, value, weight) in [([[1, -1], [-1, 1]], r(0), q(1, 2)), ([[0, 6], [3, 0]], r(2), q(1, 3))] {
        let (cv, cp) = closed_form_2x2(m);
        if cv != value || cp != weight {
            failures.push(format!("closed form for {m:?} gives {cv} at {cp}"));
        }
        let a = FamilyMatrix::from_ints(&[&m[0], &m[1]]).unwrap();
        let g = game_value(&a, None).unwrap();
        let grid = grid_minimax(&a, 3).unwrap();
        let measure = g.measure.dense_over(a.row_labels()).unwrap();
        if g.value != value || measure != vec![weight.clone(), r(1) - &weight] {
            failures.push(format!("{m:?}: value {} with measure {measure:?}", g.value));
        }
        if m[0][0] == 1 && g.point_weights.dense_over(a.col_labels()).unwrap() != half {
            failures.push("matching pennies: point weights are not (1/2, 1/2)".into());
        }
        if m[0][0] == 0 && grid != value {
            failures.push(format!("grid N = 3 gives {grid}"));
        }
        issue(issued, core(&a), Certificate::game(&a, None).unwrap());
        issue(issued, core(&a), Certificate::minimax(&a, true).unwrap());
    }
    outcome(&failures, "matching pennies value 0 at (1/2,1/2); [[0,6],[3,0]] value 2 at (1/3,2/3)".into())
}

fn criterion_8(rng: &mut ChaCha8Rng, issued: &mut Issued) -> Outcome {
    let mut failures = Vec::new();
    let mut infinite = 0;
    for k in 0..SUMMING_INSTANCES {
        let (nf, nx) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let mut values: Vec<Vec<Rational>> = (0..nf).map(|_| (0..nx).map(|_| scalar(rng)).collect()).collect();
        if k % 3 == 0 {
            let j = rng.gen_range(0..nx);
            for row in &mut values {
                row[j] = r(0);
            }
        }
        let a = FamilyMatrix::from_rows(values).unwrap();
        let g: Vec<Rational> = (0..nx).map(|_| scalar(rng)).collect();
        let doubled: Vec<Rational> = g.iter().map(|v| v * r(2)).collect();
        let w = summing_constant(&a, &g).unwrap();
        let w2 = summing_constant(&a, &doubled).unwrap();
        let blocked = (0..nx).any(|j| !g[j].is_zero() && a.column(j).iter().all(Rational::is_zero));
        if w.finite == blocked || w2.finite == blocked {
            failures.push(format!("instance {k}: finiteness {} but blocked column {blocked}", w.finite));
        }
        if w.finite {
            let (c, c2) = (w.constant.clone().unwrap(), w2.constant.clone().unwrap());
            if c2 != &c * r(2) {
                failures.push(format!("instance {k}: C(2g) = {c2}, 2·C(g) = {}", &c * r(2)));
            }
        } else {
            infinite += 1;
        }
        issue(issued, core(&a), Certificate::summing(&a, &g).unwrap());
    }

    let id = FamilyMatrix::from_ints(&[&[1, 0], &[0, 1]]).unwrap();
    let g = vec![r(1), r(1)];
    let w = summing_constant(&id, &g).unwrap();
    // For a diagonal family the least constant is Σ |g_i| / a_ii.
    let closed = g.iter().map(Rational::abs).sum::<Rational>();
    let m = w.measure.as_ref().map(|m| m.dense_over(id.row_labels()).unwrap());
    if w.constant != Some(closed.clone()) || closed != r(2) || m != Some(vec![q(1, 2), q(1, 2)]) {
        failures.push(format!("identity: C = {:?}, m = {m:?}", w.constant));
    }
    issue(issued, core(&id), Certificate::summing(&id, &g).unwrap());
    outcome(
        &failures,
        format!("{SUMMING_INSTANCES} instances: C(2g) = 2·C(g), {infinite} infinite exactly at blocked columns; identity C = 2"),
    )
}

fn criterion_9(instances: &[FamilyMatrix]) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for (k, a) in instances.iter().enumerate() {
        let exact = hull_minimax(a).unwrap().value;
        let grid = grid_minimax(a, GRID_RESOLUTION).unwrap();
        let bound = a.range() * r(a.n_rows() as i64) / r(GRID_RESOLUTION as i64);
        let gap = (&grid - &exact).abs();
        if gap > bound {
            failures.push(format!("instance {k}: grid {grid}, exact {exact}, bound {bound}"));
        }
        if !bound.is_zero() {
            worst = worst.max((gap / bound).to_f64());
        }
    }
    outcome(
        &failures,
        format!(
            "{} instances, N = {GRID_RESOLUTION}, worst gap/bound {worst:.3}, {:.2?}",
            instances.len(),
            start.elapsed()
        ),
    )
}

/// Paths to every string in `v` that parses as a scalar, in document order.
fn scalar_paths(v: &serde_json::Value, path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    match v {
        serde_json::Value::String(s) if s.parse::<Rational>().is_ok() => out.push(path.clone()),
        serde_json::Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                path.push(i.to_string());
                scalar_paths(item, path, out);
                path.pop();
            }
        }
        serde_json::Value::Object(map) => {
            for (k, item) in map {
                path.push(k.clone());
                scalar_paths(item, path, out);
                path.pop();
            }
        }
        _ => {}
    }
}

fn at_path<'a>(v: &'a mut serde_json::Value, path: &[String]) -> &'a mut serde_json::Value {
    path.iter().fold(v, |v, k| match v {
        serde_json::Value::Array(items) => &mut items[k.parse::<usize>().unwrap()],
        serde_json::Value::Object(map) => map.get_mut(k).unwrap(),
        _ => unreachable!(),
    })
}

/// Flip the lowest bit of the numerator.
fn flip_low_bit(x: &Rational) -> Rational {
    let n = x.numer() ^ num_bigint::BigInt::from(1);
    Rational::new(n, x.denom().clone())
}

fn criterion_10(rng: &mut ChaCha8Rng, issued: &Issued) -> Outcome {
    let mut failures = Vec::new();
    let mut valid = 0;
    let (mut perturbed, mut refused, mut by_math) = (0, 0, 0);
    for (k, (env, instance)) in issued.iter().enumerate() {
        let verdict = verify(env, instance);
        if verdict.valid {
            valid += 1;
        } else {
            failures.push(format!("certificate {k} ({}): {:?}", env.certificate.kind(), verdict.reason));
        }
        let json = serde_json::to_value(env).unwrap();
        let mut paths = Vec::new();
        scalar_paths(&json["certificate"], &mut vec!["certificate".into()], &mut paths);
        paths.shuffle(rng);
        for path in paths.iter().take(PERTURBATIONS_PER_CERT) {
            let mut bad = json.clone();
            let slot = at_path(&mut bad, path);
            let old: Rational = slot.as_str().unwrap().parse().unwrap();
            *slot = serde_json::Value::String(flip_low_bit(&old).to_string());
            let mut bad: Envelope = serde_json::from_value(bad).unwrap();
            perturbed += 1;
            if verify(&bad, instance).valid {
                failures.push(format!("certificate {k}: flip at {} accepted", path.join(".")));
            } else {
                refused += 1;
            }
            // Same perturbation with a consistent digest: caught by the arithmetic alone?
            bad.digest = mmcert_core::io::hash_json(&bad.certificate);
            if !verify(&bad, instance).valid {
                by_math += 1;
            }
        }
    }
    outcome(
        &failures,
        format!(
            "{valid}/{} certificates verify; {refused}/{perturbed} single-bit flips refused \
             ({by_math} by the arithmetic checks alone, digest resealed)",
            issued.len()
        ),
    )
}

fn run(n: usize, name: &str, results: &mut Vec<bool>, f: impl FnOnce() -> Outcome) {
    let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| Outcome {
        pass: false,
        detail: format!(
            "panicked: {}",
            e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
        ),
    });
    println!("criterion {n:>2} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    results.push(o.pass);
}

fn main() {
    // Ignore libtest arguments such as --nocapture or a filter.
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6d_6365_7274);
    let mut issued: Issued = Vec::new();
    let mut duality: Vec<FamilyMatrix> = Vec::new();
    let mut results = Vec::new();

    run(1, "exact duality", &mut results, || criterion_1(&mut rng, &mut issued, &mut duality));
    run(2, "concave-like minimax", &mut results, || criterion_2(&mut rng, &mut issued));
    run(3, "domination dichotomy", &mut results, || criterion_3(&mut rng, &mut issued));
    run(4, "hull equivalence", &mut results, || criterion_4(&mut rng, &mut issued));
    run(5, "exhaustion bound duality", &mut results, || criterion_5(&mut rng, &mut issued));
    run(6, "sublinear decomposition", &mut results, || criterion_6(&mut rng, &mut issued));
    run(7, "2x2 anchors", &mut results, || criterion_7(&mut issued));
    run(8, "summing constants", &mut results, || criterion_8(&mut rng, &mut issued));
    run(9, "grid oracle agreement", &mut results, || criterion_9(&duality));
    run(10, "certificate round trip", &mut results, || criterion_10(&mut rng, &issued));

    let elapsed = start.elapsed();
    let in_time = elapsed <= SUITE_TIME_LIMIT;
    println!(
        "suite time {elapsed:.2?} (limit {SUITE_TIME_LIMIT:?}) [{}]",
        if in_time { "PASS" } else { "FAIL" }
    );
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() || !in_time {
        std::process::exit(1);
    }
}
