//! Brute-force cross-checks that do not use the LP engine, and floating-point
//! fallbacks for cases outside the exact polyhedral setting.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::certificate::{check, Certificate};
use crate::domination::{BalanceViolation, DominationInstance};
use crate::error::{Error, Result};
use crate::io::Instance;
use crate::model::{default_labels, FamilyMatrix};
use crate::rational::{max_of, Rational};
use crate::summability::summing_constant;

const LANES: usize = 8;

/// `min` over mixtures with weights in `{0, 1/N, …, 1}` of `max_x` of the
/// mixture. Every grid point is visited.
pub fn grid_minimax(a: &FamilyMatrix, resolution: u32) -> Result<Rational> {
    if resolution == 0 {
        return Err(Error::Invalid("grid resolution must be positive".into()));
    }
    let den = Rational::common_denominator(a.rows().iter().flatten());
    let n = resolution as i64;
    let mut rows = Vec::with_capacity(a.n_rows());
    let mut largest = 0i64;
    for row in a.rows() {
        let mut ints = Vec::with_capacity(a.n_cols());
        for v in row {
            let scaled = v.numer() * (&den / v.denom());
            let i = scaled
                .to_i64()
                .filter(|i| i.checked_abs().and_then(|m| m.checked_mul(n)).is_some_and(|b| b < 1 << 60))
                .ok_or_else(|| Error::TooLarge("grid entries exceed the integer range".into()))?;
            largest = largest.max(i.abs());
            ints.push(i);
        }
        rows.push(ints);
    }
    // Grid values stay within N·max|a| and row differences within 2·max|a|.
    let best = if n < 1 << 28 && largest * n * 2 < i64::from(i32::MAX) {
        let rows: Vec<Vec<i32>> = rows.iter().map(|r| r.iter().map(|&v| v as i32).collect()).collect();
        i64::from(search_i32(&rows, n as i32))
    } else {
        walk(&rows, n, PortableLine::new)
    };
    Ok(Rational::new(best, BigInt::from(n) * den))
}

trait Lane:
    Copy + Ord + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> + std::ops::Mul<Output = Self> + std::ops::AddAssign
{
    const MAX: Self;
    const ZERO: Self;
    const ONE: Self;
}

impl Lane for i32 {
    const MAX: Self = i32::MAX;
    const ZERO: Self = 0;
    const ONE: Self = 1;
}

impl Lane for i64 {
    const MAX: Self = i64::MAX;
    const ZERO: Self = 0;
    const ONE: Self = 1;
}

/// Running `min_k max_x (start[x] + k·step[x])` over lines with a fixed step.
trait Line<T: Lane> {
    fn scan(&mut self, start: &[T], rem: T);
    fn best(&self) -> T;

    /// Lines starting at `start + j·shift` with `rem − j` left, for every `j`.
    #[inline(always)]
    fn scan_triangle(&mut self, start: &mut [T], shift: &[T], rem: T) {
        let mut j = T::ZERO;
        loop {
            self.scan(start, rem - j);
            if j == rem {
                break;
            }
            for (s, &d) in start.iter_mut().zip(shift) {
                *s += d;
            }
            j += T::ONE;
        }
    }
}

struct PortableLine<T> {
    step: Vec<T>,
    cur: Vec<T>,
    best: T,
}

impl<T: Lane> PortableLine<T> {
    fn new(step: &[T]) -> Self {
        PortableLine {
            step: step.to_vec(),
            cur: vec![T::ZERO; step.len()],
            best: T::MAX,
        }
    }
}

impl<T: Lane> Line<T> for PortableLine<T> {
    #[inline(always)]
    fn scan(&mut self, start: &[T], rem: T) {
        self.cur.copy_from_slice(start);
        let mut k = T::ZERO;
        loop {
            let top = self.cur.iter().copied().max().unwrap();
            self.best = self.best.min(top);
            if k == rem {
                break;
            }
            for (c, &s) in self.cur.iter_mut().zip(&self.step) {
                *c += s;
            }
            k += T::ONE;
        }
    }

    fn best(&self) -> T {
        self.best
    }
}

fn search_i32(rows: &[Vec<i32>], n: i32) -> i32 {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") {
        // SAFETY: the CPU supports AVX2.
        return unsafe { search_i32_avx2(rows, n) };
    }
    walk(rows, n, PortableLine::new)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn search_i32_avx2(rows: &[Vec<i32>], n: i32) -> i32 {
    walk(rows, n, Avx2Line::new)
}

/// Eight consecutive `k` per AVX2 register; `ramps[x]` holds `l·step[x]`.
#[cfg(target_arch = "x86_64")]
struct Avx2Line {
    step: Vec<i32>,
    ramps: Vec<[i32; LANES]>,
    lows: [i32; LANES],
}

#[cfg(target_arch = "x86_64")]
impl Avx2Line {
    fn new(step: &[i32]) -> Self {
        Avx2Line {
            step: step.to_vec(),
            ramps: step.iter().map(|&d| std::array::from_fn(|l| l as i32 * d)).collect(),
            lows: [i32::MAX; LANES],
        }
    }

    #[target_feature(enable = "avx2")]
    unsafe fn line_avx2(&self, start: &[i32], rem: i32, lows: std::arch::x86_64::__m256i) -> std::arch::x86_64::__m256i {
        use std::arch::x86_64::*;
        let iota = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
        let last = _mm256_set1_epi32(rem);
        let never = _mm256_set1_epi32(i32::MAX);
        let mut lows = lows;
        let mut k0 = 0;
        loop {
            let mut highs = _mm256_set1_epi32(i32::MIN);
            if k0 == 0 {
                for (&s, ramp) in start.iter().zip(&self.ramps) {
                    let v = _mm256_add_epi32(_mm256_set1_epi32(s), _mm256_loadu_si256(ramp.as_ptr().cast()));
                    highs = _mm256_max_epi32(highs, v);
                }
            } else {
                for ((&s, &d), ramp) in start.iter().zip(&self.step).zip(&self.ramps) {
                    let at_k0 = _mm256_set1_epi32(s + k0 * d);
                    highs = _mm256_max_epi32(highs, _mm256_add_epi32(at_k0, _mm256_loadu_si256(ramp.as_ptr().cast())));
                }
            }
            // Lanes past `rem` are not grid points; their sums may wrap.
            let past = _mm256_cmpgt_epi32(_mm256_add_epi32(_mm256_set1_epi32(k0), iota), last);
            lows = _mm256_min_epi32(lows, _mm256_blendv_epi8(highs, never, past));
            k0 += LANES as i32;
            if k0 > rem {
                return lows;
            }
        }
    }

    #[target_feature(enable = "avx2")]
    unsafe fn scan_avx2(&mut self, start: &[i32], rem: i32) {
        use std::arch::x86_64::*;
        let lows = self.line_avx2(start, rem, _mm256_loadu_si256(self.lows.as_ptr().cast()));
        _mm256_storeu_si256(self.lows.as_mut_ptr().cast(), lows);
    }
}

#[cfg(target_arch = "x86_64")]
impl Line<i32> for Avx2Line {
    #[inline(always)]
    fn scan(&mut self, start: &[i32], rem: i32) {
        // SAFETY: only constructed on the AVX2 path.
        unsafe { self.scan_avx2(start, rem) }
    }

    fn best(&self) -> i32 {
        self.lows.into_iter().min().unwrap()
    }
}

/// Odometer over the weights of all rows but the last three, which are
/// swept as lines `base + rem·c + j·(a − c) + k·(b − c)`. `partial[d]` holds
/// `Σ_{i<d} k_i·row_i`.
#[inline(always)]
fn walk<T: Lane, L: Line<T>>(rows: &[Vec<T>], n: T, line: impl Fn(&[T]) -> L) -> T {
    let width = rows[0].len();
    let diff = |x: &[T], y: &[T]| -> Vec<T> { x.iter().zip(y).map(|(&u, &v)| u - v).collect() };
    match rows.len() {
        1 => return rows[0].iter().map(|&v| v * n).max().unwrap(),
        2 => {
            let start: Vec<T> = rows[1].iter().map(|&v| v * n).collect();
            let mut l = line(&diff(&rows[0], &rows[1]));
            l.scan(&start, n);
            return l.best();
        }
        _ => {}
    }
    let prefix = rows.len() - 3;
    let (a, b, c) = (&rows[prefix], &rows[prefix + 1], &rows[prefix + 2]);
    let a_minus_c = diff(a, c);
    let mut l = line(&diff(b, c));
    let mut start = vec![T::ZERO; width];
    let mut partial = vec![vec![T::ZERO; width]; prefix + 1];
    let mut ks = vec![T::ZERO; prefix];
    let mut used = T::ZERO;
    loop {
        let rem = n - used;
        for ((s, &p), &z) in start.iter_mut().zip(&partial[prefix]).zip(c) {
            *s = p + rem * z;
        }
        l.scan_triangle(&mut start, &a_minus_c, rem);
        // Advance the deepest weight that can grow, zeroing those below it.
        let mut d = prefix;
        loop {
            if d == 0 {
                return l.best();
            }
            d -= 1;
            if used < n {
                ks[d] += T::ONE;
                used += T::ONE;
                let (head, tail) = partial.split_at_mut(d + 1);
                for (p, (&q, &r)) in tail[0].iter_mut().zip(head[d].iter().zip(&rows[d])) {
                    *p = q + ks[d] * r;
                }
                for e in 1..tail.len() {
                    let (done, rest) = tail.split_at_mut(e);
                    rest[0].copy_from_slice(&done[e - 1]);
                }
                break;
            }
            used = used - ks[d];
            ks[d] = T::ZERO;
        }
    }
}

/// Worst case of the balance inequality over multisets of (target, point mass)
/// pairs of size at most `max_support`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceSearch {
    /// Largest `Σ g_i(x_i) − max_f Σ f(x_i)` found; 0 when nothing was searched.
    pub worst_margin: Rational,
    /// The multiset attaining it, as (target, point) labels.
    pub witness: Vec<(String, String)>,
    pub searched: u64,
}

impl BalanceSearch {
    pub fn violation_found(&self) -> bool {
        self.worst_margin.is_positive()
    }
}

fn multiset_count(pairs: u64, max_support: usize) -> Option<u64> {
    let mut total: u64 = 0;
    // C(P + s − 1, s) built incrementally.
    let mut c: u64 = 1;
    for s in 1..=max_support as u64 {
        c = c.checked_mul(pairs + s - 1)? / s;
        total = total.checked_add(c)?;
    }
    Some(total)
}

pub fn enumerate_balance(inst: &DominationInstance, max_support: usize, cap: u64) -> Result<BalanceSearch> {
    let g = &inst.targets;
    let f = &inst.family;
    let pairs: Vec<(usize, usize)> = (0..g.n_rows()).flat_map(|i| (0..f.n_cols()).map(move |x| (i, x))).collect();
    let mut search = BalanceSearch {
        worst_margin: Rational::zero(),
        witness: Vec::new(),
        searched: 0,
    };
    if pairs.is_empty() || max_support == 0 {
        return Ok(search);
    }
    match multiset_count(pairs.len() as u64, max_support) {
        Some(c) if c <= cap => {}
        _ => return Err(Error::TooLarge(format!("more than {cap} multisets to enumerate"))),
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut first = true;
    enumerate_from(inst, &pairs, 0, max_support, &mut chosen, &mut search, &mut first);
    Ok(search)
}

fn enumerate_from(
    inst: &DominationInstance,
    pairs: &[(usize, usize)],
    start: usize,
    budget: usize,
    chosen: &mut Vec<usize>,
    search: &mut BalanceSearch,
    first: &mut bool,
) {
    for p in start..pairs.len() {
        chosen.push(p);
        let picked: Vec<(usize, usize)> = chosen.iter().map(|&i| pairs[i]).collect();
        let margin = naive_margin(inst, &picked);
        search.searched += 1;
        if *first || margin > search.worst_margin {
            *first = false;
            search.worst_margin = margin;
            search.witness = picked
                .iter()
                .map(|&(i, x)| (inst.targets.row_labels()[i].clone(), inst.family.col_labels()[x].clone()))
                .collect();
        }
        if budget > 1 {
            enumerate_from(inst, pairs, p, budget - 1, chosen, search, first);
        }
        chosen.pop();
    }
}

fn naive_margin(inst: &DominationInstance, picked: &[(usize, usize)]) -> Rational {
    let lhs: Rational = picked.iter().map(|&(i, x)| inst.targets.value(i, x).clone()).sum();
    let rhs = max_of(
        inst.family
            .rows()
            .iter()
            .map(|row| picked.iter().map(|&(_, x)| row[x].clone()).sum::<Rational>()),
    )
    .unwrap();
    lhs - rhs
}

/// `Σ c·g(x) − max_f Σ c·f(x)` for integer-counted (target, point) pairs.
pub fn point_pair_margin(inst: &DominationInstance, pairs: &[(String, String, Rational)]) -> Result<Rational> {
    let mut lhs = Rational::zero();
    let mut per_row = vec![Rational::zero(); inst.family.n_rows()];
    for (g, x, count) in pairs {
        let gi = inst.targets.row_index(g)?;
        let xi = inst.family.col_index(x)?;
        lhs += count * inst.targets.value(gi, xi);
        for (acc, row) in per_row.iter_mut().zip(inst.family.rows()) {
            *acc += count * &row[xi];
        }
    }
    Ok(lhs - max_of(per_row).unwrap())
}

/// Rewrite a balance violation as integer counts of (target, point mass)
/// pairs, scaling all counts by one common positive integer.
pub fn expand_to_point_masses(v: &BalanceViolation) -> Vec<(String, String, Rational)> {
    let raw: Vec<(String, String, Rational)> = v
        .pairs
        .iter()
        .flat_map(|p| {
            p.delta
                .support
                .iter()
                .zip(&p.delta.weights)
                .map(|(x, w)| (p.target.clone(), x.clone(), w * &p.multiplicity))
        })
        .collect();
    let den = Rational::common_denominator(raw.iter().map(|t| &t.2));
    let scale = Rational::from(den);
    raw.into_iter().map(|(g, x, c)| (g, x, c * &scale)).collect()
}

/// Norms available in floating point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FloatNorm {
    L1,
    L2,
    Linf,
}

impl FloatNorm {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            FloatNorm::L1 => v.iter().map(|x| x.abs()).sum(),
            FloatNorm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            FloatNorm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

fn rationalise(x: f64) -> Result<Rational> {
    Rational::from_f64(x).ok_or_else(|| Error::Invalid(format!("non-finite value {x}")))
}

/// Net-relaxed summing constant for real `p ≥ 1` and any of the float norms.
/// Powers and norms are evaluated in `f64`, then read exactly as rationals
/// and handed to the exact LP.
pub fn pietsch_estimate_float(
    operator: &[Vec<f64>],
    p: f64,
    net: &[Vec<f64>],
    sample: &[Vec<f64>],
    norm: FloatNorm,
) -> Result<Option<f64>> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Invalid("p must be at least 1".into()));
    }
    if operator.is_empty() || net.is_empty() || sample.is_empty() {
        return Err(Error::Invalid("operator, net and sample must be non-empty".into()));
    }
    let d = operator[0].len();
    if operator.iter().chain(net).chain(sample).any(|v| v.len() != d) {
        return Err(Error::Dimension("all vectors must share the operator's input dimension".into()));
    }
    let dotf = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let rows = net
        .iter()
        .map(|xs| sample.iter().map(|x| rationalise(dotf(xs, x).abs().powf(p))).collect())
        .collect::<Result<Vec<Vec<Rational>>>>()?;
    let target = sample
        .iter()
        .map(|x| {
            let tx: Vec<f64> = operator.iter().map(|row| dotf(row, x)).collect();
            rationalise(norm.norm(&tx).powf(p))
        })
        .collect::<Result<Vec<Rational>>>()?;
    let family = FamilyMatrix::new(default_labels("n", net.len()), default_labels("s", sample.len()), rows)?;
    Ok(summing_constant(&family, &target)?.constant.map(|c| c.to_f64()))
}

/// Least-ℓ2-norm `φ` with `⟨φ, x_i⟩ ≥ g_i` by Hildreth's coordinate ascent on
/// the dual. `None` if the iteration has not settled within `max_sweeps`,
/// which is what happens when the constraints are inconsistent.
pub fn least_norm_functional(points: &[Vec<f64>], values: &[f64], max_sweeps: usize, tol: f64) -> Option<Vec<f64>> {
    let d = points.first()?.len();
    let mut lambda = vec![0.0; points.len()];
    let mut phi = vec![0.0; d];
    let sq: Vec<f64> = points.iter().map(|x| x.iter().map(|v| v * v).sum()).collect();
    for _ in 0..max_sweeps {
        let mut moved = 0.0f64;
        for (i, x) in points.iter().enumerate() {
            if sq[i] == 0.0 {
                if values[i] > tol {
                    return None;
                }
                continue;
            }
            let slack = values[i] - x.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>();
            let next = (lambda[i] + slack / sq[i]).max(0.0);
            let delta = next - lambda[i];
            if delta != 0.0 {
                for (p, v) in phi.iter_mut().zip(x) {
                    *p += delta * v;
                }
                lambda[i] = next;
                moved = moved.max(delta.abs() * sq[i].sqrt());
            }
        }
        if moved < tol {
            let feasible = points
                .iter()
                .zip(values)
                .all(|(x, g)| x.iter().zip(&phi).map(|(a, b)| a * b).sum::<f64>() >= g - 1e3 * tol);
            return feasible.then_some(phi);
        }
    }
    None
}

/// Fan's condition for the Euclidean norm, in floating point: some `φ` with
/// `‖φ‖₂ ≤ ρ` dominates the values.
pub fn fan_l2_feasible(points: &[Vec<f64>], values: &[f64], rho: f64, tol: f64) -> bool {
    least_norm_functional(points, values, 100_000, tol)
        .is_some_and(|phi| FloatNorm::L2.norm(&phi) <= rho + tol.sqrt())
}

/// Re-verify a certificate by substitution in `f64` with absolute tolerance
/// `tolerance`. `transposed` selects the orientation of a function family.
pub fn float_check(cert: &Certificate, instance: &Instance, transposed: bool, tolerance: f64) -> bool {
    check::<f64>(cert, instance, transposed, tolerance).is_ok()
}
