//! The `--oracle` section: checks that do not trust the LP answer.

use serde::Serialize;

use mmcert_core::oracle::{
    enumerate_balance, expand_to_point_masses, float_check, grid_minimax, pietsch_estimate_float, point_pair_margin,
    FloatNorm,
};
use mmcert_core::{Certificate, DominationInstance, Error, Instance, PolyNorm, Rational};

use crate::Outcome;

const TOLERANCE: f64 = 1e-9;
/// Grid resolution and the largest family the grid is run on.
const GRID_RESOLUTION: u32 = 24;
const GRID_MAX_ROWS: usize = 6;
const BALANCE_SUPPORT: usize = 2;
const BALANCE_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    /// The certificate re-checked in `f64`.
    pub float_check: bool,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub balance: Option<BalanceCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub float_constant: Option<f64>,
    pub agrees: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridCheck {
    pub resolution: u32,
    pub value: Rational,
    /// `range · |F| / N`.
    pub bound: Rational,
    pub within: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceCheck {
    pub max_support: usize,
    pub searched: u64,
    pub worst_margin: Rational,
    /// Margin of the certificate's violation expanded to point pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_margin: Option<Rational>,
}

pub fn report(cert: &Certificate, instance: &Instance, transposed: bool) -> Outcome<OracleReport> {
    let mut r = OracleReport {
        float_check: float_check(cert, instance, transposed, TOLERANCE),
        tolerance: TOLERANCE,
        grid: None,
        balance: None,
        float_constant: None,
        agrees: true,
        notes: Vec::new(),
    };
    if !r.float_check {
        r.notes.push("floating-point re-check failed".into());
    }
    match (cert, instance) {
        (Certificate::MinimaxReport(m), Instance::Core(core)) => {
            let a = core.oriented_family(transposed)?;
            if a.n_rows() <= GRID_MAX_ROWS {
                let value = grid_minimax(&a, GRID_RESOLUTION)?;
                let entries = a.rows().iter().flatten();
                let range = entries.clone().max().zip(entries.min()).map(|(hi, lo)| hi - lo).unwrap_or_default();
                let bound = range * Rational::from(a.n_rows() as i64) / Rational::from(GRID_RESOLUTION as i64);
                let within = (&value - &m.hull_value).abs() <= bound;
                if !within {
                    r.notes.push(format!("grid value {value} is outside the bound"));
                }
                r.grid = Some(GridCheck {
                    resolution: GRID_RESOLUTION,
                    value,
                    bound,
                    within,
                });
            } else {
                r.notes.push(format!("grid skipped: more than {GRID_MAX_ROWS} functions"));
            }
        }
        (Certificate::DominatingMeasure(_) | Certificate::BalanceViolation(_), Instance::Core(core)) => {
            let targets = core.targets()?.ok_or_else(|| Error::Invalid("no targets".into()))?;
            let inst = DominationInstance::new(core.family()?, targets)?;
            let certificate_margin = match cert {
                Certificate::BalanceViolation(v) => Some(point_pair_margin(&inst, &expand_to_point_masses(v))?),
                _ => None,
            };
            if certificate_margin.as_ref().is_some_and(|m| !m.is_positive()) {
                r.notes.push("expanded violation has no positive margin".into());
            }
            match enumerate_balance(&inst, BALANCE_SUPPORT, BALANCE_CAP) {
                Ok(search) => {
                    if search.violation_found() && !cert.is_violation() {
                        r.notes.push("enumeration found a violation of a dominated instance".into());
                    }
                    r.balance = Some(BalanceCheck {
                        max_support: BALANCE_SUPPORT,
                        searched: search.searched,
                        worst_margin: search.worst_margin,
                        certificate_margin,
                    });
                }
                Err(Error::TooLarge(msg)) => r.notes.push(format!("enumeration skipped: {msg}")),
                Err(e) => return Err(e.into()),
            }
        }
        (Certificate::PietschEstimate(c), Instance::Pietsch(inst)) => {
            let to_f = |rows: &[Vec<Rational>]| -> Vec<Vec<f64>> {
                rows.iter().map(|v| v.iter().map(Rational::to_f64).collect()).collect()
            };
            let norm = match c.norm {
                PolyNorm::L1 => FloatNorm::L1,
                PolyNorm::Linf => FloatNorm::Linf,
            };
            let est = pietsch_estimate_float(&to_f(&inst.matrix), c.p as f64, &to_f(&inst.net), &to_f(&inst.sample), norm)?;
            let exact = c.witness.constant.as_ref().map(Rational::to_f64);
            let close = match (est, exact) {
                (Some(x), Some(y)) => (x - y).abs() <= 1e-6 * y.abs().max(1.0),
                (None, None) => true,
                _ => false,
            };
            if !close {
                r.notes.push(format!("floating-point constant {est:?} differs from {exact:?}"));
            }
            r.float_constant = est;
        }
        _ => {}
    }
    r.agrees = r.notes.iter().all(|n| n.contains("skipped"));
    Ok(r)
}
