//! Exact rational decision procedures for finite minimax, domination,
//! integral representation, exhaustion and summing-constant problems.
//! Every answer comes with a certificate that [`certificate::verify`]
//! re-checks by substitution.

pub mod certificate;
pub mod domination;
pub mod error;
pub mod exhaustion;
pub mod io;
pub mod lp;
pub mod minimax;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod representation;
pub mod summability;

pub use certificate::{verify, Certificate, Envelope, Verdict};
pub use domination::{BalanceViolation, DominationInstance, DominationOutcome, PolyNorm};
pub use error::{Error, Result};
pub use io::{CoreInstance, FanInstance, Instance, PietschInstance, StrassenInstance};
pub use model::{DiscreteMeasure, FamilyMatrix};
pub use rational::Rational;
pub use representation::{PolyhedralSublinear, SufficiencyInstance};
