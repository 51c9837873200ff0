//! Exact and statistical toolkit for random assignment problems whose
//! entries are forced zeros or i.i.d. Exp(1) variables.
//!
//! * [`model`]: zero patterns, instances and the JSON instance format.
//! * [`solver`]: exact minimum-cost k-assignment plus enumeration helpers.
//! * [`cover`]: König covers and the cover-coefficient tables.
//! * [`formulas`]: closed forms evaluated in exact rational arithmetic.
//! * [`oracle`]: independent symbolic evaluator of expected optimal cost.
//! * [`montecarlo`]: seeded simulation estimates.

pub mod cover;
pub mod error;
pub mod exec;
pub mod formulas;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod rational;
pub mod solver;

pub use error::{RapError, Result};
pub use exec::Execution;
pub use model::{
    parse_instance, serialize_instance, Assignment, Position, RapInstance, ZeroPattern,
};
pub use rational::RationalValue;
