//! Synthetic fixed designs, response models, Monte-Carlo risk tables and
//! design diagnostics.

mod assumptions;
mod bounds;
mod design;
mod trials;

pub use assumptions::{check_assumptions, A3Check, AssumptionReport};
pub use bounds::{bound_terms_1d, skewed_1d_column, BoundTerms};
pub use design::{generate, respond, DesignKind, DesignSpec, ResponseModel};
pub use trials::{run_trials, RiskRow, RiskTable, TrialConfig};
