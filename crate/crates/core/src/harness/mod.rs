//! Empirical checks of the local energy, pressure and interpolation inequalities.

pub mod energy;
pub mod exponents;
pub mod lemmas;
pub mod suite;

pub use energy::{check_energy_balance, Cutoff, CutoffParams};
pub use exponents::{alpha, alpha_exact, beta, beta_exact};
pub use lemmas::{CheckConfig, Checker, InequalityCheck, LemmaId, Term};
pub use suite::{
    aggregate, compare_baseline, fit_constants, pressure_constants, run_suite, ConstantFit, PressureFits, SuiteSpec,
    ThetaSets, VerificationReport,
};
