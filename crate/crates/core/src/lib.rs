//! Scaled local functionals of sampled Navier–Stokes flows on parabolic cylinders, empirical
//! checks of the associated energy, pressure and interpolation inequalities, and regularity
//! screening by the ε-criteria on the scaled gradient functional.

pub mod criterion;
pub mod error;
pub mod flowfield;
pub mod functionals;
pub mod geometry;
pub mod harness;
pub mod numerics;
pub mod pressure;
pub mod report;

pub use error::{Error, Result};
pub use flowfield::{GridSpec, SampledFlow, TensorField};
pub use functionals::{FunctionalParams, FunctionalReport, Functionals};
pub use geometry::{ParabolicCylinder, Resolution};
pub use harness::{ConstantFit, InequalityCheck, LemmaId};
