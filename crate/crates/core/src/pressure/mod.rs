//! Pressure recovery and the local decomposition p = p01 + p02 + p_h.

pub mod decompose;
pub mod recover;

pub use decompose::{
    decompose_local, harmonic_interior_estimates, BallCells, DecompositionDiagnostics, HarmonicEstimates,
    PressureDecomposition, ScalarPatch,
};
pub use recover::{pressure_slice, recover_pressure};
