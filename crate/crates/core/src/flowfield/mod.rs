//! Discrete space-time flow data and test-flow generators.

pub mod flow;
pub mod generators;
pub mod grid;
pub mod io;
pub mod spectral;

pub use flow::{SampledFlow, TensorField};
pub use generators::{
    beltrami_velocity, make_beltrami_flow, make_random_divfree_flow, make_selfsimilar_fixture, make_shear_flow,
    rescale_flow,
};
pub use grid::GridSpec;
pub use io::{load_flow, read_flow, save_flow, write_flow};
pub use spectral::{gradient, gradient_with, max_divergence, velocity_gradient_slice, DerivativeScheme};
