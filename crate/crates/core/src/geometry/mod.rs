//! Parabolic cylinders, ball quadrature and time weights.

pub mod cylinder;
pub mod quadrature;
pub mod time;

pub use cylinder::{slices_in, ParabolicCylinder, Resolution};
pub use quadrature::{ball_integral, ball_mean, ball_quadrature, BallQuadrature, QuadratureCache, STENCIL_MIN_CELLS};
pub use time::{time_sup, TimeWindow};
