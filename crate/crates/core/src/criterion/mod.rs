//! Scale sweeps of E_q, regularity verdicts and traces of the quantitative arguments.

pub mod scan;
pub mod sweep;
pub mod trace;
pub mod verdict;

pub use scan::{control_check, control_from_sweep, cube_points, scan_grid, verdicts, ControlReport, CriterionSpec, ScanPoint, ScanRow};
pub use sweep::{estimate_limits, ladder, ladder_depth, min_ladder_radius, scale_sweep, LadderSpec, ScaleLimits, ScaleSweep};
pub use trace::{iterate_y, theorem1_exponents, theorem1_trace, theorem2_trace, IterationTrace, Theorem1Branch, Theorem1Trace, Theorem2Trace};
pub use verdict::{
    ckn_verdict, epsilon_curve, epsilon_over_m, seregin_verdict, theorem1_verdict, theorem2_verdict, CriterionId,
    CriterionVerdict, Decision, DEFAULT_EPSILON, DEFAULT_M_CAP,
};
