//! Fixtures shared by the kernel benchmarks.

use cknscope::flowfield::{make_random_divfree_flow, GridSpec};
use cknscope::{Result, SampledFlow};

/// Random divergence-free field with recovered pressure on the periodic 2π box.
pub fn random_flow(n: usize, n_times: usize) -> Result<SampledFlow> {
    make_random_divfree_flow(GridSpec::periodic(n, n_times, 0.0, 1.0)?, 1, 2, 1.0)
}
