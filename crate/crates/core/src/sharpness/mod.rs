//! Lower-bound experiments, upper-bound sweeps and exponent fits.

pub mod cases;
pub mod fit;
pub mod record;
pub mod sweep;
pub mod testfn;

pub use cases::{
    aligned_grid, case1_expected, case2_expected, case3_expected, lattice_pairing, lattice_pairing_direct,
    pairing_driver, run_case1, run_case2, run_case3, SharpnessConfig, ALIGNED_DELTA_PRIME,
};
pub use fit::{fit_exponent, SlopeFit};
pub use record::{CaseOutcome, Expectation, ExperimentRecord, Verdict};
pub use sweep::{m1, necessity_threshold, sweep_expectation, upper_bound_sweep, SweepConfig, SweepFamily};
pub use testfn::{make_test_function, TestFunction};
