//! Packaged numerical scenarios with machine-checkable verdicts.

mod report;
mod scenarios;

pub use report::{write_atomic, Check, ObsValue, Observation, ScenarioReport, Verdict};
pub use scenarios::{
    check_base_operator_bounds, check_centred_l1_bound, check_cf_failure_growth,
    check_kernel_growth, check_modified_lower_bounds, check_overlap_inequality,
    check_spiked_modified_norms, check_triangle_base_bounds, check_uncentred_weak_type,
    explore_log_statistic, run_scenario, ScenarioConfig, SCENARIOS,
};
