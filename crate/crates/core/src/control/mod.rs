//! Exact boundary control synthesis and reconstruction of initial data from
//! boundary observations.

pub mod blend;
pub mod observe;
pub mod synthesis;

pub use observe::{
    complete_traces, observability_ratio, reconstruct_from_traces, reconstruct_initial, ObservationSet,
    Reconstruction,
};
pub use synthesis::{
    boundary_identity_residual, extract_controls, middle_trace, min_control_time, simulate_with_controls,
    synthesize_controls, synthesize_from_middle, verify_control, ControlOptions, ControlResult, MiddleTrace,
    Verification,
};
