//! Random instances, sweeps and CSV output.

pub mod csv;
pub mod generate;
pub mod sweep;
pub mod worst_case;

pub use generate::{cell_seed, generate_linear_instance, generate_log_instance};
pub use sweep::{
    evaluate_instance, run_sweep, InstanceTag, RecordData, SweepConfig, SweepOutput, SweepRecord,
    SweepSummary, ThetaEnvelope, UtilityFamily, SWEEP_CSV_HEADER, VIOLATION_TOLERANCE,
};
pub use worst_case::{worst_case_instance, WorstCaseKind};
