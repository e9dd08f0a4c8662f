//! Problem ingestion, job orchestration and report output.

pub mod job;
pub mod problem;
pub mod report;

pub use job::{run_job, JobError, JobOptions};
pub use problem::{load_problem, AlgorithmChoice, ModeKind, ProblemError, ProblemFile, ProblemSpec};
pub use report::{emit_report, load_report, ReportError, ReportFormat, SolveReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_AMBIGUOUS: i32 = 3;
