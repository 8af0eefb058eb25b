//! Mode-change protocols for global multiprocessor real-time systems.
//!
//! The crate simulates synchronous job sets on identical and uniform
//! platforms, computes closed-form bounds on their idle instants and
//! makespans, runs the SM-MSO and AM-MSO transition protocols, and checks
//! multi-mode applications for validity at design time.

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod model;
pub mod oracle;
pub mod protocols;
pub mod simkernel;
pub mod time;
pub mod validity;

pub use error::{BoundsError, ExperimentError, ModelError, OracleError, ProtocolError};
pub use model::{Application, Job, JobSet, Mode, Platform, PriorityAssignment, Scheduler, Task};
pub use time::TimeValue;
