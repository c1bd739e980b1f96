//! Discrete-event throughput simulator for a flexible manufacturing cell
//! served by mobile additive-manufacturing robots.
//!
//! The cell has three equally spaced sites (machining area, assembly
//! area, I/O station), two dedicated 3D printers, two AMRs, and a
//! single-server assembly robot. Two material-flow configurations are
//! compared: the benchmark keeps the printers stationary and uses the
//! AMRs as shuttles, while the mobile configuration mounts a printer on
//! each AMR so printing overlaps travel.
//!
//! # Modules
//!
//! - [`simkernel`] — event calendar, simulation clock, seeded RNG streams
//! - [`plant`] — domain model and event logic for both configurations
//! - [`scenario`] — builtin scenarios, factorial generation, config files
//! - [`analysis`] — analytic bottleneck oracles and replication statistics
//! - [`report`] — experiment fan-out plus CSV/JSON/console emission

pub mod analysis;
pub mod plant;
pub mod report;
pub mod scenario;
pub mod simkernel;

pub use plant::{run_replication, ApproachKind, ReplicationResult};
pub use scenario::{builtin_scenarios, load_config, ExperimentConfig, Scenario};
pub use simkernel::{SimTime, UniformDist};
