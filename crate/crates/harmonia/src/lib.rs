//! Scenario loading, the tick engine and trace output for harmonic-system
//! simulations. The calculus itself lives in `harmonia-core`.

pub mod engine;
pub mod observe;
pub mod report;
pub mod scenario;
pub mod trace;

pub use engine::{run, Overrides, Summary};
pub use scenario::{load, Loaded, Scenario, ScenarioError};

/// Environment variable naming the default trace directory.
pub const TRACE_DIR_ENV: &str = "HARMONIA_TRACE_DIR";
