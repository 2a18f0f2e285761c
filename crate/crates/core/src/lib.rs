//! Sequential consumption under Gaussian beliefs on a circular product space.
//!
//! Users consume one item per period, choosing the item with the highest
//! CARA certainty equivalent under their current belief, and learn from
//! each realized value through a distance-decaying covariance kernel. Three
//! information regimes are compared: no recommendation, recommendation
//! (the common-value vector is revealed) and an oracle that knows every
//! realized value.

pub mod belief_engine;
pub mod config;
pub mod error;
pub mod metrics;
pub mod policy;
pub mod product_model;
pub mod regime;
pub mod report;
pub mod seeding;
pub mod sim_engine;
pub mod verify;

pub use config::{GridPoint, SweepConfig};
pub use error::{Result, SimError};
pub use policy::Trajectory;
pub use product_model::ModelParams;
pub use regime::Regime;
pub use sim_engine::{run_sweep, simulate, RunDataset};
