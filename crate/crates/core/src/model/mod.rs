//! Domain types of the discretized line ensemble and the functionals shared
//! by every sampler: trapezoidal area, tilt log-weight and the Gaussian bridge mass.

mod boundary;
pub(crate) mod functional;
mod grid;
pub mod io;
mod state;
mod tilt;

pub use boundary::BoundarySpec;
pub use functional::{area_functional, gaussian_bridge_mass, tilt_log_weight};
pub use grid::GridInterval;
pub use state::{EnsembleState, Violation, ViolationKind};
pub use tilt::TiltParams;
