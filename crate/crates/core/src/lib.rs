//! Monte Carlo sampling of non-intersecting Brownian line ensembles above a
//! hard wall with geometrically growing area tilts, together with the
//! Ferrari–Spohn reference diffusion and the estimators used to test tail,
//! confinement, coupling and scaling statements against simulation.

pub mod bridge;
pub mod coupling;
pub mod error;
pub mod estimators;
pub mod fs;
pub mod gibbs;
pub mod model;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
pub use model::{BoundarySpec, EnsembleState, GridInterval, TiltParams};
pub use rng::RngStream;
