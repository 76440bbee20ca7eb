//! Mean-field random-cluster model: Chayes–Machta, heat-bath and
//! single-update dynamics, the drift analysis of the phase structure,
//! couplings, and exact transition matrices on tiny graphs.

pub mod coupling;
pub mod dsu;
pub mod dynamics;
pub mod exact;
pub mod experiments;
pub mod error;
pub mod params;
pub mod phase;
pub mod random_graph;
pub mod rng;
pub mod state;
pub mod stats;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use rng::RngStream;
pub use state::{ComponentState, EdgeConfig};
