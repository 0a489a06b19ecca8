//! Pinning-based distributed secondary control for islanded microgrids.
//!
//! * [`netgraph`]: communication graphs, path/degree metrics, layer
//!   decomposition around a pinning set.
//! * [`spectral`]: `phi = min Re eig(L + G Z)` and its layer-based bounds.
//! * [`pinsel`]: greedy and rate-driven pinning selection, exhaustive oracle.
//! * [`consensus`]: linear regulation-error simulation and rate metrics.
//! * [`plant`]: phasor-level droop microgrid with secondary control.
//! * [`cases`]: the shipped 4-DG and 5-DG reference systems.

pub mod cases;
pub mod consensus;
pub mod error;
pub mod netgraph;
pub mod ode;
pub mod pinsel;
pub mod plant;
pub mod spectral;

pub use consensus::{simulate_errors, ControllerGains, ErrorTrajectory};
pub use error::{Error, Result};
pub use netgraph::{CommNetwork, Hops, LayerDecomposition, PinningConfig};
pub use pinsel::{algorithm1, algorithm2, brute_force_opt, RateTarget, SelectionResult};
pub use plant::{run_scenario, Plant, PlantTopology, Scenario, TrajectoryRecord};
pub use spectral::{phi, BoundInterpretation};
