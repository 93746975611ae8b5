//! Benchmark graph generation for community detection with hierarchical,
//! heterogeneous mixing between communities, plus the modularity
//! diagnostics and detection baselines used to characterize the output.
//!
//! The pipeline samples a power-law degree sequence and community sizes,
//! groups communities into a nested hierarchy, assigns each community a
//! mixing fraction per level, places nodes, and finally wires internal and
//! level-specific external edges. With a single level it reduces to the
//! classic LFR and GLFR benchmarks.

pub mod analysis;
pub mod detection;
pub mod error;
pub mod graph;
pub mod io;
pub mod sampling;
pub mod wiring;

pub use analysis::{
    achieved_mu, gamma_sweep, modularity, omega_matrix, resolution_window, GammaSweep, OmegaMatrix,
    ResolutionWindow,
};
pub use detection::{label_propagation, maximize_modularity, nmi, DetectionResult, Method};
pub use error::{Error, Result};
pub use graph::{coarsen, inter_community_edge_counts, Graph, Hierarchy, Partition, SquareMatrix};
pub use sampling::{GeneratorParams, HierarchyParams, MixingSchedule, Mode};
pub use wiring::{generate, GeneratedNetwork, GenerationMetadata};
