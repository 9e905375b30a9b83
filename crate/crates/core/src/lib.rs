//! Long-time jump-counting statistics of Markovian open quantum systems:
//! tilted Lindblad generators, scaled cumulant generating functions,
//! generalized Doob transforms, symmetry-induced fluctuation relations and
//! quantum-jump Monte Carlo.

pub mod doob;
pub mod grid;
pub mod linalg;
pub mod lindblad;
pub mod model_file;
pub mod models;
pub mod spectral;
pub mod symmetry;
pub mod trajectories;

/// Version tag written into every machine-readable output.
pub const SCHEMA_VERSION: u32 = 1;
