//! Simulation and maximum likelihood estimation for Gibbs point processes
//! with hardcore and soft pair interactions or area interaction.

pub mod estimator;
pub mod geometry;
pub mod models;
pub mod partition;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use estimator::{EstimatorError, FitResult, OptimizerConfig};
pub use geometry::{CellPartition, Point, PointConfig, Window};
pub use models::{GibbsModel, ModelError, ModelKind};
pub use partition::{LogZEstimate, PartitionError};
pub use sampler::{Boundary, SampleSet, SamplerConfig, SamplerError};
