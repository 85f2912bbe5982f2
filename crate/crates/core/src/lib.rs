//! Classification with fixed equidistributed hyperspherical prototypes and a
//! label-to-prototype assignment that is re-solved during training.
//!
//! The pipeline has three stages:
//!
//! 1. [`hypersphere`] spreads `c` prototypes over `S^(d−1)` before any data is
//!    seen, by minimizing a Gaussian-potential uniformity objective.
//! 2. [`trainer`] fits a small [`model`] backbone so that each sample's unit
//!    feature regresses onto the prototype currently assigned to its label.
//! 3. Periodically [`assignment`] re-matches labels to prototypes by solving a
//!    linear assignment between momentum-averaged class features and the
//!    fixed prototypes.

pub mod assignment;
pub mod cli;
pub mod data;
pub mod error;
pub mod hypersphere;
pub mod linalg;
pub mod model;
mod textio;
pub mod trainer;

pub use assignment::{
    assignment_churn, build_cost_matrix, hungarian_solve, reassign, AssignmentMapping, ClassRepresentatives,
    CostMatrix,
};
pub use data::{apply_long_tail, generate_gaussian_mixture, LongTailSpec, MixtureConfig, VectorDataset};
pub use error::{Error, Result};
pub use hypersphere::{
    circle_prototypes, estimate_prototypes, gaussian_potential, geometry_report, uniformity_gradient,
    uniformity_loss, GeometryReport, PrototypeMatrix, UniformityConfig,
};
pub use model::{BackboneParams, FeatureBatch};
pub use trainer::{class_weights, evaluate, train, MetricsRecord, TrainConfig, TrainState};
