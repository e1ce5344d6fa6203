//! Fuzzy C-means image segmentation that estimates the noise residual
//! jointly with the clustering, for images corrupted by a mixture of
//! Poisson, Gaussian and impulse noise.
//!
//! The main entry point is [`wrfcm::wrfcm_fit`]; [`fcm::fcm_fit`] is the
//! classical baseline. [`noise`] synthesizes corrupted observations,
//! [`metrics`] scores label maps against ground truth.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod config;
pub mod error;
pub mod experiment;
pub mod fcm;
pub mod fidelity;
pub mod image;
pub mod io;
pub mod metrics;
pub mod model;
pub mod neighborhood;
pub mod noise;
pub mod synthetic;
pub mod wrfcm;

pub use config::{FileConfig, SolverConfig};
pub use error::{Error, Result};
pub use fcm::{fcm_fit, FcmOutput};
pub use image::{betas_from_phi, channel_stddev, ImageTensor};
pub use metrics::{LabelMap, MetricsReport};
pub use model::{ConvergenceTrace, PartitionMatrix, PrototypeSet, ResidualField, WeightField};
pub use neighborhood::NeighborhoodSystem;
pub use noise::{corrupt, ImpulseKind, NoiseSpec};
pub use wrfcm::{wrfcm_fit, Problem, SolveOutput, WrfcmSolver};
