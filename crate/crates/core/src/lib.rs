//! Self-supervised place recognition on simulated 2D LiDAR.
//!
//! The pipeline generates scan streams from procedural worlds
//! ([`simworld`]), trains a small permutation-invariant embedding network
//! with a weakly supervised ranking loss ([`encoder`]), grows pseudo-label
//! neighborhoods by feature-space expansion plus geometric contraction
//! ([`mining`] with primitives from [`pointops`]), and scores retrieval with
//! Recall@N and Heading Diversity against held-out poses ([`metrics`]).
//!
//! Training entry points accept scans only; ground-truth poses are read
//! exclusively by evaluation and the supervised oracle mode. All randomness
//! flows through seeded, tagged streams ([`rng`]), and every parallel stage
//! writes results by frame index, so outputs are bit-reproducible on one
//! machine for any worker count.

pub mod encoder;
pub mod error;
pub mod hashutil;
pub mod math;
pub mod metrics;
pub mod mining;
pub mod pointops;
pub mod rng;
pub mod simworld;

pub use encoder::{Embedding, EncoderConfig, EncoderParams, TrainingTuple};
pub use error::{Error, Result};
pub use metrics::{GroundTruth, MetricsReport};
pub use mining::{Mode, MiningConfig, NeighborState};
pub use pointops::{IcpResult, RigidTransform2D, VerificationScore};
pub use simworld::{Dataset, DatasetManifest, OccupancyGrid, Pose, Scan};
