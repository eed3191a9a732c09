//! Non-neural core of a real-time oriented object detection transformer:
//! oriented-box geometry, matching costs, Hungarian assignment with
//! instability measurement, angle distribution refinement, contrastive
//! denoising generators and rotated NMS with a benchmark harness.

pub mod adr;
pub mod cli;
pub mod config;
pub mod cost;
pub mod error;
pub mod fmt;
pub mod geometry;
pub mod matching;
pub mod nms;
pub mod ocd;
pub mod registry;
pub mod scene;

pub use config::RunConfig;
pub use cost::{CostMatrix, GroundTruth, Prediction};
pub use geometry::{OrientedBox, Point};
pub use matching::{hungarian_assign, Assignment};
pub use nms::{rotated_nms, Detection, NmsConfig};
