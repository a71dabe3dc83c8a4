//! Networked visual motion observer.
//!
//! A network of static pinhole cameras, each watching its own (possibly moving)
//! rigid target, cooperatively estimates the *average* pose of all targets.
//! Every camera runs a passivity-based visual motion observer driven by the
//! image-space error, and neighbours pull each other's estimates together
//! through a pose-synchronization term.
//!
//! Module map:
//!
//! - [`liegroup`]: SO(3)/SE(3) algebra, energies, orthogonal projection, Euclidean mean.
//! - [`camera`]: perspective projection, image Jacobian, error reconstruction.
//! - [`graph`]: communication digraph, balance/connectivity checks, the constant `W`.
//! - [`observer`]: single-camera and networked observer update laws.
//! - [`bounds`]: energies, averaging/tracking performance bounds, average-motion diagnostics.
//! - [`sim`]: scenarios, world propagation, the simulation loop and metrics.
//! - [`scenario`]: the JSON scenario file format.
//! - [`report`]: CSV, summary and SVG output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod camera;
pub mod error;
pub mod graph;
pub mod liegroup;
pub mod observer;
pub mod report;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use liegroup::{ErrorVector, Pose, Rotation, Twist};
