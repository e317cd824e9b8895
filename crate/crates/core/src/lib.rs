//! Adaptive feedforward RBF-network control of a two-link planar manipulator.
//!
//! The crate simulates four controllers on the same plant and trajectory:
//! PID, model-based feedforward (MBFF), and an adaptive Gaussian RBF network
//! whose hidden nodes are either placed on a lattice or clustered along the
//! desired trajectory with K-means. It also measures how well a node
//! distribution is excited by a periodic trajectory (the Gramian of the
//! regressor and its extreme eigenvalues).
//!
//! Data-parallel loops (Gramian rows, K-means assignment, distance scans,
//! multi-controller runs) go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise. Results are
//! bitwise identical either way.

// `!(x > 0.0)` also rejects NaN, which is the point in validators.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clustering;
pub mod commands;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod excitation;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod par;
pub mod rbfnet;
pub mod scenario;
pub mod simulator;
pub mod trajectory;

pub use error::{Error, Result};
pub use matrix::Matrix;

/// Two-element joint-space vector (positions, velocities, torques).
pub type Vec2 = [f64; 2];
