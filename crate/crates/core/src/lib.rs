//! Discrete pruning and regrafting of Levy trees.
//!
//! Galton-Watson trees conditioned on their size stand in for Levy trees.
//! They are marked by Poisson clocks, cut into the classes of constant
//! record value, and the classes are regrafted on a branch whose length is
//! the mass-average record time. The companion modules provide the analytic
//! identities of the branching mechanism and the statistical tests used to
//! compare the regrafted picture with the spine decomposition at a uniform
//! leaf.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gwgen;
pub mod mechanism;
pub mod record;
pub mod regraft;
pub mod rng;
pub mod stats;
pub mod tree;

pub use error::{Error, Result};
