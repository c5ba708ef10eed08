//! Perceptual grouping of curvilinear structures in a 5D lifted space of
//! position, orientation, intensity and curvature.
//!
//! The pipeline lifts an image and its vessel mask to oriented, curved line
//! elements ([`liftspace`]), estimates a stochastic connectivity kernel by
//! Monte Carlo ([`kernel`]), turns it into pairwise affinities
//! ([`affinity`]) and groups the elements by self-tuning spectral clustering
//! ([`cluster`]). [`phantom`] generates synthetic stimuli with ground truth
//! and [`eval`] scores the result. [`cli`] wires the stages into the
//! `grouping5d` command.

// `!(x > 0.0)` is how parameter checks reject NaN along with bad signs;
// small fixed-size matrix loops read better indexed.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod affinity;
pub mod cli;
pub mod cluster;
pub mod error;
pub mod eval;
pub mod kernel;
pub mod liftspace;
pub mod phantom;

pub use error::{Error, Result};
