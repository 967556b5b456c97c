//! Curl-preserving reconstruction and prolongation for edge-collocated vector
//! fields, with a constrained-transport scheme for a curl-preserving fluid
//! model.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gpr_model;
pub mod legendre;
pub mod mesh;
mod par;
pub mod prolong;
pub mod recon2d;
pub mod recon3d;
pub mod scheme;
pub mod weno;

pub use error::{Error, Result};
pub use par::{init_threads, parallel_enabled, set_parallel};
