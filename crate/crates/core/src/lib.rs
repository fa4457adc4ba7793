//! Transfer-operator analysis of non-autonomous planar flows.
//!
//! The pipeline discretises a time-dependent vector field into a sequence of
//! Ulam matrices, takes truncated SVDs of rolling-window products, tracks the
//! resulting modes from window to window and offers diagnostics for the
//! tracked modes (equivariance mismatch, coherence decay, evolved frames).

pub mod cocycle;
pub mod diagnostics;
pub mod fields;
pub mod format;
pub mod integrate;
pub mod sparse;
pub mod tracking;
pub mod ulam;
