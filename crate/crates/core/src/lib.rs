//! Information overload in organizational knowledge networks: does being a
//! popular source of advice lower the quality of the help one gives?
//!
//! The crate builds the directed citation network of who asks whom for
//! help, measures each employee's Load (frequency-weighted in-degree),
//! instruments it with a homophily centrality computed on a demographic
//! similarity network, and estimates ordered and binary response models of
//! help efficiency with two-stage corrections for endogeneity.

// Negated comparisons reject NaN on purpose; published constants keep their digits.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod estimation;
pub mod homophily;
pub mod ingest;
pub mod iv;
pub mod network;
pub mod pipeline;
pub mod prepare;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/load.md")]
    mod load {}
    #[doc = include_str!("../../../book/src/instrument.md")]
    mod instrument {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/endogeneity.md")]
    mod endogeneity {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
