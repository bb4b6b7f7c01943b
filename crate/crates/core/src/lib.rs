//! Correlation-network analysis of asset return panels.
//!
//! The pipeline implemented here goes from prices to portfolios:
//!
//! 1. [`ingest`] loads wide or long price files and cleans them; [`synthetic`]
//!    generates block-correlated markets with known structure.
//! 2. [`returns`] turns prices into log returns and computes rolling Pearson
//!    correlation matrices.
//! 3. [`pmfg`] filters each matrix into a planar maximally filtered graph,
//!    using the left-right test in [`planarity`].
//! 4. [`community`] partitions each graph by minimizing the two-level map
//!    equation and summarizes the partitions over time.
//! 5. [`portfolio`] picks stocks across or within communities and evaluates
//!    them with mean-variance frontiers and expected shortfall.
//!
//! [`analysis`] chains steps 2 to 4 over every window of a panel.

pub mod analysis;
pub mod community;
pub mod error;
pub mod ingest;
pub mod planarity;
pub mod pmfg;
pub mod portfolio;
pub mod returns;
pub mod seed;
pub mod synthetic;

pub use error::{Error, Result};
