//! Clustering through continuous-time Markov dynamics on proximity graphs.
//!
//! A point cloud is turned into a weighted graph, the graph into the generator
//! of a continuous-time Markov chain, and the chain's time-`t` transition rows
//! into an embedding that k-means partitions. One parameter moves the
//! generator between two classic regimes:
//!
//! * density-driven mean shift (mass hill-climbs the estimated density), and
//! * geometry-driven diffusion / spectral clustering (mass spreads along the
//!   graph).
//!
//! The [`rates`] module builds the generators (`q_beta` interpolates the two
//! regimes; `q_rw_alpha` covers the reweighed random-walk family and its
//! hill-climbing limit), [`dynamics`] evolves distributions and computes
//! embeddings both by matrix exponential and spectrally, [`clustering`] runs
//! seeded k-means with energy profiles, and [`continuum`] provides a 1-D
//! finite-difference Fokker-Planck solver plus Witten-style spectral
//! diagnostics used to validate the graph dynamics against their scaling
//! limit. [`datasets`] holds the synthetic benchmark densities and a seeded
//! rejection sampler; [`experiment`] wires everything into reproducible,
//! artifact-emitting runs that the `graphfp` binary exposes as subcommands.

pub mod clustering;
pub mod continuum;
pub mod datasets;
pub mod dynamics;
mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub(crate) mod linalg;
pub mod rates;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
