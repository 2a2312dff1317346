//! Gridless sequential Bayesian direction-of-arrival estimation.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the von Mises
//! numerics ([`circular`]), the array/state model ([`model`]), the single
//! snapshot variational update engine ([`valse`]), the Bernoulli-von Mises
//! sequential layer ([`tracker`]) and the GOSPA/RMSE scoring ([`metrics`]).
//! Simulation, file formats and the command line live in the `svalse` crate.

#![no_std]

extern crate alloc;

pub mod circular;
mod error;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod tracker;
pub mod valse;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use circular::{VmMixture, VonMises, WrappedFactor};
pub use model::{ArrayGeometry, ComponentBelief, EstimatorConfig, PosteriorState, Snapshot};
pub use tracker::{TrackRecord, TransitionModel};
