//! Simulation and exact verification for Poisson suspensions over an
//! odometer tower.
//!
//! - [`odometer`]: the base system, its map `T` and an exact set algebra.
//! - [`point_process`]: Poisson sampling, superposition, thinning, `T_*`.
//! - [`fock`]: observables, difference operators, chaos projections, Mecke.
//! - [`oracle`]: brute-force enumeration on a finite ground set.
//! - [`riesz`]: Riesz-product coefficients, convolution powers, singularity
//!   evidence and exact autocorrelations.

pub mod config;
pub mod dyadic;
pub mod error;
pub mod fock;
pub mod growth;
pub mod odometer;
pub mod oracle;
pub mod point_process;
pub mod riesz;
pub mod rng;
pub mod stats;
pub mod suite;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use growth::{GrowthConfig, GrowthSpec};
pub use odometer::{Column, LazyWord, Rectangle, RegionSet, TowerPoint};
pub use point_process::{CountingMeasure, MarkedCountingMeasure};

