//! Exact cubical persistent homology for random cubical filtrations, with
//! Monte Carlo estimators for their laws of large numbers and large
//! deviations.
//!
//! The pieces, bottom up:
//!
//! * [`cube`]: elementary cubes, faces, cofaces, windows `[-n, n]^d`.
//! * [`field`], [`matrix`], [`homology`]: exact boundary matrices, ranks, Betti
//!   numbers.
//! * [`persistence`]: filtrations, persistence diagrams, persistent Betti
//!   numbers by two independent routes.
//! * [`models`], [`rng`]: upper/lower/perturbed-lattice/ball-cover samplers on
//!   counter-based random streams.
//! * [`limit_lab`]: density, mean-diagram, log-MGF and Legendre-transform
//!   estimators plus the near-additivity and regularity gap measurements.
//! * [`config`], [`verify`], [`cli`]: the experiment file format, the exact
//!   property suite, and the command-line front end.

pub mod cli;
pub mod config;
pub mod cube;
pub mod error;
pub mod field;
pub mod homology;
pub mod limit_lab;
pub mod matrix;
pub mod models;
pub mod output;
pub mod persistence;
pub mod rng;
pub mod verify;

pub use cube::{ElementaryCube, SignedCube, Window};
pub use error::{Error, Result};
pub use persistence::{
    compute_diagram, persistent_betti_direct, quadrant_mass, rectangle_mass, BirthDeathPair,
    Filtration, PersistenceDiagram,
};
