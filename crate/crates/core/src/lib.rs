//! xorshift128+ and the plane structure of its consecutive outputs.
//!
//! - [`bitlin`]: 64-bit words as F2 row vectors, shift matrices.
//! - [`engine`]: the generator, seeding, unit conversion.
//! - [`xorapprox`]: exhaustive checks of when xor equals a sum or difference,
//!   and the case classifiers used on generator words.
//! - [`planes`]: the eight planes, torus distance, mesh data.
//! - [`experiment`]: slab sampling, hit statistics, control baseline, census.
//! - [`cli`]: the `xsplanes` command line.

pub mod bitlin;
pub mod cli;
pub mod control;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod planes;
pub mod xorapprox;

pub use error::Error;
