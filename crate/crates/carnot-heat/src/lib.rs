//! Monte Carlo verification of the small-time behaviour of the fractional
//! heat content of domains in Carnot groups.
//!
//! The library provides exponential-coordinate arithmetic on stratified
//! groups ([`group`]), horizontal differential calculus ([`calculus`]),
//! stable subordinator sampling and the small-time rate function
//! ([`stable`]), horizontal path simulation ([`path`]), level-set domains
//! with horizontal perimeter estimation ([`domain`]), the heat content
//! estimators and ratio extrapolation ([`heat`]), statistical bound checks
//! ([`checks`]) and the reproducible experiment driver ([`config`],
//! [`experiment`]).

pub mod calculus;
pub mod checks;
pub mod config;
pub mod domain;
pub mod experiment;
pub mod error;
pub mod group;
pub mod heat;
pub mod path;
pub mod rng;
pub mod stable;

pub use error::{Error, Result};
