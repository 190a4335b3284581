//! Deterministic simulations of how evolvability changes under genetic drift
//! and under population growth into limited-capacity niches.
//!
//! Four model families are provided:
//!
//! - [`abstract_models`]: organisms that are nothing but a lattice niche and a
//!   heritable probability of leaving it, evolved either as a fixed-size
//!   drifting population or as a geometrically growing population capped per
//!   niche.
//! - [`ann_space`]: an exhaustively enumerable space of ternary-weight
//!   recurrent controllers for a maze robot ([`maze`]), tabulated once into a
//!   lookup table and then evolved by drift or niched growth.
//! - [`neat`]: variable-topology controllers with continuous weights evolved
//!   under behavior-based (or random) limited-capacity niching.
//! - [`analysis`]: the statistics reported for all of the above.
//!
//! The [`harness`] module wires these into reproducible experiment batteries
//! and persists their inputs and outputs.

pub mod abstract_models;
pub mod analysis;
pub mod ann_space;
pub mod error;
pub mod harness;
pub mod maze;
pub mod neat;
pub mod niching;
pub mod seed;

pub use error::{Error, Result};
