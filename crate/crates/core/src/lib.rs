//! Online two-dimensional vector bin packing with advice.
//!
//! Every vector has non-negative coordinates in `[0, 1]` and a bin is feasible
//! while its coordinate sums stay at most 1. Strategies receive vectors one at
//! a time and may read an advice tape written by an oracle that has seen the
//! whole sequence. All arithmetic is exact over `i128` rationals.
//!
//! * [`engine`] runs strategies and checks every placement.
//! * [`advice`] holds the self-delimiting tape encoding and the oracles.
//! * [`restricted`] implements the strategies for vectors in a cone around the diagonal.
//! * [`scaled`] implements the grid-based strategy for arbitrary vectors.
//! * [`exact`] computes offline optima for small instances.
//! * [`generators`] builds lower-bound, tightness and random instances.

pub mod advice;
pub mod engine;
pub mod error;
pub mod exact;
pub mod generators;
pub mod harness;
pub mod io;
pub mod model;
pub mod rational;
pub mod restricted;
pub mod rng;
pub mod scaled;

pub use error::{Error, Result};
pub use model::{Bin, BinLabel, Load2, Packing, Vec2};
pub use rational::Rational;
