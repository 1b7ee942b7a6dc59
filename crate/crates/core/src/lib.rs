//! Online search for accuracy-vs-complexity optimal classification trees.
//!
//! The learner treats every decision tree as a state of an episodic MDP whose
//! split actions cost `lambda` and whose terminal action pays the tree's
//! accuracy. A Monte Carlo Tree Search with a Thompson Sampling policy explores
//! that MDP while consuming a categorical sample stream. Value posteriors are
//! Gaussian: search leaves aggregate per-region Beta posteriors, internal
//! search nodes take either a moment-matched max of their children or the
//! child with the best penalized mean.
//!
//! Region statistics live in a single [`NodeStore`](dtree::NodeStore) keyed by
//! canonical constraint sets, so every search node whose tree contains a given
//! region sees the samples routed there by any simulation.
//!
//! The crate is `no_std` and only needs `alloc`. IO, CSV and the command line
//! live in the companion `optree` crate.
#![no_std]

extern crate alloc;

pub mod baseline;
pub mod data;
pub mod dtree;
mod error;
pub mod eval;
pub mod mcts;
pub mod posterior;
pub mod stream;

pub use error::{Error, Result};

/// Seeded generator used for every stochastic component.
pub type SeededRng = rand_chacha::ChaCha8Rng;
