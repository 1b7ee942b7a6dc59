//! Decision trees over a shared store of region statistics.
//!
//! A region is the set of inputs satisfying a conjunction of
//! `attribute == value` constraints. Regions are identified by their
//! canonical [`NodeKey`], so two trees that reach the same region through
//! different split orders share one [`NodeStats`] record.

mod key;
mod store;
mod tree;

pub use key::{canonical_key, NodeKey};
pub use store::{gini, majority_class, NodeStats, NodeStore, RegionId};
pub use tree::{split, NodeKind, TreeNode, TreeState};
