//! Prediction, accuracy metrics and structural tree comparison.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Dataset, Instance};
use crate::dtree::{NodeKind, NodeStore, TreeState};
use crate::{Error, Result};

/// Class predicted for `instance`: the majority class of its leaf, falling
/// back to the majority of everything observed at the root, then to class 0.
pub fn predict(store: &NodeStore, tree: &TreeState, instance: &Instance) -> usize {
    store
        .stats(tree.route(instance))
        .prediction()
        .or_else(|| store.stats(store.root()).prediction())
        .unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub leaves: usize,
    pub splits: usize,
    /// `accuracy - lambda * splits`.
    pub regularized: f64,
}

pub fn evaluate(
    store: &NodeStore,
    tree: &TreeState,
    dataset: &Dataset,
    lambda: f64,
) -> Result<Metrics> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let hits = dataset
        .rows()
        .iter()
        .filter(|x| predict(store, tree, x) == x.label)
        .count();
    let accuracy = hits as f64 / dataset.len() as f64;
    Ok(Metrics {
        accuracy,
        leaves: tree.num_leaves(),
        splits: tree.splits(),
        regularized: accuracy - lambda * tree.splits() as f64,
    })
}

/// Tree structure with leaf predictions and no region identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TreeShape {
    Leaf(usize),
    Split(usize, Vec<TreeShape>),
}

impl TreeShape {
    pub fn of(store: &NodeStore, tree: &TreeState) -> TreeShape {
        let fallback = store.stats(store.root()).prediction().unwrap_or(0);
        Self::build(store, tree, 0, fallback)
    }

    fn build(store: &NodeStore, tree: &TreeState, i: usize, fallback: usize) -> TreeShape {
        let node = &tree.nodes()[i];
        match &node.kind {
            NodeKind::Leaf => {
                TreeShape::Leaf(store.stats(node.region).prediction().unwrap_or(fallback))
            }
            NodeKind::Split {
                attribute,
                children,
            } => TreeShape::Split(
                *attribute,
                children
                    .iter()
                    .map(|&c| Self::build(store, tree, c, fallback))
                    .collect(),
            ),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeShape::Leaf(_) => 1,
            TreeShape::Split(_, c) => c.iter().map(TreeShape::leaves).sum(),
        }
    }
}

/// Both minimal trees for the XOR concept on attributes 0 and 1: the root
/// may test either attribute.
pub fn xor_targets() -> [TreeShape; 2] {
    use TreeShape::{Leaf, Split};
    let rooted = |first: usize, second: usize| {
        Split(
            first,
            vec![
                Split(second, vec![Leaf(1), Leaf(0)]),
                Split(second, vec![Leaf(0), Leaf(1)]),
            ],
        )
    };
    [rooted(0, 1), rooted(1, 0)]
}

/// Whether the tree is one of the minimal XOR trees.
pub fn is_perfect_xor(store: &NodeStore, tree: &TreeState) -> bool {
    let shape = TreeShape::of(store, tree);
    xor_targets().contains(&shape)
}
