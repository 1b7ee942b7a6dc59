use alloc::vec;
use alloc::vec::Vec;

use super::store::{NodeStore, RegionId};
use crate::data::Instance;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    /// One child per category of `attribute`, indexed by value.
    Split {
        attribute: usize,
        children: Vec<usize>,
    },
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub region: RegionId,
    pub kind: NodeKind,
}

/// Structure of one decision tree. Node `0` is the root; statistics live in
/// the [`NodeStore`] the tree was built against.
#[derive(Debug, Clone)]
pub struct TreeState {
    nodes: Vec<TreeNode>,
    splits: usize,
}

impl TreeState {
    /// The single-leaf tree over the root region.
    pub fn root(store: &NodeStore) -> Self {
        Self {
            nodes: vec![TreeNode {
                region: store.root(),
                kind: NodeKind::Leaf,
            }],
            splits: 0,
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn splits(&self) -> usize {
        self.splits
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Leaf)
            .count()
    }

    /// Leaf regions in depth-first order, children visited by category value.
    pub fn leaves(&self) -> Vec<RegionId> {
        let mut out = Vec::with_capacity(self.splits + 1);
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            match &self.nodes[i].kind {
                NodeKind::Leaf => out.push(self.nodes[i].region),
                NodeKind::Split { children, .. } => stack.extend(children.iter().rev()),
            }
        }
        out
    }

    fn find_leaf(&self, region: RegionId) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n.region == region && n.kind == NodeKind::Leaf)
    }

    pub fn is_leaf(&self, region: RegionId) -> bool {
        self.find_leaf(region).is_some()
    }

    /// Maximum number of constraints on any root-leaf path.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, d)) = stack.pop() {
            match &self.nodes[i].kind {
                NodeKind::Leaf => best = best.max(d),
                NodeKind::Split { children, .. } => {
                    stack.extend(children.iter().map(|&c| (c, d + 1)))
                }
            }
        }
        best
    }

    /// The leaf region containing `instance`.
    pub fn route(&self, instance: &Instance) -> RegionId {
        let mut i = 0;
        loop {
            match &self.nodes[i].kind {
                NodeKind::Leaf => return self.nodes[i].region,
                NodeKind::Split {
                    attribute,
                    children,
                } => i = children[instance.values[*attribute]],
            }
        }
    }

    /// Counts `instance` at every region on its root-to-leaf path and returns
    /// the leaf.
    pub fn observe(&self, store: &mut NodeStore, instance: &Instance) -> RegionId {
        debug_assert!(store.schema().validate(instance).is_ok());
        let mut i = 0;
        loop {
            let node = &self.nodes[i];
            store.record(node.region, instance);
            match &node.kind {
                NodeKind::Leaf => return node.region,
                NodeKind::Split {
                    attribute,
                    children,
                } => i = children[instance.values[*attribute]],
            }
        }
    }

    /// Attributes that can split `leaf`: unconstrained on its path and with at
    /// least two categories.
    pub fn available_splits(&self, store: &NodeStore, leaf: RegionId) -> Result<Vec<usize>> {
        if !self.is_leaf(leaf) {
            return Err(Error::NotALeaf(leaf.index()));
        }
        Ok(store.usable_attributes(leaf))
    }

    /// Chain-rule estimate of `P[X in leaf]` for every leaf, in [`leaves`]
    /// order. Each factor is the child's sample count over the summed counts
    /// of its siblings; an unvisited parent spreads uniformly.
    ///
    /// [`leaves`]: TreeState::leaves
    pub fn leaf_probabilities(&self, store: &NodeStore) -> Vec<(RegionId, f64)> {
        let mut out = Vec::with_capacity(self.splits + 1);
        let mut stack = vec![(0usize, 1.0f64)];
        while let Some((i, p)) = stack.pop() {
            match &self.nodes[i].kind {
                NodeKind::Leaf => out.push((self.nodes[i].region, p)),
                NodeKind::Split { children, .. } => {
                    let total: u64 = children
                        .iter()
                        .map(|&c| store.stats(self.nodes[c].region).n())
                        .sum();
                    for &c in children.iter().rev() {
                        let factor = if total == 0 {
                            1.0 / children.len() as f64
                        } else {
                            store.stats(self.nodes[c].region).n() as f64 / total as f64
                        };
                        stack.push((c, p * factor));
                    }
                }
            }
        }
        out
    }

    /// Chain-rule probability of a single leaf.
    pub fn p_hat(&self, store: &NodeStore, leaf: RegionId) -> Result<f64> {
        self.leaf_probabilities(store)
            .into_iter()
            .find(|&(r, _)| r == leaf)
            .map(|(_, p)| p)
            .ok_or(Error::NotALeaf(leaf.index()))
    }

    fn same_subtree(&self, i: usize, other: &TreeState, j: usize) -> bool {
        let (a, b) = (&self.nodes[i], &other.nodes[j]);
        if a.region != b.region {
            return false;
        }
        match (&a.kind, &b.kind) {
            (NodeKind::Leaf, NodeKind::Leaf) => true,
            (
                NodeKind::Split {
                    attribute: x,
                    children: cx,
                },
                NodeKind::Split {
                    attribute: y,
                    children: cy,
                },
            ) => {
                x == y
                    && cx.len() == cy.len()
                    && cx
                        .iter()
                        .zip(cy)
                        .all(|(&ci, &cj)| self.same_subtree(ci, other, cj))
            }
            _ => false,
        }
    }
}

/// Trees are equal when they describe the same partition, whatever order
/// their splits were applied in.
impl PartialEq for TreeState {
    fn eq(&self, other: &Self) -> bool {
        self.splits == other.splits && self.same_subtree(0, other, 0)
    }
}

impl Eq for TreeState {}

/// Splits `leaf` of `tree` on `attribute`, returning a new tree. Child
/// regions seen for the first time are seeded from the leaf's grid; regions
/// already in the store keep their statistics.
pub fn split(
    store: &mut NodeStore,
    tree: &TreeState,
    leaf: RegionId,
    attribute: usize,
) -> Result<TreeState> {
    let pos = tree.find_leaf(leaf).ok_or(Error::NotALeaf(leaf.index()))?;
    if !tree.available_splits(store, leaf)?.contains(&attribute) {
        return Err(Error::AttributeNotAvailable {
            region: leaf.index(),
            attribute,
        });
    }
    let mut next = tree.clone();
    let mut children = Vec::with_capacity(store.schema().cardinality(attribute));
    for value in 0..store.schema().cardinality(attribute) {
        let region = store.child_region(leaf, attribute, value)?;
        children.push(next.nodes.len());
        next.nodes.push(TreeNode {
            region,
            kind: NodeKind::Leaf,
        });
    }
    next.nodes[pos].kind = NodeKind::Split {
        attribute,
        children,
    };
    next.splits += 1;
    Ok(next)
}
