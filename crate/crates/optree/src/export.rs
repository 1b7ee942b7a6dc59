//! Saved trees: JSON for round trips, plus text and Graphviz renderings.

use std::fmt::Write as _;
use std::path::Path;

use optree_core::data::AttributeSchema;
use optree_core::dtree::{NodeKind, NodeStore, TreeState};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SavedNode {
    Leaf {
        predict: usize,
        n: u64,
    },
    Split {
        attribute: usize,
        children: Vec<SavedNode>,
    },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SavedTree {
    pub attributes: Vec<String>,
    pub num_classes: usize,
    pub root: SavedNode,
}

impl SavedTree {
    pub fn from_tree(store: &NodeStore, tree: &TreeState) -> Self {
        let fallback = store.stats(store.root()).prediction().unwrap_or(0);
        fn walk(store: &NodeStore, tree: &TreeState, idx: usize, fallback: usize) -> SavedNode {
            let node = &tree.nodes()[idx];
            match &node.kind {
                NodeKind::Leaf => {
                    let stats = store.stats(node.region);
                    SavedNode::Leaf {
                        predict: stats.prediction().unwrap_or(fallback),
                        n: stats.n(),
                    }
                }
                NodeKind::Split {
                    attribute,
                    children,
                } => SavedNode::Split {
                    attribute: *attribute,
                    children: children
                        .iter()
                        .map(|&c| walk(store, tree, c, fallback))
                        .collect(),
                },
            }
        }
        let schema: &AttributeSchema = store.schema();
        SavedTree {
            attributes: schema.attributes().iter().map(|a| a.name.clone()).collect(),
            num_classes: schema.num_classes(),
            root: walk(store, tree, 0, fallback),
        }
    }

    pub fn leaves(&self) -> usize {
        fn count(n: &SavedNode) -> usize {
            match n {
                SavedNode::Leaf { .. } => 1,
                SavedNode::Split { children, .. } => children.iter().map(count).sum(),
            }
        }
        count(&self.root)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })
    }
}

/// Nested `if` / `elif` blocks, two spaces per level:
///
/// ```text
/// if attr0 == 0:
///   predict 1 (n=52)
/// elif attr0 == 1:
///   predict 0 (n=48)
/// ```
pub fn render_text(tree: &SavedTree) -> String {
    fn walk(node: &SavedNode, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match node {
            SavedNode::Leaf { predict, n } => {
                let _ = writeln!(out, "{pad}predict {predict} (n={n})");
            }
            SavedNode::Split {
                attribute,
                children,
            } => {
                for (v, child) in children.iter().enumerate() {
                    let kw = if v == 0 { "if" } else { "elif" };
                    let _ = writeln!(out, "{pad}{kw} attr{attribute} == {v}:");
                    walk(child, depth + 1, out);
                }
            }
        }
    }
    let mut out = String::new();
    walk(&tree.root, 0, &mut out);
    out
}

pub fn render_dot(tree: &SavedTree) -> String {
    fn walk(node: &SavedNode, next: &mut usize, out: &mut String) -> usize {
        let id = *next;
        *next += 1;
        match node {
            SavedNode::Leaf { predict, n } => {
                let _ = writeln!(
                    out,
                    "  n{id} [shape=box, label=\"predict {predict}\\nn={n}\"];"
                );
            }
            SavedNode::Split {
                attribute,
                children,
            } => {
                let _ = writeln!(out, "  n{id} [label=\"X{attribute}\"];");
                for (v, child) in children.iter().enumerate() {
                    let c = walk(child, next, out);
                    let _ = writeln!(out, "  n{id} -> n{c} [label=\"{v}\"];");
                }
            }
        }
        id
    }
    let mut out = String::from("digraph tree {\n");
    walk(&tree.root, &mut 0, &mut out);
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use optree_core::data::Instance;
    use optree_core::dtree::{split, RegionId};

    fn sample() -> (NodeStore, TreeState) {
        let mut store = NodeStore::new(AttributeSchema::binary(2));
        let t = TreeState::root(&store);
        for (a, y) in [(0, 1), (0, 1), (1, 0)] {
            t.observe(&mut store, &Instance::new(vec![a, 0], y));
        }
        let t = split(&mut store, &t, RegionId::ROOT, 0).unwrap();
        (store, t)
    }

    #[test]
    fn text_format() {
        let (store, t) = sample();
        let saved = SavedTree::from_tree(&store, &t);
        assert_eq!(
            render_text(&saved),
            "if attr0 == 0:\n  predict 1 (n=2)\nelif attr0 == 1:\n  predict 0 (n=1)\n"
        );
        assert_eq!(saved.leaves(), 2);
    }

    #[test]
    fn dot_format() {
        let (store, t) = sample();
        let dot = render_dot(&SavedTree::from_tree(&store, &t));
        assert!(dot.starts_with("digraph tree {\n  n0 [label=\"X0\"];"));
        assert!(dot.contains("n0 -> n2 [label=\"1\"];"));
        assert_eq!(dot.matches("shape=box").count(), 2);
    }

    #[test]
    fn json_round_trip() {
        let (store, t) = sample();
        let saved = SavedTree::from_tree(&store, &t);
        let back: SavedTree = serde_json::from_str(&saved.to_json()).unwrap();
        assert_eq!(back, saved);
    }
}
