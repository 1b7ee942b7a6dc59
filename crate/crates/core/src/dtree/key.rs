use alloc::vec::Vec;
use core::fmt;

use crate::data::Instance;
use crate::{Error, Result};

/// Canonical region identity: constraints sorted by attribute index.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeKey(Vec<(usize, usize)>);

/// Sorts `constraints` into a [`NodeKey`], rejecting repeated attributes.
pub fn canonical_key(mut constraints: Vec<(usize, usize)>) -> Result<NodeKey> {
    constraints.sort_unstable();
    if let Some(w) = constraints.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateAttribute(w[0].0));
    }
    Ok(NodeKey(constraints))
}

impl NodeKey {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn constraints(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn constrains(&self, attribute: usize) -> bool {
        self.0.binary_search_by_key(&attribute, |&(a, _)| a).is_ok()
    }

    pub fn extend(&self, attribute: usize, value: usize) -> Result<NodeKey> {
        match self.0.binary_search_by_key(&attribute, |&(a, _)| a) {
            Ok(_) => Err(Error::DuplicateAttribute(attribute)),
            Err(pos) => {
                let mut c = self.0.clone();
                c.insert(pos, (attribute, value));
                Ok(NodeKey(c))
            }
        }
    }

    pub fn contains(&self, instance: &Instance) -> bool {
        self.0.iter().all(|&(a, v)| instance.values[a] == v)
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (a, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "x{a}={v}")?;
        }
        f.write_str("]")
    }
}
