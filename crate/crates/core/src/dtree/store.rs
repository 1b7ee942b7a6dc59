use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::key::NodeKey;
use crate::data::{AttributeSchema, Instance};
use crate::{Error, Result};

/// Index of a region inside a [`NodeStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionId(u32);

impl RegionId {
    /// The root region, present in every store.
    pub const ROOT: RegionId = RegionId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Sufficient statistics of one region.
///
/// `correct` counts samples whose class matched the region's majority
/// prediction computed *before* the sample was counted. The grid holds, for
/// every attribute `i` not fixed by the key and every value `j`, the class
/// counts `n_ijk` and the analogous prefix-prediction hits `c_ij` of the
/// would-be child `key + (i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeStats {
    key: NodeKey,
    n: u64,
    class_counts: Vec<u64>,
    correct: u64,
    seeded: u64,
    // (offset(i) + j) * K + k; empty until the region first receives a sample.
    grid: Vec<u64>,
    grid_correct: Vec<u64>,
}

impl NodeStats {
    fn new(key: NodeKey, num_classes: usize) -> Self {
        Self {
            key,
            n: 0,
            class_counts: vec![0; num_classes],
            correct: 0,
            seeded: 0,
            grid: Vec::new(),
            grid_correct: Vec::new(),
        }
    }

    pub fn key(&self) -> &NodeKey {
        &self.key
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn class_counts(&self) -> &[u64] {
        &self.class_counts
    }

    pub fn correct(&self) -> u64 {
        self.correct
    }

    /// Samples inherited from the parent grid when the region was created.
    /// The grid only covers the `n - seeded_n` samples observed afterwards.
    pub fn seeded_n(&self) -> u64 {
        self.seeded
    }

    /// Majority class, or `None` before any sample.
    pub fn prediction(&self) -> Option<usize> {
        majority_class(&self.class_counts).ok()
    }
}

/// Arg-max of `class_counts`, lowest index on ties.
pub fn majority_class(class_counts: &[u64]) -> Result<usize> {
    if class_counts.iter().all(|&c| c == 0) {
        return Err(Error::EmptyCounts);
    }
    Ok(argmax(class_counts))
}

fn argmax(counts: &[u64]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

/// Gini impurity `1 - sum p_k^2`; zero for empty counts.
pub fn gini(class_counts: &[u64]) -> f64 {
    let n: u64 = class_counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - class_counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

/// One [`NodeStats`] per canonical region key.
#[derive(Debug, Clone)]
pub struct NodeStore {
    schema: AttributeSchema,
    offsets: Vec<usize>,
    cells: usize,
    regions: Vec<NodeStats>,
    index: BTreeMap<NodeKey, RegionId>,
    zeros: Vec<u64>,
}

impl NodeStore {
    /// A store holding only the root region (empty key).
    pub fn new(schema: AttributeSchema) -> Self {
        let mut offsets = Vec::with_capacity(schema.num_attributes());
        let mut cells = 0;
        for a in schema.attributes() {
            offsets.push(cells);
            cells += a.cardinality;
        }
        let k = schema.num_classes();
        let mut store = Self {
            schema,
            offsets,
            cells,
            regions: Vec::new(),
            index: BTreeMap::new(),
            zeros: vec![0; k],
        };
        store.insert(NodeStats::new(NodeKey::root(), k));
        store
    }

    fn insert(&mut self, stats: NodeStats) -> RegionId {
        let id = RegionId(self.regions.len() as u32);
        self.index.insert(stats.key.clone(), id);
        self.regions.push(stats);
        id
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn root(&self) -> RegionId {
        RegionId::ROOT
    }

    /// Number of distinct regions created so far.
    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn stats(&self, id: RegionId) -> &NodeStats {
        &self.regions[id.index()]
    }

    pub fn key(&self, id: RegionId) -> &NodeKey {
        &self.regions[id.index()].key
    }

    pub fn lookup(&self, key: &NodeKey) -> Option<RegionId> {
        self.index.get(key).copied()
    }

    fn has_grid_for(&self, id: RegionId, attribute: usize) -> bool {
        attribute < self.schema.num_attributes()
            && self.schema.is_splittable(attribute)
            && !self.regions[id.index()].key.constrains(attribute)
    }

    /// Attributes that may still split this region.
    pub fn usable_attributes(&self, id: RegionId) -> Vec<usize> {
        (0..self.schema.num_attributes())
            .filter(|&a| self.has_grid_for(id, a))
            .collect()
    }

    /// `n_ijk` for `k = 0..K`, or `None` when the region has no grid for
    /// `attribute`.
    pub fn grid_counts(&self, id: RegionId, attribute: usize, value: usize) -> Option<&[u64]> {
        if !self.has_grid_for(id, attribute) || value >= self.schema.cardinality(attribute) {
            return None;
        }
        let s = &self.regions[id.index()];
        if s.grid.is_empty() {
            return Some(&self.zeros);
        }
        let k = self.schema.num_classes();
        let cell = self.offsets[attribute] + value;
        Some(&s.grid[cell * k..(cell + 1) * k])
    }

    /// `c_ij`: prefix-prediction hits of the child `key + (attribute, value)`.
    pub fn grid_correct(&self, id: RegionId, attribute: usize, value: usize) -> Option<u64> {
        if !self.has_grid_for(id, attribute) || value >= self.schema.cardinality(attribute) {
            return None;
        }
        let s = &self.regions[id.index()];
        Some(if s.grid.is_empty() {
            0
        } else {
            s.grid_correct[self.offsets[attribute] + value]
        })
    }

    /// Samples covered by the grid of `attribute` at this region.
    pub fn grid_total(&self, id: RegionId, attribute: usize) -> Option<u64> {
        if !self.has_grid_for(id, attribute) {
            return None;
        }
        Some(
            (0..self.schema.cardinality(attribute))
                .map(|v| {
                    self.grid_counts(id, attribute, v)
                        .unwrap()
                        .iter()
                        .sum::<u64>()
                })
                .sum(),
        )
    }

    /// Counts one sample at a region the sample belongs to. Every
    /// correctness check reads the counts before they are incremented.
    pub(crate) fn record(&mut self, id: RegionId, instance: &Instance) {
        let k = self.schema.num_classes();
        let label = instance.label;
        let cells = self.cells;
        let s = &mut self.regions[id.index()];
        if s.n > 0 && argmax(&s.class_counts) == label {
            s.correct += 1;
        }
        s.n += 1;
        s.class_counts[label] += 1;
        if s.grid.is_empty() {
            s.grid = vec![0; cells * k];
            s.grid_correct = vec![0; cells];
        }
        for (i, &v) in instance.values.iter().enumerate() {
            if self.schema.cardinality(i) < 2 || s.key.constrains(i) {
                continue;
            }
            let cell = self.offsets[i] + v;
            let row = &mut s.grid[cell * k..(cell + 1) * k];
            if row.iter().any(|&c| c > 0) && argmax(row) == label {
                s.grid_correct[cell] += 1;
            }
            row[label] += 1;
        }
    }

    /// The child region `parent + (attribute, value)`. A region seen for the
    /// first time is seeded from the parent's grid; an existing one is
    /// returned untouched.
    pub(crate) fn child_region(
        &mut self,
        parent: RegionId,
        attribute: usize,
        value: usize,
    ) -> Result<RegionId> {
        let key = self.key(parent).extend(attribute, value)?;
        if let Some(id) = self.lookup(&key) {
            return Ok(id);
        }
        let counts = self
            .grid_counts(parent, attribute, value)
            .ok_or(Error::AttributeNotAvailable {
                region: parent.index(),
                attribute,
            })?
            .to_vec();
        let correct = self.grid_correct(parent, attribute, value).unwrap_or(0);
        let mut stats = NodeStats::new(key, self.schema.num_classes());
        stats.n = counts.iter().sum();
        stats.seeded = stats.n;
        stats.class_counts = counts;
        stats.correct = correct;
        Ok(self.insert(stats))
    }
}
