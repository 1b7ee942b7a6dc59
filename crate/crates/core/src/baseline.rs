//! Greedy online tree learner with a Hoeffding-bound split test.
//!
//! Each leaf accumulates the same `n_ijk` grids as the search, and every
//! `grace_period` samples compares the Gini gains of its attributes. It
//! splits on the best one when the gap to the runner-up exceeds the
//! Hoeffding radius, or when the radius itself drops below `tie_threshold`.

use alloc::string::ToString;

use crate::dtree::{gini, split, NodeStore, RegionId, TreeState};
use crate::stream::StreamSource;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyConfig {
    pub delta: f64,
    pub grace_period: u64,
    pub tie_threshold: f64,
    pub max_depth: Option<usize>,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            delta: 1e-7,
            grace_period: 200,
            tie_threshold: 0.05,
            max_depth: None,
        }
    }
}

impl GreedyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig("delta must lie in (0, 1)".to_string()));
        }
        if self.grace_period == 0 {
            return Err(Error::InvalidConfig(
                "grace period must be >= 1".to_string(),
            ));
        }
        if self.tie_threshold.is_nan() || self.tie_threshold < 0.0 {
            return Err(Error::InvalidConfig(
                "tie threshold must be >= 0".to_string(),
            ));
        }
        Ok(())
    }
}

/// `sqrt(R^2 ln(1/delta) / 2n)`.
pub fn hoeffding_bound(range: f64, delta: f64, n: u64) -> f64 {
    libm::sqrt(range * range * libm::log(1.0 / delta) / (2.0 * n as f64))
}

/// Gini impurity of the region minus the weighted impurity of its children
/// under `attribute`, both measured on the region's grid.
pub fn gini_gain(store: &NodeStore, region: RegionId, attribute: usize) -> Result<f64> {
    let total = store
        .grid_total(region, attribute)
        .ok_or(Error::AttributeNotAvailable {
            region: region.index(),
            attribute,
        })?;
    if total == 0 {
        return Ok(0.0);
    }
    let k = store.schema().num_classes();
    let mut parent = alloc::vec![0u64; k];
    let mut weighted = 0.0;
    for v in 0..store.schema().cardinality(attribute) {
        let row = store.grid_counts(region, attribute, v).unwrap();
        let n: u64 = row.iter().sum();
        for (p, &c) in parent.iter_mut().zip(row) {
            *p += c;
        }
        weighted += n as f64 / total as f64 * gini(row);
    }
    Ok(gini(&parent) - weighted)
}

#[derive(Debug, Clone)]
pub struct GreedyResult {
    pub tree: TreeState,
    pub store: NodeStore,
    pub samples: u64,
}

/// Single pass over `total_samples` stream samples.
pub fn greedy_fit<S: StreamSource>(
    mut stream: S,
    config: &GreedyConfig,
    total_samples: u64,
) -> Result<GreedyResult> {
    config.validate()?;
    let mut store = NodeStore::new(stream.schema().clone());
    let mut tree = TreeState::root(&store);
    for _ in 0..total_samples {
        let x = stream.next_instance()?;
        let leaf = tree.observe(&mut store, &x);
        let stats = store.stats(leaf);
        let seen = stats.n() - stats.seeded_n();
        if !seen.is_multiple_of(config.grace_period) {
            continue;
        }
        if gini(stats.class_counts()) == 0.0 {
            continue;
        }
        if config.max_depth.is_some_and(|d| stats.key().depth() >= d) {
            continue;
        }
        if let Some(attribute) = choose_split(&store, leaf, config, seen)? {
            tree = split(&mut store, &tree, leaf, attribute)?;
        }
    }
    Ok(GreedyResult {
        tree,
        store,
        samples: total_samples,
    })
}

fn choose_split(
    store: &NodeStore,
    leaf: RegionId,
    config: &GreedyConfig,
    n: u64,
) -> Result<Option<usize>> {
    let mut best: Option<(usize, f64)> = None;
    let mut second = f64::NEG_INFINITY;
    for a in store.usable_attributes(leaf) {
        let g = gini_gain(store, leaf, a)?;
        match best {
            Some((_, b)) if g <= b => second = second.max(g),
            _ => {
                if let Some((_, b)) = best {
                    second = b;
                }
                best = Some((a, g));
            }
        }
    }
    let Some((attribute, gain)) = best else {
        return Ok(None);
    };
    let eps = hoeffding_bound(1.0, config.delta, n);
    let gap = if second.is_finite() {
        gain - second
    } else {
        gain
    };
    Ok((gap >= eps || eps < config.tie_threshold).then_some(attribute))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AttributeSchema, Instance};

    #[test]
    fn bound_values() {
        let e = hoeffding_bound(1.0, 0.05, 100);
        assert!((e - libm::sqrt(libm::log(20.0) / 200.0)).abs() < 1e-15);
        assert!((e - 0.12238).abs() < 1e-5);
        assert!((hoeffding_bound(1.0, 0.05, 400) - e / 2.0).abs() < 1e-15);
        assert_eq!(hoeffding_bound(1.0, 1.0, 10), 0.0);
    }

    fn store_with(rows: &[(usize, usize, usize)]) -> NodeStore {
        let mut store = NodeStore::new(AttributeSchema::binary(2));
        let t = TreeState::root(&store);
        for &(a, b, y) in rows {
            t.observe(&mut store, &Instance::new(alloc::vec![a, b], y));
        }
        store
    }

    #[test]
    fn gains() {
        let pure = store_with(&[(0, 0, 1), (1, 0, 1), (0, 1, 1)]);
        assert_eq!(gini_gain(&pure, pure.root(), 0).unwrap(), 0.0);
        // xor over the full joint distribution
        let xor = store_with(&[(0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)]);
        assert_eq!(gini_gain(&xor, xor.root(), 0).unwrap(), 0.0);
        assert_eq!(gini_gain(&xor, xor.root(), 1).unwrap(), 0.0);
        // attribute 0 separates the classes
        let sep = store_with(&[(0, 0, 0), (0, 1, 0), (1, 0, 1), (1, 1, 1)]);
        assert_eq!(gini_gain(&sep, sep.root(), 0).unwrap(), 0.5);
        assert!(gini_gain(&sep, sep.root(), 5).is_err());
    }

    #[test]
    fn config_checks() {
        assert!(GreedyConfig::default().validate().is_ok());
        assert!(GreedyConfig {
            delta: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GreedyConfig {
            grace_period: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
