use optree_core::data::{AttributeSchema, Instance};
use optree_core::dtree::{canonical_key, split, NodeStore, RegionId, TreeState};
use optree_core::posterior::{beta_moments, BetaParams};
use proptest::prelude::*;

proptest! {
    #[test]
    fn canonical_key_ignores_order(mut pairs in prop::collection::btree_map(0usize..12, 0usize..4, 0..6)
        .prop_map(|m| m.into_iter().collect::<Vec<_>>()), seed in any::<u64>()) {
        let sorted = canonical_key(pairs.clone()).unwrap();
        // deterministic permutation from the seed
        let mut s = seed;
        for i in (1..pairs.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            pairs.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(canonical_key(pairs).unwrap(), sorted);
    }

    #[test]
    fn duplicate_attribute_is_rejected(a in 0usize..8, v in 0usize..3, w in 0usize..3) {
        prop_assert!(canonical_key(vec![(a, v), (a, w)]).is_err());
    }

    #[test]
    fn counts_are_conserved(rows in prop::collection::vec((0usize..2, 0usize..3, 0usize..2, 0usize..2), 1..300),
                            split_at in 0usize..300) {
        let schema = AttributeSchema::new(
            vec![
                optree_core::data::Attribute::new("a", 2),
                optree_core::data::Attribute::new("b", 3),
                optree_core::data::Attribute::new("c", 2),
            ],
            2,
        ).unwrap();
        let mut store = NodeStore::new(schema);
        let mut tree = TreeState::root(&store);
        for (i, &(a, b, c, y)) in rows.iter().enumerate() {
            if i == split_at {
                tree = split(&mut store, &tree, RegionId::ROOT, 1).unwrap();
            }
            tree.observe(&mut store, &Instance::new(vec![a, b, c], y));
        }
        for leaf in tree.leaves().into_iter().chain([RegionId::ROOT]) {
            let st = store.stats(leaf);
            prop_assert_eq!(st.class_counts().iter().sum::<u64>(), st.n());
            prop_assert!(st.correct() <= st.n().saturating_sub(1));
            for attr in store.usable_attributes(leaf) {
                prop_assert_eq!(store.grid_total(leaf, attr).unwrap(), st.n() - st.seeded_n());
            }
        }
    }

    #[test]
    fn beta_variance_bounds_hold_for_large_n(n in 200u64..100_000, frac in 0.0f64..1.0) {
        let c = ((n - 1) as f64 * frac) as u64;
        let var = beta_moments(BetaParams::from_counts(c, n)).var;
        let nf = n as f64;
        prop_assert!(var >= (1.0 + nf) / ((2.0 + nf) * (2.0 + nf) * (3.0 + nf)));
        prop_assert!(var <= 1.0 / (4.0 * (nf + 3.0)));
    }
}
