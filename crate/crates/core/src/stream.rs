//! Seeded sample sources.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::data::{AttributeSchema, Dataset, Instance};
use crate::{Error, Result, SeededRng};

/// A single-consumer supplier of instances.
pub trait StreamSource {
    fn schema(&self) -> &AttributeSchema;

    fn next_instance(&mut self) -> Result<Instance>;
}

impl<S: StreamSource + ?Sized> StreamSource for &mut S {
    fn schema(&self) -> &AttributeSchema {
        (**self).schema()
    }

    fn next_instance(&mut self) -> Result<Instance> {
        (**self).next_instance()
    }
}

/// `q` i.i.d. uniform bits; the label is 1 iff attributes 0 and 1 agree.
#[derive(Debug, Clone)]
pub struct XorStream {
    schema: AttributeSchema,
    rng: SeededRng,
}

pub fn xor_stream(q: usize, seed: u64) -> Result<XorStream> {
    if q < 2 {
        return Err(Error::InvalidConfig(alloc::format!(
            "xor stream needs q >= 2, got {q}"
        )));
    }
    Ok(XorStream {
        schema: AttributeSchema::binary(q),
        rng: SeededRng::seed_from_u64(seed),
    })
}

/// The label the XOR concept assigns to `values`.
pub fn xor_label(values: &[usize]) -> usize {
    usize::from(values[0] == values[1])
}

impl StreamSource for XorStream {
    fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    fn next_instance(&mut self) -> Result<Instance> {
        let q = self.schema.num_attributes();
        let values: Vec<usize> = (0..q)
            .map(|_| usize::from(self.rng.random::<bool>()))
            .collect();
        let label = xor_label(&values);
        Ok(Instance::new(values, label))
    }
}

/// Cycles through a dataset in seeded epoch permutations.
#[derive(Debug, Clone)]
pub struct ReplayStream {
    dataset: Dataset,
    rng: SeededRng,
    order: Vec<usize>,
    pos: usize,
    reshuffle: bool,
}

pub fn replay_stream(dataset: Dataset, seed: u64, reshuffle: bool) -> Result<ReplayStream> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = SeededRng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rng);
    Ok(ReplayStream {
        dataset,
        rng,
        order,
        pos: 0,
        reshuffle,
    })
}

impl ReplayStream {
    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }
}

impl StreamSource for ReplayStream {
    fn schema(&self) -> &AttributeSchema {
        self.dataset.schema()
    }

    fn next_instance(&mut self) -> Result<Instance> {
        if self.pos == self.order.len() {
            self.pos = 0;
            if self.reshuffle {
                self.order.shuffle(&mut self.rng);
            }
        }
        let row = self.dataset.rows()[self.order[self.pos]].clone();
        self.pos += 1;
        Ok(row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Attribute;
    use alloc::vec;

    fn numbered(n: usize) -> Dataset {
        let schema = AttributeSchema::new(vec![Attribute::new("id", n)], 2).unwrap();
        Dataset::new(
            schema,
            (0..n).map(|i| Instance::new(vec![i], i % 2)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn xor_labels() {
        assert_eq!(xor_label(&[0, 0, 1]), 1);
        assert_eq!(xor_label(&[1, 1]), 1);
        assert_eq!(xor_label(&[0, 1]), 0);
        assert_eq!(xor_label(&[1, 0]), 0);
        assert!(xor_stream(1, 0).is_err());
    }

    #[test]
    fn replay_epochs_are_permutations() {
        for reshuffle in [true, false] {
            let mut s = replay_stream(numbered(17), 3, reshuffle).unwrap();
            let mut epochs = Vec::new();
            for _ in 0..3 {
                let mut ids: Vec<usize> = (0..17)
                    .map(|_| s.next_instance().unwrap().values[0])
                    .collect();
                epochs.push(ids.clone());
                ids.sort_unstable();
                assert_eq!(ids, (0..17).collect::<Vec<_>>());
            }
            assert_eq!(epochs[0] == epochs[1], !reshuffle);
        }
    }

    #[test]
    fn replay_rejects_empty() {
        let schema = AttributeSchema::binary(1);
        let empty = Dataset::new(schema, vec![]).unwrap();
        assert!(matches!(
            replay_stream(empty, 0, true),
            Err(Error::EmptyDataset)
        ));
    }
}
