//! Schemas, instances, datasets, binary encodings and fold splitting.
//!
//! Attributes and classes are 0-based everywhere: the first attribute of a
//! schema is attribute `0`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::{Error, Result, SeededRng};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub cardinality: usize,
}

impl Attribute {
    pub fn new(name: impl Into<String>, cardinality: usize) -> Self {
        Self {
            name: name.into(),
            cardinality,
        }
    }
}

/// Categorical attributes plus the number of classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
    num_classes: usize,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<Attribute>, num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidSchema(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        if let Some(a) = attributes.iter().find(|a| a.cardinality == 0) {
            return Err(Error::InvalidSchema(format!(
                "attribute `{}` has cardinality 0",
                a.name
            )));
        }
        Ok(Self {
            attributes,
            num_classes,
        })
    }

    /// `q` binary attributes named `x0..x{q-1}` with a binary label.
    pub fn binary(q: usize) -> Self {
        let attributes = (0..q).map(|i| Attribute::new(format!("x{i}"), 2)).collect();
        Self {
            attributes,
            num_classes: 2,
        }
    }

    pub fn num_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn cardinality(&self, attribute: usize) -> usize {
        self.attributes[attribute].cardinality
    }

    pub fn name(&self, attribute: usize) -> &str {
        &self.attributes[attribute].name
    }

    /// Attributes with a single category can never split a region.
    pub fn is_splittable(&self, attribute: usize) -> bool {
        self.attributes[attribute].cardinality >= 2
    }

    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if instance.values.len() != self.attributes.len() {
            return Err(Error::InvalidInstance(format!(
                "expected {} values, got {}",
                self.attributes.len(),
                instance.values.len()
            )));
        }
        for (i, (&v, a)) in instance.values.iter().zip(&self.attributes).enumerate() {
            if v >= a.cardinality {
                return Err(Error::InvalidInstance(format!(
                    "attribute {i} value {v} exceeds cardinality {}",
                    a.cardinality
                )));
            }
        }
        if instance.label >= self.num_classes {
            return Err(Error::InvalidInstance(format!(
                "label {} exceeds class count {}",
                instance.label, self.num_classes
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub values: Vec<usize>,
    pub label: usize,
}

impl Instance {
    pub fn new(values: Vec<usize>, label: usize) -> Self {
        Self { values, label }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    schema: AttributeSchema,
    rows: Vec<Instance>,
}

impl Dataset {
    pub fn new(schema: AttributeSchema, rows: Vec<Instance>) -> Result<Self> {
        for row in &rows {
            schema.validate(row)?;
        }
        Ok(Self { schema, rows })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn rows(&self) -> &[Instance] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

/// Which category a one-hot encoding leaves implicit (all-zero bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    None,
    DropFirst,
    DropLast,
}

impl Encoding {
    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::None => "none",
            Encoding::DropFirst => "drop_first",
            Encoding::DropLast => "drop_last",
        }
    }
}

/// Expands every attribute with more than two categories into `c - 1` binary
/// indicators. Binary and single-category attributes pass through.
pub fn one_hot_encode(dataset: &Dataset, mode: Encoding) -> Result<Dataset> {
    if mode == Encoding::None {
        return Ok(dataset.clone());
    }
    let schema = dataset.schema();
    // (source attribute, category encoded by this bit) or pass-through.
    let mut columns: Vec<(usize, Option<usize>)> = Vec::new();
    let mut attributes = Vec::new();
    for (i, a) in schema.attributes().iter().enumerate() {
        if a.cardinality <= 2 {
            columns.push((i, None));
            attributes.push(a.clone());
            continue;
        }
        let kept = match mode {
            Encoding::DropFirst => 1..a.cardinality,
            _ => 0..a.cardinality - 1,
        };
        for category in kept {
            columns.push((i, Some(category)));
            attributes.push(Attribute::new(format!("{}={category}", a.name), 2));
        }
    }
    let encoded = AttributeSchema::new(attributes, schema.num_classes())?;
    let rows = dataset
        .rows()
        .iter()
        .map(|row| {
            let values = columns
                .iter()
                .map(|&(src, cat)| match cat {
                    None => row.values[src],
                    Some(c) => usize::from(row.values[src] == c),
                })
                .collect();
            Instance::new(values, row.label)
        })
        .collect();
    Dataset::new(encoded, rows)
}

/// Seeded shuffle followed by contiguous fold assignment. The first
/// `len % k` folds hold one extra row.
pub fn kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<(Dataset, Dataset)>> {
    let n = dataset.len();
    if k < 2 || k > n {
        return Err(Error::FoldCount { k, rows: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut SeededRng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let test = &order[start..start + size];
        let train: Vec<usize> = order[..start]
            .iter()
            .chain(&order[start + size..])
            .copied()
            .collect();
        folds.push((dataset.subset(&train), dataset.subset(test)));
        start += size;
    }
    Ok(folds)
}
