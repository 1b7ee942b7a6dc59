//! CSV ingestion: header row, comma separated, every cell a category name.

use std::collections::BTreeSet;
use std::path::Path;

use optree_core::data::{Attribute, AttributeSchema, Dataset, Instance};

use crate::error::{Error, Result};

/// How the label column is named on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

impl LabelColumn {
    /// A bare integer selects a column by position, anything else by name.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        }
    }

    fn resolve(&self, header: &[String]) -> Result<usize> {
        match self {
            LabelColumn::Last if !header.is_empty() => Ok(header.len() - 1),
            LabelColumn::Last => Err(Error::UnknownLabelColumn("<last>".into())),
            LabelColumn::Index(i) if *i < header.len() => Ok(*i),
            LabelColumn::Index(i) => Err(Error::UnknownLabelColumn(i.to_string())),
            LabelColumn::Name(n) => header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::UnknownLabelColumn(n.clone())),
        }
    }
}

/// Category names behind the integer codes of a [`Dataset`].
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Categories {
    pub attributes: Vec<(String, Vec<String>)>,
    pub label: String,
    pub classes: Vec<String>,
}

impl Categories {
    pub fn schema(&self) -> Result<AttributeSchema> {
        let attrs = self
            .attributes
            .iter()
            .map(|(n, c)| Attribute::new(n.clone(), c.len()))
            .collect();
        Ok(AttributeSchema::new(attrs, self.classes.len())?)
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub categories: Categories,
}

/// Reads `path`. Without `explicit`, each column's categories are its
/// distinct values in lexicographic order; with it, values are looked up in
/// the given category lists and unknown ones are rejected.
pub fn parse_csv(
    path: &Path,
    label_column: &LabelColumn,
    explicit: Option<&Categories>,
) -> Result<LoadedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|source| csv_error(path, source))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|source| csv_error(path, source))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = label_column.resolve(&header)?;
    let mut cells: Vec<Vec<String>> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|source| csv_error(path, source))?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                path: path.into(),
                row: row + 1,
                got: record.len(),
                expected: header.len(),
            });
        }
        let values: Vec<String> = record.iter().map(|c| c.trim().to_string()).collect();
        if let Some(col) = values.iter().position(String::is_empty) {
            return Err(Error::EmptyCell {
                path: path.into(),
                row: row + 1,
                column: header[col].clone(),
            });
        }
        cells.push(values);
    }
    if cells.is_empty() {
        return Err(Error::EmptyDataset(path.into()));
    }

    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != label_idx).collect();
    let categories = match explicit {
        Some(c) => c.clone(),
        None => {
            let distinct = |col: usize| -> Vec<String> {
                let set: BTreeSet<&str> = cells.iter().map(|r| r[col].as_str()).collect();
                set.into_iter().map(str::to_string).collect()
            };
            Categories {
                attributes: feature_cols
                    .iter()
                    .map(|&c| (header[c].clone(), distinct(c)))
                    .collect(),
                label: header[label_idx].clone(),
                classes: distinct(label_idx),
            }
        }
    };
    if categories.attributes.len() != feature_cols.len() {
        return Err(Error::Config(format!(
            "{}: {} feature columns, schema has {}",
            path.display(),
            feature_cols.len(),
            categories.attributes.len()
        )));
    }
    let lookup = |col: usize, list: &[String], value: &str| -> Result<usize> {
        list.iter()
            .position(|v| v == value)
            .ok_or_else(|| Error::UnknownCategory {
                path: path.into(),
                column: header[col].clone(),
                value: value.to_string(),
            })
    };
    let mut rows = Vec::with_capacity(cells.len());
    for r in &cells {
        let values = feature_cols
            .iter()
            .zip(&categories.attributes)
            .map(|(&c, (_, list))| lookup(c, list, &r[c]))
            .collect::<Result<Vec<_>>>()?;
        let label = lookup(label_idx, &categories.classes, &r[label_idx])?;
        rows.push(Instance::new(values, label));
    }
    let dataset = Dataset::new(categories.schema()?, rows)?;
    Ok(LoadedDataset {
        dataset,
        categories,
    })
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    match source.kind() {
        csv::ErrorKind::Io(_) => match source.into_kind() {
            csv::ErrorKind::Io(e) => Error::Io {
                path: path.into(),
                source: e,
            },
            _ => unreachable!(),
        },
        _ => Error::Csv {
            path: path.into(),
            source,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_rows() {
        let f = file("a,class\nx,0\ny,1\nx,1\n");
        let d = parse_csv(f.path(), &LabelColumn::Name("class".into()), None).unwrap();
        assert_eq!(d.dataset.schema().num_attributes(), 1);
        assert_eq!(d.dataset.schema().cardinality(0), 2);
        assert_eq!(d.dataset.schema().num_classes(), 2);
        assert_eq!(d.dataset.len(), 3);
        assert_eq!(d.dataset.rows()[1], Instance::new(vec![1], 1));
    }

    #[test]
    fn single_valued_column_is_unsplittable() {
        let f = file("a,b,y\nk,p,0\nk,q,1\n");
        let d = parse_csv(f.path(), &LabelColumn::Last, None).unwrap();
        assert_eq!(d.dataset.schema().cardinality(0), 1);
        assert!(!d.dataset.schema().is_splittable(0));
    }

    #[test]
    fn errors() {
        let f = file("a,class\nx,0\ny,1\n");
        assert!(matches!(
            parse_csv(f.path(), &LabelColumn::Name("label".into()), None),
            Err(Error::UnknownLabelColumn(_))
        ));
        assert!(matches!(
            parse_csv(Path::new("/nonexistent/file.csv"), &LabelColumn::Last, None),
            Err(Error::Io { .. })
        ));
        let empty = file("a,class\n");
        assert!(matches!(
            parse_csv(empty.path(), &LabelColumn::Last, None),
            Err(Error::EmptyDataset(_))
        ));
        let train = parse_csv(f.path(), &LabelColumn::Last, None).unwrap();
        let other = file("a,class\nz,0\n");
        assert!(matches!(
            parse_csv(other.path(), &LabelColumn::Last, Some(&train.categories)),
            Err(Error::UnknownCategory { .. })
        ));
    }

    #[test]
    fn lexicographic_category_order() {
        let f = file("a,y\n2,b\n10,a\n2,a\n");
        let d = parse_csv(f.path(), &LabelColumn::Index(1), None).unwrap();
        assert_eq!(d.categories.attributes[0].1, vec!["10", "2"]);
        assert_eq!(d.dataset.rows()[0], Instance::new(vec![1], 1));
    }
}
