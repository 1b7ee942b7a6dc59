use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("fold count {k} out of range for {rows} rows")]
    FoldCount { k: usize, rows: usize },
    #[error("attribute {0} appears twice in a region key")]
    DuplicateAttribute(usize),
    #[error("class counts are all zero")]
    EmptyCounts,
    #[error("region {0} is not a leaf of this tree")]
    NotALeaf(usize),
    #[error("attribute {attribute} cannot split region {region}")]
    AttributeNotAvailable { region: usize, attribute: usize },
    #[error("empty child list")]
    NoChildren,
    #[error("search node {0} is already fully expanded")]
    AlreadyExpanded(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("stream exhausted")]
    StreamExhausted,
}

pub type Result<T> = core::result::Result<T, Error>;
