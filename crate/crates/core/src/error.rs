use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid: {0}")]
    Invalid(String),
    #[error("arity mismatch: expected {expected} processes, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("adversary state {0:?} allows no round (dead end)")]
    DeadEnd(String),
    #[error("unknown node {0}")]
    UnknownNode(u32),
    #[error("input vector {0} is not in the task's input set")]
    UnknownInput(String),
    #[error("task validation failed: {0}")]
    InvalidTask(String),
    #[error("not an execution cut: {0}")]
    InvalidCut(String),
    #[error("kernel method requires a rational task; this task is symbolic")]
    SymbolicTask,
    #[error("oracle bound exceeded: {product} candidate assignments > bound {bound}")]
    OracleBound { product: u128, bound: u128 },
    #[error("enumeration limit exceeded: {0}")]
    Limit(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}
