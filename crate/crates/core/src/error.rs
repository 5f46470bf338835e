use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("expected {expected} storage words, found {found}")]
    WordCount { expected: usize, found: usize },
    #[error("padding bits set in row {row}")]
    Padding { row: usize },
    #[error("shape mismatch: {}x{} vs {}x{}", left.0, left.1, right.0, right.1)]
    Mismatch { left: (usize, usize), right: (usize, usize) },
    #[error("cannot multiply {}x{} by {}x{}", left.0, left.1, right.0, right.1)]
    Product { left: (usize, usize), right: (usize, usize) },
    #[error("product {index} does not match scheme dimensions {n}x{m}x{p}")]
    Product3 { index: usize, n: usize, m: usize, p: usize },
    #[error("scheme is {n}x{m}x{p} but operands are {a_rows}x{a_cols} and {b_rows}x{b_cols}")]
    Operands { n: usize, m: usize, p: usize, a_rows: usize, a_cols: usize, b_rows: usize, b_cols: usize },
}
