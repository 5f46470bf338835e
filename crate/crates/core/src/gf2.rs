//! Dense bit-packed matrices over GF(2).
//!
//! Rows are stored row-major, each row padded to a whole number of 64-bit
//! words. Bits past `cols` in the last word of a row are always zero, so
//! equality and hashing can work directly on the word storage.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::ShapeError;

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_per_row(cols: usize) -> usize {
    cols.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(cols: usize) -> u64 {
    match cols % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    /// All-zero `rows × cols` matrix.
    ///
    /// Panics if either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "BitMatrix dimensions must be at least 1x1");
        let stride = words_per_row(cols);
        Self { rows, cols, stride, words: vec![0; rows * stride] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    /// Matrix with a single one at `(row, col)`.
    pub fn unit(rows: usize, cols: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.set(row, col, true);
        m
    }

    /// Builds a matrix from 0/1 rows. Any nonzero entry counts as one.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self, ShapeError> {
        let r = rows.len();
        let c = rows.first().map(|row| row.as_ref().len()).unwrap_or(0);
        if r == 0 || c == 0 {
            return Err(ShapeError::Empty);
        }
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != c {
                return Err(ShapeError::Ragged { row: i, expected: c, found: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v != 0);
            }
        }
        Ok(m)
    }

    /// Rebuilds a matrix from its packed row words.
    ///
    /// Rejects storage with the wrong length or with set padding bits.
    pub fn from_words(rows: usize, cols: usize, words: Vec<u64>) -> Result<Self, ShapeError> {
        if rows == 0 || cols == 0 {
            return Err(ShapeError::Empty);
        }
        let stride = words_per_row(cols);
        if words.len() != rows * stride {
            return Err(ShapeError::WordCount { expected: rows * stride, found: words.len() });
        }
        let mask = tail_mask(cols);
        for r in 0..rows {
            if words[r * stride + stride - 1] & !mask != 0 {
                return Err(ShapeError::Padding { row: r });
            }
        }
        Ok(Self { rows, cols, stride, words })
    }

    /// Uniformly random matrix, fully determined by `seed`.
    pub fn random(rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(rows, cols, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        let mask = tail_mask(cols);
        for r in 0..rows {
            let row = m.row_words_mut(r);
            for w in row.iter_mut() {
                *w = rng.gen();
            }
            *row.last_mut().unwrap() &= mask;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows && col < self.cols, "index ({row},{col}) out of bounds");
        (self.words[row * self.stride + col / WORD_BITS] >> (col % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.rows && col < self.cols, "index ({row},{col}) out of bounds");
        let w = &mut self.words[row * self.stride + col / WORD_BITS];
        let bit = 1u64 << (col % WORD_BITS);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    #[inline]
    pub fn toggle(&mut self, row: usize, col: usize) {
        assert!(row < self.rows && col < self.cols, "index ({row},{col}) out of bounds");
        self.words[row * self.stride + col / WORD_BITS] ^= 1u64 << (col % WORD_BITS);
    }

    /// Packed words of one row, padding included.
    #[inline]
    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.words[row * self.stride..(row + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, row: usize) -> &mut [u64] {
        &mut self.words[row * self.stride..(row + 1) * self.stride]
    }

    /// Full packed storage, row after row.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Positions of the set entries in row-major order.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.rows).flat_map(move |r| {
            self.row_words(r)
                .iter()
                .enumerate()
                .flat_map(move |(wi, &w)| BitIter(w).map(move |b| (r, wi * WORD_BITS + b)))
        })
    }

    /// Entries flattened row-major into a single word, bit `i * cols + j`.
    /// Only defined for matrices with at most 64 entries.
    pub fn flat_bits(&self) -> Option<u64> {
        if self.rows * self.cols > WORD_BITS {
            return None;
        }
        let mut out = 0u64;
        for r in 0..self.rows {
            out |= self.words[r * self.stride] << (r * self.cols);
        }
        Some(out)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (r, c) in self.ones() {
            t.set(c, r, true);
        }
        t
    }

    pub fn add(&self, other: &Self) -> Result<Self, ShapeError> {
        self.check_same_shape(other)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        Ok(Self { words, ..*self })
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<(), ShapeError> {
        self.check_same_shape(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Classical product over GF(2).
    ///
    /// For every set entry `x[i][k]`, row `k` of `y` is XORed into row `i`
    /// of the result, a word at a time.
    pub fn mul_naive(&self, other: &Self) -> Result<Self, ShapeError> {
        if self.cols != other.rows {
            return Err(ShapeError::Product { left: self.shape(), right: other.shape() });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let stride = out.stride;
        for i in 0..self.rows {
            let dst = &mut out.words[i * stride..(i + 1) * stride];
            for (wi, &w) in self.row_words(i).iter().enumerate() {
                for b in BitIter(w) {
                    let src = other.row_words(wi * WORD_BITS + b);
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d ^= s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product with row-major index pairing:
    /// entry `(i1 * r2 + i2, j1 * c2 + j2)` is `self[i1][j1] & other[i2][j2]`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for (i1, j1) in self.ones() {
            for (i2, j2) in other.ones() {
                out.set(i1 * other.rows + i2, j1 * other.cols + j2, true);
            }
        }
        out
    }

    /// Copies the `rows × cols` window starting at `(row0, col0)`. Parts of
    /// the window outside `self` read as zero.
    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(rows, cols);
        let r_end = (row0 + rows).min(self.rows);
        if col0 >= self.cols {
            return out;
        }
        let mask = tail_mask(cols);
        for r in row0..r_end {
            let src = self.row_words(r);
            let dst = out.row_words_mut(r - row0);
            for (w, d) in dst.iter_mut().enumerate() {
                *d = read_bits(src, col0 + w * WORD_BITS);
            }
            *dst.last_mut().unwrap() &= mask;
        }
        out
    }

    /// Writes `src` into `self` at `(row0, col0)`, clipped to `self`'s bounds.
    pub fn set_block(&mut self, row0: usize, col0: usize, src: &Self) {
        let r_end = (row0 + src.rows).min(self.rows);
        if col0 >= self.cols {
            return;
        }
        let width = src.cols.min(self.cols - col0);
        for r in row0..r_end {
            let stride = self.stride;
            let dst = &mut self.words[r * stride..(r + 1) * stride];
            let row = src.row_words(r - row0);
            let mut done = 0;
            while done < width {
                let take = (width - done).min(WORD_BITS);
                let bits = row[done / WORD_BITS];
                write_bits(dst, col0 + done, bits, take);
                done += take;
            }
        }
    }

    /// Copy with every dimension grown (zero-filled) or truncated.
    pub fn resized(&self, rows: usize, cols: usize) -> Self {
        self.block(0, 0, rows, cols)
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), ShapeError> {
        if self.shape() != other.shape() {
            return Err(ShapeError::Mismatch { left: self.shape(), right: other.shape() });
        }
        Ok(())
    }
}

/// 64 bits of `row` starting at bit `start`; bits past the end read as zero.
#[inline]
fn read_bits(row: &[u64], start: usize) -> u64 {
    let w = start / WORD_BITS;
    let s = start % WORD_BITS;
    let lo = row.get(w).copied().unwrap_or(0);
    if s == 0 {
        return lo;
    }
    let hi = row.get(w + 1).copied().unwrap_or(0);
    (lo >> s) | (hi << (WORD_BITS - s))
}

/// Overwrites `len` bits of `row` starting at bit `start` with the low bits of `bits`.
#[inline]
fn write_bits(row: &mut [u64], start: usize, bits: u64, len: usize) {
    let value = if len == WORD_BITS { bits } else { bits & ((1u64 << len) - 1) };
    let keep = if len == WORD_BITS { 0 } else { !((1u64 << len) - 1) };
    let w = start / WORD_BITS;
    let s = start % WORD_BITS;
    row[w] = (row[w] & !(!keep << s)) | (value << s);
    if s != 0 && s + len > WORD_BITS {
        let spill = s + len - WORD_BITS;
        let m = (1u64 << spill) - 1;
        row[w + 1] = (row[w + 1] & !m) | (value >> (WORD_BITS - s));
    }
}

/// Iterates the indices of set bits in a word, lowest first.
#[derive(Clone, Copy)]
pub(crate) struct BitIter(pub(crate) u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                write!(f, "{}", self.get(r, c) as u8)?;
            }
        }
        write!(f, "]")
    }
}

/// Plain-text grid: one row per line, entries `0`/`1` separated by spaces.
impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c > 0 {
                    f.write_str(" ")?;
                }
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

/// Error from parsing a 0/1 grid.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("line {line}: expected 0 or 1, found '{found}'")]
    BadCell { line: usize, found: String },
    #[error("line {line}: {found} columns, expected {expected}")]
    Ragged { line: usize, found: usize, expected: usize },
    #[error("empty grid")]
    Empty,
}

/// Reads the [`fmt::Display`] format: one row per line, cells `0`/`1`
/// separated by whitespace. Blank lines are ignored.
impl std::str::FromStr for BitMatrix {
    type Err = GridError;

    fn from_str(text: &str) -> Result<Self, GridError> {
        let mut rows: Vec<Vec<bool>> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|cell| match cell {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(GridError::BadCell { line: line_no, found: other.to_string() }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(GridError::Ragged { line: line_no, found: row.len(), expected: first.len() });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(GridError::Empty);
        }
        let mut m = BitMatrix::zeros(rows.len(), rows[0].len());
        for (r, row) in rows.iter().enumerate() {
            for (c, &bit) in row.iter().enumerate() {
                if bit {
                    m.set(r, c, true);
                }
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip() {
        let m = BitMatrix::random(5, 7, 3);
        let text = m.to_string();
        assert_eq!(text.parse::<BitMatrix>().unwrap(), m);
        assert_eq!("1 0\n\n0 1\n".parse::<BitMatrix>().unwrap(), BitMatrix::identity(2));
        assert!(matches!("1 0\n1\n".parse::<BitMatrix>(), Err(GridError::Ragged { line: 2, .. })));
        assert!(matches!("1 2\n".parse::<BitMatrix>(), Err(GridError::BadCell { line: 1, .. })));
        assert_eq!("\n".parse::<BitMatrix>(), Err(GridError::Empty));
    }

    fn m(rows: &[&[u8]]) -> BitMatrix {
        BitMatrix::from_rows(rows).unwrap()
    }

    // Scalar triple loop, independent of the word-parallel path.
    fn scalar_product(x: &BitMatrix, y: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(x.rows(), y.cols());
        for i in 0..x.rows() {
            for j in 0..y.cols() {
                let mut acc = false;
                for k in 0..x.cols() {
                    acc ^= x.get(i, k) & y.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    #[test]
    fn add_examples() {
        let i2 = BitMatrix::identity(2);
        assert_eq!(i2.add(&i2).unwrap(), BitMatrix::zeros(2, 2));
        let x = m(&[&[1, 1], &[0, 1]]);
        let y = m(&[&[0, 1], &[1, 1]]);
        assert_eq!(x.add(&y).unwrap(), m(&[&[1, 0], &[1, 0]]));
        let r = BitMatrix::random(7, 70, 3);
        assert_eq!(r.add(&BitMatrix::zeros(7, 70)).unwrap(), r);
    }

    #[test]
    fn add_shape_error() {
        let err = BitMatrix::zeros(2, 3).add(&BitMatrix::zeros(3, 2)).unwrap_err();
        assert!(matches!(err, ShapeError::Mismatch { .. }));
    }

    #[test]
    fn mul_examples() {
        let x = m(&[&[1, 1], &[0, 1]]);
        let y = m(&[&[1, 0], &[1, 1]]);
        let expected = m(&[&[0, 1], &[1, 1]]);
        assert_eq!(x.mul_naive(&y).unwrap(), expected);
        assert_eq!(scalar_product(&x, &y), expected);

        let r = BitMatrix::random(9, 130, 11);
        assert_eq!(BitMatrix::identity(9).mul_naive(&r).unwrap(), r);
        assert!(r.mul_naive(&BitMatrix::zeros(130, 5)).unwrap().is_zero());
    }

    #[test]
    fn mul_matches_scalar_loop() {
        for seed in 0..40 {
            let (a, b, c) = (1 + seed as usize % 7, 60 + seed as usize, 1 + (seed as usize * 13) % 140);
            let x = BitMatrix::random(a, b, seed);
            let y = BitMatrix::random(b, c, seed + 1000);
            assert_eq!(x.mul_naive(&y).unwrap(), scalar_product(&x, &y));
        }
    }

    #[test]
    fn mul_shape_error() {
        let err = BitMatrix::zeros(2, 3).mul_naive(&BitMatrix::zeros(2, 3)).unwrap_err();
        assert!(matches!(err, ShapeError::Product { .. }));
    }

    #[test]
    fn random_is_deterministic_and_seed_sensitive() {
        assert_eq!(BitMatrix::random(2, 2, 42), BitMatrix::random(2, 2, 42));
        let differing =
            (0..100u64).filter(|&s| BitMatrix::random(2, 2, 2 * s) != BitMatrix::random(2, 2, 2 * s + 1)).count();
        // 2x2 has only 16 values, so collisions happen at rate 1/16
        assert!(differing >= 80, "only {differing} of 100 seed pairs differ");
        let differing =
            (0..100u64).filter(|&s| BitMatrix::random(8, 8, 2 * s) != BitMatrix::random(8, 8, 2 * s + 1)).count();
        assert!(differing >= 99);
    }

    #[test]
    fn random_respects_padding() {
        for seed in 0..20 {
            let r = BitMatrix::random(1, 65, seed);
            assert_eq!(r.row_words(0).len(), 2);
            assert_eq!(r.row_words(0)[1] >> 1, 0);
        }
    }

    #[test]
    fn from_words_rejects_padding() {
        assert!(BitMatrix::from_words(1, 3, vec![0b111]).is_ok());
        assert!(matches!(BitMatrix::from_words(1, 3, vec![0b1000]), Err(ShapeError::Padding { row: 0 })));
        assert!(matches!(BitMatrix::from_words(2, 3, vec![0]), Err(ShapeError::WordCount { .. })));
    }

    #[test]
    fn block_roundtrip() {
        let x = BitMatrix::random(130, 200, 5);
        for (r0, c0, h, w) in [(0, 0, 64, 64), (64, 128, 66, 72), (3, 5, 10, 100), (100, 190, 64, 64)] {
            let b = x.block(r0, c0, h, w);
            for i in 0..h {
                for j in 0..w {
                    let inside = r0 + i < 130 && c0 + j < 200;
                    assert_eq!(b.get(i, j), inside && x.get(r0 + i, c0 + j));
                }
            }
            let mut y = BitMatrix::zeros(130, 200);
            y.set_block(r0, c0, &b);
            assert_eq!(y.block(r0, c0, h, w), b);
        }
    }

    #[test]
    fn kron_small() {
        let x = m(&[&[1, 0], &[1, 1]]);
        let y = m(&[&[0, 1]]);
        assert_eq!(x.kron(&y), m(&[&[0, 1, 0, 0], &[0, 1, 0, 1]]));
    }

    #[test]
    fn flat_bits_is_row_major() {
        let x = m(&[&[1, 0, 0], &[0, 0, 1]]);
        assert_eq!(x.flat_bits(), Some(0b100001));
        assert_eq!(BitMatrix::zeros(9, 9).flat_bits(), None);
    }
}
