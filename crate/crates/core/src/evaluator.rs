//! Executing schemes.
//!
//! [`apply_scheme`] runs one level of a scheme over any [`CharTwo`] value
//! type. [`multiply_recursive`] applies a square scheme recursively to
//! block-partitioned GF(2) matrices and counts what it multiplies.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::error::ShapeError;
use crate::gf2::BitMatrix;
use crate::ring::{CharTwo, Gf2, RingElement};
use crate::scheme::Scheme;
use crate::verifier::verify;

/// Dense row-major matrix whose entries are ring elements or blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, ShapeError> {
        if rows == 0 || cols == 0 {
            return Err(ShapeError::Empty);
        }
        if data.len() != rows * cols {
            return Err(ShapeError::WordCount { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<T> {
        self.data
    }
}

impl<T: CharTwo> Matrix<T> {
    /// Textbook product; entries are multiplied left factor first.
    pub fn mul_naive(&self, other: &Self) -> Result<Self, ShapeError> {
        if self.cols != other.rows {
            return Err(ShapeError::Product { left: (self.rows, self.cols), right: (other.rows, other.cols) });
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, l| {
            let mut acc = self.get(i, 0).times(other.get(0, l));
            for j in 1..self.cols {
                acc = acc.plus(&self.get(i, j).times(other.get(j, l)));
            }
            acc
        }))
    }
}

impl<R: RingElement> Matrix<R> {
    pub fn random<G: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut G) -> Self {
        Self::from_fn(rows, cols, |_, _| R::random(rng))
    }

    pub fn identity(size: usize) -> Self {
        Self::from_fn(size, size, |i, j| if i == j { R::one() } else { R::zero() })
    }
}

impl Matrix<Gf2> {
    pub fn from_bits(m: &BitMatrix) -> Self {
        Self::from_fn(m.rows(), m.cols(), |i, j| Gf2::new(m.get(i, j) as u8))
    }

    pub fn to_bits(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).bits() == 1);
            }
        }
        out
    }
}

impl Matrix<BitMatrix> {
    /// Splits `m` into a `grid × grid` array of `block × block` tiles.
    /// `m` must be exactly `grid * block` square.
    pub fn split(m: &BitMatrix, grid: usize, block: usize) -> Self {
        debug_assert_eq!(m.shape(), (grid * block, grid * block));
        Self::from_fn(grid, grid, |i, j| m.block(i * block, j * block, block, block))
    }

    pub fn join(&self) -> BitMatrix {
        let (bh, bw) = self.data[0].shape();
        let mut out = BitMatrix::zeros(self.rows * bh, self.cols * bw);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set_block(i * bh, j * bw, self.get(i, j));
            }
        }
        out
    }
}

/// Evaluates `s` on `a` (n×m) and `b` (m×p), returning `A·B` (if the scheme
/// is correct) and the number of multiplications performed, always
/// `rank(s)`.
pub fn apply_scheme<T: CharTwo>(s: &Scheme, a: &Matrix<T>, b: &Matrix<T>) -> Result<(Matrix<T>, usize), ShapeError> {
    let mut count = 0;
    let c = apply_scheme_with(s, a, b, |x, y| {
        count += 1;
        x.times(y)
    })?;
    Ok((c, count))
}

/// Like [`apply_scheme`], with the multiplication of the two linear forms
/// delegated to `mul`. Each product calls `mul` exactly once.
pub fn apply_scheme_with<T: CharTwo>(
    s: &Scheme,
    a: &Matrix<T>,
    b: &Matrix<T>,
    mut mul: impl FnMut(&T, &T) -> T,
) -> Result<Matrix<T>, ShapeError> {
    let (n, m, p) = s.dims();
    if (a.rows, a.cols, b.rows, b.cols) != (n, m, m, p) {
        return Err(ShapeError::Operands { n, m, p, a_rows: a.rows, a_cols: a.cols, b_rows: b.rows, b_cols: b.cols });
    }

    let linear_form = |mask: &BitMatrix, x: &Matrix<T>| -> T {
        let mut acc: Option<T> = None;
        for (i, j) in mask.ones() {
            let e = x.get(i, j);
            acc = Some(match acc {
                None => e.clone(),
                Some(v) => v.plus(e),
            });
        }
        acc.unwrap_or_else(|| x.get(0, 0).zero_like())
    };

    let products: Vec<T> = s
        .products()
        .iter()
        .map(|prod| {
            let left = linear_form(&prod.alpha, a);
            let right = linear_form(&prod.beta, b);
            mul(&left, &right)
        })
        .collect();

    // shape of an output entry, for entries no product reaches
    let zero = match products.first() {
        Some(m0) => m0.zero_like(),
        None => a.get(0, 0).times(b.get(0, 0)).zero_like(),
    };
    let mut out = vec![zero; n * p];
    for (prod, value) in s.products().iter().zip(&products) {
        for (u, v) in prod.gamma.ones() {
            let slot = &mut out[u * p + v];
            *slot = slot.plus(value);
        }
    }
    Ok(Matrix { rows: n, cols: p, data: out })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("recursion needs a square scheme, got {n}x{m}x{p}")]
    NotSquare { n: usize, m: usize, p: usize },
    #[error("base scheme fails verification; refusing to multiply with it")]
    Unverified,
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

/// How a size is laid out for recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Layout {
    /// Recursion depth above the naive leaves.
    pub levels: usize,
    /// Side length of the leaf blocks multiplied naively.
    pub block: usize,
    /// `base^levels * block`, the zero-padded working size.
    pub padded: usize,
}

/// A verified square base scheme plus the rule for when to stop recursing.
#[derive(Clone, Debug)]
pub struct RecursionPlan {
    scheme: Scheme,
    cutoff: usize,
    max_levels: Option<usize>,
}

impl RecursionPlan {
    /// Recurse while blocks are larger than `cutoff`.
    pub fn new(scheme: Scheme, cutoff: usize) -> Result<Self, PlanError> {
        let (n, m, p) = scheme.dims();
        if n != m || m != p {
            return Err(PlanError::NotSquare { n, m, p });
        }
        if cutoff == 0 {
            return Err(PlanError::ZeroCutoff);
        }
        if !verify(&scheme) {
            return Err(PlanError::Unverified);
        }
        Ok(Self { scheme, cutoff, max_levels: None })
    }

    /// Caps the recursion depth; blocks may then stay above the cutoff.
    pub fn with_max_levels(mut self, levels: usize) -> Self {
        self.max_levels = Some(levels);
        self
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Levels are added until the leaf block is at most `cutoff` (or the
    /// level cap is reached); the size is then zero-padded to
    /// `base^levels * block`.
    pub fn layout(&self, size: usize) -> Layout {
        let base = self.scheme.n();
        let mut levels = 0;
        let mut span = 1usize;
        while size.div_ceil(span) > self.cutoff && base > 1 && self.max_levels.is_none_or(|cap| levels < cap) {
            levels += 1;
            span *= base;
        }
        let block = size.div_ceil(span);
        Layout { levels, block, padded: span * block }
    }
}

/// Multiplication counts of a recursive run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MulCounter {
    /// Scalar GF(2) multiplications: leaf products times `block³`.
    pub base_multiplications: u64,
    /// Leaf block products handed to the naive kernel.
    pub leaf_products: u64,
    /// Block products formed at recursion level `l + 1`; `rank^(l+1)` each.
    pub block_multiplications: Vec<u64>,
}

pub fn multiply_recursive(
    plan: &RecursionPlan,
    a: &BitMatrix,
    b: &BitMatrix,
) -> Result<(BitMatrix, MulCounter), PlanError> {
    if a.rows() != a.cols() || a.shape() != b.shape() {
        return Err(ShapeError::Product { left: a.shape(), right: b.shape() }.into());
    }
    let size = a.rows();
    let layout = plan.layout(size);
    let mut counter = MulCounter { block_multiplications: vec![0; layout.levels], ..Default::default() };
    let (pa, pb) = if layout.padded == size {
        (a.clone(), b.clone())
    } else {
        (a.resized(layout.padded, layout.padded), b.resized(layout.padded, layout.padded))
    };
    let c = recurse(&plan.scheme, layout, 0, &pa, &pb, &mut counter);
    let c = if layout.padded == size { c } else { c.resized(size, size) };
    Ok((c, counter))
}

fn recurse(
    s: &Scheme,
    layout: Layout,
    level: usize,
    a: &BitMatrix,
    b: &BitMatrix,
    counter: &mut MulCounter,
) -> BitMatrix {
    if level == layout.levels {
        counter.leaf_products += 1;
        counter.base_multiplications += (layout.block as u64).pow(3);
        return a.mul_naive(b).expect("leaf blocks are square and equal");
    }
    let grid = s.n();
    let block = a.rows() / grid;
    let ga = Matrix::split(a, grid, block);
    let gb = Matrix::split(b, grid, block);
    let gc = apply_scheme_with(s, &ga, &gb, |x, y| {
        counter.block_multiplications[level] += 1;
        recurse(s, layout, level + 1, x, y, counter)
    })
    .expect("block grids match the scheme");
    gc.join()
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub size: usize,
    pub base_rank: usize,
    pub base_dim: usize,
    pub cutoff: usize,
    pub levels: usize,
    pub block: usize,
    pub padded: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub seconds: Vec<f64>,
    pub naive_seconds: Vec<f64>,
    pub counters: Vec<MulCounter>,
    pub base_multiplications: u64,
    pub classical_multiplications: u64,
    /// `size³ / base_multiplications`.
    pub ratio: f64,
    pub matches_naive: bool,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mean = |xs: &[f64]| if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 };
        writeln!(f, "size={}", self.size)?;
        writeln!(f, "base_dim={}", self.base_dim)?;
        writeln!(f, "base_rank={}", self.base_rank)?;
        writeln!(f, "cutoff={}", self.cutoff)?;
        writeln!(f, "levels={}", self.levels)?;
        writeln!(f, "block={}", self.block)?;
        writeln!(f, "padded={}", self.padded)?;
        writeln!(f, "repetitions={}", self.repetitions)?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "mean_seconds={:.6}", mean(&self.seconds))?;
        writeln!(f, "naive_mean_seconds={:.6}", mean(&self.naive_seconds))?;
        writeln!(f, "leaf_products={}", self.counters.first().map_or(0, |c| c.leaf_products))?;
        writeln!(f, "base_multiplications={}", self.base_multiplications)?;
        writeln!(f, "classical_multiplications={}", self.classical_multiplications)?;
        writeln!(f, "ratio={:.6}", self.ratio)?;
        writeln!(f, "matches_naive={}", self.matches_naive)
    }
}

/// Times `repetitions` recursive products of seeded random `size × size`
/// matrices against the naive kernel.
pub fn bench(plan: &RecursionPlan, size: usize, repetitions: usize, seed: u64) -> Result<BenchReport, PlanError> {
    if size == 0 {
        return Err(ShapeError::Empty.into());
    }
    let layout = plan.layout(size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = BitMatrix::random_with(size, size, &mut rng);
    let b = BitMatrix::random_with(size, size, &mut rng);

    let mut seconds = Vec::with_capacity(repetitions);
    let mut naive_seconds = Vec::with_capacity(repetitions);
    let mut counters = Vec::with_capacity(repetitions);
    let mut matches_naive = true;
    for _ in 0..repetitions {
        let t = Instant::now();
        let (c, counter) = multiply_recursive(plan, &a, &b)?;
        seconds.push(t.elapsed().as_secs_f64());
        let t = Instant::now();
        let reference = a.mul_naive(&b)?;
        naive_seconds.push(t.elapsed().as_secs_f64());
        matches_naive &= c == reference;
        counters.push(counter);
    }
    let base_multiplications = counters.first().map_or_else(
        || (plan.scheme.rank() as u64).pow(layout.levels as u32) * (layout.block as u64).pow(3),
        |c| c.base_multiplications,
    );
    let classical = (size as u64).pow(3);
    Ok(BenchReport {
        size,
        base_rank: plan.scheme.rank(),
        base_dim: plan.scheme.n(),
        cutoff: plan.cutoff,
        levels: layout.levels,
        block: layout.block,
        padded: layout.padded,
        repetitions,
        seed,
        seconds,
        naive_seconds,
        counters,
        base_multiplications,
        classical_multiplications: classical,
        ratio: classical as f64 / base_multiplications as f64,
        matches_naive,
    })
}
