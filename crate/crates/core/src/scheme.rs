//! Bilinear multiplication schemes for the ⟨n, m, p⟩ problem.
//!
//! A scheme computes `C = A·B` (A is n×m, B is m×p) as
//!
//! ```text
//! m_k    = (Σ alpha_k[i][j] · a[i][j]) · (Σ beta_k[x][y] · b[x][y])
//! c[u][v] = Σ_k gamma_k[u][v] · m_k
//! ```
//!
//! with 0/1 coefficient masks. Whether it actually computes the matrix
//! product is decided by [`crate::verifier`], not by this type.

use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::ShapeError;
use crate::gf2::BitMatrix;

/// Which factor of a product a mask belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alpha,
    Beta,
    Gamma,
}

impl Side {
    pub const ALL: [Side; 3] = [Side::Alpha, Side::Beta, Side::Gamma];

    /// The other two sides, in cyclic order after `self`.
    pub fn others(self) -> (Side, Side) {
        match self {
            Side::Alpha => (Side::Beta, Side::Gamma),
            Side::Beta => (Side::Gamma, Side::Alpha),
            Side::Gamma => (Side::Alpha, Side::Beta),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Alpha => "alpha",
            Side::Beta => "beta",
            Side::Gamma => "gamma",
        })
    }
}

/// One rank-one term `alpha ⊗ beta ⊗ gamma`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Product {
    pub alpha: BitMatrix,
    pub beta: BitMatrix,
    pub gamma: BitMatrix,
}

impl Product {
    pub fn new(alpha: BitMatrix, beta: BitMatrix, gamma: BitMatrix) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn mask(&self, side: Side) -> &BitMatrix {
        match side {
            Side::Alpha => &self.alpha,
            Side::Beta => &self.beta,
            Side::Gamma => &self.gamma,
        }
    }

    pub fn mask_mut(&mut self, side: Side) -> &mut BitMatrix {
        match side {
            Side::Alpha => &mut self.alpha,
            Side::Beta => &mut self.beta,
            Side::Gamma => &mut self.gamma,
        }
    }

    pub fn has_zero_mask(&self) -> bool {
        self.alpha.is_zero() || self.beta.is_zero() || self.gamma.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scheme {
    n: usize,
    m: usize,
    p: usize,
    products: Vec<Product>,
}

impl Scheme {
    /// Builds a scheme, checking every mask against the dimensions.
    ///
    /// An empty product list is accepted; it is the scheme of the zero map
    /// and only arises from [`Scheme::normalize`] cancelling everything.
    pub fn new(n: usize, m: usize, p: usize, products: Vec<Product>) -> Result<Self, ShapeError> {
        if n == 0 || m == 0 || p == 0 {
            return Err(ShapeError::Empty);
        }
        for (index, prod) in products.iter().enumerate() {
            if prod.alpha.shape() != (n, m) || prod.beta.shape() != (m, p) || prod.gamma.shape() != (n, p) {
                return Err(ShapeError::Product3 { index, n, m, p });
            }
        }
        Ok(Self { n, m, p, products })
    }

    /// The classical algorithm: one product `e_ij ⊗ e_jl ⊗ e_il` per
    /// scalar multiplication, in `(i, j, l)` lexicographic order.
    pub fn standard(n: usize, m: usize, p: usize) -> Self {
        assert!(n >= 1 && m >= 1 && p >= 1, "dimensions must be positive");
        let mut products = Vec::with_capacity(n * m * p);
        for i in 0..n {
            for j in 0..m {
                for l in 0..p {
                    products.push(Product::new(
                        BitMatrix::unit(n, m, i, j),
                        BitMatrix::unit(m, p, j, l),
                        BitMatrix::unit(n, p, i, l),
                    ));
                }
            }
        }
        Self { n, m, p, products }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n, self.m, self.p)
    }

    /// Number of multiplications, one per product.
    #[inline]
    pub fn rank(&self) -> usize {
        self.products.len()
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn into_products(self) -> Vec<Product> {
        self.products
    }

    /// Mutable access for in-crate transformations that keep shapes intact.
    pub(crate) fn products_mut(&mut self) -> &mut Vec<Product> {
        &mut self.products
    }

    pub fn is_normalized(&self) -> bool {
        self.products.iter().all(|p| !p.has_zero_mask()) && find_mergeable(&self.products).is_none()
    }

    /// Removes products that cannot contribute and merges products sharing
    /// two masks.
    ///
    /// A product with an all-zero mask is dropped. Two products that agree
    /// on two sides are replaced by one whose third mask is the sum of
    /// theirs, kept at the earlier position; if the sum is zero both go.
    /// Repeats until nothing applies, so the result is normalized.
    pub fn normalize(&self) -> Self {
        let mut products = self.products.clone();
        normalize_products(&mut products);
        Self { products, ..*self }
    }

    /// Order-insensitive digest of the dimensions and the multiset of products.
    pub fn canonical_hash(&self) -> SchemeDigest {
        let mut encoded: Vec<Vec<u8>> = self
            .products
            .iter()
            .map(|prod| {
                let mut buf = Vec::new();
                for side in Side::ALL {
                    for w in prod.mask(side).words() {
                        buf.extend_from_slice(&w.to_le_bytes());
                    }
                }
                buf
            })
            .collect();
        encoded.sort_unstable();
        let mut hasher = Sha256::new();
        for d in [self.n, self.m, self.p, self.rank()] {
            hasher.update((d as u64).to_le_bytes());
        }
        for e in &encoded {
            hasher.update(e);
        }
        SchemeDigest(hasher.finalize().into())
    }
}

/// First pair `(k, l)`, `k < l`, sharing two masks, with the remaining side.
pub(crate) fn find_mergeable(products: &[Product]) -> Option<(usize, usize, Side)> {
    for l in 1..products.len() {
        for k in 0..l {
            if let Some(side) = mergeable_side(&products[k], &products[l]) {
                return Some((k, l, side));
            }
        }
    }
    None
}

/// The side on which two products may differ while agreeing on the other two.
pub(crate) fn mergeable_side(a: &Product, b: &Product) -> Option<Side> {
    Side::ALL.into_iter().find(|&side| {
        let (s1, s2) = side.others();
        a.mask(s1) == b.mask(s1) && a.mask(s2) == b.mask(s2)
    })
}

pub(crate) fn normalize_products(products: &mut Vec<Product>) -> usize {
    let before = products.len();
    products.retain(|p| !p.has_zero_mask());
    while let Some((k, l, side)) = find_mergeable(products) {
        let other = products.remove(l);
        let merged = products[k].mask(side).add(other.mask(side)).expect("masks of one side share a shape");
        if merged.is_zero() {
            products.remove(k);
        } else {
            *products[k].mask_mut(side) = merged;
        }
    }
    before - products.len()
}

/// SHA-256 digest identifying a scheme up to product order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SchemeDigest(pub [u8; 32]);

impl fmt::Display for SchemeDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for SchemeDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SchemeDigest({self})")
    }
}
