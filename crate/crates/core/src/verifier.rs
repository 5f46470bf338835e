//! Exact correctness check for schemes via the Brent equations.
//!
//! A scheme computes the matrix product over every ring of characteristic 2
//! iff for all index pairs
//!
//! ```text
//! Σ_k alpha_k[i][j] · beta_k[x][y] · gamma_k[u][v]  ≡  [j = x]·[i = u]·[y = v]   (mod 2)
//! ```
//!
//! Each coefficient position is turned into a bitset over the products, so
//! one equation is an AND of three bitsets followed by a popcount parity.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::evaluator::{apply_scheme, Matrix};
use crate::ring::{Gf128, Gf16, Gf2, Gf256, Gf32, Gf4, Gf64, Gf8, RingElement};
use crate::scheme::{Scheme, Side};

/// Position of one Brent equation, zero-based: the coefficient of
/// `a[i][j] · b[x][y]` in `c[u][v]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EquationIndex {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub c: (usize, usize),
}

impl fmt::Display for EquationIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a{},{}*b{},{} in c{},{}",
            self.a.0 + 1,
            self.a.1 + 1,
            self.b.0 + 1,
            self.b.1 + 1,
            self.c.0 + 1,
            self.c.1 + 1
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BrentReport {
    pub total_equations: usize,
    pub violations: usize,
    /// First violated equation in lexicographic `(i, j, x, y, u, v)` order.
    pub first_violation: Option<EquationIndex>,
}

impl BrentReport {
    pub fn is_correct(&self) -> bool {
        self.violations == 0
    }
}

/// Per coefficient position of one side, the set of products using it.
fn incidence(s: &Scheme, side: Side, rows: usize, cols: usize, words: usize) -> Vec<u64> {
    let mut sets = vec![0u64; rows * cols * words];
    for (k, prod) in s.products().iter().enumerate() {
        for (r, c) in prod.mask(side).ones() {
            sets[(r * cols + c) * words + k / 64] |= 1u64 << (k % 64);
        }
    }
    sets
}

pub fn brent_residual(s: &Scheme) -> BrentReport {
    let (n, m, p) = s.dims();
    let words = s.rank().div_ceil(64).max(1);
    let a_sets = incidence(s, Side::Alpha, n, m, words);
    let b_sets = incidence(s, Side::Beta, m, p, words);
    let c_sets = incidence(s, Side::Gamma, n, p, words);

    let mut violations = 0;
    let mut first_violation = None;
    let mut ab = vec![0u64; words];
    for i in 0..n {
        for j in 0..m {
            let a = &a_sets[(i * m + j) * words..][..words];
            for x in 0..m {
                for y in 0..p {
                    let b = &b_sets[(x * p + y) * words..][..words];
                    for w in 0..words {
                        ab[w] = a[w] & b[w];
                    }
                    for u in 0..n {
                        for v in 0..p {
                            let c = &c_sets[(u * p + v) * words..][..words];
                            let ones: u32 = ab.iter().zip(c).map(|(l, r)| (l & r).count_ones()).sum();
                            let expected = j == x && i == u && y == v;
                            if (ones & 1 == 1) != expected {
                                violations += 1;
                                first_violation.get_or_insert(EquationIndex { a: (i, j), b: (x, y), c: (u, v) });
                            }
                        }
                    }
                }
            }
        }
    }
    BrentReport { total_equations: (n * m) * (m * p) * (n * p), violations, first_violation }
}

/// True iff the scheme computes the matrix product over every ring of
/// characteristic 2.
pub fn verify(s: &Scheme) -> bool {
    brent_residual(s).is_correct()
}

/// Compares the scheme against the classical product on `trials` random
/// operand pairs over `R`. Deterministic per seed.
pub fn verify_randomized<R: RingElement>(s: &Scheme, trials: usize, seed: u64) -> bool {
    let (n, m, p) = s.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).all(|_| {
        let a = Matrix::<R>::random(n, m, &mut rng);
        let b = Matrix::<R>::random(m, p, &mut rng);
        let (c, _) = apply_scheme(s, &a, &b).expect("operands are built to the scheme's shape");
        c == a.mul_naive(&b).expect("shapes agree")
    })
}

/// Coefficient ring selectable at runtime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    Gf2,
    Gf4,
    Gf8,
    Gf16,
    Gf32,
    Gf64,
    Gf128,
    Gf256,
}

impl RingKind {
    pub const ALL: [RingKind; 8] = [
        RingKind::Gf2,
        RingKind::Gf4,
        RingKind::Gf8,
        RingKind::Gf16,
        RingKind::Gf32,
        RingKind::Gf64,
        RingKind::Gf128,
        RingKind::Gf256,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RingKind::Gf2 => Gf2::NAME,
            RingKind::Gf4 => Gf4::NAME,
            RingKind::Gf8 => Gf8::NAME,
            RingKind::Gf16 => Gf16::NAME,
            RingKind::Gf32 => Gf32::NAME,
            RingKind::Gf64 => Gf64::NAME,
            RingKind::Gf128 => Gf128::NAME,
            RingKind::Gf256 => Gf256::NAME,
        }
    }

    pub fn verify_randomized(self, s: &Scheme, trials: usize, seed: u64) -> bool {
        match self {
            RingKind::Gf2 => verify_randomized::<Gf2>(s, trials, seed),
            RingKind::Gf4 => verify_randomized::<Gf4>(s, trials, seed),
            RingKind::Gf8 => verify_randomized::<Gf8>(s, trials, seed),
            RingKind::Gf16 => verify_randomized::<Gf16>(s, trials, seed),
            RingKind::Gf32 => verify_randomized::<Gf32>(s, trials, seed),
            RingKind::Gf64 => verify_randomized::<Gf64>(s, trials, seed),
            RingKind::Gf128 => verify_randomized::<Gf128>(s, trials, seed),
            RingKind::Gf256 => verify_randomized::<Gf256>(s, trials, seed),
        }
    }
}

impl std::str::FromStr for RingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let wanted = s.trim().to_ascii_uppercase().replace(['(', ')'], "");
        RingKind::ALL
            .into_iter()
            .find(|k| k.name() == wanted)
            .ok_or_else(|| format!("unknown ring '{s}', expected one of GF2, GF4, ..., GF256"))
    }
}
