//! Bilinear matrix multiplication schemes over rings of characteristic 2.
//!
//! * [`gf2`] and [`ring`]: bit-packed GF(2) matrices and small binary fields.
//! * [`scheme`]: the ⟨n,m,p⟩ scheme model.
//! * [`scheme_io`]: expression and canonical binary formats.
//! * [`verifier`]: exact Brent-equation check and randomized cross-checks.
//! * [`evaluator`]: one-level and recursive execution with multiplication counts.
//! * [`composer`]: tensor products and cyclic rotation of schemes.
//! * [`flipsearch`]: flip moves, reductions and seeded random walks.
//!
//! ```
//! use gf2mm::{fixtures, tensor, verify, brent_residual, RecursionPlan, multiply_recursive, BitMatrix};
//!
//! let s = fixtures::strassen();
//! let s49 = tensor(&s, &s);
//! assert!(verify(&s49));
//! assert_eq!(brent_residual(&s49).total_equations, 4096);
//!
//! let plan = RecursionPlan::new(s, 1).unwrap();
//! let (a, b) = (BitMatrix::random(20, 20, 1), BitMatrix::random(20, 20, 2));
//! let (c, counter) = multiply_recursive(&plan, &a, &b).unwrap();
//! assert_eq!(c, a.mul_naive(&b).unwrap());
//! assert_eq!(counter.base_multiplications, 7u64.pow(5));
//! ```

pub mod composer;
pub mod error;
pub mod evaluator;
pub mod fixtures;
pub mod flipsearch;
pub mod gf2;
pub mod ring;
pub mod scheme;
pub mod scheme_io;
pub mod verifier;

pub use composer::{rotate, tensor};
pub use error::ShapeError;
pub use evaluator::{apply_scheme, bench, multiply_recursive, BenchReport, Matrix, MulCounter, RecursionPlan};
pub use flipsearch::{find_moves, flip, random_walk, reduce_if_possible, FlipMove, SearchConfig, SearchStats};
pub use gf2::{BitMatrix, GridError};
pub use ring::{CharTwo, Gf2, Gf256, Gf4, RingElement};
pub use scheme::{Product, Scheme, SchemeDigest, Side};
pub use scheme_io::{parse_expression_file, read_canonical, read_scheme, serialize_expression, write_canonical};
pub use verifier::{brent_residual, verify, verify_randomized, BrentReport, RingKind};
