//! Schemes shipped with the crate.

use crate::scheme::Scheme;
use crate::scheme_io::parse_expression_file;

pub const STRASSEN_EXP: &str = include_str!("../fixtures/strassen.exp");

/// Strassen's rank-7 ⟨2,2,2⟩ scheme (signs dropped, valid in characteristic 2).
pub fn strassen() -> Scheme {
    parse_expression_file(STRASSEN_EXP).expect("bundled fixture parses")
}
