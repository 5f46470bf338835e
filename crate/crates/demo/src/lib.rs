//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes and returns plain strings so the page needs no glue
//! beyond the generated loader, and so the same functions run natively in
//! tests.

use gf2mm::{
    brent_residual, find_moves, fixtures, parse_expression_file, random_walk, serialize_expression, tensor, Scheme,
    SearchConfig,
};
use wasm_bindgen::prelude::*;

fn parse(label: &str, text: &str) -> Result<Scheme, String> {
    parse_expression_file(text).map_err(|e| format!("{label}: parse error: {e}"))
}

fn summary(s: &Scheme) -> String {
    let (n, m, p) = s.dims();
    let report = brent_residual(s);
    let status = if report.is_correct() {
        "brent=ok".to_string()
    } else {
        format!("brent=FAIL violations={}", report.violations)
    };
    let mut out = format!("dims={n}x{m}x{p} rank={} {status}\n", s.rank());
    out.push_str(&format!("equations={}\n", report.total_equations));
    if let Some(eq) = report.first_violation {
        out.push_str(&format!("first_violation={eq}\n"));
    }
    out.push_str(&format!("flip_moves={}\n", find_moves(s).len()));
    out.push_str(&format!("hash={}\n", s.canonical_hash()));
    out
}

/// Parses a scheme and reports its Brent status.
#[wasm_bindgen]
pub fn verify_scheme(text: &str) -> String {
    match parse("scheme", text) {
        Ok(s) => summary(&s),
        Err(e) => e,
    }
}

/// Tensor product of two schemes: a report followed by the composed scheme.
#[wasm_bindgen]
pub fn compose_schemes(first: &str, second: &str) -> String {
    let (a, b) = match (parse("first", first), parse("second", second)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let t = tensor(&a, &b);
    format!("{}\n{}\n", summary(&t), serialize_expression(&t))
}

/// Seeded flip walk: the search statistics followed by the best scheme.
#[wasm_bindgen]
pub fn flip_walk(text: &str, seed: u32, budget: u32, target: u32, restarts: u32) -> String {
    let start = match parse("start", text) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let config = SearchConfig::new(u64::from(budget), target as usize, u64::from(seed), u64::from(restarts.max(1)));
    match random_walk(&start, &config) {
        Ok((best, stats)) => format!("{stats}\n{}\n{}\n", summary(&best), serialize_expression(&best)),
        Err(e) => format!("start: {e}"),
    }
}

/// Built-in example schemes: `strassen` or `standard<n><m><p>` with
/// single-digit dimensions.
#[wasm_bindgen]
pub fn example_scheme(name: &str) -> String {
    if name == "strassen" {
        return serialize_expression(&fixtures::strassen());
    }
    let dims: Vec<usize> = name
        .strip_prefix("standard")
        .map(|d| d.chars().filter_map(|c| c.to_digit(10)).map(|d| d as usize).collect())
        .unwrap_or_default();
    match dims[..] {
        [n, m, p] if n > 0 && m > 0 && p > 0 => serialize_expression(&Scheme::standard(n, m, p)),
        _ => String::new(),
    }
}
