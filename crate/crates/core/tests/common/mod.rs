#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use gf2mm::{read_scheme, BitMatrix, Scheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load_fixture(name: &str) -> Result<Scheme, String> {
    let path = fixture_path(name);
    let bytes = fs::read(&path).map_err(|e| format!("cannot read fixture {}: {e}", path.display()))?;
    read_scheme(&bytes).map_err(|e| format!("fixture {name} does not parse: {e}"))
}

/// Brent violations counted straight from the mask entries, one equation
/// at a time.
pub fn brent_violations(s: &Scheme) -> usize {
    let (n, m, p) = s.dims();
    let mut bad = 0;
    for i in 0..n {
        for j in 0..m {
            for x in 0..m {
                for y in 0..p {
                    for u in 0..n {
                        for v in 0..p {
                            let mut sum = false;
                            for prod in s.products() {
                                sum ^= prod.alpha.get(i, j) && prod.beta.get(x, y) && prod.gamma.get(u, v);
                            }
                            let want = j == x && i == u && y == v;
                            bad += usize::from(sum != want);
                        }
                    }
                }
            }
        }
    }
    bad
}

/// GF(4) = GF(2)[w]/(w² + w + 1), elements as 2-bit integers.
pub fn gf4_mul(a: u8, b: u8) -> u8 {
    let mut r = 0u8;
    for bit in 0..2 {
        if b >> bit & 1 == 1 {
            r ^= a << bit;
        }
    }
    if r & 0b100 != 0 {
        r ^= 0b111;
    }
    r
}

/// Schoolbook product with a caller-supplied field multiplication.
pub fn naive_product(a: &[Vec<u8>], b: &[Vec<u8>], mul: impl Fn(u8, u8) -> u8) -> Vec<Vec<u8>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0u8; p]; n];
    for i in 0..n {
        for k in 0..m {
            for j in 0..p {
                c[i][j] ^= mul(a[i][k], b[k][j]);
            }
        }
    }
    c
}

pub fn gf2_mul(a: u8, b: u8) -> u8 {
    a & b
}

pub fn to_rows(m: &BitMatrix) -> Vec<Vec<u8>> {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| u8::from(m.get(r, c))).collect()).collect()
}

pub fn random_rows(rows: usize, cols: usize, order: u8, rng: &mut ChaCha8Rng) -> Vec<Vec<u8>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0..order)).collect()).collect()
}

/// A pool of verified schemes of assorted shapes: flip walks from classical
/// schemes, tensors and rotations, some with a dimension above 9.
pub fn generated_schemes(count: usize, seed: u64) -> Vec<Scheme> {
    use gf2mm::flipsearch::SearchState;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let base = match out.len() % 5 {
            0 => Scheme::standard(rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3)),
            1 => gf2mm::tensor(
                &gf2mm::fixtures::strassen(),
                &Scheme::standard(rng.gen_range(1..=2), 1, rng.gen_range(1..=2)),
            ),
            2 => Scheme::standard(rng.gen_range(10..=11), 1, rng.gen_range(1..=2)),
            3 => gf2mm::rotate(&Scheme::standard(2, 3, rng.gen_range(1..=4))),
            _ => Scheme::standard(2, 2, 2),
        };
        let mut state = SearchState::new(base, rng.gen()).expect("generated starts verify");
        let steps = rng.gen_range(0..40);
        for _ in 0..steps {
            if !state.step() {
                break;
            }
        }
        out.push(state.current);
    }
    out
}
