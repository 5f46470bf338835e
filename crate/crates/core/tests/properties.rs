mod common;

use common::*;
use gf2mm::evaluator::apply_scheme_with;
use gf2mm::flipsearch::{flip_in_place, Direction, SearchState};
use gf2mm::ring::{Gf128, Gf16, Gf32, Gf64, Gf8};
use gf2mm::{
    brent_residual, find_moves, fixtures, multiply_recursive, parse_expression_file, read_canonical, read_scheme,
    rotate, serialize_expression, tensor, verify, write_canonical, BitMatrix, FlipMove, Gf2, Gf256, Gf4, Matrix,
    Product, RecursionPlan, RingElement, Scheme, Side,
};
use proptest::prelude::*;

fn bits(rows: usize, cols: usize, seed: u64) -> BitMatrix {
    BitMatrix::random(rows, cols, seed)
}

fn scalar_product(a: &BitMatrix, b: &BitMatrix) -> Vec<Vec<u8>> {
    naive_product(&to_rows(a), &to_rows(b), gf2_mul)
}

/// Verified scheme reached by a short seeded walk from a small start.
fn walked_scheme() -> impl Strategy<Value = Scheme> {
    (0usize..4, any::<u64>(), 0usize..60).prop_map(|(pick, seed, steps)| {
        let start = match pick {
            0 => Scheme::standard(2, 2, 2),
            1 => Scheme::standard(2, 3, 2),
            2 => Scheme::standard(3, 2, 2),
            _ => fixtures::strassen(),
        };
        let mut state = SearchState::new(start, seed).unwrap();
        for _ in 0..steps {
            if !state.step() {
                break;
            }
        }
        state.current
    })
}

/// Arbitrary, usually incorrect, scheme with small dimensions.
fn random_scheme() -> impl Strategy<Value = Scheme> {
    (1usize..=3, 1usize..=3, 1usize..=3, 0usize..=9, any::<u64>()).prop_map(|(n, m, p, r, seed)| {
        let products = (0..r as u64)
            .map(|k| {
                let s = seed.wrapping_add(k * 3);
                Product::new(bits(n, m, s), bits(m, p, s + 1), bits(n, p, s + 2))
            })
            .collect();
        Scheme::new(n, m, p, products).unwrap()
    })
}

macro_rules! field_laws {
    ($name:ident, $ty:ty) => {
        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]
            #[test]
            fn $name(a in 0usize..<$ty>::ORDER, b in 0usize..<$ty>::ORDER, c in 0usize..<$ty>::ORDER) {
                let (a, b, c) = (<$ty>::from_index(a), <$ty>::from_index(b), <$ty>::from_index(c));
                prop_assert_eq!(a.add(b), b.add(a));
                prop_assert_eq!(a.mul(b), b.mul(a));
                prop_assert_eq!(a.add(b).add(c), a.add(b.add(c)));
                prop_assert_eq!(a.mul(b).mul(c), a.mul(b.mul(c)));
                prop_assert_eq!(a.mul(b.add(c)), a.mul(b).add(a.mul(c)));
                prop_assert_eq!(a.add(a), <$ty>::zero());
                prop_assert_eq!(a.mul(<$ty>::one()), a);
                if a != <$ty>::zero() {
                    // a^(q-1) = 1 in a field of order q
                    let mut pow = <$ty>::one();
                    for _ in 0..<$ty>::ORDER - 1 {
                        pow = pow.mul(a);
                    }
                    prop_assert_eq!(pow, <$ty>::one());
                }
            }
        }
    };
}

field_laws!(gf2_field_laws, Gf2);
field_laws!(gf4_field_laws, Gf4);
field_laws!(gf8_field_laws, Gf8);
field_laws!(gf16_field_laws, Gf16);
field_laws!(gf32_field_laws, Gf32);
field_laws!(gf64_field_laws, Gf64);
field_laws!(gf128_field_laws, Gf128);
field_laws!(gf256_field_laws, Gf256);

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bit_matrix_addition(r in 1usize..=70, c in 1usize..=70, s in any::<u64>()) {
        let (a, b, d) = (bits(r, c, s), bits(r, c, s ^ 1), bits(r, c, s ^ 2));
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.add(&b).unwrap().add(&d).unwrap(), a.add(&b.add(&d).unwrap()).unwrap());
        prop_assert!(a.add(&a).unwrap().is_zero());
    }

    #[test]
    fn bit_matrix_product_matches_scalar_loops(n in 1usize..=40, m in 1usize..=70, p in 1usize..=70, s in any::<u64>()) {
        let (a, b) = (bits(n, m, s), bits(m, p, s ^ 7));
        let c = a.mul_naive(&b).unwrap();
        prop_assert_eq!(to_rows(&c), scalar_product(&a, &b));
        prop_assert_eq!(c.transpose(), b.transpose().mul_naive(&a.transpose()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bit_matrix_ring_laws(n in 1usize..=20, m in 1usize..=20, p in 1usize..=20, q in 1usize..=20, s in any::<u64>()) {
        let (a, b, c) = (bits(n, m, s), bits(m, p, s ^ 3), bits(p, q, s ^ 5));
        prop_assert_eq!(a.mul_naive(&b).unwrap().mul_naive(&c).unwrap(), a.mul_naive(&b.mul_naive(&c).unwrap()).unwrap());
        let b2 = bits(m, p, s ^ 9);
        prop_assert_eq!(
            a.mul_naive(&b.add(&b2).unwrap()).unwrap(),
            a.mul_naive(&b).unwrap().add(&a.mul_naive(&b2).unwrap()).unwrap()
        );
    }

    #[test]
    fn block_and_kron_agree_with_entries(r in 1usize..=6, c in 1usize..=6, r2 in 1usize..=12, c2 in 1usize..=12, s in any::<u64>()) {
        let (a, b) = (bits(r, c, s), bits(r2, c2, s ^ 11));
        let k = a.kron(&b);
        for i in 0..r {
            for j in 0..c {
                let blk = k.block(i * r2, j * c2, r2, c2);
                if a.get(i, j) { prop_assert_eq!(&blk, &b); } else { prop_assert!(blk.is_zero()); }
            }
        }
    }

    #[test]
    fn verifier_agrees_with_oracle(s in random_scheme()) {
        let report = brent_residual(&s);
        let (n, m, p) = s.dims();
        prop_assert_eq!(report.total_equations, (n * m) * (m * p) * (n * p));
        prop_assert_eq!(report.violations, brent_violations(&s));
        prop_assert_eq!(verify(&s), report.violations == 0);
    }

    #[test]
    fn walks_stay_correct(s in walked_scheme()) {
        prop_assert!(verify(&s));
        prop_assert_eq!(brent_violations(&s), 0);
    }

    #[test]
    fn normalize_is_idempotent(s in prop_oneof![walked_scheme(), random_scheme()]) {
        let once = s.normalize();
        prop_assert!(once.rank() <= s.rank());
        prop_assert!(once.is_normalized());
        prop_assert_eq!(once.normalize(), once.clone());
        prop_assert_eq!(brent_residual(&once).violations, brent_residual(&s).violations);
    }

    #[test]
    fn expression_round_trip(s in prop_oneof![walked_scheme(), random_scheme()]) {
        let used_m = s.products().iter()
            .flat_map(|p| p.alpha.ones().map(|(_, j)| j + 1).chain(p.beta.ones().map(|(i, _)| i + 1)))
            .max()
            .unwrap_or(1);
        let parsed = parse_expression_file(&serialize_expression(&s));
        if s.rank() == 0 {
            prop_assert!(parsed.is_err());
        } else if used_m == s.m() {
            prop_assert_eq!(parsed.unwrap().canonical_hash(), s.canonical_hash());
        } else {
            let back = parsed.unwrap();
            prop_assert_eq!(back.dims(), (s.n(), used_m, s.p()));
            prop_assert!(!verify(&s));
        }
    }

    #[test]
    fn canonical_round_trip(s in prop_oneof![walked_scheme(), random_scheme()]) {
        let bytes = write_canonical(&s);
        let back = read_canonical(&bytes).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(read_scheme(&bytes).unwrap(), s);
    }

    #[test]
    fn flips_preserve_correctness(s in walked_scheme(), pick in any::<prop::sample::Index>()) {
        let moves = find_moves(&s);
        prop_assume!(!moves.is_empty());
        let mv = moves[pick.index(moves.len())];
        let mut t = s.clone();
        flip_in_place(&mut t, &mv).unwrap();
        prop_assert_eq!(t.rank(), s.rank());
        prop_assert!(verify(&t));
        flip_in_place(&mut t, &mv).unwrap();
        prop_assert_eq!(t, s);
    }

    #[test]
    fn flip_rejects_unshared_pairs(s in random_scheme(), k in 0usize..9, l in 0usize..9, side in 0usize..3) {
        prop_assume!(k < s.rank() && l < s.rank() && k != l);
        let side = Side::ALL[side];
        prop_assume!(s.products()[k].mask(side) != s.products()[l].mask(side));
        let mut t = s.clone();
        let mv = FlipMove { k, l, shared: side, direction: Direction::Forward };
        prop_assert!(flip_in_place(&mut t, &mv).is_err());
        prop_assert_eq!(t, s);
    }

    #[test]
    fn composition_preserves_correctness(a in walked_scheme(), b in walked_scheme()) {
        let t = tensor(&a, &b);
        prop_assert_eq!(t.rank(), a.rank() * b.rank());
        prop_assert!(verify(&t));
        let r = rotate(&a);
        prop_assert!(verify(&r));
        prop_assert_eq!(rotate(&rotate(&r)).canonical_hash(), a.canonical_hash());
    }

    #[test]
    fn recursion_matches_naive(size in 1usize..=40, cutoff in 1usize..=6, s in any::<u64>()) {
        let plan = RecursionPlan::new(fixtures::strassen(), cutoff).unwrap();
        let (a, b) = (bits(size, size, s), bits(size, size, s ^ 13));
        let (c, counter) = multiply_recursive(&plan, &a, &b).unwrap();
        prop_assert_eq!(to_rows(&c), scalar_product(&a, &b));
        let layout = plan.layout(size);
        prop_assert!(layout.block <= cutoff);
        prop_assert_eq!(counter.base_multiplications, 7u64.pow(layout.levels as u32) * (layout.block as u64).pow(3));
        prop_assert_eq!(counter.leaf_products, 7u64.pow(layout.levels as u32));
    }

    #[test]
    fn block_recursion_counts_each_level(s in walked_scheme(), seed in any::<u64>()) {
        let (n, m, p) = s.dims();
        let a = Matrix::from_fn(n, m, |i, j| bits(2, 2, seed ^ (i * 8 + j) as u64));
        let b = Matrix::from_fn(m, p, |i, j| bits(2, 2, !seed ^ (i * 8 + j) as u64));
        let mut calls = 0;
        let c = apply_scheme_with(&s, &a, &b, |x, y| {
            calls += 1;
            x.mul_naive(y).unwrap()
        })
        .unwrap();
        prop_assert_eq!(calls, s.rank());
        let reference = Matrix::from_fn(n, p, |i, j| {
            (0..m).fold(BitMatrix::zeros(2, 2), |acc, k| acc.add(&a.get(i, k).mul_naive(b.get(k, j)).unwrap()).unwrap())
        });
        prop_assert_eq!(c, reference);
    }

    #[test]
    fn parser_is_total(text in "\\PC{0,200}") {
        let _ = parse_expression_file(&text);
    }

    #[test]
    fn parser_is_total_on_token_soup(parts in prop::collection::vec(prop::sample::select(vec![
        "m1", "m2", "m_3", "m[4]", "a11", "a_12", "a[2,1]", "a_{1,2}", "b21", "b_{2,2}", "c11", "c[1,2]",
        "c21", "c22", ":=", "=", "+", "*", "(", ")", ";", ",", "\n", "0", " ", "# note\n", "//x\n", "a0", "m0",
    ]), 0..60)) {
        let text: String = parts.concat();
        if let Ok(s) = parse_expression_file(&text) {
            // whatever parses must survive a round trip
            let back = parse_expression_file(&serialize_expression(&s)).unwrap();
            prop_assert_eq!(back.canonical_hash(), s.canonical_hash());
        }
    }

    #[test]
    fn canonical_reader_is_total(tail in prop::collection::vec(any::<u8>(), 0..300)) {
        let mut bytes = b"BMMS1".to_vec();
        bytes.extend(tail);
        if let Ok(s) = read_canonical(&bytes) {
            prop_assert_eq!(write_canonical(&s), bytes);
        }
    }
}
