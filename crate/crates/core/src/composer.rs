//! Building schemes from schemes.

use crate::scheme::{Product, Scheme};

/// Tensor (Kronecker) product of two schemes.
///
/// For ⟨n1,m1,p1⟩ and ⟨n2,m2,p2⟩ the result solves ⟨n1·n2, m1·m2, p1·p2⟩
/// with one product per pair `(k1, k2)`, listed with `k1` outer. Indices
/// pair row-major, `(i1, i2) -> i1 * n2 + i2`, so `s1` acts on the outer
/// block grid exactly as one level of [`crate::evaluator::multiply_recursive`].
pub fn tensor(s1: &Scheme, s2: &Scheme) -> Scheme {
    let mut products = Vec::with_capacity(s1.rank() * s2.rank());
    for p1 in s1.products() {
        for p2 in s2.products() {
            products.push(Product::new(p1.alpha.kron(&p2.alpha), p1.beta.kron(&p2.beta), p1.gamma.kron(&p2.gamma)));
        }
    }
    Scheme::new(s1.n() * s2.n(), s1.m() * s2.m(), s1.p() * s2.p(), products).expect("Kronecker shapes are consistent")
}

/// Cyclic symmetry of the matrix multiplication tensor: an ⟨n,m,p⟩ scheme
/// becomes an ⟨m,p,n⟩ scheme via `(alpha, beta, gamma) -> (beta, gammaᵀ, alphaᵀ)`.
///
/// Three rotations give back the original products.
pub fn rotate(s: &Scheme) -> Scheme {
    let products = s
        .products()
        .iter()
        .map(|prod| Product::new(prod.beta.clone(), prod.gamma.transpose(), prod.alpha.transpose()))
        .collect();
    Scheme::new(s.m(), s.p(), s.n(), products).expect("rotated shapes are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::verifier::verify;

    #[test]
    fn strassen_squared() {
        let s = fixtures::strassen();
        let t = tensor(&s, &s);
        assert_eq!(t.dims(), (4, 4, 4));
        assert_eq!(t.rank(), 49);
        assert!(verify(&t));
    }

    #[test]
    fn unit_of_tensoring() {
        let s = fixtures::strassen();
        let one = Scheme::standard(1, 1, 1);
        assert_eq!(tensor(&one, &s), s);
        assert_eq!(tensor(&s, &one), s);
    }

    #[test]
    fn standard_times_strassen() {
        let t = tensor(&Scheme::standard(2, 2, 2), &fixtures::strassen());
        assert_eq!(t.rank(), 56);
        assert!(verify(&t));
    }

    #[test]
    fn tensor_of_standard_is_standard_up_to_order() {
        let t = tensor(&Scheme::standard(2, 1, 3), &Scheme::standard(1, 2, 2));
        assert_eq!(t.canonical_hash(), Scheme::standard(2, 2, 6).canonical_hash());
    }

    #[test]
    fn all_pairs_compose_correctly() {
        let pool = [Scheme::standard(2, 2, 2), fixtures::strassen(), Scheme::standard(2, 3, 2)];
        for a in &pool {
            for b in &pool {
                let t = tensor(a, b);
                assert_eq!(t.rank(), a.rank() * b.rank());
                assert!(verify(&t));
            }
        }
    }

    #[test]
    fn rotations() {
        let r = rotate(&Scheme::standard(2, 3, 4));
        assert_eq!(r.dims(), (3, 4, 2));
        assert_eq!(r.rank(), 24);
        assert!(verify(&r));

        let s = fixtures::strassen();
        let r = rotate(&s);
        assert_eq!(r.rank(), 7);
        assert!(verify(&r));

        for s in [Scheme::standard(2, 3, 4), fixtures::strassen(), tensor(&s, &Scheme::standard(1, 2, 3))] {
            let r3 = rotate(&rotate(&rotate(&s)));
            assert_eq!(r3.dims(), s.dims());
            assert_eq!(r3.canonical_hash(), s.canonical_hash());
            let mut cur = s.clone();
            for _ in 0..3 {
                cur = rotate(&cur);
                assert!(verify(&cur));
            }
        }
    }

    #[test]
    fn rotation_without_transpose_fails() {
        let s = Scheme::standard(2, 2, 2);
        let products =
            s.products().iter().map(|p| Product::new(p.beta.clone(), p.gamma.clone(), p.alpha.clone())).collect();
        assert!(!verify(&Scheme::new(2, 2, 2, products).unwrap()));
    }
}
