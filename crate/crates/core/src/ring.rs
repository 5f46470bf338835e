//! Coefficient domains of characteristic 2.
//!
//! [`CharTwo`] is what the evaluator needs from a value: addition and a
//! (not necessarily commutative) multiplication, with `x + x = 0`. Scalar
//! rings additionally implement [`RingElement`]; bit matrices implement
//! [`CharTwo`] so they can serve as blocks in recursive evaluation.

use std::fmt;

use rand::Rng;

use crate::gf2::BitMatrix;

pub trait CharTwo: Clone + PartialEq {
    fn plus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;

    /// The additive identity of the same shape as `self`, i.e. `self + self`.
    fn zero_like(&self) -> Self {
        self.plus(self)
    }
}

pub trait RingElement: Copy + PartialEq + Eq + fmt::Debug + Send + Sync + 'static {
    const NAME: &'static str;
    /// Number of elements, used for exhaustive checks on small rings.
    const ORDER: usize;

    fn zero() -> Self;
    fn one() -> Self;
    fn add(self, rhs: Self) -> Self;
    fn mul(self, rhs: Self) -> Self;
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self;
    /// Enumerates elements by index `0..ORDER`.
    fn from_index(i: usize) -> Self;
}

impl<T: RingElement> CharTwo for T {
    fn plus(&self, rhs: &Self) -> Self {
        self.add(*rhs)
    }

    fn times(&self, rhs: &Self) -> Self {
        self.mul(*rhs)
    }

    fn zero_like(&self) -> Self {
        T::zero()
    }
}

impl CharTwo for BitMatrix {
    fn plus(&self, rhs: &Self) -> Self {
        self.add(rhs).expect("block shapes agree")
    }

    fn times(&self, rhs: &Self) -> Self {
        self.mul_naive(rhs).expect("block shapes agree")
    }

    fn zero_like(&self) -> Self {
        BitMatrix::zeros(self.rows(), self.cols())
    }
}

/// Irreducible polynomials over GF(2) used to build GF(2^k), indexed by k.
/// Bit i is the coefficient of x^i.
pub const IRREDUCIBLE: [u16; 9] = [
    0,
    0b11,        // x + 1
    0b111,       // x^2 + x + 1
    0b1011,      // x^3 + x + 1
    0b1_0011,    // x^4 + x + 1
    0b10_0101,   // x^5 + x^2 + 1
    0b100_0011,  // x^6 + x + 1
    0b1000_0011, // x^7 + x + 1
    0x11b,       // x^8 + x^4 + x^3 + x + 1
];

/// GF(2^K) for `1 <= K <= 8`, as polynomials modulo [`IRREDUCIBLE`]`[K]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Gf2k<const K: u32>(u8);

pub type Gf2 = Gf2k<1>;
pub type Gf4 = Gf2k<2>;
pub type Gf8 = Gf2k<3>;
pub type Gf16 = Gf2k<4>;
pub type Gf32 = Gf2k<5>;
pub type Gf64 = Gf2k<6>;
pub type Gf128 = Gf2k<7>;
pub type Gf256 = Gf2k<8>;

impl<const K: u32> Gf2k<K> {
    const MASK: u16 = (1u16 << K) - 1;

    pub fn new(bits: u8) -> Self {
        assert!((1..=8).contains(&K), "GF(2^{K}) is not supported");
        assert!(u16::from(bits) <= Self::MASK, "{bits} is not an element of GF(2^{K})");
        Self(bits)
    }

    pub fn bits(self) -> u8 {
        self.0
    }
}

impl<const K: u32> fmt::Debug for Gf2k<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF{}({:#x})", 1u32 << K, self.0)
    }
}

impl<const K: u32> RingElement for Gf2k<K> {
    const NAME: &'static str = ["", "GF2", "GF4", "GF8", "GF16", "GF32", "GF64", "GF128", "GF256"][K as usize];
    const ORDER: usize = 1 << K;

    fn zero() -> Self {
        Self(0)
    }

    fn one() -> Self {
        Self(1)
    }

    fn add(self, rhs: Self) -> Self {
        Self(self.0 ^ rhs.0)
    }

    fn mul(self, rhs: Self) -> Self {
        let poly = IRREDUCIBLE[K as usize];
        let mut a = u16::from(self.0);
        let mut b = rhs.0;
        let mut acc = 0u16;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a >> K & 1 == 1 {
                a ^= poly;
            }
        }
        Self(acc as u8)
    }

    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self((rng.gen::<u16>() & Self::MASK) as u8)
    }

    fn from_index(i: usize) -> Self {
        Self::new(i as u8)
    }
}
