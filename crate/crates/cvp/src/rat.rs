//! Exact rational scalars for the solvers.
//!
//! The simplex and min-cost flow implementations are generic over [`Scalar`]
//! so the same pivoting/augmenting code runs either on arbitrary-precision
//! rationals ([`BigRational`], the default everywhere in the public API) or
//! on [`Rat128`], a reduced `i128` fraction that is roughly an order of
//! magnitude faster and is used by the exhaustive test sweeps, where all
//! intermediate values are provably tiny. `Rat128` uses checked arithmetic
//! and panics on overflow, so it can never silently produce a wrong result.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;

/// Exact rational arithmetic interface shared by the LP and flow solvers.
///
/// All operations must be exact; implementations must never round.
pub trait Scalar: Clone + Ord + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Exact conversion from an arbitrary-precision rational, `None` if the
    /// value does not fit this representation.
    fn from_big_rational(r: &BigRational) -> Option<Self>;
    fn to_big_rational(&self) -> BigRational;
    fn to_f64(&self) -> f64;

    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn div_by(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;

    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn is_integer(&self) -> bool;
}

impl Scalar for BigRational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_big_rational(r: &BigRational) -> Option<Self> {
        Some(r.clone())
    }
    fn to_big_rational(&self) -> BigRational {
        self.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn plus(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div_by(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_integer(&self) -> bool {
        BigRational::is_integer(self)
    }
}

/// Reduced fraction over `i128` with overflow-checked arithmetic.
///
/// Invariants: `den > 0` and `gcd(|num|, den) == 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rat128 {
    num: i128,
    den: i128,
}

impl Rat128 {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "rational with zero denominator");
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = num.gcd(&den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        Rat128 { num, den }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    fn checked(v: Option<i128>) -> i128 {
        v.expect("Rat128 overflow: value exceeds 128-bit exact range")
    }
}

impl Scalar for Rat128 {
    fn zero() -> Self {
        Rat128 { num: 0, den: 1 }
    }
    fn one() -> Self {
        Rat128 { num: 1, den: 1 }
    }
    fn from_i64(v: i64) -> Self {
        Rat128 { num: v as i128, den: 1 }
    }
    fn from_big_rational(r: &BigRational) -> Option<Self> {
        let num = r.numer().to_i128()?;
        let den = r.denom().to_i128()?;
        Some(Rat128::new(num, den))
    }
    fn to_big_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }
    fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn plus(&self, rhs: &Self) -> Self {
        let g = self.den.gcd(&rhs.den);
        let lhs_scale = rhs.den / g;
        let rhs_scale = self.den / g;
        let num = Self::checked(
            Self::checked(self.num.checked_mul(lhs_scale))
                .checked_add(Self::checked(rhs.num.checked_mul(rhs_scale))),
        );
        let den = Self::checked(self.den.checked_mul(lhs_scale));
        Rat128::new(num, den)
    }
    fn minus(&self, rhs: &Self) -> Self {
        self.plus(&rhs.negated())
    }
    fn times(&self, rhs: &Self) -> Self {
        // Cross-reduce before multiplying to keep intermediates small.
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let num = Self::checked((self.num / g1).checked_mul(rhs.num / g2));
        let den = Self::checked((self.den / g2).checked_mul(rhs.den / g1));
        Rat128 { num, den }
    }
    fn div_by(&self, rhs: &Self) -> Self {
        assert!(rhs.num != 0, "division by zero rational");
        let (rnum, rden) = if rhs.num < 0 { (-rhs.den, -rhs.num) } else { (rhs.den, rhs.num) };
        self.times(&Rat128 { num: rnum, den: rden })
    }
    fn negated(&self) -> Self {
        Rat128 { num: -self.num, den: self.den }
    }

    fn is_zero(&self) -> bool {
        self.num == 0
    }
    fn is_positive(&self) -> bool {
        self.num > 0
    }
    fn is_negative(&self) -> bool {
        self.num < 0
    }
    fn is_integer(&self) -> bool {
        self.den == 1
    }
}

impl PartialOrd for Rat128 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat128 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // den > 0 on both sides, so cross-multiplication preserves order.
        let lhs = Self::checked(self.num.checked_mul(other.den));
        let rhs = Self::checked(other.num.checked_mul(self.den));
        lhs.cmp(&rhs)
    }
}

impl fmt::Debug for Rat128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Display for Rat128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
