//! Exact coefficient fields: prime fields `Fp<P>` and the rationals.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An exact field. Every operation is exact; there is no tolerance anywhere.
pub trait Field:
    Clone
    + Eq
    + Hash
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn from_i64(v: i64) -> Self;
    /// 0 for characteristic zero.
    fn characteristic() -> u64;
    /// Parses `a` or `a/b` with integer `a`, `b`.
    fn parse_scalar(s: &str) -> Option<Self>;
    /// Exact textual form that `parse_scalar` reads back.
    fn to_text(&self) -> String {
        self.to_string()
    }
}

/// Element of the prime field of order `P`. The representative is kept in `0..P`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fp<const P: u64>(u64);

impl<const P: u64> Fp<P> {
    pub fn new(v: i64) -> Self {
        Fp(v.rem_euclid(P as i64) as u64)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    fn pow(self, mut e: u64) -> Self {
        let mut base = self.0 as u128;
        let mut acc: u128 = 1;
        let m = P as u128;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            e >>= 1;
        }
        Fp(acc as u64)
    }
}

impl<const P: u64> fmt::Debug for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> fmt::Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> Add for Fp<P> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Fp(((self.0 as u128 + o.0 as u128) % P as u128) as u64)
    }
}

impl<const P: u64> Sub for Fp<P> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Fp(((self.0 as u128 + P as u128 - o.0 as u128) % P as u128) as u64)
    }
}

impl<const P: u64> Mul for Fp<P> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Fp(((self.0 as u128 * o.0 as u128) % P as u128) as u64)
    }
}

impl<const P: u64> Neg for Fp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Fp((P - self.0) % P)
    }
}

impl<const P: u64> Div for Fp<P> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.inv().expect("division by zero in Fp")
    }
}

impl<const P: u64> Zero for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl<const P: u64> One for Fp<P> {
    fn one() -> Self {
        Fp(1 % P)
    }
}

impl<const P: u64> Field for Fp<P> {
    fn inv(&self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            Some(self.pow(P - 2))
        }
    }

    fn from_i64(v: i64) -> Self {
        Fp::new(v)
    }

    fn characteristic() -> u64 {
        P
    }

    fn parse_scalar(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((a, b)) => {
                let a = Self::new(a.trim().parse::<i64>().ok()?);
                let b = Self::new(b.trim().parse::<i64>().ok()?);
                Some(a * b.inv()?)
            }
            None => Some(Self::new(s.parse::<i64>().ok()?)),
        }
    }
}

impl Field for BigRational {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn characteristic() -> u64 {
        0
    }

    fn parse_scalar(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((a, b)) => {
                let a = BigInt::from_str(a.trim()).ok()?;
                let b = BigInt::from_str(b.trim()).ok()?;
                if b.is_zero() {
                    return None;
                }
                Some(BigRational::new(a, b))
            }
            None => Some(BigRational::from_integer(BigInt::from_str(s).ok()?)),
        }
    }

    fn to_text(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            let sign = if self.is_negative() { "-" } else { "" };
            format!("{sign}{}/{}", self.numer().abs(), self.denom())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type F7 = Fp<7>;

    #[test]
    fn fp_arithmetic_wraps() {
        assert_eq!(F7::new(5) + F7::new(4), F7::new(2));
        assert_eq!(F7::new(2) - F7::new(5), F7::new(4));
        assert_eq!(-F7::new(3), F7::new(4));
        assert_eq!(F7::new(-1).value(), 6);
    }

    #[test]
    fn fp_inverse_is_exact() {
        for v in 1..7 {
            let x = F7::new(v);
            assert_eq!(x * x.inv().unwrap(), F7::one());
        }
        assert!(F7::zero().inv().is_none());
    }

    #[test]
    fn rational_parse_round_trip() {
        let q = BigRational::parse_scalar("-6/4").unwrap();
        assert_eq!(q.to_text(), "-3/2");
        assert_eq!(BigRational::parse_scalar(&q.to_text()).unwrap(), q);
        assert_eq!(BigRational::parse_scalar("5").unwrap().to_text(), "5");
        assert!(BigRational::parse_scalar("1/0").is_none());
    }

    #[test]
    fn fp_parse_fraction() {
        assert_eq!(F7::parse_scalar("1/2").unwrap() * F7::new(2), F7::one());
    }
}
