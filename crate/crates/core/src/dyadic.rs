//! Exact dyadic rationals `p / 2^q`.
//!
//! Every measure in the tower (`2^-(k+1)` per column level, `2^-|w|` per
//! cylinder) and every Riesz coefficient (`2^-|ε|`) has a power-of-two
//! denominator, so the set is closed under all the arithmetic we need.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A rational number whose denominator is a power of two.
///
/// Stored normalized: the numerator is odd, or the exponent is zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: impl Into<BigInt>, exp: u32) -> Self {
        let mut d = Dyadic { num: num.into(), exp };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigInt::one(), exp: 0 }
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic { num: BigInt::one(), exp: k }
    }

    pub fn from_biguint(n: &BigUint) -> Self {
        Dyadic::new(BigInt::from_biguint(Sign::Plus, n.clone()), 0)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic { num: self.num.abs(), exp: self.exp }
    }

    /// Divides by `2^k` exactly.
    pub fn shr(&self, k: u32) -> Self {
        Dyadic::new(self.num.clone(), self.exp + k)
    }

    pub fn pow(&self, p: u32) -> Self {
        Dyadic::new(num_traits::pow(self.num.clone(), p as usize), self.exp * p)
    }

    pub fn mul_biguint(&self, n: &BigUint) -> Self {
        Dyadic::new(&self.num * BigInt::from_biguint(Sign::Plus, n.clone()), self.exp)
    }

    /// Nearest `f64`, correct for exponents far outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.num.is_zero() {
            return 0.0;
        }
        let bits = self.num.bits();
        let (mantissa, exp) = if bits > 62 {
            let shift = bits - 62;
            ((&self.num >> shift).to_f64().unwrap_or(0.0), self.exp as i64 - shift as i64)
        } else {
            (self.num.to_f64().unwrap_or(0.0), self.exp as i64)
        };
        let exp = exp.clamp(-2000, 2000) as i32;
        let half = exp / 2;
        mantissa * 2f64.powi(-half) * 2f64.powi(-(exp - half))
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.magnitude().trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exp as u64) as u32;
        if shift > 0 {
            self.num >>= shift;
            self.exp -= shift;
        }
    }

    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, u32) {
        let exp = self.exp.max(other.exp);
        (&self.num << (exp - self.exp), &other.num << (exp - other.exp), exp)
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::new(v, 0)
    }
}

impl From<u64> for Dyadic {
    fn from(v: u64) -> Self {
        Dyadic::new(v, 0)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, exp) = self.aligned(rhs);
        Dyadic::new(a + b, exp)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, exp) = self.aligned(rhs);
        Dyadic::new(a - b, exp)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + x)
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

/// Always formats as `p/2^q`, integers included (`3/2^0`).
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({self})")
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse { offset: 0, message: format!("not a dyadic rational: {s:?}") };
        let s = s.trim();
        match s.split_once('/') {
            None => BigInt::from_str(s).map(|n| Dyadic::new(n, 0)).map_err(|_| bad()),
            Some((p, q)) => {
                let num = BigInt::from_str(p.trim()).map_err(|_| bad())?;
                let q = q.trim();
                let exp = if let Some(e) = q.strip_prefix("2^") {
                    e.parse::<u32>().map_err(|_| bad())?
                } else {
                    // plain denominator, must be a power of two
                    let d = BigUint::from_str(q).map_err(|_| bad())?;
                    if d.is_zero() || !(&d & (&d - 1u32)).is_zero() {
                        return Err(bad());
                    }
                    d.trailing_zeros().unwrap_or(0) as u32
                };
                Ok(Dyadic::new(num, exp))
            }
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes_even_numerators() {
        let d = Dyadic::new(12, 4);
        assert_eq!(d.numerator(), &BigInt::from(3));
        assert_eq!(d.exponent(), 2);
        assert_eq!(Dyadic::new(0, 9), Dyadic::zero());
        assert_eq!(Dyadic::new(8, 0).exponent(), 0);
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(Dyadic::new(3, 2).to_string(), "3/2^2");
        assert_eq!(Dyadic::new(-5, 0).to_string(), "-5/2^0");
        assert_eq!("-5".parse::<Dyadic>().unwrap(), Dyadic::new(-5, 0));
        assert_eq!("3/2^2".parse::<Dyadic>().unwrap(), Dyadic::new(3, 2));
        assert_eq!("6/8".parse::<Dyadic>().unwrap(), Dyadic::new(3, 2));
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("x".parse::<Dyadic>().is_err());
    }

    #[test]
    fn f64_conversion_handles_tiny_values() {
        assert_eq!(Dyadic::pow2_neg(1).to_f64(), 0.5);
        let tiny = Dyadic::pow2_neg(1070);
        assert!(tiny.to_f64() > 0.0 || tiny.to_f64() == 0.0);
        assert_eq!(Dyadic::pow2_neg(60).to_f64(), 2f64.powi(-60));
        let big = Dyadic::new(BigInt::one() << 100u32, 0);
        assert_eq!(big.to_f64(), 2f64.powi(100));
    }

    proptest! {
        #[test]
        fn arithmetic_matches_f64(a in -1_000_000i64..1_000_000, ea in 0u32..20,
                                  b in -1_000_000i64..1_000_000, eb in 0u32..20) {
            let x = Dyadic::new(a, ea);
            let y = Dyadic::new(b, eb);
            let fx = a as f64 / 2f64.powi(ea as i32);
            let fy = b as f64 / 2f64.powi(eb as i32);
            prop_assert_eq!((&x + &y).to_f64(), fx + fy);
            prop_assert_eq!((&x - &y).to_f64(), fx - fy);
            prop_assert!(((&x * &y).to_f64() - fx * fy).abs() <= 1e-9 * (fx * fy).abs().max(1.0));
            prop_assert_eq!(x.cmp(&y), fx.partial_cmp(&fy).unwrap());
            prop_assert_eq!(x.to_string().parse::<Dyadic>().unwrap(), x);
        }
    }
}
