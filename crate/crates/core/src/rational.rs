//! Exact rational scalars.
//!
//! [`Rational`] wraps an arbitrary-precision fraction that is always kept in
//! lowest terms with a positive denominator. Text form is `p/q` (or `p` for
//! integers); parsing additionally accepts decimal strings such as `-0.125`
//! or `1.5e-3`, which are converted exactly.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, exp: i32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, exp))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact conversion of a finite float; `None` for NaN or infinities.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    /// Least common multiple of the denominators of `values` (1 for an empty slice).
    pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
        values
            .into_iter()
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(s.strip_prefix('+').unwrap_or(s)).ok()
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (sign, body) = match mantissa.as_bytes().first()? {
        b'-' => (-1, &mantissa[1..]),
        b'+' => (1, &mantissa[1..]),
        _ => (1, mantissa),
    };
    let (int_part, frac_part) = match body.find('.') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()? * sign;
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(10);
    Some(Rational::from_integer(numer) * ten.pow(scale))
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let s = raw.trim();
        let bad = || Error::Parse(format!("not a rational scalar: {raw:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p = parse_int(p.trim()).ok_or_else(bad)?;
            let q = parse_int(q.trim()).ok_or_else(bad)?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {raw:?}")));
            }
            return Ok(Rational::new(p, q));
        }
        if let Some(n) = parse_int(s) {
            return Ok(Rational::from_integer(n));
        }
        parse_decimal(s).ok_or_else(bad)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer, a decimal string or a \"p/q\" string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
        Ok(Rational::from_integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
        Ok(Rational::from_integer(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
        // Shortest round-trip decimal text, then exact conversion of that text.
        if !v.is_finite() {
            return Err(E::custom("non-finite number"));
        }
        parse_decimal(&format!("{v:e}")).ok_or_else(|| E::custom("bad number"))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
        Rational::from_str(v).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $atr:ident, $amethod:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($tr::$method(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational($tr::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $tr<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($tr::$method(&self.0, rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational($tr::$method(&self.0, &rhs.0))
            }
        }
        impl $atr<Rational> for Rational {
            fn $amethod(&mut self, rhs: Rational) {
                $atr::$amethod(&mut self.0, rhs.0)
            }
        }
        impl<'a> $atr<&'a Rational> for Rational {
            fn $amethod(&mut self, rhs: &'a Rational) {
                $atr::$amethod(&mut self.0, &rhs.0)
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |a, b| a * b)
    }
}

/// Dot product of two equal-length slices.
pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximum of a non-empty iterator (`None` when empty).
pub fn max_of<I: IntoIterator<Item = Rational>>(it: I) -> Option<Rational> {
    it.into_iter().reduce(Rational::max)
}

/// Minimum of a non-empty iterator (`None` when empty).
pub fn min_of<I: IntoIterator<Item = Rational>>(it: I) -> Option<Rational> {
    it.into_iter().reduce(Rational::min)
}

/// Scale a rational vector to the primitive integer vector on the same ray.
///
/// The result has integer entries with gcd 1; the zero vector is returned unchanged.
pub fn primitive_direction(v: &[Rational]) -> Vec<Rational> {
    let den = Rational::common_denominator(v);
    let ints: Vec<BigInt> = v.iter().map(|r| r.numer() * (&den / r.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter().map(|x| Rational::from_integer(x / &g)).collect()
}

/// Shorthand used heavily in tests: `q(1, 3)` is one third.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Integer shorthand.
pub fn r(n: i64) -> Rational {
    Rational::from_integer(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_all_scalar_forms() {
        assert_eq!("3".parse::<Rational>().unwrap(), r(3));
        assert_eq!("-6/4".parse::<Rational>().unwrap(), q(-3, 2));
        assert_eq!("0.125".parse::<Rational>().unwrap(), q(1, 8));
        assert_eq!("-.5".parse::<Rational>().unwrap(), q(-1, 2));
        assert_eq!("1.5e-3".parse::<Rational>().unwrap(), q(3, 2000));
        assert_eq!("2E2".parse::<Rational>().unwrap(), r(200));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("1/2/3".parse::<Rational>().is_err());
        assert!(".".parse::<Rational>().is_err());
    }

    #[test]
    fn json_numbers_convert_exactly() {
        let v: Vec<Rational> = serde_json::from_str(r#"[1, -2, 0.1, "3/9", "2.50"]"#).unwrap();
        assert_eq!(v, vec![r(1), r(-2), q(1, 10), q(1, 3), q(5, 2)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["1","-2","1/10","1/3","5/2"]"#);
    }

    #[test]
    fn primitive_direction_clears_denominators() {
        assert_eq!(primitive_direction(&[q(1, 2), q(1, 3)]), vec![r(3), r(2)]);
        assert_eq!(primitive_direction(&[r(4), r(-6)]), vec![r(2), r(-3)]);
        assert_eq!(primitive_direction(&[r(0), r(0)]), vec![r(0), r(0)]);
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-10_000i64..10_000, 1i64..5_000).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(x in arb_rational()) {
            let text = x.to_string();
            prop_assert_eq!(text.parse::<Rational>().unwrap(), x.clone());
            let json = serde_json::to_string(&x).unwrap();
            prop_assert_eq!(serde_json::from_str::<Rational>(&json).unwrap(), x);
        }

        #[test]
        fn always_reduced(a in arb_rational(), b in arb_rational()) {
            for v in [&a + &b, &a - &b, &a * &b] {
                prop_assert!(v.denom().is_positive());
                prop_assert!(v.numer().gcd(v.denom()).is_one());
            }
            if !b.is_zero() {
                let v = &a / &b;
                prop_assert!(v.denom().is_positive());
                prop_assert!(v.numer().gcd(v.denom()).is_one());
            }
        }
    }
}
