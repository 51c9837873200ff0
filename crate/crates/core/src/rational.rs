//! Exact rational values and exact binomials.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Reduced fraction with arbitrary-precision parts; the denominator is always
/// positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RationalValue(BigRational);

impl RationalValue {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        RationalValue(BigRational::new(num.into(), den.into()))
    }

    pub fn from_integer(v: impl Into<BigInt>) -> Self {
        RationalValue(BigRational::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        RationalValue(BigRational::zero())
    }

    pub fn one() -> Self {
        RationalValue(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn recip(&self) -> Self {
        RationalValue(self.0.recip())
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn into_big(self) -> BigRational {
        self.0
    }

    /// Nearest `f64`. Handles numerators and denominators beyond the `f64`
    /// range by scaling both down first.
    pub fn to_f64(&self) -> f64 {
        if let Some(v) = self.0.to_f64() {
            if v.is_finite() {
                return v;
            }
        }
        let num = self.0.numer();
        let den = self.0.denom();
        let shift = num.bits().max(den.bits()).saturating_sub(1000);
        let n = (num >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (den >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let v = self.to_f64();
        if v == 0.0 {
            return "0".to_string();
        }
        format!("{:.*e}", digits.saturating_sub(1), v)
            .parse::<f64>()
            .map(|x| format_significant(x, digits))
            .unwrap_or_else(|_| v.to_string())
    }

    pub fn to_json(&self) -> RationalJson {
        RationalJson {
            num: self.0.numer().to_string(),
            den: self.0.denom().to_string(),
            approx: self.to_decimal_string(12),
        }
    }
}

fn format_significant(x: f64, digits: usize) -> String {
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl From<BigRational> for RationalValue {
    fn from(v: BigRational) -> Self {
        RationalValue(v)
    }
}

impl From<u64> for RationalValue {
    fn from(v: u64) -> Self {
        RationalValue::from_integer(v)
    }
}

impl From<i64> for RationalValue {
    fn from(v: i64) -> Self {
        RationalValue::from_integer(v)
    }
}

impl From<BigUint> for RationalValue {
    fn from(v: BigUint) -> Self {
        RationalValue::from_integer(BigInt::from(v))
    }
}

impl fmt::Display for RationalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for RationalValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse = |t: &str| BigInt::from_str(t.trim()).map_err(|e| format!("{t:?}: {e}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let d = parse(d)?;
                if d.is_zero() {
                    return Err("zero denominator".into());
                }
                Ok(RationalValue::new(parse(n)?, d))
            }
            None => Ok(RationalValue::from_integer(parse(s)?)),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for RationalValue {
            type Output = RationalValue;
            fn $method(self, rhs: RationalValue) -> RationalValue {
                RationalValue(self.0.$method(rhs.0))
            }
        }
        impl<'a> $tr<&'a RationalValue> for &'a RationalValue {
            type Output = RationalValue;
            fn $method(self, rhs: &'a RationalValue) -> RationalValue {
                RationalValue((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign for RationalValue {
    fn add_assign(&mut self, rhs: RationalValue) {
        self.0 += rhs.0;
    }
}

impl<'a> AddAssign<&'a RationalValue> for RationalValue {
    fn add_assign(&mut self, rhs: &'a RationalValue) {
        self.0 += &rhs.0;
    }
}

impl Neg for RationalValue {
    type Output = RationalValue;
    fn neg(self) -> RationalValue {
        RationalValue(-self.0)
    }
}

impl std::iter::Sum for RationalValue {
    fn sum<I: Iterator<Item = RationalValue>>(iter: I) -> Self {
        iter.fold(RationalValue::zero(), |acc, x| acc + x)
    }
}

/// Wire form of a rational: `{"num": "...", "den": "...", "approx": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
    pub approx: String,
}

impl RationalJson {
    pub fn to_value(&self) -> Result<RationalValue, String> {
        format!("{}/{}", self.num, self.den).parse()
    }
}

/// Exact `C(n, r)` by the multiplicative recurrence; zero when `r > n`.
pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}
