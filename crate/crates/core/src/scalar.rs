//! Scalar fields used by the matrix kernel.
//!
//! Two backends share one code path: exact rationals ([`Rat`]) and binary64.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary precision rational, always in lowest terms.
pub type Rat = BigRational;

/// Field operations the kernel needs from its scalars.
pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialOrd + Signed + Send + Sync + 'static
{
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn as_f64(&self) -> f64;

    /// Pivot test. Exact scalars only reject zero; floats reject values
    /// below a relative threshold of `scale`.
    fn negligible(&self, scale: f64) -> bool;

    fn from_rat(r: &Rat) -> Self;

    /// Exact rational value (the binary expansion for floats); `None` for NaN or ±∞.
    fn to_rat(&self) -> Option<Rat>;
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }

    fn as_f64(&self) -> f64 {
        rat_to_f64(self)
    }

    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }

    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn to_rat(&self) -> Option<Rat> {
        Some(self.clone())
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn negligible(&self, scale: f64) -> bool {
        self.abs() <= 1e-12 * scale.max(1.0)
    }

    fn from_rat(r: &Rat) -> Self {
        rat_to_f64(r)
    }

    fn to_rat(&self) -> Option<Rat> {
        Rat::from_float(*self)
    }
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

fn rat_to_f64(r: &Rat) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() {
            return v;
        }
    }
    // very large parts: fall back to string scaling
    let n = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    n / d
}

/// Parse "p", "p/q" or a terminating decimal such as "-1.25" or "3e-2".
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::parse(s, "empty scalar"));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| Error::parse(s, e.to_string()))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| Error::parse(s, e.to_string()))?;
        if d.is_zero() {
            return Err(Error::parse(s, "zero denominator"));
        }
        return Ok(Rat::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(t) {
        return Ok(Rat::from_integer(n));
    }
    parse_decimal(t).ok_or_else(|| Error::parse(s, "not a rational or decimal literal"))
}

fn parse_decimal(t: &str) -> Option<Rat> {
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(k) => (&t[..k], t[k + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let mut v = Rat::from_integer(BigInt::from_str(&digits).ok()?);
    let shift = exp - fp.len() as i32;
    let ten = Rat::from_integer(BigInt::from(10));
    if shift >= 0 {
        v *= num_traits::pow(ten, shift as usize);
    } else {
        v /= num_traits::pow(ten, (-shift) as usize);
    }
    Some(if neg { -v } else { v })
}

/// "p" for integers, "p/q" otherwise.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

/// Exact decimal rendering; fails when the denominator has prime factors
/// other than 2 and 5.
pub fn rat_to_decimal(r: &Rat) -> Result<String> {
    let mut d = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut k2 = 0usize;
    let mut k5 = 0usize;
    while (&d % &two).is_zero() {
        d /= &two;
        k2 += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        k5 += 1;
    }
    if !d.is_one() {
        return Err(Error::Precision(r.to_string()));
    }
    let places = k2.max(k5);
    if places == 0 {
        return Ok(r.numer().to_string());
    }
    let scaled = r * Rat::from_integer(num_traits::pow(BigInt::from(10), places));
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let mut digits = n.abs().to_string();
    while digits.len() <= places {
        digits.insert(0, '0');
    }
    let split = digits.len() - places;
    let s = format!("{}.{}", &digits[..split], &digits[split..]);
    Ok(if neg { format!("-{s}") } else { s })
}

/// A rational or +∞. Used for optimal values of infeasible minimization problems.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtendedRat {
    Finite(Rat),
    PosInf,
}

impl ExtendedRat {
    pub fn finite(r: Rat) -> Self {
        ExtendedRat::Finite(r)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedRat::PosInf)
    }

    pub fn as_finite(&self) -> Option<&Rat> {
        match self {
            ExtendedRat::Finite(r) => Some(r),
            ExtendedRat::PosInf => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedRat::Finite(r) => rat_to_f64(r),
            ExtendedRat::PosInf => f64::INFINITY,
        }
    }

    pub fn add_rat(&self, shift: &Rat) -> Self {
        match self {
            ExtendedRat::Finite(r) => ExtendedRat::Finite(r + shift),
            ExtendedRat::PosInf => ExtendedRat::PosInf,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "Infinity" => Ok(ExtendedRat::PosInf),
            t => parse_rat(t).map(ExtendedRat::Finite),
        }
    }
}

impl From<Rat> for ExtendedRat {
    fn from(r: Rat) -> Self {
        ExtendedRat::Finite(r)
    }
}

impl PartialOrd for ExtendedRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedRat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtendedRat::Finite(a), ExtendedRat::Finite(b)) => a.cmp(b),
            (ExtendedRat::Finite(_), ExtendedRat::PosInf) => Ordering::Less,
            (ExtendedRat::PosInf, ExtendedRat::Finite(_)) => Ordering::Greater,
            (ExtendedRat::PosInf, ExtendedRat::PosInf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtendedRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRat::Finite(r) => write!(f, "{r}"),
            ExtendedRat::PosInf => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedRat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtendedRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ExtendedRat::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a `Rat` stored as a "p/q" string.
pub mod rat_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

pub mod rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("3").unwrap(), int(3));
        assert_eq!(parse_rat("-6/4").unwrap(), rat(-3, 2));
        assert_eq!(parse_rat("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rat("-1e-6").unwrap(), rat(-1, 1_000_000));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(rat_to_decimal(&int(10)).unwrap(), "10");
        assert_eq!(rat_to_decimal(&rat(-1, 8)).unwrap(), "-0.125");
        assert_eq!(rat_to_decimal(&rat(7, 20)).unwrap(), "0.35");
        assert!(rat_to_decimal(&rat(1, 3)).is_err());
    }

    #[test]
    fn infinity_orders_last() {
        let big = ExtendedRat::Finite(int(1_000_000));
        assert!(ExtendedRat::PosInf > big);
        assert_eq!(ExtendedRat::PosInf.to_string(), "inf");
        assert_eq!(ExtendedRat::parse("inf").unwrap(), ExtendedRat::PosInf);
    }

    #[test]
    fn lowest_terms() {
        let r = rat(10, -4);
        assert_eq!(r.numer(), &BigInt::from(-5));
        assert_eq!(r.denom(), &BigInt::from(2));
    }
}
