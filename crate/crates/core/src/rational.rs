//! Exact rational numbers and their `"num/den"` text form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use num_rational::BigRational as Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse rational from {input:?}")]
pub struct ParseRationalError {
    pub input: String,
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p"`, `"p/q"` or `"-p/q"`; surrounding whitespace is ignored.
pub fn parse(input: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: input.to_owned(),
    };
    let s = input.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// Always `num/den`, even for integers, so that exact values are recognisable
/// in structured output.
pub fn format(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// `num` for integers, `num/den` otherwise.
pub fn format_short(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format(q)
    }
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

/// Reduces `q` into `[0, modulus)` modulo `modulus·ℤ`.
pub fn reduce_mod(q: &Rational, modulus: &BigInt) -> Rational {
    let m = Rational::from_integer(modulus.clone());
    let quotient = (q / &m).floor();
    q - quotient * m
}

/// True iff `q ∈ modulus·ℤ`.
pub fn is_multiple_of(q: &Rational, modulus: &BigInt) -> bool {
    if !q.is_integer() {
        return false;
    }
    q.numer().is_multiple_of(modulus)
}

pub fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Serde adapter: a rational as a `"num/den"` string; integers are accepted on input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalText(pub Rational);

impl Serialize for RationalText {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalText {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(n) => Ok(RationalText(int(n))),
            Raw::Text(s) => parse(&s).map(RationalText).map_err(serde::de::Error::custom),
        }
    }
}

impl fmt::Display for RationalText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_short(&self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse("-6/8").unwrap(), ratio(-3, 4));
        assert_eq!(parse(" 7 ").unwrap(), int(7));
        assert_eq!(format(&int(7)), "7/1");
        assert_eq!(format_short(&ratio(1, -2)), "-1/2");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn modular_reduction() {
        let two = BigInt::from(2);
        assert_eq!(reduce_mod(&ratio(-1, 3), &BigInt::one()), ratio(2, 3));
        assert_eq!(reduce_mod(&ratio(7, 2), &two), ratio(3, 2));
        assert!(is_multiple_of(&int(-4), &two));
        assert!(!is_multiple_of(&ratio(1, 2), &BigInt::one()));
    }

    #[test]
    fn serde_text() {
        let v: Vec<RationalText> = serde_json::from_str(r#"["1/3", 2, "-4/2"]"#).unwrap();
        assert_eq!(v[0].0, ratio(1, 3));
        assert_eq!(v[1].0, int(2));
        assert_eq!(serde_json::to_string(&v[2]).unwrap(), "\"-2/1\"");
    }
}
