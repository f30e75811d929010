//! Exact rational arithmetic used for every distance and bound.
//!
//! Values serialize as JSON integers when the denominator is one and as
//! `"p/q"` strings otherwise.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Rational = num_rational::Ratio<i64>;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

/// Parses `"7"`, `"-3"`, `"5/2"` or a finite decimal such as `"1.25"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational number: `{text}`"));
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: i64 = if whole.is_empty() || whole == "-" {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let scale = 10i64.pow(frac.len() as u32);
        let frac: i64 = frac.parse().map_err(|_| bad())?;
        let magnitude = whole.abs() * scale + frac;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(numer, scale));
    }
    text.parse::<i64>().map(Rational::from_integer).map_err(|_| bad())
}

pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Smallest integer not below `value`.
pub fn ceil_int(value: &Rational) -> i64 {
    value.ceil().to_integer()
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

pub fn is_positive(value: &Rational) -> bool {
    value.is_positive()
}

pub fn is_nonnegative(value: &Rational) -> bool {
    !value.is_negative()
}

/// `a / 2` kept exact.
pub fn half(value: &Rational) -> Rational {
    value / Rational::from_integer(2)
}

/// Least common multiple of denominators; useful when scaling to integers.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i64 {
    values
        .into_iter()
        .fold(1i64, |acc, v| acc.lcm(v.denom()))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    if value.is_integer() {
        serializer.serialize_i64(*value.numer())
    } else {
        serializer.serialize_str(&format_rational(value))
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Rational, D::Error> {
    deserializer.deserialize_any(RationalVisitor)
}

struct RationalVisitor;

impl Visitor<'_> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str("an integer or a string \"p/q\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
        Ok(Rational::from_integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
        i64::try_from(v)
            .map(Rational::from_integer)
            .map_err(|_| E::custom("integer too large"))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
        // Decimal literals are re-read through their shortest textual form so
        // that 0.1 means 1/10 rather than the nearest binary fraction.
        parse_rational(&format!("{v}")).map_err(E::custom)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
        parse_rational(v).map_err(E::custom)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod vec {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrapped(#[serde(with = "super")] Rational);

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let wrapped: Vec<Wrapped> = values.iter().map(|v| Wrapped(*v)).collect();
        wrapped.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let wrapped = Vec::<Wrapped>::deserialize(d)?;
        Ok(wrapped.into_iter().map(|w| w.0).collect())
    }
}

/// Serde adapter for `Option<Rational>`; `null` and absence both map to `None`.
pub mod option {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrapped(#[serde(with = "super")] Rational);

    pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        value.map(Wrapped).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Ok(Option::<Wrapped>::deserialize(d)?.map(|w| w.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("1.25").unwrap(), ratio(5, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), ratio(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn json_forms() {
        #[derive(serde::Deserialize, serde::Serialize)]
        struct W(#[serde(with = "super")] Rational);
        let w: W = serde_json::from_str("\"3/2\"").unwrap();
        assert_eq!(w.0, ratio(3, 2));
        let w: W = serde_json::from_str("0.1").unwrap();
        assert_eq!(w.0, ratio(1, 10));
        assert_eq!(serde_json::to_string(&W(int(4))).unwrap(), "4");
        assert_eq!(serde_json::to_string(&W(ratio(1, 3))).unwrap(), "\"1/3\"");
    }
}
