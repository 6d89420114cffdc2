//! Exact rational arithmetic helpers.
//!
//! All probabilities and expected utilities in this crate are exact
//! `BigRational`s; floating point appears only in Monte Carlo reporting.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Ratio = num_rational::BigRational;

/// Error produced when a rational literal cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct ParseRatioError {
    pub literal: String,
    pub reason: String,
}

fn err(literal: &str, reason: &str) -> ParseRatioError {
    ParseRatioError {
        literal: literal.to_string(),
        reason: reason.to_string(),
    }
}

/// Parses a rational from `a/b`, decimal (`0.25`), or scientific (`2.22e-6`)
/// notation, exactly. Floats never enter the computation.
pub fn parse_ratio(text: &str) -> Result<Ratio, ParseRatioError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(err(text, "empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|e| err(text, &e.to_string()))?;
        let d = BigInt::from_str(den.trim()).map_err(|e| err(text, &e.to_string()))?;
        if d.is_zero() {
            return Err(err(text, "zero denominator"));
        }
        return Ok(Ratio::new(n, d));
    }
    // Decimal with optional exponent: [sign] digits [. digits] [e[sign]digits]
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e.parse().map_err(|_| err(text, "bad exponent"))?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(err(text, "no digits"));
    }
    let n = BigInt::from_str(&digits).map_err(|e| err(text, &e.to_string()))?;
    let scale = frac_part.len() as i64;
    let net = exp - scale;
    let ten = BigInt::from(10u32);
    Ok(if net >= 0 {
        Ratio::from_integer(n * ten.pow(net as u32))
    } else {
        Ratio::new(n, ten.pow((-net) as u32))
    })
}

/// Renders a rational as `num/den` (always with denominator, reduced form).
pub fn ratio_string(r: &Ratio) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Lossy conversion for human-oriented report fields.
pub fn ratio_f64(r: &Ratio) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn ratio_u64(v: u64) -> Ratio {
    Ratio::from_integer(BigInt::from(v))
}

/// Smallest integer strictly greater than `r`.
pub fn next_integer_above(r: &Ratio) -> BigInt {
    let fl = r.floor().to_integer();
    fl + BigInt::one()
}

/// Serde adapter rendering rationals as `"num/den"` strings so report files
/// stay exact and byte-stable.
pub mod serde_ratio {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&ratio_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio, D::Error> {
        let text = String::deserialize(d)?;
        parse_ratio(&text).map_err(serde::de::Error::custom)
    }
}

/// Same adapter for `Vec<Ratio>`.
pub mod serde_ratio_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Ratio], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(ratio_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Ratio>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_ratio(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// True iff `r` lies in the closed interval `[0, 1]`.
pub fn is_probability(r: &Ratio) -> bool {
    !r.is_negative() && *r <= Ratio::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_ratio("9/10").unwrap(), Ratio::new(9.into(), 10.into()));
        assert_eq!(parse_ratio("0.25").unwrap(), Ratio::new(1.into(), 4.into()));
        assert_eq!(parse_ratio("12").unwrap(), Ratio::from_integer(12.into()));
        assert_eq!(
            parse_ratio("2.22e-6").unwrap(),
            Ratio::new(222.into(), 100_000_000.into())
        );
        assert_eq!(parse_ratio("1e3").unwrap(), Ratio::from_integer(1000.into()));
        assert_eq!(
            parse_ratio("-0.5").unwrap(),
            Ratio::new((-1).into(), 2.into())
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_ratio("").is_err());
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
        assert!(parse_ratio("1.2.3").is_err());
    }

    #[test]
    fn next_integer_is_strictly_above() {
        assert_eq!(next_integer_above(&parse_ratio("11").unwrap()), 12.into());
        assert_eq!(next_integer_above(&parse_ratio("10.2").unwrap()), 11.into());
        assert_eq!(next_integer_above(&parse_ratio("-0.5").unwrap()), 0.into());
    }
}
