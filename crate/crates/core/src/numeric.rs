//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Arbitrary-precision rational used for all bound and cost arithmetic.
pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_usize(v: usize) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as an exact rational")]
pub struct ParseRationalError(pub String);

/// Parses `"3"`, `"-0.75"`, `"1.5e-3"` or `"43/15"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let joined = format!("{whole}{frac}");
    let mut num = BigInt::from_str(&joined).map_err(|_| err())?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Converts a float through its shortest round-trip decimal form, so `1.1`
/// becomes `11/10` rather than the nearest binary fraction.
pub fn from_f64_decimal(v: f64) -> Option<Rational> {
    if !v.is_finite() {
        return None;
    }
    parse_rational(&format!("{v}")).ok()
}

pub fn to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// `"num/den"`, or just `"num"` for integers.
pub fn exact_string(v: &Rational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Rounds half away from zero to `places` decimals and renders with a fixed
/// number of fractional digits.
pub fn fixed_string(v: &Rational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = v * Rational::from_integer(scale.clone());
    let half = ratio(1, 2);
    let rounded = if scaled.is_negative() {
        -((-scaled) + half).floor()
    } else {
        (scaled + half).floor()
    };
    let n = rounded.to_integer();
    let negative = n.is_negative();
    let (whole, frac) = n.abs().div_rem(&scale);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!(
            "{sign}{whole}.{:0>width$}",
            frac.to_string(),
            width = places
        )
    }
}

/// Decimal rendering with `sig` significant digits, trailing zeros trimmed.
pub fn decimal_string(v: &Rational, sig: usize) -> String {
    let f = to_f64(v);
    if f == 0.0 {
        return "0".to_string();
    }
    let magnitude = f.abs().log10().floor() as i32;
    let places = (sig as i32 - 1 - magnitude).max(0) as usize;
    let s = fixed_string(v, places);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Serialized form of a rational: a 12-significant-digit decimal plus the
/// exact fraction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalOut {
    pub decimal: f64,
    pub exact: String,
}

impl From<&Rational> for RationalOut {
    fn from(v: &Rational) -> Self {
        RationalOut {
            decimal: decimal_string(v, 12).parse().unwrap_or(f64::NAN),
            exact: exact_string(v),
        }
    }
}

/// `serialize_with` helper for rational fields.
pub fn serialize_rational<S: serde::Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
    RationalOut::from(v).serialize(s)
}

pub fn serialize_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&RationalOut::from(x))?;
    }
    seq.end()
}

/// Display adapter printing `decimal (exact)`.
pub struct Show<'a>(pub &'a Rational);

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exact = exact_string(self.0);
        let dec = decimal_string(self.0, 12);
        if exact == dec {
            write!(f, "{exact}")
        } else {
            write!(f, "{dec} ({exact})")
        }
    }
}

pub fn sum<'a>(items: impl IntoIterator<Item = &'a Rational>) -> Rational {
    items.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}
