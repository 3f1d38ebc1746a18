//! Exact rational helpers.
//!
//! Every load, threshold and feasibility comparison in the crate goes through
//! [`Rational`]; there is no floating-point path for decisions.

use std::str::FromStr;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always kept in lowest terms with a positive denominator.
pub type Rational = num_rational::Ratio<i128>;

/// Builds `num/den`, reduced. Panics on a zero denominator.
pub fn ratio(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}

/// Whole number as a rational.
pub fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

/// Parses `"n/d"`, `"n"` or a finite decimal such as `"0.2679492"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("invalid rational `{text}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n = i128::from_str(n.trim()).map_err(|_| bad())?;
        let d = i128::from_str(d.trim()).map_err(|_| bad())?;
        if d == 0 {
            return Err(Error::Parse(format!("zero denominator in `{text}`")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 30 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let whole_val = if whole_digits.is_empty() {
            0
        } else {
            i128::from_str(whole_digits).map_err(|_| bad())?
        };
        let scale = 10i128.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let frac_val = i128::from_str(frac).map_err(|_| bad())?;
        let magnitude = Rational::new(whole_val, 1) + Rational::new(frac_val, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    i128::from_str(s)
        .map(Rational::from_integer)
        .map_err(|_| bad())
}

/// Formats as `"n/d"`, or `"n"` for integers. Inverse of [`parse_rational`].
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Smallest integer `>= r`.
pub fn ceil_int(r: &Rational) -> i128 {
    r.ceil().to_integer()
}

/// Lossy conversion for human-readable output only.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Renders `r` rounded half-up to `places` decimals, computed exactly.
pub fn to_decimal(r: &Rational, places: u32) -> String {
    let scale = 10i128.pow(places);
    let negative = r.is_negative();
    let scaled = r.abs() * Rational::from_integer(scale) + Rational::new(1, 2);
    let digits = scaled.floor().to_integer();
    let (whole, frac) = digits.div_rem(&scale);
    let sign = if negative && !digits.is_zero() {
        "-"
    } else {
        ""
    };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac:0width$}", width = places as usize)
    }
}

/// `[numerator, denominator]` as JSON-friendly 64-bit integers.
pub fn to_pair(r: &Rational) -> Result<[i64; 2]> {
    let n = i64::try_from(*r.numer()).map_err(|_| Error::Overflow(format_rational(r)))?;
    let d = i64::try_from(*r.denom()).map_err(|_| Error::Overflow(format_rational(r)))?;
    Ok([n, d])
}

pub fn from_pair(pair: [i64; 2]) -> Result<Rational> {
    if pair[1] == 0 {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(Rational::new(pair[0] as i128, pair[1] as i128))
}
