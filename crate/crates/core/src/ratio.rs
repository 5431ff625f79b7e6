//! Exact rational parameters (λ, δ).

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Ratio = Rational64;

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.25"` exactly.
pub fn parse_ratio(text: &str) -> Result<Ratio> {
    let t = text.trim();
    let bad = || Error::Precondition(format!("cannot parse {text:?} as a rational"));
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || frac.len() > 15 {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: i64 = digits.parse().map_err(|_| bad())?;
    let den = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    let r = Ratio::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Errors unless `0 <= x <= 1`.
pub fn check_unit(x: Ratio, name: &str) -> Result<()> {
    if x < Ratio::zero() || x > Ratio::one() {
        return Err(Error::Precondition(format!("{name} = {x} must lie in [0, 1]")));
    }
    Ok(())
}

/// `count >= x * total`, exactly.
#[inline]
pub fn at_least_fraction(count: usize, x: Ratio, total: usize) -> bool {
    Ratio::from_integer(count as i64) >= x * Ratio::from_integer(total as i64)
}

pub fn to_f64(x: Ratio) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Serializes a rational as its `"p/q"` string, for `#[serde(serialize_with)]`.
pub fn serialize<S: serde::Serializer>(x: &Ratio, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_str(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exactly() {
        assert_eq!(parse_ratio("2/3").unwrap(), Ratio::new(2, 3));
        assert_eq!(parse_ratio("0.25").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_ratio("1").unwrap(), Ratio::from_integer(1));
        assert_eq!(parse_ratio(".5").unwrap(), Ratio::new(1, 2));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
        assert!(parse_ratio("").is_err());
    }
}
