//! Unit-suffixed angle literals: `1pi`, `90deg`, `1.2rad`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Unit suffix of an angle literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleUnit {
    Pi,
    Deg,
    Rad,
}

impl AngleUnit {
    pub fn to_radians(self, value: f64) -> f64 {
        match self {
            AngleUnit::Pi => value * PI,
            AngleUnit::Deg => value.to_radians(),
            AngleUnit::Rad => value,
        }
    }
}

impl FromStr for AngleUnit {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "pi" => Ok(AngleUnit::Pi),
            "deg" => Ok(AngleUnit::Deg),
            "rad" => Ok(AngleUnit::Rad),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AngleError {
    MissingUnit,
    UnknownUnit(String),
    BadNumber(String),
}

impl fmt::Display for AngleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleError::MissingUnit => write!(f, "angle unit required (pi, deg or rad)"),
            AngleError::UnknownUnit(u) => write!(f, "unknown angle unit `{u}` (expected pi, deg or rad)"),
            AngleError::BadNumber(n) => write!(f, "invalid number `{n}`"),
        }
    }
}

impl std::error::Error for AngleError {}

/// Splits a literal into its numeric prefix and alphabetic suffix.
///
/// The exponent marker `e` is only consumed when a digit (optionally signed)
/// follows it, so `1e-6` is a number while `2deg` keeps its suffix.
pub(crate) fn split_number(s: &str) -> (&str, &str) {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    s.split_at(i)
}

pub(crate) fn parse_number(s: &str) -> Result<f64, AngleError> {
    let v: f64 = s.parse().map_err(|_| AngleError::BadNumber(s.to_string()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(AngleError::BadNumber(s.to_string()))
    }
}

/// Parses an angle literal into radians. A bare zero needs no unit.
pub fn parse_angle(s: &str) -> Result<f64, AngleError> {
    let s = s.trim();
    let (num, unit) = split_number(s);
    let value = parse_number(num)?;
    if unit.is_empty() {
        if value == 0.0 {
            return Ok(0.0);
        }
        return Err(AngleError::MissingUnit);
    }
    let unit: AngleUnit = unit
        .parse()
        .map_err(|_| AngleError::UnknownUnit(unit.to_string()))?;
    Ok(unit.to_radians(value))
}

/// Canonical text for an angle: `<k>pi` when `k * pi` reproduces the value
/// bit-for-bit with a short `k`, and the shortest round-trip radian literal
/// otherwise. Either form parses back to exactly the same `f64`.
pub fn format_angle(radians: f64) -> String {
    if radians == 0.0 {
        return "0".into();
    }
    let k = radians / PI;
    let text = format!("{k}");
    if text.len() <= 8 && k * PI == radians {
        format!("{text}pi")
    } else {
        format!("{radians}rad")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_units() {
        assert_eq!(parse_angle("1pi").unwrap(), PI);
        assert_eq!(parse_angle("90DEG").unwrap(), PI / 2.0);
        assert_eq!(parse_angle("1.2rad").unwrap(), 1.2);
        assert_eq!(parse_angle("1e-1pi").unwrap(), 0.1 * PI);
        assert_eq!(parse_angle("-0.5pi").unwrap(), -0.5 * PI);
    }

    #[test]
    fn rejects_bad_literals() {
        assert_eq!(parse_angle("1"), Err(AngleError::MissingUnit));
        assert_eq!(parse_angle("0"), Ok(0.0));
        assert!(matches!(parse_angle("1turn"), Err(AngleError::UnknownUnit(_))));
        assert!(matches!(parse_angle("pi"), Err(AngleError::BadNumber(_))));
    }

    #[test]
    fn canonical_form_round_trips() {
        for v in [0.0, PI, 0.5 * PI, 3.0 * PI / 2.0, 1.2, 0.580_430_623 * PI, 1e-7, 2.0 * (1.0f64 / 3.0).sqrt().acos()] {
            let text = format_angle(v);
            assert_eq!(parse_angle(&text).unwrap(), v, "{text}");
        }
        assert_eq!(format_angle(PI), "1pi");
        assert_eq!(format_angle(PI / 2.0), "0.5pi");
        assert_eq!(format_angle(1.2), "1.2rad");
    }
}
