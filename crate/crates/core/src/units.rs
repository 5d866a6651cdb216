//! Unit-suffixed quantities for the command line and config files.
//!
//! Frequency suffixes `Hz`, `kHz`, `MHz`, `GHz`, `THz` denote *ordinary*
//! frequency and are converted to angular frequency by a factor 2π, so
//! `100GHz` is `2π × 10¹¹ rad/s`. The suffix `rad/s` (or no suffix) means the
//! value is already angular. Time suffixes are `s`, `ms`, `us`, `ns`, `ps`, `fs`;
//! no suffix means seconds.
//!
//! In normalized mode all values are dimensionless (times in units of `τa`,
//! bandwidths in units of `1/τa`) and suffixes are rejected.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::profiles::FrequencyUnits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitSystem {
    #[default]
    Physical,
    Normalized,
}

const FREQUENCY_SUFFIXES: [(&str, f64); 6] = [
    ("rad/s", 1.0),
    ("THz", 2.0 * PI * 1e12),
    ("GHz", 2.0 * PI * 1e9),
    ("MHz", 2.0 * PI * 1e6),
    ("kHz", 2.0 * PI * 1e3),
    ("Hz", 2.0 * PI),
];

const TIME_SUFFIXES: [(&str, f64); 6] = [
    ("fs", 1e-15),
    ("ps", 1e-12),
    ("ns", 1e-9),
    ("us", 1e-6),
    ("ms", 1e-3),
    ("s", 1.0),
];

fn split_number(text: &str) -> (&str, &str) {
    let text = text.trim();
    let end = text
        .char_indices()
        .find(|&(i, ch)| {
            !(ch.is_ascii_digit()
                || ch == '.'
                || ch == '+'
                || ch == '-'
                || ((ch == 'e' || ch == 'E')
                    && text[i + 1..]
                        .chars()
                        .next()
                        .is_some_and(|n| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    (&text[..end], text[end..].trim())
}

fn parse_with(text: &str, system: UnitSystem, table: &[(&str, f64)], what: &str) -> Result<f64> {
    let (number, suffix) = split_number(text);
    let value: f64 = number
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} '{text}'")))?;
    if !value.is_finite() {
        return Err(Error::Parse(format!("non-finite {what} '{text}'")));
    }
    if suffix.is_empty() {
        return Ok(value);
    }
    if system == UnitSystem::Normalized {
        return Err(Error::Parse(format!(
            "{what} '{text}' has a unit suffix, but normalized mode takes bare numbers"
        )));
    }
    table
        .iter()
        .find(|(s, _)| *s == suffix)
        .map(|(_, scale)| value * scale)
        .ok_or_else(|| Error::Parse(format!("unknown {what} unit '{suffix}' in '{text}'")))
}

impl UnitSystem {
    /// Angular frequency in rad/s (or units of `1/τa` when normalized).
    pub fn frequency(self, text: &str) -> Result<f64> {
        parse_with(text, self, &FREQUENCY_SUFFIXES, "frequency")
    }

    /// Time in seconds (or units of `τa` when normalized).
    pub fn time(self, text: &str) -> Result<f64> {
        parse_with(text, self, &TIME_SUFFIXES, "time")
    }
}

impl FrequencyUnits for UnitSystem {
    fn parse_frequency(&self, text: &str) -> Result<f64> {
        self.frequency(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let u = UnitSystem::Physical;
        let b = u.frequency("100GHz").unwrap();
        assert!(((b - 2.0 * PI * 1e11) / b).abs() < 1e-12);
        assert_eq!(u.time("1ps").unwrap(), 1e-12);
        assert_eq!(u.time("0.5ps").unwrap(), 0.5e-12);
        assert_eq!(u.time("2.5e-12").unwrap(), 2.5e-12);
        assert_eq!(u.time("1e3fs").unwrap(), 1e3 * 1e-15);
        assert_eq!(u.frequency("3rad/s").unwrap(), 3.0);
        assert_eq!(u.frequency("-2.5e1 GHz").unwrap(), -25.0 * 2.0 * PI * 1e9);
    }

    #[test]
    fn errors() {
        let u = UnitSystem::Physical;
        assert!(u.time("1 parsec").is_err());
        assert!(u.time("ps").is_err());
        assert!(u.frequency("1e400").is_err());
        assert!(UnitSystem::Normalized.time("1ps").is_err());
        assert_eq!(UnitSystem::Normalized.time("0.75").unwrap(), 0.75);
    }
}
