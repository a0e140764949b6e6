//! Quantities with mandatory unit suffixes, e.g. `"100 ns"` or `"5e7 1/s"`.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

/// Unit suffixes with their power of ten relative to the SI unit.
const TIME_UNITS: [(&str, i32); 3] = [("ns", -9), ("us", -6), ("s", 0)];
const RATE_UNITS: [(&str, i32); 1] = [("1/s", 0)];

/// A duration in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Time(pub f64);

/// A rate in 1/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate(pub f64);

fn parse_with(text: &str, units: &[(&str, i32)], kind: &str) -> Result<f64, String> {
    let allowed = || units.iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", ");
    let text = text.trim();
    // "<number> <unit>", or a letters-only unit written without a space
    let (number, unit) = text.split_once(char::is_whitespace).unwrap_or_else(|| {
        let split = text.trim_end_matches(|c: char| c.is_ascii_alphabetic()).len();
        text.split_at(split)
    });
    let unit = unit.trim();
    if unit.is_empty() {
        return Err(format!("{kind} \"{text}\" has no unit; expected one of {}", allowed()));
    }
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("cannot read a number from {kind} \"{text}\""))?;
    if !value.is_finite() {
        return Err(format!("{kind} \"{text}\" is not finite"));
    }
    let power = units
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, p)| *p)
        .ok_or_else(|| format!("unknown {kind} unit \"{unit}\"; expected one of {}", allowed()))?;
    // dividing by an exact power of ten keeps "1.2 us" == 1.2e-6
    Ok(value / 10f64.powi(-power))
}

pub fn parse_time(text: &str) -> Result<f64, String> {
    parse_with(text, &TIME_UNITS, "time")
}

pub fn parse_rate(text: &str) -> Result<f64, String> {
    parse_with(text, &RATE_UNITS, "rate")
}

struct QuantityVisitor {
    kind: &'static str,
    parse: fn(&str) -> Result<f64, String>,
}

impl<'de> Visitor<'de> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a {} string with a unit suffix", self.kind)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        (self.parse)(v).map_err(E::custom)
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        let example = if self.kind == "time" { "ns" } else { "1/s" };
        Err(E::custom(format!(
            "{} {v} has no unit; write it as a string such as \"{v} {example}\"",
            self.kind
        )))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        self.visit_f64(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        self.visit_f64(v as f64)
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(QuantityVisitor {
            kind: "time",
            parse: parse_time,
        })
        .map(Time)
    }
}

impl<'de> Deserialize<'de> for Rate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(QuantityVisitor {
            kind: "rate",
            parse: parse_rate,
        })
        .map(Rate)
    }
}
