use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Calendar month. Ordering is chronological.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthStamp {
    year: i32,
    month: u8,
}

impl MonthStamp {
    pub fn new(year: i32, month: u8) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    /// Months since year 0, used for arithmetic on stamps.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        Self {
            year: ordinal.div_euclid(12) as i32,
            month: (ordinal.rem_euclid(12) + 1) as u8,
        }
    }

    pub fn succ(self) -> Self {
        Self::from_ordinal(self.ordinal() + 1)
    }

    pub fn pred(self) -> Self {
        Self::from_ordinal(self.ordinal() - 1)
    }

    /// Signed number of months from `self` to `other`.
    pub fn months_until(self, other: MonthStamp) -> i64 {
        other.ordinal() - self.ordinal()
    }

    /// Parses `yyyymm`, or the month part of `yyyymmdd`.
    pub fn parse_yyyymm(text: &str) -> Option<Self> {
        let text = text.trim();
        if text.len() != 6 || !text.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let year = text[..4].parse().ok()?;
        let month = text[4..].parse().ok()?;
        Self::new(year, month)
    }
}

impl fmt::Display for MonthStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}{:02}", self.year, self.month)
    }
}

impl FromStr for MonthStamp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cleaned: String = s.trim().chars().filter(|c| *c != '-').collect();
        Self::parse_yyyymm(&cleaned).ok_or_else(|| format!("invalid month \"{s}\", expected yyyymm"))
    }
}

impl Serialize for MonthStamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct MonthVisitor;

impl serde::de::Visitor<'_> for MonthVisitor {
    type Value = MonthStamp;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a yyyymm month as a string or integer")
    }

    fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<MonthStamp, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<MonthStamp, E> {
        self.visit_str(&v.to_string())
    }

    fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<MonthStamp, E> {
        self.visit_str(&v.to_string())
    }
}

/// Accepts `"195712"`, `"1957-12"` or the integer `195712`.
impl<'de> Deserialize<'de> for MonthStamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(MonthVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn successor_rolls_over_year() {
        let dec = MonthStamp::new(1957, 12).unwrap();
        assert_eq!(dec.succ(), MonthStamp::new(1958, 1).unwrap());
        assert_eq!(dec.succ().pred(), dec);
    }

    #[test]
    fn parse_and_display_roundtrip() {
        let m: MonthStamp = "1927-03".parse().unwrap();
        assert_eq!(m.to_string(), "192703");
        assert_eq!(MonthStamp::parse_yyyymm("192713"), None);
        assert_eq!(MonthStamp::parse_yyyymm("19271"), None);
    }

    #[test]
    fn ordering_is_chronological() {
        let a = MonthStamp::new(1988, 12).unwrap();
        let b = MonthStamp::new(1989, 1).unwrap();
        assert!(a < b);
        assert_eq!(a.months_until(b), 1);
        assert_eq!(
            MonthStamp::new(1989, 1).unwrap().months_until(MonthStamp::new(2019, 12).unwrap()) + 1,
            372
        );
    }
}
