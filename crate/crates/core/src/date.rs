//! Calendar dates and timestamps without timezone handling.
//!
//! All trade-log times are interpreted as UTC calendar days. Dates are stored
//! as a day count since 1970-01-01 so day arithmetic and ordering are cheap;
//! conversion to and from year/month/day uses the standard civil-calendar
//! algorithms.

use core::fmt;
use core::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DateError {
    #[error("malformed date or time")]
    Malformed,
    #[error("date or time component out of range")]
    OutOfRange,
}

/// A civil calendar date, stored as days since 1970-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CivilDate(i32);

impl CivilDate {
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Result<Self, DateError> {
        if !(1..=12).contains(&month) || day < 1 || day > days_in_month(year, month) {
            return Err(DateError::OutOfRange);
        }
        Ok(CivilDate(days_from_civil(year, month, day)))
    }

    /// Days since 1970-01-01 (may be negative).
    pub fn from_days(days: i32) -> Self {
        CivilDate(days)
    }

    pub fn days(self) -> i32 {
        self.0
    }

    pub fn ymd(self) -> (i32, u32, u32) {
        civil_from_days(self.0)
    }

    /// The next calendar day.
    pub fn succ(self) -> Self {
        CivilDate(self.0 + 1)
    }
}

impl fmt::Display for CivilDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, m, d) = self.ymd();
        write!(f, "{y:04}-{m:02}-{d:02}")
    }
}

impl FromStr for CivilDate {
    type Err = DateError;

    fn from_str(s: &str) -> Result<Self, DateError> {
        parse_date(s.trim())
    }
}

/// A date plus a second-of-day, stored as seconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub fn from_epoch_seconds(secs: i64) -> Self {
        Timestamp(secs)
    }

    pub fn new(date: CivilDate, second_of_day: u32) -> Self {
        Timestamp(date.days() as i64 * 86_400 + second_of_day as i64)
    }

    pub fn epoch_seconds(self) -> i64 {
        self.0
    }

    pub fn date(self) -> CivilDate {
        CivilDate(self.0.div_euclid(86_400) as i32)
    }

    pub fn second_of_day(self) -> u32 {
        self.0.rem_euclid(86_400) as u32
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.second_of_day();
        write!(
            f,
            "{} {:02}:{:02}:{:02}",
            self.date(),
            s / 3600,
            (s / 60) % 60,
            s % 60
        )
    }
}

impl FromStr for Timestamp {
    type Err = DateError;

    fn from_str(s: &str) -> Result<Self, DateError> {
        parse_timestamp(s)
    }
}

/// Parses `YYYY/M/D` or `YYYY-M-D`, zero-padded or not.
pub fn parse_date(s: &str) -> Result<CivilDate, DateError> {
    let sep = if s.contains('/') { '/' } else { '-' };
    let mut parts = s.split(sep);
    let year = next_int(&mut parts)?;
    let month = next_int(&mut parts)? as u32;
    let day = next_int(&mut parts)? as u32;
    if parts.next().is_some() {
        return Err(DateError::Malformed);
    }
    CivilDate::from_ymd(year, month, day)
}

/// Parses `<date> H:MM:SS` (seconds optional); a bare date means midnight.
/// Repeated spaces between date and time are tolerated.
pub fn parse_timestamp(s: &str) -> Result<Timestamp, DateError> {
    let mut fields = s.split_whitespace();
    let date = parse_date(fields.next().ok_or(DateError::Malformed)?)?;
    let second_of_day = match fields.next() {
        None => 0,
        Some(time) => {
            let mut parts = time.split(':');
            let h = next_int(&mut parts)? as u32;
            let m = next_int(&mut parts)? as u32;
            let sec = match parts.next() {
                None => 0,
                Some(v) => v.parse::<u32>().map_err(|_| DateError::Malformed)?,
            };
            if parts.next().is_some() {
                return Err(DateError::Malformed);
            }
            if h > 23 || m > 59 || sec > 59 {
                return Err(DateError::OutOfRange);
            }
            h * 3600 + m * 60 + sec
        }
    };
    if fields.next().is_some() {
        return Err(DateError::Malformed);
    }
    Ok(Timestamp::new(date, second_of_day))
}

fn next_int<'a>(parts: &mut impl Iterator<Item = &'a str>) -> Result<i32, DateError> {
    parts
        .next()
        .ok_or(DateError::Malformed)?
        .parse::<i32>()
        .map_err(|_| DateError::Malformed)
}

fn is_leap(year: i32) -> bool {
    year % 4 == 0 && (year % 100 != 0 || year % 400 == 0)
}

fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        2 => 28,
        _ => 0,
    }
}

// Civil-from-days and days-from-civil follow the classic era-based algorithms.
fn days_from_civil(y: i32, m: u32, d: u32) -> i32 {
    let y = i64::from(y) - i64::from(m <= 2);
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let mp = i64::from((m + 9) % 12);
    let doy = (153 * mp + 2) / 5 + i64::from(d) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    (era * 146_097 + doe - 719_468) as i32
}

fn civil_from_days(z: i32) -> (i32, u32, u32) {
    let z = i64::from(z) + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    ((y + i64::from(m <= 2)) as i32, m, d)
}

#[cfg(feature = "serde")]
mod serde_impls {
    use super::{CivilDate, Timestamp};
    use alloc::string::ToString;
    use core::str::FromStr;
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    impl Serialize for CivilDate {
        fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
            serializer.serialize_str(&self.to_string())
        }
    }

    impl<'de> Deserialize<'de> for CivilDate {
        fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
            let s = <&str>::deserialize(deserializer)?;
            CivilDate::from_str(s).map_err(de::Error::custom)
        }
    }

    impl Serialize for Timestamp {
        fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
            serializer.serialize_str(&self.to_string())
        }
    }

    impl<'de> Deserialize<'de> for Timestamp {
        fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
            let s = <&str>::deserialize(deserializer)?;
            Timestamp::from_str(s).map_err(de::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_unpadded_slash_form() {
        let t = parse_timestamp("2013/10/1  0:28:58").unwrap();
        assert_eq!(t.date(), CivilDate::from_ymd(2013, 10, 1).unwrap());
        assert_eq!(t.second_of_day(), 28 * 60 + 58);
    }

    #[test]
    fn parses_padded_dash_form() {
        let t = parse_timestamp("2013-10-01 00:28:58").unwrap();
        assert_eq!(t, parse_timestamp("2013/10/1 0:28:58").unwrap());
    }

    #[test]
    fn ymd_roundtrip_across_leap_years() {
        for &(y, m, d) in &[(1970, 1, 1), (2012, 2, 29), (2013, 12, 31), (2100, 3, 1)] {
            let date = CivilDate::from_ymd(y, m, d).unwrap();
            assert_eq!(date.ymd(), (y, m, d));
        }
        assert_eq!(CivilDate::from_ymd(1970, 1, 1).unwrap().days(), 0);
    }

    #[test]
    fn rejects_bad_components() {
        assert!(CivilDate::from_ymd(2013, 2, 29).is_err());
        assert!(parse_date("2013-13-01").is_err());
        assert!(parse_timestamp("2013-01-01 24:00:00").is_err());
        assert!(parse_timestamp("notadate").is_err());
    }

    #[test]
    fn display_is_sortable_iso() {
        let d = CivilDate::from_ymd(2013, 8, 30).unwrap();
        assert_eq!(d.to_string(), "2013-08-30");
        let t = Timestamp::new(d, 3661);
        assert_eq!(t.to_string(), "2013-08-30 01:01:01");
    }
}
