//! Calendar days as integer offsets from 1970-01-01, and calendar months.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A calendar day, stored as the number of days since 1970-01-01.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DayStamp(i32);

impl DayStamp {
    pub const fn from_index(days: i32) -> Self {
        Self(days)
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> Result<Self> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return Err(Error::InvalidDate(format!("{year:04}-{month:02}-{day:02}")));
        }
        Ok(Self(days_from_civil(year, month, day)))
    }

    pub const fn index(self) -> i32 {
        self.0
    }

    /// `(year, month, day)` in the proleptic Gregorian calendar.
    pub fn ymd(self) -> (i32, u32, u32) {
        civil_from_days(self.0)
    }

    pub fn year(self) -> i32 {
        self.ymd().0
    }

    pub fn year_month(self) -> YearMonth {
        let (y, m, _) = self.ymd();
        YearMonth::new(y, m).expect("month from civil conversion")
    }

    /// Signed day difference `self - earlier`.
    pub fn days_since(self, earlier: DayStamp) -> i32 {
        self.0 - earlier.0
    }

    pub fn add_days(self, days: i32) -> Self {
        Self(self.0 + days)
    }
}

impl FromStr for DayStamp {
    type Err = Error;

    /// Parses `YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDate(s.to_string());
        let b = s.as_bytes();
        if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
            return Err(bad());
        }
        let digits = |r: std::ops::Range<usize>| -> Result<u32> {
            let part = &s[r];
            if !part.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            part.parse().map_err(|_| bad())
        };
        let y = digits(0..4)? as i32;
        let m = digits(5..7)?;
        let d = digits(8..10)?;
        Self::from_ymd(y, m, d).map_err(|_| bad())
    }
}

impl fmt::Display for DayStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, m, d) = self.ymd();
        write!(f, "{y:04}-{m:02}-{d:02}")
    }
}

impl fmt::Debug for DayStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

// Howard Hinnant's days_from_civil / civil_from_days.
fn days_from_civil(y: i32, m: u32, d: u32) -> i32 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y.rem_euclid(400) as u32;
    let mp = (m + 9) % 12;
    let doy = (153 * mp + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe as i32 - 719_468
}

fn civil_from_days(z: i32) -> (i32, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097) as u32;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe as i32 + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    (if m <= 2 { y + 1 } else { y }, m, d)
}

/// A calendar month.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u8,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidDate(format!("{year:04}-{month:02}")));
        }
        Ok(Self {
            year,
            month: month as u8,
        })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month as u32
    }

    /// Months since year 0, January.
    pub fn ordinal(self) -> i32 {
        self.year * 12 + self.month as i32 - 1
    }

    pub fn from_ordinal(ordinal: i32) -> Self {
        Self {
            year: ordinal.div_euclid(12),
            month: (ordinal.rem_euclid(12) + 1) as u8,
        }
    }

    pub fn next(self) -> Self {
        Self::from_ordinal(self.ordinal() + 1)
    }

    pub fn prev(self) -> Self {
        Self::from_ordinal(self.ordinal() - 1)
    }

    pub fn first_day(self) -> DayStamp {
        DayStamp::from_ymd(self.year, self.month(), 1).expect("first of month")
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    /// Parses `YYYY-MM`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDate(s.to_string());
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let y: i32 = y.parse().map_err(|_| bad())?;
        let m: u32 = m.parse().map_err(|_| bad())?;
        Self::new(y, m).map_err(|_| bad())
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl fmt::Debug for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An inclusive range of months.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonthRange {
    pub first: YearMonth,
    pub last: YearMonth,
}

impl MonthRange {
    pub fn new(first: YearMonth, last: YearMonth) -> Result<Self> {
        if last < first {
            return Err(Error::InvalidParameter(format!(
                "month range {first}..{last} is empty"
            )));
        }
        Ok(Self { first, last })
    }

    pub fn contains(&self, ym: YearMonth) -> bool {
        self.first <= ym && ym <= self.last
    }

    pub fn len(&self) -> usize {
        (self.last.ordinal() - self.first.ordinal() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = YearMonth> {
        (self.first.ordinal()..=self.last.ordinal()).map(YearMonth::from_ordinal)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.first.year()..=self.last.year()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epoch_is_day_zero() {
        assert_eq!(DayStamp::from_ymd(1970, 1, 1).unwrap().index(), 0);
        assert_eq!(DayStamp::from_ymd(1969, 12, 31).unwrap().index(), -1);
    }

    #[test]
    fn parse_and_display() {
        let d: DayStamp = "2020-02-29".parse().unwrap();
        assert_eq!(d.to_string(), "2020-02-29");
        assert!("2019-02-29".parse::<DayStamp>().is_err());
        assert!("2019-2-01".parse::<DayStamp>().is_err());
        assert!("2019-13-01".parse::<DayStamp>().is_err());
        assert_eq!("2021-10".parse::<YearMonth>().unwrap().to_string(), "2021-10");
        assert!("2021-1".parse::<YearMonth>().is_err());
    }

    #[test]
    fn month_arithmetic_wraps_years() {
        let dec = YearMonth::new(2020, 12).unwrap();
        assert_eq!(dec.next(), YearMonth::new(2021, 1).unwrap());
        assert_eq!(dec.next().prev(), dec);
        let r = MonthRange::new(YearMonth::new(2020, 11).unwrap(), YearMonth::new(2022, 12).unwrap())
            .unwrap();
        assert_eq!(r.len(), 26);
        assert_eq!(r.iter().count(), 26);
    }
}
