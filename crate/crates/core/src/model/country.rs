use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// ISO-3166-1 alpha-2 country code, always uppercase ASCII.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct CountryCode([u8; 2]);

impl CountryCode {
    pub fn new(code: &str) -> Result<Self> {
        match code.as_bytes() {
            [a, b] if a.is_ascii_uppercase() && b.is_ascii_uppercase() => Ok(Self([*a, *b])),
            _ => Err(Error::InvalidCountry(code.to_string())),
        }
    }

    pub fn as_str(&self) -> &str {
        // Both bytes are ASCII uppercase by construction.
        std::str::from_utf8(&self.0).expect("ascii country code")
    }
}

impl Ord for CountryCode {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        u16::from_be_bytes(self.0).cmp(&u16::from_be_bytes(other.0))
    }
}

impl PartialOrd for CountryCode {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for CountryCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s)
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl serde::Serialize for CountryCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> serde::Deserialize<'de> for CountryCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::new(&s).map_err(serde::de::Error::custom)
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

/// The fixed, ordered set of countries a run works with. Its size is the
/// cardinality `K` used by the complexity index and by table shapes.
#[derive(Clone, PartialEq, Eq)]
pub struct Universe {
    codes: Arc<[CountryCode]>,
    index: Arc<HashMap<CountryCode, usize>>,
}

impl Universe {
    /// Builds a universe from codes; order is normalized to sorted order.
    pub fn new<I>(codes: I) -> Result<Self>
    where
        I: IntoIterator<Item = CountryCode>,
    {
        let mut codes: Vec<CountryCode> = codes.into_iter().collect();
        codes.sort();
        codes.dedup();
        if codes.is_empty() {
            return Err(Error::Empty("country universe"));
        }
        let index = codes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        Ok(Self {
            codes: codes.into(),
            index: Arc::new(index),
        })
    }

    pub fn from_strs<S: AsRef<str>>(codes: &[S]) -> Result<Self> {
        let parsed = codes
            .iter()
            .map(|c| CountryCode::new(c.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parsed)
    }

    /// The packaged default list of 181 countries.
    pub fn default_181() -> Self {
        Self::from_strs(&DEFAULT_COUNTRIES).expect("packaged country list is valid")
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn contains(&self, code: CountryCode) -> bool {
        self.index.contains_key(&code)
    }

    pub fn index_of(&self, code: CountryCode) -> Option<usize> {
        self.index.get(&code).copied()
    }

    pub fn codes(&self) -> &[CountryCode] {
        &self.codes
    }

    /// Parses a code and checks membership.
    pub fn parse(&self, code: &str) -> Result<CountryCode> {
        let c = CountryCode::new(code)?;
        if self.contains(c) {
            Ok(c)
        } else {
            Err(Error::UnknownCountry(code.to_string()))
        }
    }

    /// All ordered pairs `(origin, destination)` with `origin != destination`.
    pub fn pairs(&self) -> impl Iterator<Item = (CountryCode, CountryCode)> + '_ {
        self.codes.iter().flat_map(move |&o| {
            self.codes
                .iter()
                .filter(move |&&d| d != o)
                .map(move |&d| (o, d))
        })
    }
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.codes.iter()).finish()
    }
}

pub const DEFAULT_COUNTRIES: [&str; 181] = [
    "AF", "AL", "DZ", "AO", "AR", "AM", "AU", "AT", "AZ", "BS", "BH", "BD", "BB", "BY", "BE",
    "BZ", "BJ", "BT", "BO", "BA", "BW", "BR", "BN", "BG", "BF", "BI", "CV", "KH", "CM", "CA",
    "CF", "TD", "CL", "CN", "CO", "KM", "CG", "CD", "CR", "CI", "HR", "CU", "CY", "CZ", "DK",
    "DJ", "DM", "DO", "EC", "EG", "SV", "GQ", "EE", "SZ", "ET", "FJ", "FI", "FR", "GA", "GM",
    "GE", "DE", "GH", "GR", "GD", "GT", "GN", "GW", "GY", "HT", "HN", "HK", "HU", "IS", "IN",
    "ID", "IQ", "IE", "IL", "IT", "JM", "JP", "JO", "KZ", "KE", "KI", "KW", "KG", "LA", "LV",
    "LB", "LS", "LR", "LY", "LT", "LU", "MG", "MW", "MY", "MV", "ML", "MT", "MR", "MU", "MX",
    "MD", "MN", "ME", "MA", "MZ", "MM", "NA", "NP", "NL", "NZ", "NI", "NE", "NG", "MK", "NO",
    "OM", "PK", "PA", "PG", "PY", "PE", "PH", "PL", "PT", "PR", "QA", "RO", "RU", "RW", "WS",
    "ST", "SA", "SN", "RS", "SC", "SL", "SG", "SK", "SI", "SB", "SO", "ZA", "KR", "SS", "ES",
    "LK", "LC", "VC", "SD", "SR", "SE", "CH", "TW", "TJ", "TZ", "TH", "TL", "TG", "TO", "TT",
    "TN", "TR", "UG", "UA", "AE", "GB", "US", "UY", "UZ", "VU", "VE", "VN", "YE", "ZM", "ZW",
    "PS",
];
