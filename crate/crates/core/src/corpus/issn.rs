//! ISSN normalization and mod-11 check-digit validation.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A validated ISSN in its compact 8-character form (`00280836`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Issn(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IssnError {
    #[error("malformed ISSN {0:?}")]
    Malformed(String),
    #[error("ISSN {raw:?} fails its check digit (expected {expected})")]
    ChecksumFailure { raw: String, expected: char },
}

/// Strips hyphens and whitespace, uppercases, and validates the check digit.
pub fn normalize_issn(raw: &str) -> Result<Issn, IssnError> {
    let cleaned: String = raw
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '-')
        .flat_map(char::to_uppercase)
        .collect();
    let bytes = cleaned.as_bytes();
    if bytes.len() != 8
        || !bytes[..7].iter().all(u8::is_ascii_digit)
        || !(bytes[7].is_ascii_digit() || bytes[7] == b'X')
    {
        return Err(IssnError::Malformed(raw.to_string()));
    }
    let expected = check_digit(&bytes[..7]);
    if bytes[7] != expected {
        return Err(IssnError::ChecksumFailure {
            raw: raw.to_string(),
            expected: expected as char,
        });
    }
    Ok(Issn(cleaned))
}

/// Check character for the first seven ASCII digits: weights 8..2, mod 11,
/// with value 10 written as `X`.
fn check_digit(digits: &[u8]) -> u8 {
    let sum: u32 = digits
        .iter()
        .zip((2..=8u32).rev())
        .map(|(d, w)| u32::from(d - b'0') * w)
        .sum();
    match (11 - sum % 11) % 11 {
        10 => b'X',
        d => b'0' + d as u8,
    }
}

impl Issn {
    /// Builds an ISSN from a serial number below 10^7 by appending its check digit.
    pub fn from_serial(serial: u32) -> Self {
        assert!(serial < 10_000_000, "ISSN serial out of range");
        let mut s = format!("{serial:07}");
        let check = check_digit(s.as_bytes());
        s.push(check as char);
        Issn(s)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The conventional `NNNN-NNNC` display form.
    pub fn hyphenated(&self) -> String {
        format!("{}-{}", &self.0[..4], &self.0[4..])
    }
}

impl fmt::Display for Issn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Issn {
    type Error = IssnError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        normalize_issn(&value)
    }
}

impl From<Issn> for String {
    fn from(value: Issn) -> Self {
        value.0
    }
}

impl std::str::FromStr for Issn {
    type Err = IssnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_issn(s)
    }
}
