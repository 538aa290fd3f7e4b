//! International Patent Classification codes.
//!
//! A code is read as a prefix of the full hierarchy
//! `section / class / subclass / main group + subgroup`, e.g. `G06F 3/01`
//! is section `G`, class `G06`, subclass `G06F`, group `G06F3/01`.
//! Whitespace between the subclass and the group part is dropped, so
//! `"G06F 3/01"` and `"G06F3/01"` are the same code.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hierarchy depth of an IPC code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IpcLevel {
    Section = 1,
    Class = 2,
    Subclass = 3,
    Group = 4,
}

impl IpcLevel {
    pub fn from_depth(depth: u8) -> Result<Self, IpcError> {
        match depth {
            1 => Ok(IpcLevel::Section),
            2 => Ok(IpcLevel::Class),
            3 => Ok(IpcLevel::Subclass),
            4 => Ok(IpcLevel::Group),
            other => Err(IpcError::InvalidLevel(other)),
        }
    }

    pub fn depth(self) -> u8 {
        self as u8
    }
}

impl Default for IpcLevel {
    fn default() -> Self {
        IpcLevel::Subclass
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IpcError {
    #[error("invalid IPC code {0:?}")]
    Malformed(String),
    #[error("invalid IPC level {0} (expected 1..=4)")]
    InvalidLevel(u8),
}

/// A validated IPC code in canonical (whitespace-free, upper-case) form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IpcCode {
    raw: String,
    level: IpcLevel,
}

impl IpcCode {
    pub fn parse(input: &str) -> Result<Self, IpcError> {
        let canonical: String = input
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_ascii_uppercase())
            .collect();
        let level = classify(&canonical).ok_or_else(|| IpcError::Malformed(input.to_string()))?;
        Ok(IpcCode {
            raw: canonical,
            level,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    pub fn level(&self) -> IpcLevel {
        self.level
    }

    /// Section letter, used to colour nodes in exported networks.
    pub fn section(&self) -> char {
        self.raw.as_bytes()[0] as char
    }

    /// Truncate to `level`. Codes already at or above that depth are
    /// returned unchanged.
    pub fn truncate(&self, level: IpcLevel) -> IpcCode {
        if level >= self.level {
            return self.clone();
        }
        let len = match level {
            IpcLevel::Section => 1,
            IpcLevel::Class => 3,
            IpcLevel::Subclass => 4,
            IpcLevel::Group => unreachable!("group is the deepest level"),
        };
        IpcCode {
            raw: self.raw[..len].to_string(),
            level,
        }
    }
}

impl fmt::Display for IpcCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl FromStr for IpcCode {
    type Err = IpcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IpcCode::parse(s)
    }
}

/// Section letter of an arbitrary code string, falling back to `'?'`.
pub fn section_of(code: &str) -> char {
    code.chars()
        .next()
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_uppercase())
        .unwrap_or('?')
}

fn classify(code: &str) -> Option<IpcLevel> {
    let b = code.as_bytes();
    if b.is_empty() || !(b'A'..=b'H').contains(&b[0]) {
        return None;
    }
    if b.len() == 1 {
        return Some(IpcLevel::Section);
    }
    if b.len() < 3 || !b[1].is_ascii_digit() || !b[2].is_ascii_digit() {
        return None;
    }
    if b.len() == 3 {
        return Some(IpcLevel::Class);
    }
    if !b[3].is_ascii_uppercase() {
        return None;
    }
    if b.len() == 4 {
        return Some(IpcLevel::Subclass);
    }
    // main group: 1-4 digits, '/', subgroup: 2-6 digits
    let group = &code[4..];
    let (main, sub) = group.split_once('/')?;
    let digits = |s: &str, lo: usize, hi: usize| {
        (lo..=hi).contains(&s.len()) && s.bytes().all(|c| c.is_ascii_digit())
    };
    if digits(main, 1, 4) && digits(sub, 2, 6) {
        Some(IpcLevel::Group)
    } else {
        None
    }
}
