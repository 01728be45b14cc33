//! Mode ordering shared by every matrix in the crate.
//!
//! The ten quadratures are laid out as
//! `(A_c1, B_c1, A_c2, B_c2, A_m, B_m, q, p, A_e, B_e)`, i.e. mode `k` owns
//! rows `2k` and `2k + 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of bosonic modes.
pub const NUM_MODES: usize = 5;
/// Number of real quadratures.
pub const DIM: usize = 2 * NUM_MODES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Cavity-1 photons.
    C1,
    /// Cavity-2 photons.
    C2,
    /// Magnon.
    M,
    /// Phonon (mechanical q, p).
    B,
    /// Atomic ensemble.
    E,
}

impl Mode {
    /// All modes in matrix order.
    pub const ORDER: [Mode; NUM_MODES] = [Mode::C1, Mode::C2, Mode::M, Mode::B, Mode::E];

    pub fn index(self) -> usize {
        self as usize
    }

    /// First of the two quadrature rows owned by this mode.
    pub fn quadrature_offset(self) -> usize {
        2 * self.index()
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::C1 => "c1",
            Mode::C2 => "c2",
            Mode::M => "m",
            Mode::B => "b",
            Mode::E => "e",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "c1" => Ok(Mode::C1),
            "c2" => Ok(Mode::C2),
            "m" => Ok(Mode::M),
            "b" => Ok(Mode::B),
            "e" => Ok(Mode::E),
            other => Err(format!("unknown mode `{other}` (expected c1, c2, m, b or e)")),
        }
    }
}

/// Unordered pair of distinct modes, stored with `first < second` in matrix order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModePair {
    first: Mode,
    second: Mode,
}

impl ModePair {
    /// Returns `None` when both modes are the same.
    pub fn new(a: Mode, b: Mode) -> Option<Self> {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Less => Some(ModePair { first: a, second: b }),
            Greater => Some(ModePair { first: b, second: a }),
            Equal => None,
        }
    }

    pub fn first(&self) -> Mode {
        self.first
    }

    pub fn second(&self) -> Mode {
        self.second
    }

    /// All ten bipartitions in canonical order (c1c2, c1m, c1b, c1e, c2m, c2b, c2e, mb, me, be).
    pub fn all() -> Vec<ModePair> {
        let mut out = Vec::with_capacity(10);
        for (i, &a) in Mode::ORDER.iter().enumerate() {
            for &b in &Mode::ORDER[i + 1..] {
                out.push(ModePair { first: a, second: b });
            }
        }
        out
    }

    /// The four quadrature indices selected by this pair.
    pub fn indices(&self) -> [usize; 4] {
        let a = self.first.quadrature_offset();
        let b = self.second.quadrature_offset();
        [a, a + 1, b, b + 1]
    }

    /// Compact label, e.g. `mb` or `c1e`.
    pub fn label(&self) -> String {
        format!("{}{}", self.first, self.second)
    }
}

impl fmt::Display for ModePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.first, self.second)
    }
}

impl FromStr for ModePair {
    type Err = String;

    /// Accepts `c1b`, `be`, `c2m`, and separated forms such as `b-e` or `c1,m`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cleaned: String =
            s.trim().chars().filter(|c| !matches!(c, '-' | ',' | '_' | ' ')).collect::<String>().to_ascii_lowercase();
        let mut modes = Vec::new();
        let mut rest = cleaned.as_str();
        while !rest.is_empty() {
            let take = if rest.starts_with('c') { 2 } else { 1 };
            if rest.len() < take {
                return Err(format!("cannot parse mode pair `{s}`"));
            }
            modes.push(rest[..take].parse::<Mode>()?);
            rest = &rest[take..];
        }
        match modes.as_slice() {
            [a, b] => ModePair::new(*a, *b).ok_or_else(|| format!("pair `{s}` repeats a mode")),
            _ => Err(format!("cannot parse mode pair `{s}`")),
        }
    }
}

impl Serialize for ModePair {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for ModePair {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
