//! The fixed fluctuation basis (z, z*, ν, ν*, μ).
//!
//! z/z* are the field-amplitude fluctuations, ν/ν* the collective
//! polarization fluctuations and μ the inversion fluctuation. Every matrix
//! in the engine is indexed in this order.

use std::fmt;
use std::str::FromStr;

/// One of the five fluctuation variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluctVar {
    /// z — field amplitude
    Field,
    /// z* — conjugate field amplitude
    FieldConj,
    /// ν — polarization
    Pol,
    /// ν* — conjugate polarization
    PolConj,
    /// μ — inversion
    Inv,
}

impl FluctVar {
    pub const ALL: [FluctVar; 5] = [
        FluctVar::Field,
        FluctVar::FieldConj,
        FluctVar::Pol,
        FluctVar::PolConj,
        FluctVar::Inv,
    ];

    /// Position in the basis ordering (z, z*, ν, ν*, μ).
    pub fn index(self) -> usize {
        match self {
            FluctVar::Field => 0,
            FluctVar::FieldConj => 1,
            FluctVar::Pol => 2,
            FluctVar::PolConj => 3,
            FluctVar::Inv => 4,
        }
    }

    /// ASCII label used in CLI arguments and CSV headers.
    pub fn label(self) -> &'static str {
        match self {
            FluctVar::Field => "z",
            FluctVar::FieldConj => "z*",
            FluctVar::Pol => "nu",
            FluctVar::PolConj => "nu*",
            FluctVar::Inv => "mu",
        }
    }
}

impl fmt::Display for FluctVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// An ordered pair of basis variables selecting one covariance entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarPair(pub FluctVar, pub FluctVar);

impl VarPair {
    pub fn indices(self) -> (usize, usize) {
        (self.0.index(), self.1.index())
    }

    /// Natural leading order in X of this covariance entry (power of X),
    /// used as the display normalization: mixed-conjugation field/atom
    /// entries are O(X⁴), like-conjugation (anomalous) entries O(X²), and
    /// entries involving the inversion are left unnormalized.
    pub fn normalization(self) -> u8 {
        use FluctVar::*;
        let starred = |v: FluctVar| matches!(v, FieldConj | PolConj);
        match (self.0, self.1) {
            (Inv, _) | (_, Inv) => 0,
            (a, b) if starred(a) != starred(b) => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for VarPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0, self.1)
    }
}

// Longest-first so that "nu*" wins over "nu" and "z*" over "z".
const TOKENS: [(&str, FluctVar); 10] = [
    ("nu*", FluctVar::PolConj),
    ("ν*", FluctVar::PolConj),
    ("nu", FluctVar::Pol),
    ("z*", FluctVar::FieldConj),
    ("mu", FluctVar::Inv),
    ("ν", FluctVar::Pol),
    ("z", FluctVar::Field),
    ("μ", FluctVar::Inv),
    ("Z*", FluctVar::FieldConj),
    ("Z", FluctVar::Field),
];

fn take_var(s: &str) -> Option<(FluctVar, &str)> {
    TOKENS
        .iter()
        .find(|(tok, _)| s.starts_with(tok))
        .map(|(tok, var)| (*var, &s[tok.len()..]))
}

impl FromStr for FluctVar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match take_var(s.trim()) {
            Some((v, rest)) if rest.is_empty() => Ok(v),
            _ => Err(format!("unknown fluctuation variable `{s}`")),
        }
    }
}

impl FromStr for VarPair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || format!("unknown variable pair `{s}` (examples: nu*z, z*z, nu*nu*)");
        let (a, rest) = take_var(t).ok_or_else(err)?;
        match take_var(rest) {
            Some((b, "")) => Ok(VarPair(a, b)),
            _ => Err(err()),
        }
    }
}
