//! Strings as sequences of code points.
//!
//! The solver's alphabet is the inclusive code-point range `0 ..= 0x2FFFF`.
//! Values are stored as plain `u32` sequences rather than Rust `String`s so
//! that every alphabet point — including surrogates and unassigned planes —
//! is representable and comparisons are exact.

use std::fmt;

/// Largest code point in the solver alphabet (inclusive).
pub const MAX_CHAR: u32 = 0x2FFFF;

/// A string over the solver alphabet: a sequence of code points, each
/// `<= MAX_CHAR`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SmtString(Vec<u32>);

impl SmtString {
    /// The empty string.
    pub fn empty() -> Self {
        SmtString(Vec::new())
    }

    /// Builds a string from raw code points. Panics if any exceeds [`MAX_CHAR`];
    /// callers validate user input before reaching this point.
    pub fn from_code_points(cps: Vec<u32>) -> Self {
        assert!(
            cps.iter().all(|&c| c <= MAX_CHAR),
            "code point outside alphabet"
        );
        SmtString(cps)
    }

    /// Builds a string from a Rust literal, provided every char fits the
    /// alphabet. Intended for tests and internal constants.
    pub fn from_str_lossless(s: &str) -> Option<Self> {
        let mut cps = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let c = ch as u32;
            if c > MAX_CHAR {
                return None;
            }
            cps.push(c);
        }
        Some(SmtString(cps))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn code_points(&self) -> &[u32] {
        &self.0
    }

    /// Convert to a Rust string; code points with no `char` representation
    /// (surrogates) become U+FFFD.
    pub fn to_string_lossy(&self) -> String {
        self.0
            .iter()
            .map(|&c| char::from_u32(c).unwrap_or('\u{FFFD}'))
            .collect()
    }

    pub fn push(&mut self, c: u32) {
        assert!(c <= MAX_CHAR, "code point outside alphabet");
        self.0.push(c);
    }

    pub fn concat(&self, other: &SmtString) -> SmtString {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        SmtString(v)
    }

    pub fn reversed(&self) -> SmtString {
        let mut v = self.0.clone();
        v.reverse();
        SmtString(v)
    }

    /// Sub-range `[from, to)`, clamped to the string bounds.
    pub fn slice(&self, from: usize, to: usize) -> SmtString {
        let n = self.0.len();
        let from = from.min(n);
        let to = to.clamp(from, n);
        SmtString(self.0[from..to].to_vec())
    }

    /// True if `needle` occurs at byte.. code-point position `at`.
    pub fn occurs_at(&self, needle: &SmtString, at: usize) -> bool {
        at + needle.len() <= self.len() && self.0[at..at + needle.len()] == needle.0[..]
    }

    /// Position of the leftmost occurrence of `needle` at or after `from`,
    /// if any. The empty needle occurs at every position `from ..= len`.
    pub fn find_from(&self, needle: &SmtString, from: usize) -> Option<usize> {
        if from > self.len() {
            return None;
        }
        (from..=self.len().saturating_sub(needle.len()))
            .find(|&i| self.occurs_at(needle, i))
    }
}

impl From<&str> for SmtString {
    /// Test-friendly conversion; panics on out-of-alphabet chars.
    fn from(s: &str) -> Self {
        SmtString::from_str_lossless(s).expect("char outside solver alphabet")
    }
}

impl fmt::Debug for SmtString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"")?;
        for &c in &self.0 {
            match char::from_u32(c) {
                Some(ch) if (0x20..0x7f).contains(&c) && ch != '"' && ch != '\\' => {
                    write!(f, "{ch}")?
                }
                _ => write!(f, "\\u{{{c:x}}}")?,
            }
        }
        write!(f, "\"")
    }
}
