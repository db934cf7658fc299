//! Signed supports `S±(v) = {(sign(v_j), j) : v_j ≠ 0}`.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Negative,
    Positive,
}

impl Sign {
    /// Sign of a nonzero value; `None` for zero (and NaN).
    pub fn of(v: f64) -> Option<Sign> {
        if v > 0.0 {
            Some(Sign::Positive)
        } else if v < 0.0 {
            Some(Sign::Negative)
        } else {
            None
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Negative => -1.0,
            Sign::Positive => 1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Positive => Sign::Negative,
        }
    }

    pub fn from_char(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Positive),
            '-' => Some(Sign::Negative),
            _ => None,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value() as i8)
    }
}

/// A set of `(index, sign)` pairs with unique indices, kept sorted by index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SignedSupport {
    entries: Vec<(usize, Sign)>,
}

impl SignedSupport {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut entries: Vec<(usize, Sign)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidSupport("duplicate index".into()));
        }
        Ok(Self { entries })
    }

    pub fn from_vector<'a, I>(values: I) -> Self
    where
        I: IntoIterator<Item = &'a f64>,
    {
        let entries = values
            .into_iter()
            .enumerate()
            .filter_map(|(j, &v)| Sign::of(v).map(|s| (j, s)))
            .collect();
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Sign)> + '_ {
        self.entries.iter().copied()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn sign_of(&self, index: usize) -> Option<Sign> {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .ok()
            .map(|k| self.entries[k].1)
    }

    pub fn flipped(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|&(j, s)| (j, s.flip())).collect(),
        }
    }

    /// Multiplies every sign by `sign(factor)`; a zero factor empties the set.
    pub fn scaled_by(&self, factor: f64) -> Self {
        match Sign::of(factor) {
            Some(Sign::Positive) => self.clone(),
            Some(Sign::Negative) => self.flipped(),
            None => Self::empty(),
        }
    }

    /// 64-bit FNV-1a digest of the entries, stable across runs and platforms.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |b: u8| {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        };
        for &(j, s) in &self.entries {
            for b in (j as u64).to_le_bytes() {
                feed(b);
            }
            feed(if s == Sign::Positive { b'+' } else { b'-' });
        }
        h
    }
}

impl fmt::Display for SignedSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (j, s)) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            let c = if s == Sign::Positive { '+' } else { '-' };
            write!(f, "{c}{j}")?;
        }
        write!(f, "}}")
    }
}

struct Entry(usize, Sign);

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Entry", 2)?;
        st.serialize_field("index", &self.0)?;
        st.serialize_field("sign", &self.1)?;
        st.end()
    }
}

impl Serialize for SignedSupport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.entries.iter().map(|&(j, s)| Entry(j, s)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vector_skips_zeros() {
        let s = SignedSupport::from_vector(&[0.0, -2.0, 0.0, 1e-300]);
        assert_eq!(s.indices(), vec![1, 3]);
        assert_eq!(s.sign_of(1), Some(Sign::Negative));
        assert_eq!(s.sign_of(0), None);
        assert_eq!(s.to_string(), "{-1,+3}");
    }

    #[test]
    fn equality_is_set_equality() {
        let a = SignedSupport::new(vec![(3, Sign::Positive), (1, Sign::Negative)]).unwrap();
        let b = SignedSupport::new(vec![(1, Sign::Negative), (3, Sign::Positive)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a, a.flipped());
        assert_ne!(a.digest(), a.flipped().digest());
        assert!(SignedSupport::new(vec![(1, Sign::Negative), (1, Sign::Positive)]).is_err());
    }

    #[test]
    fn json_shape() {
        let a = SignedSupport::new(vec![(0, Sign::Positive), (4, Sign::Negative)]).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            r#"[{"index":0,"sign":1},{"index":4,"sign":-1}]"#
        );
    }
}
