//! Fixed-width bitstrings shared by the QUBO and simulator layers.

use std::fmt;

use crate::error::{Error, Result};

/// A measurement outcome or QUBO assignment over up to 64 bits.
///
/// Bit `q` is qubit `q` of the simulator and bit position `q` of the QUBO
/// variable order. The text form puts bit 0 leftmost: `"10010"` has bits
/// 0 and 3 set. A basis-state index packs bit `q` at `1 << q`, so the text
/// form is *not* the binary rendering of the index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    len: u8,
    bits: u64,
}

impl Bitstring {
    /// Build from a basis-state index; bits above `len` are masked off.
    pub fn from_index(index: u64, len: usize) -> Self {
        assert!(len <= 64, "bitstring length over 64");
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Self {
            len: len as u8,
            bits: index & mask,
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self::from_index(0, len)
    }

    /// Parse a text form such as `"10010"` (bit 0 leftmost).
    pub fn from_text(text: &str) -> Result<Self> {
        if text.len() > 64 {
            return Err(Error::LengthMismatch {
                expected: 64,
                got: text.len(),
            });
        }
        let mut bits = 0u64;
        for (q, c) in text.chars().enumerate() {
            match c {
                '1' => bits |= 1 << q,
                '0' => {}
                other => {
                    return Err(Error::InvalidInstance(format!(
                        "invalid bit character `{other}`"
                    )))
                }
            }
        }
        Ok(Self {
            len: text.len() as u8,
            bits,
        })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Basis-state index with bit `q` at weight `1 << q`.
    pub fn index(&self) -> u64 {
        self.bits
    }

    pub fn bit(&self, q: usize) -> bool {
        debug_assert!(q < self.len());
        (self.bits >> q) & 1 == 1
    }

    pub fn set_bit(&mut self, q: usize, value: bool) {
        debug_assert!(q < self.len());
        if value {
            self.bits |= 1 << q;
        } else {
            self.bits &= !(1 << q);
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len() {
            write!(f, "{}", u8::from(self.bit(q)))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring({self})")
    }
}

impl serde::Serialize for Bitstring {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Bitstring {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Bitstring::from_text(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let b = Bitstring::from_text("10010").unwrap();
        assert_eq!(b.len(), 5);
        assert!(b.bit(0));
        assert!(!b.bit(1));
        assert!(b.bit(3));
        assert_eq!(b.index(), 0b01001);
        assert_eq!(b.to_string(), "10010");
    }

    #[test]
    fn from_index_masks() {
        let b = Bitstring::from_index(0b111_0101, 3);
        assert_eq!(b.index(), 0b101);
        assert_eq!(b.to_string(), "101");
    }

    #[test]
    fn rejects_bad_chars() {
        assert!(Bitstring::from_text("10x").is_err());
    }
}
