use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::rng::BitStream;

/// A point of `{0,1}^ℕ` whose bits are revealed on demand.
///
/// Bits below `prefix.len()` are explicit; the rest come from a keyed
/// [`BitStream`]. Querying at or beyond `cap` is an error.
#[derive(Clone)]
pub struct LazyWord {
    prefix: Vec<bool>,
    stream: BitStream,
    cap: usize,
}

impl LazyWord {
    pub fn new(prefix: Vec<bool>, stream: BitStream, cap: usize) -> Result<Self> {
        if prefix.len() > cap {
            return Err(Error::CapExceeded { index: prefix.len() - 1, cap });
        }
        Ok(LazyWord { prefix, stream, cap })
    }

    pub fn revealed(&self) -> &[bool] {
        &self.prefix
    }

    pub fn stream(&self) -> BitStream {
        self.stream
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn bit(&self, index: usize) -> Result<bool> {
        if index >= self.cap {
            return Err(Error::CapExceeded { index, cap: self.cap });
        }
        Ok(self.prefix.get(index).copied().unwrap_or_else(|| self.stream.bit(index)))
    }

    /// The first `len` bits.
    pub fn bits(&self, len: usize) -> Result<Vec<bool>> {
        (0..len).map(|i| self.bit(i)).collect()
    }

    pub fn starts_with(&self, w: &[bool]) -> Result<bool> {
        for (i, &b) in w.iter().enumerate() {
            if self.bit(i)? != b {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn first(&self, value: bool) -> Result<usize> {
        let mut i = 0;
        loop {
            if self.bit(i)? == value {
                return Ok(i);
            }
            i += 1;
        }
    }

    /// `k(ω)`: index of the first 0 bit.
    pub fn first_zero(&self) -> Result<usize> {
        self.first(false)
    }

    pub fn first_one(&self) -> Result<usize> {
        self.first(true)
    }

    /// `ω + 1̄`, adding with the carry moving to the right.
    pub fn succ(&self) -> Result<LazyWord> {
        self.flip_run(false)
    }

    /// `ω - 1̄`: leading 0s become 1s, the first 1 becomes 0.
    pub fn pred(&self) -> Result<LazyWord> {
        self.flip_run(true)
    }

    // Flips the leading run of !stop bits and the first `stop` bit.
    fn flip_run(&self, stop: bool) -> Result<LazyWord> {
        let k = self.first(stop)?;
        let mut prefix = self.bits(self.prefix.len().max(k + 1))?;
        for b in prefix.iter_mut().take(k) {
            *b = stop;
        }
        prefix[k] = !stop;
        Ok(LazyWord { prefix, stream: self.stream, cap: self.cap })
    }

    /// The explicit bits extended through the first 0, so that the column
    /// is readable from the prefix alone.
    pub fn column_prefix(&self) -> Result<Vec<bool>> {
        let k = self.first_zero()?;
        self.bits(self.prefix.len().max(k + 1))
    }
}

/// Words are equal when they share a stream and agree on every explicit bit.
impl PartialEq for LazyWord {
    fn eq(&self, other: &Self) -> bool {
        if self.stream != other.stream || self.cap != other.cap {
            return false;
        }
        let len = self.prefix.len().max(other.prefix.len());
        (0..len).all(|i| self.bit(i).ok() == other.bit(i).ok())
    }
}

impl Eq for LazyWord {}

impl Hash for LazyWord {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.stream.hash(state);
        self.cap.hash(state);
    }
}

impl fmt::Debug for LazyWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = self.prefix.iter().map(|&b| if b { '1' } else { '0' }).collect();
        write!(f, "LazyWord({bits}…#{:016x})", self.stream.key())
    }
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// Adds one to a little-endian bit string modulo `2^len`.
pub fn increment_bits(bits: &[bool]) -> Vec<bool> {
    let mut out = bits.to_vec();
    for b in out.iter_mut() {
        if *b {
            *b = false;
        } else {
            *b = true;
            break;
        }
    }
    out
}

/// Subtracts one from a little-endian bit string modulo `2^len`.
pub fn decrement_bits(bits: &[bool]) -> Vec<bool> {
    let mut out = bits.to_vec();
    for b in out.iter_mut() {
        if *b {
            *b = false;
            break;
        } else {
            *b = true;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(bits: &str, key: u64) -> LazyWord {
        LazyWord::new(parse_bits(bits).unwrap(), BitStream::new(key), 64).unwrap()
    }

    #[test]
    fn succ_without_carry() {
        let w = word("0", 1);
        let s = w.succ().unwrap();
        assert!(s.bit(0).unwrap());
        for i in 1..40 {
            assert_eq!(s.bit(i).unwrap(), w.bit(i).unwrap());
        }
    }

    #[test]
    fn succ_carries_through_ones() {
        let s = word("110", 2).succ().unwrap();
        assert_eq!(s.bits(3).unwrap(), parse_bits("001").unwrap());
        assert_eq!(s.bit(10).unwrap(), BitStream::new(2).bit(10));
    }

    #[test]
    fn pred_inverts_succ() {
        for key in 0..200 {
            let w = word("", key);
            assert_eq!(w.succ().unwrap().pred().unwrap(), w);
            assert_eq!(w.pred().unwrap().succ().unwrap(), w);
        }
    }

    #[test]
    fn odometer_cycle_on_p_bits() {
        // brute force: 2^p successors return the first p bits to their start,
        // and no earlier return happens
        for p in 1..=8usize {
            for start in 0..(1u32 << p) {
                let bits: Vec<bool> = (0..p).map(|i| (start >> i) & 1 == 1).collect();
                let mut prefix = bits.clone();
                prefix.push(false); // keeps carries inside the revealed prefix
                let mut w = LazyWord::new(prefix, BitStream::new(7), 64).unwrap();
                for step in 1..=(1usize << p) {
                    w = w.succ().unwrap();
                    let now = w.bits(p).unwrap();
                    assert_eq!(now == bits, step == 1 << p, "p={p} start={start} step={step}");
                }
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let w = LazyWord::new(vec![true; 4], BitStream::new(0), 4).unwrap();
        assert_eq!(w.first_zero(), Err(Error::CapExceeded { index: 4, cap: 4 }));
        assert!(w.succ().is_err());
        assert!(w.pred().is_ok());
        assert!(LazyWord::new(vec![true; 5], BitStream::new(0), 4).is_err());
    }

    #[test]
    fn equality_is_semantic() {
        let stream = BitStream::new(11);
        let short = LazyWord::new(vec![], stream, 64).unwrap();
        let long = LazyWord::new(short.bits(10).unwrap(), stream, 64).unwrap();
        assert_eq!(short, long);
        let mut flipped = long.bits(10).unwrap();
        flipped[9] = !flipped[9];
        assert_ne!(short, LazyWord::new(flipped, stream, 64).unwrap());
    }

    #[test]
    fn bit_string_arithmetic() {
        assert_eq!(increment_bits(&parse_bits("110").unwrap()), parse_bits("001").unwrap());
        assert_eq!(increment_bits(&parse_bits("11").unwrap()), parse_bits("00").unwrap());
        assert_eq!(decrement_bits(&parse_bits("001").unwrap()), parse_bits("110").unwrap());
        assert_eq!(decrement_bits(&parse_bits("00").unwrap()), parse_bits("11").unwrap());
        assert_eq!(bits_to_string(&parse_bits("0110").unwrap()), "0110");
        assert!(parse_bits("012").is_none());
    }
}
