//! Bit-pair symbols and the packed pair buffer.
//!
//! Pairs are packed most-significant-first: pair 0 lives in bits 7..6 of
//! byte 0, pair 3 in bits 1..0. A trailing partial byte is zero-padded and
//! the padding is excluded by `pair_count`.

use std::fmt;

use crate::error::{Error, Result};

/// One of the four 2-bit patterns `00`, `01`, `10`, `11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitPair(u8);

impl BitPair {
    pub const P00: BitPair = BitPair(0);
    pub const P01: BitPair = BitPair(1);
    pub const P10: BitPair = BitPair(2);
    pub const P11: BitPair = BitPair(3);

    pub const ALL: [BitPair; 4] = [Self::P00, Self::P01, Self::P10, Self::P11];

    pub fn new(value: u8) -> Result<Self> {
        if value > 3 {
            return Err(Error::argument(format!("bit-pair value {value} is not in 0..=3")));
        }
        Ok(BitPair(value))
    }

    /// Keeps only the low two bits of `value`.
    #[inline]
    pub const fn from_bits(value: u8) -> Self {
        BitPair(value & 0b11)
    }

    #[inline]
    pub const fn value(self) -> u8 {
        self.0
    }

    /// Bit `index` of the pair in transmission order: 0 is the high bit, 1 the low bit.
    #[inline]
    pub const fn bit(self, index: u8) -> u8 {
        (self.0 >> (1 - (index & 1))) & 1
    }

    #[inline]
    pub const fn flip_bit(self, index: u8) -> Self {
        BitPair(self.0 ^ (0b10 >> (index & 1)))
    }

    #[inline]
    pub const fn hamming(self, other: BitPair) -> u32 {
        (self.0 ^ other.0).count_ones()
    }
}

impl fmt::Display for BitPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02b}", self.0)
    }
}

impl std::str::FromStr for BitPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "00" => Ok(Self::P00),
            "01" => Ok(Self::P01),
            "10" => Ok(Self::P10),
            "11" => Ok(Self::P11),
            other => Err(Error::argument(format!("`{other}` is not a bit-pair (00, 01, 10, 11)"))),
        }
    }
}

/// Packed sequence of bit-pairs with an explicit pair count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PairBuffer {
    bytes: Vec<u8>,
    pair_count: u64,
}

impl PairBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(pairs: usize) -> Self {
        PairBuffer {
            bytes: Vec::with_capacity(pairs.div_ceil(4)),
            pair_count: 0,
        }
    }

    /// Wraps raw bytes. Fails unless `pair_count <= 4 * bytes.len()`.
    ///
    /// Bytes beyond `ceil(pair_count / 4)` are dropped and the padding bits
    /// of the last byte are cleared, so equal pair sequences compare equal.
    pub fn from_parts(mut bytes: Vec<u8>, pair_count: u64) -> Result<Self> {
        let needed = bytes_for_pairs(pair_count);
        if needed > bytes.len() as u64 {
            return Err(Error::argument(format!(
                "pair count {pair_count} needs {needed} bytes, buffer has {}",
                bytes.len()
            )));
        }
        bytes.truncate(needed as usize);
        let used = (pair_count % 4) as u32;
        if used != 0 {
            if let Some(last) = bytes.last_mut() {
                *last &= !(0xffu8 >> (2 * used));
            }
        }
        Ok(PairBuffer { bytes, pair_count })
    }

    pub fn from_pairs<I: IntoIterator<Item = BitPair>>(pairs: I) -> Self {
        let mut buf = PairBuffer::new();
        buf.extend(pairs);
        buf
    }

    #[inline]
    pub fn pair_count(&self) -> u64 {
        self.pair_count
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pair_count == 0
    }

    /// Payload size in bits, padding excluded.
    pub fn bit_len(&self) -> u64 {
        self.pair_count * 2
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    #[inline]
    pub fn get(&self, index: u64) -> Option<BitPair> {
        if index >= self.pair_count {
            return None;
        }
        Some(self.pair_at(index as usize))
    }

    #[inline]
    pub(crate) fn pair_at(&self, index: usize) -> BitPair {
        let shift = 6 - 2 * (index & 3);
        BitPair::from_bits(self.bytes[index >> 2] >> shift)
    }

    #[inline]
    pub fn push(&mut self, pair: BitPair) {
        let slot = (self.pair_count & 3) as u32;
        if slot == 0 {
            self.bytes.push(pair.value() << 6);
        } else {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= pair.value() << (6 - 2 * slot);
        }
        self.pair_count += 1;
    }

    /// Appends `count` copies of `pair`, filling whole bytes at a time.
    pub fn push_run(&mut self, pair: BitPair, mut count: u64) {
        while count > 0 && self.pair_count & 3 != 0 {
            self.push(pair);
            count -= 1;
        }
        let fill = pair.value() * 0b0101_0101;
        let whole = count / 4;
        self.bytes.extend(std::iter::repeat_n(fill, whole as usize));
        self.pair_count += whole * 4;
        for _ in 0..count % 4 {
            self.push(pair);
        }
    }

    /// Inverts payload bit `bit` (MSB-first stream order).
    pub fn flip_bit(&mut self, bit: u64) -> Result<()> {
        if bit >= self.bit_len() {
            return Err(Error::argument(format!(
                "bit position {bit} outside payload of {} bits",
                self.bit_len()
            )));
        }
        self.bytes[(bit / 8) as usize] ^= 0x80 >> (bit % 8);
        Ok(())
    }

    pub fn iter(&self) -> Pairs<'_> {
        Pairs { buf: self, next: 0 }
    }
}

impl Extend<BitPair> for PairBuffer {
    fn extend<I: IntoIterator<Item = BitPair>>(&mut self, iter: I) {
        for pair in iter {
            self.push(pair);
        }
    }
}

impl FromIterator<BitPair> for PairBuffer {
    fn from_iter<I: IntoIterator<Item = BitPair>>(iter: I) -> Self {
        Self::from_pairs(iter)
    }
}

impl<'a> IntoIterator for &'a PairBuffer {
    type Item = BitPair;
    type IntoIter = Pairs<'a>;

    fn into_iter(self) -> Pairs<'a> {
        self.iter()
    }
}

pub struct Pairs<'a> {
    buf: &'a PairBuffer,
    next: u64,
}

impl Iterator for Pairs<'_> {
    type Item = BitPair;

    #[inline]
    fn next(&mut self) -> Option<BitPair> {
        let pair = self.buf.get(self.next)?;
        self.next += 1;
        Some(pair)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.buf.pair_count - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Pairs<'_> {}

/// Bytes needed to hold `pairs` packed pairs.
pub const fn bytes_for_pairs(pairs: u64) -> u64 {
    pairs.div_ceil(4)
}
