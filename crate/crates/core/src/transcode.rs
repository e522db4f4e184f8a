//! Lossless binary → trit conversion for wrapping legacy data.
//!
//! Input is cut into blocks of `block_bytes` bytes (the last block may be
//! shorter). Each block is read as a big-endian integer and written as the
//! minimal number of base-3 digits that can hold every value of that block
//! size, most significant digit first. Output length depends only on input
//! length, and leading zero bytes survive.

use rayon::prelude::*;

use crate::codec::Trit;
use crate::error::{Error, Result};

/// 3^20, the largest power of three below 2^32.
const CHUNK_RADIX: u64 = 3_486_784_401;
const CHUNK_DIGITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TritBlockCodecParams {
    block_bytes: usize,
    trits_per_block: usize,
}

impl Default for TritBlockCodecParams {
    /// 19-byte blocks in 96 trits: 1.2632x against the 1.2619x ideal.
    fn default() -> Self {
        TritBlockCodecParams {
            block_bytes: 19,
            trits_per_block: 96,
        }
    }
}

impl TritBlockCodecParams {
    /// Uses the minimal trit count for `block_bytes`.
    pub fn new(block_bytes: usize) -> Result<Self> {
        if block_bytes == 0 {
            return Err(Error::argument("block size must be at least one byte"));
        }
        Ok(TritBlockCodecParams {
            block_bytes,
            trits_per_block: min_trits_for_bytes(block_bytes),
        })
    }

    /// Explicit pair; `trits_per_block` must be the minimal count for `block_bytes`.
    pub fn with_trits(block_bytes: usize, trits_per_block: usize) -> Result<Self> {
        let params = Self::new(block_bytes)?;
        if trits_per_block < params.trits_per_block {
            return Err(Error::argument(format!(
                "{trits_per_block} trits cannot hold every {block_bytes}-byte block"
            )));
        }
        if trits_per_block > params.trits_per_block {
            return Err(Error::argument(format!(
                "{trits_per_block} trits per {block_bytes}-byte block wastes digits; minimal is {}",
                params.trits_per_block
            )));
        }
        Ok(params)
    }

    pub fn block_bytes(&self) -> usize {
        self.block_bytes
    }

    pub fn trits_per_block(&self) -> usize {
        self.trits_per_block
    }

    /// Number of trits produced for `byte_len` input bytes.
    pub fn trit_len(&self, byte_len: usize) -> usize {
        let full = byte_len / self.block_bytes;
        let tail = byte_len % self.block_bytes;
        full * self.trits_per_block + if tail == 0 { 0 } else { min_trits_for_bytes(tail) }
    }
}

/// Smallest `t` with `3^t >= 256^bytes`.
pub fn min_trits_for_bytes(bytes: usize) -> usize {
    // 3^t is odd, so 3^t >= 2^(8m) exactly when its bit length exceeds 8m.
    let bits = 8 * bytes;
    let mut value = vec![1u32];
    let mut t = 0;
    while bit_length(&value) <= bits {
        mul_add(&mut value, 3, 0);
        t += 1;
    }
    t
}

/// Size ratio of the pair encoding against the raw bytes: `2t / 8b`.
pub fn expansion_factor(params: &TritBlockCodecParams) -> f64 {
    (2 * params.trits_per_block) as f64 / (8 * params.block_bytes) as f64
}

/// Limit of [`expansion_factor`] for unbounded blocks: `2 / log2(3)`.
pub fn ideal_expansion() -> f64 {
    2.0 / 3f64.log2()
}

pub fn binary_to_trits(data: &[u8], params: &TritBlockCodecParams) -> Vec<Trit> {
    let mut out = vec![Trit::Low; params.trit_len(data.len())];
    let mut dst = out.as_mut_slice();
    for block in data.chunks(params.block_bytes) {
        let width = block_width(block.len(), params);
        let (head, rest) = dst.split_at_mut(width);
        block_to_trits(block, head);
        dst = rest;
    }
    out
}

/// Block-parallel [`binary_to_trits`]; output is identical.
pub fn binary_to_trits_par(data: &[u8], params: &TritBlockCodecParams) -> Vec<Trit> {
    let mut out = vec![Trit::Low; params.trit_len(data.len())];
    out.par_chunks_mut(params.trits_per_block)
        .zip(data.par_chunks(params.block_bytes))
        .for_each(|(dst, block)| block_to_trits(block, dst));
    out
}

pub fn trits_to_binary(
    trits: &[Trit],
    original_byte_length: usize,
    params: &TritBlockCodecParams,
) -> Result<Vec<u8>> {
    let expected = params.trit_len(original_byte_length);
    if trits.len() != expected {
        return Err(Error::argument(format!(
            "{original_byte_length} bytes encode to {expected} trits, got {}",
            trits.len()
        )));
    }
    let mut out = vec![0u8; original_byte_length];
    let mut src = trits;
    for (index, block) in out.chunks_mut(params.block_bytes).enumerate() {
        let width = block_width(block.len(), params);
        let (head, rest) = src.split_at(width);
        trits_to_block(head, block).map_err(|value_bits| {
            Error::corruption(format!(
                "block {index} holds a {value_bits}-bit value, too large for {} bytes",
                block.len()
            ))
        })?;
        src = rest;
    }
    Ok(out)
}

fn block_width(len: usize, params: &TritBlockCodecParams) -> usize {
    if len == params.block_bytes {
        params.trits_per_block
    } else {
        min_trits_for_bytes(len)
    }
}

/// Little-endian u32 limbs of a big-endian byte string.
fn limbs_from_be(bytes: &[u8]) -> Vec<u32> {
    bytes
        .rchunks(4)
        .map(|c| c.iter().fold(0u32, |acc, &b| acc << 8 | b as u32))
        .collect()
}

fn block_to_trits(block: &[u8], out: &mut [Trit]) {
    let mut value = limbs_from_be(block);
    let mut end = out.len();
    while end > 0 {
        let mut rem = div_rem(&mut value, CHUNK_RADIX);
        let start = end.saturating_sub(CHUNK_DIGITS);
        for slot in out[start..end].iter_mut().rev() {
            *slot = Trit::from_rank((rem % 3) as u8).expect("digit below 3");
            rem /= 3;
        }
        end = start;
    }
}

/// On overflow returns the bit length of the decoded value.
fn trits_to_block(trits: &[Trit], out: &mut [u8]) -> std::result::Result<(), usize> {
    let mut value = vec![0u32; out.len().div_ceil(4) + 1];
    for chunk in trits.chunks(CHUNK_DIGITS) {
        let radix = 3u64.pow(chunk.len() as u32);
        let digits = chunk.iter().fold(0u64, |acc, t| acc * 3 + t.rank() as u64);
        mul_add(&mut value, radix, digits);
    }
    if bit_length(&value) > 8 * out.len() {
        return Err(bit_length(&value));
    }
    for (i, byte) in out.iter_mut().rev().enumerate() {
        *byte = (value[i / 4] >> (8 * (i % 4))) as u8;
    }
    Ok(())
}

fn div_rem(limbs: &mut [u32], divisor: u64) -> u64 {
    let mut rem = 0u64;
    for limb in limbs.iter_mut().rev() {
        let cur = rem << 32 | *limb as u64;
        *limb = (cur / divisor) as u32;
        rem = cur % divisor;
    }
    rem
}

/// `limbs = limbs * factor + addend`, growing as needed. `factor < 2^32`.
fn mul_add(limbs: &mut Vec<u32>, factor: u64, addend: u64) {
    let mut carry = addend;
    for limb in limbs.iter_mut() {
        let cur = *limb as u64 * factor + carry;
        *limb = cur as u32;
        carry = cur >> 32;
    }
    while carry > 0 {
        limbs.push(carry as u32);
        carry >>= 32;
    }
}

fn bit_length(limbs: &[u32]) -> usize {
    limbs
        .iter()
        .rposition(|&l| l != 0)
        .map_or(0, |i| 32 * i + 32 - limbs[i].leading_zeros() as usize)
}
