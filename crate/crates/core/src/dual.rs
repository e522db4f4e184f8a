//! Dual-starter variant: two starter pairs open symbols in namespaces A
//! and B, the two remaining pairs are continuations carrying one bit each.
//! A symbol runs until the next starter or the end of the stream, so a
//! reader dropped mid-stream re-synchronises at the next starter.

use std::fmt;

use crate::error::{Error, Result};
use crate::pair::{BitPair, PairBuffer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Namespace {
    A,
    B,
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Namespace::A => "A",
            Namespace::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DualSymbol {
    pub namespace: Namespace,
    /// Bits in transmission order.
    pub payload: Vec<bool>,
}

impl DualSymbol {
    pub fn new(namespace: Namespace, payload: Vec<bool>) -> Self {
        DualSymbol { namespace, payload }
    }

    /// Builds a symbol from a string of `0`/`1` characters.
    pub fn from_bit_str(namespace: Namespace, bits: &str) -> Result<Self> {
        let payload = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::argument(format!("`{other}` is not a bit"))),
            })
            .collect::<Result<_>>()?;
        Ok(DualSymbol { namespace, payload })
    }

    pub fn bit_string(&self) -> String {
        self.payload.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Starter pair choice. Continuations are the two other pairs in ascending
/// order, carrying bit 0 and bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DualConfig {
    starter_a: BitPair,
    starter_b: BitPair,
    continuation: [BitPair; 2],
}

impl Default for DualConfig {
    fn default() -> Self {
        DualConfig::new(BitPair::P10, BitPair::P11).expect("distinct starters")
    }
}

impl DualConfig {
    pub fn new(starter_a: BitPair, starter_b: BitPair) -> Result<Self> {
        if starter_a == starter_b {
            return Err(Error::argument("namespace starters must be distinct pairs"));
        }
        let mut continuation = [BitPair::P00; 2];
        let mut n = 0;
        for p in BitPair::ALL {
            if p != starter_a && p != starter_b {
                continuation[n] = p;
                n += 1;
            }
        }
        Ok(DualConfig {
            starter_a,
            starter_b,
            continuation,
        })
    }

    pub fn starter(&self, namespace: Namespace) -> BitPair {
        match namespace {
            Namespace::A => self.starter_a,
            Namespace::B => self.starter_b,
        }
    }

    pub fn continuation(&self, bit: bool) -> BitPair {
        self.continuation[bit as usize]
    }

    fn classify(&self, pair: BitPair) -> Role {
        if pair == self.starter_a {
            Role::Start(Namespace::A)
        } else if pair == self.starter_b {
            Role::Start(Namespace::B)
        } else {
            Role::Bit(pair == self.continuation[1])
        }
    }
}

enum Role {
    Start(Namespace),
    Bit(bool),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DualDecoded {
    pub symbols: Vec<DualSymbol>,
    /// Continuation pairs seen before the first starter.
    pub skipped_prefix_pairs: u64,
}

pub fn encode_dual(symbols: &[DualSymbol]) -> PairBuffer {
    encode_dual_with(symbols, &DualConfig::default())
}

pub fn encode_dual_with(symbols: &[DualSymbol], config: &DualConfig) -> PairBuffer {
    let pairs: usize = symbols.iter().map(|s| 1 + s.payload.len()).sum();
    let mut out = PairBuffer::with_capacity(pairs);
    for sym in symbols {
        out.push(config.starter(sym.namespace));
        out.extend(sym.payload.iter().map(|&b| config.continuation(b)));
    }
    out
}

pub fn decode_dual(buf: &PairBuffer) -> DualDecoded {
    decode_dual_with(buf, &DualConfig::default())
}

pub fn decode_dual_with(buf: &PairBuffer, config: &DualConfig) -> DualDecoded {
    let mut out = DualDecoded::default();
    for pair in buf {
        match config.classify(pair) {
            Role::Start(ns) => out.symbols.push(DualSymbol::new(ns, Vec::new())),
            Role::Bit(bit) => match out.symbols.last_mut() {
                Some(sym) => sym.payload.push(bit),
                None => out.skipped_prefix_pairs += 1,
            },
        }
    }
    out
}
