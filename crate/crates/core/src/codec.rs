//! The single-delimiter scheme: three data pairs carry one trit each and a
//! run of `N` delimiter pairs marks a level-`N` boundary.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pair::{BitPair, PairBuffer};

/// How the three data pairs are read as numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mapping {
    /// `{-1, 0, +1}`
    #[default]
    Balanced,
    /// `{0, 1, 2}`
    Unsigned,
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mapping::Balanced => "balanced",
            Mapping::Unsigned => "unsigned",
        })
    }
}

impl FromStr for Mapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(Mapping::Balanced),
            "unsigned" => Ok(Mapping::Unsigned),
            other => Err(Error::argument(format!("unknown mapping `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    #[default]
    Single,
    /// Two starter pairs open namespaces, two continuation pairs carry bits.
    /// See [`crate::dual`].
    Dual,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Single => "single",
            Variant::Dual => "dual",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Variant::Single),
            "dual" => Ok(Variant::Dual),
            other => Err(Error::argument(format!("unknown variant `{other}`"))),
        }
    }
}

/// Stream parameters declared once in the container header.
///
/// `delimiter` and `mapping` are ignored by the dual-starter variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeConfig {
    pub delimiter: BitPair,
    pub mapping: Mapping,
    pub variant: Variant,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig::single(BitPair::P11, Mapping::Balanced)
    }
}

impl SchemeConfig {
    pub const fn single(delimiter: BitPair, mapping: Mapping) -> Self {
        SchemeConfig {
            delimiter,
            mapping,
            variant: Variant::Single,
        }
    }

    pub const fn dual() -> Self {
        SchemeConfig {
            delimiter: BitPair::P11,
            mapping: Mapping::Balanced,
            variant: Variant::Dual,
        }
    }

    /// All eight single-delimiter configurations.
    pub fn all_single() -> impl Iterator<Item = SchemeConfig> {
        BitPair::ALL.into_iter().flat_map(|d| {
            [Mapping::Balanced, Mapping::Unsigned]
                .into_iter()
                .map(move |m| SchemeConfig::single(d, m))
        })
    }

    fn require_single(&self) -> Result<()> {
        match self.variant {
            Variant::Single => Ok(()),
            Variant::Dual => Err(Error::argument(
                "operation requires the single-delimiter variant",
            )),
        }
    }

    /// Maps a numeric value in the active domain onto its data pair.
    pub fn value_to_pair(&self, value: i64) -> Result<BitPair> {
        Ok(trit_to_pair(Trit::from_value(value, self.mapping)?, self))
    }

    /// `None` for the delimiter.
    pub fn pair_to_value(&self, pair: BitPair) -> Option<i8> {
        pair_to_trit(pair, self).map(|t| t.value(self.mapping))
    }
}

/// A ternary digit, stored by rank. The rank order matches both mappings:
/// `Low` is -1 or 0, `Mid` is 0 or 1, `High` is +1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Trit {
    Low = 0,
    Mid = 1,
    High = 2,
}

impl Trit {
    pub const ALL: [Trit; 3] = [Trit::Low, Trit::Mid, Trit::High];

    #[inline]
    pub const fn rank(self) -> u8 {
        self as u8
    }

    #[inline]
    pub const fn from_rank(rank: u8) -> Option<Trit> {
        match rank {
            0 => Some(Trit::Low),
            1 => Some(Trit::Mid),
            2 => Some(Trit::High),
            _ => None,
        }
    }

    pub fn from_value(value: i64, mapping: Mapping) -> Result<Trit> {
        let rank = match mapping {
            Mapping::Balanced => value + 1,
            Mapping::Unsigned => value,
        };
        u8::try_from(rank)
            .ok()
            .and_then(Trit::from_rank)
            .ok_or(Error::Domain { value, mapping })
    }

    #[inline]
    pub const fn value(self, mapping: Mapping) -> i8 {
        match mapping {
            Mapping::Balanced => self as i8 - 1,
            Mapping::Unsigned => self as i8,
        }
    }
}

/// Decoded unit of a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Event {
    Data(Trit),
    /// Hierarchy level, `>= 1`. Level semantics belong to the application.
    Boundary(u64),
}

impl Event {
    /// Number of pairs this event occupies on the wire.
    #[inline]
    pub const fn pair_len(&self) -> u64 {
        match self {
            Event::Data(_) => 1,
            Event::Boundary(level) => *level,
        }
    }

    pub const fn is_boundary(&self) -> bool {
        matches!(self, Event::Boundary(_))
    }
}

/// The three non-delimiter pairs in ascending order, i.e. the pairs for
/// `Low`, `Mid` and `High`.
pub fn data_symbols(config: &SchemeConfig) -> [BitPair; 3] {
    let mut out = [BitPair::P00; 3];
    let mut n = 0;
    for pair in BitPair::ALL {
        if pair != config.delimiter {
            out[n] = pair;
            n += 1;
        }
    }
    out
}

#[inline]
pub fn trit_to_pair(trit: Trit, config: &SchemeConfig) -> BitPair {
    // Pairs below the delimiter keep their rank, pairs above shift up by one.
    let rank = trit.rank();
    BitPair::from_bits(if rank >= config.delimiter.value() { rank + 1 } else { rank })
}

/// `None` when `pair` is the delimiter.
#[inline]
pub fn pair_to_trit(pair: BitPair, config: &SchemeConfig) -> Option<Trit> {
    let (p, d) = (pair.value(), config.delimiter.value());
    match p.cmp(&d) {
        std::cmp::Ordering::Less => Trit::from_rank(p),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Trit::from_rank(p - 1),
    }
}

/// Incremental encoder. Rejects boundaries of level 0 and two boundaries in
/// a row, since a decoder would read the latter as one merged run.
#[derive(Debug, Clone)]
pub struct Encoder {
    symbols: [BitPair; 3],
    delimiter: BitPair,
    out: PairBuffer,
    after_boundary: bool,
}

impl Encoder {
    pub fn new(config: &SchemeConfig) -> Result<Self> {
        Self::with_capacity(config, 0)
    }

    pub fn with_capacity(config: &SchemeConfig, pairs: usize) -> Result<Self> {
        config.require_single()?;
        Ok(Encoder {
            symbols: data_symbols(config),
            delimiter: config.delimiter,
            out: PairBuffer::with_capacity(pairs),
            after_boundary: false,
        })
    }

    #[inline]
    pub fn push_trit(&mut self, trit: Trit) {
        self.out.push(self.symbols[trit.rank() as usize]);
        self.after_boundary = false;
    }

    pub fn push_trits(&mut self, trits: &[Trit]) {
        // Fast path: whole bytes when the output is byte aligned.
        let mut rest = trits;
        while !rest.is_empty() && self.out.pair_count() % 4 != 0 {
            self.push_trit(rest[0]);
            rest = &rest[1..];
        }
        let mut chunks = rest.chunks_exact(4);
        let s = self.symbols.map(|p| p.value());
        let mut packed = Vec::with_capacity(rest.len() / 4);
        for c in &mut chunks {
            packed.push(
                s[c[0] as usize] << 6 | s[c[1] as usize] << 4 | s[c[2] as usize] << 2 | s[c[3] as usize],
            );
        }
        if !packed.is_empty() {
            let pairs = self.out.pair_count() + packed.len() as u64 * 4;
            let mut bytes = std::mem::take(&mut self.out).into_bytes();
            bytes.extend_from_slice(&packed);
            self.out = PairBuffer::from_parts(bytes, pairs).expect("aligned append");
            self.after_boundary = false;
        }
        for &t in chunks.remainder() {
            self.push_trit(t);
        }
    }

    pub fn push_boundary(&mut self, level: u64) -> Result<()> {
        if level == 0 {
            return Err(Error::argument("boundary level must be at least 1"));
        }
        if self.after_boundary {
            return Err(Error::argument(
                "consecutive boundaries must be merged into one higher-level boundary",
            ));
        }
        self.out.push_run(self.delimiter, level);
        self.after_boundary = true;
        Ok(())
    }

    pub fn push(&mut self, event: &Event) -> Result<()> {
        match *event {
            Event::Data(t) => {
                self.push_trit(t);
                Ok(())
            }
            Event::Boundary(level) => self.push_boundary(level),
        }
    }

    pub fn pair_count(&self) -> u64 {
        self.out.pair_count()
    }

    pub fn finish(self) -> PairBuffer {
        self.out
    }
}

pub fn encode(events: &[Event], config: &SchemeConfig) -> Result<PairBuffer> {
    let pairs = events.iter().map(Event::pair_len).sum::<u64>();
    let mut enc = Encoder::with_capacity(config, pairs as usize)?;
    for (i, event) in events.iter().enumerate() {
        enc.push(event)
            .map_err(|e| Error::argument(format!("event {i}: {e}")))?;
    }
    Ok(enc.finish())
}

/// Streaming decoder over a pair buffer. Never fails: every pair sequence
/// has exactly one reading, and a delimiter run cut off by the end of the
/// stream still yields its boundary.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    buf: &'a PairBuffer,
    pos: usize,
    end: usize,
    delimiter: BitPair,
    table: [Option<Trit>; 4],
}

impl<'a> Decoder<'a> {
    /// Decodes with the single-delimiter rules regardless of `config.variant`.
    pub fn new(buf: &'a PairBuffer, config: &SchemeConfig) -> Self {
        Decoder {
            buf,
            pos: 0,
            end: buf.pair_count() as usize,
            delimiter: config.delimiter,
            table: BitPair::ALL.map(|p| pair_to_trit(p, config)),
        }
    }

    /// Index of the next pair to be read.
    pub fn position(&self) -> u64 {
        self.pos as u64
    }
}

impl Iterator for Decoder<'_> {
    type Item = Event;

    #[inline]
    fn next(&mut self) -> Option<Event> {
        if self.pos >= self.end {
            return None;
        }
        let pair = self.buf.pair_at(self.pos);
        self.pos += 1;
        if let Some(trit) = self.table[pair.value() as usize] {
            return Some(Event::Data(trit));
        }
        let mut level = 1;
        while self.pos < self.end && self.buf.pair_at(self.pos) == self.delimiter {
            self.pos += 1;
            level += 1;
        }
        Some(Event::Boundary(level))
    }
}

pub fn decode(buf: &PairBuffer, config: &SchemeConfig) -> Vec<Event> {
    Decoder::new(buf, config).collect()
}

/// Merges adjacent boundaries into one boundary with the summed level,
/// which is how the decoder would read them back.
pub fn coalesce(events: &[Event]) -> Vec<Event> {
    let mut out: Vec<Event> = Vec::with_capacity(events.len());
    for &e in events {
        match (out.last_mut(), e) {
            (Some(Event::Boundary(prev)), Event::Boundary(level)) => *prev += level,
            _ => out.push(e),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PRIMARY: SchemeConfig = SchemeConfig::single(BitPair::P11, Mapping::Balanced);

    #[test]
    fn data_symbols_skip_the_delimiter() {
        let cfg = |d| SchemeConfig::single(d, Mapping::Balanced);
        assert_eq!(data_symbols(&cfg(BitPair::P11)), [BitPair::P00, BitPair::P01, BitPair::P10]);
        assert_eq!(data_symbols(&cfg(BitPair::P00)), [BitPair::P01, BitPair::P10, BitPair::P11]);
        assert_eq!(data_symbols(&cfg(BitPair::P01)), [BitPair::P00, BitPair::P10, BitPair::P11]);
        assert_eq!(data_symbols(&cfg(BitPair::P10)), [BitPair::P00, BitPair::P01, BitPair::P11]);
    }

    #[test]
    fn primary_table() {
        assert_eq!(PRIMARY.value_to_pair(-1).unwrap(), BitPair::P00);
        assert_eq!(PRIMARY.value_to_pair(0).unwrap(), BitPair::P01);
        assert_eq!(PRIMARY.value_to_pair(1).unwrap(), BitPair::P10);
        assert_eq!(PRIMARY.pair_to_value(BitPair::P11), None);
        let unsigned = SchemeConfig::single(BitPair::P11, Mapping::Unsigned);
        assert_eq!(unsigned.pair_to_value(BitPair::P10), Some(2));
    }

    #[test]
    fn zero_under_low_power_delimiter() {
        let cfg = SchemeConfig::single(BitPair::P00, Mapping::Unsigned);
        let pair = cfg.value_to_pair(0).unwrap();
        assert_eq!(pair, BitPair::P01);
        let decoded = decode(&PairBuffer::from_pairs([pair]), &cfg);
        assert_eq!(decoded, vec![Event::Data(Trit::from_value(0, Mapping::Unsigned).unwrap())]);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(PRIMARY.value_to_pair(2), Err(Error::Domain { value: 2, .. })));
        let unsigned = SchemeConfig::single(BitPair::P11, Mapping::Unsigned);
        assert!(unsigned.value_to_pair(-1).is_err());
        assert!(unsigned.value_to_pair(3).is_err());
    }

    #[test]
    fn rank_mapping_agrees_with_symbol_table() {
        for cfg in SchemeConfig::all_single() {
            let table = data_symbols(&cfg);
            for t in Trit::ALL {
                assert_eq!(trit_to_pair(t, &cfg), table[t.rank() as usize]);
                assert_eq!(pair_to_trit(table[t.rank() as usize], &cfg), Some(t));
            }
            assert_eq!(pair_to_trit(cfg.delimiter, &cfg), None);
        }
    }

    #[test]
    fn encode_example() {
        let events = [
            Event::Data(Trit::Low),
            Event::Data(Trit::Mid),
            Event::Data(Trit::High),
            Event::Boundary(2),
        ];
        let buf = encode(&events, &PRIMARY).unwrap();
        // 00 01 10 11 | 11 + six zero padding bits
        assert_eq!(buf.as_bytes(), &[0x1b, 0xc0]);
        assert_eq!(buf.pair_count(), 5);
        assert_eq!(decode(&buf, &PRIMARY), events);
        // bits past pair_count are never read
        let dirty_padding = PairBuffer::from_parts(vec![0x1b, 0xf0], 5).unwrap();
        assert_eq!(decode(&dirty_padding, &PRIMARY), events);
    }

    #[test]
    fn encode_empty_and_single_run() {
        let buf = encode(&[], &PRIMARY).unwrap();
        assert!(buf.is_empty() && buf.as_bytes().is_empty());
        let buf = encode(&[Event::Boundary(4)], &PRIMARY).unwrap();
        assert_eq!(buf.as_bytes(), &[0xff]);
        assert_eq!(buf.pair_count(), 4);
    }

    #[test]
    fn encode_rejects_bad_boundaries() {
        assert!(matches!(encode(&[Event::Boundary(0)], &PRIMARY), Err(Error::Argument(_))));
        assert!(matches!(
            encode(&[Event::Boundary(1), Event::Boundary(1)], &PRIMARY),
            Err(Error::Argument(_))
        ));
        assert!(encode(&[Event::Data(Trit::Low)], &SchemeConfig::dual()).is_err());
    }

    #[test]
    fn decode_trace() {
        let buf = PairBuffer::from_pairs([BitPair::P10, BitPair::P11, BitPair::P11, BitPair::P11, BitPair::P00]);
        assert_eq!(
            decode(&buf, &PRIMARY),
            vec![Event::Data(Trit::High), Event::Boundary(3), Event::Data(Trit::Low)]
        );
        let buf = PairBuffer::from_pairs([BitPair::P11, BitPair::P11]);
        assert_eq!(decode(&buf, &PRIMARY), vec![Event::Boundary(2)]);
    }

    #[test]
    fn trailing_run_is_emitted() {
        let buf = PairBuffer::from_parts(vec![0x7f], 4).unwrap();
        assert_eq!(decode(&buf, &PRIMARY), vec![Event::Data(Trit::Mid), Event::Boundary(3)]);
        // padding never reads as delimiters
        let buf = PairBuffer::from_parts(vec![0x40], 1).unwrap();
        assert_eq!(decode(&buf, &PRIMARY), vec![Event::Data(Trit::Mid)]);
    }

    #[test]
    fn push_trits_matches_push_trit() {
        let trits: Vec<Trit> = (0..23).map(|i| Trit::ALL[(i * 7 + 1) % 3]).collect();
        for offset in 0..4 {
            let mut fast = Encoder::new(&PRIMARY).unwrap();
            let mut slow = Encoder::new(&PRIMARY).unwrap();
            for _ in 0..offset {
                fast.push_trit(Trit::High);
                slow.push_trit(Trit::High);
            }
            fast.push_trits(&trits);
            trits.iter().for_each(|&t| slow.push_trit(t));
            assert_eq!(fast.finish(), slow.finish());
        }
    }

    fn arb_event() -> impl Strategy<Value = Event> {
        prop_oneof![
            3 => (0u8..3).prop_map(|r| Event::Data(Trit::from_rank(r).unwrap())),
            1 => (1u64..6).prop_map(Event::Boundary),
        ]
    }

    fn arb_config() -> impl Strategy<Value = SchemeConfig> {
        (0u8..4, any::<bool>()).prop_map(|(d, u)| {
            SchemeConfig::single(
                BitPair::from_bits(d),
                if u { Mapping::Unsigned } else { Mapping::Balanced },
            )
        })
    }

    proptest! {
        #[test]
        fn round_trip(events in prop::collection::vec(arb_event(), 0..200), cfg in arb_config()) {
            let events = coalesce(&events);
            let buf = encode(&events, &cfg).unwrap();
            let expected_pairs: u64 = events.iter().map(Event::pair_len).sum();
            prop_assert_eq!(buf.pair_count(), expected_pairs);
            prop_assert_eq!(decode(&buf, &cfg), events);
        }

        #[test]
        fn decode_is_total_with_maximal_runs(bytes in prop::collection::vec(any::<u8>(), 0..64), cut in 0u64..4, cfg in arb_config()) {
            let pairs = (bytes.len() as u64 * 4).saturating_sub(cut);
            let buf = PairBuffer::from_parts(bytes, pairs).unwrap();
            let events = decode(&buf, &cfg);
            prop_assert!(events.windows(2).all(|w| !(w[0].is_boundary() && w[1].is_boundary())));
            prop_assert_eq!(events.iter().map(Event::pair_len).sum::<u64>(), pairs);
            // decoding then re-encoding reproduces the payload exactly
            prop_assert_eq!(encode(&events, &cfg).unwrap(), buf);
        }

        #[test]
        fn pair_count_is_delimiter_independent(events in prop::collection::vec(arb_event(), 0..100)) {
            let events = coalesce(&events);
            let counts: Vec<u64> = SchemeConfig::all_single()
                .map(|cfg| encode(&events, &cfg).unwrap().pair_count())
                .collect();
            prop_assert!(counts.windows(2).all(|w| w[0] == w[1]));
        }
    }
}
