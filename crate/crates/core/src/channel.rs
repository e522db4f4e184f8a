//! Bit-flip injection and decode-divergence classification.
//!
//! Only flips are modelled. With fixed pair alignment a slipped bit has no
//! defined recovery, so insertions and deletions are not simulated.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec::{data_symbols, decode, pair_to_trit, Event, SchemeConfig, Trit, Variant};
use crate::error::{Error, Result};
use crate::pair::{BitPair, PairBuffer};

/// Which payload bits to invert. Bit `i` is bit `i % 2` of pair `i / 2`,
/// with bit 0 the high bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorruptionSpec {
    Positions(Vec<u64>),
    /// `count` distinct positions drawn uniformly with a ChaCha8 generator.
    Random { count: u64, seed: u64 },
}

impl CorruptionSpec {
    /// Concrete bit positions for a payload of `bit_len` bits.
    pub fn positions(&self, bit_len: u64) -> Result<Vec<u64>> {
        match self {
            CorruptionSpec::Positions(p) => {
                if let Some(&bad) = p.iter().find(|&&b| b >= bit_len) {
                    return Err(Error::argument(format!(
                        "flip position {bad} outside payload of {bit_len} bits"
                    )));
                }
                Ok(p.clone())
            }
            CorruptionSpec::Random { count, seed } => {
                if *count > bit_len {
                    return Err(Error::argument(format!(
                        "cannot place {count} distinct flips in {bit_len} bits"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut picked: Vec<u64> = sample_positions(&mut rng, bit_len, *count);
                picked.sort_unstable();
                Ok(picked)
            }
        }
    }
}

fn sample_positions(rng: &mut ChaCha8Rng, range: u64, count: u64) -> Vec<u64> {
    if range <= u32::MAX as u64 {
        sample(rng, range as usize, count as usize)
            .into_iter()
            .map(|i| i as u64)
            .collect()
    } else {
        let mut seen = BTreeSet::new();
        while (seen.len() as u64) < count {
            seen.insert(rng.gen_range(0..range));
        }
        seen.into_iter().collect()
    }
}

/// Returns a copy of `buf` with the chosen bits inverted. Listing the same
/// bit twice cancels out.
pub fn inject(buf: &PairBuffer, spec: &CorruptionSpec) -> Result<PairBuffer> {
    let mut out = buf.clone();
    for bit in spec.positions(buf.bit_len())? {
        out.flip_bit(bit)?;
    }
    Ok(out)
}

/// Indices of pairs that differ between two buffers of equal length.
pub fn changed_pairs(original: &PairBuffer, corrupted: &PairBuffer) -> Vec<u64> {
    original
        .iter()
        .zip(corrupted.iter())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| i as u64)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorruptionReport {
    /// Pairs that actually changed and were classified.
    pub corrupted_pairs: u64,
    /// Data pair turned into the delimiter.
    pub false_boundaries: u64,
    /// Delimiter pair turned into data, shortening or splitting a run.
    pub lost_or_split_boundaries: u64,
    /// Data pair turned into another data pair.
    pub value_flips: u64,
    /// Sum of |old - new| over value flips.
    pub value_error_magnitude: u64,
    /// Value flips that reversed the sign of the decoded value.
    pub sign_inversions: u64,
    /// Divergent stretches of the decoded event stream.
    pub divergent_regions: u64,
    /// Corrupted pairs whose divergence ends before the stream does.
    pub resync_events: u64,
    /// Mean corrupted-stream events per realigned region.
    pub mean_resync_distance: Option<f64>,
    /// Events between the first divergence and the longest common suffix
    /// of the two streams; `None` when the streams never realign.
    pub suffix_resync_distance: Option<u64>,
}

impl CorruptionReport {
    /// Key/value text, one field per line.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.4}"));
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(": ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("corrupted_pairs", self.corrupted_pairs.to_string());
        kv("false_boundaries", self.false_boundaries.to_string());
        kv("lost_or_split_boundaries", self.lost_or_split_boundaries.to_string());
        kv("value_flips", self.value_flips.to_string());
        kv("value_error_magnitude", self.value_error_magnitude.to_string());
        kv("sign_inversions", self.sign_inversions.to_string());
        kv("divergent_regions", self.divergent_regions.to_string());
        kv("resync_events", self.resync_events.to_string());
        kv("mean_resync_distance", opt(self.mean_resync_distance));
        kv(
            "suffix_resync_distance",
            self.suffix_resync_distance
                .map_or("never".to_string(), |d| d.to_string()),
        );
        s
    }
}

impl fmt::Display for CorruptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Pair stream an event sequence occupies. Unlike `encode` this accepts
/// adjacent boundaries, which cannot come out of a decoder anyway.
fn event_pairs(events: &[Event], config: &SchemeConfig) -> Vec<BitPair> {
    let symbols = data_symbols(config);
    let mut out = Vec::new();
    for e in events {
        match *e {
            Event::Data(t) => out.push(symbols[t.rank() as usize]),
            Event::Boundary(level) => out.extend(std::iter::repeat_n(config.delimiter, level as usize)),
        }
    }
    out
}

/// Compares a clean decode with a corrupted one.
///
/// Each entry of `flipped_pairs` is classified by the role its pair had
/// before and after corruption; entries whose pair did not change are
/// ignored. Divergent regions come from walking both event streams by pair
/// offset: a region ends where both streams start an identical event at the
/// same offset.
pub fn classify(
    original: &[Event],
    corrupted: &[Event],
    flipped_pairs: &[u64],
    config: &SchemeConfig,
) -> CorruptionReport {
    let before = event_pairs(original, config);
    let after = event_pairs(corrupted, config);
    let mut report = CorruptionReport::default();

    let flipped: BTreeSet<u64> = flipped_pairs.iter().copied().collect();
    let mut counted = Vec::new();
    for &i in &flipped {
        let (Some(&a), Some(&b)) = (before.get(i as usize), after.get(i as usize)) else {
            continue;
        };
        if a == b {
            continue;
        }
        report.corrupted_pairs += 1;
        counted.push(i);
        match (pair_to_trit(a, config), pair_to_trit(b, config)) {
            (Some(_), None) => report.false_boundaries += 1,
            (None, Some(_)) => report.lost_or_split_boundaries += 1,
            (Some(x), Some(y)) => {
                report.value_flips += 1;
                let (vx, vy) = (x.value(config.mapping), y.value(config.mapping));
                report.value_error_magnitude += vx.abs_diff(vy) as u64;
                if vx.signum() * vy.signum() < 0 {
                    report.sign_inversions += 1;
                }
            }
            (None, None) => unreachable!("a changed pair cannot be the delimiter twice"),
        }
    }

    let regions = divergent_regions(original, corrupted);
    report.divergent_regions = regions.len() as u64;
    let mut total = 0u64;
    let mut realigned = 0u64;
    for r in &regions {
        if r.realigned {
            realigned += 1;
            total += r.corrupted_events;
            report.resync_events += counted
                .iter()
                .filter(|&&p| p >= r.start_pair && p < r.end_pair)
                .count() as u64;
        }
    }
    if realigned > 0 {
        report.mean_resync_distance = Some(total as f64 / realigned as f64);
    }
    report.suffix_resync_distance = suffix_resync_distance(original, corrupted);
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    /// Pair offset of the first divergent event.
    pub start_pair: u64,
    /// Pair offset where both streams agree again (or stream end).
    pub end_pair: u64,
    pub original_events: u64,
    pub corrupted_events: u64,
    /// False when the divergence runs into the end of either stream.
    pub realigned: bool,
}

/// Divergent stretches of two event streams over the same pair positions.
pub fn divergent_regions(original: &[Event], corrupted: &[Event]) -> Vec<Region> {
    let (mut i, mut j) = (0usize, 0usize);
    let (mut off_o, mut off_c) = (0u64, 0u64);
    let mut regions = Vec::new();
    let agree = |i: usize, j: usize, oo: u64, oc: u64| {
        oo == oc && i < original.len() && j < corrupted.len() && original[i] == corrupted[j]
    };
    while i < original.len() || j < corrupted.len() {
        if agree(i, j, off_o, off_c) {
            off_o += original[i].pair_len();
            off_c += corrupted[j].pair_len();
            i += 1;
            j += 1;
            continue;
        }
        let start = off_o.min(off_c);
        let (i0, j0) = (i, j);
        loop {
            let step_o = i < original.len() && (off_o <= off_c || j >= corrupted.len());
            let step_c = j < corrupted.len() && (off_c <= off_o || i >= original.len());
            if step_o {
                off_o += original[i].pair_len();
                i += 1;
            }
            if step_c {
                off_c += corrupted[j].pair_len();
                j += 1;
            }
            let done = i >= original.len() && j >= corrupted.len();
            if done || agree(i, j, off_o, off_c) {
                regions.push(Region {
                    start_pair: start,
                    end_pair: off_o.max(off_c),
                    original_events: (i - i0) as u64,
                    corrupted_events: (j - j0) as u64,
                    realigned: !done,
                });
                break;
            }
        }
    }
    regions
}

/// Corrupted-stream events between the first divergence and the start of
/// the longest common suffix. `Some(0)` for identical streams, `None` when
/// the final events differ.
pub fn suffix_resync_distance(original: &[Event], corrupted: &[Event]) -> Option<u64> {
    let prefix = original
        .iter()
        .zip(corrupted)
        .take_while(|(a, b)| a == b)
        .count();
    if prefix == original.len() && prefix == corrupted.len() {
        return Some(0);
    }
    let max_suffix = original.len().min(corrupted.len()) - prefix;
    let suffix = original
        .iter()
        .rev()
        .zip(corrupted.iter().rev())
        .take(max_suffix)
        .take_while(|(a, b)| a == b)
        .count();
    if suffix == 0 {
        return None;
    }
    Some((corrupted.len() - suffix - prefix) as u64)
}

/// Brute-force count of single-bit flips on data pairs that land on the
/// delimiter: `(hits, total)` over 3 data pairs x 2 bits.
///
/// Two of the three data pairs are always at Hamming distance 1 from the
/// delimiter (for `11`: both `01` and `10`), so this is `(2, 6)` for every
/// delimiter choice.
pub fn flip_census(config: &SchemeConfig) -> (u32, u32) {
    let mut hits = 0;
    let mut total = 0;
    for pair in data_symbols(config) {
        for bit in 0..2 {
            total += 1;
            if pair.flip_bit(bit) == config.delimiter {
                hits += 1;
            }
        }
    }
    (hits, total)
}

/// Exact false-boundary probability per flipped data-pair bit for uniform
/// data, from [`flip_census`].
pub fn analytic_false_boundary_rate(config: &SchemeConfig) -> f64 {
    let (hits, total) = flip_census(config);
    hits as f64 / total as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VulnerabilityEstimate {
    /// Flipped data-pair bits observed.
    pub samples: u64,
    pub false_boundaries: u64,
    /// `None` when no flips were made.
    pub rate: Option<f64>,
}

/// Pairs per simulated stream.
const TRIAL_PAIRS: u64 = 256;

/// Monte-Carlo false-boundary probability per flipped data-pair bit.
///
/// Each trial encodes [`TRIAL_PAIRS`] uniform random trits, flips one random
/// bit in each of `flips_per_trial` distinct pairs, decodes, and classifies.
/// Trials use independent ChaCha8 streams derived from `seed`, so the result
/// does not depend on scheduling.
pub fn vulnerability_rate(
    config: &SchemeConfig,
    trials: u64,
    flips_per_trial: u64,
    seed: u64,
) -> Result<VulnerabilityEstimate> {
    if config.variant != Variant::Single {
        return Err(Error::argument("vulnerability needs a single-delimiter scheme"));
    }
    if trials == 0 {
        return Err(Error::argument("at least one trial is required"));
    }
    if flips_per_trial > TRIAL_PAIRS {
        return Err(Error::argument(format!(
            "at most {TRIAL_PAIRS} flips per trial (one per pair)"
        )));
    }
    let (samples, false_boundaries) = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let trits: Vec<Event> = (0..TRIAL_PAIRS)
                .map(|_| Event::Data(Trit::ALL[rng.gen_range(0..3)]))
                .collect();
            let clean = crate::codec::encode(&trits, config).expect("data only");
            let pairs = sample_positions(&mut rng, TRIAL_PAIRS, flips_per_trial);
            let bits: Vec<u64> = pairs.iter().map(|&p| 2 * p + rng.gen_range(0..2)).collect();
            let dirty = inject(&clean, &CorruptionSpec::Positions(bits)).expect("in range");
            let report = classify(&trits, &decode(&dirty, config), &pairs, config);
            (flips_per_trial, report.false_boundaries)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(VulnerabilityEstimate {
        samples,
        false_boundaries,
        rate: (samples > 0).then(|| false_boundaries as f64 / samples as f64),
    })
}
