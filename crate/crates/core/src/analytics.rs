//! Closed-form size and density figures, and a throughput harness.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{Decoder, Encoder, Event, SchemeConfig, Trit, Variant};
use crate::error::{Error, Result};
use crate::model::{LAYER_BOUNDARY_BITS, TENSOR_BOUNDARY_BITS};

/// Information bits per transmitted bit.
pub fn data_density(variant: Variant) -> f64 {
    match variant {
        Variant::Single => 3f64.log2() / 2.0,
        Variant::Dual => 0.5,
    }
}

/// Hierarchy level used for each text unit boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelAssignment {
    pub word: u32,
    pub sentence: u32,
    pub paragraph: u32,
}

impl Default for LevelAssignment {
    fn default() -> Self {
        LevelAssignment {
            word: 1,
            sentence: 2,
            paragraph: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextShapeParams {
    pub chars_per_word: f64,
    pub words_per_sentence: f64,
    pub sentences_per_paragraph: f64,
    pub levels: LevelAssignment,
}

impl Default for TextShapeParams {
    /// 5-character words, 20-word sentences, 8-sentence paragraphs.
    fn default() -> Self {
        TextShapeParams {
            chars_per_word: 5.0,
            words_per_sentence: 20.0,
            sentences_per_paragraph: 8.0,
            levels: LevelAssignment::default(),
        }
    }
}

impl TextShapeParams {
    pub fn validate(&self) -> Result<()> {
        let sizes = [self.chars_per_word, self.words_per_sentence, self.sentences_per_paragraph];
        if sizes.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::argument("text shape sizes must be positive and finite"));
        }
        let l = self.levels;
        if !(1 <= l.word && l.word < l.sentence && l.sentence < l.paragraph) {
            return Err(Error::argument(
                "levels must satisfy 1 <= word < sentence < paragraph",
            ));
        }
        Ok(())
    }
}

/// Delimiter bits per character: each unit boundary costs two bits per
/// level, spread over the characters the unit spans.
pub fn amortised_overhead(params: &TextShapeParams) -> Result<f64> {
    params.validate()?;
    let per_word = params.chars_per_word;
    let per_sentence = per_word * params.words_per_sentence;
    let per_paragraph = per_sentence * params.sentences_per_paragraph;
    let l = params.levels;
    Ok(2.0 * l.word as f64 / per_word
        + 2.0 * l.sentence as f64 / per_sentence
        + 2.0 * l.paragraph as f64 / per_paragraph)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageModel {
    pub name: String,
    pub bits_per_weight: f64,
    pub per_tensor_header_bytes: f64,
}

impl StorageModel {
    pub fn new(name: &str, bits_per_weight: f64, per_tensor_header_bytes: f64) -> Self {
        StorageModel {
            name: name.to_string(),
            bits_per_weight,
            per_tensor_header_bytes,
        }
    }

    /// GGUF Q2_K, Q4_0 and int8 at their nominal rates with ~256-byte
    /// tensor headers.
    pub fn gguf_reference() -> Vec<StorageModel> {
        vec![
            StorageModel::new("GGUF Q2_K", 2.625, 256.0),
            StorageModel::new("GGUF Q4_0", 4.5, 256.0),
            StorageModel::new("GGUF int8", 8.0, 256.0),
        ]
    }
}

/// Weight, layer and tensor counts of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelShape {
    pub weights: u64,
    pub layers: u64,
    pub tensors: u64,
}

impl ModelShape {
    /// BitNet b1.58 2B4T: 2e9 weights, 24 layers, 170 tensors.
    pub const BITNET_2B4T: ModelShape = ModelShape {
        weights: 2_000_000_000,
        layers: 24,
        tensors: 170,
    };

    pub fn boundary_bits(&self) -> u64 {
        LAYER_BOUNDARY_BITS * self.layers + TENSOR_BOUNDARY_BITS * self.tensors
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageRow {
    pub name: String,
    pub bits_per_weight: f64,
    pub payload_bytes: f64,
    pub structure_bytes: f64,
    pub total_bytes: f64,
    /// NativeTernary total divided by this row's total.
    pub native_ratio: f64,
    /// This row's structure bytes divided by NativeTernary's boundary bytes.
    pub structure_ratio: f64,
}

/// First row is NativeTernary (2 bits per weight plus boundary runs),
/// followed by one row per model.
pub fn storage_comparison(shape: ModelShape, models: &[StorageModel]) -> Vec<StorageRow> {
    let native_payload = shape.weights as f64 * 2.0 / 8.0;
    let native_structure = shape.boundary_bits() as f64 / 8.0;
    let native_total = native_payload + native_structure;
    let row = |name: &str, bpw: f64, payload: f64, structure: f64| {
        let total = payload + structure;
        StorageRow {
            name: name.to_string(),
            bits_per_weight: bpw,
            payload_bytes: payload,
            structure_bytes: structure,
            total_bytes: total,
            native_ratio: native_total / total,
            structure_ratio: structure / native_structure,
        }
    };
    let mut rows = vec![row("NativeTernary", 2.0, native_payload, native_structure)];
    rows.extend(models.iter().map(|m| {
        row(
            &m.name,
            m.bits_per_weight,
            shape.weights as f64 * m.bits_per_weight / 8.0,
            shape.tensors as f64 * m.per_tensor_header_bytes,
        )
    }));
    rows
}

/// Decimal byte count with a k/M/G suffix.
pub fn human_bytes(bytes: f64) -> String {
    match bytes {
        b if b >= 1e9 => format!("{:.1} GB", b / 1e9),
        b if b >= 1e6 => format!("{:.1} MB", b / 1e6),
        b if b >= 1e3 => format!("{:.1} KB", b / 1e3),
        b => format!("{b:.0} B"),
    }
}

pub fn storage_table(shape: ModelShape, rows: &[StorageRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# storage: {} weights, {} layers, {} tensors",
        shape.weights, shape.layers, shape.tensors
    );
    let _ = writeln!(
        s,
        "{:<14} {:>6} {:>12} {:>12} {:>12} {:>8} {:>10}",
        "format", "b/w", "payload", "structure", "total", "NT/x", "struct/NT"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<14} {:>6.3} {:>12} {:>12} {:>12} {:>7.2}x {:>9.1}x",
            r.name,
            r.bits_per_weight,
            human_bytes(r.payload_bytes),
            if r.structure_bytes.fract() == 0.0 {
                format!("{:.0} B", r.structure_bytes)
            } else {
                format!("{:.2} B", r.structure_bytes)
            },
            human_bytes(r.total_bytes),
            r.native_ratio,
            r.structure_ratio
        );
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub warmup: u32,
    pub iterations: u32,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            warmup: 1,
            iterations: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputReport {
    pub weights: u64,
    pub encode: Duration,
    pub decode: Duration,
    /// Decimal MB of weights (one byte each) per second.
    pub encode_mb_s: f64,
    pub decode_mb_s: f64,
    /// Checksum over decoded events, so the decode cannot be optimised away.
    pub checksum: u64,
}

/// Uniform random trits from a seeded ChaCha8 stream.
pub fn random_trits(count: usize, seed: u64) -> Vec<Trit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Trit::ALL[rng.gen_range(0..3)]).collect()
}

/// Times single-threaded encode and decode of `scale` random weights under
/// the primary scheme. Reports the fastest timed iteration.
pub fn throughput_bench(scale: u64, seed: u64, bench: BenchConfig) -> Result<ThroughputReport> {
    if scale == 0 {
        return Err(Error::argument("benchmark scale must be at least one weight"));
    }
    if bench.iterations == 0 {
        return Err(Error::argument("at least one timed iteration is required"));
    }
    let config = SchemeConfig::default();
    let trits = random_trits(scale as usize, seed);

    let encode_once = || {
        let mut enc = Encoder::with_capacity(&config, trits.len()).expect("single variant");
        enc.push_trits(black_box(&trits));
        enc.finish()
    };
    let payload = encode_once();
    let decode_once = || {
        Decoder::new(black_box(&payload), &config).fold(0u64, |acc, e| {
            acc.wrapping_mul(31).wrapping_add(match e {
                Event::Data(t) => t.rank() as u64,
                Event::Boundary(l) => 3 + l,
            })
        })
    };

    for _ in 0..bench.warmup {
        black_box(encode_once());
        black_box(decode_once());
    }
    let mut encode = Duration::MAX;
    let mut decode = Duration::MAX;
    let mut checksum = 0;
    for _ in 0..bench.iterations {
        let t = Instant::now();
        black_box(encode_once());
        encode = encode.min(t.elapsed());
        let t = Instant::now();
        checksum = black_box(decode_once());
        decode = decode.min(t.elapsed());
    }
    let mb = scale as f64 / 1e6;
    Ok(ThroughputReport {
        weights: scale,
        encode,
        decode,
        encode_mb_s: mb / encode.as_secs_f64().max(1e-9),
        decode_mb_s: mb / decode.as_secs_f64().max(1e-9),
        checksum,
    })
}

pub fn throughput_table(reports: &[ThroughputReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>12} {:>12} {:>12}", "weights", "encode MB/s", "decode MB/s");
    for r in reports {
        let _ = writeln!(s, "{:>12} {:>12.1} {:>12.1}", r.weights, r.encode_mb_s, r.decode_mb_s);
    }
    s
}
