use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use nativeternary::analytics::{
    amortised_overhead, data_density, storage_comparison, storage_table, throughput_bench,
    throughput_table, BenchConfig, ModelShape, StorageModel, TextShapeParams,
};
use nativeternary::channel::{changed_pairs, classify, inject, CorruptionSpec};
use nativeternary::container::{write_model_file, ContainerFile};
use nativeternary::model::encode_model_payload;
use nativeternary::text::{format_dual, format_events, parse_dual, parse_events};
use nativeternary::transcode::{binary_to_trits, expansion_factor, trits_to_binary};
use nativeternary::{
    boundary_overhead, decode, decode_dual, encode, encode_dual, parse_file,
    unpack_model, write_container, BitPair, Encoder, Event, Mapping, ModelManifest,
    SchemeConfig, Trit, TritBlockCodecParams, Variant,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Codec(#[from] nativeternary::Error),
    #[error("{0}")]
    Usage(String),
}

impl From<nativeternary::FormatError> for CliError {
    fn from(e: nativeternary::FormatError) -> Self {
        CliError::Codec(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Codec(nativeternary::Error::Format(_)) => 3,
            CliError::Codec(nativeternary::Error::Argument(_) | nativeternary::Error::Domain { .. }) => 4,
            CliError::Codec(nativeternary::Error::Corruption(_)) => 5,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ntrn", version, about = "NativeTernary codec: 2-bit-pair ternary framing with run-length boundaries")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Io {
    /// Input file (default: stdin)
    #[arg(long = "in", value_name = "PATH")]
    input: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long = "out", value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Scheme {
    /// Delimiter bit-pair [default: 11]
    #[arg(long, value_parser = ["00", "01", "10", "11"])]
    delimiter: Option<String>,
    /// Trit value mapping [default: balanced]
    #[arg(long, value_parser = ["balanced", "unsigned"])]
    mapping: Option<String>,
    /// Encoding variant [default: single]
    #[arg(long, value_parser = ["single", "dual"])]
    variant: Option<String>,
}

impl Scheme {
    fn config(&self) -> Result<SchemeConfig> {
        let variant: Variant = self.variant.as_deref().unwrap_or("single").parse()?;
        if variant == Variant::Dual {
            if self.delimiter.is_some() || self.mapping.is_some() {
                return Err(CliError::Usage(
                    "--delimiter and --mapping do not apply to --variant dual".into(),
                ));
            }
            return Ok(SchemeConfig::dual());
        }
        let delimiter: BitPair = self.delimiter.as_deref().unwrap_or("11").parse()?;
        let mapping: Mapping = self.mapping.as_deref().unwrap_or("balanced").parse()?;
        Ok(SchemeConfig::single(delimiter, mapping))
    }

    fn single(&self, command: &str) -> Result<SchemeConfig> {
        let config = self.config()?;
        if config.variant == Variant::Dual {
            return Err(CliError::Usage(format!("`{command}` needs the single-delimiter variant")));
        }
        Ok(config)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Event text (`D-1 D0 D+1 B2`, or `A01 B1` for dual) to container
    Encode {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        scheme: Scheme,
    },
    /// Container to event text
    Decode {
        #[command(flatten)]
        io: Io,
    },
    /// Arbitrary bytes to a transcoded container, or back with --reverse
    Transcode {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        scheme: Scheme,
        #[arg(long)]
        reverse: bool,
    },
    /// Manifest plus raw weights (one signed byte each) to a model container
    Pack {
        #[arg(long, value_name = "PATH")]
        manifest: PathBuf,
        #[arg(long, value_name = "PATH")]
        weights: PathBuf,
        #[arg(long = "out", value_name = "PATH")]
        output: Option<PathBuf>,
        #[command(flatten)]
        scheme: Scheme,
    },
    /// Model container to raw weights (--out) and manifest (--manifest)
    Unpack {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
    },
    /// Header fields and boundary census
    Inspect {
        #[command(flatten)]
        io: Io,
    },
    /// Flip payload bits; corrupted container to --out, report to stderr
    Corrupt {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1)]
        flips: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Encode/decode throughput on random weights
    Bench {
        #[arg(long, default_value_t = 1_000_000)]
        scale: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        iterations: u32,
        #[arg(long = "out", value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Density, delimiter amortisation and storage comparison tables
    Analyze {
        /// Weight count for the storage table [default: 1M, 125M and 1B]
        #[arg(long)]
        scale: Option<u64>,
        #[arg(long, default_value_t = 24)]
        layers: u64,
        #[arg(long, default_value_t = 170)]
        tensors: u64,
        #[arg(long = "out", value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

fn read_input(path: Option<&Path>) -> Result<Vec<u8>> {
    match path {
        Some(p) => Ok(fs::read(p)?),
        None => {
            let mut buf = Vec::new();
            io::stdin().lock().read_to_end(&mut buf)?;
            Ok(buf)
        }
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn read_text(path: Option<&Path>) -> Result<String> {
    String::from_utf8(read_input(path)?)
        .map_err(|_| CliError::Codec(nativeternary::Error::Argument("input is not UTF-8 text".into())))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode { io, scheme } => {
            let config = scheme.config()?;
            let text = read_text(io.input.as_deref())?;
            let payload = match config.variant {
                Variant::Single => encode(&parse_events(&text, config.mapping)?, &config)?,
                Variant::Dual => encode_dual(&parse_dual(&text)?),
            };
            write_output(io.output.as_deref(), &write_container(&payload, &config, None))
        }
        Command::Decode { io } => {
            let file = parse_file(&read_input(io.input.as_deref())?)?;
            let config = file.header.config;
            let text = match config.variant {
                Variant::Single => format_events(&decode(&file.payload, &config), config.mapping),
                Variant::Dual => {
                    let out = decode_dual(&file.payload);
                    if out.skipped_prefix_pairs > 0 {
                        eprintln!("ntrn: skipped {} continuation pairs before the first starter", out.skipped_prefix_pairs);
                    }
                    format_dual(&out.symbols)
                }
            };
            write_output(io.output.as_deref(), text.as_bytes())
        }
        Command::Transcode { io, scheme, reverse } => {
            let params = TritBlockCodecParams::default();
            let input = read_input(io.input.as_deref())?;
            if reverse {
                let container = nativeternary::read_container(&input)?;
                let Some(len) = container.transcoded_length else {
                    return Err(nativeternary::Error::Argument("container is not transcoded".into()).into());
                };
                let trits: Vec<Trit> = decode(&container.payload, &container.config)
                    .into_iter()
                    .map(|e| match e {
                        Event::Data(t) => Ok(t),
                        Event::Boundary(_) => Err(nativeternary::Error::Corruption(
                            "boundary inside transcoded payload".into(),
                        )),
                    })
                    .collect::<std::result::Result<_, _>>()?;
                let bytes = trits_to_binary(&trits, len as usize, &params)?;
                write_output(io.output.as_deref(), &bytes)
            } else {
                let config = scheme.single("transcode")?;
                let mut enc = Encoder::new(&config)?;
                enc.push_trits(&binary_to_trits(&input, &params));
                let file = write_container(&enc.finish(), &config, Some(input.len() as u64));
                write_output(io.output.as_deref(), &file)
            }
        }
        Command::Pack { manifest, weights, output, scheme } => {
            let config = scheme.single("pack")?;
            let manifest = ModelManifest::from_json(&fs::read(manifest)?)?;
            let weights = fs::read(weights)?
                .into_iter()
                .map(|b| Trit::from_value(b as i8 as i64, Mapping::Balanced))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let payload = encode_model_payload(&manifest, &weights, &config)?;
            write_output(output.as_deref(), &write_model_file(&payload, &config, &manifest))
        }
        Command::Unpack { io, manifest } => {
            let model = unpack_model(&read_input(io.input.as_deref())?)?;
            let bytes: Vec<u8> = model
                .weights
                .iter()
                .map(|t| t.value(Mapping::Balanced) as u8)
                .collect();
            if let Some(path) = manifest {
                fs::write(path, model.manifest.to_json())?;
            }
            write_output(io.output.as_deref(), &bytes)
        }
        Command::Inspect { io } => {
            let input = read_input(io.input.as_deref())?;
            let file = parse_file(&input)?;
            write_output(io.output.as_deref(), inspect(&file, input.len()).as_bytes())
        }
        Command::Corrupt { io, flips, seed } => {
            let input = read_input(io.input.as_deref())?;
            let file = parse_file(&input)?;
            let config = file.header.config;
            if config.variant != Variant::Single {
                return Err(nativeternary::Error::Argument(
                    "corruption reports need a single-delimiter container".into(),
                )
                .into());
            }
            let dirty = inject(&file.payload, &CorruptionSpec::Random { count: flips, seed })?;
            let report = classify(
                &decode(&file.payload, &config),
                &decode(&dirty, &config),
                &changed_pairs(&file.payload, &dirty),
                &config,
            );
            let out = match &file.manifest {
                Some(m) => write_model_file(&dirty, &config, m),
                None => write_container(
                    &dirty,
                    &config,
                    file.header.transcoded.then_some(file.header.original_byte_length),
                ),
            };
            write_output(io.output.as_deref(), &out)?;
            eprint!("{report}");
            Ok(())
        }
        Command::Bench { scale, seed, iterations, output } => {
            let report = throughput_bench(scale, seed, BenchConfig { warmup: 1, iterations })?;
            let mut text = String::from("# single-threaded, primary scheme, uniform random weights\n");
            text.push_str(&throughput_table(&[report]));
            write_output(output.as_deref(), text.as_bytes())
        }
        Command::Analyze { scale, layers, tensors, output } => {
            write_output(output.as_deref(), analyze(scale, layers, tensors)?.as_bytes())
        }
    }
}

fn inspect(file: &ContainerFile, file_len: usize) -> String {
    let h = &file.header;
    let c = h.config;
    let mut s = String::new();
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(s, "{k}: {v}");
    };
    kv("magic", &"NTRN");
    kv("version", &nativeternary::container::VERSION);
    kv("file_bytes", &file_len);
    kv("variant", &c.variant);
    if c.variant == Variant::Single {
        kv("delimiter", &c.delimiter);
        kv("mapping", &c.mapping);
    }
    kv("transcoded", &h.transcoded);
    kv("original_byte_length", &h.original_byte_length);
    kv("pair_count", &h.payload_pair_count);
    kv("payload_bytes", &file.payload.as_bytes().len());
    match c.variant {
        Variant::Single => {
            let mut census = BTreeMap::new();
            let mut data = 0u64;
            for e in decode(&file.payload, &c) {
                match e {
                    Event::Data(_) => data += 1,
                    Event::Boundary(l) => *census.entry(l).or_insert(0u64) += 1,
                }
            }
            let boundary_pairs = h.payload_pair_count - data;
            kv("data_pairs", &data);
            kv("boundary_pairs", &boundary_pairs);
            kv("boundary_bits", &(2 * boundary_pairs));
            let census = census
                .iter()
                .map(|(l, n)| format!("level{l}={n}"))
                .collect::<Vec<_>>()
                .join(" ");
            kv("boundary_census", &census);
        }
        Variant::Dual => {
            let out = decode_dual(&file.payload);
            let a = out.symbols.iter().filter(|s| s.namespace == nativeternary::Namespace::A).count();
            kv("symbols_a", &a);
            kv("symbols_b", &(out.symbols.len() - a));
            kv("continuation_pairs", &out.symbols.iter().map(|s| s.payload.len()).sum::<usize>());
            kv("skipped_prefix_pairs", &out.skipped_prefix_pairs);
        }
    }
    if let Some(m) = &file.manifest {
        let bits = boundary_overhead(m);
        kv("model_layers", &m.layer_count());
        kv("model_tensors", &m.tensor_count());
        kv("model_weights", &m.weight_count());
        kv("model_boundary_bits", &bits);
        kv("model_boundary_bytes", &(bits as f64 / 8.0));
    }
    s
}

fn analyze(scale: Option<u64>, layers: u64, tensors: u64) -> Result<String> {
    let mut s = String::new();
    let single = data_density(Variant::Single);
    let dual = data_density(Variant::Dual);
    let _ = writeln!(s, "# data density (information bits per transmitted bit)");
    let _ = writeln!(s, "single: {single:.6}");
    let _ = writeln!(s, "dual: {dual:.6}");
    let _ = writeln!(s, "single/dual: {:.6}", single / dual);
    let _ = writeln!(s);

    let text = TextShapeParams::default();
    let _ = writeln!(s, "# delimiter amortisation (5 chars/word, 20 words/sentence, 8 sentences/paragraph)");
    let _ = writeln!(s, "levels word=1 sentence=2 paragraph=3: {:.4} bits/char", amortised_overhead(&text)?);
    let _ = writeln!(s);

    let params = TritBlockCodecParams::default();
    let _ = writeln!(
        s,
        "# transcode: {} bytes -> {} trits, expansion {:.4}x (ideal {:.4}x)",
        params.block_bytes(),
        params.trits_per_block(),
        expansion_factor(&params),
        nativeternary::transcode::ideal_expansion()
    );
    let _ = writeln!(s);

    let models = StorageModel::gguf_reference();
    let scales = match scale {
        Some(w) => vec![w],
        None => vec![1_000_000, 125_000_000, 1_000_000_000],
    };
    for weights in scales {
        let shape = ModelShape { weights, layers: 1, tensors: 1 };
        s.push_str(&storage_table(shape, &storage_comparison(shape, &models)));
        s.push('\n');
    }
    let shape = ModelShape { weights: ModelShape::BITNET_2B4T.weights, layers, tensors };
    let rows = storage_comparison(shape, &models);
    let _ = writeln!(
        s,
        "# boundary overhead: {} layers x 2 bits + {} tensors x 4 bits = {} bits = {} bytes",
        layers,
        tensors,
        shape.boundary_bits(),
        shape.boundary_bits() as f64 / 8.0
    );
    s.push_str(&storage_table(shape, &rows));
    let _ = writeln!(
        s,
        "native structure share: {:.2e}",
        rows[0].structure_bytes / rows[0].total_bytes
    );
    Ok(s)
}
