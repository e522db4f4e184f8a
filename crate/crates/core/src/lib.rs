//! NativeTernary: ternary data in 2-bit pairs with inline hierarchy markers.
//!
//! Three of the four bit-pairs carry a trit; the fourth is a delimiter, and
//! a run of `N` delimiters marks a boundary of level `N`. Any pair can be
//! chosen as the delimiter. The crate also provides the dual-starter
//! variant, block transcoding of arbitrary bytes into trits, a container
//! format with a ternary model packer, a bit-flip channel simulator and the
//! size/density arithmetic used to compare against GGUF storage.
//!
//! ```
//! use nativeternary::{decode, encode, Event, SchemeConfig, Trit};
//!
//! let events = [Event::Data(Trit::Low), Event::Data(Trit::High), Event::Boundary(2)];
//! let buf = encode(&events, &SchemeConfig::default()).unwrap();
//! assert_eq!(buf.as_bytes(), &[0x2f]);
//! assert_eq!(decode(&buf, &SchemeConfig::default()), events);
//! ```

pub mod analytics;
pub mod channel;
pub mod codec;
pub mod container;
pub mod dual;
mod error;
pub mod model;
pub mod pair;
pub mod text;
pub mod transcode;

pub use codec::{
    coalesce, data_symbols, decode, encode, pair_to_trit, trit_to_pair, Decoder, Encoder, Event,
    Mapping, SchemeConfig, Trit, Variant,
};
pub use container::{parse_file, read_container, write_container, Container, ContainerFile, ContainerHeader};
pub use dual::{decode_dual, encode_dual, DualConfig, DualDecoded, DualSymbol, Namespace};
pub use error::{Error, FormatError, Result};
pub use model::{boundary_overhead, pack_model, unpack_model, ModelManifest, UnpackedModel};
pub use pair::{BitPair, PairBuffer};
pub use transcode::{binary_to_trits, expansion_factor, trits_to_binary, TritBlockCodecParams};
