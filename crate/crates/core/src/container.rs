//! On-disk container.
//!
//! ```text
//! 0..4    magic "NTRN"
//! 4       version (1)
//! 5       scheme flags: bits 7-6 delimiter pair, bit 5 mapping (1 = unsigned),
//!         bit 4 variant (1 = dual), bit 3 transcoded payload, bits 2-0 zero
//! 6..14   payload pair count, u64 LE
//! 14..22  original byte length, u64 LE (0 unless transcoded)
//! [model files] u32 LE manifest length, JSON manifest
//! payload, ceil(pairs / 4) bytes
//! ```

use crate::codec::{Mapping, SchemeConfig, Variant};
use crate::error::FormatError;
use crate::model::ModelManifest;
use crate::pair::{bytes_for_pairs, BitPair, PairBuffer};

pub const MAGIC: [u8; 4] = *b"NTRN";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 22;

const FLAG_UNSIGNED: u8 = 1 << 5;
const FLAG_DUAL: u8 = 1 << 4;
const FLAG_TRANSCODED: u8 = 1 << 3;
const RESERVED_MASK: u8 = 0b111;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerHeader {
    pub config: SchemeConfig,
    pub transcoded: bool,
    pub payload_pair_count: u64,
    /// Zero unless `transcoded`.
    pub original_byte_length: u64,
}

impl ContainerHeader {
    pub fn scheme_flags(&self) -> u8 {
        let mut flags = self.config.delimiter.value() << 6;
        if self.config.mapping == Mapping::Unsigned {
            flags |= FLAG_UNSIGNED;
        }
        if self.config.variant == Variant::Dual {
            flags |= FLAG_DUAL;
        }
        if self.transcoded {
            flags |= FLAG_TRANSCODED;
        }
        flags
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4] = VERSION;
        out[5] = self.scheme_flags();
        out[6..14].copy_from_slice(&self.payload_pair_count.to_le_bytes());
        out[14..22].copy_from_slice(&self.original_byte_length.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, FormatError> {
        if bytes.len() < HEADER_LEN {
            // a short file that already fails the magic check is reported as such
            if bytes.len() >= 4 && bytes[0..4] != MAGIC {
                return Err(FormatError::BadMagic(bytes[0..4].try_into().unwrap()));
            }
            return Err(FormatError::Truncated {
                needed: HEADER_LEN as u64,
                available: bytes.len() as u64,
            });
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(FormatError::BadMagic(magic));
        }
        if bytes[4] != VERSION {
            return Err(FormatError::UnsupportedVersion(bytes[4]));
        }
        let flags = bytes[5];
        if flags & RESERVED_MASK != 0 {
            return Err(FormatError::ReservedBits(flags));
        }
        let config = SchemeConfig {
            delimiter: BitPair::from_bits(flags >> 6),
            mapping: if flags & FLAG_UNSIGNED != 0 { Mapping::Unsigned } else { Mapping::Balanced },
            variant: if flags & FLAG_DUAL != 0 { Variant::Dual } else { Variant::Single },
        };
        Ok(ContainerHeader {
            config,
            transcoded: flags & FLAG_TRANSCODED != 0,
            payload_pair_count: u64::from_le_bytes(bytes[6..14].try_into().unwrap()),
            original_byte_length: u64::from_le_bytes(bytes[14..22].try_into().unwrap()),
        })
    }

    fn payload_bytes(&self) -> u64 {
        bytes_for_pairs(self.payload_pair_count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub config: SchemeConfig,
    pub payload: PairBuffer,
    /// Original byte length of a transcoded payload.
    pub transcoded_length: Option<u64>,
}

pub fn write_container(
    payload: &PairBuffer,
    config: &SchemeConfig,
    transcoded_length: Option<u64>,
) -> Vec<u8> {
    let header = ContainerHeader {
        config: *config,
        transcoded: transcoded_length.is_some(),
        payload_pair_count: payload.pair_count(),
        original_byte_length: transcoded_length.unwrap_or(0),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + payload.as_bytes().len());
    out.extend_from_slice(&header.to_bytes());
    out.extend_from_slice(payload.as_bytes());
    out
}

/// Parses a plain container. Model files are rejected with
/// [`FormatError::TrailingBytes`]; use [`parse_file`] for either kind.
pub fn read_container(file: &[u8]) -> Result<Container, FormatError> {
    let header = ContainerHeader::parse(file)?;
    let body = &file[HEADER_LEN..];
    let needed = header.payload_bytes();
    if (body.len() as u64) < needed {
        return Err(FormatError::Truncated {
            needed: HEADER_LEN as u64 + needed,
            available: file.len() as u64,
        });
    }
    if body.len() as u64 > needed {
        return Err(FormatError::TrailingBytes(body.len() as u64 - needed));
    }
    let payload = PairBuffer::from_parts(body.to_vec(), header.payload_pair_count)
        .expect("length checked above");
    Ok(Container {
        config: header.config,
        payload,
        transcoded_length: header.transcoded.then_some(header.original_byte_length),
    })
}

/// Any container file, with the model manifest when one is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainerFile {
    pub header: ContainerHeader,
    pub manifest: Option<ModelManifest>,
    pub payload: PairBuffer,
}

/// Parses a plain or model container. A model file is recognised by a
/// manifest length prefix that accounts exactly for the bytes between the
/// header and the payload.
pub fn parse_file(file: &[u8]) -> Result<ContainerFile, FormatError> {
    let header = ContainerHeader::parse(file)?;
    let body = &file[HEADER_LEN..];
    let needed = header.payload_bytes();
    let extra = (body.len() as u64).saturating_sub(needed);
    let (manifest, payload) = if extra == 0 {
        (None, body)
    } else {
        let declared = body
            .get(..4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()) as u64);
        match declared {
            Some(len) if extra == 4 + len => {
                let text = &body[4..4 + len as usize];
                let manifest = ModelManifest::from_json(text)?;
                (Some(manifest), &body[4 + len as usize..])
            }
            _ => return Err(FormatError::TrailingBytes(extra)),
        }
    };
    if (payload.len() as u64) < needed {
        return Err(FormatError::Truncated {
            needed: (file.len() - payload.len()) as u64 + needed,
            available: file.len() as u64,
        });
    }
    Ok(ContainerFile {
        header,
        manifest,
        payload: PairBuffer::from_parts(payload.to_vec(), header.payload_pair_count)
            .expect("length checked above"),
    })
}

/// Serializes a container with an embedded manifest.
pub fn write_model_file(payload: &PairBuffer, config: &SchemeConfig, manifest: &ModelManifest) -> Vec<u8> {
    let header = ContainerHeader {
        config: *config,
        transcoded: false,
        payload_pair_count: payload.pair_count(),
        original_byte_length: 0,
    };
    let json = manifest.to_json();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + json.len() + payload.as_bytes().len());
    out.extend_from_slice(&header.to_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(payload.as_bytes());
    out
}
