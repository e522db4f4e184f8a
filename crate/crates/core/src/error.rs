use thiserror::Error;

use crate::codec::Mapping;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Container parse failures. Each variant is a distinct on-disk defect.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad magic {0:02x?}, expected \"NTRN\"")]
    BadMagic([u8; 4]),
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("reserved scheme flag bits set: {0:#04x}")]
    ReservedBits(u8),
    #[error("truncated container: need {needed} bytes, have {available}")]
    Truncated { needed: u64, available: u64 },
    #[error("{0} unexpected trailing bytes after payload")]
    TrailingBytes(u64),
    #[error("invalid model manifest: {0}")]
    Manifest(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} is outside the {mapping} trit domain")]
    Domain { value: i64, mapping: Mapping },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("corrupt data: {0}")]
    Corruption(String),
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn corruption(msg: impl Into<String>) -> Self {
        Error::Corruption(msg.into())
    }
}
