use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("unsupported element type {0:?}")]
    UnsupportedDescr(String),
    #[error("fortran-ordered arrays are not supported")]
    FortranOrderUnsupported,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("click at {center:?} lies outside shape {shape:?}")]
    ClickOutOfBounds {
        center: [usize; 3],
        shape: [usize; 3],
    },
    #[error("invalid bounding box: {0}")]
    InvalidBBox(String),
    #[error("expected {expected} values, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("at least one class is required")]
    EmptyClassList,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("failed to launch segmenter process: {0}")]
    ChildLaunchFailed(#[source] io::Error),
    #[error("segmenter process exceeded timeout of {0:.3}s")]
    ChildTimeout(f64),
    #[error("segmenter protocol error: {0}")]
    ProtocolError(String),
    #[error("segmenter process exited with {0}")]
    ChildExitNonzero(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn shape(left: [usize; 3], right: [usize; 3]) -> Self {
        Error::ShapeMismatch {
            left: left.to_vec(),
            right: right.to_vec(),
        }
    }

    /// True for the variants raised while decoding VVOL or NPY bytes.
    pub fn is_format(&self) -> bool {
        matches!(
            self,
            Error::BadMagic { .. }
                | Error::UnsupportedVersion(_)
                | Error::TruncatedPayload { .. }
                | Error::UnsupportedDescr(_)
                | Error::FortranOrderUnsupported
                | Error::BadHeader(_)
        )
    }

    /// True for failures originating in a segmentation backend.
    pub fn is_segmenter(&self) -> bool {
        matches!(
            self,
            Error::ChildLaunchFailed(_)
                | Error::ChildTimeout(_)
                | Error::ProtocolError(_)
                | Error::ChildExitNonzero(_)
        )
    }
}
