//! Element-tagged volumes, the VVOL and NPY codecs, and intensity preprocessing.

mod npy;
mod preprocess;
mod vvol;

pub use npy::decode_npy;
pub use preprocess::{percentile_window, preprocess_ct, preprocess_percentile, WindowPreset};
pub use vvol::{
    decode_vvol, encode_vvol, read_vvol, write_vvol, Buffer, VvolArray, VvolElem, VVOL_MAGIC,
    VVOL_VERSION,
};

use crate::error::{Error, Result};
use crate::grid::{Grid, Mask, Shape};

/// Element kind of a volume, with its VVOL code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElemKind {
    U8,
    F32,
    I16,
}

impl ElemKind {
    pub fn code(self) -> u8 {
        match self {
            ElemKind::U8 => 0,
            ElemKind::F32 => 1,
            ElemKind::I16 => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(ElemKind::U8),
            1 => Some(ElemKind::F32),
            2 => Some(ElemKind::I16),
            _ => None,
        }
    }

    pub fn size(self) -> usize {
        match self {
            ElemKind::U8 => 1,
            ElemKind::I16 => 2,
            ElemKind::F32 => 4,
        }
    }
}

/// A 3D scalar volume in one of the supported element kinds.
#[derive(Clone, Debug, PartialEq)]
pub enum Volume3 {
    U8(Grid<u8>),
    I16(Grid<i16>),
    F32(Grid<f32>),
}

impl Volume3 {
    pub fn shape(&self) -> Shape {
        match self {
            Volume3::U8(g) => g.shape(),
            Volume3::I16(g) => g.shape(),
            Volume3::F32(g) => g.shape(),
        }
    }

    pub fn elem(&self) -> ElemKind {
        match self {
            Volume3::U8(_) => ElemKind::U8,
            Volume3::I16(_) => ElemKind::I16,
            Volume3::F32(_) => ElemKind::F32,
        }
    }

    pub fn to_f32(&self) -> Grid<f32> {
        match self {
            Volume3::U8(g) => g.map(|&v| v as f32),
            Volume3::I16(g) => g.map(|&v| v as f32),
            Volume3::F32(g) => g.clone(),
        }
    }

    /// Binarizes with the strict `> 0.5` rule used for labels and predictions.
    pub fn to_mask(&self) -> Mask {
        match self {
            Volume3::U8(g) => g.map(|&v| v > 0),
            Volume3::I16(g) => g.map(|&v| v > 0),
            Volume3::F32(g) => g.threshold(),
        }
    }

    pub fn to_vvol_bytes(&self) -> Vec<u8> {
        let shape = self.shape();
        match self {
            Volume3::U8(g) => vvol::encode_slice(&shape, g.data()),
            Volume3::I16(g) => vvol::encode_slice(&shape, g.data()),
            Volume3::F32(g) => vvol::encode_slice(&shape, g.data()),
        }
    }

    pub fn from_vvol_bytes(bytes: &[u8]) -> Result<Self> {
        decode_vvol(bytes)?.into_volume()
    }
}

impl From<Grid<u8>> for Volume3 {
    fn from(g: Grid<u8>) -> Self {
        Volume3::U8(g)
    }
}

impl From<Grid<i16>> for Volume3 {
    fn from(g: Grid<i16>) -> Self {
        Volume3::I16(g)
    }
}

impl From<Grid<f32>> for Volume3 {
    fn from(g: Grid<f32>) -> Self {
        Volume3::F32(g)
    }
}

impl From<&Mask> for Volume3 {
    fn from(m: &Mask) -> Self {
        Volume3::U8(m.map(|&b| b as u8))
    }
}

impl VvolArray {
    pub fn into_volume(self) -> Result<Volume3> {
        if self.dims.len() != 3 {
            return Err(Error::BadHeader(format!(
                "expected a 3-dimensional volume, found {} dims",
                self.dims.len()
            )));
        }
        let shape = [self.dims[0], self.dims[1], self.dims[2]];
        Ok(match self.data {
            Buffer::U8(v) => Volume3::U8(Grid::from_vec(shape, v)?),
            Buffer::I16(v) => Volume3::I16(Grid::from_vec(shape, v)?),
            Buffer::F32(v) => Volume3::F32(Grid::from_vec(shape, v)?),
        })
    }
}

pub(crate) fn vvol_encode_f32(dims: &[usize], data: &[f32]) -> Vec<u8> {
    vvol::encode_slice(dims, data)
}
