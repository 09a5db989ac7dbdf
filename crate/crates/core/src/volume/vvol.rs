//! VVOL: a minimal little-endian container for 3D volumes and channel stacks.
//!
//! ```text
//! "VVOL" | version u16 | elem u8 | ndim u8 | ndim x u32 dims | payload
//! ```

use std::fs;
use std::path::Path;

use super::ElemKind;
use crate::error::{Error, Result};

pub const VVOL_MAGIC: &[u8; 4] = b"VVOL";
pub const VVOL_VERSION: u16 = 1;

/// Scalars that can be stored in a VVOL payload.
pub trait VvolElem: Copy {
    const KIND: ElemKind;
    fn write_le(self, out: &mut Vec<u8>);
}

impl VvolElem for u8 {
    const KIND: ElemKind = ElemKind::U8;
    fn write_le(self, out: &mut Vec<u8>) {
        out.push(self);
    }
}

impl VvolElem for i16 {
    const KIND: ElemKind = ElemKind::I16;
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
}

impl VvolElem for f32 {
    const KIND: ElemKind = ElemKind::F32;
    fn write_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Buffer {
    U8(Vec<u8>),
    I16(Vec<i16>),
    F32(Vec<f32>),
}

impl Buffer {
    pub fn elem(&self) -> ElemKind {
        match self {
            Buffer::U8(_) => ElemKind::U8,
            Buffer::I16(_) => ElemKind::I16,
            Buffer::F32(_) => ElemKind::F32,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Buffer::U8(v) => v.len(),
            Buffer::I16(v) => v.len(),
            Buffer::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A decoded VVOL array: 3 dims for a volume, 4 for a channel-first stack.
#[derive(Clone, Debug, PartialEq)]
pub struct VvolArray {
    pub dims: Vec<usize>,
    pub data: Buffer,
}

pub(crate) fn encode_slice<T: VvolElem>(dims: &[usize], data: &[T]) -> Vec<u8> {
    debug_assert_eq!(dims.iter().product::<usize>(), data.len());
    let mut out = Vec::with_capacity(8 + 4 * dims.len() + data.len() * T::KIND.size());
    out.extend_from_slice(VVOL_MAGIC);
    out.extend_from_slice(&VVOL_VERSION.to_le_bytes());
    out.push(T::KIND.code());
    out.push(dims.len() as u8);
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &v in data {
        v.write_le(&mut out);
    }
    out
}

pub fn encode_vvol(array: &VvolArray) -> Vec<u8> {
    match &array.data {
        Buffer::U8(v) => encode_slice(&array.dims, v),
        Buffer::I16(v) => encode_slice(&array.dims, v),
        Buffer::F32(v) => encode_slice(&array.dims, v),
    }
}

pub fn decode_vvol(bytes: &[u8]) -> Result<VvolArray> {
    if bytes.len() < 4 || &bytes[..4] != VVOL_MAGIC {
        return Err(Error::BadMagic { expected: "VVOL" });
    }
    if bytes.len() < 8 {
        return Err(Error::TruncatedPayload {
            expected: 8,
            found: bytes.len(),
        });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VVOL_VERSION {
        return Err(Error::UnsupportedVersion(version as u32));
    }
    let elem = ElemKind::from_code(bytes[6])
        .ok_or_else(|| Error::BadHeader(format!("unknown element code {}", bytes[6])))?;
    let ndim = bytes[7] as usize;
    if ndim != 3 && ndim != 4 {
        return Err(Error::BadHeader(format!("ndim must be 3 or 4, got {ndim}")));
    }
    let header_len = 8 + 4 * ndim;
    if bytes.len() < header_len {
        return Err(Error::TruncatedPayload {
            expected: header_len,
            found: bytes.len(),
        });
    }
    let dims: Vec<usize> = bytes[8..header_len]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    if dims.contains(&0) {
        return Err(Error::BadHeader(format!(
            "zero-sized dimension in {dims:?}"
        )));
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::BadHeader(format!("dimensions overflow: {dims:?}")))?;
    let payload = &bytes[header_len..];
    let expected = count
        .checked_mul(elem.size())
        .ok_or_else(|| Error::BadHeader(format!("dimensions overflow: {dims:?}")))?;
    if payload.len() != expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    let data = match elem {
        ElemKind::U8 => Buffer::U8(payload.to_vec()),
        ElemKind::I16 => Buffer::I16(
            payload
                .chunks_exact(2)
                .map(|c| i16::from_le_bytes([c[0], c[1]]))
                .collect(),
        ),
        ElemKind::F32 => Buffer::F32(
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        ),
    };
    Ok(VvolArray { dims, data })
}

pub fn read_vvol(path: impl AsRef<Path>) -> Result<VvolArray> {
    decode_vvol(&fs::read(path)?)
}

pub fn write_vvol(path: impl AsRef<Path>, array: &VvolArray) -> Result<()> {
    fs::write(path, encode_vvol(array))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::volume::Volume3;

    #[test]
    fn u8_round_trip() {
        let v = Volume3::U8(Grid::from_vec([2, 2, 2], (0..8).collect()).unwrap());
        let bytes = v.to_vvol_bytes();
        assert_eq!(bytes.len(), 8 + 12 + 8);
        assert_eq!(Volume3::from_vvol_bytes(&bytes).unwrap(), v);
    }

    #[test]
    fn single_zero_f32() {
        let mut bytes = b"VVOL".to_vec();
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&[1, 3]);
        for _ in 0..3 {
            bytes.extend_from_slice(&1u32.to_le_bytes());
        }
        bytes.extend_from_slice(&[0, 0, 0, 0]);
        let v = Volume3::from_vvol_bytes(&bytes).unwrap();
        assert_eq!(v, Volume3::F32(Grid::filled([1, 1, 1], 0.0)));
    }

    #[test]
    fn short_payload_is_truncated() {
        let v = Volume3::I16(Grid::filled([2, 3, 4], 7));
        let bytes = v.to_vvol_bytes();
        let err = decode_vvol(&bytes[..bytes.len() - 1]).unwrap_err();
        assert!(matches!(
            err,
            Error::TruncatedPayload {
                expected: 48,
                found: 47
            }
        ));
    }

    #[test]
    fn header_errors() {
        assert!(matches!(
            decode_vvol(b"VVOX\x01\x00\x00\x03"),
            Err(Error::BadMagic { .. })
        ));
        assert!(matches!(
            decode_vvol(b"VVOL\x02\x00\x00\x03"),
            Err(Error::UnsupportedVersion(2))
        ));
        assert!(matches!(
            decode_vvol(b"VVOL\x01\x00\x09\x03"),
            Err(Error::BadHeader(_))
        ));
        assert!(matches!(
            decode_vvol(b"VVOL\x01\x00\x00\x05"),
            Err(Error::BadHeader(_))
        ));
        assert!(matches!(
            decode_vvol(b"VVOL\x01\x00\x00\x03\x01\x00"),
            Err(Error::TruncatedPayload { .. })
        ));
    }

    #[test]
    fn four_dim_stack() {
        let array = VvolArray {
            dims: vec![2, 1, 1, 3],
            data: Buffer::F32(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.5]),
        };
        let decoded = decode_vvol(&encode_vvol(&array)).unwrap();
        assert_eq!(decoded, array);
        assert!(decoded.into_volume().is_err());
    }
}
