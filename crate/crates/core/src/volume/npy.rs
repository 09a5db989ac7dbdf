//! Reader for uncompressed NPY v1.0 arrays.

use super::Volume3;
use crate::error::{Error, Result};
use crate::grid::Grid;

const NPY_MAGIC: &[u8; 6] = b"\x93NUMPY";

#[derive(Debug, Default)]
struct Header {
    descr: Option<String>,
    fortran_order: Option<bool>,
    shape: Option<Vec<usize>>,
}

/// Cursor over the Python-literal header dictionary.
struct Literal<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Literal<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(bad(format!(
                "expected '{}' at byte {}",
                c as char, self.pos
            )))
        }
    }

    fn string(&mut self) -> Result<String> {
        let quote = self.peek().ok_or_else(|| bad("unexpected end"))?;
        if quote != b'\'' && quote != b'"' {
            return Err(bad(format!("expected string at byte {}", self.pos)));
        }
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos] != quote {
            self.pos += 1;
        }
        if self.pos >= self.s.len() {
            return Err(bad("unterminated string"));
        }
        let out = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
        self.pos += 1;
        Ok(out)
    }

    fn word(&mut self) -> &'a [u8] {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        &self.s[start..self.pos]
    }

    fn tuple(&mut self) -> Result<Vec<usize>> {
        self.expect(b'(')?;
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Some(b')') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(b',') => self.pos += 1,
                Some(_) => {
                    let w = self.word();
                    let text = std::str::from_utf8(w).map_err(|_| bad("non-ascii shape"))?;
                    let n = text
                        .trim_end_matches('L')
                        .parse()
                        .map_err(|_| bad(format!("bad shape entry {text:?}")))?;
                    out.push(n);
                }
                None => return Err(bad("unterminated shape tuple")),
            }
        }
    }

    fn header(&mut self) -> Result<Header> {
        let mut header = Header::default();
        self.expect(b'{')?;
        loop {
            match self.peek() {
                Some(b'}') => return Ok(header),
                Some(b',') => {
                    self.pos += 1;
                    continue;
                }
                None => return Err(bad("unterminated header dictionary")),
                _ => {}
            }
            let key = self.string()?;
            self.expect(b':')?;
            match key.as_str() {
                "descr" => header.descr = Some(self.string()?),
                "fortran_order" => {
                    header.fortran_order = Some(match self.word() {
                        b"True" => true,
                        b"False" => false,
                        other => {
                            return Err(bad(format!(
                                "bad fortran_order {:?}",
                                String::from_utf8_lossy(other)
                            )))
                        }
                    })
                }
                "shape" => header.shape = Some(self.tuple()?),
                other => return Err(bad(format!("unexpected key {other:?}"))),
            }
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadHeader(msg.into())
}

/// Decodes an NPY v1.0 C-order 3D array of `|u1`, `<i2` or `<f4` elements.
pub fn decode_npy(bytes: &[u8]) -> Result<Volume3> {
    if bytes.len() < 6 || &bytes[..6] != NPY_MAGIC {
        return Err(Error::BadMagic {
            expected: "\\x93NUMPY",
        });
    }
    if bytes.len() < 10 {
        return Err(Error::TruncatedPayload {
            expected: 10,
            found: bytes.len(),
        });
    }
    let (major, minor) = (bytes[6], bytes[7]);
    if (major, minor) != (1, 0) {
        return Err(Error::UnsupportedVersion(major as u32 * 100 + minor as u32));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_start = 10 + header_len;
    if bytes.len() < data_start {
        return Err(Error::TruncatedPayload {
            expected: data_start,
            found: bytes.len(),
        });
    }
    let header = Literal {
        s: &bytes[10..data_start],
        pos: 0,
    }
    .header()?;

    let descr = header.descr.ok_or_else(|| bad("missing descr"))?;
    let fortran = header
        .fortran_order
        .ok_or_else(|| bad("missing fortran_order"))?;
    let dims = header.shape.ok_or_else(|| bad("missing shape"))?;
    let elem_size = match descr.as_str() {
        "|u1" => 1,
        "<i2" => 2,
        "<f4" => 4,
        _ => return Err(Error::UnsupportedDescr(descr)),
    };
    if fortran {
        return Err(Error::FortranOrderUnsupported);
    }
    if dims.len() != 3 {
        return Err(bad(format!("expected 3 dimensions, found {}", dims.len())));
    }
    let shape = [dims[0], dims[1], dims[2]];
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| bad("shape overflow"))?;
    let payload = &bytes[data_start..];
    if payload.len() != count * elem_size {
        return Err(Error::TruncatedPayload {
            expected: count * elem_size,
            found: payload.len(),
        });
    }
    Ok(match elem_size {
        1 => Volume3::U8(Grid::from_vec(shape, payload.to_vec())?),
        2 => Volume3::I16(Grid::from_vec(
            shape,
            payload
                .chunks_exact(2)
                .map(|c| i16::from_le_bytes([c[0], c[1]]))
                .collect(),
        )?),
        _ => Volume3::F32(Grid::from_vec(
            shape,
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        )?),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Builds NPY v1.0 bytes following the published layout: magic, version,
    /// little-endian header length, then a space-padded dict ending in '\n'
    /// so that the payload starts on a 64-byte boundary.
    pub(crate) fn npy_bytes(descr: &str, fortran: bool, shape: &str, payload: &[u8]) -> Vec<u8> {
        let dict = format!(
            "{{'descr': '{descr}', 'fortran_order': {}, 'shape': {shape}, }}",
            if fortran { "True" } else { "False" }
        );
        let unpadded = 10 + dict.len() + 1;
        let padding = (64 - unpadded % 64) % 64;
        let header = format!("{dict}{}\n", " ".repeat(padding));
        let mut out = b"\x93NUMPY\x01\x00".to_vec();
        out.extend_from_slice(&(header.len() as u16).to_le_bytes());
        out.extend_from_slice(header.as_bytes());
        assert_eq!(out.len() % 64, 0);
        out.extend_from_slice(payload);
        out
    }

    #[test]
    fn u1_row() {
        let bytes = npy_bytes("|u1", false, "(1, 1, 3)", &[1, 2, 3]);
        let v = decode_npy(&bytes).unwrap();
        assert_eq!(
            v,
            Volume3::U8(Grid::from_vec([1, 1, 3], vec![1, 2, 3]).unwrap())
        );
    }

    #[test]
    fn f4_and_i2() {
        let payload: Vec<u8> = [1.5f32, -2.0]
            .iter()
            .flat_map(|v| v.to_le_bytes())
            .collect();
        let v = decode_npy(&npy_bytes("<f4", false, "(2, 1, 1)", &payload)).unwrap();
        assert_eq!(
            v,
            Volume3::F32(Grid::from_vec([2, 1, 1], vec![1.5, -2.0]).unwrap())
        );

        let payload: Vec<u8> = [-1000i16, 3].iter().flat_map(|v| v.to_le_bytes()).collect();
        let v = decode_npy(&npy_bytes("<i2", false, "(1, 2, 1)", &payload)).unwrap();
        assert_eq!(
            v,
            Volume3::I16(Grid::from_vec([1, 2, 1], vec![-1000, 3]).unwrap())
        );
    }

    #[test]
    fn rejections() {
        let fortran = npy_bytes("|u1", true, "(1, 1, 3)", &[1, 2, 3]);
        assert!(matches!(
            decode_npy(&fortran),
            Err(Error::FortranOrderUnsupported)
        ));

        let f8 = npy_bytes("<f8", false, "(1, 1, 1)", &[0; 8]);
        assert!(matches!(decode_npy(&f8), Err(Error::UnsupportedDescr(d)) if d == "<f8"));

        let two_d = npy_bytes("|u1", false, "(1, 3)", &[1, 2, 3]);
        assert!(matches!(decode_npy(&two_d), Err(Error::BadHeader(_))));

        let short = npy_bytes("|u1", false, "(1, 1, 3)", &[1, 2]);
        assert!(matches!(
            decode_npy(&short),
            Err(Error::TruncatedPayload { .. })
        ));

        assert!(matches!(decode_npy(b"NUMPY!"), Err(Error::BadMagic { .. })));
    }
}
