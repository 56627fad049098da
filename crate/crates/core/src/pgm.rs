//! Portable graymap (PGM) reading and writing, plain (P2) and raw (P5).
//!
//! Only 8-bit data is accepted: a header maxval above 255 is rejected. Pixel
//! values are returned exactly as stored, without rescaling to 255.

use crate::image::{ImageError, ImageGrid};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PgmError {
    #[error("not a PGM file: expected magic P2 or P5")]
    BadMagic,
    #[error("malformed PGM header: {0}")]
    BadHeader(String),
    #[error("maxval {0} is not supported (must be 1..=255)")]
    UnsupportedMaxval(u32),
    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("malformed pixel sample: {0}")]
    BadSample(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Output encoding for [`write_pgm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmMode {
    /// Raw bytes after the header (P5).
    #[default]
    Binary,
    /// Whitespace separated decimal samples (P2).
    Ascii,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skips whitespace and `#` comments (comment runs to end of line).
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn header_number(&mut self, what: &str) -> Result<u32, PgmError> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError::BadHeader(format!("missing {what}")));
        }
        // a token must end at whitespace or a comment
        if let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_whitespace() && b != b'#' {
                return Err(PgmError::BadHeader(format!("invalid {what}")));
            }
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::BadHeader(format!("{what} out of range")))
    }
}

/// Parses a P2 or P5 graymap.
pub fn read_pgm(bytes: &[u8]) -> Result<ImageGrid, PgmError> {
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(PgmError::BadMagic),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(PgmError::BadMagic);
    }
    let width = cur.header_number("width")? as usize;
    let height = cur.header_number("height")? as usize;
    let maxval = cur.header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::BadHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| PgmError::BadHeader("dimensions overflow".into()))?;

    let pixels = if binary {
        // exactly one whitespace byte separates maxval from the raster
        match cur.bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(PgmError::BadHeader("missing separator after maxval".into())),
        }
        let raster = &cur.bytes[cur.pos..];
        if raster.len() < expected {
            return Err(PgmError::Truncated {
                expected,
                found: raster.len(),
            });
        }
        let raster = &raster[..expected];
        if let Some(&v) = raster.iter().find(|&&v| u32::from(v) > maxval) {
            return Err(PgmError::BadSample(format!("{v} exceeds maxval {maxval}")));
        }
        raster.to_vec()
    } else {
        let text = &cur.bytes[cur.pos..];
        let mut pixels = Vec::with_capacity(expected);
        for token in text
            .split(|b| b.is_ascii_whitespace())
            .filter(|t| !t.is_empty())
            .take(expected)
        {
            let s = std::str::from_utf8(token)
                .map_err(|_| PgmError::BadSample("non-ASCII sample".into()))?;
            let v: u32 = s
                .parse()
                .map_err(|_| PgmError::BadSample(format!("{s:?} is not a number")))?;
            if v > maxval {
                return Err(PgmError::BadSample(format!("{v} exceeds maxval {maxval}")));
            }
            pixels.push(v as u8);
        }
        if pixels.len() < expected {
            return Err(PgmError::Truncated {
                expected,
                found: pixels.len(),
            });
        }
        pixels
    };
    Ok(ImageGrid::new(width, height, pixels)?)
}

/// Serializes `grid` with maxval 255.
pub fn write_pgm(grid: &ImageGrid, mode: PgmMode) -> Vec<u8> {
    let magic = match mode {
        PgmMode::Binary => "P5",
        PgmMode::Ascii => "P2",
    };
    let mut out = format!("{magic}\n{} {}\n255\n", grid.width(), grid.height()).into_bytes();
    match mode {
        PgmMode::Binary => out.extend_from_slice(grid.pixels()),
        PgmMode::Ascii => {
            // one image row per line, wrapped to stay under 70 characters
            for row in grid.pixels().chunks(grid.width()) {
                let mut line_len = 0;
                for (i, v) in row.iter().enumerate() {
                    let s = v.to_string();
                    if i > 0 {
                        if line_len + 1 + s.len() > 70 {
                            out.push(b'\n');
                            line_len = 0;
                        } else {
                            out.push(b' ');
                            line_len += 1;
                        }
                    }
                    out.extend_from_slice(s.as_bytes());
                    line_len += s.len();
                }
                out.push(b'\n');
            }
        }
    }
    out
}
