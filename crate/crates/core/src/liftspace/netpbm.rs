//! Binary netpbm (P5 greymap, P6 pixmap) at 8 or 16 bits per sample.

use std::path::Path;

use crate::error::{Error, Result};
use crate::liftspace::image::{Image2D, SegmentationMask};

/// Decoded netpbm raster. `samples` is row-major and channel-interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pnm {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                _ => break,
            }
        }
    }

    fn header_uint(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("netpbm", format!("missing or invalid {what}")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Pnm> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::format("netpbm", "missing magic number"));
    }
    let channels = match bytes[1] {
        b'5' => 1,
        b'6' => 3,
        other => {
            return Err(Error::format("netpbm", format!("unsupported variant P{}", other as char)));
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.header_uint("width")? as usize;
    let height = cur.header_uint("height")? as usize;
    let maxval = cur.header_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::format("netpbm", "zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format("netpbm", format!("maxval {maxval} out of range")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::format("netpbm", "header not terminated by whitespace")),
    }
    let n = width * height * channels;
    let wide = maxval > 255;
    let need = if wide { 2 * n } else { n };
    let raster = &bytes[cur.pos..];
    if raster.len() < need {
        return Err(Error::format("netpbm", format!("raster truncated: {} of {need} bytes", raster.len())));
    }
    let samples: Vec<u16> = if wide {
        raster[..need].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        raster[..need].iter().map(|&b| b as u16).collect()
    };
    if let Some(s) = samples.iter().find(|&&s| s as u32 > maxval) {
        return Err(Error::format("netpbm", format!("sample {s} exceeds maxval {maxval}")));
    }
    Ok(Pnm { width, height, channels, maxval: maxval as u16, samples })
}

pub fn encode(pnm: &Pnm) -> Vec<u8> {
    let magic = if pnm.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n{}\n", pnm.width, pnm.height, pnm.maxval).into_bytes();
    if pnm.maxval > 255 {
        for s in &pnm.samples {
            out.extend_from_slice(&s.to_be_bytes());
        }
    } else {
        out.extend(pnm.samples.iter().map(|&s| s as u8));
    }
    out
}

pub fn read(path: &Path) -> Result<Pnm> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

pub fn write(path: &Path, pnm: &Pnm) -> Result<()> {
    std::fs::write(path, encode(pnm)).map_err(|e| Error::io(path, e))
}

impl Pnm {
    /// Channel `c` scaled to [0, 1] by maxval.
    pub fn channel(&self, c: usize) -> Image2D {
        assert!(c < self.channels);
        let m = self.maxval as f64;
        let data = self.samples.iter().skip(c).step_by(self.channels).map(|&s| s as f64 / m).collect();
        Image2D { width: self.width, height: self.height, data }
    }

    /// Any nonzero grey value is foreground. Pixmaps use their first channel.
    pub fn to_mask(&self) -> SegmentationMask {
        let data = self.samples.iter().step_by(self.channels).map(|&s| (s > 0) as u8).collect();
        SegmentationMask { width: self.width, height: self.height, data }
    }

    /// Greymap of an image whose values lie in [0, 1]; out-of-range values are clipped.
    pub fn from_image(img: &Image2D, maxval: u16) -> Pnm {
        let m = maxval as f64;
        let samples = img.data.iter().map(|&v| (v.clamp(0.0, 1.0) * m).round() as u16).collect();
        Pnm { width: img.width, height: img.height, channels: 1, maxval, samples }
    }

    pub fn from_mask(mask: &SegmentationMask) -> Pnm {
        let samples = mask.data.iter().map(|&v| if v != 0 { 255 } else { 0 }).collect();
        Pnm { width: mask.width, height: mask.height, channels: 1, maxval: 255, samples }
    }

    /// 8-bit pixmap from interleaved RGB bytes.
    pub fn from_rgb(width: usize, height: usize, rgb: Vec<u8>) -> Pnm {
        assert_eq!(rgb.len(), width * height * 3);
        Pnm { width, height, channels: 3, maxval: 255, samples: rgb.into_iter().map(u16::from).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_16_bit_big_endian() {
        let mut bytes = b"P5\n# a comment\n2 1 # trailing\n65535\n".to_vec();
        bytes.extend_from_slice(&[0x01, 0x02, 0xff, 0xff]);
        let p = decode(&bytes).unwrap();
        assert_eq!((p.width, p.height, p.maxval), (2, 1, 65535));
        assert_eq!(p.samples, vec![0x0102, 0xffff]);
        assert_eq!(encode(&p)[encode(&p).len() - 4..], [0x01, 0x02, 0xff, 0xff]);
    }

    #[test]
    fn round_trips_pixmap() {
        let p = Pnm::from_rgb(2, 2, (0..12).map(|i| i * 20).collect());
        assert_eq!(decode(&encode(&p)).unwrap(), p);
    }

    #[test]
    fn rejects_truncated_and_out_of_range() {
        assert!(decode(b"P5 2 2 255\n\x00\x01\x02").is_err());
        assert!(decode(b"P5 1 1 10\n\x0b").is_err());
        assert!(decode(b"P3 1 1 255\n0").is_err());
    }

    #[test]
    fn mask_maps_nonzero_to_one() {
        let p = decode(b"P5 3 1 255\n\x00\xff\x07").unwrap();
        assert_eq!(p.to_mask().data, vec![0, 1, 1]);
    }
}
