//! Image buffers and their on-disk formats.
//!
//! Depth images store millimeters as `u16` (0 = no measurement) and
//! serialize as 16-bit binary PGM with the standard most-significant-byte
//! ordering. Silhouettes are 8-bit PGM with values 0/255; color frames are
//! 8-bit binary PPM.

use std::io::{Read, Write};

use crate::error::Error;
use crate::Result;

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    pub width: u32,
    pub height: u32,
    data: Vec<u8>,
}

impl ColorImage {
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity((width * height * 3) as usize);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = ((y * self.width + x) * 3) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = ((y * self.width + x) * 3) as usize;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn write_ppm<W: Write>(&self, w: &mut W) -> Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.data)?;
        Ok(())
    }

    pub fn read_ppm<R: Read>(r: &mut R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let (magic, dims, rest) = parse_netpbm_header(&bytes)?;
        if magic != "P6" {
            return Err(Error::Format(format!("expected PPM magic P6, got {magic}")));
        }
        let (width, height, maxval) = dims;
        if maxval != 255 {
            return Err(Error::Format(format!("unsupported PPM maxval {maxval}")));
        }
        let expected = (width * height * 3) as usize;
        if rest.len() < expected {
            return Err(Error::Format("truncated PPM payload".into()));
        }
        Ok(Self { width, height, data: rest[..expected].to_vec() })
    }
}

/// Depth image in meters (stored as f32); 0 marks an invalid measurement.
///
/// Serialization quantizes to 16-bit millimeters, matching consumer sensors.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: u32,
    pub height: u32,
    data: Vec<f32>,
}

impl DepthImage {
    pub fn empty(width: u32, height: u32) -> Self {
        Self { width, height, data: vec![0.0; (width * height) as usize] }
    }

    /// Quantized millimeter value as stored in the file format.
    #[inline]
    pub fn millimeters(&self, x: u32, y: u32) -> u16 {
        let v = self.data[(y * self.width + x) as usize] as f64;
        (v * 1000.0).round().clamp(0.0, u16::MAX as f64) as u16
    }

    /// Depth in meters, `None` for missing measurements.
    #[inline]
    pub fn depth_m(&self, x: u32, y: u32) -> Option<f64> {
        let v = self.data[(y * self.width + x) as usize];
        (v > 0.0).then_some(v as f64)
    }

    /// Stores a depth; non-positive values mark the pixel invalid.
    #[inline]
    pub fn set_meters(&mut self, x: u32, y: u32, meters: f64) {
        self.data[(y * self.width + x) as usize] = meters.max(0.0) as f32;
    }

    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    pub fn write_pgm<W: Write>(&self, w: &mut W) -> Result<()> {
        write!(w, "P5\n{} {}\n65535\n", self.width, self.height)?;
        let mut bytes = Vec::with_capacity(self.data.len() * 2);
        for y in 0..self.height {
            for x in 0..self.width {
                bytes.extend_from_slice(&self.millimeters(x, y).to_be_bytes());
            }
        }
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_pgm<R: Read>(r: &mut R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let (magic, dims, rest) = parse_netpbm_header(&bytes)?;
        if magic != "P5" {
            return Err(Error::Format(format!("expected PGM magic P5, got {magic}")));
        }
        let (width, height, maxval) = dims;
        if maxval != 65535 {
            return Err(Error::Format(format!("expected 16-bit depth PGM, maxval {maxval}")));
        }
        let expected = (width * height * 2) as usize;
        if rest.len() < expected {
            return Err(Error::Format("truncated PGM payload".into()));
        }
        let data = rest[..expected]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f32 * 1e-3)
            .collect();
        Ok(Self { width, height, data })
    }
}

/// Per-pixel foreground mask paired with a rendered depth image.
#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteMask {
    pub width: u32,
    pub height: u32,
    data: Vec<bool>,
}

impl SilhouetteMask {
    pub fn empty(width: u32, height: u32) -> Self {
        Self { width, height, data: vec![false; (width * height) as usize] }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[(y * self.width + x) as usize]
    }

    /// Out-of-image queries count as background.
    #[inline]
    pub fn get_or_background(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return false;
        }
        self.data[(y as u32 * self.width + x as u32) as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, fg: bool) {
        self.data[(y * self.width + x) as usize] = fg;
    }

    pub fn count_foreground(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn write_pgm<W: Write>(&self, w: &mut W) -> Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self.data.iter().map(|&b| if b { 255 } else { 0 }).collect();
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_pgm<R: Read>(r: &mut R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let (magic, dims, rest) = parse_netpbm_header(&bytes)?;
        if magic != "P5" {
            return Err(Error::Format(format!("expected PGM magic P5, got {magic}")));
        }
        let (width, height, maxval) = dims;
        if maxval != 255 {
            return Err(Error::Format(format!("expected 8-bit mask PGM, maxval {maxval}")));
        }
        let expected = (width * height) as usize;
        if rest.len() < expected {
            return Err(Error::Format("truncated PGM payload".into()));
        }
        let data = rest[..expected].iter().map(|&b| b >= 128).collect();
        Ok(Self { width, height, data })
    }
}

/// Parses `magic width height maxval` with whitespace/comment handling and
/// returns the remaining payload.
type NetpbmHeader<'a> = (String, (u32, u32, u32), &'a [u8]);

fn parse_netpbm_header(bytes: &[u8]) -> Result<NetpbmHeader<'_>> {
    let mut pos = 0usize;
    let mut fields: Vec<String> = Vec::new();
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated netpbm header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // Exactly one whitespace byte separates the header from the payload.
    if pos < bytes.len() {
        pos += 1;
    }
    let magic = fields[0].clone();
    let width: u32 = fields[1].parse().map_err(|_| Error::Format("bad width".into()))?;
    let height: u32 = fields[2].parse().map_err(|_| Error::Format("bad height".into()))?;
    let maxval: u32 = fields[3].parse().map_err(|_| Error::Format("bad maxval".into()))?;
    Ok((magic, (width, height, maxval), &bytes[pos..]))
}
