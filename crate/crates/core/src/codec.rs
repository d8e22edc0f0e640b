//! `.thrm` clip container, version 1. Little-endian throughout.
//!
//! ```text
//! offset size field
//!      0    4 magic "THRM"
//!      4    2 version (u16) = 1
//!      6    2 width (u16)
//!      8    2 height (u16)
//!     10    4 frame_count (u32)
//!     14    4 fps_milli (u32), fps * 1000 rounded
//!     18    8 cal_slope (f64)
//!     26    8 cal_offset (f64)
//!     34      frames: timestamp_micros (u64) + width*height u16 counts
//! ```

use thiserror::Error;

use crate::thermal::{
    first_non_monotonic, Calibration, RadiometricClip, RadiometricFrame, ThermalError,
};

pub const MAGIC: [u8; 4] = *b"THRM";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 34;
pub const EXTENSION: &str = "thrm";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("bad magic {0:02x?}, expected \"THRM\"")]
    BadMagic([u8; 4]),
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated payload: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("dimension overflow: {width}x{height} x {frames} frames does not fit in memory")]
    DimensionOverflow {
        width: usize,
        height: usize,
        frames: usize,
    },
    #[error("timestamps not strictly increasing at frame {0}")]
    NonMonotonicTimestamps(usize),
    #[error("{0} trailing bytes after the last frame")]
    TrailingBytes(usize),
    #[error("invalid header: {0}")]
    InvalidHeader(ThermalError),
}

/// Header fields as they sit on disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub version: u16,
    pub width: u16,
    pub height: u16,
    pub frame_count: u32,
    pub fps_milli: u32,
    pub cal_slope: f64,
    pub cal_offset: f64,
}

impl Header {
    pub fn frame_len(&self) -> usize {
        8 + 2 * usize::from(self.width) * usize::from(self.height)
    }
}

pub fn encode_clip(clip: &RadiometricClip) -> Vec<u8> {
    let frame_len = 8 + 2 * clip.width() * clip.height();
    let mut out = Vec::with_capacity(HEADER_LEN + frame_len * clip.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    // dimensions are bounded to u16 by the clip constructor
    out.extend_from_slice(&(clip.width() as u16).to_le_bytes());
    out.extend_from_slice(&(clip.height() as u16).to_le_bytes());
    let count = u32::try_from(clip.len()).expect("frame count exceeds u32");
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&clip.fps_milli().to_le_bytes());
    out.extend_from_slice(&clip.calibration().slope().to_le_bytes());
    out.extend_from_slice(&clip.calibration().offset().to_le_bytes());
    for f in clip.frames() {
        out.extend_from_slice(&f.timestamp_us().to_le_bytes());
        for c in f.counts() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    out
}

/// Parses only the fixed-size header.
pub fn decode_header(bytes: &[u8]) -> Result<Header, CodecError> {
    if bytes.len() >= 4 && bytes[..4] != MAGIC {
        return Err(CodecError::BadMagic(bytes[..4].try_into().unwrap()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(CodecError::Truncated {
            needed: HEADER_LEN,
            available: bytes.len(),
        });
    }
    let mut r = Reader::new(&bytes[4..]);
    let version = r.u16();
    if version != VERSION {
        return Err(CodecError::UnsupportedVersion(version));
    }
    Ok(Header {
        version,
        width: r.u16(),
        height: r.u16(),
        frame_count: r.u32(),
        fps_milli: r.u32(),
        cal_slope: r.f64(),
        cal_offset: r.f64(),
    })
}

pub fn decode_clip(bytes: &[u8]) -> Result<RadiometricClip, CodecError> {
    let header = decode_header(bytes)?;
    let width = usize::from(header.width);
    let height = usize::from(header.height);
    let frames = header.frame_count as usize;
    let overflow = CodecError::DimensionOverflow {
        width,
        height,
        frames,
    };
    let payload = header
        .frame_len()
        .checked_mul(frames)
        .and_then(|p| p.checked_add(HEADER_LEN))
        .ok_or(overflow.clone())?;
    if payload > isize::MAX as usize {
        return Err(overflow);
    }
    if bytes.len() < payload {
        return Err(CodecError::Truncated {
            needed: payload,
            available: bytes.len(),
        });
    }
    if bytes.len() > payload {
        return Err(CodecError::TrailingBytes(bytes.len() - payload));
    }
    let calibration =
        Calibration::new(header.cal_slope, header.cal_offset).map_err(CodecError::InvalidHeader)?;

    let body = &bytes[HEADER_LEN..];
    let stamps = body
        .chunks_exact(header.frame_len())
        .map(|chunk| u64::from_le_bytes(chunk[..8].try_into().unwrap()));
    if let Some(i) = first_non_monotonic(stamps) {
        return Err(CodecError::NonMonotonicTimestamps(i));
    }

    let mut out = Vec::with_capacity(frames);
    for chunk in body.chunks_exact(header.frame_len()) {
        let mut r = Reader::new(chunk);
        let ts = r.u64();
        let counts = (0..width * height).map(|_| r.u16()).collect();
        out.push(RadiometricFrame::new(width, height, counts, ts).map_err(CodecError::InvalidHeader)?);
    }
    RadiometricClip::from_parts(width, height, header.fps_milli, calibration, out)
        .map_err(CodecError::InvalidHeader)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take<const N: usize>(&mut self) -> [u8; N] {
        let b = self.buf[self.pos..self.pos + N].try_into().unwrap();
        self.pos += N;
        b
    }

    fn u16(&mut self) -> u16 {
        u16::from_le_bytes(self.take())
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }

    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take())
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RadiometricClip {
        let f = RadiometricFrame::new(1, 1, vec![0xBEEF], 7).unwrap();
        RadiometricClip::new(1, 1, 8.7, Calibration::default(), vec![f]).unwrap()
    }

    #[test]
    fn one_by_one_clip_size() {
        // 34-byte header + 8-byte timestamp + one u16 count
        let bytes = encode_clip(&tiny());
        assert_eq!(bytes.len(), 44);
        assert_eq!(&bytes[..4], b"THRM");
        assert_eq!(&bytes[14..18], &8700u32.to_le_bytes());
        assert_eq!(&bytes[34..42], &7u64.to_le_bytes());
        assert_eq!(&bytes[42..], &[0xEF, 0xBE]);
    }

    #[test]
    fn round_trip_tiny() {
        let c = tiny();
        assert_eq!(decode_clip(&encode_clip(&c)).unwrap(), c);
    }

    #[test]
    fn bad_magic() {
        let mut b = encode_clip(&tiny());
        b[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_clip(&b), Err(CodecError::BadMagic(_))));
    }

    #[test]
    fn unsupported_version() {
        let mut b = encode_clip(&tiny());
        b[4] = 2;
        assert_eq!(decode_clip(&b), Err(CodecError::UnsupportedVersion(2)));
    }

    #[test]
    fn truncated() {
        let b = encode_clip(&tiny());
        assert!(matches!(
            decode_clip(&b[..b.len() - 1]),
            Err(CodecError::Truncated { needed: 44, available: 43 })
        ));
        assert!(matches!(
            decode_clip(&b[..10]),
            Err(CodecError::Truncated { .. })
        ));
    }

    #[test]
    fn non_monotonic() {
        let frames = vec![
            RadiometricFrame::new(1, 1, vec![1], 0).unwrap(),
            RadiometricFrame::new(1, 1, vec![1], 10).unwrap(),
        ];
        let c = RadiometricClip::new(1, 1, 1.0, Calibration::default(), frames).unwrap();
        let mut b = encode_clip(&c);
        b[44..52].copy_from_slice(&0u64.to_le_bytes());
        assert_eq!(decode_clip(&b), Err(CodecError::NonMonotonicTimestamps(1)));
    }

    #[test]
    fn empty_clip_round_trips() {
        let c = RadiometricClip::new(160, 120, 8.7, Calibration::default(), vec![]).unwrap();
        let b = encode_clip(&c);
        assert_eq!(b.len(), HEADER_LEN);
        assert_eq!(decode_clip(&b).unwrap(), c);
    }
}
