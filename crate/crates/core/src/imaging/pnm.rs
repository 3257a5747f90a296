//! Binary PGM (P5) and PPM (P6) with maxval 255.

use std::io::{Read, Write};

use super::RasterImage;
use crate::error::{QppError, Result};

pub fn read_pnm<R: Read>(mut r: R) -> Result<RasterImage> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    parse_pnm(&data)
}

pub fn parse_pnm(data: &[u8]) -> Result<RasterImage> {
    let channels = match data.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        Some([b'P', d]) if d.is_ascii_digit() => {
            return Err(QppError::UnsupportedFormat(format!(
                "netpbm P{} is not supported; use binary P5 or P6",
                *d as char
            )))
        }
        _ => {
            return Err(QppError::UnsupportedFormat(
                "not a binary PGM/PPM file".into(),
            ))
        }
    };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        *field = next_header_token(data, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(QppError::UnsupportedFormat(format!(
            "maxval {maxval} is not supported; only 255"
        )));
    }
    if width == 0 || height == 0 {
        return Err(QppError::Corrupt(format!("empty image {width}x{height}")));
    }
    // Exactly one whitespace byte separates maxval from the raster.
    match data.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(QppError::Corrupt("missing separator after header".into())),
    }
    let len = width
        .checked_mul(height)
        .and_then(|v| v.checked_mul(channels))
        .ok_or_else(|| QppError::Corrupt("image dimensions overflow".into()))?;
    let raster = data
        .get(pos..pos + len)
        .ok_or_else(|| {
            QppError::Corrupt(format!(
                "raster truncated: expected {len} bytes, found {}",
                data.len().saturating_sub(pos)
            ))
        })?
        .to_vec();
    RasterImage::new(width, height, channels, raster)
}

fn next_header_token(data: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match data.get(*pos) {
            Some(b'#') => {
                while let Some(&b) = data.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(QppError::Corrupt("header ends early".into())),
        }
    }
    let start = *pos;
    while data.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos {
        return Err(QppError::Corrupt(format!(
            "expected a number at byte {start}"
        )));
    }
    std::str::from_utf8(&data[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| QppError::Corrupt("header number out of range".into()))
}

/// Writes `P5`/`P6`, then `width height`, then `255`, each followed by a
/// single newline, then the raster.
pub fn write_pnm<W: Write>(img: &RasterImage, mut w: W) -> Result<()> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    write!(w, "{magic}\n{} {}\n255\n", img.width(), img.height())?;
    w.write_all(img.pixels())?;
    Ok(())
}

pub fn encode_pnm(img: &RasterImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.pixels().len() + 20);
    write_pnm(img, &mut out).expect("writing to a Vec cannot fail");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_p5() {
        let img = parse_pnm(b"P5\n2 2\n255\n\x00\xff\xff\x00").unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (2, 2, 1));
        assert_eq!(img.pixels(), &[0, 255, 255, 0]);
    }

    #[test]
    fn parses_p6_with_comment() {
        let img = parse_pnm(b"P6\n# made by hand\n1 1\n255\n\x01\x02\x03").unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.pixels(), &[1, 2, 3]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            parse_pnm(b"P2\n2 2\n255\n0 1 2 3\n"),
            Err(QppError::UnsupportedFormat(_))
        ));
        assert!(matches!(
            parse_pnm(b"P5\n2 2\n65535\n"),
            Err(QppError::UnsupportedFormat(_))
        ));
        assert!(matches!(
            parse_pnm(b"P5\n2 2\n255\n\x00"),
            Err(QppError::Corrupt(_))
        ));
        assert!(matches!(parse_pnm(b"P5\n2"), Err(QppError::Corrupt(_))));
        assert!(matches!(
            parse_pnm(b"GIF89a"),
            Err(QppError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn writer_is_bit_exact() {
        let img = RasterImage::new(2, 1, 1, vec![7, 9]).unwrap();
        assert_eq!(encode_pnm(&img), b"P5\n2 1\n255\n\x07\x09");
        assert_eq!(parse_pnm(&encode_pnm(&img)).unwrap(), img);
    }
}
