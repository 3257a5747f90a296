//! Cipherimages and the residual "impression" they leave.
//!
//! The raster bytes are encrypted as one plaintext stream; the header is
//! kept so the result is still a viewable image. Chunks that collide show
//! through as unchanged pixel runs.

mod benchmark;
mod pnm;

use std::fmt::Write as _;

pub use benchmark::{benchmark_image, BENCHMARK_SIDE};
pub use pnm::{encode_pnm, parse_pnm, read_pnm, write_pnm};

use crate::analysis::{fmt_log, REPORT_COLUMNS};
use crate::cipher::{Cipher, CiphertextContainer};
use crate::error::{QppError, Result};
use crate::exec::Exec;
use crate::key::PadKey;
use crate::keystream::Seed;
use crate::permutation::ShuffleMode;

/// Dimensions used for the reference panel.
pub const FIGURE_DIMS: [usize; 5] = [64, 256, 1024, 2048, 8192];
/// Pad size used for the reference panel.
pub const FIGURE_PAD_SIZE: usize = 256;
/// Collision fraction below which an impression counts as negligible.
pub const NEGLIGIBLE_COLLISION_FRACTION: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(QppError::UnsupportedFormat(format!("{channels} channels")));
        }
        if pixels.len() != width * height * channels {
            return Err(QppError::DimensionMismatch {
                expected: width * height * channels,
                actual: pixels.len(),
            });
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    fn same_shape(&self, other: &RasterImage) -> bool {
        (self.width, self.height, self.channels) == (other.width, other.height, other.channels)
    }
}

/// A cipherimage plus the ciphertext bits of the last chunk that fall past
/// the end of the raster. The displayable image alone cannot be decrypted
/// when the raster is not a whole number of chunks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedImage {
    pub image: RasterImage,
    pub overflow: Vec<u8>,
}

pub fn encrypt_image(img: &RasterImage, key: &PadKey) -> EncryptedImage {
    encrypt_image_with(img, &Cipher::new(*key))
}

pub fn encrypt_image_with(img: &RasterImage, cipher: &Cipher) -> EncryptedImage {
    let mut body = cipher.encrypt(&img.pixels).body;
    let overflow = body.split_off(img.pixels.len());
    EncryptedImage {
        image: RasterImage {
            pixels: body,
            ..img.clone()
        },
        overflow,
    }
}

pub fn decrypt_image(enc: &EncryptedImage, key: &PadKey) -> Result<RasterImage> {
    let mut body = enc.image.pixels.clone();
    body.extend_from_slice(&enc.overflow);
    let container = CiphertextContainer {
        n: key.n() as u32,
        m: key.m() as u32,
        bit_len: enc.image.pixels.len() as u64 * 8,
        fingerprint: key.fingerprint(),
        body,
    };
    let pixels = Cipher::new(*key).decrypt(&container)?;
    Ok(RasterImage {
        pixels,
        ..enc.image.clone()
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImpressionMetrics {
    pub n: usize,
    pub m: usize,
    pub chunks: usize,
    /// Chunks whose visible cipher bytes equal the plaintext bytes.
    pub chunk_collision_fraction: f64,
    /// Chunks of the original that are all zeros or all ones.
    pub uniform_chunk_fraction: f64,
    pub pixel_equality_fraction: f64,
}

/// Compares a cipherimage with its original over `n`-bit chunks of the
/// raster. The final partial chunk counts as uniform only when it is zero,
/// matching the zero padding applied before encryption.
pub fn impression_metrics(
    original: &RasterImage,
    cipher: &RasterImage,
    n: usize,
    m: usize,
) -> Result<ImpressionMetrics> {
    if !original.same_shape(cipher) {
        return Err(QppError::DimensionMismatch {
            expected: original.pixels.len(),
            actual: cipher.pixels.len(),
        });
    }
    if n == 0 || !n.is_multiple_of(8) {
        return Err(QppError::InvalidParameter(format!(
            "chunk size must be a positive multiple of 8, got {n}"
        )));
    }
    let chunk = n / 8;
    let mut collisions = 0usize;
    let mut uniform = 0usize;
    let mut chunks = 0usize;
    for (p, c) in original
        .pixels
        .chunks(chunk)
        .zip(cipher.pixels.chunks(chunk))
    {
        chunks += 1;
        if p == c {
            collisions += 1;
        }
        let all_zero = p.iter().all(|&b| b == 0);
        let all_one = p.len() == chunk && p.iter().all(|&b| b == 0xFF);
        if all_zero || all_one {
            uniform += 1;
        }
    }
    let equal_pixels = original
        .pixels
        .iter()
        .zip(&cipher.pixels)
        .filter(|(a, b)| a == b)
        .count();
    let frac = |k: usize, total: usize| {
        if total == 0 {
            1.0
        } else {
            k as f64 / total as f64
        }
    };
    Ok(ImpressionMetrics {
        n,
        m,
        chunks,
        chunk_collision_fraction: frac(collisions, chunks),
        uniform_chunk_fraction: frac(uniform, chunks),
        pixel_equality_fraction: frac(equal_pixels, original.pixels.len()),
    })
}

impl ImpressionMetrics {
    /// A row in the analysis report schema followed by the three image
    /// metrics. `observed_rate` is the chunk collision fraction over
    /// `trials` = number of chunks.
    pub fn csv_row(&self) -> String {
        let f = self.chunk_collision_fraction;
        let stderr = (f * (1.0 - f) / self.chunks.max(1) as f64).sqrt();
        let approx = -(self.m as f64) * (self.n as f64).log10();
        format!(
            "{},,{},,{},{:.9},{},{:.9},{:.9},{:.9},{:.9}",
            self.n,
            self.m,
            fmt_log(approx),
            f,
            self.chunks,
            stderr,
            self.chunk_collision_fraction,
            self.uniform_chunk_fraction,
            self.pixel_equality_fraction
        )
    }
}

pub fn metrics_csv_header() -> String {
    let mut cols: Vec<&str> = REPORT_COLUMNS.to_vec();
    cols.extend([
        "chunk_collision_fraction",
        "uniform_chunk_fraction",
        "pixel_equality_fraction",
    ]);
    cols.join(",")
}

#[derive(Clone, Debug)]
pub struct PanelEntry {
    pub key: PadKey,
    pub cipher: EncryptedImage,
    pub metrics: ImpressionMetrics,
}

#[derive(Clone, Debug)]
pub struct Panel {
    pub entries: Vec<PanelEntry>,
}

impl Panel {
    pub fn metrics_csv(&self) -> String {
        let mut s = metrics_csv_header();
        s.push('\n');
        for e in &self.entries {
            let _ = writeln!(s, "{}", e.metrics.csv_row());
        }
        s
    }
}

/// Encrypts `img` once per dimension with an unbiased pad of `m`
/// permutations keyed by `seed`.
pub fn figure1_panel(img: &RasterImage, dims: &[usize], m: usize, seed: &Seed) -> Result<Panel> {
    figure1_panel_with(img, dims, m, seed, Exec::default())
}

pub fn figure1_panel_with(
    img: &RasterImage,
    dims: &[usize],
    m: usize,
    seed: &Seed,
    exec: Exec,
) -> Result<Panel> {
    if dims.is_empty() {
        return Err(QppError::InvalidParameter("no dimensions requested".into()));
    }
    let keys = dims
        .iter()
        .map(|&n| PadKey::new(*seed, n, m, ShuffleMode::UnbiasedMode))
        .collect::<Result<Vec<_>>>()?;
    let entries = exec.map_range(keys.len(), |i| -> Result<PanelEntry> {
        let key = keys[i];
        let cipher = encrypt_image_with(img, &Cipher::new(key).with_exec(exec));
        let metrics = impression_metrics(img, &cipher.image, key.n(), m)?;
        Ok(PanelEntry {
            key,
            cipher,
            metrics,
        })
    });
    Ok(Panel {
        entries: entries.into_iter().collect::<Result<_>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::Pad;
    use crate::permutation::Permutation;

    fn key(n: usize, m: usize) -> PadKey {
        PadKey::new(Seed::from_u64(11), n, m, ShuffleMode::UnbiasedMode).unwrap()
    }

    fn noise_image(w: usize, h: usize) -> RasterImage {
        let pixels = (0..w * h).map(|i| (i * 7919 % 251) as u8).collect();
        RasterImage::new(w, h, 1, pixels).unwrap()
    }

    #[test]
    fn black_image_is_unchanged() {
        let img = RasterImage::new(16, 16, 1, vec![0; 256]).unwrap();
        let enc = encrypt_image(&img, &key(64, 256));
        assert_eq!(enc.image, img);
        let m = impression_metrics(&img, &enc.image, 64, 256).unwrap();
        assert_eq!(m.chunk_collision_fraction, 1.0);
        assert_eq!(m.uniform_chunk_fraction, 1.0);
    }

    #[test]
    fn roundtrip_with_partial_final_chunk() {
        let img = noise_image(13, 7);
        let k = key(64, 16);
        let enc = encrypt_image(&img, &k);
        assert_eq!(enc.image.pixels().len(), 91);
        assert_eq!(enc.overflow.len(), 5);
        assert_eq!(decrypt_image(&enc, &k).unwrap(), img);
    }

    #[test]
    fn identity_pad_gives_full_impression() {
        let img = noise_image(8, 8);
        let k = key(64, 1);
        let pad = Pad::from_permutations(vec![Permutation::identity(64)]).unwrap();
        let enc = encrypt_image_with(&img, &Cipher::with_pad(k, pad).unwrap());
        let m = impression_metrics(&img, &enc.image, 64, 1).unwrap();
        assert_eq!(m.chunk_collision_fraction, 1.0);
        assert_eq!(m.pixel_equality_fraction, 1.0);
    }

    #[test]
    fn metrics_reject_shape_mismatch() {
        let a = noise_image(4, 4);
        let b = noise_image(4, 5);
        assert!(impression_metrics(&a, &b, 64, 1).is_err());
        assert!(impression_metrics(&a, &a, 12, 1).is_err());
    }

    #[test]
    fn single_dimension_panel() {
        let img = noise_image(64, 64);
        let panel = figure1_panel(&img, &[64], 256, &Seed::from_u64(1)).unwrap();
        assert_eq!(panel.entries.len(), 1);
        let csv = panel.metrics_csv();
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 11);
        assert!(figure1_panel(&img, &[60], 256, &Seed::from_u64(1)).is_err());
    }
}
