//! Key schedule: a compact `(seed, n, m, mode)` key expanded into a pad of
//! `m` permutations and a random-access per-chunk index stream.

use std::io::{Read, Write};

use crc::{Crc, CRC_32_ISO_HDLC, CRC_64_XZ};

use crate::error::{QppError, Result};
use crate::exec::Exec;
use crate::keystream::{Keystream, Seed, DOMAIN_INDEX, DOMAIN_PERMUTATION};
use crate::permutation::{Permutation, ShuffleMode};

pub const KEY_MAGIC: &[u8; 4] = b"QPPK";
pub const KEY_VERSION: u8 = 0x01;
/// magic + version + mode + n + m + seed + crc32
pub const KEY_FILE_LEN: usize = 4 + 1 + 1 + 4 + 4 + 16 + 4;

const CRC32: Crc<u32> = Crc::<u32>::new(&CRC_32_ISO_HDLC);
const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PadKey {
    seed: Seed,
    n: usize,
    m: usize,
    mode: ShuffleMode,
}

impl PadKey {
    pub fn new(seed: Seed, n: usize, m: usize, mode: ShuffleMode) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(8) {
            return Err(QppError::InvalidParameter(format!(
                "dimension n must be a positive multiple of 8, got {n}"
            )));
        }
        if n > u32::MAX as usize {
            return Err(QppError::InvalidParameter(format!(
                "dimension n={n} too large"
            )));
        }
        if m == 0 || m > u32::MAX as usize {
            return Err(QppError::InvalidParameter(format!(
                "pad size m must be in 1..=2^32-1, got {m}"
            )));
        }
        Ok(PadKey { seed, n, m, mode })
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mode(&self) -> ShuffleMode {
        self.mode
    }

    /// Bytes per chunk.
    pub fn chunk_bytes(&self) -> usize {
        self.n / 8
    }

    /// CRC-64/XZ of the seed, big-endian. Stored in ciphertext headers so a
    /// wrong key is reported instead of silently producing garbage.
    pub fn fingerprint(&self) -> [u8; 8] {
        CRC64.checksum(&self.seed.0).to_be_bytes()
    }

    /// Pad index used for chunk `chunk_index`. Each chunk reads its own
    /// counter-addressed stream, so lookups are order independent.
    pub fn index_for_chunk(&self, chunk_index: u64) -> usize {
        Keystream::new(&self.seed, DOMAIN_INDEX, chunk_index).below(self.m as u64) as usize
    }

    /// Permutation `j` of the pad. Depends only on `(seed, n, mode, j)`, so
    /// growing `m` leaves existing entries unchanged.
    pub fn permutation(&self, j: usize) -> Permutation {
        let mut stream = Keystream::new(&self.seed, DOMAIN_PERMUTATION, j as u64);
        Permutation::generate(self.n, self.mode, &mut stream)
    }

    pub fn derive_pad(&self) -> Pad {
        self.derive_pad_with(Exec::default())
    }

    pub fn derive_pad_with(&self, exec: Exec) -> Pad {
        let pairs = exec.map_range(self.m, |j| {
            let p = self.permutation(j);
            let inv = p.invert();
            (p, inv)
        });
        let (perms, inverse_perms) = pairs.into_iter().unzip();
        Pad {
            perms,
            inverse_perms,
        }
    }

    pub fn to_bytes(&self) -> [u8; KEY_FILE_LEN] {
        let mut out = [0u8; KEY_FILE_LEN];
        out[..4].copy_from_slice(KEY_MAGIC);
        out[4] = KEY_VERSION;
        out[5] = mode_byte(self.mode);
        out[6..10].copy_from_slice(&(self.n as u32).to_be_bytes());
        out[10..14].copy_from_slice(&(self.m as u32).to_be_bytes());
        out[14..30].copy_from_slice(&self.seed.0);
        let crc = CRC32.checksum(&out[..30]);
        out[30..].copy_from_slice(&crc.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || &bytes[..4] != KEY_MAGIC {
            return Err(QppError::UnsupportedFormat("not a QPPK key file".into()));
        }
        if bytes.len() != KEY_FILE_LEN {
            return Err(QppError::Corrupt(format!(
                "key file is {} bytes, expected {KEY_FILE_LEN}",
                bytes.len()
            )));
        }
        if bytes[4] != KEY_VERSION {
            return Err(QppError::UnsupportedFormat(format!(
                "key file version {:#04x}",
                bytes[4]
            )));
        }
        let stored = u32::from_be_bytes(bytes[30..34].try_into().unwrap());
        if CRC32.checksum(&bytes[..30]) != stored {
            return Err(QppError::Corrupt("key file checksum mismatch".into()));
        }
        let mode = match bytes[5] {
            0x00 => ShuffleMode::PaperMode,
            0x01 => ShuffleMode::UnbiasedMode,
            other => {
                return Err(QppError::Corrupt(format!(
                    "unknown shuffle mode {other:#04x}"
                )))
            }
        };
        let n = u32::from_be_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let m = u32::from_be_bytes(bytes[10..14].try_into().unwrap()) as usize;
        let mut seed = [0u8; 16];
        seed.copy_from_slice(&bytes[14..30]);
        PadKey::new(Seed(seed), n, m, mode).map_err(|e| QppError::Corrupt(e.to_string()))
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut buf = Vec::with_capacity(KEY_FILE_LEN);
        r.take(KEY_FILE_LEN as u64 + 1).read_to_end(&mut buf)?;
        PadKey::from_bytes(&buf)
    }
}

fn mode_byte(mode: ShuffleMode) -> u8 {
    match mode {
        ShuffleMode::PaperMode => 0x00,
        ShuffleMode::UnbiasedMode => 0x01,
    }
}

/// Generates a key with a fresh seed from the OS entropy source.
pub fn keygen(n: usize, m: usize, mode: ShuffleMode) -> Result<PadKey> {
    keygen_from(n, m, mode, |buf| {
        getrandom::fill(buf).map_err(|e| QppError::Entropy(e.to_string()))
    })
}

/// Generates a key drawing the seed from `entropy`.
pub fn keygen_from<F>(n: usize, m: usize, mode: ShuffleMode, entropy: F) -> Result<PadKey>
where
    F: FnOnce(&mut [u8]) -> Result<()>,
{
    // Validate before touching the entropy source.
    PadKey::new(Seed::default(), n, m, mode)?;
    let mut seed = [0u8; 16];
    entropy(&mut seed)?;
    PadKey::new(Seed(seed), n, m, mode)
}

/// The expanded pad: `m` permutations and their inverses.
#[derive(Clone, Debug)]
pub struct Pad {
    perms: Vec<Permutation>,
    inverse_perms: Vec<Permutation>,
}

impl Pad {
    /// Builds a pad from explicit permutations, all of one dimension.
    pub fn from_permutations(perms: Vec<Permutation>) -> Result<Self> {
        let n = perms.first().map(Permutation::n).ok_or_else(|| {
            QppError::InvalidParameter("pad must hold at least one permutation".into())
        })?;
        if let Some(bad) = perms.iter().find(|p| p.n() != n) {
            return Err(QppError::DimensionMismatch {
                expected: n,
                actual: bad.n(),
            });
        }
        let inverse_perms = perms.iter().map(Permutation::invert).collect();
        Ok(Pad {
            perms,
            inverse_perms,
        })
    }

    pub fn len(&self) -> usize {
        self.perms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perms.is_empty()
    }

    pub fn n(&self) -> usize {
        self.perms[0].n()
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn inverse_perms(&self) -> &[Permutation] {
        &self.inverse_perms
    }
}
