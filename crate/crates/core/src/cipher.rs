//! Chunked QPP encryption of byte streams and the `QPPC` container.
//!
//! The plaintext is zero-padded to a whole number of `n`-bit chunks. Chunk
//! `i` is gathered through `pad[index_for_chunk(i)]`; decryption gathers
//! through the inverse. There is no chaining: chunks are independent, which
//! is exactly what exposes equal plaintext and ciphertext chunks.
//!
//! Container layout (all integers big-endian):
//!
//! ```text
//! "QPPC" | 0x01 | n: u32 | m: u32 | bit_len: u64 | fingerprint: [u8; 8] | body
//! ```

use std::io::{Read, Write};

use crate::error::{QppError, Result};
use crate::exec::Exec;
use crate::key::{Pad, PadKey};

pub const CONTAINER_MAGIC: &[u8; 4] = b"QPPC";
pub const CONTAINER_VERSION: u8 = 0x01;
pub const CONTAINER_HEADER_LEN: usize = 4 + 1 + 4 + 4 + 8 + 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CiphertextContainer {
    pub n: u32,
    pub m: u32,
    pub bit_len: u64,
    pub fingerprint: [u8; 8],
    pub body: Vec<u8>,
}

/// Body length in bytes for `bit_len` plaintext bits at dimension `n`.
pub fn padded_len(bit_len: u64, n: usize) -> usize {
    let chunks = bit_len.div_ceil(n as u64) as usize;
    chunks * (n / 8)
}

impl CiphertextContainer {
    pub fn header_bytes(&self) -> [u8; CONTAINER_HEADER_LEN] {
        let mut h = [0u8; CONTAINER_HEADER_LEN];
        h[..4].copy_from_slice(CONTAINER_MAGIC);
        h[4] = CONTAINER_VERSION;
        h[5..9].copy_from_slice(&self.n.to_be_bytes());
        h[9..13].copy_from_slice(&self.m.to_be_bytes());
        h[13..21].copy_from_slice(&self.bit_len.to_be_bytes());
        h[21..29].copy_from_slice(&self.fingerprint);
        h
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(CONTAINER_HEADER_LEN + self.body.len());
        out.extend_from_slice(&self.header_bytes());
        out.extend_from_slice(&self.body);
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.header_bytes())?;
        w.write_all(&self.body)?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; CONTAINER_HEADER_LEN];
        let mut filled = 0;
        while filled < header.len() {
            let got = r.read(&mut header[filled..])?;
            if got == 0 {
                break;
            }
            filled += got;
        }
        if filled < 4 || &header[..4] != CONTAINER_MAGIC {
            return Err(QppError::UnsupportedFormat("not a QPPC container".into()));
        }
        if filled < CONTAINER_HEADER_LEN {
            return Err(QppError::Corrupt("truncated container header".into()));
        }
        if header[4] != CONTAINER_VERSION {
            return Err(QppError::UnsupportedFormat(format!(
                "container version {:#04x}",
                header[4]
            )));
        }
        let n = u32::from_be_bytes(header[5..9].try_into().unwrap());
        let m = u32::from_be_bytes(header[9..13].try_into().unwrap());
        let bit_len = u64::from_be_bytes(header[13..21].try_into().unwrap());
        let mut fingerprint = [0u8; 8];
        fingerprint.copy_from_slice(&header[21..29]);
        if n == 0 || n % 8 != 0 || m == 0 {
            return Err(QppError::Corrupt(format!(
                "invalid header dimensions n={n}, m={m}"
            )));
        }
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        Ok(CiphertextContainer {
            n,
            m,
            bit_len,
            fingerprint,
            body,
        })
    }
}

/// A key together with its expanded pad.
#[derive(Clone, Debug)]
pub struct Cipher {
    key: PadKey,
    pad: Pad,
    exec: Exec,
}

impl Cipher {
    pub fn new(key: PadKey) -> Self {
        let pad = key.derive_pad();
        Cipher {
            key,
            pad,
            exec: Exec::default(),
        }
    }

    /// Uses an explicit pad in place of the derived one. The index stream
    /// still comes from `key`.
    pub fn with_pad(key: PadKey, pad: Pad) -> Result<Self> {
        if pad.n() != key.n() {
            return Err(QppError::DimensionMismatch {
                expected: key.n(),
                actual: pad.n(),
            });
        }
        if pad.len() != key.m() {
            return Err(QppError::InvalidParameter(format!(
                "pad holds {} permutations but key expects m={}",
                pad.len(),
                key.m()
            )));
        }
        Ok(Cipher {
            key,
            pad,
            exec: Exec::default(),
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn key(&self) -> &PadKey {
        &self.key
    }

    pub fn pad(&self) -> &Pad {
        &self.pad
    }

    pub fn encrypt(&self, plaintext: &[u8]) -> CiphertextContainer {
        let bit_len = plaintext.len() as u64 * 8;
        let chunk = self.key.chunk_bytes();
        let mut padded = plaintext.to_vec();
        padded.resize(padded_len(bit_len, self.key.n()), 0);
        let mut body = vec![0u8; padded.len()];
        self.exec
            .zip_chunks(&padded, &mut body, chunk, |i, src, dst| {
                let idx = self.key.index_for_chunk(i as u64);
                self.pad.perms()[idx].apply_packed(src, dst);
            });
        CiphertextContainer {
            n: self.key.n() as u32,
            m: self.key.m() as u32,
            bit_len,
            fingerprint: self.key.fingerprint(),
            body,
        }
    }

    pub fn decrypt(&self, container: &CiphertextContainer) -> Result<Vec<u8>> {
        self.check_header(container)?;
        let expected = padded_len(container.bit_len, self.key.n());
        if container.body.len() != expected {
            return Err(QppError::Corrupt(format!(
                "body holds {} bytes, header implies {expected}",
                container.body.len()
            )));
        }
        let mut plain = vec![0u8; expected];
        self.exec.zip_chunks(
            &container.body,
            &mut plain,
            self.key.chunk_bytes(),
            |i, src, dst| {
                let idx = self.key.index_for_chunk(i as u64);
                self.pad.inverse_perms()[idx].apply_packed(src, dst);
            },
        );
        plain.truncate(container.bit_len.div_ceil(8) as usize);
        if !container.bit_len.is_multiple_of(8) {
            let keep = 0xFFu8 << (8 - container.bit_len % 8);
            *plain.last_mut().unwrap() &= keep;
        }
        Ok(plain)
    }

    fn check_header(&self, c: &CiphertextContainer) -> Result<()> {
        if c.n as usize != self.key.n() || c.m as usize != self.key.m() {
            return Err(QppError::KeyMismatch(format!(
                "container uses n={}, m={}; key has n={}, m={}",
                c.n,
                c.m,
                self.key.n(),
                self.key.m()
            )));
        }
        if c.fingerprint != self.key.fingerprint() {
            return Err(QppError::KeyMismatch("seed fingerprint differs".into()));
        }
        Ok(())
    }
}

pub fn encrypt(plaintext: &[u8], key: &PadKey) -> CiphertextContainer {
    Cipher::new(*key).encrypt(plaintext)
}

pub fn decrypt(container: &CiphertextContainer, key: &PadKey) -> Result<Vec<u8>> {
    Cipher::new(*key).decrypt(container)
}

/// Indices of chunks whose ciphertext equals the (zero-padded) plaintext.
pub fn collision_positions(plaintext: &[u8], container: &CiphertextContainer) -> Result<Vec<u64>> {
    let n = container.n as usize;
    let bit_len = plaintext.len() as u64 * 8;
    let expected = padded_len(bit_len, n);
    if bit_len != container.bit_len || container.body.len() != expected {
        return Err(QppError::DimensionMismatch {
            expected,
            actual: container.body.len(),
        });
    }
    let chunk = n / 8;
    let mut padded = plaintext.to_vec();
    padded.resize(expected, 0);
    Ok(padded
        .chunks(chunk)
        .zip(container.body.chunks(chunk))
        .enumerate()
        .filter(|(_, (p, c))| p == c)
        .map(|(i, _)| i as u64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keystream::Seed;
    use crate::permutation::{Permutation, ShuffleMode};

    fn key(n: usize, m: usize, seed: u64) -> PadKey {
        PadKey::new(Seed::from_u64(seed), n, m, ShuffleMode::UnbiasedMode).unwrap()
    }

    #[test]
    fn empty_plaintext() {
        let k = key(64, 4, 1);
        let c = encrypt(&[], &k);
        assert_eq!(c.bit_len, 0);
        assert!(c.body.is_empty());
        assert!(decrypt(&c, &k).unwrap().is_empty());
    }

    #[test]
    fn zero_plaintext_stays_zero() {
        let k = key(64, 16, 2);
        let c = encrypt(&[0u8; 100], &k);
        assert_eq!(c.body.len(), 104);
        assert!(c.body.iter().all(|&b| b == 0));
        assert_eq!(
            collision_positions(&[0u8; 100], &c).unwrap(),
            (0..13).collect::<Vec<_>>()
        );
    }

    #[test]
    fn forced_transposition_pad() {
        let k = key(8, 1, 3);
        let swap = Permutation::from_one_based(&[2, 1, 3, 4, 5, 6, 7, 8]).unwrap();
        let cipher = Cipher::with_pad(k, Pad::from_permutations(vec![swap]).unwrap()).unwrap();
        let c = cipher.encrypt(&[0b1000_0000]);
        assert_eq!(c.body, vec![0b0100_0000]);
        assert_eq!(cipher.decrypt(&c).unwrap(), vec![0b1000_0000]);
        assert!(collision_positions(&[0b1000_0000], &c).unwrap().is_empty());
    }

    #[test]
    fn header_mismatch_is_reported() {
        let k = key(64, 16, 4);
        let c = encrypt(b"hello world", &k);
        assert!(matches!(
            decrypt(&c, &key(64, 16, 5)),
            Err(QppError::KeyMismatch(_))
        ));
        assert!(matches!(
            decrypt(&c, &key(64, 8, 4)),
            Err(QppError::KeyMismatch(_))
        ));
        let mut short = c.clone();
        short.body.pop();
        assert!(matches!(decrypt(&short, &k), Err(QppError::Corrupt(_))));
    }

    #[test]
    fn container_bytes_roundtrip() {
        let k = key(16, 2, 6);
        let c = encrypt(b"abc", &k);
        let bytes = c.to_bytes();
        assert_eq!(&bytes[..4], b"QPPC");
        assert_eq!(bytes.len(), CONTAINER_HEADER_LEN + 4);
        assert_eq!(CiphertextContainer::from_bytes(&bytes).unwrap(), c);
        assert!(matches!(
            CiphertextContainer::from_bytes(&bytes[..10]),
            Err(QppError::Corrupt(_))
        ));
        assert!(matches!(
            CiphertextContainer::from_bytes(b"nope"),
            Err(QppError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let k = key(256, 32, 7);
        let data: Vec<u8> = (0..10_000u32).map(|i| (i * 31 % 251) as u8).collect();
        let seq = Cipher::new(k).with_exec(Exec::Sequential).encrypt(&data);
        let par = Cipher::new(k).with_exec(Exec::Parallel).encrypt(&data);
        assert_eq!(seq, par);
    }

    #[test]
    fn collision_positions_rejects_length_mismatch() {
        let k = key(8, 1, 8);
        let c = encrypt(b"ab", &k);
        assert!(collision_positions(b"abc", &c).is_err());
    }
}
