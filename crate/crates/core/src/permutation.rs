//! Bit chunks and the permutations that act on them.
//!
//! A [`Permutation`] of dimension `n` is stored as a 0-based gather map:
//! output bit `j` is input bit `map[j]`. This is the row form of the
//! permutation matrix `P` with `P[j][map[j]] = 1`, so multiplying a chunk by
//! `P` and gathering through `map` give the same result.
//!
//! Chunks are packed most-significant-bit first: chunk position 0 is bit 7 of
//! byte 0.

use std::fmt;

use crate::error::{QppError, Result};
use crate::keystream::Keystream;

/// Largest dimension for which [`Permutation::to_dense_matrix`] will build a matrix.
pub const DENSE_MATRIX_LIMIT: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ShuffleMode {
    /// Every swap target is drawn from the full range `[1, n]`.
    PaperMode,
    /// Swap target for position `i` is drawn from `[1, i]` (textbook Fisher-Yates).
    #[default]
    UnbiasedMode,
}

impl ShuffleMode {
    /// Inclusive range of the 1-based swap target at 1-based position `i`.
    pub fn k_range(self, n: usize, i: usize) -> (u64, u64) {
        match self {
            ShuffleMode::PaperMode => (1, n as u64),
            ShuffleMode::UnbiasedMode => (1, i as u64),
        }
    }
}

/// A fixed-length bit vector, the unit a permutation acts on.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitChunk {
    n: usize,
    bytes: Vec<u8>,
}

impl BitChunk {
    pub fn zeros(n: usize) -> Self {
        BitChunk {
            n,
            bytes: vec![0; n.div_ceil(8)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut chunk = BitChunk::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            chunk.set(i, b);
        }
        chunk
    }

    /// Packs `n` bits from `bytes` (MSB first). Bits past `n` in the final
    /// byte are cleared.
    pub fn from_bytes(n: usize, bytes: &[u8]) -> Result<Self> {
        let need = n.div_ceil(8);
        if bytes.len() != need {
            return Err(QppError::DimensionMismatch {
                expected: need,
                actual: bytes.len(),
            });
        }
        let mut bytes = bytes.to_vec();
        if !n.is_multiple_of(8) {
            let keep = 0xFFu8 << (8 - n % 8);
            *bytes.last_mut().unwrap() &= keep;
        }
        Ok(BitChunk { n, bytes })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.n,
            "bit index {i} out of range for chunk of {}",
            self.n
        );
        get_bit(&self.bytes, i)
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.n,
            "bit index {i} out of range for chunk of {}",
            self.n
        );
        let mask = 0x80u8 >> (i & 7);
        if value {
            self.bytes[i >> 3] |= mask;
        } else {
            self.bytes[i >> 3] &= !mask;
        }
    }

    pub fn popcount(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// True for the all-zero and all-one chunks, which every permutation fixes.
    pub fn is_uniform(&self) -> bool {
        let p = self.popcount();
        p == 0 || p == self.n
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.n).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitChunk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = (0..self.n)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        write!(f, "BitChunk({bits})")
    }
}

#[inline]
fn get_bit(bytes: &[u8], i: usize) -> bool {
    (bytes[i >> 3] >> (7 - (i & 7))) & 1 == 1
}

/// A permutation of `{0..n-1}` in gather form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<u32>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({:?})", self.one_based())
    }
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n as u32).collect(),
        }
    }

    /// Validates `map` as a bijection on `{0..map.len()-1}`.
    pub fn from_map(map: Vec<u32>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(QppError::InvalidPermutation("empty map".into()));
        }
        let mut seen = vec![false; n];
        for (j, &src) in map.iter().enumerate() {
            let src = src as usize;
            if src >= n {
                return Err(QppError::InvalidPermutation(format!(
                    "entry {j} points at {src}, outside 0..{n}"
                )));
            }
            if std::mem::replace(&mut seen[src], true) {
                return Err(QppError::InvalidPermutation(format!(
                    "index {src} appears more than once"
                )));
            }
        }
        Ok(Permutation { map })
    }

    /// Builds from the 1-based `S` array used in matrix notation.
    pub fn from_one_based(s: &[u32]) -> Result<Self> {
        let map = s
            .iter()
            .map(|&v| {
                v.checked_sub(1)
                    .ok_or_else(|| QppError::InvalidPermutation("1-based entry 0".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::from_map(map)
    }

    pub fn one_based(&self) -> Vec<u32> {
        self.map.iter().map(|&v| v + 1).collect()
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[u32] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(j, &s)| j == s as usize)
    }

    /// Runs the descending swap loop `for i = n..1: swap(S[K[i]], S[i])`
    /// starting from `S[i] = i`. `k_values` holds `K[1..=n]` (1-based values)
    /// and must respect the range of `mode`.
    pub fn generate_from_keystream(n: usize, k_values: &[u64], mode: ShuffleMode) -> Result<Self> {
        if n == 0 {
            return Err(QppError::InvalidParameter(
                "dimension must be positive".into(),
            ));
        }
        if k_values.len() != n {
            return Err(QppError::DimensionMismatch {
                expected: n,
                actual: k_values.len(),
            });
        }
        for (idx, &k) in k_values.iter().enumerate() {
            let (low, high) = mode.k_range(n, idx + 1);
            if k < low || k > high {
                return Err(QppError::KeystreamOutOfRange {
                    position: idx + 1,
                    value: k,
                    low,
                    high,
                });
            }
        }
        Ok(Self::shuffle(n, |i| k_values[i - 1]))
    }

    /// Draws `K[1..=n]` from `stream` in ascending order and shuffles.
    pub fn generate(n: usize, mode: ShuffleMode, stream: &mut Keystream) -> Self {
        assert!(n > 0, "dimension must be positive");
        let k: Vec<u64> = (1..=n)
            .map(|i| {
                let (low, high) = mode.k_range(n, i);
                stream.range_inclusive(low, high)
            })
            .collect();
        Self::shuffle(n, |i| k[i - 1])
    }

    fn shuffle(n: usize, k: impl Fn(usize) -> u64) -> Self {
        let mut s: Vec<u32> = (0..n as u32).collect();
        for i in (1..=n).rev() {
            let p = k(i) as usize;
            s.swap(p - 1, i - 1);
        }
        Permutation { map: s }
    }

    pub fn apply(&self, chunk: &BitChunk) -> Result<BitChunk> {
        self.check_dim(chunk)?;
        let mut out = BitChunk::zeros(self.n());
        self.apply_packed(&chunk.bytes, &mut out.bytes);
        Ok(out)
    }

    /// Gathers through the map over packed MSB-first bytes. `src` and `dst`
    /// must hold at least `n` bits; bits of `dst` past `n` are cleared.
    pub fn apply_packed(&self, src: &[u8], dst: &mut [u8]) {
        let n = self.n();
        assert!(
            src.len() * 8 >= n && dst.len() * 8 >= n,
            "buffer shorter than dimension"
        );
        let mut groups = self.map.chunks_exact(8);
        for (out, idx) in dst.iter_mut().zip(&mut groups) {
            let mut acc = 0u8;
            for &s in idx {
                acc = (acc << 1) | ((src[(s >> 3) as usize] >> (7 - (s & 7))) & 1);
            }
            *out = acc;
        }
        let rest = groups.remainder();
        if !rest.is_empty() {
            let mut acc = 0u8;
            for &s in rest {
                acc = (acc << 1) | ((src[(s >> 3) as usize] >> (7 - (s & 7))) & 1);
            }
            dst[n / 8] = acc << (8 - rest.len());
        }
    }

    pub fn invert(&self) -> Permutation {
        let mut inv = vec![0u32; self.n()];
        for (j, &s) in self.map.iter().enumerate() {
            inv[s as usize] = j as u32;
        }
        Permutation { map: inv }
    }

    pub fn fixes(&self, chunk: &BitChunk) -> Result<bool> {
        self.check_dim(chunk)?;
        Ok(self
            .map
            .iter()
            .enumerate()
            .all(|(j, &s)| get_bit(&chunk.bytes, j) == get_bit(&chunk.bytes, s as usize)))
    }

    pub fn to_dense_matrix(&self) -> Result<DenseMatrix> {
        self.to_dense_matrix_bounded(DENSE_MATRIX_LIMIT)
    }

    pub fn to_dense_matrix_bounded(&self, limit: usize) -> Result<DenseMatrix> {
        let n = self.n();
        if n > limit {
            return Err(QppError::Infeasible {
                what: format!("dense {n}x{n} matrix"),
                guidance: format!("dense matrices are limited to n <= {limit}"),
            });
        }
        let mut entries = vec![0u8; n * n];
        for (j, &s) in self.map.iter().enumerate() {
            entries[j * n + s as usize] = 1;
        }
        Ok(DenseMatrix { n, entries })
    }

    /// Position of this permutation in lexicographic order of its map.
    pub fn lexicographic_rank(&self) -> usize {
        let n = self.n();
        let mut rank = 0usize;
        let mut used = vec![false; n];
        for (pos, &v) in self.map.iter().enumerate() {
            let smaller = (0..v as usize).filter(|&u| !used[u]).count();
            rank += smaller * factorial_usize(n - 1 - pos);
            used[v as usize] = true;
        }
        rank
    }

    fn check_dim(&self, chunk: &BitChunk) -> Result<()> {
        if chunk.len() != self.n() {
            return Err(QppError::DimensionMismatch {
                expected: self.n(),
                actual: chunk.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn factorial_usize(k: usize) -> usize {
    (1..=k).product()
}

/// Every permutation of `{0..n-1}` in lexicographic order.
pub fn all_permutations(n: usize) -> AllPermutations {
    AllPermutations {
        next: Some((0..n as u32).collect()),
    }
}

pub struct AllPermutations {
    next: Option<Vec<u32>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        // Standard next-permutation step.
        if let Some(i) = (0..succ.len().saturating_sub(1))
            .rev()
            .find(|&i| succ[i] < succ[i + 1])
        {
            let j = (i + 1..succ.len())
                .rev()
                .find(|&j| succ[j] > succ[i])
                .unwrap();
            succ.swap(i, j);
            succ[i + 1..].reverse();
            self.next = Some(succ);
        }
        Some(Permutation { map: current })
    }
}

/// Explicit 0/1 permutation matrix, for cross-checking the gather path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl DenseMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.entries[row * self.n + col]
    }

    pub fn transpose(&self) -> DenseMatrix {
        let n = self.n;
        let mut entries = vec![0u8; n * n];
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.entries[r * n + c];
            }
        }
        DenseMatrix { n, entries }
    }

    /// `out[j] = sum_k M[j][k] * chunk[k]` over the integers.
    pub fn mul_chunk(&self, chunk: &BitChunk) -> Result<BitChunk> {
        if chunk.len() != self.n {
            return Err(QppError::DimensionMismatch {
                expected: self.n,
                actual: chunk.len(),
            });
        }
        let mut out = BitChunk::zeros(self.n);
        for j in 0..self.n {
            let sum: u32 = (0..self.n)
                .map(|k| u32::from(self.get(j, k)) * u32::from(chunk.get(k)))
                .sum();
            debug_assert!(sum <= 1);
            out.set(j, sum == 1);
        }
        Ok(out)
    }

    pub fn is_permutation_matrix(&self) -> bool {
        let n = self.n;
        (0..n).all(|r| (0..n).map(|c| self.get(r, c) as usize).sum::<usize>() == 1)
            && (0..n).all(|c| (0..n).map(|r| self.get(r, c) as usize).sum::<usize>() == 1)
    }
}
