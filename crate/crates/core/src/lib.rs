//! Quantum permutation pad (QPP) cipher and collision cryptanalysis.
//!
//! The cipher splits a byte stream into `n`-bit chunks and moves the bits of
//! each chunk with one of `m` secret permutations. Because a permutation only
//! moves bits around, a chunk whose ones are mapped onto ones comes out
//! unchanged. The [`analysis`] module quantifies how often that happens and
//! [`imaging`] makes it visible on raster images.

pub mod analysis;
pub mod cipher;
pub mod error;
pub mod exec;
pub mod imaging;
pub mod key;
pub mod keystream;
pub mod permutation;

pub use cipher::{collision_positions, decrypt, encrypt, Cipher, CiphertextContainer};
pub use error::{QppError, Result};
pub use exec::Exec;
pub use key::{keygen, Pad, PadKey};
pub use keystream::Seed;
pub use permutation::{BitChunk, Permutation, ShuffleMode};
