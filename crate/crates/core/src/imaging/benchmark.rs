//! Deterministic 1024x1024 grayscale test image.
//!
//! Three horizontal bands:
//!
//! * rows 0..384: a 128-pixel black/white checkerboard on the left half and
//!   two flat mid-gray tiles (0x80 above, 0x40 below) on the right;
//! * rows 384..640: white block glyphs on a dark speckle background. Every
//!   aligned group of 8 background pixels holds exactly one pixel of value
//!   0x01, so background 64-bit chunks have popcount 1;
//! * rows 640..1024: a left-to-right gradient `x * 255 / 1023`.
//!
//! Uniform chunks come from the checkerboard and the glyph blocks. None of
//! them spans an aligned 256-byte run, so at 2048 bits and above no chunk is
//! uniform.

use super::RasterImage;

pub const BENCHMARK_SIDE: usize = 1024;

const GLYPH_BAND: std::ops::Range<usize> = 384..640;
const CELL_W: usize = 32;
const CELL_H: usize = 40;
const BLOCK: usize = 8;

/// 3x4 block glyphs, one row per nibble (top row in the low bits).
const GLYPHS: [[u8; 4]; 10] = [
    [0b010, 0b101, 0b111, 0b101], // A
    [0b011, 0b011, 0b101, 0b011], // B
    [0b111, 0b001, 0b001, 0b111], // C
    [0b111, 0b011, 0b001, 0b111], // E
    [0b101, 0b111, 0b101, 0b101], // H
    [0b001, 0b001, 0b001, 0b111], // L
    [0b111, 0b101, 0b101, 0b111], // O
    [0b111, 0b010, 0b010, 0b010], // T
    [0b101, 0b101, 0b101, 0b111], // U
    [0b101, 0b010, 0b010, 0b101], // X
];

pub fn benchmark_image() -> RasterImage {
    let side = BENCHMARK_SIDE;
    let mut pixels = vec![0u8; side * side];
    for y in 0..side {
        for x in 0..side {
            pixels[y * side + x] = pixel(x, y);
        }
    }
    RasterImage::new(side, side, 1, pixels).expect("consistent dimensions")
}

fn pixel(x: usize, y: usize) -> u8 {
    if y < GLYPH_BAND.start {
        if x < 512 {
            if (x / 128 + y / 128).is_multiple_of(2) {
                0x00
            } else {
                0xFF
            }
        } else if y < 192 {
            0x80
        } else {
            0x40
        }
    } else if y < GLYPH_BAND.end {
        if glyph_block(x, y - GLYPH_BAND.start) {
            0xFF
        } else if x % BLOCK == (3 * y) % BLOCK {
            0x01
        } else {
            0x00
        }
    } else {
        (x * 255 / (BENCHMARK_SIDE - 1)) as u8
    }
}

fn glyph_block(x: usize, band_y: usize) -> bool {
    let (line, cy) = (band_y / CELL_H, band_y % CELL_H);
    let (cell, cx) = (x / CELL_W, x % CELL_W);
    let (bx, by) = (cx / BLOCK, cy / BLOCK);
    // Last block column and last block row of each cell are spacing.
    if bx >= 3 || by >= 4 || line >= 6 {
        return false;
    }
    let glyph = &GLYPHS[(line * 7 + cell * 3 + cell / 5) % GLYPHS.len()];
    (glyph[by] >> bx) & 1 == 1
}
