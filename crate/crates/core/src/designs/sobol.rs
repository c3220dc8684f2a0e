//! Sobol sequences from the Joe-Kuo direction numbers.
//!
//! Points are produced in Gray-code order with 32-bit precision. The
//! all-zero point at index 0 is skipped, so row `i` of a design is sequence
//! index `i + 1`; with that offset fixed, every design is a prefix of any
//! longer design with the same seed.
//!
//! A nonzero seed applies a hash-based nested uniform (Owen) scramble to
//! each dimension. The scramble is a per-point bijection of the digits, so
//! it preserves the prefix property and the stratification of every
//! elementary interval.

use std::sync::OnceLock;

use super::{Design, DesignKind};
use crate::error::{Error, Result};
use crate::seeds::splitmix64;

const BITS: usize = 32;
const TABLE: &str = include_str!("../../data/joe_kuo_1111.txt");

/// Highest dimension covered by the embedded direction numbers.
pub const MAX_SOBOL_DIMENSION: usize = 1111;

fn directions() -> &'static [[u32; BITS]] {
    static DIRECTIONS: OnceLock<Vec<[u32; BITS]>> = OnceLock::new();
    DIRECTIONS.get_or_init(|| parse_table(TABLE))
}

fn parse_table(text: &str) -> Vec<[u32; BITS]> {
    let mut out = Vec::with_capacity(MAX_SOBOL_DIMENSION);

    // First dimension: van der Corput in base 2.
    let mut first = [0u32; BITS];
    for (k, v) in first.iter_mut().enumerate() {
        *v = 1 << (BITS - 1 - k);
    }
    out.push(first);

    for line in text.lines().skip(1) {
        let fields: Vec<u64> = line
            .split_whitespace()
            .map(|f| f.parse().expect("direction table is well formed"))
            .collect();
        let s = fields[1] as usize;
        let a = fields[2] as u32;
        let m = &fields[3..3 + s];

        let mut v = [0u32; BITS];
        for k in 0..BITS {
            v[k] = if k < s {
                (m[k] as u32) << (BITS - 1 - k)
            } else {
                let mut x = v[k - s] ^ (v[k - s] >> s);
                for j in 1..s {
                    if (a >> (s - 1 - j)) & 1 == 1 {
                        x ^= v[k - j];
                    }
                }
                x
            };
        }
        out.push(v);
    }
    debug_assert_eq!(out.len(), MAX_SOBOL_DIMENSION);
    out
}

/// Integer coordinate of sequence index `index` in dimension `dim`.
fn sobol_int(index: u64, dim: usize) -> u32 {
    let v = &directions()[dim];
    let mut gray = index ^ (index >> 1);
    let mut x = 0u32;
    let mut bit = 0;
    while gray != 0 {
        if gray & 1 == 1 {
            x ^= v[bit];
        }
        gray >>= 1;
        bit += 1;
    }
    x
}

/// Laine-Karras style hash on bit-reversed input; each output bit depends
/// only on itself and less significant input bits.
fn lk_hash(mut x: u32, seed: u32) -> u32 {
    x ^= x.wrapping_mul(0x3d20_adea);
    x = x.wrapping_add(seed);
    x = x.wrapping_mul((seed >> 16) | 1);
    x ^= x.wrapping_mul(0x0552_6c56);
    x ^= x.wrapping_mul(0x53a2_2864);
    x
}

fn owen_scramble(x: u32, seed: u32) -> u32 {
    lk_hash(x.reverse_bits(), seed).reverse_bits()
}

/// First `m` points of the `n`-dimensional Sobol sequence on `[-1, 1]^n`.
///
/// `seed == 0` gives the raw sequence; any other seed selects an Owen
/// scramble.
pub fn sobol(m: usize, n: usize, seed: u64) -> Result<Design> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput(format!(
            "Sobol design needs m >= 1 and n >= 1, got m={m}, n={n}"
        )));
    }
    if n > MAX_SOBOL_DIMENSION {
        return Err(Error::UnsupportedDimension {
            requested: n,
            max: MAX_SOBOL_DIMENSION,
        });
    }
    if m as u64 >= u64::from(u32::MAX) {
        return Err(Error::DesignTooLarge {
            size: m as u128,
            cap: u32::MAX as usize - 1,
        });
    }
    let scramble_seeds: Vec<u32> = (0..n)
        .map(|d| (splitmix64(seed ^ splitmix64(d as u64 + 1)) >> 32) as u32)
        .collect();
    let scale = 1.0 / (1u64 << BITS) as f64;
    let mut points = Vec::with_capacity(m * n);
    for i in 0..m {
        let index = i as u64 + 1;
        for (d, &s) in scramble_seeds.iter().enumerate() {
            let mut x = sobol_int(index, d);
            if seed != 0 {
                x = owen_scramble(x, s);
            }
            let u = f64::from(x) * scale;
            points.push(2.0 * u - 1.0);
        }
    }
    Ok(Design::from_parts(n, points, DesignKind::Sobol, None, None, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_covers_all_dimensions() {
        assert_eq!(directions().len(), MAX_SOBOL_DIMENSION);
    }

    #[test]
    fn unscrambled_matches_reference_sequence() {
        // Rows 1..=8 of the unscrambled sequence in [0, 1]^5, as produced by
        // an independent implementation of the same direction numbers.
        let reference = [
            [0.5, 0.5, 0.5, 0.5, 0.5],
            [0.75, 0.25, 0.25, 0.25, 0.75],
            [0.25, 0.75, 0.75, 0.75, 0.25],
            [0.375, 0.375, 0.625, 0.875, 0.375],
            [0.875, 0.875, 0.125, 0.375, 0.875],
            [0.625, 0.125, 0.875, 0.625, 0.625],
            [0.125, 0.625, 0.375, 0.125, 0.125],
            [0.1875, 0.3125, 0.9375, 0.4375, 0.5625],
        ];
        let d = sobol(8, 5, 0).unwrap();
        for (row, expect) in d.rows().zip(reference.iter()) {
            for (z, u) in row.iter().zip(expect) {
                assert_eq!(*z, 2.0 * u - 1.0);
            }
        }
        assert_eq!(d.row(0)[0], 0.0);
    }

    #[test]
    fn high_dimensions_match_reference() {
        // Dimensions 1000..1004 (1-based 1001..1005), rows 1..=4 of the
        // raw [0, 1] sequence.
        let reference: [[f64; 5]; 4] = [
            [0.5, 0.5, 0.5, 0.5, 0.5],
            [0.25, 0.25, 0.75, 0.25, 0.25],
            [0.75, 0.75, 0.25, 0.75, 0.75],
            [0.875, 0.125, 0.375, 0.375, 0.875],
        ];
        let d = sobol(4, 1005, 0).unwrap();
        for (i, expect) in reference.iter().enumerate() {
            for (k, u) in expect.iter().enumerate() {
                assert_eq!(d.row(i)[1000 + k], 2.0 * u - 1.0, "row {i} dim {}", 1000 + k);
            }
        }
    }

    #[test]
    fn too_many_dimensions() {
        assert!(matches!(
            sobol(4, MAX_SOBOL_DIMENSION + 1, 0),
            Err(Error::UnsupportedDimension { .. })
        ));
        assert!(sobol(1, MAX_SOBOL_DIMENSION, 3).is_ok());
    }

    #[test]
    fn scrambled_prefix_and_determinism() {
        let big = sobol(8, 2, 11).unwrap();
        let small = sobol(4, 2, 11).unwrap();
        assert_eq!(&big.as_flat()[..8], small.as_flat());
        assert_eq!(big, sobol(8, 2, 11).unwrap());
        assert_ne!(big, sobol(8, 2, 12).unwrap());
    }

    #[test]
    fn scrambling_keeps_dyadic_stratification() {
        // Indices 0..2^k fill every one of the 2^k cells per axis. Rows are
        // indices 1..=2^k, so index 2^k stands in for index 0 and may share a
        // cell with another point, leaving at most one cell empty.
        let k = 6;
        let m = 1usize << k;
        let d = sobol(m, 2, 99).unwrap();
        for j in 0..2 {
            let mut cells = vec![0; m];
            for row in d.rows() {
                let u = 0.5 * (row[j] + 1.0);
                cells[((u * m as f64) as usize).min(m - 1)] += 1;
            }
            let empty = cells.iter().filter(|&&c| c == 0).count();
            assert!(empty <= 1, "dimension {j}: {empty} empty cells");
        }
    }

    #[test]
    fn points_in_cube() {
        for seed in [0, 1, 2] {
            let d = sobol(257, 7, seed).unwrap();
            assert!(d.as_flat().iter().all(|z| (-1.0..=1.0).contains(z)));
        }
    }
}
