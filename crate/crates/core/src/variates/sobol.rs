//! Sobol points from the Joe & Kuo (2008) direction numbers, with optional
//! nested uniform (Owen) scrambling.

use super::mix;
use crate::{Error, Result};

/// `new-joe-kuo-6.21201`: dimensions 2..=21201, one per line after a header.
static JOE_KUO: &str = include_str!("../../data/new-joe-kuo-6.21201.txt");

pub const BITS: usize = 32;

/// Points with index at or beyond this are refused.
pub const MAX_POINTS: u64 = 1 << 31;

/// Number of dimensions covered by the shipped table.
pub const TABLE_DIMS: usize = 21201;

/// Direction vectors for the first `dims` dimensions.
pub(crate) fn direction_vectors(dims: usize) -> Result<Vec<[u32; BITS]>> {
    if dims > TABLE_DIMS {
        return Err(Error::Dimension {
            dim: dims,
            max: TABLE_DIMS,
        });
    }
    let mut out = Vec::with_capacity(dims);
    if dims == 0 {
        return Ok(out);
    }
    let mut first = [0u32; BITS];
    for (i, v) in first.iter_mut().enumerate() {
        *v = 1 << (BITS - 1 - i);
    }
    out.push(first);

    for line in JOE_KUO.lines().skip(1).take(dims - 1) {
        let nums: Vec<u32> = line
            .split_whitespace()
            .map(|t| t.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("direction table: {e}")))?;
        let (s, a) = (nums[1] as usize, nums[2]);
        let m = &nums[3..3 + s];
        let mut v = [0u32; BITS];
        for i in 0..s.min(BITS) {
            v[i] = m[i] << (BITS - 1 - i);
        }
        for i in s..BITS {
            v[i] = v[i - s] ^ (v[i - s] >> s);
            for j in 1..s {
                if (a >> (s - 1 - j)) & 1 == 1 {
                    v[i] ^= v[i - j];
                }
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// Unscrambled Sobol integer for point `index` in one dimension.
///
/// Uses the Gray-code ordering, so consecutive indices differ by a single
/// direction vector and any index can be computed directly.
#[inline]
pub(crate) fn point(v: &[u32; BITS], index: u64) -> u32 {
    let mut gray = index ^ (index >> 1);
    let mut x = 0;
    let mut j = 0;
    while gray != 0 {
        if gray & 1 == 1 {
            x ^= v[j];
        }
        gray >>= 1;
        j += 1;
    }
    x
}

/// Nested uniform scramble of a 32-bit digit string, extended to 53 bits.
///
/// Digit `b` is flipped by a coin keyed on `(key, b, digits above b)`; the
/// trailing 21 bits are uniform given all 32 digits.
#[inline]
pub(crate) fn owen(x: u32, key: u64) -> f64 {
    let mut out = 0u32;
    for b in 0..BITS {
        let prefix = if b == 0 { 0 } else { (x >> (BITS - b)) as u64 };
        let coin = mix(key ^ mix(((b as u64) << 32) | prefix)) >> 63;
        out |= ((x >> (BITS - 1 - b)) & 1 ^ coin as u32) << (BITS - 1 - b);
    }
    let tail = mix(key ^ mix((BITS as u64) << 32 | x as u64)) >> (64 - 21);
    (((out as u64) << 21) | tail) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
pub(crate) fn to_unit(x: u32) -> f64 {
    x as f64 * (1.0 / (1u64 << 32) as f64)
}
