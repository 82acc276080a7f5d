//! Halton points via the radical inverse, with an optional digital shift.

use super::mix;

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131,
];

pub(crate) const MAX_DIMS: usize = PRIMES.len();

/// Largest double below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Clone, Debug)]
pub(crate) struct Axis {
    base: u64,
    /// Per-digit shifts, least significant digit first; empty when unscrambled.
    shift: Vec<u64>,
}

impl Axis {
    pub(crate) fn new(dim: usize) -> Self {
        Axis {
            base: PRIMES[dim],
            shift: Vec::new(),
        }
    }

    pub(crate) fn scrambled(dim: usize, seed: u64) -> Self {
        let base = PRIMES[dim];
        // Enough digits that base^-digits is below double resolution.
        let digits = (53.0 / (base as f64).log2()).ceil() as usize + 1;
        let key = mix(seed ^ mix(0x4841_4c54_4f4e_0000 | dim as u64));
        let shift = (0..digits)
            .map(|j| mix(key ^ mix(j as u64 + 1)) % base)
            .collect();
        Axis { base, shift }
    }

    /// Radical inverse of `index` in this axis' base, digit-shifted if scrambled.
    pub(crate) fn value(&self, mut index: u64) -> f64 {
        let b = self.base;
        let inv = 1.0 / b as f64;
        if self.shift.is_empty() {
            let mut v = 0.0;
            let mut scale = inv;
            while index > 0 {
                v += (index % b) as f64 * scale;
                index /= b;
                scale *= inv;
            }
            return v;
        }
        let mut digits = Vec::with_capacity(self.shift.len());
        for s in &self.shift {
            digits.push((index % b + s) % b);
            index /= b;
        }
        // Horner from the least significant digit keeps the sum accurate.
        let mut v = 0.0;
        for d in digits.iter().rev() {
            v = (v + *d as f64) * inv;
        }
        v.min(BELOW_ONE)
    }
}
