//! Uniform variate supply.
//!
//! Every stream emits rows of `width` values in `[0, 1)`. For sampling,
//! `width = k + 1`: column 0 feeds the cell choice and columns `1..=k` the
//! position inside the cell. Any row can be reached directly with
//! [`VariateStream::skip_to`], so a run can be split across workers or
//! chunks without changing its output.
//!
//! * `Pseudorandom`: ChaCha8 keyed by `seed` (via `SeedableRng::seed_from_u64`);
//!   row `r` starts at word position `2 * width * r`, one `u64` per value.
//! * `Sobol`: Joe & Kuo direction numbers, Gray-code order. Unscrambled
//!   streams skip the all-zero point; scrambled streams apply a nested
//!   uniform (Owen) scramble keyed by seed and start at point 0.
//! * `Halton`: radical inverse in the first `width` primes starting at
//!   index 1; scrambling applies a seeded random digital shift.

mod halton;
pub(crate) mod sobol;

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{Error, Limits, Result};

pub use sobol::MAX_POINTS as SOBOL_MAX_POINTS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamKind {
    Pseudorandom,
    Sobol,
    Halton,
}

impl StreamKind {
    pub fn name(self) -> &'static str {
        match self {
            StreamKind::Pseudorandom => "pseudorandom",
            StreamKind::Sobol => "sobol",
            StreamKind::Halton => "halton",
        }
    }
}

impl fmt::Display for StreamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StreamKind {
    type Err = Error;

    /// Accepts the CLI spellings; `none` means no QMC, i.e. pseudorandom.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "pseudorandom" => Ok(StreamKind::Pseudorandom),
            "sobol" => Ok(StreamKind::Sobol),
            "halton" => Ok(StreamKind::Halton),
            other => Err(Error::InvalidParameter(format!(
                "unknown stream kind {other:?} (expected none, sobol or halton)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
enum Engine {
    Chacha(Box<ChaCha8Rng>),
    Sobol {
        vectors: Vec<[u32; sobol::BITS]>,
        /// Per-dimension scramble keys, if scrambled.
        keys: Option<Vec<u64>>,
    },
    Halton(Vec<halton::Axis>),
}

/// A deterministic, seekable source of uniform variates.
#[derive(Clone, Debug)]
pub struct VariateStream {
    kind: StreamKind,
    width: usize,
    seed: u64,
    scrambled: bool,
    counter: u64,
    engine: Engine,
}

impl VariateStream {
    /// Stream of the given kind where `seed` drives all randomness: the
    /// generator key for pseudorandom streams, the scramble for QMC ones.
    pub fn new(kind: StreamKind, width: usize, seed: u64) -> Result<Self> {
        Self::with_limits(kind, width, seed, &Limits::default())
    }

    pub fn with_limits(kind: StreamKind, width: usize, seed: u64, limits: &Limits) -> Result<Self> {
        check_width(width, limits)?;
        match kind {
            StreamKind::Pseudorandom => Self::pseudorandom_unchecked(width, seed),
            StreamKind::Sobol => Self::sobol_unchecked(width)?.scramble(seed),
            StreamKind::Halton => Self::halton_unchecked(width).scramble(seed),
        }
    }

    pub fn pseudorandom(width: usize, seed: u64) -> Result<Self> {
        check_width(width, &Limits::default())?;
        Self::pseudorandom_unchecked(width, seed)
    }

    /// Unscrambled Sobol points, starting after the all-zero point.
    pub fn sobol(width: usize) -> Result<Self> {
        check_width(width, &Limits::default())?;
        Self::sobol_unchecked(width)
    }

    /// Unscrambled Halton points, starting at index 1.
    pub fn halton(width: usize) -> Result<Self> {
        check_width(width, &Limits::default())?;
        Ok(Self::halton_unchecked(width))
    }

    fn pseudorandom_unchecked(width: usize, seed: u64) -> Result<Self> {
        Ok(VariateStream {
            kind: StreamKind::Pseudorandom,
            width,
            seed,
            scrambled: false,
            counter: 0,
            engine: Engine::Chacha(Box::new(ChaCha8Rng::seed_from_u64(seed))),
        })
    }

    fn sobol_unchecked(width: usize) -> Result<Self> {
        Ok(VariateStream {
            kind: StreamKind::Sobol,
            width,
            seed: 0,
            scrambled: false,
            counter: 0,
            engine: Engine::Sobol {
                vectors: sobol::direction_vectors(width)?,
                keys: None,
            },
        })
    }

    fn halton_unchecked(width: usize) -> Self {
        VariateStream {
            kind: StreamKind::Halton,
            width,
            seed: 0,
            scrambled: false,
            counter: 0,
            engine: Engine::Halton((0..width).map(halton::Axis::new).collect()),
        }
    }

    /// Applies a seeded randomization to a QMC stream and rewinds it.
    pub fn scramble(self, seed: u64) -> Result<Self> {
        let width = self.width;
        let engine = match self.engine {
            Engine::Chacha(_) => return Err(Error::NotApplicable("pseudorandom")),
            Engine::Sobol { vectors, .. } => Engine::Sobol {
                vectors,
                keys: Some(
                    (0..width as u64)
                        .map(|d| mix(seed ^ mix(0x534f_424f_4c00_0000 | d)))
                        .collect(),
                ),
            },
            Engine::Halton(_) => Engine::Halton(
                (0..width)
                    .map(|d| halton::Axis::scrambled(d, seed))
                    .collect(),
            ),
        };
        Ok(VariateStream {
            kind: self.kind,
            width,
            seed,
            scrambled: true,
            counter: 0,
            engine,
        })
    }

    pub fn kind(&self) -> StreamKind {
        self.kind
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_scrambled(&self) -> bool {
        self.scrambled
    }

    /// Index of the next row to be emitted.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Moves to row `row` without generating the rows in between.
    pub fn skip_to(&mut self, row: u64) {
        self.counter = row;
    }

    /// The next `n` rows as a row-major `n x width` array.
    pub fn next_rows(&mut self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidParameter("row count must be at least 1".into()));
        }
        let mut out = vec![0.0; n * self.width];
        self.fill_rows(&mut out)?;
        Ok(out)
    }

    /// Fills `out` (a whole number of rows) and advances the counter.
    pub fn fill_rows(&mut self, out: &mut [f64]) -> Result<()> {
        let w = self.width;
        if !out.len().is_multiple_of(w) {
            return Err(Error::InvalidParameter(format!(
                "buffer of {} values is not a whole number of rows of width {w}",
                out.len()
            )));
        }
        let n = (out.len() / w) as u64;
        let start = self.counter;
        match &mut self.engine {
            Engine::Chacha(rng) => {
                rng.set_word_pos(start as u128 * w as u128 * 2);
                for v in out.iter_mut() {
                    *v = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                }
            }
            Engine::Sobol { vectors, keys } => {
                let offset = if keys.is_some() { 0 } else { 1 };
                let first = start + offset;
                let end = first.saturating_add(n);
                if end > sobol::MAX_POINTS {
                    return Err(Error::SequenceExhausted(end - 1 - offset));
                }
                let mut state: Vec<u32> = vectors.iter().map(|v| sobol::point(v, first)).collect();
                for (r, row) in out.chunks_exact_mut(w).enumerate() {
                    let index = first + r as u64;
                    if r > 0 {
                        let bit = index.trailing_zeros() as usize;
                        for (s, v) in state.iter_mut().zip(vectors.iter()) {
                            *s ^= v[bit];
                        }
                    }
                    match keys {
                        Some(keys) => {
                            for ((o, s), key) in row.iter_mut().zip(&state).zip(keys.iter()) {
                                *o = sobol::owen(*s, *key);
                            }
                        }
                        None => {
                            for (o, s) in row.iter_mut().zip(&state) {
                                *o = sobol::to_unit(*s);
                            }
                        }
                    }
                }
            }
            Engine::Halton(axes) => {
                for (r, row) in out.chunks_exact_mut(w).enumerate() {
                    let index = start + 1 + r as u64;
                    for (o, ax) in row.iter_mut().zip(axes.iter()) {
                        *o = ax.value(index);
                    }
                }
            }
        }
        self.counter = start + n;
        Ok(())
    }
}

fn check_width(width: usize, limits: &Limits) -> Result<()> {
    let max = (limits.max_dim + 1)
        .min(sobol::TABLE_DIMS)
        .min(halton::MAX_DIMS);
    if width == 0 || width > max {
        return Err(Error::Dimension { dim: width, max });
    }
    Ok(())
}

/// SplitMix64 finalizer.
#[inline]
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_rows() {
        let mut s = VariateStream::halton(2).unwrap();
        let rows = s.next_rows(3).unwrap();
        let expected = [0.5, 1.0 / 3.0, 0.25, 2.0 / 3.0, 0.75, 1.0 / 9.0];
        for (a, b) in rows.iter().zip(expected) {
            assert!((a - b).abs() < 1e-16);
        }
        assert_eq!(s.position(), 3);
    }

    #[test]
    fn sobol_skips_zero_point() {
        let mut s = VariateStream::sobol(2).unwrap();
        assert_eq!(s.next_rows(1).unwrap(), vec![0.5, 0.5]);
        assert_eq!(s.next_rows(1).unwrap(), vec![0.75, 0.25]);
    }

    #[test]
    fn pseudorandom_is_deterministic() {
        let a = VariateStream::pseudorandom(3, 7).unwrap().next_rows(100).unwrap();
        let b = VariateStream::pseudorandom(3, 7).unwrap().next_rows(100).unwrap();
        let c = VariateStream::pseudorandom(3, 8).unwrap().next_rows(100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn skip_ahead_equals_drawing() {
        for kind in [StreamKind::Pseudorandom, StreamKind::Sobol, StreamKind::Halton] {
            for scramble in [false, true] {
                let make = || {
                    let s = match kind {
                        StreamKind::Pseudorandom => VariateStream::pseudorandom(3, 5).unwrap(),
                        StreamKind::Sobol => VariateStream::sobol(3).unwrap(),
                        StreamKind::Halton => VariateStream::halton(3).unwrap(),
                    };
                    if scramble && kind != StreamKind::Pseudorandom {
                        s.scramble(11).unwrap()
                    } else {
                        s
                    }
                };
                let all = make().next_rows(50).unwrap();
                let mut skipped = make();
                skipped.skip_to(37);
                let tail = skipped.next_rows(13).unwrap();
                assert_eq!(&all[37 * 3..], &tail[..], "{kind} scramble={scramble}");
                let mut chunked = make();
                let mut joined = Vec::new();
                for n in [1, 7, 20, 22] {
                    joined.extend(chunked.next_rows(n).unwrap());
                }
                assert_eq!(all, joined);
            }
        }
    }

    #[test]
    fn scramble_is_seed_deterministic() {
        let a = VariateStream::sobol(2).unwrap().scramble(3).unwrap().next_rows(64).unwrap();
        let b = VariateStream::sobol(2).unwrap().scramble(3).unwrap().next_rows(64).unwrap();
        let c = VariateStream::sobol(2).unwrap().scramble(4).unwrap().next_rows(64).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn pseudorandom_cannot_be_scrambled() {
        let s = VariateStream::pseudorandom(2, 0).unwrap();
        assert!(matches!(s.scramble(1), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn width_limits() {
        assert!(VariateStream::pseudorandom(0, 0).is_err());
        assert!(VariateStream::sobol(12).is_err());
        assert!(VariateStream::sobol(11).is_ok());
    }

    #[test]
    fn sobol_exhaustion() {
        let mut s = VariateStream::sobol(1).unwrap();
        s.skip_to(SOBOL_MAX_POINTS - 2);
        assert!(s.next_rows(1).is_ok());
        assert!(matches!(s.next_rows(1), Err(Error::SequenceExhausted(_))));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("none".parse::<StreamKind>().unwrap(), StreamKind::Pseudorandom);
        assert_eq!("sobol".parse::<StreamKind>().unwrap(), StreamKind::Sobol);
        assert!("lattice".parse::<StreamKind>().is_err());
    }
}
