//! Vertex density files.
//!
//! Two layouts, both row-major with dimension 0 slowest:
//!
//! * text: one value per line;
//! * raw: a 16-byte header, then `k` little-endian `u32` vertex counts, then
//!   the values as little-endian `f64`.
//!
//! Raw header: bytes 0..4 are `LSMP`, byte 4 is the format version (1),
//! byte 5 is `k`, byte 6 is the payload kind (0 = vertex densities,
//! 1 = sample points) and bytes 7..16 are zero. Raw export followed by
//! ingest reproduces every value bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::grid::validate_edges;
use crate::{DensityGrid, Error, Limits, Result};

pub const MAGIC: &[u8; 4] = b"LSMP";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Payload {
    Vertices = 0,
    Samples = 1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexFormat {
    Text,
    Raw,
}

impl FromStr for VertexFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(VertexFormat::Text),
            "raw" | "bin" => Ok(VertexFormat::Raw),
            other => Err(Error::InvalidParameter(format!(
                "unknown vertex file format {other:?} (expected text or raw)"
            ))),
        }
    }
}

pub(crate) fn header(payload: Payload, k: usize) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[..4].copy_from_slice(MAGIC);
    h[4] = VERSION;
    h[5] = k as u8;
    h[6] = payload as u8;
    h
}

/// Validates a header and returns `k`.
pub(crate) fn read_header(bytes: &[u8], payload: Payload) -> Result<usize> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "file is {} bytes, shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected LSMP".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!("unsupported version {}", bytes[4])));
    }
    if bytes[6] != payload as u8 {
        return Err(Error::Format(format!(
            "payload kind {} where {} was expected",
            bytes[6], payload as u8
        )));
    }
    if bytes[7..HEADER_LEN].iter().any(|&b| b != 0) {
        return Err(Error::Format("non-zero header padding".into()));
    }
    let k = bytes[5] as usize;
    if k == 0 {
        return Err(Error::Format("dimension 0 in header".into()));
    }
    Ok(k)
}

/// Parses a text vertex file: one value per line, blank lines ignored.
pub fn parse_text(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let index = out.len();
        let bad = || Error::BadValue {
            index,
            text: t.to_string(),
        };
        let v: f64 = t.parse().map_err(|_| bad())?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(bad());
        }
        out.push(v);
    }
    Ok(out)
}

/// Decodes a raw vertex file into per-dimension vertex counts and values.
pub fn decode_raw(bytes: &[u8]) -> Result<(Vec<usize>, Vec<f64>)> {
    decode_raw_with_limits(bytes, &Limits::default())
}

pub fn decode_raw_with_limits(bytes: &[u8], limits: &Limits) -> Result<(Vec<usize>, Vec<f64>)> {
    let k = read_header(bytes, Payload::Vertices)?;
    limits.check_dim(k).map_err(|e| Error::Format(e.to_string()))?;
    let counts_end = HEADER_LEN + 4 * k;
    if bytes.len() < counts_end {
        return Err(Error::Format("truncated vertex counts".into()));
    }
    let counts: Vec<usize> = bytes[HEADER_LEN..counts_end]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("chunk of 4")) as usize)
        .collect();
    let total = counts
        .iter()
        .try_fold(1u128, |acc, &c| Some(acc.saturating_mul(c as u128)))
        .unwrap_or(u128::MAX);
    let payload = bytes.len() - counts_end;
    if !payload.is_multiple_of(8) || (payload / 8) as u128 != total {
        return Err(Error::SizeMismatch {
            expected: total.min(usize::MAX as u128) as usize,
            found: payload / 8,
        });
    }
    let mut values = Vec::with_capacity(payload / 8);
    for (index, c) in bytes[counts_end..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(c.try_into().expect("chunk of 8"));
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::BadValue {
                index,
                text: format!("{v:?}"),
            });
        }
        values.push(v);
    }
    Ok((counts, values))
}

pub fn encode_raw(grid: &DensityGrid) -> Vec<u8> {
    let shape = grid.vertex_shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * shape.len() + 8 * grid.vertex_count());
    out.extend_from_slice(&header(Payload::Vertices, shape.len()));
    for n in &shape {
        out.extend_from_slice(&(*n as u32).to_le_bytes());
    }
    for v in grid.vertex_density() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_text(grid: &DensityGrid) -> String {
    let mut s = String::with_capacity(grid.vertex_count() * 24);
    for v in grid.vertex_density() {
        s.push_str(&format!("{v:?}\n"));
    }
    s
}

/// Builds a grid from precomputed densities stored at `path`.
pub fn ingest_vertex_file(
    edges: Vec<Vec<f64>>,
    path: impl AsRef<Path>,
    format: VertexFormat,
) -> Result<DensityGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    ingest_bytes(edges, &bytes, format)
}

/// In-memory counterpart of [`ingest_vertex_file`].
pub fn ingest_bytes(edges: Vec<Vec<f64>>, bytes: &[u8], format: VertexFormat) -> Result<DensityGrid> {
    let limits = Limits::default();
    let expected = validate_edges(&edges, &limits)?;
    let values = match format {
        VertexFormat::Text => {
            let text = std::str::from_utf8(bytes)
                .map_err(|e| Error::Format(format!("vertex file is not UTF-8: {e}")))?;
            parse_text(text)?
        }
        VertexFormat::Raw => {
            let (counts, values) = decode_raw_with_limits(bytes, &limits)?;
            let shape: Vec<usize> = edges.iter().map(Vec::len).collect();
            if counts != shape {
                return Err(Error::Format(format!(
                    "file vertex counts {counts:?} do not match edge lengths {shape:?}"
                )));
            }
            values
        }
    };
    if values.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            found: values.len(),
        });
    }
    DensityGrid::from_vertex_densities(edges, values)
}

pub fn export_vertex_file(
    grid: &DensityGrid,
    path: impl AsRef<Path>,
    format: VertexFormat,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        VertexFormat::Text => encode_text(grid).into_bytes(),
        VertexFormat::Raw => encode_raw(grid),
    };
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::DensityStructure;

    fn tent_edges() -> Vec<Vec<f64>> {
        vec![vec![0.0, 1.0, 3.0]]
    }

    #[test]
    fn text_ingest_matches_direct_build() {
        let g = ingest_bytes(tent_edges(), b"0\n2\n0\n", VertexFormat::Text).unwrap();
        assert_eq!(g.cell_masses(), &[1.0, 2.0]);
        assert_eq!(g.cum_mass(), &[1.0 / 3.0, 1.0]);
    }

    #[test]
    fn text_size_mismatch() {
        assert!(matches!(
            ingest_bytes(tent_edges(), b"0\n2\n0\n1\n", VertexFormat::Text),
            Err(Error::SizeMismatch {
                expected: 3,
                found: 4
            })
        ));
    }

    #[test]
    fn text_nan_names_index() {
        match ingest_bytes(tent_edges(), b"0\nnan\n0\n", VertexFormat::Text) {
            Err(Error::BadValue { index, text }) => {
                assert_eq!(index, 1);
                assert_eq!(text, "nan");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            ingest_bytes(tent_edges(), b"0\n1\n-2\n", VertexFormat::Text),
            Err(Error::BadValue { index: 2, .. })
        ));
    }

    #[test]
    fn raw_layout() {
        let g = DensityGrid::from_vertex_densities(tent_edges(), vec![0.0, 2.0, 0.0]).unwrap();
        let bytes = encode_raw(&g);
        assert_eq!(&bytes[..4], b"LSMP");
        assert_eq!(bytes[4], 1);
        assert_eq!(bytes[5], 1);
        assert!(bytes[6..16].iter().all(|&b| b == 0));
        assert_eq!(&bytes[16..20], &3u32.to_le_bytes());
        assert_eq!(&bytes[28..36], &2.0f64.to_le_bytes());
        assert_eq!(bytes.len(), 16 + 4 + 24);
    }

    #[test]
    fn raw_round_trip_is_bit_exact() {
        let edges = vec![vec![-1.0, 0.1, 0.7], vec![0.0, 1.0 / 3.0, 2.0, 5.5]];
        let values: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin().abs() + 1e-300).collect();
        let g = DensityGrid::from_vertex_densities(edges.clone(), values.clone()).unwrap();
        let back = ingest_bytes(edges, &encode_raw(&g), VertexFormat::Raw).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.vertex_density()), bits(&values));
        assert_eq!(back.fingerprint(), g.fingerprint());
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let values = vec![0.1, 1.0 / 3.0, 2.5e-300, 7.0];
        let g = DensityGrid::from_vertex_densities(vec![vec![0.0, 1.0], vec![0.0, 1.0]], values).unwrap();
        let back = ingest_bytes(
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            encode_text(&g).as_bytes(),
            VertexFormat::Text,
        )
        .unwrap();
        assert_eq!(back.fingerprint(), g.fingerprint());
    }

    #[test]
    fn raw_rejects_malformed() {
        let g = DensityGrid::from_vertex_densities(tent_edges(), vec![0.0, 2.0, 0.0]).unwrap();
        let good = encode_raw(&g);
        assert!(decode_raw(&good[..10]).is_err());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(decode_raw(&bad).is_err());
        let mut bad = good.clone();
        bad[4] = 2;
        assert!(decode_raw(&bad).is_err());
        let mut bad = good.clone();
        bad[16] = 4;
        assert!(matches!(decode_raw(&bad), Err(Error::SizeMismatch { .. })));
        let mut bad = good.clone();
        bad[28..36].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode_raw(&bad), Err(Error::BadValue { index: 1, .. })));
        // Edge lengths must agree with the stored counts.
        assert!(ingest_bytes(vec![vec![0.0, 1.0], vec![0.0, 1.0, 2.0]], &good, VertexFormat::Raw).is_err());
    }

    #[test]
    fn huge_claimed_counts_do_not_allocate() {
        let mut bytes = header(Payload::Vertices, 3).to_vec();
        for _ in 0..3 {
            bytes.extend_from_slice(&u32::MAX.to_le_bytes());
        }
        assert!(matches!(decode_raw(&bytes), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn unreadable_file() {
        assert!(matches!(
            ingest_vertex_file(tent_edges(), "/nonexistent/lintsampler/v.txt", VertexFormat::Text),
            Err(Error::Io { .. })
        ));
    }
}
