//! Sample batches and their on-disk forms.
//!
//! CSV: header `x0,...,x{k-1}`, one point per row, values printed like C's
//! `%.17g`. Raw: the 16-byte `LSMP` header with payload kind 1, a `u64`
//! point count, then the coordinates as little-endian `f64`, row-major.

use std::io::{self, Write};

use crate::vertex_file::{header, read_header, Payload, HEADER_LEN};
use crate::{Error, Result, StreamKind};

#[derive(Clone, Debug, PartialEq)]
pub struct BatchMeta {
    pub seed: u64,
    pub kind: StreamKind,
    pub scrambled: bool,
    /// Digest of the structures the points were drawn from.
    pub fingerprint: u64,
    /// Number of points.
    pub n: u64,
    /// Stream row of the first point.
    pub first_row: u64,
}

/// `n x k` sampled coordinates, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    dim: usize,
    points: Vec<f64>,
    meta: BatchMeta,
}

impl SampleBatch {
    pub(crate) fn new(dim: usize, points: Vec<f64>, meta: BatchMeta) -> Self {
        debug_assert_eq!(points.len() % dim, 0);
        SampleBatch { dim, points, meta }
    }

    /// Wraps points read from elsewhere. Metadata other than `n` is zeroed.
    pub fn from_points(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(Error::SizeMismatch {
                expected: dim * (points.len() / dim.max(1)),
                found: points.len(),
            });
        }
        let meta = BatchMeta {
            seed: 0,
            kind: StreamKind::Pseudorandom,
            scrambled: false,
            fingerprint: 0,
            n: (points.len() / dim) as u64,
            first_row: 0,
        };
        Ok(SampleBatch { dim, points, meta })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn into_points(self) -> Vec<f64> {
        self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    pub fn meta(&self) -> &BatchMeta {
        &self.meta
    }

    /// Values of coordinate `d` across all points.
    pub fn column(&self, d: usize) -> Vec<f64> {
        self.iter().map(|p| p[d]).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        write_csv_points(w, self.dim, &self.points, true)
    }

    pub fn write_raw<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&header(Payload::Samples, self.dim))?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for v in &self.points {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Writes rows of `dim` values as CSV, with the header if requested.
pub fn write_csv_points<W: Write>(mut w: W, dim: usize, points: &[f64], with_header: bool) -> io::Result<()> {
    if with_header {
        let names: Vec<String> = (0..dim).map(|d| format!("x{d}")).collect();
        writeln!(w, "{}", names.join(","))?;
    }
    let mut line = String::new();
    for row in points.chunks_exact(dim) {
        line.clear();
        for (d, v) in row.iter().enumerate() {
            if d > 0 {
                line.push(',');
            }
            line.push_str(&format_g17(*v));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Raw sample header plus count, for writers that stream points in chunks.
pub fn raw_preamble(dim: usize, n: u64) -> Vec<u8> {
    let mut out = header(Payload::Samples, dim).to_vec();
    out.extend_from_slice(&n.to_le_bytes());
    out
}

/// Decodes a raw sample file into `(k, points)`.
pub fn decode_raw(bytes: &[u8]) -> Result<(usize, Vec<f64>)> {
    let k = read_header(bytes, Payload::Samples)?;
    if bytes.len() < HEADER_LEN + 8 {
        return Err(Error::Format("truncated point count".into()));
    }
    let n = u64::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 8].try_into().expect("8 bytes"));
    let body = &bytes[HEADER_LEN + 8..];
    if !body.len().is_multiple_of(8) || (body.len() / 8) as u128 != n as u128 * k as u128 {
        return Err(Error::SizeMismatch {
            expected: (n as u128 * k as u128).min(usize::MAX as u128) as usize,
            found: body.len() / 8,
        });
    }
    let points = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((k, points))
}

/// Parses sample CSV into `(k, points)`. A header row is optional.
pub fn parse_csv(text: &str) -> Result<(usize, Vec<f64>)> {
    let mut dim = None;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && fields.iter().all(|f| f.starts_with('x')) {
            dim = Some(fields.len());
            continue;
        }
        let k = *dim.get_or_insert(fields.len());
        if fields.len() != k {
            return Err(Error::Format(format!(
                "line {}: expected {k} columns, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad number {f:?}", lineno + 1)))?;
            if !v.is_finite() {
                return Err(Error::Format(format!("line {}: non-finite value", lineno + 1)));
            }
            points.push(v);
        }
    }
    match dim {
        Some(k) if !points.is_empty() => Ok((k, points)),
        _ => Err(Error::Format("no samples".into())),
    }
}

/// Formats like C's `printf("%.17g", v)`.
pub fn format_g17(v: f64) -> String {
    const P: i32 = 17;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp) as usize;
        strip_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        // Reference strings from C printf("%.17g").
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (123456789.0, "123456789"),
            (1e17, "1e+17"),
            (1e16, "10000000000000000"),
            (0.0001, "0.0001"),
            (-7.0 / 3.0, "-2.3333333333333335"),
            (1.0 / 3.0, "0.33333333333333331"),
            (6.02214076e23, "6.0221407599999999e+23"),
            (0.0, "0"),
        ];
        for (v, s) in cases {
            assert_eq!(format_g17(v), s, "{v:e}");
        }
    }

    #[test]
    fn g17_round_trips() {
        for v in [0.1, 1.0 / 3.0, -6.5e-300, 1.7976931348623157e308, 5e-324, 4.35] {
            assert_eq!(format_g17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_round_trip() {
        let meta = BatchMeta {
            seed: 1,
            kind: StreamKind::Pseudorandom,
            scrambled: false,
            fingerprint: 0,
            n: 2,
            first_row: 0,
        };
        let b = SampleBatch::new(2, vec![0.1, -2.0, 1.0 / 3.0, 1e-9], meta);
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x0,x1\n"));
        let (k, pts) = parse_csv(&text).unwrap();
        assert_eq!(k, 2);
        assert_eq!(pts, b.points());

        let mut raw = Vec::new();
        b.write_raw(&mut raw).unwrap();
        assert_eq!(decode_raw(&raw).unwrap(), (2, b.points().to_vec()));
        assert_eq!(&raw[..24], &raw_preamble(2, 2)[..]);
    }

    #[test]
    fn csv_errors() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("x0\n").is_err());
        assert!(parse_csv("1,2\n3\n").is_err());
        assert!(parse_csv("1,abc\n").is_err());
        assert!(parse_csv("inf\n").is_err());
    }

    #[test]
    fn raw_rejects_vertex_payload() {
        let h = header(Payload::Vertices, 1);
        let mut bytes = h.to_vec();
        bytes.extend_from_slice(&0u64.to_le_bytes());
        assert!(decode_raw(&bytes).is_err());
    }
}
