//! Edge arrays and box specifications from text.

use crate::grid::validate_edges;
use crate::{Error, Limits, Result};

/// `n` evenly spaced values from `lo` to `hi` inclusive; the last is exactly `hi`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("linspace needs at least 2 points, got {n}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidBox(format!("need finite lo < hi, got {lo}:{hi}")));
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    v[n - 1] = hi;
    Ok(v)
}

/// Parses `lo:hi:n[,lo:hi:n...]` into uniform edge arrays.
pub fn parse_grid_axes(spec: &str) -> Result<Vec<Vec<f64>>> {
    parse_grid_axes_with_limits(spec, &Limits::default())
}

pub fn parse_grid_axes_with_limits(spec: &str, limits: &Limits) -> Result<Vec<Vec<f64>>> {
    let mut axes = Vec::new();
    for part in split_axes(spec)? {
        let fields: Vec<&str> = part.split(':').map(str::trim).collect();
        let [lo, hi, n] = fields[..] else {
            return Err(Error::InvalidParameter(format!("grid axis {part:?} is not lo:hi:n")));
        };
        let n: usize = n
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad vertex count {n:?}")))?;
        axes.push((number(lo)?, number(hi)?, n));
    }
    limits.check_dim(axes.len())?;
    let total = axes.iter().fold(1u128, |acc, a| acc.saturating_mul(a.2 as u128));
    if total > limits.max_vertices as u128 {
        return Err(Error::TooManyVertices {
            count: total,
            max: limits.max_vertices,
        });
    }
    axes.into_iter().map(|(lo, hi, n)| linspace(lo, hi, n)).collect()
}

/// Parses `lo:hi[,lo:hi...]` into `(lo, hi)` corner vectors.
pub fn parse_domain(spec: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in split_axes(spec)? {
        let fields: Vec<&str> = part.split(':').map(str::trim).collect();
        let [a, b] = fields[..] else {
            return Err(Error::InvalidParameter(format!("domain axis {part:?} is not lo:hi")));
        };
        let (a, b) = (number(a)?, number(b)?);
        if !(a < b) {
            return Err(Error::InvalidBox(format!("need lo < hi, got {a}:{b}")));
        }
        lo.push(a);
        hi.push(b);
    }
    Limits::default().check_dim(lo.len())?;
    Ok((lo, hi))
}

/// Parses an edges file: one line per dimension, values separated by
/// whitespace or commas. Lines starting with `#` are comments.
pub fn parse_edges_text(text: &str) -> Result<Vec<Vec<f64>>> {
    parse_edges_text_with_limits(text, &Limits::default())
}

pub fn parse_edges_text_with_limits(text: &str, limits: &Limits) -> Result<Vec<Vec<f64>>> {
    let mut edges = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if edges.len() >= limits.max_dim {
            return Err(Error::Dimension {
                dim: edges.len() + 1,
                max: limits.max_dim,
            });
        }
        let row = t
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(number)
            .collect::<Result<Vec<f64>>>()?;
        edges.push(row);
    }
    validate_edges(&edges, limits)?;
    Ok(edges)
}

fn split_axes(spec: &str) -> Result<Vec<&str>> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if spec.trim().is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::InvalidParameter(format!("empty axis in {spec:?}")));
    }
    Ok(parts)
}

fn number(s: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::InvalidParameter(format!("bad number {s:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-7.0, 7.0, 100).unwrap();
        assert_eq!(v.len(), 100);
        assert_eq!(v[0], -7.0);
        assert_eq!(v[99], 7.0);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(linspace(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(linspace(0.0, 1.0, 1).is_err());
        assert!(linspace(1.0, 0.0, 3).is_err());
    }

    #[test]
    fn grid_axes() {
        let axes = parse_grid_axes("0:1:2, -1:1:3").unwrap();
        assert_eq!(axes, vec![vec![0.0, 1.0], vec![-1.0, 0.0, 1.0]]);
        assert!(parse_grid_axes("").is_err());
        assert!(parse_grid_axes("0:1").is_err());
        assert!(parse_grid_axes("0:1:x").is_err());
        assert!(parse_grid_axes("0:1:1").is_err());
        assert!(parse_grid_axes("1:0:4").is_err());
        assert!(parse_grid_axes("0:1:2,,0:1:2").is_err());
    }

    #[test]
    fn vertex_cap_checked_before_allocation() {
        let spec = ["0:1:100000"; 3].join(",");
        assert!(matches!(parse_grid_axes(&spec), Err(Error::TooManyVertices { .. })));
        let spec = ["0:1:2"; 11].join(",");
        assert!(matches!(parse_grid_axes(&spec), Err(Error::Dimension { dim: 11, .. })));
    }

    #[test]
    fn domains() {
        assert_eq!(parse_domain("0.01:100").unwrap(), (vec![0.01], vec![100.0]));
        assert_eq!(parse_domain("0:1,-2:2").unwrap(), (vec![0.0, -2.0], vec![1.0, 2.0]));
        assert!(parse_domain("1:1").is_err());
        assert!(parse_domain("0:1:3").is_err());
        assert!(parse_domain("nan:1").is_err());
    }

    #[test]
    fn edges_text() {
        let e = parse_edges_text("# uneven\n0 0.1 1\n\n-1, 2\n").unwrap();
        assert_eq!(e, vec![vec![0.0, 0.1, 1.0], vec![-1.0, 2.0]]);
        assert!(parse_edges_text("0 1 1\n").is_err());
        assert!(parse_edges_text("0\n").is_err());
        assert!(parse_edges_text("").is_err());
        assert!(parse_edges_text("0 a\n").is_err());
    }
}
