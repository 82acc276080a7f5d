//! Exact math for a single cell: the multilinear interpolant, its integral,
//! and inverse transform sampling from it.

use crate::{Error, Limits, Result};

/// Tolerance on unit coordinates passed to [`Cell::interpolate`].
const UNIT_SLACK: f64 = 1e-12;

/// Relative threshold below which a linear segment is treated as flat.
const FLAT_REL: f64 = 1e-14;

/// An axis-aligned box with a density value at each of its `2^k` corners.
///
/// `corners[c]` holds the value at the corner whose coordinate in dimension
/// `d` is `hi[d]` when bit `d` of `c` is set and `lo[d]` otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    corners: Vec<f64>,
}

impl Cell {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, corners: Vec<f64>) -> Result<Self> {
        Self::with_limits(lo, hi, corners, &Limits::default())
    }

    pub fn with_limits(
        lo: Vec<f64>,
        hi: Vec<f64>,
        corners: Vec<f64>,
        limits: &Limits,
    ) -> Result<Self> {
        let k = lo.len();
        limits.check_dim(k)?;
        if hi.len() != k {
            return Err(Error::InvalidCell(format!(
                "lo has {k} coordinates but hi has {}",
                hi.len()
            )));
        }
        if corners.len() != 1 << k {
            return Err(Error::InvalidCell(format!(
                "a {k}-dimensional cell needs {} corners, got {}",
                1usize << k,
                corners.len()
            )));
        }
        for d in 0..k {
            if !(lo[d].is_finite() && hi[d].is_finite() && hi[d] > lo[d]) {
                return Err(Error::InvalidCell(format!(
                    "dimension {d} has bounds [{}, {}]",
                    lo[d], hi[d]
                )));
            }
        }
        if let Some(c) = corners.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidCell(format!(
                "corner {c} has density {}",
                corners[c]
            )));
        }
        Ok(Cell { lo, hi, corners })
    }

    /// Builds a cell from parts that the caller has already validated.
    pub(crate) fn from_parts(lo: Vec<f64>, hi: Vec<f64>, corners: Vec<f64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        debug_assert_eq!(corners.len(), 1 << lo.len());
        Cell { lo, hi, corners }
    }

    /// An empty shell of dimension `k`, to be filled by a structure.
    pub(crate) fn scratch(k: usize) -> Self {
        Cell {
            lo: vec![0.0; k],
            hi: vec![1.0; k],
            corners: vec![0.0; 1 << k],
        }
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<f64>, &mut Vec<f64>, &mut Vec<f64>) {
        (&mut self.lo, &mut self.hi, &mut self.corners)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn corners(&self) -> &[f64] {
        &self.corners
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    /// Integral of the interpolant over the cell: volume times the corner mean.
    pub fn mass(&self) -> f64 {
        self.volume() * mean(&self.corners)
    }

    /// Domain coordinates of corner `mask`.
    pub fn corner_point(&self, mask: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|d| if mask >> d & 1 == 1 { self.hi[d] } else { self.lo[d] })
            .collect()
    }

    /// Evaluates the multilinear interpolant at unit coordinates `t`.
    pub fn interpolate(&self, t: &[f64]) -> Result<f64> {
        if t.len() != self.dim() {
            return Err(Error::InvalidCell(format!(
                "expected {} unit coordinates, got {}",
                self.dim(),
                t.len()
            )));
        }
        let mut unit = Vec::with_capacity(t.len());
        for (d, &v) in t.iter().enumerate() {
            if !(-UNIT_SLACK..=1.0 + UNIT_SLACK).contains(&v) {
                return Err(Error::Domain { dim: d, value: v });
            }
            unit.push(v.clamp(0.0, 1.0));
        }
        let mut g = self.corners.clone();
        Ok(reduce_all(&mut g, &unit))
    }

    /// Draws one point from the normalized interpolant using `u` as the
    /// `k` uniform variates.
    pub fn sample(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        let mut scratch = Vec::with_capacity(self.corners.len());
        self.sample_into(u, &mut out, &mut scratch)?;
        Ok(out)
    }

    /// Allocation-free variant of [`Cell::sample`].
    ///
    /// Coordinates are drawn sequentially: dimension `d` is inverted from the
    /// linear marginal of the corner values that remain after fixing the
    /// earlier dimensions, then the corner array is collapsed along `d`.
    pub fn sample_into(&self, u: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) -> Result<()> {
        let k = self.dim();
        if u.len() != k || out.len() != k {
            return Err(Error::InvalidCell(format!(
                "expected {k} variates and outputs, got {} and {}",
                u.len(),
                out.len()
            )));
        }
        if !(self.mass() > 0.0) {
            return Err(Error::DegenerateMass);
        }
        scratch.clear();
        scratch.extend_from_slice(&self.corners);
        let g = scratch.as_mut_slice();
        let mut len = g.len();
        for d in 0..k {
            let ud = u[d];
            if !(0.0..=1.0).contains(&ud) {
                return Err(Error::VariateOutOfRange(ud));
            }
            let half = len / 2;
            let (mut a, mut b) = (0.0, 0.0);
            for m in 0..half {
                a += g[2 * m];
                b += g[2 * m + 1];
            }
            // The slice sums are proportional to the marginal end values; the
            // inversion is scale-invariant so the division by `half` is skipped.
            let t = if a + b > 0.0 { invert_linear(a, b, ud) } else { ud };
            for m in 0..half {
                g[m] = (1.0 - t) * g[2 * m] + t * g[2 * m + 1];
            }
            len = half;
            out[d] = self.lo[d] + t * (self.hi[d] - self.lo[d]);
        }
        Ok(())
    }
}

/// Inverse CDF of the density proportional to `a + (b - a) t` on `[0, 1]`.
pub fn inverse_linear_cdf(a: f64, b: f64, u: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "end densities must be finite and non-negative, got ({a}, {b})"
        )));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::VariateOutOfRange(u));
    }
    if !(a + b > 0.0) {
        return Err(Error::DegenerateMass);
    }
    Ok(invert_linear(a, b, u))
}

/// Unchecked inversion; requires `a, b >= 0`, `a + b > 0`, `u` in `[0, 1]`.
#[inline]
pub(crate) fn invert_linear(a: f64, b: f64, u: f64) -> f64 {
    if (b - a).abs() < FLAT_REL * (a + b) {
        return u;
    }
    // (-a + s) / (b - a) rewritten by rationalizing the numerator, which
    // avoids cancellation when b < a.
    let s = (a * a + u * (b * b - a * a)).max(0.0).sqrt();
    let denom = a + s;
    if denom == 0.0 {
        return 0.0;
    }
    (u * (a + b) / denom).clamp(0.0, 1.0)
}

/// Collapses a corner array along every dimension, returning the
/// interpolated value.
fn reduce_all(g: &mut [f64], t: &[f64]) -> f64 {
    let mut len = g.len();
    for &td in t {
        let half = len / 2;
        for m in 0..half {
            g[m] = (1.0 - td) * g[2 * m] + td * g[2 * m + 1];
        }
        len = half;
    }
    g[0]
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    fn unit2(c: [f64; 4]) -> Cell {
        Cell::new(vec![0.0, 0.0], vec![1.0, 1.0], c.to_vec()).unwrap()
    }

    #[test]
    fn interpolate_examples() {
        let c = unit2([0.0, 1.0, 2.0, 3.0]);
        assert_eq!(c.interpolate(&[0.5, 0.5]).unwrap(), 1.5);
        assert_eq!(c.interpolate(&[1.0, 0.0]).unwrap(), 1.0);
        let line = Cell::new(vec![0.0], vec![1.0], vec![2.0, 4.0]).unwrap();
        assert_eq!(line.interpolate(&[0.25]).unwrap(), 2.5);
    }

    #[test]
    fn interpolate_rejects_outside_unit_box() {
        let c = unit2([1.0; 4]);
        assert!(matches!(
            c.interpolate(&[1.5, 0.0]),
            Err(Error::Domain { dim: 0, .. })
        ));
        assert!(matches!(
            c.interpolate(&[0.0, -1e-9]),
            Err(Error::Domain { dim: 1, .. })
        ));
        // Within the slack is accepted.
        assert!(c.interpolate(&[1.0 + 1e-13, 0.0]).is_ok());
    }

    #[test]
    fn mass_examples() {
        assert_eq!(unit2([1.0; 4]).mass(), 1.0);
        let tri = Cell::new(vec![0.0], vec![2.0], vec![0.0, 2.0]).unwrap();
        assert_eq!(tri.mass(), 2.0);
        let c = Cell::new(vec![0.0, 0.0], vec![1.0, 2.0], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.mass(), 3.0);
    }

    #[test]
    fn inverse_cdf_examples() {
        assert_eq!(inverse_linear_cdf(3.0, 3.0, 0.7).unwrap(), 0.7);
        assert!(close(inverse_linear_cdf(0.0, 1.0, 0.25).unwrap(), 0.5, 1e-15));
        assert!(close(inverse_linear_cdf(1.0, 0.0, 0.75).unwrap(), 0.5, 1e-15));
        assert_eq!(inverse_linear_cdf(0.0, 5.0, 0.0).unwrap(), 0.0);
        assert_eq!(inverse_linear_cdf(2.0, 5.0, 1.0).unwrap(), 1.0);
        assert_eq!(inverse_linear_cdf(5.0, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn inverse_cdf_errors() {
        assert!(matches!(inverse_linear_cdf(0.0, 0.0, 0.5), Err(Error::DegenerateMass)));
        assert!(matches!(
            inverse_linear_cdf(1.0, 2.0, 1.5),
            Err(Error::VariateOutOfRange(_))
        ));
        assert!(matches!(
            inverse_linear_cdf(1.0, 2.0, -0.1),
            Err(Error::VariateOutOfRange(_))
        ));
        assert!(inverse_linear_cdf(-1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn sample_uniform_cell_is_affine_map() {
        let c = Cell::new(vec![-1.0, 2.0], vec![3.0, 2.5], vec![7.0; 4]).unwrap();
        let x = c.sample(&[0.3, 0.8]).unwrap();
        assert!(close(x[0], -1.0 + 0.3 * 4.0, 1e-15));
        assert!(close(x[1], 2.0 + 0.8 * 0.5, 1e-15));
    }

    #[test]
    fn sample_1d_reduces_to_inverse_cdf() {
        let c = Cell::new(vec![0.0], vec![1.0], vec![0.0, 1.0]).unwrap();
        assert!(close(c.sample(&[0.25]).unwrap()[0], 0.5, 1e-15));
    }

    #[test]
    fn sample_zero_mass_cell_is_rejected() {
        let c = unit2([0.0; 4]);
        assert!(matches!(c.sample(&[0.5, 0.5]), Err(Error::DegenerateMass)));
    }

    #[test]
    fn zero_conditional_slice_falls_back_to_uniform() {
        // Only corner (hi, lo) carries mass. u0 = 0 pins x0 to the lower
        // edge, where the conditional slice along x1 is identically zero.
        let c = unit2([0.0, 1.0, 0.0, 0.0]);
        let x = c.sample(&[0.0, 0.37]).unwrap();
        assert_eq!(x[0], 0.0);
        assert_eq!(x[1], 0.37);
    }

    #[test]
    fn cell_validation() {
        assert!(Cell::new(vec![0.0], vec![0.0], vec![1.0, 1.0]).is_err());
        assert!(Cell::new(vec![0.0], vec![1.0], vec![1.0]).is_err());
        assert!(Cell::new(vec![0.0], vec![1.0], vec![-1.0, 1.0]).is_err());
        assert!(Cell::new(vec![0.0], vec![1.0], vec![f64::NAN, 1.0]).is_err());
        assert!(matches!(
            Cell::new(vec![], vec![], vec![1.0]),
            Err(Error::Dimension { dim: 0, .. })
        ));
        let k = 11;
        assert!(matches!(
            Cell::new(vec![0.0; k], vec![1.0; k], vec![1.0; 1 << k]),
            Err(Error::Dimension { dim: 11, max: 10 })
        ));
        let wide = Limits {
            max_dim: 12,
            ..Limits::default()
        };
        assert!(Cell::with_limits(vec![0.0; k], vec![1.0; k], vec![1.0; 1 << k], &wide).is_ok());
    }

    #[test]
    fn corner_points_follow_bit_convention() {
        let c = Cell::new(vec![0.0, 10.0], vec![1.0, 20.0], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.corner_point(0b01), vec![1.0, 10.0]);
        assert_eq!(c.corner_point(0b10), vec![0.0, 20.0]);
    }
}
