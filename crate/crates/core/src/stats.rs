//! Goodness-of-fit diagnostics against the interpolant.

use std::fmt;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::structure::DensityStructure;
use crate::{DensityGrid, Error, Result, SampleBatch};

/// Asymptotic Kolmogorov critical value of `sqrt(N) D` at the 1% level.
pub const KS_CRITICAL_1PCT: f64 = 1.63;

/// CDF of the normalized interpolant of a one-dimensional structure.
#[derive(Clone, Debug)]
pub struct InterpolantCdf {
    lo: Vec<f64>,
    hi: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    before: Vec<f64>,
    total: f64,
}

impl InterpolantCdf {
    pub fn new(structure: &dyn DensityStructure) -> Result<Self> {
        if structure.dim() != 1 {
            return Err(Error::Dimension {
                dim: structure.dim(),
                max: 1,
            });
        }
        let mut cells = (0..structure.cell_count())
            .map(|i| structure.cell(i))
            .collect::<Result<Vec<_>>>()?;
        cells.sort_by(|x, y| x.lo()[0].total_cmp(&y.lo()[0]));
        let total: f64 = cells.iter().map(|c| c.mass()).sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        let mut cdf = InterpolantCdf {
            lo: Vec::with_capacity(cells.len()),
            hi: Vec::with_capacity(cells.len()),
            a: Vec::with_capacity(cells.len()),
            b: Vec::with_capacity(cells.len()),
            before: Vec::with_capacity(cells.len()),
            total,
        };
        let mut running = 0.0;
        for c in &cells {
            cdf.lo.push(c.lo()[0]);
            cdf.hi.push(c.hi()[0]);
            cdf.a.push(c.corners()[0]);
            cdf.b.push(c.corners()[1]);
            cdf.before.push(running);
            running += c.mass();
        }
        Ok(cdf)
    }

    /// Value at `x`; clamps to 0 and 1 outside the extent.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo[0] {
            return 0.0;
        }
        let i = self.lo.partition_point(|&l| l <= x) - 1;
        if x >= self.hi[i] {
            // Past the last cell, or in a gap between structures' cells.
            return ((self.before[i] + (self.hi[i] - self.lo[i]) * 0.5 * (self.a[i] + self.b[i])) / self.total)
                .min(1.0);
        }
        let w = self.hi[i] - self.lo[i];
        let t = (x - self.lo[i]) / w;
        let (a, b) = (self.a[i], self.b[i]);
        ((self.before[i] + w * (a * t + 0.5 * (b - a) * t * t)) / self.total).clamp(0.0, 1.0)
    }
}

/// Closed-form CDF of the normalized interpolant of a 1D grid at `x`.
pub fn exact_interpolant_cdf(grid: &DensityGrid, x: f64) -> Result<f64> {
    Ok(InterpolantCdf::new(grid)?.eval(x))
}

/// Per-dimension mean and variance of the normalized interpolant.
pub fn interpolant_moments(structure: &dyn DensityStructure) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = structure.dim();
    let mut m0 = 0.0;
    let mut m1 = vec![0.0; k];
    let mut m2 = vec![0.0; k];
    for i in 0..structure.cell_count() {
        let c = structure.cell(i)?;
        let mass = c.mass();
        if mass <= 0.0 {
            continue;
        }
        m0 += mass;
        for d in 0..k {
            // Marginal along d is linear with end values a (lower face) and b.
            let (mut a, mut b) = (0.0, 0.0);
            for (mask, v) in c.corners().iter().enumerate() {
                if mask >> d & 1 == 0 {
                    a += v;
                } else {
                    b += v;
                }
            }
            let et = (a + 2.0 * b) / (3.0 * (a + b));
            let et2 = (a + 3.0 * b) / (6.0 * (a + b));
            let (lo, w) = (c.lo()[d], c.hi()[d] - c.lo()[d]);
            m1[d] += mass * (lo + w * et);
            m2[d] += mass * (lo * lo + 2.0 * lo * w * et + w * w * et2);
        }
    }
    if !(m0 > 0.0) {
        return Err(Error::ZeroMass);
    }
    let mean: Vec<f64> = m1.iter().map(|v| v / m0).collect();
    let var = m2.iter().zip(&mean).map(|(v, m)| (v / m0 - m * m).max(0.0)).collect();
    Ok((mean, var))
}

/// Per-dimension sample mean and unbiased variance of a batch.
pub fn sample_moments(batch: &SampleBatch) -> (Vec<f64>, Vec<f64>) {
    let k = batch.dim();
    let n = batch.len() as f64;
    let mut mean = vec![0.0; k];
    for p in batch.iter() {
        for d in 0..k {
            mean[d] += p[d];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; k];
    for p in batch.iter() {
        for d in 0..k {
            var[d] += (p[d] - mean[d]).powi(2);
        }
    }
    let denom = (n - 1.0).max(1.0);
    var.iter_mut().for_each(|v| *v /= denom);
    (mean, var)
}

/// Kolmogorov-Smirnov statistic `D` of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.3 {
        // Theta-function form; the alternating series converges slowly here.
        let q = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let s: f64 = (1..=7).map(|j| q.powi((2 * j - 1) * (2 * j - 1))).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins left after pooling.
    pub bins: usize,
}

/// Pearson chi-square test. Consecutive bins are pooled until each has an
/// expected count of at least 5; a short tail joins the last pooled bin.
pub fn chi_square(observed: &[u64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return Err(Error::SizeMismatch {
            expected: expected.len(),
            found: observed.len(),
        });
    }
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (obs, exp) in observed.iter().zip(expected) {
        o += *obs as f64;
        e += exp;
        if e >= 5.0 {
            pooled.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if o > 0.0 || e > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => pooled.push((o, e)),
        }
    }
    if pooled.len() < 2 {
        return Err(Error::InvalidParameter(
            "chi-square needs at least two bins with expected count >= 5".into(),
        ));
    }
    let statistic: f64 = pooled.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = pooled.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: dist.sf(statistic),
        bins: pooled.len(),
    })
}

/// Per-cell sample counts, with points outside every cell dropped.
pub fn occupancy(structure: &dyn DensityStructure, batch: &SampleBatch) -> Vec<u64> {
    let mut counts = vec![0u64; structure.cell_count()];
    for p in batch.iter() {
        if let Some(i) = structure.locate(p) {
            counts[i] += 1;
        }
    }
    counts
}

/// Chi-square of the cell occupancy against the cell masses.
pub fn occupancy_chi_square(structure: &dyn DensityStructure, batch: &SampleBatch) -> Result<ChiSquare> {
    let counts = occupancy(structure, batch);
    let n = batch.len() as f64;
    let cum = structure.cum_mass();
    let expected: Vec<f64> = cum
        .iter()
        .enumerate()
        .map(|(i, c)| n * (c - if i == 0 { 0.0 } else { cum[i - 1] }))
        .collect();
    chi_square(&counts, &expected)
}

/// Summary printed after a sampling run.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsReport {
    pub n: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub interpolant_mean: Vec<f64>,
    pub interpolant_variance: Vec<f64>,
    /// `(D, p)`; one-dimensional structures only.
    pub ks: Option<(f64, f64)>,
    pub chi_square: Option<ChiSquare>,
    pub pdf_evaluations: u64,
    pub build_seconds: f64,
    pub sample_seconds: f64,
}

impl StatsReport {
    pub fn compute(
        structure: &dyn DensityStructure,
        batch: &SampleBatch,
        build_seconds: f64,
        sample_seconds: f64,
    ) -> Result<Self> {
        let (mean, variance) = sample_moments(batch);
        let (interpolant_mean, interpolant_variance) = interpolant_moments(structure)?;
        let ks = if structure.dim() == 1 {
            let cdf = InterpolantCdf::new(structure)?;
            let d = ks_statistic(batch.points(), |x| cdf.eval(x));
            Some((d, kolmogorov_sf((batch.len() as f64).sqrt() * d)))
        } else {
            None
        };
        Ok(StatsReport {
            n: batch.len(),
            mean,
            variance,
            interpolant_mean,
            interpolant_variance,
            ks,
            chi_square: occupancy_chi_square(structure, batch).ok(),
            pdf_evaluations: structure.pdf_evaluations(),
            build_seconds,
            sample_seconds,
        })
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(",");
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "mean = {}", list(&self.mean))?;
        writeln!(f, "variance = {}", list(&self.variance))?;
        writeln!(f, "interpolant_mean = {}", list(&self.interpolant_mean))?;
        writeln!(f, "interpolant_variance = {}", list(&self.interpolant_variance))?;
        if let Some((d, p)) = self.ks {
            writeln!(f, "ks_statistic = {d:.6e}")?;
            writeln!(f, "ks_p_value = {p:.6e}")?;
        }
        if let Some(c) = &self.chi_square {
            writeln!(f, "chi_square = {:.6e}", c.statistic)?;
            writeln!(f, "chi_square_dof = {}", c.dof)?;
            writeln!(f, "chi_square_p_value = {:.6e}", c.p_value)?;
        }
        writeln!(f, "pdf_evaluations = {}", self.pdf_evaluations)?;
        writeln!(f, "build_seconds = {:.6}", self.build_seconds)?;
        write!(f, "sample_seconds = {:.6}", self.sample_seconds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{LintSampler, VariateStream};

    fn tent() -> DensityGrid {
        DensityGrid::from_vertex_densities(vec![vec![0.0, 1.0, 3.0]], vec![0.0, 2.0, 0.0]).unwrap()
    }

    #[test]
    fn cdf_examples() {
        let unit = DensityGrid::from_vertex_densities(vec![vec![0.0, 1.0]], vec![1.0, 1.0]).unwrap();
        assert_eq!(exact_interpolant_cdf(&unit, 0.5).unwrap(), 0.5);
        let g = tent();
        assert!((exact_interpolant_cdf(&g, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((exact_interpolant_cdf(&g, 0.5).unwrap() - 0.25 / 3.0).abs() < 1e-15);
        assert_eq!(exact_interpolant_cdf(&g, -1.0).unwrap(), 0.0);
        assert_eq!(exact_interpolant_cdf(&g, 3.0).unwrap(), 1.0);
        assert_eq!(exact_interpolant_cdf(&g, 9.0).unwrap(), 1.0);
        let two_d = DensityGrid::from_vertex_densities(vec![vec![0.0, 1.0]; 2], vec![1.0; 4]).unwrap();
        assert!(exact_interpolant_cdf(&two_d, 0.5).is_err());
    }

    #[test]
    fn moments_of_tent() {
        // Triangle on [0, 3] with mode 1: mean 4/3, variance (9 + 0 + 1 - 0 - 0 - 3) / 18.
        let (m, v) = interpolant_moments(&tent()).unwrap();
        assert!((m[0] - 4.0 / 3.0).abs() < 1e-14);
        assert!((v[0] - 7.0 / 18.0).abs() < 1e-14);
    }

    #[test]
    fn moments_of_bilinear_cell() {
        // f(x, y) = x on the unit square: x marginal 2x, y marginal uniform.
        let g = DensityGrid::from_vertex_densities(vec![vec![0.0, 1.0]; 2], vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let (m, v) = interpolant_moments(&g).unwrap();
        assert!((m[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((v[0] - 1.0 / 18.0).abs() < 1e-15);
        assert!((m[1] - 0.5).abs() < 1e-15);
        assert!((v[1] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Reference values of the limiting distribution.
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 2e-4);
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 2e-4);
        assert!((kolmogorov_sf(0.5) - 0.9639).abs() < 2e-4);
        assert!((kolmogorov_sf(0.25) - 1.0).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        // Both branches agree where they meet.
        let below = kolmogorov_sf(0.3 - 1e-12);
        assert!((below - kolmogorov_sf(0.3)).abs() < 1e-9);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn chi_square_pooling() {
        let c = chi_square(&[10, 10, 1, 1, 1], &[10.0, 10.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(c.bins, 2);
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.p_value, 1.0);
        let c = chi_square(&[30, 10], &[20.0, 20.0]).unwrap();
        assert!((c.statistic - 10.0).abs() < 1e-12);
        assert!((c.p_value - 0.001565).abs() < 1e-5);
        assert!(chi_square(&[1], &[1.0]).is_err());
        assert!(chi_square(&[1, 2], &[1.0]).is_err());
    }

    #[test]
    fn report_fields() {
        let mut s = LintSampler::new(tent(), VariateStream::pseudorandom(2, 3).unwrap()).unwrap();
        let batch = s.sample(20_000).unwrap();
        let r = StatsReport::compute(&tent(), &batch, 0.0, 0.0).unwrap();
        assert_eq!(r.n, 20_000);
        let (d, p) = r.ks.unwrap();
        assert!(d * (20_000f64).sqrt() < KS_CRITICAL_1PCT);
        assert!(p > 0.0);
        assert_eq!(r.chi_square.as_ref().unwrap().dof, 1);
        let text = r.to_string();
        assert!(text.contains("ks_statistic = "));
        assert!(text.lines().all(|l| l.contains(" = ")));
    }
}
