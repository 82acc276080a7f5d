//! Convergence of the sample mean under pseudorandom and scrambled Sobol variates.

use std::fmt;
use std::sync::Arc;

use crate::stats::interpolant_moments;
use crate::structure::DensityStructure;
use crate::{Error, LintSampler, Result, StreamKind, VariateStream};

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    pub rmse_mc: f64,
    pub rmse_qmc: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QmcStudy {
    pub rows: Vec<StudyRow>,
    pub repeats: usize,
    /// Least-squares slope of `ln rmse` against `ln n`.
    pub slope_mc: f64,
    pub slope_qmc: f64,
}

/// RMSE of the sample mean against the exact interpolant mean.
///
/// Repeat `r` uses seed `seed + r`, both for the pseudorandom stream and
/// as the scramble seed of the Sobol stream. The error of a
/// multi-dimensional mean is the Euclidean norm over dimensions.
pub fn qmc_study(
    structure: Arc<dyn DensityStructure>,
    ns: &[usize],
    repeats: usize,
    seed: u64,
) -> Result<QmcStudy> {
    if ns.len() < 2 || ns.contains(&0) || !ns.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter(
            "need at least two strictly increasing sample sizes".into(),
        ));
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    let (exact, _) = interpolant_moments(&*structure)?;
    let n_max = *ns.last().expect("non-empty");
    let width = structure.dim() + 1;
    let mut sq_mc = vec![0.0; ns.len()];
    let mut sq_qmc = vec![0.0; ns.len()];
    for r in 0..repeats as u64 {
        let s = seed.wrapping_add(r);
        for (kind, acc) in [(StreamKind::Pseudorandom, &mut sq_mc), (StreamKind::Sobol, &mut sq_qmc)] {
            let stream = VariateStream::new(kind, width, s)?;
            let mut sampler = LintSampler::from_structures(vec![structure.clone()], stream)?;
            let batch = sampler.sample(n_max)?;
            // Prefixes of one run equal independent runs of each size.
            let mut sum = vec![0.0; exact.len()];
            let mut next = 0;
            for (i, p) in batch.iter().enumerate() {
                for (s, x) in sum.iter_mut().zip(p) {
                    *s += x;
                }
                if i + 1 == ns[next] {
                    let n = ns[next] as f64;
                    acc[next] += sum.iter().zip(&exact).map(|(s, m)| (s / n - m).powi(2)).sum::<f64>();
                    next += 1;
                }
            }
        }
    }
    let rmse = |sq: &[f64]| -> Vec<f64> { sq.iter().map(|v| (v / repeats as f64).sqrt()).collect() };
    let (mc, qmc) = (rmse(&sq_mc), rmse(&sq_qmc));
    let rows: Vec<StudyRow> = ns
        .iter()
        .zip(mc.iter().zip(&qmc))
        .map(|(&n, (&rmse_mc, &rmse_qmc))| StudyRow { n, rmse_mc, rmse_qmc })
        .collect();
    let log_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let slope = |ys: &[f64]| loglog_slope(&log_n, ys);
    Ok(QmcStudy {
        slope_mc: slope(&mc),
        slope_qmc: slope(&qmc),
        rows,
        repeats,
    })
}

/// Least-squares slope of `ln y` against `x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

impl fmt::Display for QmcStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>10} {:>14} {:>14}", "n", "rmse_mc", "rmse_qmc")?;
        for r in &self.rows {
            writeln!(f, "{:>10} {:>14.6e} {:>14.6e}", r.n, r.rmse_mc, r.rmse_qmc)?;
        }
        writeln!(f, "repeats = {}", self.repeats)?;
        writeln!(f, "slope_mc = {:.4}", self.slope_mc)?;
        write!(f, "slope_qmc = {:.4}", self.slope_qmc)
    }
}
