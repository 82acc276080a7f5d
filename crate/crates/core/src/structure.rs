//! The contract shared by every domain-spanning structure.

use std::fmt;

use crate::{Cell, Result};

/// A partition of a box into cells with known interpolant masses.
///
/// Implementors expose a cumulative mass table normalized to end at exactly
/// `1.0`; the sampler picks cell `i` with probability
/// `cum_mass[i] - cum_mass[i - 1]`. Grids and trees implement this, and
/// user types can too: only [`DensityStructure::cell`] and the accessors
/// are required.
pub trait DensityStructure: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Unnormalized integral of the interpolant over the whole structure.
    fn total_mass(&self) -> f64;

    /// Bounding box as `(lo, hi)`.
    fn extent(&self) -> (&[f64], &[f64]);

    fn cum_mass(&self) -> &[f64];

    fn cell_count(&self) -> usize {
        self.cum_mass().len()
    }

    fn cell(&self, index: usize) -> Result<Cell>;

    /// Writes cell `index` into an existing buffer, avoiding allocation on
    /// the sampling hot path.
    fn load_cell(&self, index: usize, cell: &mut Cell) -> Result<()> {
        *cell = self.cell(index)?;
        Ok(())
    }

    /// Index of the cell picked by the uniform variate `u0`.
    fn choose_cell(&self, u0: f64) -> usize {
        choose_index(self.cum_mass(), u0)
    }

    /// Index of a cell containing `x`, if any.
    fn locate(&self, x: &[f64]) -> Option<usize> {
        (0..self.cell_count()).find(|&i| {
            self.cell(i).is_ok_and(|c| {
                x.iter()
                    .zip(c.lo().iter().zip(c.hi()))
                    .all(|(v, (l, h))| *v >= *l && *v <= *h)
            })
        })
    }

    /// Stable digest of the geometry and vertex densities.
    fn fingerprint(&self) -> u64;

    /// Number of density evaluations spent building the structure.
    fn pdf_evaluations(&self) -> u64;
}

/// Smallest `i` with `cum[i] > u`, clamped to the last index.
pub fn choose_index(cum: &[f64], u: f64) -> usize {
    let i = cum.partition_point(|&c| c <= u);
    i.min(cum.len().saturating_sub(1))
}

/// Turns non-negative masses into a normalized cumulative table.
///
/// Returns the table and the total; the last entry is exactly `1.0`.
pub(crate) fn cumulative(masses: &[f64]) -> (Vec<f64>, f64) {
    let mut running = 0.0;
    let mut cum: Vec<f64> = masses
        .iter()
        .map(|m| {
            running += m;
            running
        })
        .collect();
    let total = running;
    if total > 0.0 {
        for c in &mut cum {
            *c /= total;
        }
        if let Some(last) = cum.last_mut() {
            *last = 1.0;
        }
    }
    (cum, total)
}
