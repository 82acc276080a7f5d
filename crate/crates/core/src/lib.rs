//! Linear interpolant sampling.
//!
//! A probability density is evaluated once on the vertices of a grid or an
//! adaptive tree. Between vertices it is replaced by the multilinear
//! interpolant, and samples are drawn exactly from that approximation by
//! two-stage inverse transform sampling: a discrete draw picks a cell with
//! probability proportional to its mass, then a sequence of one-dimensional
//! conditional inversions places the point inside the cell.
//!
//! ```
//! use lintsampler::{axes::linspace, builtin::BuiltinPdf, DensityGrid, LintSampler, VariateStream};
//!
//! let grid = DensityGrid::build(vec![linspace(-7.0, 7.0, 100).unwrap()], &BuiltinPdf::gmm1d()).unwrap();
//! let stream = VariateStream::pseudorandom(2, 42).unwrap();
//! let mut sampler = LintSampler::new(grid, stream).unwrap();
//! let batch = sampler.sample(10_000).unwrap();
//! assert_eq!(batch.len(), 10_000);
//! ```
//!
//! Corner convention used everywhere: the corners of a `k`-dimensional cell
//! are indexed by a bitmask where bit `d` set means the upper edge in
//! dimension `d`, with dimension 0 the least significant bit.

pub mod axes;
pub mod batch;
pub mod builtin;
pub mod cell;
mod digest;
pub mod error;
pub mod grid;
pub mod pdf;
pub mod sampler;
pub mod stats;
pub mod structure;
pub mod study;
pub mod tree;
pub mod variates;
pub mod vertex_file;

pub use batch::{BatchMeta, SampleBatch};
pub use cell::{inverse_linear_cdf, Cell};
pub use error::{Error, Result};
pub use grid::DensityGrid;
pub use pdf::{pdf_fn, CountingPdf, FnPdf, Pdf};
pub use sampler::LintSampler;
pub use structure::DensityStructure;
pub use tree::{DensityTree, Leaf, TreeConfig, TreeStatus};
pub use variates::{StreamKind, VariateStream};

/// Default cap on the number of dimensions.
pub const DIM_MAX: usize = 10;

/// Default cap on the number of vertices a grid may hold.
pub const VERTEX_MAX: usize = 100_000_000;

/// Size limits applied at construction time.
///
/// Vertex count grows exponentially with dimension, so both the
/// dimensionality and the total vertex count are capped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_dim: usize,
    pub max_vertices: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_dim: DIM_MAX,
            max_vertices: VERTEX_MAX,
        }
    }
}

impl Limits {
    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        // Corner bitmasks are usize; 2^k corners must stay addressable.
        let max = self.max_dim.min(30);
        if dim == 0 || dim > max {
            return Err(Error::Dimension { dim, max });
        }
        Ok(())
    }
}
