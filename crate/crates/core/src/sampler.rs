//! End-to-end sampling over one or more density structures.

use std::sync::Arc;

use crate::batch::{BatchMeta, SampleBatch};
use crate::digest::Fingerprint;
use crate::structure::{choose_index, cumulative, DensityStructure};
use crate::{Cell, Error, Result, VariateStream};

/// Rows processed per stream refill.
const BLOCK_ROWS: usize = 4096;

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Draws points from the interpolant of one or more structures.
///
/// Each variate row `(u0, u1..uk)` picks a structure by mass with `u0`,
/// rescales `u0` to pick a cell inside it, then places the point with
/// `u1..uk`. Points come out in stream order.
#[derive(Debug)]
pub struct LintSampler {
    structures: Vec<Arc<dyn DensityStructure>>,
    cum: Vec<f64>,
    total_mass: f64,
    dim: usize,
    stream: VariateStream,
}

impl LintSampler {
    pub fn new<S: DensityStructure + 'static>(structure: S, stream: VariateStream) -> Result<Self> {
        Self::from_structures(vec![Arc::new(structure)], stream)
    }

    pub fn from_structures(
        structures: Vec<Arc<dyn DensityStructure>>,
        stream: VariateStream,
    ) -> Result<Self> {
        let first = structures.first().ok_or(Error::EmptyStructures)?;
        let dim = first.dim();
        if let Some(s) = structures.iter().find(|s| s.dim() != dim) {
            return Err(Error::MixedDimensions(dim, s.dim()));
        }
        if stream.width() != dim + 1 {
            return Err(Error::WidthMismatch {
                expected: dim + 1,
                found: stream.width(),
            });
        }
        let masses: Vec<f64> = structures.iter().map(|s| s.total_mass()).collect();
        let (cum, total_mass) = cumulative(&masses);
        if !(total_mass > 0.0 && total_mass.is_finite()) {
            return Err(Error::ZeroMass);
        }
        Ok(LintSampler {
            structures,
            cum,
            total_mass,
            dim,
            stream,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structures(&self) -> &[Arc<dyn DensityStructure>] {
        &self.structures
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn stream(&self) -> &VariateStream {
        &self.stream
    }

    pub fn stream_mut(&mut self) -> &mut VariateStream {
        &mut self.stream
    }

    /// Digest over every structure's fingerprint, in order.
    pub fn fingerprint(&self) -> u64 {
        if let [only] = self.structures.as_slice() {
            return only.fingerprint();
        }
        let mut fp = Fingerprint::new("lintsampler.sampler");
        fp.u64(self.structures.len() as u64);
        for s in &self.structures {
            fp.u64(s.fingerprint());
        }
        fp.finish()
    }

    /// Total density evaluations spent building all structures.
    pub fn pdf_evaluations(&self) -> u64 {
        self.structures.iter().map(|s| s.pdf_evaluations()).sum()
    }

    /// Draws the next `n` points from the stream.
    pub fn sample(&mut self, n: usize) -> Result<SampleBatch> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        let meta = self.meta(self.stream.position(), n);
        let mut points = vec![0.0; n * self.dim];
        let mut worker = Worker::new(self.dim);
        worker.run(self, &mut self.stream.clone(), &mut points)?;
        self.stream.skip_to(meta.first_row + n as u64);
        Ok(SampleBatch::new(self.dim, points, meta))
    }

    /// Same points as [`LintSampler::sample`], delivered in batches of at
    /// most `chunk` points.
    pub fn sample_streamed(&mut self, n: usize, chunk: usize) -> Result<SampleChunks<'_>> {
        if n == 0 || chunk == 0 {
            return Err(Error::InvalidParameter(
                "sample count and chunk size must be at least 1".into(),
            ));
        }
        Ok(SampleChunks {
            sampler: self,
            remaining: n,
            chunk,
        })
    }

    /// Same points as [`LintSampler::sample`], computed on `threads` threads.
    pub fn sample_parallel(&mut self, n: usize, threads: usize) -> Result<SampleBatch> {
        if threads <= 1 || n < 2 * BLOCK_ROWS {
            return self.sample(n);
        }
        if n == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        let start = self.stream.position();
        let meta = self.meta(start, n);
        let mut points = vec![0.0; n * self.dim];
        let per = n.div_ceil(threads);
        let this = &*self;
        let results: Vec<Result<()>> = std::thread::scope(|scope| {
            let handles: Vec<_> = points
                .chunks_mut(per * this.dim)
                .enumerate()
                .map(|(t, out)| {
                    scope.spawn(move || {
                        let mut stream = this.stream.clone();
                        stream.skip_to(start + (t * per) as u64);
                        Worker::new(this.dim).run(this, &mut stream, out)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampling thread panicked"))
                .collect()
        });
        results.into_iter().collect::<Result<()>>()?;
        self.stream.skip_to(start + n as u64);
        Ok(SampleBatch::new(self.dim, points, meta))
    }

    fn meta(&self, first_row: u64, n: usize) -> BatchMeta {
        BatchMeta {
            seed: self.stream.seed(),
            kind: self.stream.kind(),
            scrambled: self.stream.is_scrambled(),
            fingerprint: self.fingerprint(),
            n: n as u64,
            first_row,
        }
    }

    /// Maps one variate row to a point.
    fn place(&self, row: &[f64], cell: &mut Cell, scratch: &mut Vec<f64>, out: &mut [f64]) -> Result<()> {
        let u0 = row[0];
        let s = choose_index(&self.cum, u0);
        let structure = &self.structures[s];
        let u = if self.structures.len() == 1 {
            u0
        } else {
            let before = if s == 0 { 0.0 } else { self.cum[s - 1] };
            ((u0 - before) / (self.cum[s] - before)).clamp(0.0, BELOW_ONE)
        };
        structure.load_cell(structure.choose_cell(u), cell)?;
        cell.sample_into(&row[1..], out, scratch)
    }
}

struct Worker {
    rows: Vec<f64>,
    cell: Cell,
    scratch: Vec<f64>,
}

impl Worker {
    fn new(dim: usize) -> Self {
        Worker {
            rows: Vec::new(),
            cell: Cell::scratch(dim),
            scratch: Vec::new(),
        }
    }

    fn run(&mut self, sampler: &LintSampler, stream: &mut VariateStream, out: &mut [f64]) -> Result<()> {
        let k = sampler.dim;
        let width = k + 1;
        for block in out.chunks_mut(BLOCK_ROWS * k) {
            let n = block.len() / k;
            self.rows.resize(n * width, 0.0);
            stream.fill_rows(&mut self.rows)?;
            for (row, p) in self.rows.chunks_exact(width).zip(block.chunks_exact_mut(k)) {
                sampler.place(row, &mut self.cell, &mut self.scratch, p)?;
            }
        }
        Ok(())
    }
}

/// Iterator returned by [`LintSampler::sample_streamed`].
pub struct SampleChunks<'a> {
    sampler: &'a mut LintSampler,
    remaining: usize,
    chunk: usize,
}

impl Iterator for SampleChunks<'_> {
    type Item = Result<SampleBatch>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        let n = self.remaining.min(self.chunk);
        let out = self.sampler.sample(n);
        self.remaining = if out.is_ok() { self.remaining - n } else { 0 };
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining.div_ceil(self.chunk);
        (n, Some(n))
    }
}
