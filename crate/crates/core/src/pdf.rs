//! Density callbacks.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// A target density, evaluated in batches.
///
/// `points` is a row-major `B x dim` array and `out` has length `B`. Values
/// may be unnormalized but must be finite and non-negative wherever the
/// structure places vertices.
pub trait Pdf: Send + Sync {
    fn evaluate(&self, points: &[f64], dim: usize, out: &mut [f64]);
}

impl<P: Pdf + ?Sized> Pdf for &P {
    fn evaluate(&self, points: &[f64], dim: usize, out: &mut [f64]) {
        (**self).evaluate(points, dim, out)
    }
}

impl<P: Pdf + ?Sized> Pdf for Box<P> {
    fn evaluate(&self, points: &[f64], dim: usize, out: &mut [f64]) {
        (**self).evaluate(points, dim, out)
    }
}

impl<P: Pdf + ?Sized> Pdf for Arc<P> {
    fn evaluate(&self, points: &[f64], dim: usize, out: &mut [f64]) {
        (**self).evaluate(points, dim, out)
    }
}

/// Adapts a pointwise closure to the batched [`Pdf`] interface.
#[derive(Clone, Copy, Debug)]
pub struct FnPdf<F>(pub F);

impl<F> Pdf for FnPdf<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn evaluate(&self, points: &[f64], dim: usize, out: &mut [f64]) {
        for (x, o) in points.chunks_exact(dim).zip(out.iter_mut()) {
            *o = (self.0)(x);
        }
    }
}

pub fn pdf_fn<F>(f: F) -> FnPdf<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    FnPdf(f)
}

/// Wraps a density and counts how often it is called.
#[derive(Debug, Default)]
pub struct CountingPdf<P> {
    inner: P,
    points: AtomicU64,
    calls: AtomicU64,
}

impl<P> CountingPdf<P> {
    pub fn new(inner: P) -> Self {
        CountingPdf {
            inner,
            points: AtomicU64::new(0),
            calls: AtomicU64::new(0),
        }
    }

    /// Total number of points evaluated so far.
    pub fn points(&self) -> u64 {
        self.points.load(Ordering::Relaxed)
    }

    /// Number of batched calls so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: Pdf> Pdf for CountingPdf<P> {
    fn evaluate(&self, points: &[f64], dim: usize, out: &mut [f64]) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.points.fetch_add(out.len() as u64, Ordering::Relaxed);
        self.inner.evaluate(points, dim, out)
    }
}
