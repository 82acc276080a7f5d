//! Cartesian grids of density values.

use crate::cell::mean;
use crate::digest::Fingerprint;
use crate::structure::{cumulative, DensityStructure};
use crate::{Cell, Error, Limits, Pdf, Result};

/// A Cartesian grid with the density cached at every vertex.
///
/// Vertex and cell arrays are row-major with dimension 0 varying slowest.
/// Edges need not be evenly spaced.
#[derive(Clone, Debug)]
pub struct DensityGrid {
    edges: Vec<Vec<f64>>,
    vertex_density: Vec<f64>,
    cell_mass: Vec<f64>,
    cum_mass: Vec<f64>,
    total_mass: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cell_strides: Vec<usize>,
    vertex_strides: Vec<usize>,
    /// Flat vertex offset of each corner relative to the cell's lowest corner.
    corner_offsets: Vec<usize>,
    pdf_evaluations: u64,
}

impl DensityGrid {
    /// Evaluates `pdf` once, in a single batch, on every vertex.
    pub fn build<P: Pdf + ?Sized>(edges: Vec<Vec<f64>>, pdf: &P) -> Result<Self> {
        Self::build_with_limits(edges, pdf, &Limits::default())
    }

    pub fn build_with_limits<P: Pdf + ?Sized>(
        edges: Vec<Vec<f64>>,
        pdf: &P,
        limits: &Limits,
    ) -> Result<Self> {
        let count = validate_edges(&edges, limits)?;
        let k = edges.len();
        let strides = vertex_strides(&edges);
        let mut points = vec![0.0; count * k];
        for (v, p) in points.chunks_exact_mut(k).enumerate() {
            write_vertex(&edges, &strides, v, p);
        }
        let mut values = vec![0.0; count];
        pdf.evaluate(&points, k, &mut values);
        let mut grid = Self::assemble(edges, values)?;
        grid.pdf_evaluations = count as u64;
        Ok(grid)
    }

    /// Builds a grid from precomputed vertex densities in row-major order.
    pub fn from_vertex_densities(edges: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        Self::from_vertex_densities_with_limits(edges, values, &Limits::default())
    }

    pub fn from_vertex_densities_with_limits(
        edges: Vec<Vec<f64>>,
        values: Vec<f64>,
        limits: &Limits,
    ) -> Result<Self> {
        let count = validate_edges(&edges, limits)?;
        if values.len() != count {
            return Err(Error::SizeMismatch {
                expected: count,
                found: values.len(),
            });
        }
        Self::assemble(edges, values)
    }

    fn assemble(edges: Vec<Vec<f64>>, vertex_density: Vec<f64>) -> Result<Self> {
        let k = edges.len();
        let v_strides = vertex_strides(&edges);
        if let Some(bad) = vertex_density
            .iter()
            .position(|v| !(v.is_finite() && *v >= 0.0))
        {
            let mut coords = vec![0.0; k];
            write_vertex(&edges, &v_strides, bad, &mut coords);
            return Err(Error::NegativeDensity {
                coords,
                value: vertex_density[bad],
            });
        }

        let cell_shape: Vec<usize> = edges.iter().map(|e| e.len() - 1).collect();
        let mut cell_strides = vec![1; k];
        for d in (0..k.saturating_sub(1)).rev() {
            cell_strides[d] = cell_strides[d + 1] * cell_shape[d + 1];
        }
        let corner_offsets: Vec<usize> = (0..1usize << k)
            .map(|c| (0..k).filter(|d| c >> d & 1 == 1).map(|d| v_strides[d]).sum())
            .collect();

        let n_cells: usize = cell_shape.iter().product();
        let mut cell_mass = Vec::with_capacity(n_cells);
        let mut corners = vec![0.0; 1 << k];
        for i in 0..n_cells {
            let mut base = 0;
            let mut volume = 1.0;
            let mut rem = i;
            for d in 0..k {
                let idx = rem / cell_strides[d];
                rem %= cell_strides[d];
                base += idx * v_strides[d];
                volume *= edges[d][idx + 1] - edges[d][idx];
            }
            for (c, off) in corner_offsets.iter().enumerate() {
                corners[c] = vertex_density[base + off];
            }
            cell_mass.push(volume * mean(&corners));
        }

        let (cum_mass, total_mass) = cumulative(&cell_mass);
        if !(total_mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        let lo = edges.iter().map(|e| e[0]).collect();
        let hi = edges.iter().map(|e| e[e.len() - 1]).collect();
        Ok(DensityGrid {
            edges,
            vertex_density,
            cell_mass,
            cum_mass,
            total_mass,
            lo,
            hi,
            cell_strides,
            vertex_strides: v_strides,
            corner_offsets,
            pdf_evaluations: 0,
        })
    }

    pub fn edges(&self) -> &[Vec<f64>] {
        &self.edges
    }

    pub fn vertex_density(&self) -> &[f64] {
        &self.vertex_density
    }

    pub fn cell_masses(&self) -> &[f64] {
        &self.cell_mass
    }

    /// Number of vertices along each dimension.
    pub fn vertex_shape(&self) -> Vec<usize> {
        self.edges.iter().map(Vec::len).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_density.len()
    }

    /// Domain coordinates of flat vertex index `v`.
    pub fn vertex_coords(&self, v: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.edges.len()];
        write_vertex(&self.edges, &self.vertex_strides, v, &mut out);
        out
    }

    /// Cell `index` with its corner densities; no density re-evaluation.
    pub fn get_cell(&self, index: usize) -> Result<Cell> {
        let mut cell = Cell::scratch(self.edges.len());
        self.fill(index, &mut cell)?;
        Ok(cell)
    }

    fn fill(&self, index: usize, cell: &mut Cell) -> Result<()> {
        if index >= self.cell_mass.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.cell_mass.len(),
            });
        }
        let k = self.edges.len();
        let (lo, hi, corners) = cell.parts_mut();
        lo.resize(k, 0.0);
        hi.resize(k, 0.0);
        corners.resize(1 << k, 0.0);
        let mut base = 0;
        let mut rem = index;
        for d in 0..k {
            let idx = rem / self.cell_strides[d];
            rem %= self.cell_strides[d];
            base += idx * self.vertex_strides[d];
            lo[d] = self.edges[d][idx];
            hi[d] = self.edges[d][idx + 1];
        }
        for (c, off) in self.corner_offsets.iter().enumerate() {
            corners[c] = self.vertex_density[base + off];
        }
        Ok(())
    }
}

impl DensityStructure for DensityGrid {
    fn dim(&self) -> usize {
        self.edges.len()
    }

    fn total_mass(&self) -> f64 {
        self.total_mass
    }

    fn extent(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    fn cum_mass(&self) -> &[f64] {
        &self.cum_mass
    }

    fn cell(&self, index: usize) -> Result<Cell> {
        self.get_cell(index)
    }

    fn load_cell(&self, index: usize, cell: &mut Cell) -> Result<()> {
        self.fill(index, cell)
    }

    fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.edges.len() {
            return None;
        }
        let mut index = 0;
        for (d, (&v, e)) in x.iter().zip(&self.edges).enumerate() {
            if !(v >= e[0] && v <= e[e.len() - 1]) {
                return None;
            }
            let i = e.partition_point(|&b| b <= v).clamp(1, e.len() - 1) - 1;
            index += i * self.cell_strides[d];
        }
        Some(index)
    }

    fn fingerprint(&self) -> u64 {
        let mut f = Fingerprint::new("lintsampler.grid");
        f.u64(self.edges.len() as u64);
        for e in &self.edges {
            f.f64s(e);
        }
        f.f64s(&self.vertex_density);
        f.finish()
    }

    fn pdf_evaluations(&self) -> u64 {
        self.pdf_evaluations
    }
}

/// Checks edge arrays and returns the total vertex count.
pub(crate) fn validate_edges(edges: &[Vec<f64>], limits: &Limits) -> Result<usize> {
    limits.check_dim(edges.len())?;
    let mut count: u128 = 1;
    for (d, e) in edges.iter().enumerate() {
        if e.len() < 2 {
            return Err(Error::InvalidEdges {
                dim: d,
                reason: format!("need at least 2 edges, got {}", e.len()),
            });
        }
        if let Some(i) = e.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidEdges {
                dim: d,
                reason: format!("edge {i} is {}", e[i]),
            });
        }
        if let Some(i) = e.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidEdges {
                dim: d,
                reason: format!(
                    "edges must be strictly increasing, but edge {} ({}) >= edge {} ({})",
                    i,
                    e[i],
                    i + 1,
                    e[i + 1]
                ),
            });
        }
        count = count.saturating_mul(e.len() as u128);
    }
    if count > limits.max_vertices as u128 {
        return Err(Error::TooManyVertices {
            count,
            max: limits.max_vertices,
        });
    }
    Ok(count as usize)
}

fn vertex_strides(edges: &[Vec<f64>]) -> Vec<usize> {
    let k = edges.len();
    let mut s = vec![1; k];
    for d in (0..k.saturating_sub(1)).rev() {
        s[d] = s[d + 1] * edges[d + 1].len();
    }
    s
}

fn write_vertex(edges: &[Vec<f64>], strides: &[usize], v: usize, out: &mut [f64]) {
    let mut rem = v;
    for d in 0..edges.len() {
        out[d] = edges[d][rem / strides[d]];
        rem %= strides[d];
    }
}
