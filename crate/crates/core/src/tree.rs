//! Adaptive `2^k`-ary trees of density cells.
//!
//! The root box is first split uniformly down to `min_depth`. After that the
//! leaf with the largest error estimate is bisected in every dimension until
//! the summed estimate drops below `tol_rel * total_mass` or a budget runs
//! out. A leaf's estimate is
//!
//! ```text
//! err = |f(center) - interpolant(center)| * volume
//! ```
//!
//! which costs one extra density evaluation per leaf. Leaf masses use the
//! corner values only, so sampling draws from exactly the piecewise
//! multilinear interpolant over the leaves.
//!
//! All density values go through one cache keyed on the exact bit patterns
//! of the coordinates: corners shared between neighbours, and a parent's
//! center that becomes its children's common corner, are evaluated once.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::cell::mean;
use crate::digest::Fingerprint;
use crate::structure::{cumulative, DensityStructure};
use crate::{Cell, Error, Limits, Pdf, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeConfig {
    /// Target for `sum(err) / total_mass`.
    pub tol_rel: f64,
    pub max_depth: u32,
    pub max_leaves: usize,
    /// Depth of the initial uniform refinement.
    pub min_depth: u32,
    pub limits: Limits,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            tol_rel: 1e-3,
            max_depth: 24,
            max_leaves: 1 << 16,
            min_depth: 2,
            limits: Limits::default(),
        }
    }
}

/// Outcome of construction: whether the tolerance was met, and the achieved
/// `sum(err) / total_mass` either way.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TreeStatus {
    Converged { achieved: f64 },
    ToleranceUnreached { achieved: f64 },
}

impl TreeStatus {
    pub fn achieved(&self) -> f64 {
        match *self {
            TreeStatus::Converged { achieved } | TreeStatus::ToleranceUnreached { achieved } => {
                achieved
            }
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, TreeStatus::Converged { .. })
    }
}

impl fmt::Display for TreeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeStatus::Converged { achieved } => {
                write!(f, "tolerance reached: sum(err)/mass = {achieved:e}")
            }
            TreeStatus::ToleranceUnreached { achieved } => write!(
                f,
                "warning: tolerance not reached, refinement budget exhausted: sum(err)/mass = {achieved:e}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub cell: Cell,
    pub depth: u32,
    pub err: f64,
}

/// What a single split did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitOutcome {
    /// Vertex positions of the children that were not corners of the parent
    /// (`3^k - 2^k`).
    pub new_vertex_positions: usize,
    /// Density evaluations actually spent, after cache hits, including the
    /// children's center probes.
    pub evaluations: u64,
}

#[derive(Clone, Debug)]
struct Node {
    cell: Cell,
    depth: u32,
    err: f64,
    /// Child index taken at each level from the root; orders leaves depth-first.
    path: Vec<u16>,
    children: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
struct Candidate {
    err: f64,
    path: Vec<u16>,
    node: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.path.cmp(&self.path))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An adaptively refined tree whose leaves are density cells.
#[derive(Clone)]
pub struct DensityTree {
    lo: Vec<f64>,
    hi: Vec<f64>,
    config: TreeConfig,
    nodes: Vec<Node>,
    /// Whether `nodes[0]` is a root whose descendants tile the box.
    hierarchical: bool,
    leaf_ids: Vec<usize>,
    cum_mass: Vec<f64>,
    total_mass: f64,
    err_sum: f64,
    status: TreeStatus,
    pdf: Option<Arc<dyn Pdf>>,
    cache: HashMap<Vec<u64>, f64>,
    heap: BinaryHeap<Candidate>,
    evaluations: u64,
    splits: u64,
}

impl fmt::Debug for DensityTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityTree")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("leaves", &self.leaf_ids.len())
            .field("total_mass", &self.total_mass)
            .field("status", &self.status)
            .field("evaluations", &self.evaluations)
            .finish()
    }
}

impl DensityTree {
    pub fn build<P: Pdf + 'static>(
        lo: Vec<f64>,
        hi: Vec<f64>,
        pdf: P,
        config: TreeConfig,
    ) -> Result<Self> {
        Self::build_shared(lo, hi, Arc::new(pdf), config)
    }

    pub fn build_shared(
        lo: Vec<f64>,
        hi: Vec<f64>,
        pdf: Arc<dyn Pdf>,
        config: TreeConfig,
    ) -> Result<Self> {
        let k = lo.len();
        config.limits.check_dim(k)?;
        if hi.len() != k {
            return Err(Error::InvalidBox(format!(
                "lo has {k} coordinates but hi has {}",
                hi.len()
            )));
        }
        if let Some(d) = (0..k).find(|&d| !(lo[d].is_finite() && hi[d].is_finite() && hi[d] > lo[d])) {
            return Err(Error::InvalidBox(format!(
                "dimension {d} has bounds [{}, {}]",
                lo[d], hi[d]
            )));
        }
        if !(config.tol_rel > 0.0 && config.tol_rel.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                config.tol_rel
            )));
        }
        if config.min_depth > config.max_depth {
            return Err(Error::InvalidParameter(format!(
                "min depth {} exceeds max depth {}",
                config.min_depth, config.max_depth
            )));
        }
        let initial = k as u64 * config.min_depth as u64;
        if initial >= 63 || (1u64 << initial) > config.max_leaves as u64 {
            return Err(Error::InvalidParameter(format!(
                "uniform refinement to depth {} needs 2^{initial} leaves, above the limit of {}",
                config.min_depth, config.max_leaves
            )));
        }

        let mut tree = DensityTree {
            lo: lo.clone(),
            hi: hi.clone(),
            config,
            nodes: Vec::new(),
            hierarchical: true,
            leaf_ids: Vec::new(),
            cum_mass: Vec::new(),
            total_mass: 0.0,
            err_sum: 0.0,
            status: TreeStatus::Converged { achieved: 0.0 },
            pdf: Some(pdf),
            cache: HashMap::new(),
            heap: BinaryHeap::new(),
            evaluations: 0,
            splits: 0,
        };

        let mut points: Vec<Vec<f64>> = (0..1usize << k)
            .map(|c| {
                (0..k)
                    .map(|d| if c >> d & 1 == 1 { hi[d] } else { lo[d] })
                    .collect()
            })
            .collect();
        points.push(lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect());
        let values = tree.values(&points)?;
        let root = Cell::from_parts(lo, hi, values[..1 << k].to_vec());
        tree.push_node(root, 0, values[1 << k], Vec::new());

        // Uniform refinement, level by level in leaf order.
        for _ in 0..config.min_depth {
            let level: Vec<usize> = tree
                .dfs_leaves()
                .into_iter()
                .filter(|&n| tree.nodes[n].depth < config.min_depth)
                .collect();
            for n in level {
                tree.split_node(n)?;
            }
        }
        tree.grow(Some(config.tol_rel), None, true)?;
        tree.finalize()?;
        Ok(tree)
    }

    /// Rebuilds a tree from a flat list of leaves, e.g. a parsed dump.
    ///
    /// The result can be sampled but not refined.
    pub fn from_leaves(leaves: Vec<Leaf>) -> Result<Self> {
        Self::from_leaves_with_limits(leaves, &Limits::default())
    }

    pub fn from_leaves_with_limits(leaves: Vec<Leaf>, limits: &Limits) -> Result<Self> {
        let first = leaves
            .first()
            .ok_or_else(|| Error::Format("tree has no leaves".into()))?;
        let k = first.cell.dim();
        limits.check_dim(k)?;
        let mut lo = first.cell.lo().to_vec();
        let mut hi = first.cell.hi().to_vec();
        let mut volume = 0.0;
        for (i, leaf) in leaves.iter().enumerate() {
            if leaf.cell.dim() != k {
                return Err(Error::Format(format!(
                    "leaf {i} has dimension {}, expected {k}",
                    leaf.cell.dim()
                )));
            }
            if !(leaf.err.is_finite() && leaf.err >= 0.0) {
                return Err(Error::Format(format!("leaf {i} has error estimate {}", leaf.err)));
            }
            for d in 0..k {
                lo[d] = lo[d].min(leaf.cell.lo()[d]);
                hi[d] = hi[d].max(leaf.cell.hi()[d]);
            }
            volume += leaf.cell.volume();
        }
        let root_volume: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
        if !((volume - root_volume).abs() <= 1e-9 * root_volume) {
            return Err(Error::Format(format!(
                "leaves cover volume {volume} but their bounding box has volume {root_volume}"
            )));
        }
        let nodes: Vec<Node> = leaves
            .into_iter()
            .map(|l| Node {
                cell: l.cell,
                depth: l.depth,
                err: l.err,
                path: Vec::new(),
                children: None,
            })
            .collect();
        let max_depth = nodes.iter().map(|n| n.depth).max().unwrap_or(0);
        let mut tree = DensityTree {
            lo,
            hi,
            config: TreeConfig {
                max_depth,
                max_leaves: nodes.len(),
                min_depth: 0,
                limits: *limits,
                ..TreeConfig::default()
            },
            leaf_ids: (0..nodes.len()).collect(),
            nodes,
            hierarchical: false,
            cum_mass: Vec::new(),
            total_mass: 0.0,
            err_sum: 0.0,
            status: TreeStatus::Converged { achieved: 0.0 },
            pdf: None,
            cache: HashMap::new(),
            heap: BinaryHeap::new(),
            evaluations: 0,
            splits: 0,
        };
        tree.finalize_tables()?;
        Ok(tree)
    }

    /// Performs up to `extra_budget` further largest-error-first splits.
    ///
    /// Ignores the tolerance and `max_leaves`; stops early only when every
    /// remaining leaf has zero error or sits at `max_depth`. Returns the
    /// number of splits performed.
    pub fn refine(&mut self, extra_budget: usize) -> Result<usize> {
        if extra_budget == 0 {
            return Ok(0);
        }
        if self.pdf.is_none() {
            return Err(Error::NoPdf);
        }
        let done = self.grow(None, Some(extra_budget), false)?;
        self.finalize()?;
        Ok(done)
    }

    /// Splits the leaf at position `leaf_index` of the leaf order.
    pub fn split_leaf(&mut self, leaf_index: usize) -> Result<SplitOutcome> {
        let node = *self.leaf_ids.get(leaf_index).ok_or(Error::IndexOutOfRange {
            index: leaf_index,
            len: self.leaf_ids.len(),
        })?;
        if self.pdf.is_none() {
            return Err(Error::NoPdf);
        }
        let outcome = self.split_node(node)?;
        self.finalize()?;
        Ok(outcome)
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    pub fn status(&self) -> TreeStatus {
        self.status
    }

    /// Sum of leaf error estimates.
    pub fn err_sum(&self) -> f64 {
        self.err_sum
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_ids.len()
    }

    pub fn leaf(&self, index: usize) -> Option<Leaf> {
        self.leaf_ids.get(index).map(|&n| {
            let node = &self.nodes[n];
            Leaf {
                cell: node.cell.clone(),
                depth: node.depth,
                err: node.err,
            }
        })
    }

    pub fn leaves(&self) -> impl Iterator<Item = Leaf> + '_ {
        (0..self.leaf_count()).filter_map(|i| self.leaf(i))
    }

    /// Number of splits performed since construction began.
    pub fn splits(&self) -> u64 {
        self.splits
    }

    /// Writes the leaves depth-first, one per line:
    /// `depth lo.. hi.. corners.. err`.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# lintsampler tree dim={} leaves={}",
            self.lo.len(),
            self.leaf_count()
        )?;
        for leaf in self.leaves() {
            let mut line = leaf.depth.to_string();
            let c = &leaf.cell;
            for v in c.lo().iter().chain(c.hi()).chain(c.corners()).chain([&leaf.err]) {
                line.push(' ');
                line.push_str(&format!("{v:?}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn dump_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dump(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ASCII")
    }

    fn push_node(&mut self, cell: Cell, depth: u32, center: f64, path: Vec<u16>) -> usize {
        let err = (center - mean(cell.corners())).abs() * cell.volume();
        let id = self.nodes.len();
        if depth < self.config.max_depth {
            self.heap.push(Candidate {
                err,
                path: path.clone(),
                node: id,
            });
        }
        self.nodes.push(Node {
            cell,
            depth,
            err,
            path,
            children: None,
        });
        id
    }

    /// Density values at `points`, evaluating cache misses in one batch.
    fn values(&mut self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        let k = self.lo.len();
        let keys: Vec<Vec<u64>> = points
            .iter()
            .map(|p| p.iter().map(|v| (v + 0.0).to_bits()).collect())
            .collect();
        let mut missing: Vec<usize> = Vec::new();
        let mut seen = HashSet::new();
        for (i, key) in keys.iter().enumerate() {
            if !self.cache.contains_key(key) && seen.insert(key) {
                missing.push(i);
            }
        }
        if !missing.is_empty() {
            let pdf = self.pdf.as_ref().ok_or(Error::NoPdf)?;
            let flat: Vec<f64> = missing.iter().flat_map(|&i| points[i].iter().copied()).collect();
            let mut out = vec![0.0; missing.len()];
            pdf.evaluate(&flat, k, &mut out);
            self.evaluations += missing.len() as u64;
            for (&i, &v) in missing.iter().zip(&out) {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::NegativeDensity {
                        coords: points[i].clone(),
                        value: v,
                    });
                }
                self.cache.insert(keys[i].clone(), v);
            }
        }
        Ok(keys.iter().map(|key| self.cache[key]).collect())
    }

    fn split_node(&mut self, id: usize) -> Result<SplitOutcome> {
        let node = &self.nodes[id];
        if node.children.is_some() {
            return Err(Error::InvalidParameter(format!("node {id} is not a leaf")));
        }
        if node.depth >= self.config.max_depth {
            return Err(Error::DepthLimit {
                depth: node.depth,
                max_depth: self.config.max_depth,
            });
        }
        let k = node.cell.dim();
        let lo = node.cell.lo().to_vec();
        let hi = node.cell.hi().to_vec();
        let depth = node.depth;
        let path = node.path.clone();
        let mid: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
        let n_grid = 3usize.pow(k as u32);
        let n_child = 1usize << k;

        // Lattice points in base-3 order (digit d: 0 = lo, 1 = mid, 2 = hi),
        // followed by the children's centers.
        let mut points = Vec::with_capacity(n_grid + n_child);
        for q in 0..n_grid {
            let mut rem = q;
            let p: Vec<f64> = (0..k)
                .map(|d| {
                    let digit = rem % 3;
                    rem /= 3;
                    [lo[d], mid[d], hi[d]][digit]
                })
                .collect();
            points.push(p);
        }
        let child_boxes: Vec<(Vec<f64>, Vec<f64>)> = (0..n_child)
            .map(|c| {
                let clo = (0..k).map(|d| if c >> d & 1 == 1 { mid[d] } else { lo[d] }).collect();
                let chi = (0..k).map(|d| if c >> d & 1 == 1 { hi[d] } else { mid[d] }).collect();
                (clo, chi)
            })
            .collect();
        for (clo, chi) in &child_boxes {
            points.push(clo.iter().zip(chi).map(|(l, h)| 0.5 * (l + h)).collect());
        }

        let before = self.evaluations;
        let values = self.values(&points)?;

        let parent_err = self.nodes[id].err;
        let parent_mass = self.nodes[id].cell.mass();
        let mut children = Vec::with_capacity(n_child);
        for (c, (clo, chi)) in child_boxes.into_iter().enumerate() {
            let corners: Vec<f64> = (0..n_child)
                .map(|q| {
                    let mut idx = 0;
                    let mut pow = 1;
                    for d in 0..k {
                        idx += ((c >> d & 1) + (q >> d & 1)) * pow;
                        pow *= 3;
                    }
                    values[idx]
                })
                .collect();
            let cell = Cell::from_parts(clo, chi, corners);
            let mut child_path = path.clone();
            child_path.push(c as u16);
            let child = self.push_node(cell, depth + 1, values[n_grid + c], child_path);
            self.err_sum += self.nodes[child].err;
            self.total_mass += self.nodes[child].cell.mass();
            children.push(child);
        }
        self.err_sum -= parent_err;
        self.total_mass -= parent_mass;
        self.nodes[id].children = Some(children);
        self.splits += 1;
        Ok(SplitOutcome {
            new_vertex_positions: n_grid - n_child,
            evaluations: self.evaluations - before,
        })
    }

    /// Largest-error-first splitting. Returns the number of splits.
    fn grow(&mut self, tol: Option<f64>, budget: Option<usize>, cap_leaves: bool) -> Result<usize> {
        let k = self.lo.len();
        let per_split = (1usize << k) - 1;
        let mut leaves = self.dfs_leaves().len();
        self.resum();
        let mut done = 0;
        loop {
            if budget.is_some_and(|b| done >= b) {
                break;
            }
            if cap_leaves && leaves + per_split > self.config.max_leaves {
                break;
            }
            if let Some(tol) = tol {
                if self.err_sum <= tol * self.total_mass {
                    // Re-sum to shed accumulated rounding before stopping.
                    self.resum();
                    if self.err_sum <= tol * self.total_mass {
                        break;
                    }
                }
            }
            let Some(top) = self.heap.pop() else { break };
            if self.nodes[top.node].children.is_some() {
                continue;
            }
            if !(top.err > 0.0) {
                self.heap.push(top);
                break;
            }
            self.split_node(top.node)?;
            leaves += per_split;
            done += 1;
        }
        Ok(done)
    }

    fn resum(&mut self) {
        let ids = self.dfs_leaves();
        self.err_sum = ids.iter().map(|&n| self.nodes[n].err).sum();
        self.total_mass = ids.iter().map(|&n| self.nodes[n].cell.mass()).sum();
    }

    fn dfs_leaves(&self) -> Vec<usize> {
        if !self.hierarchical {
            return self.leaf_ids.clone();
        }
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(n) = stack.pop() {
            match &self.nodes[n].children {
                Some(ch) => stack.extend(ch.iter().rev()),
                None => out.push(n),
            }
        }
        out
    }

    fn finalize(&mut self) -> Result<()> {
        self.leaf_ids = self.dfs_leaves();
        self.finalize_tables()
    }

    fn finalize_tables(&mut self) -> Result<()> {
        let masses: Vec<f64> = self.leaf_ids.iter().map(|&n| self.nodes[n].cell.mass()).collect();
        let (cum, total) = cumulative(&masses);
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        self.cum_mass = cum;
        self.total_mass = total;
        self.err_sum = self.leaf_ids.iter().map(|&n| self.nodes[n].err).sum();
        let achieved = self.err_sum / total;
        self.status = if achieved <= self.config.tol_rel {
            TreeStatus::Converged { achieved }
        } else {
            TreeStatus::ToleranceUnreached { achieved }
        };
        Ok(())
    }
}

impl DensityStructure for DensityTree {
    fn dim(&self) -> usize {
        self.lo.len()
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
        self.leaf_ids
            .get(index)
            .map(|&n| self.nodes[n].cell.clone())
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.leaf_ids.len(),
            })
    }

    fn load_cell(&self, index: usize, cell: &mut Cell) -> Result<()> {
        let &n = self.leaf_ids.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.leaf_ids.len(),
        })?;
        cell.clone_from(&self.nodes[n].cell);
        Ok(())
    }

    fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.lo.len() {
            return None;
        }
        let inside = |c: &Cell| {
            x.iter()
                .zip(c.lo().iter().zip(c.hi()))
                .all(|(v, (l, h))| *v >= *l && *v <= *h)
        };
        if !self.hierarchical {
            return self
                .leaf_ids
                .iter()
                .position(|&n| inside(&self.nodes[n].cell));
        }
        if !inside(&self.nodes[0].cell) {
            return None;
        }
        let mut n = 0;
        while let Some(ch) = &self.nodes[n].children {
            let c = &self.nodes[n].cell;
            let mask = (0..x.len())
                .filter(|&d| x[d] >= 0.5 * (c.lo()[d] + c.hi()[d]))
                .fold(0, |m, d| m | 1 << d);
            n = ch[mask];
        }
        self.leaf_ids.iter().position(|&id| id == n)
    }

    fn fingerprint(&self) -> u64 {
        let mut f = Fingerprint::new("lintsampler.tree");
        f.u64(self.lo.len() as u64);
        for &n in &self.leaf_ids {
            let c = &self.nodes[n].cell;
            f.f64s(c.lo()).f64s(c.hi()).f64s(c.corners());
        }
        f.finish()
    }

    fn pdf_evaluations(&self) -> u64 {
        self.evaluations
    }
}

/// Parses the text written by [`DensityTree::write_dump`].
pub fn parse_dump(text: &str) -> Result<Vec<Leaf>> {
    parse_dump_with_limits(text, &Limits::default())
}

pub fn parse_dump_with_limits(text: &str, limits: &Limits) -> Result<Vec<Leaf>> {
    let max_dim = limits.max_dim.min(20);
    let mut dim: Option<usize> = None;
    let mut leaves = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let k = match dim {
            Some(k) => k,
            None => {
                let k = (1..=max_dim)
                    .find(|&k| 2 + 2 * k + (1 << k) == fields.len())
                    .ok_or_else(|| {
                        Error::Format(format!(
                            "line {}: {} fields do not match any dimension",
                            lineno + 1,
                            fields.len()
                        ))
                    })?;
                dim = Some(k);
                k
            }
        };
        if fields.len() != 2 + 2 * k + (1 << k) {
            return Err(Error::Format(format!(
                "line {}: expected {} fields, found {}",
                lineno + 1,
                2 + 2 * k + (1 << k),
                fields.len()
            )));
        }
        let depth: u32 = fields[0]
            .parse()
            .map_err(|e| Error::Format(format!("line {}: depth: {e}", lineno + 1)))?;
        let nums: Vec<f64> = fields[1..]
            .iter()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        let lo = nums[..k].to_vec();
        let hi = nums[k..2 * k].to_vec();
        let corners = nums[2 * k..2 * k + (1 << k)].to_vec();
        let err = nums[nums.len() - 1];
        if !(err.is_finite() && err >= 0.0) {
            return Err(Error::Format(format!(
                "line {}: error estimate {err} is not finite and non-negative",
                lineno + 1
            )));
        }
        let cell = Cell::with_limits(lo, hi, corners, limits)
            .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        leaves.push(Leaf { cell, depth, err });
    }
    if leaves.is_empty() {
        return Err(Error::Format("tree dump has no leaves".into()));
    }
    Ok(leaves)
}
