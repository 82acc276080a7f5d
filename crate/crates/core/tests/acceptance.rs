//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lintsampler::axes::linspace;
use lintsampler::builtin::BuiltinPdf;
use lintsampler::stats::{chi_square, ks_statistic, InterpolantCdf, KS_CRITICAL_1PCT};
use lintsampler::structure::DensityStructure;
use lintsampler::study::qmc_study;
use lintsampler::{
    pdf_fn, Cell, CountingPdf, DensityGrid, DensityTree, LintSampler, StreamKind, TreeConfig,
    VariateStream,
};

type Outcome = Result<String, String>;

fn gmm_grid() -> DensityGrid {
    DensityGrid::build(vec![linspace(-7.0, 7.0, 100).unwrap()], &BuiltinPdf::gmm1d()).unwrap()
}

/// Uniform draws for generating random test inputs.
struct Uniforms(VariateStream);

impl Uniforms {
    fn new(seed: u64) -> Self {
        Uniforms(VariateStream::pseudorandom(1, seed).unwrap())
    }

    fn next(&mut self) -> f64 {
        self.0.next_rows(1).unwrap()[0]
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }

    fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next() * (hi - lo + 1) as f64) as usize
    }
}

fn ac1_usage_example() -> Outcome {
    let start = Instant::now();
    let grid = gmm_grid();
    let batch = LintSampler::new(grid, VariateStream::pseudorandom(2, 42).unwrap())
        .unwrap()
        .sample(10_000)
        .unwrap();
    let elapsed = start.elapsed();
    let mean = batch.points().iter().sum::<f64>() / batch.len() as f64;
    let detail = format!("mean = {mean:.4}, n = {}, runtime = {:.3} s", batch.len(), elapsed.as_secs_f64());
    if (-0.30..=-0.10).contains(&mean) && batch.len() == 10_000 && elapsed < Duration::from_secs(1) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac2_distributional_exactness() -> Outcome {
    let grid = Arc::new(gmm_grid());
    let cdf = InterpolantCdf::new(&*grid).unwrap();
    let n = 100_000;
    let mut passed = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let batch = LintSampler::from_structures(vec![grid.clone()], VariateStream::pseudorandom(2, seed).unwrap())
            .unwrap()
            .sample(n)
            .unwrap();
        let scaled = (n as f64).sqrt() * ks_statistic(batch.points(), |x| cdf.eval(x));
        worst = worst.max(scaled);
        if scaled <= KS_CRITICAL_1PCT {
            passed += 1;
        }
    }
    let detail = format!("{passed}/20 seeds with sqrt(N) D <= {KS_CRITICAL_1PCT}, worst {worst:.3}");
    if passed >= 18 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Tensor-product trapezoid rule over vertex values (dimension 0 slowest).
fn trapezoid(edges: &[Vec<f64>], values: &[f64]) -> f64 {
    let mut total = 0.0;
    for (flat, v) in values.iter().enumerate() {
        let mut rest = flat;
        let mut w = 1.0;
        for e in edges.iter().rev() {
            let i = rest % e.len();
            rest /= e.len();
            let left = if i > 0 { e[i] - e[i - 1] } else { 0.0 };
            let right = if i + 1 < e.len() { e[i + 1] - e[i] } else { 0.0 };
            w *= 0.5 * (left + right);
        }
        total += w * v;
    }
    total
}

fn ac3_mass_conservation() -> Outcome {
    let mut rng = Uniforms::new(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.int(1, 3);
        let edges: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let n = rng.int(2, 12);
                let mut e = vec![rng.range(-10.0, 10.0)];
                for _ in 1..n {
                    let step = rng.range(1e-3, 5.0);
                    e.push(e.last().unwrap() + step);
                }
                e
            })
            .collect();
        let count: usize = edges.iter().map(Vec::len).product();
        let mut values: Vec<f64> = (0..count)
            .map(|_| if rng.next() < 0.2 { 0.0 } else { rng.range(0.0, 100.0) })
            .collect();
        values[0] += 1.0;
        let oracle = trapezoid(&edges, &values);
        let grid = DensityGrid::from_vertex_densities(edges, values).unwrap();
        let mass: f64 = grid.cell_masses().iter().sum();
        worst = worst.max((mass - oracle).abs() / oracle);
    }
    let detail = format!("100 grids, worst relative difference {worst:.2e}");
    if worst <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Multilinear interpolant of `corners` at unit coordinates `t`.
fn multilinear(corners: &[f64], t: &[f64]) -> f64 {
    corners
        .iter()
        .enumerate()
        .map(|(mask, c)| {
            c * t
                .iter()
                .enumerate()
                .map(|(d, td)| if mask >> d & 1 == 1 { *td } else { 1.0 - td })
                .product::<f64>()
        })
        .sum()
}

fn ac4_within_cell_oracle() -> Outcome {
    let mut rng = Uniforms::new(4);
    let n = 1_000_000;
    let mut passed = 0;
    let mut p_values = Vec::new();
    for case in 0..20u64 {
        let k = rng.int(1, 3);
        let lo: Vec<f64> = (0..k).map(|_| rng.range(-3.0, 3.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.range(0.1, 4.0)).collect();
        let corners: Vec<f64> = (0..1 << k).map(|_| rng.range(0.0, 5.0)).collect();
        let cell = Cell::new(lo.clone(), hi.clone(), corners.clone()).unwrap();
        let bins: usize = [0, 50, 12, 6][k];
        // Probability of each bin: the integral of a multilinear function over
        // a box is its volume times the value at the box centre.
        let total_bins = bins.pow(k as u32);
        let mut expected = vec![0.0; total_bins];
        let mut norm = 0.0;
        for (b, e) in expected.iter_mut().enumerate() {
            let mut rest = b;
            let t: Vec<f64> = (0..k)
                .map(|_| {
                    let i = rest % bins;
                    rest /= bins;
                    (i as f64 + 0.5) / bins as f64
                })
                .collect();
            *e = multilinear(&corners, &t);
            norm += *e;
        }
        expected.iter_mut().for_each(|e| *e *= n as f64 / norm);

        let mut stream = VariateStream::pseudorandom(k, 1000 + case).unwrap();
        let mut observed = vec![0u64; total_bins];
        let mut out = vec![0.0; k];
        for row in stream.next_rows(n).unwrap().chunks(k) {
            out.copy_from_slice(&cell.sample(row).unwrap());
            let mut b = 0;
            for d in (0..k).rev() {
                let t = (out[d] - lo[d]) / (hi[d] - lo[d]);
                b = b * bins + ((t * bins as f64) as usize).min(bins - 1);
            }
            observed[b] += 1;
        }
        let p = chi_square(&observed, &expected).unwrap().p_value;
        p_values.push(p);
        if p > 0.01 {
            passed += 1;
        }
    }
    let min_p = p_values.iter().cloned().fold(1.0, f64::min);
    let detail = format!("{passed}/20 cells with p > 0.01, smallest p {min_p:.3e}");
    if passed >= 18 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac5_evaluation_freeze() -> Outcome {
    let pdf = CountingPdf::new(BuiltinPdf::gmm1d());
    let grid = DensityGrid::build(vec![linspace(-7.0, 7.0, 100).unwrap()], &pdf).unwrap();
    let after_build = pdf.points();
    let vertices = grid.vertex_count() as u64;
    let mut sampler = LintSampler::new(grid, VariateStream::pseudorandom(2, 5).unwrap()).unwrap();
    for n in [1, 1000, 1_000_000] {
        sampler.sample(n).unwrap();
    }
    let after_sampling = pdf.points();
    let detail = format!(
        "vertices = {vertices}, after build = {after_build}, after sampling = {after_sampling}, \
         structure counter = {}",
        sampler.pdf_evaluations()
    );
    if after_build == vertices && after_sampling == vertices && sampler.pdf_evaluations() == vertices {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac6_qmc_scaling() -> Outcome {
    let start = Instant::now();
    let ns: Vec<usize> = (8..=14).map(|m| 1usize << m).collect();
    let study = qmc_study(Arc::new(gmm_grid()), &ns, 32, 6).unwrap();
    let elapsed = start.elapsed();
    let detail = format!(
        "slope_qmc = {:.3}, slope_mc = {:.3}, runtime = {:.2} s",
        study.slope_qmc,
        study.slope_mc,
        elapsed.as_secs_f64()
    );
    if study.slope_qmc <= -0.8 && (-0.6..=-0.4).contains(&study.slope_mc) && elapsed < Duration::from_secs(60) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac7_tree_tolerance() -> Outcome {
    let normal = pdf_fn(|x: &[f64]| (-0.5 * x[0] * x[0]).exp() / (2.0 * std::f64::consts::PI).sqrt());
    let config = TreeConfig {
        tol_rel: 1e-3,
        ..TreeConfig::default()
    };
    let mut tree = DensityTree::build(vec![-5.0], vec![5.0], normal, config).unwrap();
    let achieved = tree.err_sum() / tree.total_mass();
    let width = |l: &lintsampler::Leaf| l.cell.hi()[0] - l.cell.lo()[0];
    let near_mode = tree
        .leaves()
        .filter(|l| l.cell.lo()[0] < 0.5 && l.cell.hi()[0] > -0.5)
        .map(|l| width(&l))
        .fold(0.0, f64::max);
    let far = tree
        .leaves()
        .filter(|l| l.cell.lo()[0] >= 4.0 || l.cell.hi()[0] <= -4.0)
        .map(|l| width(&l))
        .fold(f64::INFINITY, f64::min);
    let leaves = tree.leaf_count();
    let start = tree.err_sum();
    let mut monotone = true;
    let mut prev = start;
    for _ in 0..64 {
        tree.refine(1).unwrap();
        monotone &= tree.err_sum() <= prev;
        prev = tree.err_sum();
    }
    let detail = format!(
        "sum(err)/mass = {achieved:.3e} over {leaves} leaves, widest near mode {near_mode:.4}, \
         narrowest beyond |x| = 4 {far:.4}, refine(64) sum(err) {start:.3e} -> {prev:.3e}"
    );
    if achieved <= 1e-3 && tree.status().is_converged() && monotone && prev < start && near_mode < far {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac8_disconnected_domains() -> Outcome {
    let a = DensityGrid::from_vertex_densities(vec![vec![0.0, 1.0]], vec![1.0, 1.0]).unwrap();
    let b = DensityGrid::from_vertex_densities(vec![vec![10.0, 11.0]], vec![3.0, 3.0]).unwrap();
    let structures: Vec<Arc<dyn DensityStructure>> = vec![Arc::new(a), Arc::new(b)];
    let n = 100_000;
    let batch = LintSampler::from_structures(structures, VariateStream::pseudorandom(2, 8).unwrap())
        .unwrap()
        .sample(n)
        .unwrap();
    let frac = batch.points().iter().filter(|x| (10.0..=11.0).contains(*x)).count() as f64 / n as f64;
    let detail = format!("fraction in second grid = {frac:.4}");
    if (frac - 0.75).abs() <= 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac9_linear_cost() -> Outcome {
    let grid = Arc::new(gmm_grid());
    let time = |n: usize| {
        (0..5)
            .map(|rep| {
                let mut s =
                    LintSampler::from_structures(vec![grid.clone()], VariateStream::pseudorandom(2, rep).unwrap())
                        .unwrap();
                let t = Instant::now();
                let b = s.sample(n).unwrap();
                let e = t.elapsed().as_secs_f64();
                std::hint::black_box(b);
                e
            })
            .fold(f64::INFINITY, f64::min)
    };
    // Warm up allocator and caches.
    time(100_000);
    let small = time(100_000);
    let large = time(1_000_000);
    let ratio = large / small;
    let detail = format!("t(1e6) / t(1e5) = {ratio:.2} ({large:.4} s / {small:.4} s, 99 cells)");
    if (6.0..=14.0).contains(&ratio) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ac10_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("lintsampler-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let grid = Arc::new(gmm_grid());
    let mut checked = 0;
    for kind in [StreamKind::Pseudorandom, StreamKind::Sobol, StreamKind::Halton] {
        let stream = VariateStream::new(kind, 2, 10).unwrap();
        let mut files = Vec::new();
        for run in 0..2 {
            let batch = LintSampler::from_structures(vec![grid.clone()], stream.clone())
                .unwrap()
                .sample(10_000)
                .unwrap();
            let csv = dir.join(format!("{kind}-{run}.csv"));
            let raw = dir.join(format!("{kind}-{run}.bin"));
            batch
                .write_csv(std::fs::File::create(&csv).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            batch
                .write_raw(std::fs::File::create(&raw).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            files.push((std::fs::read(csv).unwrap(), std::fs::read(raw).unwrap()));
        }
        if files[0] != files[1] {
            return Err(format!("{kind}: two runs wrote different files"));
        }
        let n = 1_000_000;
        let mut one = Vec::new();
        LintSampler::from_structures(vec![grid.clone()], stream.clone())
            .unwrap()
            .sample(n)
            .unwrap()
            .write_raw(&mut one)
            .unwrap();
        let mut sampler = LintSampler::from_structures(vec![grid.clone()], stream.clone()).unwrap();
        let mut chunked = lintsampler::batch::raw_preamble(1, n as u64);
        for chunk in sampler.sample_streamed(n, 10_000).unwrap() {
            for v in chunk.unwrap().points() {
                chunked.extend_from_slice(&v.to_le_bytes());
            }
        }
        if one != chunked {
            return Err(format!("{kind}: chunked stream differs from one-shot"));
        }
        checked += 1;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!(
        "{checked} stream kinds: repeated runs byte-identical, 1e6 points in 1e4-chunks equal one-shot"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("AC1 usage example", ac1_usage_example),
        ("AC2 distributional exactness", ac2_distributional_exactness),
        ("AC3 mass conservation", ac3_mass_conservation),
        ("AC4 within-cell oracle", ac4_within_cell_oracle),
        ("AC5 pdf evaluation freeze", ac5_evaluation_freeze),
        ("AC6 qmc noise scaling", ac6_qmc_scaling),
        ("AC7 tree tolerance", ac7_tree_tolerance),
        ("AC8 disconnected domains", ac8_disconnected_domains),
        ("AC9 linear sampling cost", ac9_linear_cost),
        ("AC10 determinism", ac10_determinism),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
