use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lintsampler::axes::{parse_domain, parse_edges_text, parse_grid_axes};
use lintsampler::batch::{self, SampleBatch};
use lintsampler::builtin::{parse_param, BuiltinPdf};
use lintsampler::stats::StatsReport;
use lintsampler::structure::DensityStructure;
use lintsampler::study::qmc_study;
use lintsampler::vertex_file::{self, VertexFormat};
use lintsampler::{DensityGrid, DensityTree, Error, LintSampler, StreamKind, TreeConfig, VariateStream};

#[derive(Parser)]
#[command(name = "lintsampler", version, about = "Sample from densities through their linear interpolant")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a grid and draw samples from it.
    Sample {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Build an adaptive tree, optionally dump its leaves, and draw samples.
    Tree {
        #[command(flatten)]
        pdf: PdfArgs,
        /// Root box as lo:hi[,lo:hi...].
        #[arg(long, allow_hyphen_values = true)]
        domain: String,
        /// Target for sum(err) / total mass.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 24)]
        max_depth: u32,
        #[arg(long, default_value_t = 65536)]
        max_leaves: usize,
        /// Depth of the initial uniform refinement.
        #[arg(long, default_value_t = 2)]
        min_depth: u32,
        /// Write the leaves to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Compare the sample-mean error of pseudorandom and scrambled Sobol variates.
    QmcStudy {
        #[command(flatten)]
        grid: GridArgs,
        /// Smallest sample size, as a power of two.
        #[arg(long, default_value_t = 8)]
        min_exp: u32,
        /// Largest sample size, as a power of two.
        #[arg(long, default_value_t = 14)]
        max_exp: u32,
        /// Independent repeats per sample size.
        #[arg(long, default_value_t = 32)]
        repeats: usize,
        /// Statistic whose error is measured.
        #[arg(long, value_enum, default_value_t = Statistic::Mean)]
        statistic: Statistic,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print diagnostics for a sample file, or for freshly drawn samples.
    Stats {
        #[command(flatten)]
        grid: GridArgs,
        /// Sample file (CSV or raw); samples are drawn when absent.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[command(flatten)]
        sampling: SamplingArgs,
    },
    /// Write the vertex densities of a grid to a file.
    DumpGrid {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = DensityFormat::Text)]
        format: DensityFormat,
    },
}

#[derive(Args)]
struct PdfArgs {
    /// Built-in density: gmm1d, doughnut2d, powerlaw1d, gauss_kd or uniform_kd.
    #[arg(long)]
    pdf: Option<String>,
    /// Dimension for the _kd densities.
    #[arg(long)]
    dim: Option<usize>,
    /// Density parameter as key=v1[,v2...]; repeatable.
    #[arg(long = "param", allow_hyphen_values = true)]
    params: Vec<String>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    pdf: PdfArgs,
    /// Uniform axes as lo:hi:n[,lo:hi:n...].
    #[arg(long, allow_hyphen_values = true, conflicts_with = "edges_file")]
    grid: Option<String>,
    /// Edge arrays, one line per dimension.
    #[arg(long)]
    edges_file: Option<PathBuf>,
    /// Precomputed vertex densities, used instead of --pdf.
    #[arg(long, conflicts_with = "pdf")]
    density_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DensityFormat::Text)]
    density_format: DensityFormat,
}

#[derive(Args)]
struct SamplingArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Qmc::None)]
    qmc: Qmc,
    /// Use the plain low-discrepancy sequence instead of a seeded scramble.
    #[arg(long)]
    unscrambled: bool,
    /// Sample file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SampleFormat::Csv)]
    format: SampleFormat,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Qmc {
    None,
    Sobol,
    Halton,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleFormat {
    Csv,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum DensityFormat {
    Text,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum Statistic {
    Mean,
}

impl From<DensityFormat> for VertexFormat {
    fn from(f: DensityFormat) -> Self {
        match f {
            DensityFormat::Text => VertexFormat::Text,
            DensityFormat::Raw => VertexFormat::Raw,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Build(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Build(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Build(m) | Failure::Io(m) => m,
        }
    }

    /// Errors raised while interpreting flag values.
    fn flag(e: Error) -> Self {
        match e {
            Error::Io { .. } => Failure::Io(e.to_string()),
            Error::TooManyVertices { .. } | Error::Dimension { .. } => Failure::Build(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Build(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Sample { grid, sampling } => {
            let start = Instant::now();
            let grid = build_grid(&grid)?;
            let build = start.elapsed().as_secs_f64();
            sample_and_report(Arc::new(grid), &sampling, build, &[])
        }
        Command::Tree {
            pdf,
            domain,
            tol,
            max_depth,
            max_leaves,
            min_depth,
            dump,
            sampling,
        } => {
            let (lo, hi) = parse_domain(&domain).map_err(Failure::flag)?;
            let pdf = builtin(&pdf, Some(lo.len()))?;
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Failure::Usage(format!("--tol must be positive, got {tol}")));
            }
            let config = TreeConfig {
                tol_rel: tol,
                max_depth,
                max_leaves,
                min_depth,
                ..TreeConfig::default()
            };
            let start = Instant::now();
            let tree = DensityTree::build(lo, hi, pdf, config)?;
            let build = start.elapsed().as_secs_f64();
            let status = tree.status();
            if !status.is_converged() {
                eprintln!("{status}");
            }
            if let Some(path) = dump {
                let f = File::create(&path).map_err(|e| io_failure(&path, e))?;
                let mut w = BufWriter::new(f);
                tree.write_dump(&mut w)
                    .and_then(|_| w.flush())
                    .map_err(|e| io_failure(&path, e))?;
            }
            let extra = [
                format!("tree_leaves = {}", tree.leaf_count()),
                format!("tree_err_over_mass = {:.6e}", status.achieved()),
                format!("tree_converged = {}", status.is_converged()),
            ];
            sample_and_report(Arc::new(tree), &sampling, build, &extra)
        }
        Command::QmcStudy {
            grid,
            min_exp,
            max_exp,
            repeats,
            statistic: Statistic::Mean,
            seed,
            out,
        } => {
            if min_exp >= max_exp || max_exp > 24 {
                return Err(Failure::Usage(
                    "need --min-exp < --max-exp <= 24".into(),
                ));
            }
            let grid = build_grid(&grid)?;
            let ns: Vec<usize> = (min_exp..=max_exp).map(|m| 1usize << m).collect();
            let study = qmc_study(Arc::new(grid), &ns, repeats, seed).map_err(Failure::flag)?;
            let text = format!("{study}\n");
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| io_failure(&path, e)),
                None => emit(&text),
            }
        }
        Command::Stats {
            grid,
            samples,
            sampling,
        } => {
            let start = Instant::now();
            let grid = build_grid(&grid)?;
            let build = start.elapsed().as_secs_f64();
            match samples {
                None => {
                    let structure: Arc<dyn DensityStructure> = Arc::new(grid);
                    let (batch, secs) = draw(structure.clone(), &sampling)?;
                    if sampling.out.is_some() {
                        write_samples(&batch, &sampling)?;
                    }
                    let report = StatsReport::compute(&*structure, &batch, build, secs)?;
                    emit(&format!("{report}\n"))
                }
                Some(path) => {
                    let bytes = fs::read(&path).map_err(|e| io_failure(&path, e))?;
                    let (k, points) = if bytes.starts_with(vertex_file::MAGIC) {
                        batch::decode_raw(&bytes)?
                    } else {
                        let text = std::str::from_utf8(&bytes)
                            .map_err(|e| Failure::Build(format!("{}: {e}", path.display())))?;
                        batch::parse_csv(text)?
                    };
                    if k != grid.dim() {
                        return Err(Failure::Usage(format!(
                            "sample file has {k} columns but the grid has {} dimensions",
                            grid.dim()
                        )));
                    }
                    let batch = SampleBatch::from_points(k, points)?;
                    let report = StatsReport::compute(&grid, &batch, build, 0.0)?;
                    emit(&format!("{report}\n"))
                }
            }
        }
        Command::DumpGrid { grid, out, format } => {
            let grid = build_grid(&grid)?;
            vertex_file::export_vertex_file(&grid, &out, format.into())?;
            Ok(())
        }
    }
}

fn builtin(args: &PdfArgs, dim: Option<usize>) -> Outcome<BuiltinPdf> {
    let name = args
        .pdf
        .as_deref()
        .ok_or_else(|| Failure::Usage("--pdf is required".into()))?;
    let params = args
        .params
        .iter()
        .map(|p| parse_param(p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::flag)?;
    if let (Some(flag), Some(d)) = (args.dim, dim) {
        if flag != d {
            return Err(Failure::Usage(format!("--dim {flag} but the domain has {d} dimensions")));
        }
    }
    let pdf = BuiltinPdf::from_name(name, args.dim.or(dim), &params).map_err(Failure::flag)?;
    if let Some(d) = dim {
        if pdf.dim() != d {
            return Err(Failure::Usage(format!("{name} is {}-dimensional, domain has {d}", pdf.dim())));
        }
    }
    Ok(pdf)
}

fn build_grid(args: &GridArgs) -> Outcome<DensityGrid> {
    let edges = match (&args.grid, &args.edges_file) {
        (Some(spec), None) => parse_grid_axes(spec).map_err(Failure::flag)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            parse_edges_text(&text)?
        }
        _ => return Err(Failure::Usage("exactly one of --grid and --edges-file is required".into())),
    };
    match &args.density_file {
        Some(path) => Ok(vertex_file::ingest_vertex_file(edges, path, args.density_format.into())?),
        None => {
            let pdf = builtin(&args.pdf, Some(edges.len()))?;
            Ok(DensityGrid::build(edges, &pdf)?)
        }
    }
}

fn stream(args: &SamplingArgs, width: usize) -> Outcome<VariateStream> {
    let s = match (args.qmc, args.unscrambled) {
        (Qmc::None, _) => VariateStream::pseudorandom(width, args.seed),
        (Qmc::Sobol, false) => VariateStream::new(StreamKind::Sobol, width, args.seed),
        (Qmc::Halton, false) => VariateStream::new(StreamKind::Halton, width, args.seed),
        (Qmc::Sobol, true) => VariateStream::sobol(width),
        (Qmc::Halton, true) => VariateStream::halton(width),
    };
    s.map_err(Failure::flag)
}

fn draw(structure: Arc<dyn DensityStructure>, args: &SamplingArgs) -> Outcome<(SampleBatch, f64)> {
    if args.n == 0 || args.threads == 0 {
        return Err(Failure::Usage("--n and --threads must be at least 1".into()));
    }
    let stream = stream(args, structure.dim() + 1)?;
    let mut sampler = LintSampler::from_structures(vec![structure], stream)?;
    let start = Instant::now();
    let batch = sampler.sample_parallel(args.n, args.threads)?;
    Ok((batch, start.elapsed().as_secs_f64()))
}

fn write_samples(batch: &SampleBatch, args: &SamplingArgs) -> Outcome {
    let write = |w: &mut dyn Write| -> io::Result<()> {
        let mut w = BufWriter::new(w);
        match args.format {
            SampleFormat::Csv => batch.write_csv(&mut w)?,
            SampleFormat::Raw => batch.write_raw(&mut w)?,
        }
        w.flush()
    };
    match &args.out {
        Some(path) => {
            let mut f = File::create(path).map_err(|e| io_failure(path, e))?;
            write(&mut f).map_err(|e| io_failure(path, e))
        }
        None => stdout_result(write(&mut io::stdout().lock())),
    }
}

/// Draws, writes and reports. The report goes to standard output when the
/// samples go to a file, and to standard error otherwise.
fn sample_and_report(
    structure: Arc<dyn DensityStructure>,
    args: &SamplingArgs,
    build_seconds: f64,
    extra: &[String],
) -> Outcome {
    let (batch, secs) = draw(structure.clone(), args)?;
    write_samples(&batch, args)?;
    let report = StatsReport::compute(&*structure, &batch, build_seconds, secs)?;
    let mut text = report.to_string();
    for line in extra {
        text.push('\n');
        text.push_str(line);
    }
    if args.out.is_some() {
        emit(&format!("{text}\n"))
    } else {
        eprintln!("{text}");
        Ok(())
    }
}

/// Writes to standard output. A reader that hangs up early is not an error.
fn emit(text: &str) -> Outcome {
    stdout_result(io::stdout().lock().write_all(text.as_bytes()))
}

fn stdout_result(r: io::Result<()>) -> Outcome {
    match r {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}
