//! `polyqf`: integration, assembly, solve and lattice benchmarks.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use polyqf::assembly::AssemblyPath;
use polyqf::bench::{
    assemble_all, integrate_all, parse_shape_specs, run_lattice_stats, run_solve,
    write_lattice_records, write_records, AssembleJob, IntegrateJob, Method, ShapeSpec,
};
use polyqf::solver::write_solution_csv;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "polyqf",
    version,
    about = "Quadrature-free integration and DG assembly benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate all monomials up to degree p over shapes.
    Integrate(BenchArgs),
    /// Assemble DG volume matrices on meshes.
    Assemble(BenchArgs),
    /// Assemble and solve a transport problem.
    Solve(SolveArgs),
    /// Facet lattice sizes of shapes.
    LatticeStats(ShapeArgs),
}

#[derive(Args, Clone)]
struct ShapeArgs {
    /// Shape specs such as ngon:6, simplex:3, cube:3, prism:5, pyramid:4,
    /// tris:2, tets:0..4, agglo-tris:1, agglo-tets:2.
    #[arg(long = "shape")]
    shapes: Vec<String>,
    /// Mesh files in JSON format.
    #[arg(long = "mesh")]
    meshes: Vec<PathBuf>,
    /// Output CSV (standard output when absent).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (all cores when absent).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Quad,
    Qfree,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pruning {
    On,
    Off,
    Both,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',')]
    p: Vec<usize>,
    #[arg(long)]
    p_min: Option<usize>,
    #[arg(long)]
    p_max: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = Pruning::On)]
    pruned: Pruning,
    /// Write zero timers so that output is reproducible byte for byte.
    #[arg(long)]
    no_timers: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveMethod {
    Quad,
    Qfree,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Problem from the registry: const, poly1, poly2, smooth, source-only.
    #[arg(long, default_value = "smooth")]
    data: String,
    #[arg(long, value_enum, default_value_t = SolveMethod::Qfree)]
    method: SolveMethod,
    /// Solution coefficients CSV.
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long)]
    no_timers: bool,
}

fn shapes(a: &ShapeArgs) -> Result<Vec<ShapeSpec>> {
    let mut out = Vec::new();
    for s in &a.shapes {
        out.extend(parse_shape_specs(s)?);
    }
    out.extend(a.meshes.iter().cloned().map(ShapeSpec::File));
    if out.is_empty() {
        bail!("no shapes given; use --shape or --mesh");
    }
    Ok(out)
}

fn degrees(a: &BenchArgs) -> Result<Vec<usize>> {
    let mut p = a.p.clone();
    match (a.p_min, a.p_max) {
        (Some(lo), Some(hi)) if lo <= hi => p.extend(lo..=hi),
        (None, None) => {}
        _ => bail!("--p-min and --p-max must be given together with p-min <= p-max"),
    }
    p.sort_unstable();
    p.dedup();
    if p.is_empty() {
        bail!("no degrees given; use --p or --p-min/--p-max");
    }
    Ok(p)
}

fn methods(m: MethodArg) -> Vec<Method> {
    match m {
        MethodArg::Quad => vec![Method::Quad],
        MethodArg::Qfree => vec![Method::Qfree],
        MethodArg::Both => vec![Method::Quad, Method::Qfree],
    }
}

fn pruning(p: Pruning) -> Vec<bool> {
    match p {
        Pruning::On => vec![true],
        Pruning::Off => vec![false],
        Pruning::Both => vec![false, true],
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => Ok(polyqf::with_threads(n, f)?),
        None => Ok(f()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Integrate(a) => {
            let mut jobs = Vec::new();
            for shape in shapes(&a.shape)? {
                for &p in &degrees(&a)? {
                    for pruned in pruning(a.pruned) {
                        jobs.push(IntegrateJob {
                            shape: shape.clone(),
                            p,
                            methods: methods(a.method),
                            pruned,
                        });
                    }
                }
            }
            let rows = in_pool(a.shape.threads, || integrate_all(&jobs, a.shape.seed))??;
            write_records(&rows, output(&a.shape.csv)?, !a.no_timers)?;
        }
        Command::Assemble(a) => {
            let mut jobs = Vec::new();
            for shape in shapes(&a.shape)? {
                for &p in &degrees(&a)? {
                    for pruned in pruning(a.pruned) {
                        jobs.push(AssembleJob {
                            shape: shape.clone(),
                            p,
                            methods: methods(a.method),
                            pruned,
                        });
                    }
                }
            }
            let rows = in_pool(a.shape.threads, || assemble_all(&jobs, a.shape.seed))??;
            write_records(&rows, output(&a.shape.csv)?, !a.no_timers)?;
        }
        Command::Solve(a) => {
            let list = shapes(&a.shape)?;
            if list.len() != 1 {
                bail!("solve takes exactly one shape or mesh");
            }
            let path = match a.method {
                SolveMethod::Quad => AssemblyPath::Quadrature,
                SolveMethod::Qfree => AssemblyPath::QuadratureFree,
            };
            let (rec, x, nb) = in_pool(a.shape.threads, || {
                run_solve(&list[0], a.p, &a.data, path, a.shape.seed)
            })??;
            write_records(&[rec], output(&a.shape.csv)?, !a.no_timers)?;
            if let Some(sol) = &a.solution {
                let f = File::create(sol)
                    .with_context(|| format!("cannot create {}", sol.display()))?;
                write_solution_csv(&x, nb, f)?;
            }
        }
        Command::LatticeStats(a) => {
            let rows = shapes(&a)?
                .iter()
                .map(run_lattice_stats)
                .collect::<polyqf::Result<Vec<_>>>()?;
            write_lattice_records(&rows, output(&a.csv)?)?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
