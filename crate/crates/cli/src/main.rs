use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use curvematch::Manifold;
use curvematch_cli::commands::{self, GenKind, RunConfig};
use serde::Serialize;

/// Geodesics and optimal matching of parameterized curves under the
/// elastic metric, in the plane, the hyperbolic half-plane and the sphere.
#[derive(Parser)]
#[command(name = "curvematch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RunArgs {
    /// Weight of the normal part of the derivative.
    #[arg(long, global = true, default_value_t = 1.0)]
    a: f64,
    /// Weight of the tangential part of the derivative.
    #[arg(long, global = true, default_value_t = 0.5)]
    b: f64,
    /// Intervals per generated curve.
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    /// Steps of the discrete paths between curves.
    #[arg(long, global = true, default_value_t = 10)]
    steps: usize,
    /// Gap below which matching stops [default: 1e-3 times the source arc length].
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Matching iterations.
    #[arg(long = "max-iter", global = true, default_value_t = 50)]
    max_iter: usize,
    /// Path-straightening iterations per geodesic.
    #[arg(long = "solver-iter", global = true, default_value_t = 200)]
    solver_iter: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Geodesic between two curves.
    Geodesic { c0: PathBuf, c1: PathBuf },
    /// Optimal matching of the second curve to the first.
    Match {
        c0: PathBuf,
        c1: PathBuf,
        /// Row label in the lengths table [default: name of the second curve].
        #[arg(long)]
        label: Option<String>,
    },
    /// Horizontal part of a path of curves.
    Decompose { path: PathBuf },
    /// Dynamic-programming reparameterization oracle (plane, a = 2b).
    Oracle {
        c0: PathBuf,
        c1: PathBuf,
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// SVG figure of one or more path files.
    Plot {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(short, long, default_value = "plot.svg")]
        output: PathBuf,
    },
    /// Generate test curves.
    Gen {
        kind: Kind,
        #[arg(long, value_enum, default_value_t = ManifoldArg::Plane)]
        manifold: ManifoldArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    H2Segments,
    S2Arcs,
    Pair,
    Related,
    Spirals,
    SShapes,
    Path,
}

#[derive(Clone, Copy, ValueEnum)]
enum ManifoldArg {
    Plane,
    H2,
    S2,
}

fn print<T: Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let r = cli.run;
    let config = RunConfig {
        a: r.a,
        b: r.b,
        samples: r.samples,
        steps: r.steps,
        threshold: r.threshold,
        max_iterations: r.max_iter,
        solver_iterations: r.solver_iter,
        seed: r.seed,
        out: r.out,
    };
    match cli.command {
        Command::Geodesic { c0, c1 } => print(&commands::cmd_geodesic(&c0, &c1, &config)?),
        Command::Match { c0, c1, label } => print(&commands::cmd_match(&c0, &c1, &config, label.as_deref())?),
        Command::Decompose { path } => print(&commands::cmd_decompose(&path, &config)?),
        Command::Oracle { c0, c1, grid } => print(&commands::cmd_oracle(&c0, &c1, &config, grid)?),
        Command::Plot { paths, output } => commands::cmd_plot(&paths, &output),
        Command::Gen { kind, manifold } => {
            let kind = match kind {
                Kind::H2Segments => GenKind::H2Segments,
                Kind::S2Arcs => GenKind::S2Arcs,
                Kind::Pair => GenKind::Pair,
                Kind::Related => GenKind::Related,
                Kind::Spirals => GenKind::Spirals,
                Kind::SShapes => GenKind::SShapes,
                Kind::Path => GenKind::Path,
            };
            let manifold = match manifold {
                ManifoldArg::Plane => Manifold::Plane,
                ManifoldArg::H2 => Manifold::HyperbolicHalfPlane,
                ManifoldArg::S2 => Manifold::Sphere,
            };
            for p in commands::cmd_gen(kind, manifold, &config)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
