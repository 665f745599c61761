//! The subcommands, as library functions writing into an output directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use curvematch::generate::{
    random_pair, random_path, related_pair, s_shape, sphere_arc_pair, spiral, SegmentPair, Warp,
};
use curvematch::matching::dp_reparam_oracle;
use curvematch::{
    geodesic, horizontal_part, optimal_match, path_length, reparameterize, DiscreteCurve, ElasticParams, Error,
    Manifold, MatchConfig, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::io::{self, MIN_INTERVALS};
use crate::plot::{self, Series};

/// Exit status for input errors: unreadable or malformed files, invalid
/// points, degenerate curves, broken preconditions.
pub const EXIT_INPUT: i32 = 2;
/// Exit status for solver failures: non-convergence, divergence of the
/// matching, singular configurations and failed linear solves.
pub const EXIT_SOLVER: i32 = 3;

pub fn exit_code(err: &anyhow::Error) -> i32 {
    let core = err.chain().find_map(|e| e.downcast_ref::<Error>());
    match core {
        Some(
            Error::NotConverged { .. } | Error::Divergence { .. } | Error::Singularity(_) | Error::Conditioning(_),
        ) => EXIT_SOLVER,
        _ => EXIT_INPUT,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub a: f64,
    pub b: f64,
    /// Intervals per generated curve.
    pub samples: usize,
    pub steps: usize,
    pub threshold: Option<f64>,
    pub max_iterations: usize,
    pub solver_iterations: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 0.5,
            samples: 100,
            steps: 10,
            threshold: None,
            max_iterations: 50,
            solver_iterations: 200,
            seed: 0,
            out: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite()) {
            bail!("--a and --b must be positive, got {} and {}", self.a, self.b);
        }
        if self.samples < MIN_INTERVALS {
            bail!("--samples must be at least {MIN_INTERVALS}, got {}", self.samples);
        }
        if self.steps < 2 {
            bail!("--steps must be at least 2, got {}", self.steps);
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0) {
                bail!("--threshold must be positive, got {t}");
            }
        }
        if self.max_iterations == 0 || self.solver_iterations == 0 {
            bail!("iteration limits must be positive");
        }
        Ok(())
    }

    pub fn params(&self) -> anyhow::Result<ElasticParams> {
        Ok(ElasticParams::new(self.a, self.b)?)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig { n_steps: self.steps, max_iterations: self.solver_iterations, ..SolverConfig::default() }
    }

    pub fn matching(&self) -> MatchConfig {
        MatchConfig {
            solver: self.solver(),
            threshold: self.threshold,
            max_iterations: self.max_iterations,
            ..MatchConfig::default()
        }
    }

    fn prepare(&self) -> anyhow::Result<()> {
        self.validate()?;
        fs::create_dir_all(&self.out).with_context(|| format!("cannot create {}", self.out.display()))
    }

    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    io::write(path, &text)
}

fn read_pair(c0: &Path, c1: &Path) -> anyhow::Result<(io::CurveFile, io::CurveFile)> {
    let (f0, f1) = (io::read_curve(c0)?, io::read_curve(c1)?);
    if f0.curve.manifold() != f1.curve.manifold() {
        bail!("curves live on different manifolds: {} and {}", f0.curve.manifold().tag(), f1.curve.manifold().tag());
    }
    if f0.curve.intervals() != f1.curve.intervals() {
        bail!("curves have different sample counts: {} and {}", f0.curve.len(), f1.curve.len());
    }
    Ok((f0, f1))
}

fn label_of(file: &io::CurveFile, path: &Path) -> String {
    file.name.clone().unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicReport {
    pub manifold: String,
    pub a: f64,
    pub b: f64,
    pub length: f64,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Writes `geodesic_path.txt` and `geodesic.json`.
pub fn cmd_geodesic(c0: &Path, c1: &Path, config: &RunConfig) -> anyhow::Result<GeodesicReport> {
    config.prepare()?;
    let (f0, f1) = read_pair(c0, c1)?;
    let g = geodesic(&f0.curve, &f1.curve, &config.params()?, &config.solver(), None)?;
    g.ensure_converged()?;
    io::write(&config.file("geodesic_path.txt"), &io::format_path(&g.path, None))?;
    let report = GeodesicReport {
        manifold: f0.curve.manifold().tag().to_string(),
        a: config.a,
        b: config.b,
        length: g.length,
        energy: g.energy,
        iterations: g.iterations,
        converged: g.converged,
    };
    write_json(&config.file("geodesic.json"), &report)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchReport {
    pub label: String,
    pub manifold: String,
    pub a: f64,
    pub b: f64,
    pub parameterized_length: f64,
    pub horizontal_length: f64,
    pub iterations: usize,
    pub converged: bool,
    pub ascent_stop: bool,
    pub threshold: f64,
    pub final_gap: Option<f64>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn format_series(header: &str, values: &[f64]) -> String {
    let mut out = format!("iteration,{header}\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{v}\n", i + 1));
    }
    out
}

/// Writes the matched target, the total diffeomorphism, both geodesic
/// grids, the lengths table and the gap history. On divergence only the
/// gap history is written before the error is returned.
pub fn cmd_match(c0: &Path, c1: &Path, config: &RunConfig, label: Option<&str>) -> anyhow::Result<MatchReport> {
    config.prepare()?;
    let (f0, f1) = read_pair(c0, c1)?;
    let label = label.map(str::to_string).unwrap_or_else(|| label_of(&f1, c1));
    let r = match optimal_match(&f0.curve, &f1.curve, &config.params()?, &config.matching()) {
        Ok(r) => r,
        Err(Error::Divergence { gap_history }) => {
            io::write(&config.file("gaps.csv"), &format_series("gap", &gap_history))?;
            return Err(Error::Divergence { gap_history }.into());
        }
        Err(e) => return Err(e.into()),
    };
    let (blue, red) = (r.initial_geodesic.length, r.final_geodesic.length);
    io::write(&config.file("matched_target.txt"), &io::format_curve(&r.matched_target, Some(&label)))?;
    io::write(&config.file("total_diffeo.csv"), &io::format_diffeo(&r.total_diffeo))?;
    io::write(&config.file("initial_path.txt"), &io::format_path(&r.initial_geodesic.path, Some("parameterized")))?;
    io::write(&config.file("horizontal_path.txt"), &io::format_path(&r.final_geodesic.path, Some("horizontal")))?;
    io::write(
        &config.file("lengths.csv"),
        &format!("label,parameterized_length,horizontal_length\n{},{blue},{red}\n", csv_field(&label)),
    )?;
    io::write(&config.file("gaps.csv"), &format_series("gap", &r.gap_history))?;
    io::write(&config.file("geodesic_lengths.csv"), &format_series("length", &r.length_history))?;
    let report = MatchReport {
        label,
        manifold: f0.curve.manifold().tag().to_string(),
        a: config.a,
        b: config.b,
        parameterized_length: blue,
        horizontal_length: red,
        iterations: r.iterations,
        converged: r.converged,
        ascent_stop: r.ascent_stop,
        threshold: r.threshold,
        final_gap: r.gap_history.last().copied(),
    };
    write_json(&config.file("match.json"), &report)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecomposeReport {
    pub length: f64,
    pub horizontal_length: f64,
    pub repaired_increments: usize,
    pub repair_warning: bool,
}

/// Writes `horizontal_part.txt`, `diffeos.txt` (one row per step) and
/// `m_field.txt`.
pub fn cmd_decompose(path: &Path, config: &RunConfig) -> anyhow::Result<DecomposeReport> {
    config.prepare()?;
    let input = io::read_path(path)?;
    let params = config.params()?;
    let d = horizontal_part(&input.path, &params)?;
    io::write(&config.file("horizontal_part.txt"), &io::format_path(&d.horizontal_path, input.name.as_deref()))?;
    let diffeos: Vec<&[f64]> = d.diffeos.iter().map(|phi| phi.values()).collect();
    io::write(&config.file("diffeos.txt"), &io::format_matrix(&diffeos))?;
    io::write(&config.file("m_field.txt"), &io::format_matrix(&d.m_field))?;
    let report = DecomposeReport {
        length: path_length(&input.path, &params)?,
        horizontal_length: path_length(&d.horizontal_path, &params)?,
        repaired_increments: d.repaired_increments,
        repair_warning: d.repair_warning,
    };
    write_json(&config.file("decompose.json"), &report)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub distance: f64,
    pub grid: usize,
}

/// Writes `oracle_diffeo.csv` and `oracle.json`.
pub fn cmd_oracle(c0: &Path, c1: &Path, config: &RunConfig, grid: usize) -> anyhow::Result<OracleReport> {
    config.prepare()?;
    let (f0, f1) = read_pair(c0, c1)?;
    let (distance, phi) = dp_reparam_oracle(&f0.curve, &f1.curve, &config.params()?, grid)?;
    io::write(&config.file("oracle_diffeo.csv"), &io::format_diffeo(&phi))?;
    let report = OracleReport { distance, grid };
    write_json(&config.file("oracle.json"), &report)?;
    Ok(report)
}

/// Renders path files into one SVG, the first in blue and the second in red.
pub fn cmd_plot(paths: &[PathBuf], output: &Path) -> anyhow::Result<()> {
    if paths.is_empty() {
        bail!("plot needs at least one path file");
    }
    let files = paths.iter().map(|p| io::read_path(p)).collect::<anyhow::Result<Vec<_>>>()?;
    let series: Vec<Series> = files
        .iter()
        .zip(paths)
        .map(|(f, p)| Series {
            label: f
                .name
                .clone()
                .unwrap_or_else(|| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()),
            path: &f.path,
        })
        .collect();
    let svg = plot::render(&series)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    io::write(output, &svg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    /// Five parameterizations of one pair of half-plane segments.
    H2Segments,
    /// Five parameterizations of one pair of sphere arcs.
    S2Arcs,
    /// Two unrelated random curves.
    Pair,
    /// A random curve and a deformed, reparameterized copy.
    Related,
    /// Two plane spirals.
    Spirals,
    /// Two plane S-shapes, the second reparameterized.
    SShapes,
    /// A random path of curves.
    Path,
}

/// Writes generated curves (or one path) and returns the file names.
pub fn cmd_gen(kind: GenKind, manifold: Manifold, config: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    config.prepare()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.samples;
    let mut written = Vec::new();
    let mut save = |file: String, c: &DiscreteCurve, name: String| -> anyhow::Result<()> {
        let p = config.file(&file);
        io::write(&p, &io::format_curve(c, Some(&name)))?;
        written.push(p);
        Ok(())
    };
    match kind {
        GenKind::H2Segments | GenKind::S2Arcs => {
            let segments = SegmentPair::random(&mut rng);
            let arc_seed: u64 = rng.gen();
            let prefix = if kind == GenKind::H2Segments { "segments" } else { "arcs" };
            for v in 0..5 {
                let (c0, c1) = if kind == GenKind::H2Segments {
                    segments.sample(v, n)?
                } else {
                    // same shapes for every variant
                    sphere_arc_pair(&mut ChaCha8Rng::seed_from_u64(arc_seed), v, n)?
                };
                save(format!("{prefix}_v{v}_c0.txt"), &c0, format!("{prefix} v{v} left"))?;
                save(format!("{prefix}_v{v}_c1.txt"), &c1, format!("{prefix} v{v}"))?;
            }
        }
        GenKind::Pair | GenKind::Related => {
            let (c0, c1) = if kind == GenKind::Pair {
                random_pair(&mut rng, manifold, n)?
            } else {
                related_pair(&mut rng, manifold, n, 1.0)?
            };
            save("c0.txt".into(), &c0, "source".into())?;
            save("c1.txt".into(), &c1, "target".into())?;
        }
        GenKind::Spirals => {
            let c0 = spiral(n, rng.gen_range(0.2..0.4), rng.gen_range(0.8..1.2), 0.0, rng.gen_range(0.6..0.9))?;
            let c1 = spiral(
                n,
                rng.gen_range(0.2..0.4),
                rng.gen_range(0.8..1.2),
                rng.gen_range(0.0..0.5),
                rng.gen_range(0.6..0.9),
            )?;
            let c1 = reparameterize(&c1, &Warp::random(&mut rng, 0.6).sample(n))?;
            save("c0.txt".into(), &c0, "spiral".into())?;
            save("c1.txt".into(), &c1, "spiral reparameterized".into())?;
        }
        GenKind::SShapes => {
            let c0 = s_shape(n, rng.gen_range(0.1..0.25))?;
            let c1 = s_shape(n, rng.gen_range(0.15..0.3))?;
            let c1 = reparameterize(&c1, &Warp::random(&mut rng, 0.6).sample(n))?;
            save("c0.txt".into(), &c0, "s-shape".into())?;
            save("c1.txt".into(), &c1, "s-shape reparameterized".into())?;
        }
        GenKind::Path => {
            let path = random_path(&mut rng, manifold, config.steps, n)?;
            let p = config.file("path.txt");
            io::write(&p, &io::format_path(&path, Some("random path")))?;
            written.push(p);
        }
    }
    Ok(written)
}
