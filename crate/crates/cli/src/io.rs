//! Line-oriented text formats for curves, paths and diffeomorphisms.
//!
//! A curve file is a `manifold: plane|h2|s2` header, an optional `name:`
//! line, then one whitespace-separated coordinate row per sample (two
//! columns in the plane and half-plane, three on the sphere). A path file
//! adds `steps:` and `samples:` lines and lists the rows of the grid one
//! after another, separated by blank lines. `#` starts a comment.
//!
//! Numbers are written with the shortest representation that parses back
//! to the same `f64`, so written files re-read bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use curvematch::{Coords, CurvePath, Diffeo, DiscreteCurve, Manifold};

/// Smallest number of intervals accepted on input.
pub const MIN_INTERVALS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct CurveFile {
    pub name: Option<String>,
    pub curve: DiscreteCurve,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathFile {
    pub name: Option<String>,
    pub path: CurvePath,
}

/// Header fields and coordinate rows of a text file, before validation.
struct Parsed {
    manifold: Manifold,
    name: Option<String>,
    steps: Option<usize>,
    samples: Option<usize>,
    rows: Vec<Vec<f64>>,
}

fn parse_text(text: &str) -> anyhow::Result<Parsed> {
    let mut manifold = None;
    let mut name = None;
    let mut steps = None;
    let mut samples = None;
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("line {}", lineno + 1);
        if let Some((key, value)) = line.split_once(':') {
            let value = value.trim();
            match key.trim() {
                "manifold" => {
                    let m = Manifold::from_tag(value).ok_or_else(|| anyhow!("{}: unknown manifold {value:?}", at()))?;
                    manifold = Some(m);
                }
                "name" => name = Some(value.to_string()),
                "steps" => steps = Some(value.parse().with_context(|| format!("{}: bad steps", at()))?),
                "samples" => samples = Some(value.parse().with_context(|| format!("{}: bad samples", at()))?),
                other => bail!("{}: unknown header field {other:?}", at()),
            }
            continue;
        }
        if manifold.is_none() {
            bail!("{}: coordinates before the manifold header", at());
        }
        let row = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>().with_context(|| format!("{}: bad number {tok:?}", at())))
            .collect::<anyhow::Result<Vec<_>>>()?;
        rows.push(row);
    }
    let manifold = manifold.ok_or_else(|| anyhow!("missing `manifold:` header"))?;
    Ok(Parsed { manifold, name, steps, samples, rows })
}

fn check_intervals(n: usize) -> anyhow::Result<()> {
    if n < MIN_INTERVALS {
        bail!("curves need at least {MIN_INTERVALS} intervals, got {n}");
    }
    Ok(())
}

pub fn parse_curve(text: &str) -> anyhow::Result<CurveFile> {
    let p = parse_text(text)?;
    if p.steps.is_some() || p.samples.is_some() {
        bail!("this is a path file, expected a single curve");
    }
    if p.rows.is_empty() {
        bail!("curve file has no samples");
    }
    check_intervals(p.rows.len() - 1)?;
    let curve = DiscreteCurve::from_rows(p.manifold, &p.rows)?;
    Ok(CurveFile { name: p.name, curve })
}

pub fn parse_path(text: &str) -> anyhow::Result<PathFile> {
    let p = parse_text(text)?;
    let steps = p.steps.ok_or_else(|| anyhow!("missing `steps:` header"))?;
    let samples = p.samples.ok_or_else(|| anyhow!("missing `samples:` header"))?;
    if steps == 0 || samples < 2 {
        bail!("a path needs at least one step and two samples");
    }
    if p.rows.len() != (steps + 1) * samples {
        bail!(
            "expected {} coordinate rows for {steps} steps of {samples} samples, found {}",
            (steps + 1) * samples,
            p.rows.len()
        );
    }
    check_intervals(samples - 1)?;
    let rows = p
        .rows
        .chunks(samples)
        .map(|chunk| DiscreteCurve::from_rows(p.manifold, chunk))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PathFile { name: p.name, path: CurvePath::new(rows)? })
}

fn push_point(out: &mut String, m: Manifold, p: &Coords) {
    let dim = m.ambient_dim();
    let cols: Vec<String> = p[..dim].iter().map(|x| x.to_string()).collect();
    out.push_str(&cols.join(" "));
    out.push('\n');
}

fn push_header(out: &mut String, m: Manifold, name: Option<&str>) {
    let _ = writeln!(out, "manifold: {}", m.tag());
    if let Some(name) = name {
        let _ = writeln!(out, "name: {name}");
    }
}

pub fn format_curve(curve: &DiscreteCurve, name: Option<&str>) -> String {
    let mut out = String::new();
    push_header(&mut out, curve.manifold(), name);
    for p in curve.points() {
        push_point(&mut out, curve.manifold(), p);
    }
    out
}

pub fn format_path(path: &CurvePath, name: Option<&str>) -> String {
    let mut out = String::new();
    let m = path.manifold();
    push_header(&mut out, m, name);
    let _ = writeln!(out, "steps: {}", path.steps());
    let _ = writeln!(out, "samples: {}", path.samples());
    for row in path.rows() {
        out.push('\n');
        for p in row.points() {
            push_point(&mut out, m, p);
        }
    }
    out
}

/// Two-column CSV `t,phi` on the uniform grid.
pub fn format_diffeo(phi: &Diffeo) -> String {
    let n = phi.intervals();
    let mut out = String::from("t,phi\n");
    for (i, v) in phi.values().iter().enumerate() {
        let _ = writeln!(out, "{},{v}", i as f64 / n as f64);
    }
    out
}

pub fn parse_diffeo(text: &str) -> anyhow::Result<Diffeo> {
    let values = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v = l.split(',').nth(1).ok_or_else(|| anyhow!("bad diffeo row {l:?}"))?;
            v.trim().parse::<f64>().with_context(|| format!("bad number {v:?}"))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(Diffeo::new(values)?)
}

/// One row per step `k`, whitespace-separated values along the curve.
pub fn format_matrix<T: AsRef<[f64]>>(rows: &[T]) -> String {
    let mut out = String::new();
    for row in rows {
        let cols: Vec<String> = row.as_ref().iter().map(|x| x.to_string()).collect();
        out.push_str(&cols.join(" "));
        out.push('\n');
    }
    out
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn read_curve(path: &Path) -> anyhow::Result<CurveFile> {
    parse_curve(&read(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn read_path(path: &Path) -> anyhow::Result<PathFile> {
    parse_path(&read(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve() -> DiscreteCurve {
        DiscreteCurve::from_fn(Manifold::HyperbolicHalfPlane, 10, |t| [0.1 * t + 1.0 / 3.0, 1.0 + t * t, 0.0]).unwrap()
    }

    #[test]
    fn curve_round_trip_is_exact() {
        let c = curve();
        let back = parse_curve(&format_curve(&c, Some("arc"))).unwrap();
        assert_eq!(back.curve, c);
        assert_eq!(back.name.as_deref(), Some("arc"));
    }

    #[test]
    fn path_round_trip_is_exact() {
        let path = CurvePath::from_fn(Manifold::Sphere, 3, 9, |s, t| {
            let (a, b) = (0.3 * s + 0.1, t - 0.5);
            [a.cos() * b.cos(), a.sin() * b.cos(), b.sin()]
        })
        .unwrap();
        assert_eq!(parse_path(&format_path(&path, None)).unwrap().path, path);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let mut text = String::from("# made by hand\nmanifold: plane\n\n");
        for i in 0..=8 {
            text.push_str(&format!("{} 0  # sample {i}\n", i as f64 / 8.0));
        }
        assert_eq!(parse_curve(&text).unwrap().curve.intervals(), 8);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let rows: String = (0..=8).map(|i| format!("{i} 1\n")).collect();
        assert!(parse_curve(&rows).is_err());
        assert!(parse_curve(&format!("manifold: torus\n{rows}")).is_err());
        assert!(parse_curve(&format!("manifold: s2\n{rows}")).is_err());
        assert!(parse_curve("manifold: plane\n0 0\n1 x\n").is_err());
        assert!(parse_curve("manifold: plane\n0 0\n1 0\n").is_err());
        assert!(parse_curve(&format!("manifold: h2\n{}", (0..=8).map(|i| format!("{i} -1\n")).collect::<String>()))
            .is_err());
    }

    #[test]
    fn diffeo_round_trip_is_exact() {
        let phi = Diffeo::from_fn(12, |t| t * t * (3.0 - 2.0 * t) * 0.3 + 0.7 * t).unwrap();
        assert_eq!(parse_diffeo(&format_diffeo(&phi)).unwrap(), phi);
    }
}
