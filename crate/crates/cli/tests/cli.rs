use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curvematch::generate::related_pair;
use curvematch::{path_length, reparameterize, DiscreteCurve, ElasticParams, Error, Manifold};
use curvematch_cli::io::{format_curve, format_path, parse_curve, parse_diffeo, parse_path, read_curve, read_path};
use curvematch_cli::{exit_code, EXIT_INPUT, EXIT_SOLVER};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvematch")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn save(dir: &Path, name: &str, c: &DiscreteCurve) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, format_curve(c, None)).unwrap();
    p
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn lengths(dir: &Path) -> (f64, f64) {
    let text = fs::read_to_string(dir.join("lengths.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,parameterized_length,horizontal_length"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    (row[1].parse().unwrap(), row[2].parse().unwrap())
}

fn params() -> ElasticParams {
    ElasticParams::default()
}

#[test]
fn identical_inputs_give_zero_length_and_zero_row() {
    let dir = TempDir::new().unwrap();
    let c = DiscreteCurve::from_fn(Manifold::HyperbolicHalfPlane, 20, |t| [t, 1.0 + 0.3 * t, 0.0]).unwrap();
    let p = save(dir.path(), "c.txt", &c);
    let out = dir.path().join("g");
    ok(&["geodesic", s(&p), s(&p), "--out", s(&out)]);
    assert_eq!(json(&out.join("geodesic.json"))["length"], 0.0);
    ok(&["match", s(&p), s(&p), "--out", s(&out)]);
    assert_eq!(lengths(&out), (0.0, 0.0));
}

#[test]
fn translated_segment_has_length_of_offset() {
    let dir = TempDir::new().unwrap();
    let c0 = DiscreteCurve::from_fn(Manifold::Plane, 50, |t| [t, 0.2 * t, 0.0]).unwrap();
    let c1 = DiscreteCurve::from_fn(Manifold::Plane, 50, |t| [t + 0.3, 0.2 * t + 0.4, 0.0]).unwrap();
    let (p0, p1) = (save(dir.path(), "c0.txt", &c0), save(dir.path(), "c1.txt", &c1));
    ok(&["geodesic", s(&p0), s(&p1), "--out", s(dir.path())]);
    let length = json(&dir.path().join("geodesic.json"))["length"].as_f64().unwrap();
    assert!((length - 0.5).abs() <= 1e-6, "{length}");
}

#[test]
fn emitted_lengths_are_rederivable_from_grids() {
    let dir = TempDir::new().unwrap();
    let gen = dir.path().join("gen");
    ok(&["gen", "pair", "--seed", "5", "--out", s(&gen)]);
    let (c0, c1) = (gen.join("c0.txt"), gen.join("c1.txt"));
    let g = dir.path().join("g");
    ok(&["geodesic", s(&c0), s(&c1), "--out", s(&g)]);
    let path = read_path(&g.join("geodesic_path.txt")).unwrap().path;
    let reported = json(&g.join("geodesic.json"))["length"].as_f64().unwrap();
    assert!((path_length(&path, &params()).unwrap() - reported).abs() <= 1e-9);
    assert_eq!(path.first(), &read_curve(&c0).unwrap().curve);
    assert_eq!(path.last(), &read_curve(&c1).unwrap().curve);
}

#[test]
fn match_outputs_are_consistent() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (c0, c1) = related_pair(&mut rng, Manifold::HyperbolicHalfPlane, 40, 1.0).unwrap();
    let (p0, p1) = (save(dir.path(), "c0.txt", &c0), save(dir.path(), "c1.txt", &c1));
    let out = dir.path().join("m");
    ok(&["match", s(&p0), s(&p1), "--out", s(&out), "--label", "run 1"]);

    let (blue, red) = lengths(&out);
    assert!(red <= blue);
    let initial = read_path(&out.join("initial_path.txt")).unwrap().path;
    let horizontal = read_path(&out.join("horizontal_path.txt")).unwrap().path;
    assert!((path_length(&initial, &params()).unwrap() - blue).abs() <= 1e-9);
    assert!((path_length(&horizontal, &params()).unwrap() - red).abs() <= 1e-9);

    let phi = parse_diffeo(&fs::read_to_string(out.join("total_diffeo.csv")).unwrap()).unwrap();
    let target = read_curve(&out.join("matched_target.txt")).unwrap();
    assert_eq!(target.curve, reparameterize(&c1, &phi).unwrap());
    assert_eq!(horizontal.last(), &target.curve);
    assert_eq!(target.name.as_deref(), Some("run 1"));

    let summary = json(&out.join("match.json"));
    let (gap, threshold) = (summary["final_gap"].as_f64().unwrap(), summary["threshold"].as_f64().unwrap());
    assert_eq!(summary["converged"].as_bool().unwrap(), gap <= threshold);
    let gaps = fs::read_to_string(out.join("gaps.csv")).unwrap();
    assert_eq!(gaps.lines().count(), 1 + summary["iterations"].as_u64().unwrap() as usize);
}

#[test]
fn same_fiber_pair_matches_to_near_zero() {
    let dir = TempDir::new().unwrap();
    let c = DiscreteCurve::from_fn(Manifold::Plane, 60, |t| [t, 0.3 * (3.0 * t).sin(), 0.0]).unwrap();
    let phi =
        curvematch::Diffeo::from_fn(60, |t| t + 0.4 * (std::f64::consts::PI * t).sin() / std::f64::consts::PI).unwrap();
    let c1 = reparameterize(&c, &phi).unwrap();
    let (p0, p1) = (save(dir.path(), "c0.txt", &c), save(dir.path(), "c1.txt", &c1));
    ok(&["match", s(&p0), s(&p1), "--out", s(dir.path())]);
    let (blue, red) = lengths(dir.path());
    assert!(red <= 0.05 * blue, "{red} {blue}");
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let gen = dir.path().join("gen");
    ok(&["gen", "related", "--manifold", "s2", "--samples", "30", "--seed", "2", "--out", s(&gen)]);
    let (c0, c1) = (gen.join("c0.txt"), gen.join("c1.txt"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["match", s(&c0), s(&c1), "--out", s(&a)]);
    ok(&["match", s(&c0), s(&c1), "--out", s(&b)]);
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
    let again = dir.path().join("gen2");
    ok(&["gen", "related", "--manifold", "s2", "--samples", "30", "--seed", "2", "--out", s(&again)]);
    assert_eq!(fs::read(&c1).unwrap(), fs::read(again.join("c1.txt")).unwrap());
}

#[test]
fn written_files_round_trip_bitwise() {
    let dir = TempDir::new().unwrap();
    for kind in ["h2-segments", "s2-arcs", "spirals", "s-shapes"] {
        let out = dir.path().join(kind);
        let listed = ok(&["gen", kind, "--seed", "4", "--out", s(&out)]);
        for line in String::from_utf8(listed.stdout).unwrap().lines() {
            let text = fs::read_to_string(line).unwrap();
            let parsed = parse_curve(&text).unwrap();
            assert_eq!(format_curve(&parsed.curve, parsed.name.as_deref()), text);
        }
    }
    let out = dir.path().join("path");
    ok(&["gen", "path", "--manifold", "h2", "--seed", "4", "--out", s(&out)]);
    let text = fs::read_to_string(out.join("path.txt")).unwrap();
    let parsed = parse_path(&text).unwrap();
    assert_eq!(format_path(&parsed.path, parsed.name.as_deref()), text);
}

#[test]
fn decompose_never_lengthens() {
    let dir = TempDir::new().unwrap();
    ok(&["gen", "path", "--seed", "6", "--samples", "40", "--out", s(dir.path())]);
    ok(&["decompose", s(&dir.path().join("path.txt")), "--out", s(dir.path())]);
    let report = json(&dir.path().join("decompose.json"));
    let (l, h) = (report["length"].as_f64().unwrap(), report["horizontal_length"].as_f64().unwrap());
    assert!(h <= l + 1e-6);
    let m = fs::read_to_string(dir.path().join("m_field.txt")).unwrap();
    assert_eq!(m.lines().count(), 11);
    let horizontal = read_path(&dir.path().join("horizontal_part.txt")).unwrap().path;
    assert!((path_length(&horizontal, &params()).unwrap() - h).abs() <= 1e-9);
}

#[test]
fn oracle_agrees_with_match_on_plane_pair() {
    let dir = TempDir::new().unwrap();
    ok(&["gen", "related", "--seed", "4", "--out", s(dir.path())]);
    let (c0, c1) = (dir.path().join("c0.txt"), dir.path().join("c1.txt"));
    ok(&["oracle", s(&c0), s(&c1), "--out", s(dir.path())]);
    ok(&["match", s(&c0), s(&c1), "--out", s(dir.path())]);
    let d = json(&dir.path().join("oracle.json"))["distance"].as_f64().unwrap();
    let (_, red) = lengths(dir.path());
    assert!((red - d).abs() <= 0.02 * d, "{red} {d}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "manifold: plane\n0 0\n1 nope\n").unwrap();
    assert_eq!(run(&["geodesic", s(&bad), s(&bad)]).status.code(), Some(EXIT_INPUT));
    assert_eq!(run(&["geodesic", "/nonexistent/a.txt", "/nonexistent/b.txt"]).status.code(), Some(EXIT_INPUT));

    let plane = save(dir.path(), "p.txt", &DiscreteCurve::from_fn(Manifold::Plane, 10, |t| [t, 0.0, 0.0]).unwrap());
    let h2 = save(
        dir.path(),
        "h.txt",
        &DiscreteCurve::from_fn(Manifold::HyperbolicHalfPlane, 10, |t| [t, 1.0, 0.0]).unwrap(),
    );
    assert_eq!(run(&["match", s(&plane), s(&h2), "--out", s(dir.path())]).status.code(), Some(EXIT_INPUT));
    assert_eq!(run(&["oracle", s(&h2), s(&h2), "--out", s(dir.path())]).status.code(), Some(EXIT_INPUT));
    assert_eq!(run(&["geodesic", s(&plane), s(&plane), "--b", "-1"]).status.code(), Some(EXIT_INPUT));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(EXIT_INPUT));
}

#[test]
fn solver_failures_exit_with_three() {
    let dir = TempDir::new().unwrap();
    ok(&["gen", "pair", "--manifold", "s2", "--samples", "30", "--seed", "1", "--out", s(dir.path())]);
    let (c0, c1) = (dir.path().join("c0.txt"), dir.path().join("c1.txt"));
    let out = run(&["geodesic", s(&c0), s(&c1), "--solver-iter", "1", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(EXIT_SOLVER), "{}", String::from_utf8_lossy(&out.stderr));

    let e = anyhow::Error::from(Error::Divergence { gap_history: vec![1.0, 2.0] }).context("matching");
    assert_eq!(exit_code(&e), EXIT_SOLVER);
    assert_eq!(exit_code(&anyhow::Error::from(Error::DegenerateCurve("x".into()))), EXIT_INPUT);
}

fn check_svg(text: &str) -> roxmltree::Document<'_> {
    let doc = roxmltree::Document::parse(text).expect("well-formed XML");
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.tag_name().namespace(), Some("http://www.w3.org/2000/svg"));
    assert!(root.attribute("viewBox").is_some());
    for node in doc.descendants().filter(|n| n.has_tag_name("polyline")) {
        let points = node.attribute("points").unwrap();
        assert!(points.split_whitespace().count() >= 2);
        for pair in points.split_whitespace() {
            let (x, y) = pair.split_once(',').unwrap();
            assert!(x.parse::<f64>().unwrap().is_finite() && y.parse::<f64>().unwrap().is_finite());
        }
    }
    doc
}

#[test]
fn constant_path_plots_as_dots() {
    let dir = TempDir::new().unwrap();
    let c = DiscreteCurve::from_fn(Manifold::Sphere, 12, |t| [(0.5 * t).cos(), (0.5 * t).sin(), 0.0]).unwrap();
    let p = save(dir.path(), "c.txt", &c);
    ok(&["geodesic", s(&p), s(&p), "--out", s(dir.path())]);
    let svg = dir.path().join("fig.svg");
    ok(&["plot", s(&dir.path().join("geodesic_path.txt")), "-o", s(&svg)]);
    let text = fs::read_to_string(&svg).unwrap();
    let doc = check_svg(&text);
    let dots = doc.descendants().filter(|n| n.has_tag_name("circle") && n.attribute("fill") != Some("none")).count();
    assert_eq!(dots, 13);
}

#[test]
fn plot_rejects_bad_inputs() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["plot"]).status.code(), Some(EXIT_INPUT));
    ok(&["gen", "path", "--samples", "10", "--steps", "2", "--out", s(&dir.path().join("a"))]);
    ok(&["gen", "path", "--manifold", "h2", "--samples", "10", "--steps", "2", "--out", s(&dir.path().join("b"))]);
    let (a, b) = (dir.path().join("a/path.txt"), dir.path().join("b/path.txt"));
    let out = run(&["plot", s(&a), s(&b), "-o", s(&dir.path().join("x.svg"))]);
    assert_eq!(out.status.code(), Some(EXIT_INPUT));
    assert!(!dir.path().join("x.svg").exists());
}

#[test]
fn superposition_matches_golden_file() {
    let dir = TempDir::new().unwrap();
    let gen = dir.path().join("gen");
    ok(&["gen", "h2-segments", "--samples", "16", "--seed", "1", "--out", s(&gen)]);
    let m = dir.path().join("m");
    ok(&[
        "match",
        s(&gen.join("segments_v1_c0.txt")),
        s(&gen.join("segments_v1_c1.txt")),
        "--steps",
        "6",
        "--out",
        s(&m),
    ]);
    let svg = dir.path().join("fig.svg");
    ok(&["plot", s(&m.join("initial_path.txt")), s(&m.join("horizontal_path.txt")), "-o", s(&svg)]);
    let text = fs::read_to_string(&svg).unwrap();
    let doc = check_svg(&text);
    for (id, color) in [("blue", "#1f4fa8"), ("red", "#c0392b")] {
        let group = doc.descendants().find(|n| n.attribute("id") == Some(id)).expect("palette group");
        assert!(group.descendants().any(|n| n.attribute("stroke") == Some(color)));
    }
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/superposition.svg");
    if golden.exists() {
        assert_eq!(text, fs::read_to_string(&golden).unwrap(), "figure differs from {}", golden.display());
    } else {
        fs::create_dir_all(golden.parent().unwrap()).unwrap();
        fs::write(&golden, &text).unwrap();
    }
}
