//! Horizontal part of a path of curves and the iterated optimal matching
//! between a curve and the fiber of another.

use crate::curve::{self, reparameterize, CurvePath, Diffeo, DiscreteCurve};
use crate::error::{contract, Error, Result};
use crate::geodesic::{self, srv_transform, GeodesicResult, SolverConfig};
use crate::geometry::Manifold;
use crate::metric::{vertical_magnitude, ElasticParams};
use crate::vec3;

/// Fraction of repaired increments per step above which a decomposition is flagged.
pub const REPAIR_WARNING_FRACTION: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct PathDecomposition {
    pub horizontal_path: CurvePath,
    /// `φ(s_k)` for every row; `diffeos[0]` is the identity.
    pub diffeos: Vec<Diffeo>,
    /// Vertical magnitude `m(s_k, t_i)`, zero at both ends of every row.
    pub m_field: Vec<Vec<f64>>,
    /// Total number of increments clipped by the monotonicity repair.
    pub repaired_increments: usize,
    /// Set when some step needed repair on more than 10% of its increments.
    pub repair_warning: bool,
}

/// Explicit first-order step of `φ_s = u φ_t`, `u = m / |c_t|`, from `s_k` to `s_{k+1}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PhiScheme {
    /// `φ_{k+1} = φ_k ∘ (id + Δs u_k)`: the Euler step along the
    /// characteristics of the transport equation. Stable for any `Δs` as
    /// long as `id + Δs u_k` stays increasing.
    #[default]
    Characteristics,
    /// `φ_{k+1} = φ_k + Δs u_k φ_t` with centered differences for `φ_t`.
    /// Unstable once `Δs |u| / Δt` exceeds about 1.
    Centered,
}

/// Splits `path` into a horizontal path and a path of diffeomorphisms with
/// `path(s) = horizontal(s) ∘ φ(s)`.
///
/// `φ` solves `φ_s = m / |c_t| · φ_t` with `φ(0) = id`, stepped by explicit
/// Euler in `s` (see [`PhiScheme`]), where `m` is the vertical magnitude of `c_s`.
pub fn horizontal_part(path: &CurvePath, params: &ElasticParams) -> Result<PathDecomposition> {
    horizontal_part_with(path, params, PhiScheme::default())
}

pub fn horizontal_part_with(path: &CurvePath, params: &ElasticParams, scheme: PhiScheme) -> Result<PathDecomposition> {
    params.validate()?;
    let n = path.steps();
    let samples = path.samples();
    if samples < 4 {
        return Err(contract("horizontal_part needs curves with at least 4 samples"));
    }
    let intervals = samples - 1;
    let ds = 1.0 / n as f64;
    let h = 1.0 / intervals as f64;

    let mut m_field = Vec::with_capacity(n + 1);
    let mut diffeos = Vec::with_capacity(n + 1);
    let mut phi = Diffeo::identity(intervals);
    let mut repaired_increments = 0;
    let mut repair_warning = false;
    for k in 0..=n {
        let row = path.row(k);
        let cs = path.s_derivative(k)?;
        let (m, speeds) = vertical_magnitude(row, &cs, params)?;
        if k < n {
            let values = phi.values();
            let next: Vec<f64> = match scheme {
                PhiScheme::Characteristics => (0..samples)
                    .map(|i| {
                        let t = i as f64 * h + ds * m[i] / speeds[i];
                        phi.eval(t.clamp(0.0, 1.0))
                    })
                    .collect(),
                PhiScheme::Centered => (0..samples)
                    .map(|i| {
                        let phi_t = if i == 0 {
                            (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
                        } else if i == intervals {
                            (3.0 * values[i] - 4.0 * values[i - 1] + values[i - 2]) / (2.0 * h)
                        } else {
                            (values[i + 1] - values[i - 1]) / (2.0 * h)
                        };
                        values[i] + ds * m[i] / speeds[i] * phi_t
                    })
                    .collect(),
            };
            let (repaired, clipped) = Diffeo::repaired(&next);
            repaired_increments += clipped;
            repair_warning |= clipped as f64 > REPAIR_WARNING_FRACTION * intervals as f64;
            diffeos.push(std::mem::replace(&mut phi, repaired));
        } else {
            diffeos.push(phi.clone());
        }
        m_field.push(m);
    }

    let rows = path
        .rows()
        .iter()
        .zip(&diffeos)
        .enumerate()
        .map(|(k, (row, phi))| if k == 0 { Ok(row.clone()) } else { reparameterize(row, &phi.inverse()) })
        .collect::<Result<Vec<_>>>()?;
    Ok(PathDecomposition {
        horizontal_path: CurvePath::from_rows_unchecked(path.manifold(), rows),
        diffeos,
        m_field,
        repaired_increments,
        repair_warning,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchConfig {
    pub solver: SolverConfig,
    /// Gap threshold; `None` means `1e-3 · arc_length(c0)`.
    pub threshold: Option<f64>,
    pub max_iterations: usize,
    /// A gap larger than this factor times the previous gap is a divergence.
    pub divergence_factor: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self { solver: SolverConfig::default(), threshold: None, max_iterations: 50, divergence_factor: 1.1 }
    }
}

#[derive(Clone, Debug)]
pub struct MatchResult {
    /// Reparameterization `c1 ∘ total_diffeo` of the target closest to `c0`.
    pub matched_target: DiscreteCurve,
    pub total_diffeo: Diffeo,
    /// Geodesic from `c0` to `matched_target`.
    pub final_geodesic: GeodesicResult,
    /// Geodesic between the input curves as given.
    pub initial_geodesic: GeodesicResult,
    pub gap_history: Vec<f64>,
    /// Length of the geodesic computed at each iteration.
    pub length_history: Vec<f64>,
    pub iterations: usize,
    /// Gap dropped below the threshold.
    pub converged: bool,
    /// Stopped before the gap met the threshold because a new geodesic came
    /// out longer than the best one; the result is the best representative found.
    pub ascent_stop: bool,
    pub threshold: f64,
}

/// Length increase tolerated between iterations of [`optimal_match`].
pub const ASCENT_SLACK: f64 = 1e-6;

/// Iterated optimal matching: alternately computes the geodesic from `c0`
/// to the current representative of the target and replaces that
/// representative with the endpoint of the geodesic's horizontal part.
pub fn optimal_match(
    c0: &DiscreteCurve,
    c1: &DiscreteCurve,
    params: &ElasticParams,
    config: &MatchConfig,
) -> Result<MatchResult> {
    c0.check_compatible(c1)?;
    params.validate()?;
    let threshold = match config.threshold {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(contract(format!("threshold must be positive, got {t}"))),
        None => 1e-3 * curve::arc_length(c0)?,
    };
    curve::velocity(c1)?;

    let intervals = c0.intervals();
    let mut total = Diffeo::identity(intervals);
    let mut target = c1.clone();
    let mut gap_history = Vec::new();
    let mut length_history = Vec::new();
    let mut warm: Option<CurvePath> = None;
    let mut initial_geodesic = None;
    let mut best: Option<(DiscreteCurve, Diffeo, GeodesicResult)> = None;
    let mut gap = 2.0 * threshold;
    let mut iterations = 0;
    let mut ascent_stop = false;
    loop {
        let geo = geodesic::geodesic(c0, &target, params, &config.solver, warm.take())?;
        geo.ensure_converged()?;
        if let Some((_, _, previous)) = &best {
            if geo.length > previous.length + ASCENT_SLACK {
                // the discrete iteration stopped making progress; keep the best
                // representative, which already meets the threshold if the gap does
                ascent_stop = gap > threshold;
                break;
            }
        }
        length_history.push(geo.length);
        if initial_geodesic.is_none() {
            initial_geodesic = Some(geo.clone());
        }
        best = Some((target.clone(), total.clone(), geo));
        if gap <= threshold || iterations >= config.max_iterations {
            break;
        }
        let path = &best.as_ref().expect("just set").2.path;
        let decomposition = horizontal_part(path, params)?;
        let phi_end = decomposition.diffeos.last().expect("path has rows");
        total = total.compose(&phi_end.inverse());
        let next = reparameterize(c1, &total)?;
        let mut horizontal = decomposition.horizontal_path;
        // c^hor(1) is taken as the reparameterized target, so the gap below
        // is exactly the distance the next target moved
        let last = horizontal.steps();
        horizontal.rows_mut()[last] = next.clone();
        gap = horizontal.last().l2_distance(&target)?;
        if let Some(&previous) = gap_history.last() {
            if gap > config.divergence_factor * previous && gap > threshold {
                gap_history.push(gap);
                return Err(Error::Divergence { gap_history });
            }
        }
        gap_history.push(gap);
        target = next;
        warm = Some(horizontal);
        iterations += 1;
    }
    let (target, total, final_geodesic) = best.expect("at least one geodesic");
    let initial_geodesic = initial_geodesic.expect("at least one geodesic");
    Ok(MatchResult {
        matched_target: target,
        total_diffeo: total,
        final_geodesic,
        initial_geodesic,
        gap_history,
        length_history,
        iterations,
        converged: gap <= threshold,
        ascent_stop,
        threshold,
    })
}

/// Default slope window of the lattice search.
pub const ORACLE_WINDOW: usize = 6;
const ORACLE_SWEEPS: usize = 200;

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..40 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Dynamic-programming estimate of `inf_φ d(c0, c1 ∘ φ)` for plane curves
/// under an SRV-flat metric (`a = 2b`).
///
/// A dynamic program over monotone lattice paths on a `(grid_size + 1)²`
/// lattice, with slopes `p / q` for `1 ≤ p, q ≤ 6`, gives the global
/// alignment. Its heights at every lattice column are then refined off the
/// lattice by coordinate descent. Returns the distance and the minimizing `φ` sampled on the grid of `c0`.
pub fn dp_reparam_oracle(
    c0: &DiscreteCurve,
    c1: &DiscreteCurve,
    params: &ElasticParams,
    grid_size: usize,
) -> Result<(f64, Diffeo)> {
    c0.check_compatible(c1)?;
    if c0.manifold() != Manifold::Plane || !params.is_srv() {
        return Err(contract("the reparameterization oracle needs plane curves and a = 2b"));
    }
    if !(2..=200).contains(&grid_size) {
        return Err(contract(format!("oracle grid size must lie in 2..=200, got {grid_size}")));
    }
    let (s0, s1) = (srv_transform(c0)?, srv_transform(c1)?);
    let g = grid_size;
    let w = ORACLE_WINDOW;
    let node = |i: usize| i as f64 / g as f64;
    let sample = |q: &[[f64; 3]], t: f64| {
        let n = q.len() - 1;
        let x = (t * n as f64).clamp(0.0, n as f64);
        let j = (x.floor() as usize).min(n - 1);
        let l = x - j as f64;
        vec3::axpy(&vec3::scale(&q[j], 1.0 - l), l, &q[j + 1])
    };
    // ∫ |q0(t) - sqrt(slope) q1(φ(t))|² dt along one linear piece of φ, Simpson's rule
    let edge_cost = |t0: f64, t1: f64, u0: f64, u1: f64| {
        let slope = (u1 - u0) / (t1 - t0);
        let root = slope.sqrt();
        let pieces = 2 * ((t1 - t0) * g as f64).round().max(1.0) as usize;
        let dt = (t1 - t0) / pieces as f64;
        let mut sum = 0.0;
        for p in 0..=pieces {
            let t = t0 + p as f64 * dt;
            let u = u0 + slope * (t - t0);
            let d = vec3::sub(&sample(&s0.q, t), &vec3::scale(&sample(&s1.q, u), root));
            let weight = if p == 0 || p == pieces {
                1.0
            } else if p % 2 == 1 {
                4.0
            } else {
                2.0
            };
            sum += weight * vec3::dot(&d, &d);
        }
        sum * dt / 3.0
    };
    let edge = |k: usize, i: usize, l: usize, j: usize| edge_cost(node(k), node(i), node(l), node(j));
    let idx = |i: usize, j: usize| i * (g + 1) + j;
    let mut cost = vec![f64::INFINITY; (g + 1) * (g + 1)];
    let mut parent = vec![usize::MAX; (g + 1) * (g + 1)];
    cost[0] = 0.0;
    for i in 1..=g {
        for j in 1..=g {
            let mut best = f64::INFINITY;
            let mut from = usize::MAX;
            for k in i.saturating_sub(w)..i {
                for l in j.saturating_sub(w)..j {
                    let base = cost[idx(k, l)];
                    if !base.is_finite() {
                        continue;
                    }
                    let c = base + edge(k, i, l, j);
                    if c < best {
                        best = c;
                        from = idx(k, l);
                    }
                }
            }
            cost[idx(i, j)] = best;
            parent[idx(i, j)] = from;
        }
    }
    let mut vertices = vec![(g, g)];
    let mut at = idx(g, g);
    while at != 0 {
        at = parent[at];
        vertices.push((at / (g + 1), at % (g + 1)));
    }
    vertices.reverse();

    // Heights of the lattice path at every column, then refined off the
    // lattice by coordinate descent with the columns kept fixed.
    let mut u: Vec<f64> = (0..=g)
        .map(|i| {
            let seg = vertices.windows(2).find(|v| v[1].0 >= i).expect("path reaches the last column");
            let ((k, l), (i1, j)) = (seg[0], seg[1]);
            node(l) + (i - k) as f64 / (i1 - k) as f64 * (node(j) - node(l))
        })
        .collect();
    let piece = |u: &[f64], i: usize| edge_cost(node(i), node(i + 1), u[i], u[i + 1]);
    let mut total: f64 = (0..g).map(|i| piece(&u, i)).sum();
    for _ in 0..ORACLE_SWEEPS {
        let before = total;
        for i in 1..g {
            let (left, right) = (u[i - 1], u[i + 1]);
            let local = |x: f64| edge_cost(node(i - 1), node(i), left, x) + edge_cost(node(i), node(i + 1), x, right);
            let current = local(u[i]);
            let best = golden_section(local, left + 1e-9, right - 1e-9);
            if local(best) < current {
                u[i] = best;
            }
        }
        total = (0..g).map(|i| piece(&u, i)).sum();
        if before - total <= 1e-14 * before.max(1e-300) {
            break;
        }
    }
    let intervals = c0.intervals();
    let values: Vec<f64> = (0..=intervals)
        .map(|r| {
            let x = r as f64 / intervals as f64 * g as f64;
            let i = (x.floor() as usize).min(g - 1);
            u[i] + (x - i as f64) * (u[i + 1] - u[i])
        })
        .collect();
    let (phi, _) = Diffeo::repaired(&values);
    let total: f64 = (0..g).map(|i| piece(&u, i)).sum();
    let start = vec3::sub(&s1.start, &s0.start);
    let distance = (vec3::dot(&start, &start) + params.a * params.a * total).sqrt();
    Ok((distance, phi))
}
