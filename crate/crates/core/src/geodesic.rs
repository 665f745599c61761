//! Boundary-value problem between two parameterized curves.
//!
//! For plane curves with `a = 2b` the square-root velocity (SRV) transform
//! maps the elastic metric to a flat one, and geodesics are straight lines
//! in SRV coordinates. Everywhere else the geodesic is found by path
//! straightening: the interior rows of a discrete path are moved to minimize
//! the discrete path energy while the end rows stay fixed.
//!
//! The energy is a sum of squared residual blocks, one per grid cell, so the
//! minimizer takes damped Gauss-Newton steps: a central finite-difference
//! Jacobian, banded normal equations, and a backtracking line search that
//! only accepts steps decreasing the energy.

use crate::curve::{self, CurvePath, DiscreteCurve};
use crate::error::{contract, Error, Result};
use crate::geometry::{Coords, Manifold};
use crate::linalg::BandMatrix;
use crate::metric::{self, cell_residual, start_residual, ElasticParams};
use crate::vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Number of steps `n` of the path in `s`.
    pub n_steps: usize,
    pub max_iterations: usize,
    /// Initial step length tried by the line search.
    pub step_size: f64,
    /// Convergence threshold on the Euclidean norm of the energy gradient.
    pub gradient_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { n_steps: 10, max_iterations: 200, step_size: 1.0, gradient_tolerance: 1e-7 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 2 {
            return Err(contract(format!("n_steps must be at least 2, got {}", self.n_steps)));
        }
        if !(self.step_size > 0.0 && self.gradient_tolerance > 0.0) {
            return Err(contract("step size and gradient tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GeodesicResult {
    pub path: CurvePath,
    /// `G^{a,b}` length of `path`.
    pub length: f64,
    pub energy: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    /// Energy after every accepted iteration, starting with the initial path.
    pub energy_history: Vec<f64>,
}

impl GeodesicResult {
    fn from_path(path: CurvePath, params: &ElasticParams) -> Result<Self> {
        let energy = metric::path_energy(&path, params)?;
        let length = metric::path_length(&path, params)?;
        Ok(Self {
            path,
            length,
            energy,
            converged: true,
            iterations: 0,
            final_gradient_norm: 0.0,
            energy_history: vec![energy],
        })
    }
}

/// Start point and square-root velocity `q = c_t / sqrt|c_t|` of a plane curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Srv {
    pub start: Coords,
    pub q: Vec<Coords>,
}

pub fn srv_transform(c: &DiscreteCurve) -> Result<Srv> {
    if c.manifold() != Manifold::Plane {
        return Err(contract("the SRV transform is only available for plane curves"));
    }
    let v = curve::velocity(c)?;
    let q = v.vectors().iter().map(|w| vec3::scale(w, 1.0 / vec3::norm(w).sqrt())).collect();
    Ok(Srv { start: c.points()[0], q })
}

/// Rebuilds a curve by integrating `q |q|` from the start point (trapezoidal rule).
pub fn srv_inverse(srv: &Srv) -> DiscreteCurve {
    let n = srv.q.len() - 1;
    let h = 1.0 / n as f64;
    let f: Vec<Coords> = srv.q.iter().map(|q| vec3::scale(q, vec3::norm(q))).collect();
    let mut points = Vec::with_capacity(n + 1);
    let mut p = srv.start;
    points.push(p);
    for i in 0..n {
        p = vec3::axpy(&p, 0.5 * h, &vec3::add(&f[i], &f[i + 1]));
        points.push(p);
    }
    DiscreteCurve::from_raw(Manifold::Plane, points)
}

/// Parameterized distance in SRV coordinates,
/// `(|start_1 - start_0|² + a² ‖q_1 - q_0‖²_{L²})^{1/2}`, valid for `a = 2b`.
pub fn srv_distance(c0: &DiscreteCurve, c1: &DiscreteCurve, params: &ElasticParams) -> Result<f64> {
    c0.check_compatible(c1)?;
    if !params.is_srv() {
        return Err(contract("the SRV distance requires a = 2b"));
    }
    let (s0, s1) = (srv_transform(c0)?, srv_transform(c1)?);
    let d2: Vec<f64> = s0.q.iter().zip(&s1.q).map(|(a, b)| vec3::dot(&vec3::sub(a, b), &vec3::sub(a, b))).collect();
    let start = vec3::sub(&s1.start, &s0.start);
    Ok((vec3::dot(&start, &start) + params.a * params.a * curve::trapezoid(&d2)).sqrt())
}

/// Closed-form geodesic between plane curves for `a = 2b`: SRV coordinates
/// and start points are interpolated linearly.
pub fn geodesic_plane(
    c0: &DiscreteCurve,
    c1: &DiscreteCurve,
    params: &ElasticParams,
    config: &SolverConfig,
) -> Result<GeodesicResult> {
    c0.check_compatible(c1)?;
    config.validate()?;
    if c0.manifold() != Manifold::Plane {
        return Err(contract("geodesic_plane needs plane curves"));
    }
    if !params.is_srv() {
        return Err(contract("the closed-form plane geodesic requires a = 2b"));
    }
    if c0 == c1 {
        return constant_path(c0, params, config);
    }
    let (s0, s1) = (srv_transform(c0)?, srv_transform(c1)?);
    let (r0, r1) = (srv_inverse(&s0), srv_inverse(&s1));
    let n = config.n_steps;
    let mut rows = Vec::with_capacity(n + 1);
    rows.push(c0.clone());
    for k in 1..n {
        let s = k as f64 / n as f64;
        let srv = Srv {
            start: vec3::axpy(&vec3::scale(&s0.start, 1.0 - s), s, &s1.start),
            q: s0.q.iter().zip(&s1.q).map(|(a, b)| vec3::axpy(&vec3::scale(a, 1.0 - s), s, b)).collect(),
        };
        // Blend the reconstruction error of the end rows so the interior rows
        // connect exactly to the input curves.
        let r = srv_inverse(&srv);
        let points = r
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let e0 = vec3::sub(&c0.points()[i], &r0.points()[i]);
                let e1 = vec3::sub(&c1.points()[i], &r1.points()[i]);
                vec3::axpy(&vec3::axpy(p, 1.0 - s, &e0), s, &e1)
            })
            .collect();
        rows.push(DiscreteCurve::from_raw(Manifold::Plane, points));
    }
    rows.push(c1.clone());
    GeodesicResult::from_path(CurvePath::from_rows_unchecked(Manifold::Plane, rows), params)
}

fn constant_path(c: &DiscreteCurve, params: &ElasticParams, config: &SolverConfig) -> Result<GeodesicResult> {
    params.validate()?;
    curve::velocity(c)?;
    let rows = vec![c.clone(); config.n_steps + 1];
    GeodesicResult::from_path(CurvePath::from_rows_unchecked(c.manifold(), rows), params)
}

/// Pointwise geodesic interpolation `exp_{c0(t)}(s log_{c0(t)} c1(t))`.
pub fn initial_path(c0: &DiscreteCurve, c1: &DiscreteCurve, n_steps: usize) -> Result<CurvePath> {
    c0.check_compatible(c1)?;
    let m = c0.manifold();
    let mut rows = Vec::with_capacity(n_steps + 1);
    rows.push(c0.clone());
    for k in 1..n_steps {
        let s = k as f64 / n_steps as f64;
        let points =
            c0.points().iter().zip(c1.points()).map(|(p, q)| m.interpolate(p, q, s)).collect::<Result<Vec<_>>>()?;
        rows.push(DiscreteCurve::from_raw(m, points));
    }
    rows.push(c1.clone());
    Ok(CurvePath::from_rows_unchecked(m, rows))
}

/// Geodesic between two curves on any backend by path straightening,
/// starting from pointwise geodesic interpolation.
pub fn geodesic_bvp(
    c0: &DiscreteCurve,
    c1: &DiscreteCurve,
    params: &ElasticParams,
    config: &SolverConfig,
) -> Result<GeodesicResult> {
    config.validate()?;
    if c0 == c1 {
        return constant_path(c0, params, config);
    }
    let init = initial_path(c0, c1, config.n_steps)?;
    geodesic_bvp_from(init, params, config)
}

/// Path straightening from a given initial path. Its first and last rows
/// are the boundary curves and are returned unchanged. The number of steps
/// of `initial` overrides `config.n_steps`.
pub fn geodesic_bvp_from(initial: CurvePath, params: &ElasticParams, config: &SolverConfig) -> Result<GeodesicResult> {
    params.validate()?;
    config.validate()?;
    if initial.steps() < 2 {
        return Err(contract("path straightening needs at least one interior row"));
    }
    if initial.samples() < 3 {
        return Err(contract("curves need at least 3 samples"));
    }
    curve::velocity(initial.first())?;
    curve::velocity(initial.last())?;
    let mut solver = Straightener::new(initial, *params);
    solver.run(config)
}

/// Working state of the path-straightening minimizer.
struct Straightener {
    manifold: Manifold,
    params: ElasticParams,
    rows: Vec<Vec<Coords>>,
    n: usize,
    samples: usize,
    ds: f64,
    h: f64,
    fd_step: f64,
}

/// Residuals of one path: per-cell blocks in row-major `(k, i)` order and one
/// start-point block per step.
struct Residuals {
    cells: Vec<[f64; 4]>,
    starts: Vec<[f64; 3]>,
}

impl Residuals {
    fn energy(&self) -> f64 {
        let c: f64 = self.cells.iter().flat_map(|r| r.iter()).map(|x| x * x).sum();
        let s: f64 = self.starts.iter().flat_map(|r| r.iter()).map(|x| x * x).sum();
        c + s
    }
}

const DOF: usize = 2;

impl Straightener {
    fn new(path: CurvePath, params: ElasticParams) -> Self {
        let manifold = path.manifold();
        let n = path.steps();
        let samples = path.samples();
        let scale = path.first().polygon_length().max(path.last().polygon_length()).max(1e-3);
        let rows = path.rows().iter().map(|r| r.points().to_vec()).collect();
        Self {
            manifold,
            params,
            rows,
            n,
            samples,
            ds: 1.0 / n as f64,
            h: 1.0 / (samples - 1) as f64,
            fd_step: 1e-6 * scale,
        }
    }

    #[inline]
    fn cell(&self, rows: &[Vec<Coords>], k: usize, i: usize) -> Result<[f64; 4]> {
        cell_residual(
            self.manifold,
            &self.params,
            self.ds,
            self.h,
            &rows[k][i],
            &rows[k][i + 1],
            &rows[k + 1][i],
            &rows[k + 1][i + 1],
        )
    }

    #[inline]
    fn start(&self, rows: &[Vec<Coords>], k: usize) -> Result<[f64; 3]> {
        start_residual(self.manifold, self.ds, &rows[k][0], &rows[k + 1][0])
    }

    fn residuals(&self, rows: &[Vec<Coords>]) -> Result<Residuals> {
        let cols = self.samples - 1;
        let mut cells = Vec::with_capacity(self.n * cols);
        for k in 0..self.n {
            for i in 0..cols {
                cells.push(self.cell(rows, k, i)?);
            }
        }
        let starts = (0..self.n).map(|k| self.start(rows, k)).collect::<Result<Vec<_>>>()?;
        Ok(Residuals { cells, starts })
    }

    /// Index of degree of freedom `j` at interior row `k`, sample `i`.
    #[inline]
    fn var(&self, k: usize, i: usize, j: usize) -> usize {
        (i * (self.n - 1) + (k - 1)) * DOF + j
    }

    fn n_vars(&self) -> usize {
        (self.n - 1) * self.samples * DOF
    }

    fn bandwidth(&self) -> usize {
        DOF * self.n + 1
    }

    /// Finite-difference Jacobian blocks, accumulated into the Gauss-Newton
    /// matrix `JᵀJ` and the half gradient `Jᵀr`.
    fn linearize(&mut self, res: &Residuals) -> Result<(BandMatrix, Vec<f64>)> {
        let cols = self.samples - 1;
        let m = self.manifold;
        // d(cell residual)/d(var): per cell, 4 corner points x DOF columns
        let mut cell_jac = vec![[[0.0f64; 4]; 4 * DOF]; self.n * cols];
        let mut start_jac = vec![[[0.0f64; 3]; 2 * DOF]; self.n];
        let eps = self.fd_step;
        let inv = 0.5 / eps;
        let mut rows = std::mem::take(&mut self.rows);
        for k in 1..self.n {
            for i in 0..self.samples {
                let p = rows[k][i];
                let frame = m.frame(&p);
                for (j, e) in frame.iter().enumerate() {
                    let plus = m.exp(&p, &vec3::scale(e, eps));
                    let minus = m.exp(&p, &vec3::scale(e, -eps));
                    // cells touching (k, i): rows k-1 and k, columns i-1 and i
                    for (kk, corner_row) in [(k - 1, 1usize), (k, 0usize)] {
                        for (ii, corner_col) in [(i.wrapping_sub(1), 1usize), (i, 0usize)] {
                            if ii >= cols {
                                continue;
                            }
                            rows[k][i] = plus;
                            let rp = self.cell(&rows, kk, ii);
                            rows[k][i] = minus;
                            let rm = self.cell(&rows, kk, ii);
                            rows[k][i] = p;
                            let (rp, rm) = (rp?, rm?);
                            let corner = corner_row * 2 + corner_col;
                            let col = &mut cell_jac[kk * cols + ii][corner * DOF + j];
                            for r in 0..4 {
                                col[r] = (rp[r] - rm[r]) * inv;
                            }
                        }
                        if i == 0 {
                            rows[k][i] = plus;
                            let rp = self.start(&rows, kk);
                            rows[k][i] = minus;
                            let rm = self.start(&rows, kk);
                            rows[k][i] = p;
                            let (rp, rm) = (rp?, rm?);
                            let col = &mut start_jac[kk][corner_row * DOF + j];
                            for r in 0..3 {
                                col[r] = (rp[r] - rm[r]) * inv;
                            }
                        }
                    }
                }
            }
        }
        self.rows = rows;

        let mut normal = BandMatrix::zeros(self.n_vars(), self.bandwidth());
        let mut half_grad = vec![0.0; self.n_vars()];
        for kk in 0..self.n {
            for ii in 0..cols {
                let jac = &cell_jac[kk * cols + ii];
                let r = &res.cells[kk * cols + ii];
                let vars: Vec<(usize, usize)> = (0..4)
                    .flat_map(|corner| {
                        let k = kk + corner / 2;
                        let i = ii + corner % 2;
                        (0..DOF).map(move |j| (corner * DOF + j, k, i, j))
                    })
                    .filter(|&(_, k, _, _)| k >= 1 && k < self.n)
                    .map(|(c, k, i, j)| (c, self.var(k, i, j)))
                    .collect();
                accumulate(&mut normal, &mut half_grad, &vars, |c| &jac[c][..], r);
            }
            let jac = &start_jac[kk];
            let r = &res.starts[kk];
            let vars: Vec<(usize, usize)> = (0..2)
                .flat_map(|row| (0..DOF).map(move |j| (row * DOF + j, kk + row, j)))
                .filter(|&(_, k, _)| k >= 1 && k < self.n)
                .map(|(c, k, j)| (c, self.var(k, 0, j)))
                .collect();
            accumulate(&mut normal, &mut half_grad, &vars, |c| &jac[c][..], r);
        }
        Ok((normal, half_grad))
    }

    fn retract(&self, step: &[f64], alpha: f64) -> Vec<Vec<Coords>> {
        let m = self.manifold;
        let mut rows = self.rows.clone();
        for k in 1..self.n {
            for i in 0..self.samples {
                let p = rows[k][i];
                let [e1, e2] = m.frame(&p);
                let d0 = alpha * step[self.var(k, i, 0)];
                let d1 = alpha * step[self.var(k, i, 1)];
                rows[k][i] = m.exp(&p, &vec3::axpy(&vec3::scale(&e1, d0), d1, &e2));
            }
        }
        rows
    }

    fn run(&mut self, config: &SolverConfig) -> Result<GeodesicResult> {
        let mut res = self.residuals(&self.rows)?;
        let mut energy = res.energy();
        let mut history = vec![energy];
        let mut damping = 1e-4;
        let mut converged = false;
        let mut iterations = 0;
        let mut grad_norm = f64::INFINITY;
        let mut stalls = 0;
        while iterations < config.max_iterations {
            let (normal, half_grad) = self.linearize(&res)?;
            grad_norm = 2.0 * half_grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if grad_norm <= config.gradient_tolerance || energy == 0.0 {
                converged = true;
                break;
            }
            iterations += 1;
            let diag = normal.diagonal();
            let diag_scale = diag.iter().fold(0.0f64, |a, d| a.max(*d)).max(f64::MIN_POSITIVE);
            let mut accepted = false;
            while damping < 1e8 {
                let mut damped = normal.clone();
                for (v, d) in diag.iter().enumerate() {
                    damped.add(v, v, damping * (d + 1e-9 * diag_scale));
                }
                let rhs: Vec<f64> = half_grad.iter().map(|g| -g).collect();
                let step = match damped.solve(&rhs) {
                    Ok(s) => s,
                    Err(_) => {
                        damping *= 10.0;
                        continue;
                    }
                };
                let slope: f64 = 2.0 * step.iter().zip(&half_grad).map(|(s, g)| s * g).sum::<f64>();
                let mut alpha = config.step_size;
                for _ in 0..12 {
                    let trial = self.retract(&step, alpha);
                    if let Ok(r) = self.residuals(&trial) {
                        let e = r.energy();
                        if e <= energy + 1e-4 * alpha * slope {
                            let decrease = energy - e;
                            self.rows = trial;
                            res = r;
                            energy = e;
                            accepted = true;
                            stalls = if decrease <= 1e-14 * energy { stalls + 1 } else { 0 };
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                if accepted {
                    if alpha >= config.step_size {
                        damping = (damping / 3.0).max(1e-12);
                    }
                    break;
                }
                damping *= 10.0;
            }
            if !accepted {
                // no damped step lowers the energy: same floor as a stall
                converged = grad_norm <= 1e3 * config.gradient_tolerance;
                break;
            }
            history.push(energy);
            if stalls >= 3 {
                // no measurable progress left at this finite-difference resolution
                converged = grad_norm <= 1e3 * config.gradient_tolerance;
                break;
            }
        }
        let rows =
            std::mem::take(&mut self.rows).into_iter().map(|pts| DiscreteCurve::from_raw(self.manifold, pts)).collect();
        let path = CurvePath::from_rows_unchecked(self.manifold, rows);
        let length = metric::path_length(&path, &self.params)?;
        Ok(GeodesicResult {
            path,
            length,
            energy,
            converged,
            iterations,
            final_gradient_norm: grad_norm,
            energy_history: history,
        })
    }
}

fn accumulate<'a>(
    normal: &mut BandMatrix,
    half_grad: &mut [f64],
    vars: &[(usize, usize)],
    column: impl Fn(usize) -> &'a [f64],
    residual: &[f64],
) {
    for &(ca, va) in vars {
        let ja = column(ca);
        half_grad[va] += ja.iter().zip(residual).map(|(x, r)| x * r).sum::<f64>();
        for &(cb, vb) in vars {
            if vb > va {
                continue;
            }
            let jb = column(cb);
            normal.add(va, vb, ja.iter().zip(jb).map(|(x, y)| x * y).sum());
        }
    }
}

/// Geodesic with the solver suited to the inputs: closed form for plane
/// curves under an SRV-flat metric, path straightening otherwise. A warm
/// start path is used by path straightening when given.
pub fn geodesic(
    c0: &DiscreteCurve,
    c1: &DiscreteCurve,
    params: &ElasticParams,
    config: &SolverConfig,
    warm_start: Option<CurvePath>,
) -> Result<GeodesicResult> {
    if c0.manifold() == Manifold::Plane && params.is_srv() {
        return geodesic_plane(c0, c1, params, config);
    }
    match warm_start {
        Some(path) => geodesic_bvp_from(path, params, config),
        None => geodesic_bvp(c0, c1, params, config),
    }
}

impl GeodesicResult {
    /// Turns a run that stopped before convergence into an error.
    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NotConverged { iterations: self.iterations, gradient_norm: self.final_gradient_norm })
        }
    }
}
