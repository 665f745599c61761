//! The elastic metric `G^{a,b}` on parameterized curves, path energy and
//! length, and the splitting of a tangent vector into its vertical part
//! (reparameterization) and horizontal part (shape change).
//!
//! Inner products are discretized on the staggered grid: covariant
//! derivatives are differences of transported neighbours taken at segment
//! midpoints, integrated by the midpoint rule. This stencil has no
//! odd-even null space, which matters once the same energy is minimized.

use crate::curve::{self, CurvePath, DiscreteCurve, VectorField};
use crate::error::{contract, Error, Result};
use crate::geometry::{covariant_derivative_raw, Coords, Manifold};
use crate::linalg::solve_tridiagonal;
use crate::vec3;

/// Coefficients of the elastic metric plus the accuracy demanded of the
/// vertical-part solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticParams {
    /// Weight of the normal part of the arc-length derivative.
    pub a: f64,
    /// Weight of the tangential part.
    pub b: f64,
    /// Largest accepted residual of the discrete vertical-part equation,
    /// relative to its right-hand side.
    pub ode_tolerance: f64,
}

impl Default for ElasticParams {
    fn default() -> Self {
        Self { a: 1.0, b: 0.5, ode_tolerance: 1e-8 }
    }
}

impl ElasticParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let p = Self { a, b, ..Self::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite()) {
            return Err(contract(format!("elastic coefficients must be positive, got a={} b={}", self.a, self.b)));
        }
        if !(self.ode_tolerance > 0.0) {
            return Err(contract("ode tolerance must be positive"));
        }
        Ok(())
    }

    /// `(a / b)^2`
    pub fn ratio_squared(&self) -> f64 {
        (self.a / self.b).powi(2)
    }

    /// Whether `a = 2b`, where the square-root velocity transform flattens the metric.
    pub fn is_srv(&self) -> bool {
        (self.a - 2.0 * self.b).abs() <= 1e-12 * self.a
    }
}

/// Integrand of `G` on one grid segment, already multiplied by the segment
/// width: `(a² <Dw^N, Dz^N> + b² <Dw^T, Dz^T>) h / |c_t|`.
#[allow(clippy::too_many_arguments)]
fn segment_term(
    m: Manifold,
    params: &ElasticParams,
    h: f64,
    p0: &Coords,
    p1: &Coords,
    w0: &Coords,
    w1: &Coords,
    z0: &Coords,
    z1: &Coords,
) -> Result<f64> {
    let mid = m.midpoint(p0, p1)?;
    let vel = vec3::scale(&vec3::sub(&m.log(&mid, p1)?, &m.log(&mid, p0)?), 1.0 / h);
    let speed = m.norm(&mid, &vel);
    if !(speed > 0.0) {
        return Err(Error::DegenerateCurve("zero-length segment".into()));
    }
    let unit = vec3::scale(&vel, 1.0 / speed);
    let dw = vec3::scale(&vec3::sub(&m.transport(p1, &mid, w1)?, &m.transport(p0, &mid, w0)?), 1.0 / h);
    let dz = vec3::scale(&vec3::sub(&m.transport(p1, &mid, z1)?, &m.transport(p0, &mid, z0)?), 1.0 / h);
    let wt = m.inner(&mid, &dw, &unit);
    let zt = m.inner(&mid, &dz, &unit);
    let normal = m.inner(&mid, &dw, &dz) - wt * zt;
    Ok((params.a * params.a * normal + params.b * params.b * wt * zt) * h / speed)
}

/// `G^{a,b}_c(w, z) = <w(0), z(0)> + ∫ (a² <∇_ℓ w^N, ∇_ℓ z^N> + b² <∇_ℓ w^T, ∇_ℓ z^T>) dℓ`.
pub fn elastic_inner(c: &DiscreteCurve, w: &VectorField, z: &VectorField, params: &ElasticParams) -> Result<f64> {
    if w.len() != c.len() || z.len() != c.len() {
        return Err(contract("vector fields must have one vector per curve sample"));
    }
    curve::velocity(c)?;
    let m = c.manifold();
    let p = c.points();
    let (w, z) = (w.vectors(), z.vectors());
    let h = 1.0 / c.intervals() as f64;
    let mut total = m.inner(&p[0], &w[0], &z[0]);
    for i in 0..c.intervals() {
        total += segment_term(m, params, h, &p[i], &p[i + 1], &w[i], &w[i + 1], &z[i], &z[i + 1])?;
    }
    Ok(total)
}

pub fn elastic_norm(c: &DiscreteCurve, w: &VectorField, params: &ElasticParams) -> Result<f64> {
    Ok(elastic_inner(c, w, w, params)?.max(0.0).sqrt())
}

/// Residual block of the path energy for the grid cell spanned by rows
/// `k, k+1` and samples `i, i+1`. Its squared norm is the cell's energy.
///
/// The path velocity at row `k + 1/2` is evaluated on the midpoint curve
/// between the two rows.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn cell_residual(
    m: Manifold,
    params: &ElasticParams,
    ds: f64,
    h: f64,
    c00: &Coords,
    c01: &Coords,
    c10: &Coords,
    c11: &Coords,
) -> Result<[f64; 4]> {
    let m0 = m.midpoint(c00, c10)?;
    let m1 = m.midpoint(c01, c11)?;
    let v0 = vec3::scale(&vec3::sub(&m.log(&m0, c10)?, &m.log(&m0, c00)?), 1.0 / ds);
    let v1 = vec3::scale(&vec3::sub(&m.log(&m1, c11)?, &m.log(&m1, c01)?), 1.0 / ds);
    let mid = m.midpoint(&m0, &m1)?;
    let vel = vec3::scale(&vec3::sub(&m.log(&mid, &m1)?, &m.log(&mid, &m0)?), 1.0 / h);
    let speed = m.norm(&mid, &vel);
    if !(speed > 0.0) {
        return Err(Error::DegenerateCurve("zero-length segment in path".into()));
    }
    let unit = vec3::scale(&vel, 1.0 / speed);
    let dv = vec3::scale(&vec3::sub(&m.transport(&m1, &mid, &v1)?, &m.transport(&m0, &mid, &v0)?), 1.0 / h);
    let tangential = m.inner(&mid, &dv, &unit);
    let normal = m.orthonormal_components(&mid, &vec3::axpy(&dv, -tangential, &unit));
    let w = (ds * h / speed).sqrt();
    Ok([params.a * w * normal[0], params.a * w * normal[1], params.a * w * normal[2], params.b * w * tangential])
}

/// Residual of the start-point term `<c_s(0), c_s(0)>` between rows `k, k+1`.
#[inline]
pub(crate) fn start_residual(m: Manifold, ds: f64, c00: &Coords, c10: &Coords) -> Result<[f64; 3]> {
    let m0 = m.midpoint(c00, c10)?;
    let v0 = vec3::scale(&vec3::sub(&m.log(&m0, c10)?, &m.log(&m0, c00)?), 1.0 / ds);
    Ok(vec3::scale(&m.orthonormal_components(&m0, &v0), ds.sqrt()))
}

/// Energy `Δs ‖c_s‖²_G` of each of the `n` steps of a path.
pub(crate) fn step_energies(path: &CurvePath, params: &ElasticParams) -> Result<Vec<f64>> {
    let m = path.manifold();
    let n = path.steps();
    let ds = 1.0 / n as f64;
    let h = 1.0 / (path.samples() - 1) as f64;
    (0..n)
        .map(|k| {
            let (r0, r1) = (path.row(k).points(), path.row(k + 1).points());
            let start = start_residual(m, ds, &r0[0], &r1[0])?;
            let mut e = vec3::dot(&start, &start);
            for i in 0..r0.len() - 1 {
                let r = cell_residual(m, params, ds, h, &r0[i], &r0[i + 1], &r1[i], &r1[i + 1])?;
                e += r.iter().map(|x| x * x).sum::<f64>();
            }
            Ok(e)
        })
        .collect()
}

fn check_rows(path: &CurvePath) -> Result<()> {
    if path.samples() < 3 {
        return Err(contract("path rows need at least 3 samples"));
    }
    for r in path.rows() {
        curve::velocity(r)?;
    }
    Ok(())
}

/// `Σ_k Δs ‖c_s(s_{k+1/2})‖²_G`
pub fn path_energy(path: &CurvePath, params: &ElasticParams) -> Result<f64> {
    check_rows(path)?;
    Ok(step_energies(path, params)?.iter().sum())
}

/// `Σ_k Δs ‖c_s(s_{k+1/2})‖_G`
pub fn path_length(path: &CurvePath, params: &ElasticParams) -> Result<f64> {
    check_rows(path)?;
    Ok(lengths_from_energies(&step_energies(path, params)?))
}

pub(crate) fn lengths_from_energies(e: &[f64]) -> f64 {
    let ds = 1.0 / e.len() as f64;
    e.iter().map(|x| (x.max(0.0) * ds).sqrt()).sum()
}

/// Splitting `w = m v + (w - m v)` of a vector field along a curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// Signed magnitude of the vertical part; zero at both ends.
    pub m: Vec<f64>,
    pub vertical: VectorField,
    pub horizontal: VectorField,
}

/// Node-wise geometric coefficients of a curve used by the vertical-part equation.
struct CurveFrame {
    /// unit velocity `v`
    unit: Vec<Coords>,
    speed: Vec<f64>,
    /// `∇_t v`
    dv: Vec<Coords>,
    /// `<∇_t c_t, v> / |c_t|`
    kappa: Vec<f64>,
}

impl CurveFrame {
    fn new(c: &DiscreteCurve) -> Result<Self> {
        let m = c.manifold();
        let p = c.points();
        let vel = curve::velocity(c)?;
        let speed = curve::speeds(c, &vel);
        let unit: Vec<Coords> = vel.vectors().iter().zip(&speed).map(|(v, s)| vec3::scale(v, 1.0 / s)).collect();
        let dv = covariant_derivative_raw(m, p, &unit)?;
        let dvel = covariant_derivative_raw(m, p, vel.vectors())?;
        let kappa = (0..p.len()).map(|i| m.inner(&p[i], &dvel[i], &unit[i]) / speed[i]).collect();
        Ok(Self { unit, speed, dv, kappa })
    }
}

/// The centered-difference discretization of the two-point boundary-value
/// problem for the vertical magnitude `m`:
///
/// `m'' - κ m' - (a/b)² |∇_t v|² m = <∇²_t w, v> - ((a/b)² - 1) <∇_t w, ∇_t v> - κ <∇_t w, v>`
///
/// with `κ = <∇_t c_t, v> / |c_t|` and `m(0) = m(1) = 0`. Rows are the
/// interior nodes `1..N`.
#[derive(Clone, Debug)]
pub struct VerticalOde {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl VerticalOde {
    pub fn new(c: &DiscreteCurve, w: &VectorField, params: &ElasticParams) -> Result<Self> {
        let frame = CurveFrame::new(c)?;
        Self::with_frame(c, &frame, w, params)
    }

    fn with_frame(c: &DiscreteCurve, frame: &CurveFrame, w: &VectorField, params: &ElasticParams) -> Result<Self> {
        let m = c.manifold();
        let p = c.points();
        let n = c.intervals();
        let h = 1.0 / n as f64;
        let k2 = params.ratio_squared();
        let dw = covariant_derivative_raw(m, p, w.vectors())?;
        let ddw = covariant_derivative_raw(m, p, &dw)?;
        let interior = n - 1;
        let mut lower = vec![0.0; interior];
        let mut diag = vec![0.0; interior];
        let mut upper = vec![0.0; interior];
        let mut rhs = vec![0.0; interior];
        for r in 0..interior {
            let i = r + 1;
            let (u, dv, kappa) = (&frame.unit[i], &frame.dv[i], frame.kappa[i]);
            lower[r] = 1.0 / (h * h) + kappa / (2.0 * h);
            upper[r] = 1.0 / (h * h) - kappa / (2.0 * h);
            diag[r] = -2.0 / (h * h) - k2 * m.inner(&p[i], dv, dv);
            rhs[r] = m.inner(&p[i], &ddw[i], u)
                - (k2 - 1.0) * m.inner(&p[i], &dw[i], dv)
                - kappa * m.inner(&p[i], &dw[i], u);
        }
        Ok(Self { lower, diag, upper, rhs })
    }

    /// Solves for `m` on all nodes, including the zero boundary values.
    pub fn solve(&self, tolerance: f64) -> Result<Vec<f64>> {
        let inner = solve_tridiagonal(&self.lower, &self.diag, &self.upper, &self.rhs)?;
        let mut m = Vec::with_capacity(inner.len() + 2);
        m.push(0.0);
        m.extend_from_slice(&inner);
        m.push(0.0);
        let worst = self.residual(&m).iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
        let scale = self.rhs.iter().fold(1.0f64, |acc, r| acc.max(r.abs()));
        if !(worst <= tolerance * scale) {
            return Err(Error::Conditioning(format!("vertical-part residual {worst:e} exceeds tolerance")));
        }
        Ok(m)
    }

    /// Residual of the discrete equation at the interior nodes for a full-length `m`.
    pub fn residual(&self, m: &[f64]) -> Vec<f64> {
        (0..self.diag.len())
            .map(|r| self.lower[r] * m[r] + self.diag[r] * m[r + 1] + self.upper[r] * m[r + 2] - self.rhs[r])
            .collect()
    }
}

/// Splits `w` into vertical and horizontal parts with respect to `G^{a,b}`.
pub fn decompose(c: &DiscreteCurve, w: &VectorField, params: &ElasticParams) -> Result<Decomposition> {
    params.validate()?;
    if c.intervals() < 4 {
        return Err(contract(format!("decomposition needs N >= 4, got {}", c.intervals())));
    }
    if w.len() != c.len() {
        return Err(contract("vector field must have one vector per curve sample"));
    }
    let frame = CurveFrame::new(c)?;
    decompose_with_frame(c, &frame, w, params)
}

fn decompose_with_frame(
    c: &DiscreteCurve,
    frame: &CurveFrame,
    w: &VectorField,
    params: &ElasticParams,
) -> Result<Decomposition> {
    let ode = VerticalOde::with_frame(c, frame, w, params)?;
    let m = ode.solve(params.ode_tolerance)?;
    let vertical = VectorField::new(frame.unit.iter().zip(&m).map(|(u, mi)| vec3::scale(u, *mi)).collect());
    let horizontal = w.combine(1.0, &vertical, -1.0);
    Ok(Decomposition { m, vertical, horizontal })
}

/// Vertical magnitudes together with node speeds, as needed to propagate
/// the reparameterization along a path.
pub(crate) fn vertical_magnitude(
    c: &DiscreteCurve,
    w: &VectorField,
    params: &ElasticParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let frame = CurveFrame::new(c)?;
    let d = decompose_with_frame(c, &frame, w, params)?;
    Ok((d.m, frame.speed))
}

/// Unit velocity field `v = c_t / |c_t|`.
pub fn unit_velocity(c: &DiscreteCurve) -> Result<VectorField> {
    Ok(VectorField::new(CurveFrame::new(c)?.unit))
}

/// Pointwise residual of the horizontality condition
/// `((a/b)² - 1) <∇_t h, ∇_t v> - <∇²_t h, v> + |c_t|⁻¹ <∇_t c_t, v> <∇_t h, v>`
/// at the interior nodes. Vanishes for horizontal fields as `N` grows.
pub fn horizontality_residual(c: &DiscreteCurve, h: &VectorField, params: &ElasticParams) -> Result<Vec<f64>> {
    let frame = CurveFrame::new(c)?;
    let m = c.manifold();
    let p = c.points();
    let dh = covariant_derivative_raw(m, p, h.vectors())?;
    let ddh = covariant_derivative_raw(m, p, &dh)?;
    let k2 = params.ratio_squared();
    Ok((1..c.intervals())
        .map(|i| {
            let (u, dv) = (&frame.unit[i], &frame.dv[i]);
            (k2 - 1.0) * m.inner(&p[i], &dh[i], dv) - m.inner(&p[i], &ddh[i], u)
                + frame.kappa[i] * m.inner(&p[i], &dh[i], u)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurvePath;

    fn segment(n: usize) -> DiscreteCurve {
        DiscreteCurve::from_fn(Manifold::Plane, n, |t| [t, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn tangential_and_normal_examples() {
        let p = ElasticParams::default();
        let c = segment(50);
        let w = VectorField::from_fn(&c, |t, _| [t, 0.0, 0.0]);
        assert!((elastic_inner(&c, &w, &w, &p).unwrap() - 0.25).abs() <= 1e-6);
        let w = VectorField::from_fn(&c, |t, _| [0.0, t, 0.0]);
        assert!((elastic_inner(&c, &w, &w, &p).unwrap() - 1.0).abs() <= 1e-6);
        let p = ElasticParams::new(3.0, 0.7).unwrap();
        let w = VectorField::from_fn(&c, |t, _| [t, t, 0.0]);
        assert!((elastic_inner(&c, &w, &w, &p).unwrap() - (9.0 + 0.49)).abs() <= 1e-9);
    }

    #[test]
    fn inner_is_symmetric_and_bilinear() {
        let p = ElasticParams::new(1.3, 0.4).unwrap();
        let c = DiscreteCurve::from_fn(Manifold::HyperbolicHalfPlane, 60, |t| [t, 1.0 + 0.3 * (2.0 * t).sin(), 0.0])
            .unwrap();
        let w = VectorField::from_fn(&c, |t, _| [t.cos(), t * t, 0.0]);
        let z = VectorField::from_fn(&c, |t, _| [1.0 - t, (3.0 * t).sin(), 0.0]);
        let y = VectorField::from_fn(&c, |t, _| [0.2, t, 0.0]);
        let g = |a: &VectorField, b: &VectorField| elastic_inner(&c, a, b, &p).unwrap();
        assert!((g(&w, &z) - g(&z, &w)).abs() < 1e-12);
        let lhs = g(&w.combine(2.0, &y, -0.5), &z);
        assert!((lhs - (2.0 * g(&w, &z) - 0.5 * g(&y, &z))).abs() < 1e-10);
        assert!(g(&w, &w) > 0.0);
    }

    #[test]
    fn constant_path_has_zero_energy() {
        let p = ElasticParams::default();
        let path = CurvePath::from_fn(Manifold::Sphere, 5, 30, |_, t| {
            let a = 0.5 * t;
            [a.sin(), 0.0, a.cos()]
        })
        .unwrap();
        assert_eq!(path_energy(&path, &p).unwrap(), 0.0);
        assert_eq!(path_length(&path, &p).unwrap(), 0.0);
    }

    #[test]
    fn translating_segment_has_unit_energy() {
        let p = ElasticParams::default();
        let path = CurvePath::from_fn(Manifold::Plane, 10, 40, |s, t| [t, s, 0.0]).unwrap();
        assert!((path_energy(&path, &p).unwrap() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn energy_matches_inner_product_on_midpoint_curves() {
        let p = ElasticParams::new(1.0, 0.3).unwrap();
        let m = Manifold::HyperbolicHalfPlane;
        let path = CurvePath::from_fn(m, 4, 20, |s, t| [t + 0.2 * s * t * t, 1.0 + 0.5 * s + 0.2 * t, 0.0]).unwrap();
        let ds = 0.25;
        let mut expected = 0.0;
        for k in 0..4 {
            let (a, b) = (path.row(k).points(), path.row(k + 1).points());
            let mids: Vec<Coords> = a.iter().zip(b).map(|(x, y)| m.midpoint(x, y).unwrap()).collect();
            let v: Vec<Coords> = mids
                .iter()
                .zip(a.iter().zip(b))
                .map(|(mid, (x, y))| {
                    vec3::scale(&vec3::sub(&m.log(mid, y).unwrap(), &m.log(mid, x).unwrap()), 1.0 / ds)
                })
                .collect();
            let mc = DiscreteCurve::new(m, mids).unwrap();
            let vf = VectorField::new(v);
            expected += ds * elastic_inner(&mc, &vf, &vf, &p).unwrap();
        }
        let e = path_energy(&path, &p).unwrap();
        assert!((e - expected).abs() <= 1e-12 * expected, "{e} vs {expected}");
        let l = path_length(&path, &p).unwrap();
        assert!(l * l <= e * (1.0 + 1e-12));
    }

    #[test]
    fn vertical_input_has_no_horizontal_part() {
        let p = ElasticParams::default();
        let c = DiscreteCurve::from_fn(Manifold::Plane, 200, |t| [t.cos(), (1.5 * t).sin(), 0.0]).unwrap();
        let v = unit_velocity(&c).unwrap();
        let m0: Vec<f64> = (0..=200).map(|i| (std::f64::consts::PI * i as f64 / 200.0).sin()).collect();
        let w = v.scaled_by(&m0);
        let d = decompose(&c, &w, &p).unwrap();
        assert!(d.horizontal.max_abs() <= 1e-3 * w.max_abs(), "{}", d.horizontal.max_abs());
        assert_eq!(d.m[0], 0.0);
        assert_eq!(d.m[200], 0.0);
    }

    #[test]
    fn constant_normal_field_on_segment_is_horizontal() {
        let p = ElasticParams::default();
        let c = segment(64);
        let w = VectorField::from_fn(&c, |_, _| [0.0, 1.0, 0.0]);
        let d = decompose(&c, &w, &p).unwrap();
        assert!(d.m.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn decomposition_parts_sum_to_input() {
        let p = ElasticParams::default();
        let c = DiscreteCurve::from_fn(Manifold::Sphere, 80, |t| {
            let a = 0.3 + t;
            let z: f64 = 0.3 * (2.0 * t).sin();
            let r = (1.0 - z * z).sqrt();
            [r * a.cos(), r * a.sin(), z]
        })
        .unwrap();
        let w = VectorField::from_fn(&c, |t, _| [t, 1.0 - t, t * t]);
        let d = decompose(&c, &w, &p).unwrap();
        let sum = d.vertical.combine(1.0, &d.horizontal, 1.0);
        for (a, b) in sum.vectors().iter().zip(w.vectors()) {
            assert!(vec3::max_abs(&vec3::sub(a, b)) < 1e-14);
        }
        let ode = VerticalOde::new(&c, &w, &p).unwrap();
        assert!(ode.residual(&d.m).iter().all(|r| r.abs() <= 1e-8));
    }

    #[test]
    fn decompose_rejects_short_curves_and_mismatched_fields() {
        let p = ElasticParams::default();
        let c = segment(3);
        let w = VectorField::from_fn(&c, |_, _| [0.0, 1.0, 0.0]);
        assert!(matches!(decompose(&c, &w, &p), Err(Error::Contract(_))));
        let c = segment(8);
        assert!(matches!(decompose(&c, &w, &p), Err(Error::Contract(_))));
        assert!(ElasticParams::new(0.0, 1.0).is_err());
    }
}
