//! Discrete immersions, vector fields along them, increasing diffeomorphisms
//! of `[0, 1]`, and paths of curves.
//!
//! All objects are sampled on the uniform grid `t_i = i / N`.

use crate::error::{contract, Error, Result};
use crate::geometry::{Coords, Manifold, ManifoldPoint};
use crate::vec3;

/// Smallest allowed increment between consecutive diffeomorphism samples.
pub const MIN_DIFFEO_INCREMENT: f64 = 1e-12;

/// A curve sampled at `N + 1` uniform parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCurve {
    manifold: Manifold,
    points: Vec<Coords>,
}

impl DiscreteCurve {
    /// Builds a curve after checking every point lies on `manifold`.
    pub fn new(manifold: Manifold, points: Vec<Coords>) -> Result<Self> {
        if points.len() < 2 {
            return Err(contract(format!("a curve needs at least 2 samples, got {}", points.len())));
        }
        for p in &points {
            manifold.check_point(p)?;
        }
        Ok(Self { manifold, points })
    }

    /// Builds a curve from rows of 2 (plane, half-plane) or 3 (sphere) coordinates.
    pub fn from_rows(manifold: Manifold, rows: &[Vec<f64>]) -> Result<Self> {
        let points =
            rows.iter().map(|r| ManifoldPoint::new(manifold, r).map(|p| *p.coords())).collect::<Result<Vec<_>>>()?;
        Self::new(manifold, points)
    }

    /// Samples `f` at `t_i = i / n` for `i = 0..=n`.
    pub fn from_fn(manifold: Manifold, n: usize, f: impl Fn(f64) -> Coords) -> Result<Self> {
        Self::new(manifold, (0..=n).map(|i| f(i as f64 / n as f64)).collect())
    }

    pub(crate) fn from_raw(manifold: Manifold, points: Vec<Coords>) -> Self {
        Self { manifold, points }
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn points(&self) -> &[Coords] {
        &self.points
    }

    pub fn point(&self, i: usize) -> ManifoldPoint {
        ManifoldPoint::from_raw(self.manifold, self.points[i])
    }

    /// Number of samples, `N + 1`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of grid intervals `N`.
    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    /// Sum of geodesic distances between consecutive samples.
    pub fn polygon_length(&self) -> f64 {
        self.points.windows(2).map(|w| self.manifold.dist(&w[0], &w[1])).sum()
    }

    /// Largest pointwise geodesic distance to `other`.
    pub fn max_distance(&self, other: &DiscreteCurve) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.points.iter().zip(&other.points).map(|(p, q)| self.manifold.dist(p, q)).fold(0.0, f64::max))
    }

    /// `(∫ d(c(t), other(t))^2 dt)^{1/2}`, trapezoidal in `t`.
    pub fn l2_distance(&self, other: &DiscreteCurve) -> Result<f64> {
        self.check_compatible(other)?;
        let d2: Vec<f64> =
            self.points.iter().zip(&other.points).map(|(p, q)| self.manifold.dist(p, q).powi(2)).collect();
        Ok(trapezoid(&d2).sqrt())
    }

    pub(crate) fn check_compatible(&self, other: &DiscreteCurve) -> Result<()> {
        if self.manifold != other.manifold {
            return Err(contract(format!(
                "curves on different manifolds ({} and {})",
                self.manifold.tag(),
                other.manifold.tag()
            )));
        }
        if self.len() != other.len() {
            return Err(contract(format!("curves have different sample counts ({} and {})", self.len(), other.len())));
        }
        Ok(())
    }
}

/// One tangent vector per sample of a curve. The curve is passed alongside
/// wherever the base points matter.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    vectors: Vec<Coords>,
}

impl VectorField {
    pub fn new(vectors: Vec<Coords>) -> Self {
        Self { vectors }
    }

    /// Samples `f(t_i, c(t_i))`, projected to the tangent space at each point.
    pub fn from_fn(c: &DiscreteCurve, f: impl Fn(f64, &Coords) -> Coords) -> Self {
        let n = c.intervals() as f64;
        let m = c.manifold();
        Self::new(c.points().iter().enumerate().map(|(i, p)| m.project_tangent(p, &f(i as f64 / n, p))).collect())
    }

    pub fn vectors(&self) -> &[Coords] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.vectors.iter().map(vec3::max_abs).fold(0.0, f64::max)
    }

    /// Largest Riemannian norm over the nodes.
    pub fn max_norm(&self, c: &DiscreteCurve) -> f64 {
        let m = c.manifold();
        self.vectors.iter().zip(c.points()).map(|(v, p)| m.norm(p, v)).fold(0.0, f64::max)
    }

    /// `alpha * self + beta * other`, node by node.
    pub fn combine(&self, alpha: f64, other: &VectorField, beta: f64) -> VectorField {
        VectorField::new(
            self.vectors.iter().zip(&other.vectors).map(|(a, b)| vec3::axpy(&vec3::scale(a, alpha), beta, b)).collect(),
        )
    }

    /// Multiplies the vector at node `i` by `f[i]`.
    pub fn scaled_by(&self, f: &[f64]) -> VectorField {
        VectorField::new(self.vectors.iter().zip(f).map(|(v, s)| vec3::scale(v, *s)).collect())
    }
}

/// Velocity `c_t` by differences of logarithms: centered inside, second-order
/// one-sided at the ends.
pub fn velocity(c: &DiscreteCurve) -> Result<VectorField> {
    let v = velocity_raw(c.manifold(), c.points())?;
    check_immersion(c, &v)?;
    Ok(VectorField::new(v))
}

pub(crate) fn velocity_raw(m: Manifold, points: &[Coords]) -> Result<Vec<Coords>> {
    let len = points.len();
    if len < 3 {
        return Err(contract(format!("velocity needs at least 3 samples, got {len}")));
    }
    let last = len - 1;
    let inv_2h = 0.5 * last as f64;
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let p = &points[i];
        let d = if i == 0 {
            vec3::sub(&vec3::scale(&m.log(p, &points[1])?, 4.0), &m.log(p, &points[2])?)
        } else if i == last {
            vec3::sub(&m.log(p, &points[last - 2])?, &vec3::scale(&m.log(p, &points[last - 1])?, 4.0))
        } else {
            vec3::sub(&m.log(p, &points[i + 1])?, &m.log(p, &points[i - 1])?)
        };
        out.push(vec3::scale(&d, inv_2h));
    }
    Ok(out)
}

fn check_immersion(c: &DiscreteCurve, v: &[Coords]) -> Result<()> {
    let m = c.manifold();
    let floor = 1e-10 * c.polygon_length();
    for (i, (p, vi)) in c.points().iter().zip(v).enumerate() {
        let speed = m.norm(p, vi);
        if !(speed > floor) {
            return Err(Error::DegenerateCurve(format!("speed {speed:e} at sample {i}")));
        }
    }
    Ok(())
}

/// Speeds `|c_t|` at every node.
pub fn speeds(c: &DiscreteCurve, v: &VectorField) -> Vec<f64> {
    let m = c.manifold();
    c.points().iter().zip(v.vectors()).map(|(p, w)| m.norm(p, w)).collect()
}

/// Trapezoidal quadrature of uniformly spaced samples over `[0, 1]`.
pub fn trapezoid(f: &[f64]) -> f64 {
    let n = f.len() - 1;
    let inner: f64 = f[1..n].iter().sum();
    (inner + 0.5 * (f[0] + f[n])) / n as f64
}

/// Length `∫ |c_t| dt`, trapezoidal.
pub fn arc_length(c: &DiscreteCurve) -> Result<f64> {
    let v = velocity(c)?;
    Ok(trapezoid(&speeds(c, &v)))
}

/// `c ∘ φ`, evaluated by geodesic interpolation between neighbouring samples.
pub fn reparameterize(c: &DiscreteCurve, phi: &Diffeo) -> Result<DiscreteCurve> {
    let m = c.manifold();
    let n = c.intervals();
    let points = phi.values().iter().map(|&t| c.evaluate_at(t, n, m)).collect::<Result<Vec<_>>>()?;
    Ok(DiscreteCurve::from_raw(m, points))
}

impl DiscreteCurve {
    /// Position at parameter `t` by geodesic interpolation.
    pub fn at(&self, t: f64) -> Result<Coords> {
        self.evaluate_at(t, self.intervals(), self.manifold)
    }

    fn evaluate_at(&self, t: f64, n: usize, m: Manifold) -> Result<Coords> {
        let (j, lambda) = locate(t, n);
        if lambda <= 1e-13 {
            Ok(self.points[j])
        } else if lambda >= 1.0 - 1e-13 {
            Ok(self.points[j + 1])
        } else {
            m.interpolate(&self.points[j], &self.points[j + 1], lambda)
        }
    }
}

/// Interval index and fractional position of `t` on an `n`-interval grid.
#[inline]
fn locate(t: f64, n: usize) -> (usize, f64) {
    let x = (t.clamp(0.0, 1.0)) * n as f64;
    let j = (x.floor() as usize).min(n - 1);
    (j, x - j as f64)
}

/// An increasing diffeomorphism of `[0, 1]`, sampled on the uniform grid and
/// evaluated piecewise linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct Diffeo {
    values: Vec<f64>,
}

impl Diffeo {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidDiffeo("need at least 2 samples".into()));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 1.0 {
            return Err(Error::InvalidDiffeo(format!(
                "endpoints must be 0 and 1, got {} and {}",
                values[0],
                values[values.len() - 1]
            )));
        }
        if let Some(i) = values.windows(2).position(|w| !(w[1] - w[0] > MIN_DIFFEO_INCREMENT)) {
            return Err(Error::InvalidDiffeo(format!("not strictly increasing at sample {i}")));
        }
        Ok(Self { values })
    }

    pub fn identity(n: usize) -> Self {
        Self { values: (0..=n).map(|i| i as f64 / n as f64).collect() }
    }

    /// Samples `f` on the grid, pinning the endpoints to 0 and 1.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
        values[0] = 0.0;
        values[n] = 1.0;
        Self::new(values)
    }

    /// Clips increments below [`MIN_DIFFEO_INCREMENT`] and rescales so the
    /// last sample is 1. Returns the repaired map and the number of clipped
    /// increments.
    pub fn repaired(values: &[f64]) -> (Self, usize) {
        let raw: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let clipped = raw.iter().filter(|d| !(**d > MIN_DIFFEO_INCREMENT)).count();
        let mut floor = MIN_DIFFEO_INCREMENT;
        loop {
            let increments: Vec<f64> = raw.iter().map(|d| if *d > floor { *d } else { floor }).collect();
            let total: f64 = increments.iter().sum();
            if increments.iter().all(|d| d / total > 1.5 * MIN_DIFFEO_INCREMENT) {
                let mut out = Vec::with_capacity(values.len());
                let mut acc = 0.0;
                out.push(0.0);
                for d in &increments[..increments.len() - 1] {
                    acc += d / total;
                    out.push(acc);
                }
                out.push(1.0);
                return (Self { values: out }, clipped);
            }
            floor *= 2.0 * total.max(1.0);
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    /// Piecewise-linear evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        let (j, lambda) = locate(t, self.intervals());
        self.values[j] + lambda * (self.values[j + 1] - self.values[j])
    }

    /// Piecewise-linear inverse resampled on the uniform grid.
    pub fn inverse(&self) -> Diffeo {
        let n = self.intervals();
        let mut out = Vec::with_capacity(n + 1);
        out.push(0.0);
        let mut j = 0;
        for i in 1..n {
            let t = i as f64 / n as f64;
            while j + 1 < n && self.values[j + 1] <= t {
                j += 1;
            }
            let (lo, hi) = (self.values[j], self.values[j + 1]);
            out.push((j as f64 + (t - lo) / (hi - lo)) / n as f64);
        }
        out.push(1.0);
        Diffeo::repaired(&out).0
    }

    /// `self ∘ inner`, sampled on the grid of `inner`.
    pub fn compose(&self, inner: &Diffeo) -> Diffeo {
        let values: Vec<f64> = inner.values.iter().map(|&t| self.eval(t)).collect();
        Diffeo::repaired(&values).0
    }

    /// Sup-norm distance between the samples of two maps on the same grid.
    pub fn sup_distance(&self, other: &Diffeo) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// A path of curves: row `k` is the curve at `s_k = k / n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePath {
    manifold: Manifold,
    rows: Vec<DiscreteCurve>,
}

impl CurvePath {
    pub fn new(rows: Vec<DiscreteCurve>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(contract(format!("a path needs at least 2 rows, got {}", rows.len())));
        }
        let manifold = rows[0].manifold();
        for r in &rows[1..] {
            rows[0].check_compatible(r)?;
        }
        Ok(Self { manifold, rows })
    }

    /// Samples `f(s_k, t_i)` on an `(n + 1) x (intervals + 1)` grid.
    pub fn from_fn(manifold: Manifold, n: usize, intervals: usize, f: impl Fn(f64, f64) -> Coords) -> Result<Self> {
        let rows = (0..=n)
            .map(|k| {
                let s = k as f64 / n as f64;
                DiscreteCurve::from_fn(manifold, intervals, |t| f(s, t))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub(crate) fn from_rows_unchecked(manifold: Manifold, rows: Vec<DiscreteCurve>) -> Self {
        Self { manifold, rows }
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn rows(&self) -> &[DiscreteCurve] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &DiscreteCurve {
        &self.rows[k]
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [DiscreteCurve] {
        &mut self.rows
    }

    /// Number of steps `n` in `s`.
    pub fn steps(&self) -> usize {
        self.rows.len() - 1
    }

    /// Number of samples per row, `N + 1`.
    pub fn samples(&self) -> usize {
        self.rows[0].len()
    }

    pub fn first(&self) -> &DiscreteCurve {
        &self.rows[0]
    }

    pub fn last(&self) -> &DiscreteCurve {
        &self.rows[self.rows.len() - 1]
    }

    /// The `s`-derivative `c_s` at row `k`, by log differences across rows.
    pub fn s_derivative(&self, k: usize) -> Result<VectorField> {
        let n = self.steps();
        let m = self.manifold;
        let inv = if n >= 2 { 0.5 * n as f64 } else { n as f64 };
        let rows = &self.rows;
        let vectors = (0..self.samples())
            .map(|i| -> Result<Coords> {
                let p = &rows[k].points[i];
                if n == 1 {
                    let other = if k == 0 { &rows[1].points[i] } else { &rows[0].points[i] };
                    let d = m.log(p, other)?;
                    return Ok(vec3::scale(&d, if k == 0 { inv } else { -inv }));
                }
                let d = if k == 0 {
                    vec3::sub(&vec3::scale(&m.log(p, &rows[1].points[i])?, 4.0), &m.log(p, &rows[2].points[i])?)
                } else if k == n {
                    vec3::sub(&m.log(p, &rows[n - 2].points[i])?, &vec3::scale(&m.log(p, &rows[n - 1].points[i])?, 4.0))
                } else {
                    vec3::sub(&m.log(p, &rows[k + 1].points[i])?, &m.log(p, &rows[k - 1].points[i])?)
                };
                Ok(vec3::scale(&d, inv))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField::new(vectors))
    }
}
