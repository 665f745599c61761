//! Riemannian primitives for the three model spaces.
//!
//! Points and tangent vectors are stored as `[f64; 3]`. The plane and the
//! upper half-plane use the first two slots (the third stays zero); the
//! sphere uses unit vectors of the ambient space. Hyperbolic operations are
//! carried out on the hyperboloid model, which gives closed forms for exp,
//! log and parallel transport, and are mapped back to half-plane coordinates.

use crate::curve::{DiscreteCurve, VectorField};
use crate::error::{contract, Error, Result};
use crate::vec3::{self, Vec3};

pub type Coords = Vec3;

/// Points with `<p, q> < -1 + ANTIPODAL_TOLERANCE` are treated as antipodal.
pub const ANTIPODAL_TOLERANCE: f64 = 1e-6;

const SPHERE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Manifold {
    Plane,
    HyperbolicHalfPlane,
    Sphere,
}

impl Manifold {
    pub const ALL: [Manifold; 3] = [Manifold::Plane, Manifold::HyperbolicHalfPlane, Manifold::Sphere];

    /// Short tag used in file headers.
    pub fn tag(self) -> &'static str {
        match self {
            Manifold::Plane => "plane",
            Manifold::HyperbolicHalfPlane => "h2",
            Manifold::Sphere => "s2",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag.trim().to_ascii_lowercase().as_str() {
            "plane" | "r2" => Some(Manifold::Plane),
            "h2" | "hyperbolic" => Some(Manifold::HyperbolicHalfPlane),
            "s2" | "sphere" => Some(Manifold::Sphere),
            _ => None,
        }
    }

    /// Number of stored coordinates per point.
    pub fn ambient_dim(self) -> usize {
        match self {
            Manifold::Sphere => 3,
            _ => 2,
        }
    }

    pub fn check_point(self, p: &Coords) -> Result<()> {
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinates {p:?}")));
        }
        match self {
            Manifold::Plane => {
                if p[2] != 0.0 {
                    return Err(Error::InvalidPoint(format!("plane point with third coordinate {p:?}")));
                }
            }
            Manifold::HyperbolicHalfPlane => {
                if p[2] != 0.0 || p[1] <= 0.0 {
                    return Err(Error::InvalidPoint(format!("half-plane point needs y > 0, got {p:?}")));
                }
            }
            Manifold::Sphere => {
                if (vec3::norm(p) - 1.0).abs() > SPHERE_TOLERANCE {
                    return Err(Error::InvalidPoint(format!("sphere point off the unit sphere: {p:?}")));
                }
            }
        }
        Ok(())
    }

    /// Riemannian inner product of two tangent vectors at `p`.
    #[inline]
    pub fn inner(self, p: &Coords, u: &Coords, v: &Coords) -> f64 {
        match self {
            Manifold::Plane | Manifold::Sphere => vec3::dot(u, v),
            Manifold::HyperbolicHalfPlane => (u[0] * v[0] + u[1] * v[1]) / (p[1] * p[1]),
        }
    }

    #[inline]
    pub fn norm(self, p: &Coords, v: &Coords) -> f64 {
        self.inner(p, v, v).max(0.0).sqrt()
    }

    /// Components of `v` in an orthonormal frame, embedded isometrically in
    /// three slots: the Euclidean norm of the result is the Riemannian norm.
    #[inline]
    pub fn orthonormal_components(self, p: &Coords, v: &Coords) -> Coords {
        match self {
            Manifold::Plane | Manifold::Sphere => *v,
            Manifold::HyperbolicHalfPlane => [v[0] / p[1], v[1] / p[1], 0.0],
        }
    }

    /// Orthonormal basis of the tangent plane at `p`.
    pub fn frame(self, p: &Coords) -> [Coords; 2] {
        match self {
            Manifold::Plane => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            Manifold::HyperbolicHalfPlane => [[p[1], 0.0, 0.0], [0.0, p[1], 0.0]],
            Manifold::Sphere => {
                let axis = if p[0].abs() <= p[1].abs() && p[0].abs() <= p[2].abs() {
                    [1.0, 0.0, 0.0]
                } else if p[1].abs() <= p[2].abs() {
                    [0.0, 1.0, 0.0]
                } else {
                    [0.0, 0.0, 1.0]
                };
                let e1 = vec3::axpy(&axis, -vec3::dot(&axis, p), p);
                let e1 = vec3::scale(&e1, 1.0 / vec3::norm(&e1));
                let e2 = vec3::cross(p, &e1);
                [e1, e2]
            }
        }
    }

    /// Orthogonal projection onto the tangent space (identity except on the sphere).
    #[inline]
    pub fn project_tangent(self, p: &Coords, v: &Coords) -> Coords {
        match self {
            Manifold::Sphere => vec3::axpy(v, -vec3::dot(p, v), p),
            _ => [v[0], v[1], 0.0],
        }
    }

    pub fn exp(self, p: &Coords, v: &Coords) -> Coords {
        match self {
            Manifold::Plane => [p[0] + v[0], p[1] + v[1], 0.0],
            Manifold::Sphere => {
                let nv = vec3::norm(v);
                let q = if nv < 1e-12 {
                    vec3::add(p, v)
                } else {
                    let (s, c) = nv.sin_cos();
                    vec3::axpy(&vec3::scale(p, c), s / nv, v)
                };
                vec3::scale(&q, 1.0 / vec3::norm(&q))
            }
            Manifold::HyperbolicHalfPlane => {
                let x = hyp::lift(p);
                let big_v = hyp::push(p, v);
                let nv = hyp::minkowski(&big_v, &big_v).max(0.0).sqrt();
                let y = if nv < 1e-12 {
                    vec3::add(&x, &big_v)
                } else {
                    vec3::axpy(&vec3::scale(&x, nv.cosh()), nv.sinh() / nv, &big_v)
                };
                hyp::project(&y)
            }
        }
    }

    /// Inverse of [`Manifold::exp`] along the minimal geodesic.
    pub fn log(self, p: &Coords, q: &Coords) -> Result<Coords> {
        match self {
            Manifold::Plane => Ok([q[0] - p[0], q[1] - p[1], 0.0]),
            Manifold::Sphere => {
                let c = vec3::dot(p, q);
                if c < -1.0 + ANTIPODAL_TOLERANCE {
                    return Err(antipodal(p, q));
                }
                let u = vec3::axpy(q, -c, p);
                let nu = vec3::norm(&u);
                if nu < 1e-15 {
                    return Ok(u);
                }
                let theta = nu.atan2(c);
                Ok(vec3::scale(&u, theta / nu))
            }
            Manifold::HyperbolicHalfPlane => {
                let x = hyp::lift(p);
                let y = hyp::lift(q);
                let d = hyp::dist(p, q);
                // Y - alpha X with alpha - 1 taken from the closed form to avoid cancellation.
                let alpha_m1 = hyp::cosh_dist_minus_one(p, q);
                let u = vec3::axpy(&vec3::sub(&y, &x), -alpha_m1, &x);
                let factor = if d < 1e-8 { 1.0 } else { d / d.sinh() };
                Ok(hyp::pull(p, &vec3::scale(&u, factor)))
            }
        }
    }

    /// Geodesic distance.
    pub fn dist(self, p: &Coords, q: &Coords) -> f64 {
        match self {
            Manifold::Plane => vec3::norm(&vec3::sub(q, p)),
            Manifold::Sphere => vec3::norm(&vec3::cross(p, q)).atan2(vec3::dot(p, q)),
            Manifold::HyperbolicHalfPlane => hyp::dist(p, q),
        }
    }

    /// Parallel transport of `v` from `p` to `q` along the minimal geodesic.
    pub fn transport(self, p: &Coords, q: &Coords, v: &Coords) -> Result<Coords> {
        match self {
            Manifold::Plane => Ok(*v),
            Manifold::Sphere => {
                let c = vec3::dot(p, q);
                if c < -1.0 + ANTIPODAL_TOLERANCE {
                    return Err(antipodal(p, q));
                }
                let k = vec3::dot(q, v) / (1.0 + c);
                Ok(vec3::axpy(v, -k, &vec3::add(p, q)))
            }
            Manifold::HyperbolicHalfPlane => {
                let x = hyp::lift(p);
                let y = hyp::lift(q);
                let big_v = hyp::push(p, v);
                let alpha = 1.0 + hyp::cosh_dist_minus_one(p, q);
                let k = hyp::minkowski(&y, &big_v) / (1.0 + alpha);
                let moved = vec3::axpy(&big_v, k, &vec3::add(&x, &y));
                Ok(hyp::pull(q, &moved))
            }
        }
    }

    /// Midpoint of the minimal geodesic from `p` to `q`.
    pub fn midpoint(self, p: &Coords, q: &Coords) -> Result<Coords> {
        match self {
            Manifold::Plane => Ok([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.0]),
            Manifold::Sphere => {
                if vec3::dot(p, q) < -1.0 + ANTIPODAL_TOLERANCE {
                    return Err(antipodal(p, q));
                }
                let m = vec3::add(p, q);
                Ok(vec3::scale(&m, 1.0 / vec3::norm(&m)))
            }
            Manifold::HyperbolicHalfPlane => {
                let s = vec3::add(&hyp::lift(p), &hyp::lift(q));
                let n = (-hyp::minkowski(&s, &s)).sqrt();
                Ok(hyp::project(&vec3::scale(&s, 1.0 / n)))
            }
        }
    }

    /// Point at fraction `lambda` along the minimal geodesic from `p` to `q`.
    pub fn interpolate(self, p: &Coords, q: &Coords, lambda: f64) -> Result<Coords> {
        if lambda == 0.0 {
            return Ok(*p);
        }
        if lambda == 1.0 {
            return Ok(*q);
        }
        let v = self.log(p, q)?;
        Ok(self.exp(p, &vec3::scale(&v, lambda)))
    }
}

fn antipodal(p: &Coords, q: &Coords) -> Error {
    Error::Singularity(format!("antipodal points {p:?} and {q:?}"))
}

/// Hyperboloid model `{X : -X0^2 + X1^2 + X2^2 = -1, X0 > 0}` and its
/// isometry with the upper half-plane.
mod hyp {
    use crate::vec3::Vec3;

    #[inline]
    pub fn minkowski(a: &Vec3, b: &Vec3) -> f64 {
        -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[inline]
    pub fn lift(p: &Vec3) -> Vec3 {
        let (x, y) = (p[0], p[1]);
        let r2 = x * x + y * y;
        [(1.0 + r2) / (2.0 * y), x / y, (1.0 - r2) / (2.0 * y)]
    }

    #[inline]
    pub fn project(big_x: &Vec3) -> Vec3 {
        let y = 1.0 / (big_x[0] + big_x[2]);
        [big_x[1] * y, y, 0.0]
    }

    /// Differential of `lift` at `p`.
    #[inline]
    pub fn push(p: &Vec3, v: &Vec3) -> Vec3 {
        let (x, y) = (p[0], p[1]);
        let (u, w) = (v[0], v[1]);
        let y2 = y * y;
        [
            x / y * u + (y2 - 1.0 - x * x) / (2.0 * y2) * w,
            u / y - x * w / y2,
            -x / y * u + (x * x - y2 - 1.0) / (2.0 * y2) * w,
        ]
    }

    /// Differential of `project` at `lift(p)`.
    #[inline]
    pub fn pull(p: &Vec3, big_v: &Vec3) -> Vec3 {
        let (x, y) = (p[0], p[1]);
        let dy = -(big_v[0] + big_v[2]) * y * y;
        let dx = big_v[1] * y + x / y * dy;
        [dx, dy, 0.0]
    }

    /// `cosh d(p, q) - 1 = |p - q|^2 / (2 y_p y_q)`
    #[inline]
    pub fn cosh_dist_minus_one(p: &Vec3, q: &Vec3) -> f64 {
        let dx = p[0] - q[0];
        let dy = p[1] - q[1];
        (dx * dx + dy * dy) / (2.0 * p[1] * q[1])
    }

    #[inline]
    pub fn dist(p: &Vec3, q: &Vec3) -> f64 {
        let dx = p[0] - q[0];
        let dy = p[1] - q[1];
        2.0 * ((dx * dx + dy * dy).sqrt() / (2.0 * (p[1] * q[1]).sqrt())).asinh()
    }
}

/// A point of one of the model spaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManifoldPoint {
    manifold: Manifold,
    coords: Coords,
}

impl ManifoldPoint {
    pub fn new(manifold: Manifold, coords: &[f64]) -> Result<Self> {
        let coords = pad(manifold, coords)?;
        manifold.check_point(&coords)?;
        Ok(Self { manifold, coords })
    }

    pub(crate) fn from_raw(manifold: Manifold, coords: Coords) -> Self {
        Self { manifold, coords }
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }
}

/// A tangent vector anchored at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    components: Coords,
}

impl TangentVector {
    pub fn new(base: ManifoldPoint, components: &[f64]) -> Result<Self> {
        let components = pad(base.manifold, components)?;
        if components.iter().any(|x| !x.is_finite()) {
            return Err(contract("non-finite tangent vector"));
        }
        if base.manifold == Manifold::Sphere && vec3::dot(&base.coords, &components).abs() > SPHERE_TOLERANCE {
            return Err(contract(format!("vector {components:?} is not tangent to the sphere at {:?}", base.coords)));
        }
        Ok(Self { base, components })
    }

    pub fn zero(base: ManifoldPoint) -> Self {
        Self { base, components: vec3::ZERO }
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn components(&self) -> &Coords {
        &self.components
    }
}

fn pad(manifold: Manifold, values: &[f64]) -> Result<Coords> {
    let dim = manifold.ambient_dim();
    if values.len() != dim {
        return Err(contract(format!("{} expects {dim} coordinates, got {}", manifold.tag(), values.len())));
    }
    let mut out = vec3::ZERO;
    out[..dim].copy_from_slice(values);
    Ok(out)
}

fn same_base(p: &ManifoldPoint, v: &TangentVector) -> Result<()> {
    if v.base != *p {
        return Err(contract(format!("tangent vector based at {:?} used at {:?}", v.base.coords, p.coords)));
    }
    Ok(())
}

fn same_manifold(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<()> {
    if p.manifold != q.manifold {
        return Err(contract(format!("points on different manifolds ({} and {})", p.manifold.tag(), q.manifold.tag())));
    }
    Ok(())
}

pub fn inner(p: &ManifoldPoint, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    same_base(p, u)?;
    same_base(p, v)?;
    Ok(p.manifold.inner(&p.coords, &u.components, &v.components))
}

pub fn exp(p: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
    same_base(p, v)?;
    Ok(ManifoldPoint::from_raw(p.manifold, p.manifold.exp(&p.coords, &v.components)))
}

pub fn log(p: &ManifoldPoint, q: &ManifoldPoint) -> Result<TangentVector> {
    same_manifold(p, q)?;
    let v = p.manifold.log(&p.coords, &q.coords)?;
    Ok(TangentVector { base: *p, components: v })
}

pub fn transport(p: &ManifoldPoint, q: &ManifoldPoint, v: &TangentVector) -> Result<TangentVector> {
    same_manifold(p, q)?;
    same_base(p, v)?;
    let moved = p.manifold.transport(&p.coords, &q.coords, &v.components)?;
    Ok(TangentVector { base: *q, components: moved })
}

/// Discrete covariant derivative `∇_t w` of a vector field along a curve.
///
/// Neighbouring vectors are parallel transported to the node before
/// differencing: centered differences inside, second-order one-sided
/// stencils at the two ends.
pub fn covariant_derivative(c: &DiscreteCurve, w: &VectorField) -> Result<VectorField> {
    if w.len() != c.len() {
        return Err(contract(format!("vector field has {} vectors for a curve with {} nodes", w.len(), c.len())));
    }
    covariant_derivative_raw(c.manifold(), c.points(), w.vectors()).map(VectorField::new)
}

pub(crate) fn covariant_derivative_raw(m: Manifold, points: &[Coords], w: &[Coords]) -> Result<Vec<Coords>> {
    let len = points.len();
    if len < 3 {
        return Err(contract(format!("covariant derivative needs at least 3 nodes, got {len}")));
    }
    let last = len - 1;
    let inv_2h = 0.5 * last as f64;
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let p = &points[i];
        let at = |j: usize| -> Result<Coords> {
            if j == i {
                Ok(w[i])
            } else {
                m.transport(&points[j], p, &w[j])
            }
        };
        let d = if i == 0 {
            let (w0, w1, w2) = (at(0)?, at(1)?, at(2)?);
            vec3::scale(&vec3::add(&vec3::scale(&w0, -3.0), &vec3::sub(&vec3::scale(&w1, 4.0), &w2)), inv_2h)
        } else if i == last {
            let (w0, w1, w2) = (at(last)?, at(last - 1)?, at(last - 2)?);
            vec3::scale(&vec3::add(&vec3::scale(&w0, 3.0), &vec3::sub(&w2, &vec3::scale(&w1, 4.0))), inv_2h)
        } else {
            vec3::scale(&vec3::sub(&at(i + 1)?, &at(i - 1)?), inv_2h)
        };
        out.push(m.project_tangent(p, &d));
    }
    Ok(out)
}
