//! Seeded test curves, fields, paths and reparameterizations.
//!
//! Random curves are analytic: a planar profile is drawn and wrapped onto
//! the manifold by the exponential map at a base point, so any curve can be
//! resampled exactly under a reparameterization.

use std::f64::consts::PI;

use rand::Rng;

use crate::curve::{CurvePath, Diffeo, DiscreteCurve, VectorField};
use crate::error::Result;
use crate::geometry::{Coords, Manifold};
use crate::vec3;

const MODES: usize = 3;

/// A planar profile `(L t + Σ a_k sin(kπt), Σ b_k sin(kπt))`, rotated by
/// `angle` and scaled. The `a_k` are small enough that `x' ≥ L / 2`, so the
/// profile is always an immersion.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub length: f64,
    pub a: [f64; MODES],
    pub b: [f64; MODES],
    pub angle: f64,
    pub offset: [f64; 2],
}

impl Profile {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, length: f64) -> Self {
        let mut a = [0.0; MODES];
        let mut b = [0.0; MODES];
        let budget = 0.5 * length / (PI * (1..=MODES).map(|k| k as f64).sum::<f64>());
        for k in 0..MODES {
            a[k] = rng.gen_range(-budget..budget);
            b[k] = rng.gen_range(-0.35..0.35) * length / (k + 1) as f64;
        }
        Self { length, a, b, angle: rng.gen_range(-PI..PI), offset: [0.0, 0.0] }
    }

    pub fn eval(&self, t: f64) -> [f64; 2] {
        let mut x = self.length * t;
        let mut y = 0.0;
        for k in 0..MODES {
            let s = ((k + 1) as f64 * PI * t).sin();
            x += self.a[k] * s;
            y += self.b[k] * s;
        }
        // center the chord on the origin before rotating
        x -= 0.5 * self.length;
        let (sin, cos) = self.angle.sin_cos();
        [cos * x - sin * y + self.offset[0], sin * x + cos * y + self.offset[1]]
    }

    /// Pointwise linear blend of two profiles (still an immersion when both
    /// share the same rotation and chord direction).
    pub fn blend(&self, other: &Profile, s: f64) -> Profile {
        let mix = |u: f64, v: f64| (1.0 - s) * u + s * v;
        let mut a = [0.0; MODES];
        let mut b = [0.0; MODES];
        for k in 0..MODES {
            a[k] = mix(self.a[k], other.a[k]);
            b[k] = mix(self.b[k], other.b[k]);
        }
        Profile {
            length: mix(self.length, other.length),
            a,
            b,
            angle: mix(self.angle, other.angle),
            offset: [mix(self.offset[0], other.offset[0]), mix(self.offset[1], other.offset[1])],
        }
    }
}

/// Default base point of generated curves on each manifold.
pub fn base_point(m: Manifold) -> Coords {
    match m {
        Manifold::Plane => [0.0, 0.0, 0.0],
        Manifold::HyperbolicHalfPlane => [0.0, 1.5, 0.0],
        Manifold::Sphere => [0.0, 0.0, 1.0],
    }
}

/// A profile wrapped onto a manifold: `t ↦ exp_base(x e1 + y e2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothCurve {
    pub manifold: Manifold,
    pub base: Coords,
    pub profile: Profile,
}

impl SmoothCurve {
    pub fn new(manifold: Manifold, profile: Profile) -> Self {
        Self { manifold, base: base_point(manifold), profile }
    }

    /// Random curve with chord length between 0.6 and 1.2.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, manifold: Manifold) -> Self {
        let length = rng.gen_range(0.6..1.2);
        Self::new(manifold, Profile::random(rng, length))
    }

    pub fn eval(&self, t: f64) -> Coords {
        let [x, y] = self.profile.eval(t);
        let [e1, e2] = self.manifold.frame(&self.base);
        self.manifold.exp(&self.base, &vec3::axpy(&vec3::scale(&e1, x), y, &e2))
    }

    /// Samples on `intervals + 1` uniform nodes.
    pub fn sample(&self, intervals: usize) -> Result<DiscreteCurve> {
        DiscreteCurve::from_fn(self.manifold, intervals, |t| self.eval(t))
    }

    /// Samples `t ↦ self(φ(t))` on `intervals + 1` uniform nodes.
    pub fn sample_with(&self, intervals: usize, phi: impl Fn(f64) -> f64) -> Result<DiscreteCurve> {
        DiscreteCurve::from_fn(self.manifold, intervals, |t| self.eval(phi(t)))
    }
}

/// Smooth diffeomorphism `t + α sin(πt)/π + β sin(2πt)/(2π)`, increasing
/// whenever `|α| + |β| < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Warp {
    pub alpha: f64,
    pub beta: f64,
}

impl Warp {
    pub const IDENTITY: Warp = Warp { alpha: 0.0, beta: 0.0 };

    pub fn random<R: Rng + ?Sized>(rng: &mut R, strength: f64) -> Self {
        let alpha = rng.gen_range(-strength..strength);
        let rest = strength - alpha.abs();
        let beta = if rest > 0.0 { rng.gen_range(-rest..rest) } else { 0.0 };
        Self { alpha, beta }
    }

    pub fn eval(&self, t: f64) -> f64 {
        t + self.alpha * (PI * t).sin() / PI + self.beta * (2.0 * PI * t).sin() / (2.0 * PI)
    }

    /// Inverse by Newton's method (the derivative stays above `1 - |α| - |β|`).
    pub fn inverse_eval(&self, u: f64) -> f64 {
        let mut t = u;
        for _ in 0..50 {
            let d = 1.0 + self.alpha * (PI * t).cos() + self.beta * (2.0 * PI * t).cos();
            let step = (self.eval(t) - u) / d;
            t = (t - step).clamp(0.0, 1.0);
            if step.abs() < 1e-15 {
                break;
            }
        }
        t
    }

    pub fn scaled(&self, s: f64) -> Warp {
        Warp { alpha: s * self.alpha, beta: s * self.beta }
    }

    pub fn sample(&self, intervals: usize) -> Diffeo {
        Diffeo::from_fn(intervals, |t| self.eval(t)).expect("warp is increasing")
    }

    pub fn sample_inverse(&self, intervals: usize) -> Diffeo {
        Diffeo::from_fn(intervals, |t| self.inverse_eval(t)).expect("warp is increasing")
    }
}

pub fn random_diffeo<R: Rng + ?Sized>(rng: &mut R, intervals: usize) -> Diffeo {
    Warp::random(rng, 0.8).sample(intervals)
}

/// Smooth tangent field `t ↦ P_{c(t)} A(t)` with `A` a random trigonometric
/// polynomial in ambient coordinates and `P` the tangent projection.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothField {
    pub coefficients: [[f64; 3]; 4],
}

impl SmoothField {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut coefficients = [[0.0; 3]; 4];
        for row in coefficients.iter_mut() {
            for x in row.iter_mut() {
                *x = rng.gen_range(-1.0..1.0);
            }
        }
        Self { coefficients }
    }

    pub fn eval(&self, m: Manifold, p: &Coords, t: f64) -> Coords {
        let c = &self.coefficients;
        let mut a = c[0];
        a = vec3::axpy(&a, (PI * t).cos(), &c[1]);
        a = vec3::axpy(&a, (2.0 * PI * t).sin(), &c[2]);
        a = vec3::axpy(&a, t * t, &c[3]);
        m.project_tangent(p, &a)
    }

    /// Samples the field along `c`, evaluating at parameters `phi(t_i)`.
    pub fn sample_with(&self, c: &DiscreteCurve, phi: impl Fn(f64) -> f64) -> VectorField {
        let m = c.manifold();
        let n = c.intervals();
        VectorField::new(
            c.points().iter().enumerate().map(|(i, p)| self.eval(m, p, phi(i as f64 / n as f64))).collect(),
        )
    }
}

/// Random pair of curves on the same manifold, near enough for the
/// pointwise initialization of geodesics.
pub fn random_pair<R: Rng + ?Sized>(
    rng: &mut R,
    m: Manifold,
    intervals: usize,
) -> Result<(DiscreteCurve, DiscreteCurve)> {
    let first = SmoothCurve::random(rng, m);
    let length = first.profile.length * rng.gen_range(0.8..1.25);
    let mut profile = Profile::random(rng, length);
    profile.angle = first.profile.angle + rng.gen_range(-0.6..0.6);
    profile.offset = [rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)];
    let second = SmoothCurve::new(m, profile);
    Ok((first.sample(intervals)?, second.sample(intervals)?))
}

/// A random shape and a deformed, randomly reparameterized copy of it:
/// profile coefficients move by up to `deformation` times their range, the
/// chord by up to 15% and the orientation by up to 0.2 rad.
pub fn related_pair<R: Rng + ?Sized>(
    rng: &mut R,
    m: Manifold,
    intervals: usize,
    deformation: f64,
) -> Result<(DiscreteCurve, DiscreteCurve)> {
    let first = SmoothCurve::random(rng, m);
    let p = &first.profile;
    let mut q = p.clone();
    let budget = 0.5 * p.length / (PI * (1..=MODES).map(|k| k as f64).sum::<f64>());
    for k in 0..MODES {
        let a = q.a[k] + deformation * rng.gen_range(-budget..budget);
        q.a[k] = a.clamp(-budget, budget);
        q.b[k] += deformation * rng.gen_range(-0.35..0.35) * p.length / (k + 1) as f64;
    }
    // the a_k budget scales with the chord, so only lengthen it
    q.length *= rng.gen_range(1.0..1.15);
    q.angle += rng.gen_range(-0.2..0.2);
    q.offset = [rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)];
    let warp = Warp::random(rng, 0.6);
    let second = SmoothCurve::new(m, q);
    Ok((first.sample(intervals)?, second.sample_with(intervals, |t| warp.eval(t))?))
}

/// Random path of curves `c(s, t) = B_s(ψ_s(t))`: the profile blends
/// between two random profiles and the parameterization drifts by a warp
/// growing with `s`, so the path has both horizontal and vertical motion.
pub fn random_path<R: Rng + ?Sized>(rng: &mut R, m: Manifold, steps: usize, intervals: usize) -> Result<CurvePath> {
    let length = rng.gen_range(0.6..1.2);
    let start = Profile::random(rng, length);
    let length = start.length * rng.gen_range(0.8..1.25);
    let mut end = Profile::random(rng, length);
    end.angle = start.angle + rng.gen_range(-0.4..0.4);
    end.offset = [rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)];
    let warp = Warp::random(rng, 0.6);
    let rows = (0..=steps)
        .map(|k| {
            let s = k as f64 / steps as f64;
            let curve = SmoothCurve::new(m, start.blend(&end, s));
            let w = warp.scaled(s);
            curve.sample_with(intervals, |t| w.eval(t))
        })
        .collect::<Result<Vec<_>>>()?;
    CurvePath::new(rows)
}

/// Curve sampled at uniform arc length, from a densely sampled parameterization `f`.
pub fn arc_length_sampled(m: Manifold, intervals: usize, f: impl Fn(f64) -> Coords) -> Result<DiscreteCurve> {
    let fine = 64 * intervals;
    let points: Vec<Coords> = (0..=fine).map(|i| f(i as f64 / fine as f64)).collect();
    let mut cumulative = vec![0.0];
    for w in points.windows(2) {
        let last = *cumulative.last().expect("non-empty");
        cumulative.push(last + m.dist(&w[0], &w[1]));
    }
    let total = cumulative[fine];
    let mut j = 0;
    let samples = (0..=intervals)
        .map(|i| {
            let target = total * i as f64 / intervals as f64;
            while j + 1 < fine && cumulative[j + 1] < target {
                j += 1;
            }
            let span = cumulative[j + 1] - cumulative[j];
            let lambda = if span > 0.0 { ((target - cumulative[j]) / span).clamp(0.0, 1.0) } else { 0.0 };
            f((j as f64 + lambda) / fine as f64)
        })
        .collect();
    DiscreteCurve::new(m, samples)
}

/// Ways of parameterizing a curve in the segment and arc experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Parameterization {
    /// Uniform in the chart coordinates.
    Chart,
    /// Uniform in Riemannian arc length.
    ArcLength,
    Warped(Warp),
}

/// Pairs of initial parameterizations `(left, right)` for the five
/// experiments on one pair of shapes.
pub const SEGMENT_VARIANTS: [(Parameterization, Parameterization); 5] = [
    (Parameterization::Chart, Parameterization::ArcLength),
    (Parameterization::Chart, Parameterization::Warped(Warp { alpha: 0.6, beta: 0.0 })),
    (Parameterization::ArcLength, Parameterization::Chart),
    (Parameterization::ArcLength, Parameterization::Warped(Warp { alpha: -0.5, beta: 0.2 })),
    (Parameterization::Warped(Warp { alpha: 0.4, beta: -0.3 }), Parameterization::ArcLength),
];

fn parameterized(
    m: Manifold,
    intervals: usize,
    p: Parameterization,
    f: impl Fn(f64) -> Coords,
) -> Result<DiscreteCurve> {
    match p {
        Parameterization::Chart => DiscreteCurve::from_fn(m, intervals, f),
        Parameterization::ArcLength => arc_length_sampled(m, intervals, f),
        Parameterization::Warped(w) => DiscreteCurve::from_fn(m, intervals, |t| f(w.eval(t))),
    }
}

/// Endpoints of a pair of straight segments in the half-plane chart, one on
/// either side of the imaginary axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentPair {
    pub left: [[f64; 2]; 2],
    pub right: [[f64; 2]; 2],
}

impl SegmentPair {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let left = [
            [rng.gen_range(-0.35..-0.2), rng.gen_range(0.5..0.7)],
            [rng.gen_range(-0.3..-0.1), rng.gen_range(2.2..2.6)],
        ];
        let right =
            [[rng.gen_range(0.2..0.35), rng.gen_range(0.6..0.8)], [rng.gen_range(0.0..0.3), rng.gen_range(2.0..2.4)]];
        Self { left, right }
    }

    /// The pair sampled with one of [`SEGMENT_VARIANTS`].
    pub fn sample(&self, variant: usize, intervals: usize) -> Result<(DiscreteCurve, DiscreteCurve)> {
        let (pl, pr) = SEGMENT_VARIANTS[variant % SEGMENT_VARIANTS.len()];
        let seg = |e: [[f64; 2]; 2]| {
            move |t: f64| [e[0][0] + t * (e[1][0] - e[0][0]), e[0][1] + t * (e[1][1] - e[0][1]), 0.0]
        };
        let m = Manifold::HyperbolicHalfPlane;
        Ok((parameterized(m, intervals, pl, seg(self.left))?, parameterized(m, intervals, pr, seg(self.right))?))
    }
}

/// Pair of arcs on the sphere: a piece of a meridian and a bent arc beside it.
pub fn sphere_arc_pair<R: Rng + ?Sized>(
    rng: &mut R,
    variant: usize,
    intervals: usize,
) -> Result<(DiscreteCurve, DiscreteCurve)> {
    let (pl, pr) = SEGMENT_VARIANTS[variant % SEGMENT_VARIANTS.len()];
    let lon0 = rng.gen_range(-0.5..-0.3);
    let lon1 = rng.gen_range(0.3..0.5);
    let bend = rng.gen_range(0.1..0.3);
    let point = |lat: f64, lon: f64| [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()];
    let m = Manifold::Sphere;
    let left = move |t: f64| point(-0.6 + 1.2 * t, lon0);
    let right = move |t: f64| point(-0.5 + 1.1 * t, lon1 + bend * (PI * t).sin());
    Ok((parameterized(m, intervals, pl, left)?, parameterized(m, intervals, pr, right)?))
}

/// Plane spiral `r(t) = r0 + r1 t`, `θ(t) = θ0 + turns · 2π t`.
pub fn spiral(intervals: usize, r0: f64, r1: f64, theta0: f64, turns: f64) -> Result<DiscreteCurve> {
    DiscreteCurve::from_fn(Manifold::Plane, intervals, |t| {
        let r = r0 + r1 * t;
        let th = theta0 + 2.0 * PI * turns * t;
        [r * th.cos(), r * th.sin(), 0.0]
    })
}

/// Plane S-shape `(t, amplitude · sin(2πt))`.
pub fn s_shape(intervals: usize, amplitude: f64) -> Result<DiscreteCurve> {
    DiscreteCurve::from_fn(Manifold::Plane, intervals, |t| [t, amplitude * (2.0 * PI * t).sin(), 0.0])
}
