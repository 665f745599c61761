use curvematch::*;

type Field = Box<dyn Fn(f64) -> ([f64; 3], [f64; 3], [f64; 3])>;

/// Sphere curve in spherical coordinates with the field `w = P_c A`,
/// returning `(c, w, ∇_t w)` where `∇_t w = P_c A' - <c, A> c'`.
fn sphere_case() -> Field {
    Box::new(|t: f64| {
        let (th, dth) = (0.5 + 0.8 * t, 0.8);
        let (ph, dph) = (0.3 + 1.2 * t + 0.4 * t * t, 1.2 + 0.8 * t);
        let c = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
        let dc = [
            dth * th.cos() * ph.cos() - dph * th.sin() * ph.sin(),
            dth * th.cos() * ph.sin() + dph * th.sin() * ph.cos(),
            -dth * th.sin(),
        ];
        let a = [(2.0 * t).sin(), 1.0 + t * t, (3.0 * t).cos()];
        let da = [2.0 * (2.0 * t).cos(), 2.0 * t, -3.0 * (3.0 * t).sin()];
        let dot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        let proj = |v: &[f64; 3]| {
            let d = dot(&c, v);
            [v[0] - d * c[0], v[1] - d * c[1], v[2] - d * c[2]]
        };
        let w = proj(&a);
        let pa = proj(&da);
        let ca = dot(&c, &a);
        (c, w, [pa[0] - ca * dc[0], pa[1] - ca * dc[1], pa[2] - ca * dc[2]])
    })
}

/// Half-plane curve and field with the Levi-Civita derivative from the
/// Christoffel symbols of `(dx² + dy²) / y²`.
fn hyperbolic_case() -> Field {
    Box::new(|t: f64| {
        let (x, y) = (0.3 + t, 1.0 + 0.5 * t * t);
        let (dx, dy) = (1.0, t);
        let (a, b) = ((2.0 * t).cos(), 0.5 + t.sin());
        let (da, db) = (-2.0 * (2.0 * t).sin(), t.cos());
        let nx = da - (dx * b + dy * a) / y;
        let ny = db + (dx * a - dy * b) / y;
        ([x, y, 0.0], [a, b, 0.0], [nx, ny, 0.0])
    })
}

fn plane_case() -> Field {
    Box::new(|t: f64| {
        let c = [t, (2.0 * t).sin(), 0.0];
        let w = [t * t, (3.0 * t).cos(), 0.0];
        (c, w, [2.0 * t, -3.0 * (3.0 * t).sin(), 0.0])
    })
}

fn max_error(m: Manifold, case: &Field, n: usize) -> f64 {
    let c = DiscreteCurve::from_fn(m, n, |t| case(t).0).unwrap();
    let w = VectorField::new((0..=n).map(|i| case(i as f64 / n as f64).1).collect());
    let d = covariant_derivative(&c, &w).unwrap();
    (0..=n)
        .map(|i| {
            let (p, _, exact) = case(i as f64 / n as f64);
            let e = d.vectors()[i];
            let diff = [e[0] - exact[0], e[1] - exact[1], e[2] - exact[2]];
            m.norm(&p, &diff)
        })
        .fold(0.0, f64::max)
}

#[test]
fn covariant_derivative_is_second_order() {
    for (m, case) in [
        (Manifold::Plane, plane_case()),
        (Manifold::HyperbolicHalfPlane, hyperbolic_case()),
        (Manifold::Sphere, sphere_case()),
    ] {
        let errors: Vec<f64> = [50, 100, 200].iter().map(|&n| max_error(m, &case, n)).collect();
        for pair in errors.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!(order >= 1.9, "{m:?}: errors {errors:?}, order {order}");
        }
    }
}
