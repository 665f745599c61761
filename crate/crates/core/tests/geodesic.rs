use curvematch::generate::random_pair;
use curvematch::geodesic::{srv_distance, srv_inverse, srv_transform};
use curvematch::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params() -> ElasticParams {
    ElasticParams::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn translation_length_is_offset(seed in any::<u64>(), dx in -2.0f64..2.0, dy in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c0, _) = random_pair(&mut rng, Manifold::Plane, 100).unwrap();
        let shifted = DiscreteCurve::new(
            Manifold::Plane,
            c0.points().iter().map(|p| [p[0] + dx, p[1] + dy, 0.0]).collect(),
        ).unwrap();
        let g = geodesic_plane(&c0, &shifted, &params(), &SolverConfig::default()).unwrap();
        prop_assert!((g.length - dx.hypot(dy)).abs() <= 1e-9);
    }

    #[test]
    fn plane_length_matches_srv_distance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c0, c1) = random_pair(&mut rng, Manifold::Plane, 100).unwrap();
        let g = geodesic_plane(&c0, &c1, &params(), &SolverConfig::default()).unwrap();
        let d = srv_distance(&c0, &c1, &params()).unwrap();
        prop_assert!((g.length - d).abs() <= 0.01 * d, "{} {}", g.length, d);
        prop_assert_eq!(g.path.first(), &c0);
        prop_assert_eq!(g.path.last(), &c1);
    }

    #[test]
    fn srv_round_trip_is_first_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, _) = random_pair(&mut rng, Manifold::Plane, 100).unwrap();
        let back = srv_inverse(&srv_transform(&c).unwrap());
        prop_assert!(back.max_distance(&c).unwrap() <= 2.0 / 100.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn curved_geodesics_are_symmetric_and_constant_speed(seed in any::<u64>(), sphere in any::<bool>()) {
        let m = if sphere { Manifold::Sphere } else { Manifold::HyperbolicHalfPlane };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c0, c1) = random_pair(&mut rng, m, 60).unwrap();
        let cfg = SolverConfig::default();
        let f = geodesic_bvp(&c0, &c1, &params(), &cfg).unwrap();
        let b = geodesic_bvp(&c1, &c0, &params(), &cfg).unwrap();
        prop_assert!(f.converged && b.converged);
        prop_assert!((f.length - b.length).abs() <= 1e-6 * f.length.max(1.0), "{} {}", f.length, b.length);
        prop_assert!((f.energy - f.length * f.length).abs() <= 0.01 * f.energy);
        prop_assert!(f.energy_history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(f.path.first(), &c0);
        prop_assert_eq!(f.path.last(), &c1);
        prop_assert!((path_length(&f.path, &params()).unwrap() - f.length).abs() <= 1e-12);
    }
}

#[test]
fn bvp_reports_non_convergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (c0, c1) = random_pair(&mut rng, Manifold::Sphere, 60).unwrap();
    let cfg = SolverConfig { max_iterations: 1, ..SolverConfig::default() };
    let g = geodesic_bvp(&c0, &c1, &params(), &cfg).unwrap();
    assert!(!g.converged);
    assert!(matches!(g.ensure_converged(), Err(Error::NotConverged { .. })));
}

#[test]
fn bvp_rejects_antipodal_initialization() {
    let c0 = DiscreteCurve::from_fn(Manifold::Sphere, 20, |t| {
        let a = 0.5 * t;
        [a.sin(), 0.0, a.cos()]
    })
    .unwrap();
    let c1 = DiscreteCurve::new(Manifold::Sphere, c0.points().iter().map(|p| [-p[0], -p[1], -p[2]]).collect()).unwrap();
    assert!(matches!(geodesic_bvp(&c0, &c1, &params(), &SolverConfig::default()), Err(Error::Singularity(_))));
}

#[test]
fn solver_config_is_validated() {
    let c = DiscreteCurve::from_fn(Manifold::Plane, 20, |t| [t, 0.0, 0.0]).unwrap();
    let cfg = SolverConfig { n_steps: 1, ..SolverConfig::default() };
    assert!(matches!(geodesic_bvp(&c, &c, &params(), &cfg), Err(Error::Contract(_))));
}
