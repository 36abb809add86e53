mod common;

use std::f64::consts::TAU;

use proptest::prelude::*;
use ptm_core::codec::{build_template, decode, encode_ptm, encode_uniform, PolarCode};
use ptm_core::fidelity::{run_fidelity, synthetic_records, FidelityConfig, SyntheticSpec};
use ptm_core::geometry::{
    mass_center, point_in_polygon, ray_max_distance, Angle, Containment, Point2, Polygon,
};
use ptm_core::loss::pt_iou_loss;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn convex_polygon() -> impl Strategy<Value = Polygon> {
    (
        any::<u64>(),
        3usize..40,
        2.0f64..80.0,
        -200.0f64..200.0,
        -200.0f64..200.0,
    )
        .prop_map(|(seed, n, r, cx, cy)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            common::random_convex(&mut rng, Point2::new(cx, cy), r, n, 0.5)
        })
}

/// Exit distance from an interior point of a convex CCW polygon, by clipping
/// the ray against each edge's half-plane.
fn convex_exit(poly: &Polygon, o: Point2, theta: f64) -> f64 {
    let (uy, ux) = theta.sin_cos();
    poly.edges()
        .filter_map(|(a, b)| {
            let (nx, ny) = (b.y - a.y, a.x - b.x);
            let along = nx * ux + ny * uy;
            (along > 0.0).then(|| (nx * (a.x - o.x) + ny * (a.y - o.y)) / along)
        })
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ray_cast_matches_halfplane_clip(poly in convex_polygon(), theta in 0.0f64..TAU) {
        let c = mass_center(&poly).unwrap();
        let got = ray_max_distance(&poly, c, Angle::new(theta)).unwrap();
        let want = convex_exit(&poly, c, theta);
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0), "{got} vs {want}");
    }

    #[test]
    fn centroid_of_convex_is_inside(poly in convex_polygon()) {
        let c = mass_center(&poly).unwrap();
        prop_assert_eq!(point_in_polygon(&poly, c), Containment::Inside);
    }

    #[test]
    fn centroid_follows_translation(poly in convex_polygon(), dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let c = mass_center(&poly).unwrap();
        let moved = poly.map_vertices(|v| Point2::new(v.x + dx, v.y + dy)).unwrap();
        let c2 = mass_center(&moved).unwrap();
        prop_assert!((c2.x - c.x - dx).abs() < 1e-9 && (c2.y - c.y - dy).abs() < 1e-9);
    }

    #[test]
    fn orientation_does_not_change_area_or_center(poly in convex_polygon()) {
        let rev = poly.reversed();
        prop_assert!((rev.area() - poly.area()).abs() <= 1e-9 * poly.area());
        let (a, b) = (mass_center(&poly).unwrap(), mass_center(&rev).unwrap());
        prop_assert!(a.distance(b) < 1e-9);
    }

    #[test]
    fn ptm_code_invariants(poly in convex_polygon(), m in 1usize..5) {
        let code = encode_ptm(&poly, m).unwrap();
        let d = code.distances();
        prop_assert_eq!(d.len(), 20 * m);
        prop_assert!(d.iter().all(|x| x.is_finite() && *x > 0.0));
        let max = d.iter().cloned().fold(0.0, f64::max);
        prop_assert!(d[0] >= 0.999 * max);
        prop_assert_eq!(code.angles()[0], code.main_angle());
    }

    #[test]
    fn decoded_polygon_is_star_shaped(poly in convex_polygon(), m in 1usize..4) {
        let code = encode_ptm(&poly, m).unwrap();
        let out = decode(&code);
        for (theta, d) in code.angles().iter().zip(code.distances()) {
            let reach = ray_max_distance(&out, code.center(), *theta).unwrap();
            prop_assert!((reach - d).abs() <= 1e-9 * d.max(1.0), "{reach} vs {d}");
        }
    }

    #[test]
    fn uniform_code_hits_boundary(poly in convex_polygon(), n in 3usize..100) {
        let code = encode_uniform(&poly, n).unwrap();
        for (theta, d) in code.angles().iter().zip(code.distances()) {
            let want = convex_exit(&poly, code.center(), theta.radians());
            prop_assert!((want - d).abs() <= 1e-9 * want.max(1.0));
        }
    }

    #[test]
    fn loss_is_symmetric_and_nonnegative(
        seed in any::<u64>(),
        m in 1usize..4,
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = build_template(m, Angle::new(rng.random_range(0.0..TAU))).unwrap();
        let d: Vec<f64> = (0..t.len()).map(|_| rng.random_range(0.1..20.0)).collect();
        let s: Vec<f64> = (0..t.len()).map(|_| rng.random_range(0.1..20.0)).collect();
        let ab = pt_iou_loss(&d, &s, t.delta_thetas()).unwrap().value;
        let ba = pt_iou_loss(&s, &d, t.delta_thetas()).unwrap().value;
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < 1e-12);
    }
}

#[test]
fn fidelity_grows_with_ray_budget() {
    let mut records = Vec::new();
    for (i, spec) in [
        "lens:a=8,b=1,n=10",
        "ellipse:a=4,b=1,n=10",
        "rectangle:a=3,b=1,n=10",
    ]
    .iter()
    .enumerate()
    {
        let spec: SyntheticSpec = spec.parse().unwrap();
        records.extend(synthetic_records(&spec, 100 + i as u64, (256, 256)).unwrap());
    }
    let mut last = (0.0, 0.0);
    for m in [1, 2, 4] {
        let config = FidelityConfig {
            m,
            uniform_rays: None,
            grid: Some((256, 256)),
        };
        let rows = run_fidelity(&records, &config);
        let n = rows.len() as f64;
        let ptm = rows.iter().map(|r| r.iou_ptm.unwrap()).sum::<f64>() / n;
        let uni = rows.iter().map(|r| r.iou_uniform.unwrap()).sum::<f64>() / n;
        assert!(
            ptm >= last.0 && uni >= last.1,
            "m={m}: {ptm} {uni} after {last:?}"
        );
        last = (ptm, uni);
    }
}

#[test]
fn run_fidelity_is_deterministic_across_thread_counts() {
    let spec: SyntheticSpec = "lens:a=6,b=1,n=20".parse().unwrap();
    let records = synthetic_records(&spec, 42, (256, 256)).unwrap();
    let config = FidelityConfig::new(2);
    let parallel = run_fidelity(&records, &config);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_fidelity(&records, &config));
    assert_eq!(parallel, single);
}
