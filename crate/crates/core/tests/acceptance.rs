//! Exit criteria for the crate, one test per criterion. Each prints a single
//! `PASS`/`FAIL` line; run with `--nocapture` to see all of them.

mod common;

use std::f64::consts::{LN_2, TAU};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use ptm_core::codec::{build_template, encode_ptm, PtmCode, RAYS_PER_M};
use ptm_core::fidelity::{
    run_fidelity, summarize, synthetic_records, FidelityConfig, SyntheticSpec,
};
use ptm_core::geometry::{angle_between, mass_center, Angle, Point2};
use ptm_core::ingest::{load_airbus_csv, DEFAULT_AIRBUS_SIZE};
use ptm_core::loss::{gradcheck, polar_centerness, pt_iou_loss, relative_error, GradcheckConfig};
use ptm_core::raster::{
    connected_components, mask_iou, mask_to_contour, rasterize, rle_decode, rle_encode, BitMask,
    RleString,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!(
        "criterion {id} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn fidelity_run(spec: &str) -> (ptm_core::fidelity::BucketSummary, Duration) {
    let start = Instant::now();
    let spec: SyntheticSpec = spec.parse().unwrap();
    let records = synthetic_records(&spec, 42, (256, 256)).unwrap();
    let config = FidelityConfig {
        m: 2,
        uniform_rays: Some(40),
        grid: Some((256, 256)),
    };
    let rows = run_fidelity(&records, &config);
    (summarize(&rows).overall, start.elapsed())
}

#[test]
fn c1_lens_fidelity() {
    let (s, elapsed) = fidelity_run("lens:a=8,b=1,n=100");
    let (ptm, uni) = (s.mean_iou_ptm.unwrap(), s.mean_iou_uniform.unwrap());
    let win = s.win_rate.unwrap();
    let pass = s.count == 100
        && s.skipped == 0
        && win >= 0.9
        && ptm > uni
        && elapsed < Duration::from_secs(30);
    report(
        1,
        "lens a/b=8 template beats uniform",
        pass,
        format!("win rate {win:.3} (>= 0.9), mean iou {ptm:.4} vs {uni:.4}, {elapsed:.2?} (< 30s)"),
    );
    assert!(pass);
}

#[test]
fn c2_circle_null() {
    let (s, elapsed) = fidelity_run("circle:r=50,n=50");
    let (ptm, uni) = (s.mean_iou_ptm.unwrap(), s.mean_iou_uniform.unwrap());
    let gap = (ptm - uni).abs();
    let pass = s.count == 50
        && gap <= 0.005
        && ptm >= 0.98
        && uni >= 0.98
        && elapsed < Duration::from_secs(15);
    report(
        2,
        "circle r=50 shows no template advantage",
        pass,
        format!("|gap| {gap:.4} (<= 0.005), mean iou {ptm:.4} / {uni:.4} (>= 0.98), {elapsed:.2?} (< 15s)"),
    );
    assert!(pass);
}

#[test]
fn c3_ray_count_law() {
    let mut pass = true;
    let mut details = Vec::new();
    for m in [1, 2, 3, 5] {
        let t = build_template(m, Angle::new(0.7)).unwrap();
        let total: f64 = t.delta_thetas().iter().sum();
        let ok = t.len() == RAYS_PER_M * m
            && t.ray_angles().len() == 20 * m
            && (total - TAU).abs() <= 1e-9;
        pass &= ok;
        details.push(format!(
            "m={m}: {} rays, sum {:.1e} off",
            t.len(),
            (total - TAU).abs()
        ));
    }
    report(3, "20m rays closing the circle", pass, details.join("; "));
    assert!(pass);
}

/// Loss value computed directly from its definition, kept separate from the
/// library kernel.
fn reference_loss(d: &[f64], d_star: &[f64], dt: &[f64]) -> f64 {
    let mut hi = 0.0;
    let mut lo = 0.0;
    for i in 0..d.len() {
        hi += d[i].max(d_star[i]) * dt[i];
        lo += d[i].min(d_star[i]) * dt[i];
    }
    (hi / lo).ln()
}

#[test]
fn c4_gradient_suite() {
    let h = 1e-6;
    let margin = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut checks = 0;
    while checks < 1000 {
        let m = rng.random_range(1..=3);
        let t = build_template(m, Angle::new(rng.random_range(0.0..TAU))).unwrap();
        let n = t.len();
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
        let d_star: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
        if d.iter().zip(&d_star).any(|(a, b)| (a - b).abs() < margin) {
            continue;
        }
        let analytic = pt_iou_loss(&d, &d_star, t.delta_thetas()).unwrap().grad_d;
        let i = rng.random_range(0..n);
        let mut up = d.clone();
        let mut down = d.clone();
        up[i] += h;
        down[i] -= h;
        let numeric = (reference_loss(&up, &d_star, t.delta_thetas())
            - reference_loss(&down, &d_star, t.delta_thetas()))
            / (2.0 * h);
        worst = worst.max(relative_error(analytic[i], numeric));
        checks += 1;
    }
    let library = gradcheck(GradcheckConfig::default());
    let pass = worst <= 1e-5 && library.passed() && library.trials == 1000;
    report(
        4,
        "1000 kink-filtered gradient checks",
        pass,
        format!(
            "max rel err {worst:.2e} (independent), {:.2e} (library), threshold 1e-5",
            library.max_rel_err
        ),
    );
    assert!(pass);
}

#[test]
fn c5_loss_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = build_template(2, Angle::new(1.1)).unwrap();
    let dt = t.delta_thetas();
    let d: Vec<f64> = (0..40).map(|_| rng.random_range(1.0..10.0)).collect();
    let d_star: Vec<f64> = (0..40).map(|_| rng.random_range(1.0..10.0)).collect();

    let zero = pt_iou_loss(&d, &d, dt).unwrap().value;
    let doubled: Vec<f64> = d_star.iter().map(|x| 2.0 * x).collect();
    let ln2 = pt_iou_loss(&doubled, &d_star, dt).unwrap().value;
    let base = pt_iou_loss(&d, &d_star, dt).unwrap().value;
    let mut scale_err = 0.0f64;
    for k in [0.01, 1.0, 100.0] {
        let kd: Vec<f64> = d.iter().map(|x| k * x).collect();
        let kds: Vec<f64> = d_star.iter().map(|x| k * x).collect();
        scale_err = scale_err.max((pt_iou_loss(&kd, &kds, dt).unwrap().value - base).abs());
    }
    let circle = PtmCode::new(Point2::new(10.0, 10.0), Angle::ZERO, 2, vec![37.5; 40]).unwrap();
    let centerness = polar_centerness(circle.distances()).unwrap();

    let pass = zero == 0.0
        && (ln2 - LN_2).abs() <= 1e-12
        && scale_err <= 1e-12
        && (centerness - 1.0).abs() <= 1e-9;
    report(
        5,
        "loss identities",
        pass,
        format!(
            "L(d,d)={zero:e}, |L(2d*,d*)-ln2|={:.1e}, scale drift {scale_err:.1e}, circle centerness {centerness}",
            (ln2 - LN_2).abs()
        ),
    );
    assert!(pass);
}

#[test]
fn c6_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut rot_err = 0.0f64;
    let mut scale_err = 0.0f64;
    let mut angle_err = 0.0f64;
    for _ in 0..200 {
        let center = Point2::new(rng.random_range(50.0..150.0), rng.random_range(50.0..150.0));
        let n = rng.random_range(5..30);
        let radius = rng.random_range(5.0..60.0);
        let poly = common::random_convex(&mut rng, center, radius, n, 1.0);
        let m = rng.random_range(1..=3);
        let base = encode_ptm(&poly, m).unwrap();
        let c = mass_center(&poly).unwrap();

        let rho = rng.random_range(0.0..TAU);
        let rotated = poly.map_vertices(|v| v.rotate_about(c, rho)).unwrap();
        let r = encode_ptm(&rotated, m).unwrap();
        for (a, b) in base.distances().iter().zip(r.distances()) {
            rot_err = rot_err.max((a - b).abs());
        }
        let shift = angle_between(base.main_angle().offset(rho), r.main_angle());
        angle_err = angle_err.max(shift.min(TAU - shift));

        let k = rng.random_range(0.1..10.0);
        let scaled = poly
            .map_vertices(|v| Point2::new(c.x + k * (v.x - c.x), c.y + k * (v.y - c.y)))
            .unwrap();
        let s = encode_ptm(&scaled, m).unwrap();
        for (a, b) in base.distances().iter().zip(s.distances()) {
            scale_err = scale_err.max((k * a - b).abs());
        }
    }
    let pass = rot_err <= 1e-6 && scale_err <= 1e-9;
    report(
        6,
        "rotation and scale equivariance on 200 convex polygons",
        pass,
        format!("rotation {rot_err:.1e} (<= 1e-6, main angle drift {angle_err:.1e}), scale {scale_err:.1e} (<= 1e-9)"),
    );
    assert!(pass);
}

#[test]
fn c7_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rle_ok = 0;
    for _ in 0..1000 {
        let density = rng.random::<f64>();
        let bits = (0..64 * 64)
            .map(|_| rng.random::<f64>() < density)
            .collect();
        let mask = BitMask::from_bits(64, 64, bits).unwrap();
        let text = rle_encode(&mask).to_string();
        let back = rle_decode(&text.parse::<RleString>().unwrap(), 64, 64).unwrap();
        rle_ok += usize::from(back == mask);
    }

    let mut worst_iou = 1.0f64;
    for _ in 0..200 {
        let n = rng.random_range(3..25);
        let radius = rng.random_range(15.0..60.0);
        let poly = common::random_convex(&mut rng, Point2::new(64.0, 64.0), radius, n, 400.0);
        let mask = rasterize(&poly, 128, 128).unwrap();
        let mut rebuilt = BitMask::new(128, 128).unwrap();
        for comp in connected_components(&mask) {
            let outline = mask_to_contour(&comp).unwrap();
            for (r, c) in rasterize(&outline, 128, 128).unwrap().iter_set() {
                rebuilt.set(r, c, true);
            }
        }
        worst_iou = worst_iou.min(mask_iou(&mask, &rebuilt).unwrap());
    }
    let pass = rle_ok == 1000 && worst_iou >= 0.99;
    report(
        7,
        "RLE and raster/contour round trips",
        pass,
        format!("{rle_ok}/1000 RLE bit-exact, min contour IoU {worst_iou:.4} (>= 0.99)"),
    );
    assert!(pass);
}

#[test]
fn c8_airbus_ingestion() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/airbus_sample.csv");
    let (w, h) = DEFAULT_AIRBUS_SIZE;
    let loaded = load_airbus_csv(&path, w, h).unwrap();

    // source masks straight from the file, keyed like the loader's ids
    let text = std::fs::read_to_string(&path).unwrap();
    let mut sources: Vec<(String, String, BitMask)> = Vec::new();
    let mut per_image = std::collections::HashMap::<String, usize>::new();
    for line in text.lines().skip(1) {
        let (image, enc) = line.split_once(',').unwrap();
        if enc.trim().is_empty() {
            continue;
        }
        let k = per_image.entry(image.to_owned()).or_insert(0);
        let mask = rle_decode(&enc.parse().unwrap(), w, h).unwrap();
        sources.push((image.to_owned(), k.to_string(), mask));
        *k += 1;
    }

    let mut worst_iou = 1.0f64;
    for (image, ship, mask) in &sources {
        let mut rebuilt = BitMask::new(w, h).unwrap();
        for rec in loaded.records.iter().filter(|r| {
            &r.image_id == image && r.instance_id.split('/').next() == Some(ship.as_str())
        }) {
            for (r, c) in rasterize(&rec.polygon, w, h).unwrap().iter_set() {
                rebuilt.set(r, c, true);
            }
        }
        worst_iou = worst_iou.min(mask_iou(mask, &rebuilt).unwrap());
    }
    let ids: Vec<String> = loaded
        .records
        .iter()
        .map(|r| format!("{}:{}", r.image_id, r.instance_id))
        .collect();
    let pass = loaded.records.len() == 5
        && loaded.skipped.is_empty()
        && sources.len() == 4
        && worst_iou >= 0.99;
    report(
        8,
        "Airbus CSV ingestion",
        pass,
        format!(
            "{} records (expected 5), {} skipped, min reconstruction IoU {worst_iou:.4} (>= 0.99)",
            loaded.records.len(),
            loaded.skipped.len()
        ),
    );
    assert_eq!(
        ids,
        [
            "f00d0001.jpg:0",
            "f00d0001.jpg:1/0",
            "f00d0001.jpg:1/1",
            "f00d0001.jpg:2",
            "0cafe123.jpg:0"
        ]
    );
    let areas: Vec<f64> = loaded.records.iter().map(|r| r.polygon.area()).collect();
    assert_eq!(areas, [720.0, 400.0, 300.0, 1700.0, 800.0]);
    assert!(pass);
}
